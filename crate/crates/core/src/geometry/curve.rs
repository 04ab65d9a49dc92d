//! Boundary components and their parametrizations.

use super::Point;
use crate::numerics::adaptive_simpson;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Local evaluation of a boundary component.
#[derive(Debug, Clone, Copy)]
pub struct LocalPoint {
    pub position: Point,
    pub tangent: Point,
    pub curvature: f64,
}

/// Position and first two derivatives in the component's native parameter.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub p: Point,
    pub d1: Point,
    pub d2: Point,
}

/// Monotone arclength table for the ellipse `(a cos θ, b sin θ)`.
#[derive(Debug, Clone)]
pub struct EllipseCurve {
    pub a: f64,
    pub b: f64,
    nodes: Vec<f64>,
    length: f64,
}

const ELLIPSE_NODES: usize = 512;

impl EllipseCurve {
    pub fn new(a: f64, b: f64) -> Self {
        let h = TWO_PI / ELLIPSE_NODES as f64;
        let mut nodes = Vec::with_capacity(ELLIPSE_NODES + 1);
        nodes.push(0.0);
        let mut acc = 0.0;
        for k in 0..ELLIPSE_NODES {
            let lo = k as f64 * h;
            acc += adaptive_simpson(&|t: f64| speed(a, b, t), lo, lo + h, 1e-13);
            nodes.push(acc);
        }
        Self {
            a,
            b,
            length: acc,
            nodes,
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn s_of_theta(&self, theta: f64) -> f64 {
        let turns = (theta / TWO_PI).floor();
        let th = theta - turns * TWO_PI;
        let h = TWO_PI / ELLIPSE_NODES as f64;
        let k = ((th / h) as usize).min(ELLIPSE_NODES - 1);
        let lo = k as f64 * h;
        let part = adaptive_simpson(&|t: f64| speed(self.a, self.b, t), lo, th, 1e-14);
        self.nodes[k] + part + turns * self.length
    }

    pub fn theta_of_s(&self, s: f64) -> f64 {
        let turns = (s / self.length).floor();
        let sl = s - turns * self.length;
        let k = match self.nodes.binary_search_by(|v| v.partial_cmp(&sl).unwrap()) {
            Ok(i) => i.min(ELLIPSE_NODES - 1),
            Err(i) => i.saturating_sub(1).min(ELLIPSE_NODES - 1),
        };
        let h = TWO_PI / ELLIPSE_NODES as f64;
        let mut th = k as f64 * h + (sl - self.nodes[k]) / speed(self.a, self.b, k as f64 * h);
        for _ in 0..20 {
            let f = self.s_of_theta(th) - sl;
            let step = f / speed(self.a, self.b, th);
            th -= step;
            if step.abs() < 1e-16 * (1.0 + th.abs()) {
                break;
            }
        }
        th + turns * TWO_PI
    }

    /// Closest point on the ellipse; returns `(distance, theta)`.
    pub fn nearest(&self, x: &Point) -> (f64, f64) {
        let (sx, sy) = (x.x.signum(), x.y.signum());
        let (y0, y1) = (x.x.abs(), x.y.abs());
        let (a, b) = (self.a, self.b);
        let (x0, x1) = if y1 > 0.0 {
            if y0 > 0.0 {
                let z0 = y0 / a;
                let z1 = y1 / b;
                let g = z0 * z0 + z1 * z1 - 1.0;
                if g != 0.0 {
                    let r0 = (a / b) * (a / b);
                    let sbar = eberly_root(r0, z0, z1, g);
                    (r0 * y0 / (sbar + r0), y1 / (sbar + 1.0))
                } else {
                    (y0, y1)
                }
            } else {
                (0.0, b)
            }
        } else {
            let numer = a * y0;
            let denom = a * a - b * b;
            if numer < denom {
                let xd = numer / denom;
                (a * xd, b * (1.0 - xd * xd).max(0.0).sqrt())
            } else {
                (a, 0.0)
            }
        };
        let px = if sx < 0.0 { -x0 } else { x0 };
        let py = if sy < 0.0 { -x1 } else { x1 };
        let d = ((x.x - px).powi(2) + (x.y - py).powi(2)).sqrt();
        let theta = (py / b).atan2(px / a).rem_euclid(TWO_PI);
        (d, theta)
    }

    pub fn jet(&self, theta: f64) -> Jet {
        let (s, c) = theta.sin_cos();
        Jet {
            p: Point::new(self.a * c, self.b * s),
            d1: Point::new(-self.a * s, self.b * c),
            d2: Point::new(-self.a * c, -self.b * s),
        }
    }
}

fn speed(a: f64, b: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (a * a * s * s + b * b * c * c).sqrt()
}

fn eberly_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 {
        0.0
    } else {
        (n0 * n0 + z1 * z1).sqrt() - 1.0
    };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// Cubic Hermite interpolant through arclength-parametrized samples.
#[derive(Debug, Clone)]
pub struct SplineCurve {
    pub s: Vec<f64>,
    pub p: Vec<Point>,
    pub m: Vec<Point>,
}

impl SplineCurve {
    pub fn length(&self) -> f64 {
        *self.s.last().unwrap()
    }

    fn segment(&self, s: f64) -> (usize, f64, f64) {
        let len = self.length();
        let sl = s.rem_euclid(len);
        let i = match self.s.binary_search_by(|v| v.partial_cmp(&sl).unwrap()) {
            Ok(i) => i.min(self.s.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.s.len() - 2),
        };
        let h = self.s[i + 1] - self.s[i];
        (i, (sl - self.s[i]) / h, h)
    }

    pub fn jet(&self, s: f64) -> Jet {
        let (i, u, h) = self.segment(s);
        let (p0, p1) = (self.p[i], self.p[i + 1]);
        let (m0, m1) = (self.m[i] * h, self.m[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let p = p0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + m0 * (u3 - 2.0 * u2 + u)
            + p1 * (-2.0 * u3 + 3.0 * u2)
            + m1 * (u3 - u2);
        let d1 = (p0 * (6.0 * u2 - 6.0 * u)
            + m0 * (3.0 * u2 - 4.0 * u + 1.0)
            + p1 * (-6.0 * u2 + 6.0 * u)
            + m1 * (3.0 * u2 - 2.0 * u))
            / h;
        let d2 = (p0 * (12.0 * u - 6.0)
            + m0 * (6.0 * u - 4.0)
            + p1 * (-12.0 * u + 6.0)
            + m1 * (6.0 * u - 2.0))
            / (h * h);
        Jet { p, d1, d2 }
    }

    /// Dense polyline approximation of the curve.
    pub fn polyline(&self, per_segment: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity((self.s.len() - 1) * per_segment);
        for i in 0..self.s.len() - 1 {
            for k in 0..per_segment {
                let s = self.s[i] + (self.s[i + 1] - self.s[i]) * k as f64 / per_segment as f64;
                out.push(self.jet(s).p);
            }
        }
        out
    }
}

/// One closed boundary curve. The domain lies to the left of the traversal.
#[derive(Debug, Clone)]
pub enum Component {
    Circle {
        center: Point,
        radius: f64,
        ccw: bool,
    },
    Ellipse(EllipseCurve),
    Polyline {
        vertices: Vec<Point>,
        cumulative: Vec<f64>,
    },
    Spline(SplineCurve),
}

impl Component {
    pub fn polyline(vertices: Vec<Point>) -> Self {
        let n = vertices.len();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for i in 0..n {
            let d = (vertices[(i + 1) % n] - vertices[i]).norm();
            cumulative.push(cumulative[i] + d);
        }
        Component::Polyline {
            vertices,
            cumulative,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Component::Circle { radius, .. } => TWO_PI * radius,
            Component::Ellipse(e) => e.length(),
            Component::Polyline { cumulative, .. } => *cumulative.last().unwrap(),
            Component::Spline(sp) => sp.length(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, Component::Polyline { .. })
    }

    /// Period of the native parameter.
    pub fn param_period(&self) -> f64 {
        match self {
            Component::Circle { .. } | Component::Ellipse(_) => TWO_PI,
            _ => self.length(),
        }
    }

    pub fn param_of_s(&self, s: f64) -> f64 {
        match self {
            Component::Circle { radius, .. } => s / radius,
            Component::Ellipse(e) => e.theta_of_s(s),
            _ => s,
        }
    }

    pub fn s_of_param(&self, u: f64) -> f64 {
        match self {
            Component::Circle { radius, .. } => u * radius,
            Component::Ellipse(e) => e.s_of_theta(u),
            _ => u,
        }
    }

    /// Position and derivatives in the native parameter (smooth components).
    pub fn jet(&self, u: f64) -> Jet {
        match self {
            Component::Circle {
                center,
                radius,
                ccw,
            } => {
                let (s, c) = u.sin_cos();
                let sg = if *ccw { 1.0 } else { -1.0 };
                Jet {
                    p: center + Point::new(radius * c, sg * radius * s),
                    d1: Point::new(-radius * s, sg * radius * c),
                    d2: Point::new(-radius * c, -sg * radius * s),
                }
            }
            Component::Ellipse(e) => e.jet(u),
            Component::Spline(sp) => sp.jet(u),
            Component::Polyline { .. } => {
                let lp = self.local(u);
                Jet {
                    p: lp.position,
                    d1: lp.tangent,
                    d2: Point::zeros(),
                }
            }
        }
    }

    /// Evaluate at local arclength `s` (already reduced to `[0, length)`).
    pub fn local(&self, s: f64) -> LocalPoint {
        match self {
            Component::Polyline {
                vertices,
                cumulative,
            } => {
                let n = vertices.len();
                let i = match cumulative.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
                    Ok(i) => i.min(n - 1),
                    Err(i) => i.saturating_sub(1).min(n - 1),
                };
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let e = b - a;
                let len = e.norm();
                let tau = (s - cumulative[i]) / len;
                LocalPoint {
                    position: a + e * tau,
                    tangent: e / len,
                    curvature: 0.0,
                }
            }
            _ => {
                let u = self.param_of_s(s);
                let j = self.jet(u);
                let sp = j.d1.norm();
                LocalPoint {
                    position: j.p,
                    tangent: j.d1 / sp,
                    curvature: cross(&j.d1, &j.d2) / (sp * sp * sp),
                }
            }
        }
    }

    /// Closest point: `(distance, local arclength, point)`.
    pub fn nearest(&self, x: &Point) -> (f64, f64, Point) {
        match self {
            Component::Circle {
                center,
                radius,
                ccw,
            } => {
                let w = x - center;
                let r = w.norm();
                let ang = if r == 0.0 { 0.0 } else { w.y.atan2(w.x) };
                let th = if *ccw { ang } else { -ang }.rem_euclid(TWO_PI);
                let p = center + Point::new(ang.cos(), ang.sin()) * *radius;
                ((r - radius).abs(), th * radius, p)
            }
            Component::Ellipse(e) => {
                let (d, th) = e.nearest(x);
                let s = e.s_of_theta(th).rem_euclid(e.length());
                (d, s, e.jet(th).p)
            }
            Component::Polyline {
                vertices,
                cumulative,
            } => {
                let n = vertices.len();
                let mut best = (f64::INFINITY, 0.0, vertices[0]);
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let (d, tau, q) = segment_nearest(x, &a, &b);
                    if d < best.0 {
                        best = (d, cumulative[i] + tau * (b - a).norm(), q);
                    }
                }
                let len = *cumulative.last().unwrap();
                (best.0, best.1.rem_euclid(len), best.2)
            }
            Component::Spline(sp) => {
                let len = sp.length();
                let coarse = 8 * (sp.s.len() - 1);
                let h = len / coarse as f64;
                let mut best = (f64::INFINITY, 0.0);
                for k in 0..coarse {
                    let s = k as f64 * h;
                    let d = (sp.jet(s).p - x).norm();
                    if d < best.0 {
                        best = (d, s);
                    }
                }
                let (s, d) = crate::numerics::golden_min(
                    |s| (sp.jet(s).p - x).norm(),
                    best.1 - h,
                    best.1 + h,
                    1e-12 * len,
                );
                let s = s.rem_euclid(len);
                (d, s, sp.jet(s).p)
            }
        }
    }

    /// Distances to the walls of this component used by the crossing test;
    /// for polylines one entry per edge.
    pub fn wall_count(&self) -> usize {
        match self {
            Component::Polyline { vertices, .. } => vertices.len(),
            _ => 1,
        }
    }

    /// Smallest ray parameter `t > t_min` at which `p + t d` meets this
    /// component analytically. `None` for splines (handled by marching).
    pub fn ray_hit(&self, p: &Point, d: &Point, t_min: f64) -> Option<Option<f64>> {
        match self {
            Component::Circle { center, radius, .. } => {
                let w = p - center;
                let bq = w.dot(d);
                let cq = w.norm_squared() - radius * radius;
                Some(smallest_root(d.norm_squared(), bq, cq, t_min))
            }
            Component::Ellipse(e) => {
                let (a2, b2) = (e.a * e.a, e.b * e.b);
                let aq = d.x * d.x / a2 + d.y * d.y / b2;
                let bq = p.x * d.x / a2 + p.y * d.y / b2;
                let cq = p.x * p.x / a2 + p.y * p.y / b2 - 1.0;
                Some(smallest_root(aq, bq, cq, t_min))
            }
            Component::Polyline { vertices, .. } => {
                let n = vertices.len();
                let mut best: Option<f64> = None;
                for i in 0..n {
                    let a = vertices[i];
                    let e = vertices[(i + 1) % n] - a;
                    let den = cross(d, &e);
                    if den.abs() < 1e-300 {
                        continue;
                    }
                    let w = a - p;
                    let t = cross(&w, &e) / den;
                    let u = cross(&w, d) / den;
                    if t > t_min && (-1e-12..=1.0 + 1e-12).contains(&u) {
                        best = Some(best.map_or(t, |b: f64| b.min(t)));
                    }
                }
                Some(best)
            }
            Component::Spline(_) => None,
        }
    }
}

/// Smallest root `> t_min` of `a t² + 2 b t + c = 0`.
fn smallest_root(a: f64, b: f64, c: f64, t_min: f64) -> Option<f64> {
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let q = -(b + sq.copysign(b));
    let mut roots = [f64::NAN, f64::NAN];
    if q != 0.0 {
        roots = [q / a, c / q];
    } else {
        roots[0] = -b / a;
    }
    roots
        .iter()
        .copied()
        .filter(|r| r.is_finite() && *r > t_min)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |v| v.min(r)))
        })
}

/// Distance from `x` to segment `[a, b]`: `(distance, fraction, point)`.
pub fn segment_nearest(x: &Point, a: &Point, b: &Point) -> (f64, f64, Point) {
    let e = b - a;
    let l2 = e.norm_squared();
    let tau = ((x - a).dot(&e) / l2).clamp(0.0, 1.0);
    let q = a + e * tau;
    ((x - q).norm(), tau, q)
}

pub fn winding_inside(poly: &[Point], x: &Point) -> bool {
    let n = poly.len();
    let mut wn = 0i32;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = cross(&(b - a), &(x - a));
        if a.y <= x.y {
            if b.y > x.y && side > 0.0 {
                wn += 1;
            }
        } else if b.y <= x.y && side < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(&poly[i], &poly[(i + 1) % n]);
    }
    0.5 * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_arclength_matches_circle_when_round() {
        let e = EllipseCurve::new(1.0, 1.0);
        assert!((e.length() - TWO_PI).abs() < 1e-12);
        assert!((e.s_of_theta(1.0) - 1.0).abs() < 1e-13);
        assert!((e.theta_of_s(2.5) - 2.5).abs() < 1e-13);
    }

    #[test]
    fn ellipse_perimeter_reference() {
        // Complete elliptic integral: 4·a·E(e), a=2, b=1.
        let e = EllipseCurve::new(2.0, 1.0);
        assert!((e.length() - 9.688448220547675).abs() < 1e-11);
        let th = 0.7;
        assert!((e.theta_of_s(e.s_of_theta(th)) - th).abs() < 1e-13);
    }

    #[test]
    fn ellipse_nearest_axis_points() {
        let e = EllipseCurve::new(2.0, 1.0);
        let (d, th) = e.nearest(&Point::new(0.0, 0.0));
        assert!((d - 1.0).abs() < 1e-15);
        assert!((th - PI / 2.0).abs() < 1e-15);
        let (d, _) = e.nearest(&Point::new(1.9, 0.0));
        assert!((d - 0.1).abs() < 1e-14);
    }

    #[test]
    fn quadratic_roots() {
        // t² − 3t + 2 = 0 → 1, 2
        assert_eq!(smallest_root(1.0, -1.5, 2.0, 0.0), Some(1.0));
        assert_eq!(smallest_root(1.0, -1.5, 2.0, 1.5), Some(2.0));
        assert_eq!(smallest_root(1.0, 0.0, 1.0, 0.0), None);
    }
}
