//! Domains, boundary parametrization, distance and normal-chord functions,
//! and the locus of points with several nearest boundary normals.

mod chord;
pub mod curve;
mod locus;

pub use chord::{ChordFunction, ChordHit, Extremum, ExtremumKind};
pub use curve::Component;
pub use locus::CriticalLocus;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

pub type Point = nalgebra::Vector2<f64>;

/// Arc distance from a polygon corner within which normals are undefined.
pub const CORNER_TOL: f64 = 1e-9;

/// One sample of a closed smooth boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub s: f64,
    pub point: [f64; 2],
    pub tangent: [f64; 2],
}

/// Geometric description of the domain as supplied by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    IntervalSet {
        lengths: Vec<f64>,
    },
    Rectangle {
        a: f64,
        b: f64,
    },
    Disk {
        radius: f64,
    },
    /// Outer radius `a`, inner radius `b`.
    Annulus {
        a: f64,
        b: f64,
    },
    /// Semi-axes `a >= b`, major axis along x.
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Counterclockwise simple polygon.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    SmoothBoundary {
        samples: Vec<CurveSample>,
    },
}

/// A point on the boundary in the global arclength coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub s: f64,
    pub position: Point,
    pub outward_normal: Point,
    pub curvature: f64,
    pub component: usize,
}

/// Validated domain with cached boundary data. Immutable once built.
#[derive(Debug, Clone)]
pub struct Domain {
    shape: Shape,
    components: Vec<Component>,
    offsets: Vec<f64>,
    perimeter: f64,
    area: f64,
    bbox: (Point, Point),
    polygon_cache: Vec<Vec<Point>>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!(
            "{name} must be a positive finite length, got {v}"
        )))
    }
}

impl TryFrom<Shape> for Domain {
    type Error = Error;
    fn try_from(shape: Shape) -> Result<Self> {
        Domain::new(shape)
    }
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        let mut components = Vec::new();
        let area;
        match &shape {
            Shape::IntervalSet { lengths } => {
                if lengths.is_empty() {
                    return Err(Error::InvalidDomain(
                        "interval set needs at least one length".into(),
                    ));
                }
                for &l in lengths {
                    positive("interval length", l)?;
                }
                area = lengths.iter().sum();
            }
            Shape::Rectangle { a, b } => {
                positive("a", *a)?;
                positive("b", *b)?;
                let (ha, hb) = (0.5 * a, 0.5 * b);
                components.push(Component::polyline(vec![
                    Point::new(-ha, -hb),
                    Point::new(ha, -hb),
                    Point::new(ha, hb),
                    Point::new(-ha, hb),
                ]));
                area = a * b;
            }
            Shape::Disk { radius } => {
                positive("radius", *radius)?;
                components.push(Component::Circle {
                    center: Point::zeros(),
                    radius: *radius,
                    ccw: true,
                });
                area = PI * radius * radius;
            }
            Shape::Annulus { a, b } => {
                positive("a", *a)?;
                positive("b", *b)?;
                if a <= b {
                    return Err(Error::InvalidDomain(format!(
                        "annulus needs a > b, got a={a}, b={b}"
                    )));
                }
                components.push(Component::Circle {
                    center: Point::zeros(),
                    radius: *a,
                    ccw: true,
                });
                components.push(Component::Circle {
                    center: Point::zeros(),
                    radius: *b,
                    ccw: false,
                });
                area = PI * (a * a - b * b);
            }
            Shape::Ellipse { a, b } => {
                positive("a", *a)?;
                positive("b", *b)?;
                if a < b {
                    return Err(Error::InvalidDomain(format!(
                        "ellipse needs a >= b, got a={a}, b={b}"
                    )));
                }
                components.push(Component::Ellipse(curve::EllipseCurve::new(*a, *b)));
                area = PI * a * b;
            }
            Shape::Polygon { vertices } => {
                let pts: Vec<Point> = vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
                validate_polygon(&pts)?;
                area = curve::signed_area(&pts);
                components.push(Component::polyline(pts));
            }
            Shape::SmoothBoundary { samples } => {
                let sp = validate_smooth(samples)?;
                let poly = sp.polyline(1);
                area = curve::signed_area(&poly);
                components.push(Component::Spline(sp));
            }
        }
        let mut offsets = Vec::with_capacity(components.len());
        let mut acc = 0.0;
        for c in &components {
            offsets.push(acc);
            acc += c.length();
        }
        let polygon_cache: Vec<Vec<Point>> = components
            .iter()
            .map(|c| match c {
                Component::Polyline { vertices, .. } => vertices.clone(),
                Component::Spline(sp) => sp.polyline(8),
                _ => {
                    let n = 2048;
                    (0..n)
                        .map(|k| c.jet(c.param_period() * k as f64 / n as f64).p)
                        .collect()
                }
            })
            .collect();
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in polygon_cache.iter().flatten() {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        Ok(Domain {
            shape,
            components,
            offsets,
            perimeter: acc,
            area,
            bbox: (lo, hi),
            polygon_cache,
        })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(Shape::Disk { radius })
    }
    pub fn rectangle(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Rectangle { a, b })
    }
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b })
    }
    pub fn annulus(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Annulus { a, b })
    }
    pub fn interval_set(lengths: &[f64]) -> Result<Self> {
        Self::new(Shape::IntervalSet {
            lengths: lengths.to_vec(),
        })
    }
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        Self::new(Shape::Polygon {
            vertices: vertices.to_vec(),
        })
    }
    pub fn smooth_boundary(samples: Vec<CurveSample>) -> Result<Self> {
        Self::new(Shape::SmoothBoundary { samples })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            Shape::IntervalSet { .. } => "interval_set",
            Shape::Rectangle { .. } => "rectangle",
            Shape::Disk { .. } => "disk",
            Shape::Annulus { .. } => "annulus",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Polygon { .. } => "polygon",
            Shape::SmoothBoundary { .. } => "smooth_boundary",
        }
    }

    pub fn dimension(&self) -> usize {
        if matches!(self.shape, Shape::IntervalSet { .. }) {
            1
        } else {
            2
        }
    }

    /// Area in 2-D, total length in 1-D.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Boundary length in 2-D, number of boundary points in 1-D.
    pub fn perimeter(&self) -> f64 {
        match &self.shape {
            Shape::IntervalSet { lengths } => 2.0 * lengths.len() as f64,
            _ => self.perimeter,
        }
    }

    pub fn connected_components(&self) -> usize {
        match &self.shape {
            Shape::IntervalSet { lengths } => lengths.len(),
            _ => 1,
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    /// Bounding box of the boundary.
    pub fn bounding_box(&self) -> (Point, Point) {
        self.bbox
    }

    pub fn diameter_bound(&self) -> f64 {
        (self.bbox.1 - self.bbox.0).norm()
    }

    pub fn is_smooth(&self) -> bool {
        self.dimension() == 2 && self.components.iter().all(Component::is_smooth)
    }

    /// Stable identifier of the domain parameters.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind().as_bytes());
        let mut put = |v: f64| h.update(format!(";{:.17e}", v).as_bytes());
        match &self.shape {
            Shape::IntervalSet { lengths } => lengths.iter().for_each(|&l| put(l)),
            Shape::Rectangle { a, b } | Shape::Annulus { a, b } | Shape::Ellipse { a, b } => {
                put(*a);
                put(*b);
            }
            Shape::Disk { radius } => put(*radius),
            Shape::Polygon { vertices } => vertices.iter().for_each(|v| {
                put(v[0]);
                put(v[1]);
            }),
            Shape::SmoothBoundary { samples } => samples.iter().for_each(|c| {
                put(c.s);
                put(c.point[0]);
                put(c.point[1]);
                put(c.tangent[0]);
                put(c.tangent[1]);
            }),
        }
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn require_2d(&self) -> Result<()> {
        if self.dimension() == 2 {
            Ok(())
        } else {
            Err(Error::UnsupportedDimension { expected: "2-D" })
        }
    }

    /// Strict interior test.
    pub fn contains(&self, x: &Point) -> bool {
        match &self.shape {
            Shape::IntervalSet { .. } => false,
            Shape::Rectangle { a, b } => x.x.abs() < 0.5 * a && x.y.abs() < 0.5 * b,
            Shape::Disk { radius } => x.norm_squared() < radius * radius,
            Shape::Annulus { a, b } => {
                let r2 = x.norm_squared();
                r2 < a * a && r2 > b * b
            }
            Shape::Ellipse { a, b } => (x.x / a).powi(2) + (x.y / b).powi(2) < 1.0,
            Shape::Polygon { .. } | Shape::SmoothBoundary { .. } => {
                if !curve::winding_inside(&self.polygon_cache[0], x) {
                    return false;
                }
                self.components[0].nearest(x).0 > 0.0
            }
        }
    }

    /// Map a global arclength to `(component, local arclength)`.
    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.rem_euclid(self.perimeter);
        let mut i = self.offsets.len() - 1;
        while i > 0 && self.offsets[i] > s {
            i -= 1;
        }
        (i, (s - self.offsets[i]).min(self.components[i].length()))
    }

    fn corner_distance(&self, comp: usize, s_local: f64) -> f64 {
        match &self.components[comp] {
            Component::Polyline { cumulative, .. } => {
                let len = *cumulative.last().unwrap();
                cumulative
                    .iter()
                    .map(|&c| {
                        let d = (s_local - c).abs();
                        d.min(len - d)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            _ => f64::INFINITY,
        }
    }

    /// Arclength positions of the polygon corners (empty for smooth domains).
    pub fn corners(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            if let Component::Polyline { cumulative, .. } = c {
                out.extend(
                    cumulative[..cumulative.len() - 1]
                        .iter()
                        .map(|v| v + self.offsets[i]),
                );
            }
        }
        out
    }

    pub fn boundary_point(&self, s: f64) -> Result<BoundaryPoint> {
        self.require_2d()?;
        if !(s.is_finite() && (0.0..self.perimeter).contains(&s)) {
            return Err(Error::Argument(format!(
                "arclength {s} outside [0, {})",
                self.perimeter
            )));
        }
        let (comp, sl) = self.locate(s);
        if self.corner_distance(comp, sl) < CORNER_TOL {
            return Err(Error::Corner { s, tol: CORNER_TOL });
        }
        Ok(self.boundary_point_unchecked(comp, sl))
    }

    pub(crate) fn boundary_point_unchecked(&self, comp: usize, s_local: f64) -> BoundaryPoint {
        let lp = self.components[comp].local(s_local);
        BoundaryPoint {
            s: self.offsets[comp] + s_local,
            position: lp.position,
            outward_normal: Point::new(lp.tangent.y, -lp.tangent.x),
            curvature: lp.curvature,
            component: comp,
        }
    }

    /// Nearest boundary point without the membership check.
    pub(crate) fn nearest_boundary(&self, x: &Point) -> (f64, usize, f64, Point) {
        let mut best = (f64::INFINITY, 0, 0.0, Point::zeros());
        for (i, c) in self.components.iter().enumerate() {
            let (d, s, p) = c.nearest(x);
            if d < best.0 {
                best = (d, i, s, p);
            }
        }
        best
    }

    pub fn distance_to_boundary(&self, x: &Point) -> Result<(f64, BoundaryPoint)> {
        self.require_2d()?;
        if !self.contains(x) {
            return Err(Error::DomainMembership { x: x.x, y: x.y });
        }
        let (d, comp, sl, p) = self.nearest_boundary(x);
        if d <= 0.0 {
            return Err(Error::DomainMembership { x: x.x, y: x.y });
        }
        let mut bp = self.boundary_point_unchecked(comp, sl);
        bp.position = p;
        if self.corner_distance(comp, sl) < CORNER_TOL {
            bp.outward_normal = (p - x) / d;
            bp.curvature = 0.0;
        }
        Ok((d, bp))
    }

    /// Distance to the boundary of an interior point, without validation.
    pub fn boundary_distance(&self, x: &Point) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => radius - x.norm(),
            Shape::Annulus { a, b } => {
                let r = x.norm();
                (a - r).min(r - b)
            }
            Shape::Rectangle { a, b } => (0.5 * a - x.x.abs()).min(0.5 * b - x.y.abs()),
            _ => self.nearest_boundary(x).0,
        }
    }

    /// First exit of the ray `p + t d`, `t > t_min`.
    pub(crate) fn ray_exit(&self, p: &Point, d: &Point, t_min: f64) -> Result<f64> {
        let mut best: Option<f64> = None;
        let mut march = false;
        for c in &self.components {
            match c.ray_hit(p, d, t_min) {
                Some(Some(t)) => best = Some(best.map_or(t, |b| b.min(t))),
                Some(None) => {}
                None => march = true,
            }
        }
        if march {
            let limit = 4.0 * self.diameter_bound();
            let h = self.perimeter / 4096.0;
            let mut t0 = t_min.max(1e-6 * h);
            let mut k = 1usize;
            loop {
                let t1 = t_min + k as f64 * h;
                if t1 > limit || best.is_some_and(|b| t0 > b) {
                    break;
                }
                if !self.contains(&(p + d * t1)) {
                    let (mut lo, mut hi) = (t0, t1);
                    while hi - lo > 1e-12 * self.perimeter.max(1.0) {
                        let mid = 0.5 * (lo + hi);
                        if self.contains(&(p + d * mid)) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let t = 0.5 * (lo + hi);
                    best = Some(best.map_or(t, |b| b.min(t)));
                    break;
                }
                t0 = t1;
                k += 1;
            }
        }
        best.filter(|t| *t <= 4.0 * self.diameter_bound())
            .ok_or_else(|| {
                Error::Geometry(format!(
                    "ray from ({:.6}, {:.6}) never meets the boundary",
                    p.x, p.y
                ))
            })
    }

    pub fn normal_chord(&self, s: f64) -> Result<f64> {
        Ok(self.normal_chord_hit(s)?.length)
    }

    pub fn normal_chord_hit(&self, s: f64) -> Result<ChordHit> {
        let bp = self.boundary_point(s)?;
        let d = -bp.outward_normal;
        let t_min = 1e-9 * self.diameter_bound();
        let t = self.ray_exit(&bp.position, &d, t_min)?;
        let end = bp.position + d * t;
        let (_, comp, sl, _) = self.nearest_boundary(&end);
        Ok(ChordHit {
            start: bp,
            end,
            end_s: self.offsets[comp] + sl,
            length: t,
        })
    }

    pub fn chord_function(&self, n_samples: usize) -> Result<ChordFunction> {
        chord::chord_function(self, n_samples)
    }

    pub fn critical_locus(&self) -> Result<CriticalLocus> {
        locus::critical_locus(self)
    }

    /// Map `(u, v)` in the unit square to a point of Ω, preserving measure up
    /// to the constant `area`. Returns `None` for rejection-sampled domains.
    pub fn map_unit_square(&self, u: f64, v: f64) -> Option<Point> {
        use std::f64::consts::TAU;
        match &self.shape {
            Shape::Disk { radius } => {
                let r = radius * u.sqrt();
                Some(Point::new(r * (TAU * v).cos(), r * (TAU * v).sin()))
            }
            Shape::Ellipse { a, b } => {
                let r = u.sqrt();
                Some(Point::new(a * r * (TAU * v).cos(), b * r * (TAU * v).sin()))
            }
            Shape::Annulus { a, b } => {
                let r = (b * b + u * (a * a - b * b)).sqrt();
                Some(Point::new(r * (TAU * v).cos(), r * (TAU * v).sin()))
            }
            Shape::Rectangle { a, b } => Some(Point::new(a * (u - 0.5), b * (v - 0.5))),
            _ => None,
        }
    }
}

fn segments_intersect(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let c = |a: &Point, b: &Point, c: &Point| (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let d1 = c(q1, q2, p1);
    let d2 = c(q1, q2, p2);
    let d3 = c(p1, p2, q1);
    let d4 = c(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn validate_polygon(pts: &[Point]) -> Result<()> {
    let n = pts.len();
    if n < 3 {
        return Err(Error::InvalidDomain(
            "polygon needs at least 3 vertices".into(),
        ));
    }
    if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::InvalidDomain("polygon vertex is not finite".into()));
    }
    for i in 0..n {
        if (pts[(i + 1) % n] - pts[i]).norm() == 0.0 {
            return Err(Error::InvalidDomain(format!(
                "polygon edge {i} has zero length"
            )));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(&pts[i], &pts[(i + 1) % n], &pts[j], &pts[(j + 1) % n]) {
                return Err(Error::InvalidDomain(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    if curve::signed_area(pts) <= 0.0 {
        return Err(Error::InvalidDomain(
            "polygon must be counterclockwise".into(),
        ));
    }
    Ok(())
}

fn validate_smooth(samples: &[CurveSample]) -> Result<curve::SplineCurve> {
    if samples.len() < 8 {
        return Err(Error::InvalidDomain(
            "smooth boundary needs at least 8 samples".into(),
        ));
    }
    for w in samples.windows(2) {
        if !(w[1].s > w[0].s) {
            return Err(Error::InvalidDomain(
                "arclength must be strictly increasing".into(),
            ));
        }
    }
    let first = samples[0];
    let last = samples[samples.len() - 1];
    let len = last.s - first.s;
    let gap = ((first.point[0] - last.point[0]).powi(2) + (first.point[1] - last.point[1]).powi(2))
        .sqrt();
    if gap > 1e-9 * len {
        return Err(Error::InvalidDomain("smooth boundary is not closed".into()));
    }
    let mut s: Vec<f64> = samples.iter().map(|c| c.s - first.s).collect();
    let mut p: Vec<Point> = samples
        .iter()
        .map(|c| Point::new(c.point[0], c.point[1]))
        .collect();
    let mut m = Vec::with_capacity(samples.len());
    for c in samples {
        let t = Point::new(c.tangent[0], c.tangent[1]);
        let n = t.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidDomain("tangent must be nonzero".into()));
        }
        m.push(t / n);
    }
    let last_i = p.len() - 1;
    p[last_i] = p[0];
    m[last_i] = m[0];
    if curve::signed_area(&p[..last_i]) < 0.0 {
        s = s.iter().rev().map(|v| len - v).collect();
        p.reverse();
        m = m.iter().rev().map(|v| -v).collect();
    }
    Ok(curve::SplineCurve { s, p, m })
}

/// Samples of a closed parametric curve `f(θ)`, `θ ∈ [0, 2π]`, with exact
/// arclength. Handy for building smooth boundaries.
pub fn sample_parametric<F: Fn(f64) -> (Point, Point)>(f: F, n: usize) -> Vec<CurveSample> {
    let speed = |t: f64| f(t).1.norm();
    let h = 2.0 * PI / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut s = 0.0;
    for k in 0..=n {
        let th = k as f64 * h;
        if k > 0 {
            s += crate::numerics::adaptive_simpson(&speed, th - h, th, 1e-13);
        }
        let (p, d) = f(if k == n { 0.0 } else { th });
        out.push(CurveSample {
            s,
            point: [p.x, p.y],
            tangent: [d.x, d.y],
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn disk_boundary_point_at_zero() {
        let d = Domain::disk(1.0).unwrap();
        let bp = d.boundary_point(0.0).unwrap();
        assert!(close(bp.position.x, 1.0, 1e-15) && close(bp.position.y, 0.0, 1e-15));
        assert!(close(bp.outward_normal.x, 1.0, 1e-15));
        assert!(close(bp.curvature, 1.0, 1e-14));
    }

    #[test]
    fn ellipse_boundary_point_curvature() {
        let d = Domain::ellipse(2.0, 1.0).unwrap();
        let bp = d.boundary_point(0.0).unwrap();
        assert!(close(bp.position.x, 2.0, 1e-14));
        assert!(close(bp.outward_normal.x, 1.0, 1e-14));
        assert!(close(bp.curvature, 2.0, 1e-12));
    }

    #[test]
    fn rectangle_side_midpoint() {
        let d = Domain::rectangle(1.0, 2.0).unwrap();
        let bp = d.boundary_point(1.0 + 1.0).unwrap();
        assert!(close(bp.outward_normal.x, 1.0, 1e-15) && close(bp.outward_normal.y, 0.0, 1e-15));
        assert_eq!(bp.curvature, 0.0);
        assert!(matches!(d.boundary_point(1.0), Err(Error::Corner { .. })));
        assert!(matches!(
            d.boundary_point(1.0 + 5e-10),
            Err(Error::Corner { .. })
        ));
    }

    #[test]
    fn one_dimensional_is_rejected() {
        let d = Domain::interval_set(&[1.0]).unwrap();
        assert!(matches!(
            d.boundary_point(0.0),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::disk(0.0).is_err());
        assert!(Domain::annulus(1.0, 2.0).is_err());
        assert!(Domain::ellipse(1.0, 2.0).is_err());
        assert!(Domain::interval_set(&[]).is_err());
        assert!(Domain::polygon(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(Domain::polygon(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
        assert!(Domain::polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).is_ok());
    }

    #[test]
    fn distance_examples() {
        let d = Domain::disk(1.0).unwrap();
        let (r, bp) = d.distance_to_boundary(&Point::new(0.25, 0.0)).unwrap();
        assert!(close(r, 0.75, 1e-15) && close(bp.position.x, 1.0, 1e-15));
        let an = Domain::annulus(2.0, 1.0).unwrap();
        let (r, bp) = an.distance_to_boundary(&Point::new(1.4, 0.0)).unwrap();
        assert!(close(r, 0.4, 1e-15) && close(bp.position.x, 1.0, 1e-15));
        assert_eq!(bp.component, 1);
        assert!(close(bp.outward_normal.x, -1.0, 1e-15));
        let el = Domain::ellipse(2.0, 1.0).unwrap();
        let (r, bp) = el.distance_to_boundary(&Point::new(0.0, 0.0)).unwrap();
        assert!(close(r, 1.0, 1e-15) && close(bp.position.y.abs(), 1.0, 1e-15));
        assert!(matches!(
            d.distance_to_boundary(&Point::new(1.0, 0.0)),
            Err(Error::DomainMembership { .. })
        ));
    }

    #[test]
    fn chord_examples() {
        let d = Domain::disk(1.5).unwrap();
        for k in 0..7 {
            assert!(close(d.normal_chord(k as f64).unwrap(), 3.0, 1e-12));
        }
        let el = Domain::ellipse(2.0, 1.0).unwrap();
        let p = el.perimeter();
        assert!(close(el.normal_chord(0.25 * p).unwrap(), 2.0, 1e-12));
        assert!(close(el.normal_chord(0.0).unwrap(), 4.0, 1e-12));
        let an = Domain::annulus(2.0, 1.0).unwrap();
        assert!(close(an.normal_chord(0.3).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn smooth_boundary_circle() {
        let samples = sample_parametric(
            |t| (Point::new(t.cos(), t.sin()), Point::new(-t.sin(), t.cos())),
            256,
        );
        let d = Domain::smooth_boundary(samples).unwrap();
        assert!(close(d.perimeter(), 2.0 * PI, 1e-10));
        assert!(close(d.area(), PI, 1e-3));
        let bp = d.boundary_point(0.0).unwrap();
        assert!(close(bp.curvature, 1.0, 1e-3));
        let l = d.normal_chord(1.0).unwrap();
        assert!(close(l, 2.0, 1e-6), "{l}");
    }

    #[test]
    fn digest_is_stable() {
        let a = Domain::disk(1.0).unwrap().digest();
        let b = Domain::disk(1.0).unwrap().digest();
        let c = Domain::disk(1.0000001).unwrap().digest();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }
}
