//! Brownian-bridge survival estimates of the Dirichlet heat-kernel diagonal
//! and of the trace.
//!
//! A standard planar Brownian motion run for time `2t` has transition density
//! `e^{−|x−y|²/4t}/(4πt)`, the free heat kernel. So
//! `G(x, x, t) = (4πt)^{-1} · Pr[bridge x → x over time 2t stays in Ω]`.

use crate::error::{Error, Result};
use crate::geometry::curve::segment_nearest;
use crate::geometry::{Component, Domain, Point, Shape};
use crate::numerics::pairwise_sum;
use crate::spectra::BoundaryCondition;
use crate::trace::{Backend, TraceSamples};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    /// Finest dyadic subdivision of each bridge; rounded up to a power of two.
    pub n_steps: usize,
    pub seed: u64,
    /// Number of strata for the integral over Ω.
    pub stratification: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 1024,
            seed: 1,
            stratification: 4096,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 100 {
            return Err(Error::Argument(format!(
                "n_paths must be at least 100, got {}",
                self.n_paths
            )));
        }
        if self.n_steps < 16 || self.n_steps > 1 << 24 {
            return Err(Error::Argument(format!(
                "n_steps must be in [16, 2^24], got {}",
                self.n_steps
            )));
        }
        if self.stratification == 0 {
            return Err(Error::Argument("stratification must be at least 1".into()));
        }
        Ok(())
    }

    fn levels(&self) -> u32 {
        self.n_steps.next_power_of_two().trailing_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_effective: usize,
}

/// Straight or circular pieces of the boundary, as seen by the crossing test.
#[derive(Debug, Clone)]
enum Wall {
    Circle { radius: f64, inside: bool },
    Segment { a: Point, b: Point },
    Other(usize),
}

struct Walls<'a> {
    domain: &'a Domain,
    walls: Vec<Wall>,
}

impl<'a> Walls<'a> {
    fn new(domain: &'a Domain) -> Self {
        let mut walls = Vec::new();
        for (i, c) in domain.components().iter().enumerate() {
            match c {
                Component::Circle { radius, ccw, .. } => walls.push(Wall::Circle {
                    radius: *radius,
                    inside: *ccw,
                }),
                Component::Polyline { vertices, .. } => {
                    let n = vertices.len();
                    for k in 0..n {
                        walls.push(Wall::Segment {
                            a: vertices[k],
                            b: vertices[(k + 1) % n],
                        });
                    }
                }
                _ => walls.push(Wall::Other(i)),
            }
        }
        Self { domain, walls }
    }

    fn distance(&self, w: &Wall, p: &Point) -> f64 {
        match w {
            Wall::Circle { radius, inside } => {
                let r = p.norm();
                if *inside {
                    radius - r
                } else {
                    r - radius
                }
            }
            Wall::Segment { a, b } => segment_nearest(p, a, b).0,
            Wall::Other(i) => self.domain.components()[*i].nearest(p).0,
        }
    }

    fn fill(&self, p: &Point, out: &mut [f64]) -> f64 {
        let mut m = f64::INFINITY;
        for (k, w) in self.walls.iter().enumerate() {
            let d = self.distance(w, p);
            out[k] = d;
            m = m.min(d);
        }
        m
    }
}

struct Node {
    p: Point,
    dmin: f64,
    d: SmallVec<[f64; 8]>,
}

struct Bridge<'a> {
    walls: &'a Walls<'a>,
    levels: u32,
    total: f64,
}

impl Bridge<'_> {
    fn node(&self, p: Point) -> Node {
        let mut d = smallvec![0.0; self.walls.walls.len()];
        let dmin = self.walls.fill(&p, &mut d);
        Node { p, dmin, d }
    }

    /// Survival of the sub-bridge between `a` and `b` over duration `dt`.
    fn survives(&self, a: &Node, b: &Node, dt: f64, level: u32, rng: &mut ChaCha8Rng) -> bool {
        let r = a.dmin.min(b.dmin) - 0.5 * (b.p - a.p).norm();
        if r > 0.0 && r * r > 40.0 * dt {
            return true;
        }
        if level == self.levels {
            let mut surv = 1.0;
            for k in 0..a.d.len() {
                let q = 2.0 * a.d[k] * b.d[k] / dt;
                if q < 40.0 {
                    surv *= 1.0 - (-q).exp();
                }
            }
            return rng.random::<f64>() < surv;
        }
        let half = 0.5 * dt;
        let sd = (0.5 * half).sqrt();
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let m = 0.5 * (a.p + b.p) + Point::new(sd * zx, sd * zy);
        if !self.walls.domain.contains(&m) {
            return false;
        }
        let mid = self.node(m);
        self.survives(a, &mid, half, level + 1, rng) && self.survives(&mid, b, half, level + 1, rng)
    }

    fn run(&self, x: Point, rng: &mut ChaCha8Rng) -> bool {
        let n = self.node(x);
        // The closed bridge: two halves x → m → x with m ~ N(x, (total/4) I).
        let sd = (0.25 * self.total).sqrt();
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let m = x + Point::new(sd * zx, sd * zy);
        if !self.walls.domain.contains(&m) {
            return false;
        }
        let mid = self.node(m);
        let half = 0.5 * self.total;
        self.survives(&n, &mid, half, 1, rng) && self.survives(&mid, &n, half, 1, rng)
    }
}

fn require_planar(domain: &Domain) -> Result<()> {
    if domain.dimension() != 2 {
        return Err(Error::UnsupportedDimension { expected: "2-D" });
    }
    Ok(())
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn summarize(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = pairwise_sum(samples) / n;
    let dev: Vec<f64> = samples.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Survival probability of the pinned bridge `x → x` over time `2t`.
pub fn bridge_survival(domain: &Domain, x: &Point, t: f64, cfg: &McConfig) -> Result<McEstimate> {
    require_planar(domain)?;
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::Argument(format!("t must be positive, got {t}")));
    }
    if !domain.contains(x) || domain.boundary_distance(x) < 1e-9 {
        return Err(Error::Degenerate(format!(
            "point ({}, {}) is within 1e-9 of the boundary or outside",
            x.x, x.y
        )));
    }
    let walls = Walls::new(domain);
    let bridge = Bridge {
        walls: &walls,
        levels: cfg.levels(),
        total: 2.0 * t,
    };
    let hits: Vec<f64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            if bridge.run(*x, &mut rng) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let (mean, stderr) = summarize(&hits);
    Ok(McEstimate {
        mean,
        stderr,
        n_effective: cfg.n_paths,
    })
}

/// Uniform point in stratum `k` of `strata` (a `g × g` grid of the unit square).
fn stratified_uv(k: usize, g: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (i, j) = (k % g, k / g);
    let u = (i as f64 + rng.random::<f64>()) / g as f64;
    let v = (j as f64 + rng.random::<f64>()) / g as f64;
    (u, v)
}

/// Measure-preserving sampler of interior points.
struct Sampler<'a> {
    domain: &'a Domain,
    triangles: Vec<(Point, Point, Point, f64)>,
    total: f64,
}

impl<'a> Sampler<'a> {
    fn new(domain: &'a Domain) -> Self {
        let triangles = if matches!(domain.shape(), Shape::Polygon { .. }) {
            triangulate(domain)
        } else {
            Vec::new()
        };
        let total = triangles.iter().map(|t| t.3).sum();
        Self {
            domain,
            triangles,
            total,
        }
    }

    /// Point and the weight `|region sampled|`; `None` when rejected.
    fn sample(&self, u: f64, v: f64) -> (Option<Point>, f64) {
        if let Some(p) = self.domain.map_unit_square(u, v) {
            return (Some(p), self.domain.area());
        }
        if !self.triangles.is_empty() {
            return (Some(self.polygon_point(u, v)), self.domain.area());
        }
        let (lo, hi) = self.domain.bounding_box();
        let p = Point::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y));
        let box_area = (hi.x - lo.x) * (hi.y - lo.y);
        if self.domain.contains(&p) {
            (Some(p), box_area)
        } else {
            (None, box_area)
        }
    }

    fn polygon_point(&self, u: f64, v: f64) -> Point {
        let mut target = u * self.total;
        let last = self.triangles.len() - 1;
        let mut pick = last;
        for (i, t) in self.triangles.iter().enumerate() {
            if target <= t.3 || i == last {
                pick = i;
                break;
            }
            target -= t.3;
        }
        let (a, b, c, area) = self.triangles[pick];
        let r = (target / area).clamp(0.0, 1.0).sqrt();
        a * (1.0 - r) + b * (r * (1.0 - v)) + c * (r * v)
    }
}

/// Ear-clipping triangulation: `(a, b, c, area)` per triangle.
fn triangulate(domain: &Domain) -> Vec<(Point, Point, Point, f64)> {
    let Some(Component::Polyline { vertices, .. }) = domain.components().first() else {
        return Vec::new();
    };
    let cross =
        |o: &Point, a: &Point, b: &Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut idx: Vec<usize> = (0..vertices.len()).collect();
    let mut out = Vec::new();
    let mut guard = 0;
    while idx.len() > 3 && guard < 10 * vertices.len() * vertices.len() {
        guard += 1;
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (a, b, c) = (vertices[ia], vertices[ib], vertices[ic]);
            if cross(&a, &b, &c) <= 0.0 {
                continue;
            }
            let inside = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = vertices[j];
                cross(&a, &b, &p) >= 0.0 && cross(&b, &c, &p) >= 0.0 && cross(&c, &a, &p) >= 0.0
            });
            if inside {
                continue;
            }
            out.push((a, b, c, 0.5 * cross(&a, &b, &c)));
            idx.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]);
        out.push((a, b, c, 0.5 * cross(&a, &b, &c)));
    }
    out
}

/// `P(t) ≈ (|Ω|/4πt) · E[survival]` with stratified interior points.
pub fn mc_trace(
    domain: &Domain,
    bc: BoundaryCondition,
    t: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    require_planar(domain)?;
    if bc == BoundaryCondition::Neumann {
        return Err(Error::BackendUnavailable {
            backend: "montecarlo",
            what: "Neumann boundary conditions".into(),
            supported: "Dirichlet only".into(),
        });
    }
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::Argument(format!("t must be positive, got {t}")));
    }
    let walls = Walls::new(domain);
    let bridge = Bridge {
        walls: &walls,
        levels: cfg.levels(),
        total: 2.0 * t,
    };
    let g = (cfg.stratification as f64).sqrt().ceil() as usize;
    let strata = g * g;
    let sampler = Sampler::new(domain);
    let scale = 1.0 / (4.0 * PI * t);
    let vals: Vec<f64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            let (u, v) = stratified_uv(i % strata, g, &mut rng);
            let (p, weight) = sampler.sample(u, v);
            match p {
                Some(x) if domain.boundary_distance(&x) > 0.0 && bridge.run(x, &mut rng) => {
                    weight * scale
                }
                _ => 0.0,
            }
        })
        .collect();
    let (mean, stderr) = summarize(&vals);
    Ok(McEstimate {
        mean,
        stderr,
        n_effective: cfg.n_paths,
    })
}

/// Monte-Carlo trace on a grid; `abs_error` holds the standard errors.
pub fn mc_trace_samples(
    domain: &Domain,
    bc: BoundaryCondition,
    t_grid: &[f64],
    cfg: &McConfig,
) -> Result<TraceSamples> {
    let mut values = Vec::with_capacity(t_grid.len());
    let mut errs = Vec::with_capacity(t_grid.len());
    for (k, &t) in t_grid.iter().enumerate() {
        let c = McConfig {
            seed: cfg.seed.wrapping_add(k as u64),
            ..*cfg
        };
        let e = mc_trace(domain, bc, t, &c)?;
        values.push(e.mean);
        errs.push(e.stderr);
    }
    TraceSamples::new(
        t_grid.to_vec(),
        values,
        errs,
        Backend::Montecarlo,
        bc,
        domain.digest(),
        2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_paths: usize) -> McConfig {
        McConfig {
            n_paths,
            n_steps: 256,
            seed: 7,
            stratification: 64,
        }
    }

    #[test]
    fn config_validation() {
        assert!(McConfig {
            n_paths: 10,
            ..cfg(100)
        }
        .validate()
        .is_err());
        assert!(McConfig {
            n_steps: 8,
            ..cfg(100)
        }
        .validate()
        .is_err());
        assert_eq!(
            McConfig {
                n_steps: 100,
                ..cfg(100)
            }
            .levels(),
            7
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let d = Domain::disk(1.0).unwrap();
        let a = bridge_survival(&d, &Point::new(0.3, 0.1), 0.05, &cfg(2000)).unwrap();
        let b = bridge_survival(&d, &Point::new(0.3, 0.1), 0.05, &cfg(2000)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn boundary_point_rejected() {
        let d = Domain::disk(1.0).unwrap();
        assert!(matches!(
            bridge_survival(&d, &Point::new(1.0 - 1e-12, 0.0), 0.1, &cfg(100)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn neumann_rejected() {
        let d = Domain::disk(1.0).unwrap();
        assert!(matches!(
            mc_trace(&d, BoundaryCondition::Neumann, 0.1, &cfg(100)),
            Err(Error::BackendUnavailable { .. })
        ));
    }

    #[test]
    fn tiny_time_survives() {
        let d = Domain::disk(1.0).unwrap();
        let e = bridge_survival(&d, &Point::new(0.0, 0.0), 1e-4, &cfg(1000)).unwrap();
        assert_eq!(e.mean, 1.0);
    }

    #[test]
    fn huge_time_dies() {
        let d = Domain::rectangle(1.0, 2.0).unwrap();
        let e = mc_trace(&d, BoundaryCondition::Dirichlet, 20.0, &cfg(1000)).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn triangulation_covers_polygon() {
        let d =
            Domain::polygon(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [1.0, 0.5], [0.0, 2.0]]).unwrap();
        let tri = triangulate(&d);
        let total: f64 = tri.iter().map(|t| t.3).sum();
        assert!((total - d.area()).abs() < 1e-12);
        assert_eq!(tri.len(), 3);
    }
}
