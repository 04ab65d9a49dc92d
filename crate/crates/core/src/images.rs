//! Method of images in 1-D, multi-interval traces, and closed-form disk
//! eikonals.

use crate::error::{Error, Result};
use crate::geometry::{Domain, Shape};
use crate::spectra::BoundaryCondition;
use crate::trace::{Backend, TraceSamples};
use serde::Serialize;
use std::f64::consts::PI;

pub const DEFAULT_IMAGES: usize = 8;

/// Truncated image sum on `[0, a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageExpansion {
    pub a: f64,
    pub bc: BoundaryCondition,
    pub n_images: usize,
}

impl ImageExpansion {
    pub fn new(a: f64, bc: BoundaryCondition, n_images: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Argument(format!(
                "interval length must be positive, got {a}"
            )));
        }
        Ok(Self { a, bc, n_images })
    }

    /// `(-1)^k` with `k = 0` for Dirichlet and `k = 1` for Neumann.
    fn parity(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Dirichlet => 1.0,
            BoundaryCondition::Neumann => -1.0,
        }
    }
}

/// Green function `G(y, x, t)` on `[0, a]` summed over `|n| ≤ N`.
pub fn images_green_1d(y: f64, x: f64, t: f64, cfg: &ImageExpansion) -> f64 {
    let a = cfg.a;
    let pre = 1.0 / (2.0 * (PI * t).sqrt());
    let sign = cfg.parity();
    let n = cfg.n_images as i64;
    let mut terms = Vec::with_capacity(2 * cfg.n_images + 1);
    for k in -n..=n {
        let shift = 2.0 * k as f64 * a;
        let direct = (-(y - x + shift).powi(2) / (4.0 * t)).exp();
        let image = (-(y + x + shift).powi(2) / (4.0 * t)).exp();
        terms.push((direct, image));
    }
    // Sum |n| ascending, symmetric partners together, so G(y,x) = G(x,y) bitwise.
    let mut sum = 0.0;
    for m in (0..=cfg.n_images).rev() {
        let i0 = (n - m as i64) as usize;
        let i1 = (n + m as i64) as usize;
        let (d0, m0) = terms[i0];
        if m == 0 {
            sum += d0 - sign * m0;
        } else {
            let (d1, m1) = terms[i1];
            sum += (d0 + d1) - sign * (m0 + m1);
        }
    }
    pre * sum
}

/// Closed-form trace `a/(2√(πt)) − (−1)^k/2 + (a/√(πt)) Σ_{n=1}^{N} e^{−(na)²/t}`.
///
/// The constant is −1/2 for Dirichlet and +1/2 for Neumann.
pub fn images_trace_1d(t: f64, cfg: &ImageExpansion) -> f64 {
    let a = cfg.a;
    let lead = a / (2.0 * (PI * t).sqrt());
    let mut tail = 0.0;
    for n in (1..=cfg.n_images).rev() {
        tail += (-(n as f64 * a).powi(2) / t).exp();
    }
    lead - 0.5 * cfg.parity() + 2.0 * lead * tail
}

/// Bound on the image terms dropped by truncating at `N`.
pub fn images_truncation_bound(t: f64, cfg: &ImageExpansion) -> f64 {
    let a = cfg.a;
    let n1 = (cfg.n_images + 1) as f64;
    let first = (-(n1 * a).powi(2) / t).exp();
    let ratio = (-(2.0 * n1 + 1.0) * a * a / t).exp();
    a / (PI * t).sqrt() * first / (1.0 - ratio).max(1e-300)
}

/// The dominant transcendental term of a union of intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominant {
    /// Shortest interval length.
    pub r: f64,
    /// Number of intervals attaining it.
    pub m: usize,
}

pub fn multi_interval_trace(
    lengths: &[f64],
    bc: BoundaryCondition,
    t: f64,
    n_images: usize,
) -> Result<(f64, Dominant)> {
    if lengths.is_empty() {
        return Err(Error::Argument("interval list is empty".into()));
    }
    let mut value = 0.0;
    for &l in lengths {
        value += images_trace_1d(t, &ImageExpansion::new(l, bc, n_images)?);
    }
    let r = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let m = lengths.iter().filter(|&&l| l == r).count();
    Ok((value, Dominant { r, m }))
}

/// Images backend for interval unions.
pub fn images_trace_samples(
    domain: &Domain,
    bc: BoundaryCondition,
    t_grid: &[f64],
    n_images: usize,
) -> Result<TraceSamples> {
    let Shape::IntervalSet { lengths } = domain.shape() else {
        return Err(Error::BackendUnavailable {
            backend: "images",
            what: format!("{} domains", domain.kind()),
            supported: "interval_set".into(),
        });
    };
    let mut values = Vec::with_capacity(t_grid.len());
    let mut errs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::Argument(format!("t must be positive, got {t}")));
        }
        values.push(multi_interval_trace(lengths, bc, t, n_images)?.0);
        let mut e = 0.0;
        for &l in lengths {
            e += images_truncation_bound(t, &ImageExpansion::new(l, bc, n_images)?);
        }
        errs.push(e);
    }
    TraceSamples::new(
        t_grid.to_vec(),
        values,
        errs,
        Backend::Images,
        bc,
        domain.digest(),
        1,
    )
}

/// Eikonals of the disk restricted to the x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskAxisEikonals {
    pub radius: f64,
}

impl DiskAxisEikonals {
    /// Direct ray.
    pub fn s0(&self, x1: f64, x2: f64) -> f64 {
        (x1 - x2).abs()
    }
    /// One reflection at `(R, 0)`.
    pub fn s1(&self, x1: f64, x2: f64) -> f64 {
        2.0 * self.radius - x1 - x2
    }
    /// One reflection at `(−R, 0)`.
    pub fn s2(&self, x1: f64, x2: f64) -> f64 {
        2.0 * self.radius + x1 + x2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskAxisApproximation {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    /// `G0 − G1 − G2` with `x2 = R`.
    pub boundary_error_plus_r: f64,
    /// `G0 − G1 − G2` with `x2 = −R`.
    pub boundary_error_minus_r: f64,
}

/// Ray approximation `G0 − G1 − G2` on the axis with amplitudes `1/(4πt)`.
///
/// At `x2 = R` the residual is `−Z e^{−(3R+x1)²/4t}`; at `x2 = −R` the
/// residual is `−Z e^{−(3R−x1)²/4t}`, since `S1(x1, −R) = 3R − x1`.
pub fn disk_axis_approximation(
    x1: f64,
    x2: f64,
    radius: f64,
    t: f64,
) -> Result<DiskAxisApproximation> {
    if x1.abs() > radius || x2.abs() > radius || !(t > 0.0) || !(radius > 0.0) {
        return Err(Error::Argument(
            "need |x1|, |x2| <= R, R > 0 and t > 0".into(),
        ));
    }
    let e = DiskAxisEikonals { radius };
    let z = 1.0 / (4.0 * PI * t);
    let g = |s: f64| z * (-s * s / (4.0 * t)).exp();
    let total = |x2: f64| g(e.s0(x1, x2)) - g(e.s1(x1, x2)) - g(e.s2(x1, x2));
    Ok(DiskAxisApproximation {
        g0: g(e.s0(x1, x2)),
        g1: g(e.s1(x1, x2)),
        g2: g(e.s2(x1, x2)),
        boundary_error_plus_r: total(radius),
        boundary_error_minus_r: total(-radius),
    })
}

/// Length of the two-reflection return ray through a point at distance
/// `rho_abs` from the centre of a disk of radius `R`.
///
/// Equals `4R` at the centre and `3√3 R` on the circle, increasing in between.
pub fn disk_triangle_eikonal(rho_abs: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !(0.0..=radius).contains(&rho_abs) {
        return Err(Error::Argument(format!(
            "need 0 <= |x| <= R, got |x| = {rho_abs}, R = {radius}"
        )));
    }
    let r = rho_abs / radius;
    let r2 = r * r;
    let q = (8.0 * r2 + 1.0).sqrt();
    let first = 2.0 * (2.0 * r2 + 1.0 + q).sqrt() / (4.0 * r2 + 1.0 + q).sqrt();
    let second = (4.0 * r2 + 2.0 + 2.0 * q).sqrt();
    Ok(radius * (first + second))
}
