//! Exact Laplace spectra and the Dirichlet series for the trace.

pub mod bessel;

pub use bessel::{bessel_j, bessel_j_all, bessel_j_zero};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Shape};
use crate::trace::{Backend, TraceSamples};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        }
    }
}

/// Counting bound `N(λ) ≤ A λ + B √λ + C` for the eigenvalue family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TailBound {
    pub fn count(&self, lambda: f64) -> f64 {
        self.a * lambda + self.b * lambda.sqrt() + self.c
    }

    /// Upper bound on `Σ_{λ > Λ} m(λ) e^{-λ t}`.
    pub fn eval(&self, lambda_max: f64, t: f64) -> f64 {
        let e = (-lambda_max * t).exp();
        let sq = lambda_max.sqrt().max(1e-300);
        e * (self.a * (lambda_max + 1.0 / t) + self.b * (sq + 0.5 / (t * sq)) + self.c)
    }

    /// Smallest cutoff (to a factor 1.01) at which the bound drops below `tol`.
    pub fn required_lambda_max(&self, t: f64, tol: f64) -> f64 {
        let mut hi = 1.0 / t;
        while self.eval(hi, t) > tol {
            hi *= 2.0;
        }
        let mut lo = 0.5 * hi;
        while hi / lo > 1.01 {
            let mid = (lo * hi).sqrt();
            if self.eval(mid, t) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Distinct eigenvalues with multiplicity, ascending.
    pub eigenvalues: Vec<(f64, usize)>,
    pub lambda_max: f64,
    pub tail_bound: TailBound,
    pub bc: BoundaryCondition,
    pub domain_digest: String,
    pub dimension: usize,
}

impl Spectrum {
    /// Number of eigenvalues `≤ λ` counted with multiplicity.
    pub fn count_below(&self, lambda: f64) -> usize {
        self.eigenvalues
            .iter()
            .take_while(|e| e.0 <= lambda)
            .map(|e| e.1)
            .sum()
    }

    /// Truncated Dirichlet series at a single `t`, summed in descending `λ`.
    pub fn partial_sum(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for &(l, m) in self.eigenvalues.iter().rev() {
            s += m as f64 * (-l * t).exp();
        }
        s
    }
}

pub const DEFAULT_LAMBDA_MAX_2D: f64 = 4.0e4;
pub const DEFAULT_LAMBDA_MAX_1D: f64 = 1.0e6;
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

fn collect(mut raw: Vec<(f64, usize)>) -> Vec<(f64, usize)> {
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, usize)> = Vec::with_capacity(raw.len());
    for (l, m) in raw {
        match out.last_mut() {
            Some(last) if (l - last.0).abs() <= 1e-14 * l.abs().max(1e-300) || l == last.0 => {
                last.1 += m
            }
            _ => out.push((l, m)),
        }
    }
    out
}

fn interval_eigen(l: f64, bc: BoundaryCondition, lambda_max: f64) -> Vec<f64> {
    let k = std::f64::consts::PI / l;
    let first = if bc == BoundaryCondition::Neumann {
        0
    } else {
        1
    };
    (first..)
        .map(|n| (n as f64 * k).powi(2))
        .take_while(|&v| v <= lambda_max)
        .collect()
}

pub fn eigenvalues(domain: &Domain, bc: BoundaryCondition, lambda_max: f64) -> Result<Spectrum> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::Argument(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    let pi = std::f64::consts::PI;
    let neumann = bc == BoundaryCondition::Neumann;
    let (raw, tail) = match domain.shape() {
        Shape::IntervalSet { lengths } => {
            let mut raw = Vec::new();
            for &l in lengths {
                raw.extend(
                    interval_eigen(l, bc, lambda_max)
                        .into_iter()
                        .map(|v| (v, 1)),
                );
            }
            let total: f64 = lengths.iter().sum();
            let tail = TailBound {
                a: 0.0,
                b: total / pi,
                c: if neumann { lengths.len() as f64 } else { 0.0 },
            };
            (raw, tail)
        }
        Shape::Rectangle { a, b } => {
            let xa = interval_eigen(*a, bc, lambda_max);
            let xb = interval_eigen(*b, bc, lambda_max);
            let mut raw = Vec::new();
            for &u in &xa {
                for &v in &xb {
                    if u + v > lambda_max {
                        break;
                    }
                    raw.push((u + v, 1));
                }
            }
            let tail = if neumann {
                TailBound {
                    a: a * b / (4.0 * pi),
                    b: (a + b) / pi,
                    c: 1.0,
                }
            } else {
                TailBound {
                    a: a * b / (4.0 * pi),
                    b: 0.0,
                    c: 0.0,
                }
            };
            (raw, tail)
        }
        Shape::Disk { radius } => {
            let zeros = disk_zeros(lambda_max.sqrt() * radius, neumann)?;
            let mut raw: Vec<(f64, usize)> = zeros
                .into_iter()
                .map(|(n, j)| ((j / radius).powi(2), if n == 0 { 1 } else { 2 }))
                .collect();
            if neumann {
                raw.push((0.0, 1));
            }
            let r2 = radius * radius;
            let tail = if neumann {
                TailBound {
                    a: r2 / 4.0,
                    b: *radius,
                    c: 2.0,
                }
            } else {
                TailBound {
                    a: r2 / 4.0,
                    b: 0.5 * radius,
                    c: 1.0,
                }
            };
            (raw, tail)
        }
        _ => return Err(Error::BackendUnavailable {
            backend: "series",
            what: format!("{} domains", domain.kind()),
            supported:
                "interval_set, rectangle, disk; use the montecarlo backend for other planar domains"
                    .into(),
        }),
    };
    Ok(Spectrum {
        eigenvalues: collect(raw),
        lambda_max,
        tail_bound: tail,
        bc,
        domain_digest: domain.digest(),
        dimension: domain.dimension(),
    })
}

/// All zeros `j ≤ x_max` of `J_n` (or `J_n'`), tagged with their order.
/// The zero of `J_0'` at the origin is excluded.
#[allow(clippy::needless_range_loop)]
pub fn disk_zeros(x_max: f64, derivative: bool) -> Result<Vec<(usize, f64)>> {
    let h = 0.25;
    let nmax = x_max.floor() as usize + 1;
    let n_grid = (x_max / h).ceil() as usize + 2;
    let grid: Vec<f64> = (1..=n_grid).map(|i| i as f64 * h).collect();
    let table: Vec<Vec<f64>> = grid
        .iter()
        .map(|&x| {
            let v = bessel_j_all(nmax + 1, x);
            if derivative {
                (0..=nmax)
                    .map(|n| {
                        if n == 0 {
                            -v[1]
                        } else {
                            0.5 * (v[n - 1] - v[n + 1])
                        }
                    })
                    .collect()
            } else {
                v[..=nmax].to_vec()
            }
        })
        .collect();
    let mut out = Vec::new();
    for n in 0..=nmax {
        let start = grid
            .iter()
            .position(|&x| x >= n as f64)
            .unwrap_or(grid.len());
        for i in start..grid.len().saturating_sub(1) {
            let (f0, f1) = (table[i][n], table[i + 1][n]);
            if f0 == 0.0 && grid[i] <= x_max {
                out.push((n, grid[i]));
                continue;
            }
            if f0.signum() != f1.signum() && f1 != 0.0 {
                let z = bessel::refine_zero(n, derivative, grid[i], grid[i + 1])?;
                if z <= x_max {
                    out.push((n, z));
                }
            }
        }
    }
    Ok(out)
}

/// Evaluate the Dirichlet series on `t_grid`, failing if the tail bound
/// exceeds `tol` anywhere.
pub fn trace_series_with_tol(
    spectrum: &Spectrum,
    t_grid: &[f64],
    tol: f64,
) -> Result<TraceSamples> {
    let mut values = Vec::with_capacity(t_grid.len());
    let mut errs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::Argument(format!("t must be positive, got {t}")));
        }
        let bound = spectrum.tail_bound.eval(spectrum.lambda_max, t);
        if bound > tol {
            return Err(Error::Truncation {
                t,
                bound,
                tol,
                required_lambda_max: spectrum.tail_bound.required_lambda_max(t, tol),
            });
        }
        values.push(spectrum.partial_sum(t));
        errs.push(bound);
    }
    TraceSamples::new(
        t_grid.to_vec(),
        values,
        errs,
        Backend::Series,
        spectrum.bc,
        spectrum.domain_digest.clone(),
        spectrum.dimension,
    )
}

pub fn trace_series(spectrum: &Spectrum, t_grid: &[f64]) -> Result<TraceSamples> {
    trace_series_with_tol(spectrum, t_grid, DEFAULT_TAIL_TOL)
}

/// Dirichlet heat-kernel diagonal at the disk centre from the eigenfunction
/// expansion: `Σ_k e^{-λ_k t} / (π R² J_1(j_{0,k})²)`.
pub fn disk_center_diagonal(radius: f64, t: f64, lambda_max: f64) -> Result<f64> {
    let zeros = disk_zeros(lambda_max.sqrt() * radius, false)?;
    let mut terms: Vec<f64> = zeros
        .into_iter()
        .filter(|z| z.0 == 0)
        .map(|(_, j)| {
            let j1 = bessel_j(1, j);
            (-(j / radius).powi(2) * t).exp() / (std::f64::consts::PI * radius * radius * j1 * j1)
        })
        .collect();
    terms.reverse();
    Ok(terms.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_pi_dirichlet() {
        let d = Domain::interval_set(&[PI]).unwrap();
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, 20.0).unwrap();
        let ls: Vec<f64> = s.eigenvalues.iter().map(|e| e.0).collect();
        assert_eq!(ls.len(), 4);
        for (k, l) in ls.iter().enumerate() {
            assert!((l - ((k + 1) * (k + 1)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn neumann_zero_mode_multiplicity() {
        let d = Domain::interval_set(&[1.0, 2.0, 2.0]).unwrap();
        let s = eigenvalues(&d, BoundaryCondition::Neumann, 10.0).unwrap();
        assert_eq!(s.eigenvalues[0], (0.0, 3));
        let r = Domain::rectangle(1.0, 2.0).unwrap();
        let s = eigenvalues(&r, BoundaryCondition::Neumann, 10.0).unwrap();
        assert_eq!(s.eigenvalues[0], (0.0, 1));
        let c = Domain::disk(1.0).unwrap();
        let s = eigenvalues(&c, BoundaryCondition::Neumann, 10.0).unwrap();
        assert_eq!(s.eigenvalues[0], (0.0, 1));
        assert!((s.eigenvalues[1].0 - 1.841183781340659f64.powi(2)).abs() < 1e-12);
        assert_eq!(s.eigenvalues[1].1, 2);
    }

    #[test]
    fn square_first_eigenvalue() {
        let d = Domain::rectangle(1.0, 1.0).unwrap();
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, 30.0).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!((s.eigenvalues[0].0 - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(s.eigenvalues[0].1, 1);
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, 60.0).unwrap();
        assert_eq!(s.eigenvalues[1].1, 2);
    }

    #[test]
    fn disk_first_eigenvalue() {
        let d = Domain::disk(1.0).unwrap();
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, 10.0).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!((s.eigenvalues[0].0 - 5.783185962947).abs() < 1e-11);
    }

    #[test]
    fn unsupported_domain() {
        let d = Domain::ellipse(2.0, 1.0).unwrap();
        assert!(matches!(
            eigenvalues(&d, BoundaryCondition::Dirichlet, 10.0),
            Err(Error::BackendUnavailable { .. })
        ));
    }

    #[test]
    fn series_value_at_one() {
        let d = Domain::interval_set(&[PI]).unwrap();
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, 1e6).unwrap();
        let tr = trace_series(&s, &[1.0]).unwrap();
        assert!((tr.values[0] - 0.386_318_602_413_326_1).abs() < 1e-15);
    }

    #[test]
    fn truncation_error_names_lambda() {
        let d = Domain::disk(1.0).unwrap();
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, 100.0).unwrap();
        match trace_series(&s, &[0.01]) {
            Err(Error::Truncation {
                t,
                required_lambda_max,
                ..
            }) => {
                assert_eq!(t, 0.01);
                assert!(required_lambda_max > 100.0);
                assert!(s.tail_bound.eval(required_lambda_max, 0.01) <= 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn large_t_limits() {
        let d = Domain::interval_set(&[1.0, 2.0]).unwrap();
        let s = eigenvalues(&d, BoundaryCondition::Neumann, 1e4).unwrap();
        let tr = trace_series(&s, &[200.0]).unwrap();
        assert!((tr.values[0] - 2.0).abs() < 1e-12);
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, 1e4).unwrap();
        let tr = trace_series(&s, &[200.0]).unwrap();
        assert!(tr.values[0] < 1e-12);
    }

    #[test]
    fn disk_small_t_follows_kac() {
        let d = Domain::disk(1.0).unwrap();
        let t = 1e-3;
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, DEFAULT_LAMBDA_MAX_2D).unwrap();
        let p = trace_series(&s, &[t]).unwrap().values[0];
        let kac = PI - 2.0 * PI * (PI * t).sqrt() / 2.0 + 4.0 * PI * t / 6.0;
        assert!((4.0 * PI * t * p / kac - 1.0).abs() < 1e-4);
        assert!((4.0 * PI * t * p / PI - 1.0).abs() < 0.06);
    }

    #[test]
    fn disk_counts_follow_weyl() {
        let d = Domain::disk(1.0).unwrap();
        let s = eigenvalues(&d, BoundaryCondition::Dirichlet, 1e4).unwrap();
        for lambda in [1e2, 1e3, 3e3, 1e4] {
            let weyl = PI * lambda / (4.0 * PI) - 2.0 * PI * lambda.sqrt() / (4.0 * PI);
            let n = s.count_below(lambda) as f64;
            assert!(
                (n - weyl).abs() <= 3.0 * lambda.powf(0.25),
                "{lambda}: {n} vs {weyl}"
            );
        }
    }

    #[test]
    fn counting_bounds_hold() {
        let domains = [
            Domain::disk(1.0).unwrap(),
            Domain::rectangle(1.0, 2.0).unwrap(),
            Domain::interval_set(&[1.0, 1.5]).unwrap(),
        ];
        for d in &domains {
            for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
                let s = eigenvalues(d, bc, 1e4).unwrap();
                for k in 1..=100 {
                    let lambda = 100.0 * k as f64;
                    assert!(
                        s.count_below(lambda) as f64 <= s.tail_bound.count(lambda),
                        "{} {bc:?} {lambda}",
                        d.kind()
                    );
                }
            }
        }
    }
}
