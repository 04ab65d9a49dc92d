//! Inverse pipeline: algebraic short-time fit, transcendental exponents and
//! their identification with billiard orbits.

use crate::billiards::{LengthEntry, LengthSpectrum};
use crate::error::{Error, Result};
use crate::numerics::neville_to_zero;
use crate::spectra::BoundaryCondition;
use crate::trace::TraceSamples;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MAX_CONDITION: f64 = 1e12;
pub const NOISE_FACTOR: f64 = 10.0;
const MIN_WINDOW_POINTS: usize = 6;
const REL_SIGMA: f64 = 1e-8;
const MAX_TERM_CHI2: f64 = 1e4;

/// Pointwise uncertainty: reported error, floored at a few ulps of `P`.
fn sigma(tr: &TraceSamples) -> Vec<f64> {
    tr.values
        .iter()
        .zip(&tr.abs_error)
        .map(|(p, e)| e.max(8.0 * f64::EPSILON * p.abs()).max(f64::MIN_POSITIVE))
        .collect()
}

/// Fitted short-time coefficients `Σ a_n t^{p_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub higher: Vec<f64>,
    pub n_terms: usize,
    pub powers: Vec<f64>,
    pub stderr: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub t_window: [f64; 2],
    pub condition: f64,
    pub chi2_dof: f64,
    pub dimension: usize,
    pub bc: BoundaryCondition,
}

impl SwCoefficients {
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c = vec![self.a0, self.a1, self.a2];
        c.extend(&self.higher);
        c.truncate(self.n_terms);
        c
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients()
            .iter()
            .zip(&self.powers)
            .map(|(c, p)| c * t.powf(*p))
            .sum()
    }

    /// Standard deviation of `eval(t)` from the coefficient covariance.
    pub fn eval_stderr(&self, t: f64) -> f64 {
        let b: Vec<f64> = self.powers.iter().map(|p| t.powf(*p)).collect();
        let mut v = 0.0;
        for i in 0..b.len() {
            for j in 0..b.len() {
                v += b[i] * self.covariance[i][j] * b[j];
            }
        }
        v.max(0.0).sqrt()
    }

    /// Geometry read off the coefficients, with one-sigma uncertainties.
    pub fn geometry(&self) -> Geometry {
        let (s0, s1, s2) = (
            self.stderr[0],
            self.stderr[1],
            self.stderr.get(2).copied().unwrap_or(0.0),
        );
        geometry_from(
            self.dimension,
            self.bc,
            [self.a0, self.a1, self.a2],
            [s0, s1, s2],
        )
    }
}

/// Area, perimeter and constant term. In 1-D, "area" is the total length
/// and "perimeter" the number of boundary points `2K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub area: f64,
    pub perimeter: f64,
    pub constant: f64,
    pub area_err: f64,
    pub perimeter_err: f64,
    pub constant_err: f64,
}

fn perimeter_sign(bc: BoundaryCondition) -> f64 {
    match bc {
        BoundaryCondition::Dirichlet => -1.0,
        BoundaryCondition::Neumann => 1.0,
    }
}

fn geometry_from(dim: usize, bc: BoundaryCondition, c: [f64; 3], e: [f64; 3]) -> Geometry {
    let sg = perimeter_sign(bc);
    if dim == 1 {
        let k = 2.0 * PI.sqrt();
        Geometry {
            area: k * c[0],
            perimeter: 4.0 * sg * c[1],
            constant: c[1],
            area_err: k * e[0],
            perimeter_err: 4.0 * e[1],
            constant_err: e[1],
        }
    } else {
        let k = 8.0 * PI.sqrt();
        Geometry {
            area: 4.0 * PI * c[0],
            perimeter: k * sg * c[1],
            constant: c[2],
            area_err: 4.0 * PI * e[0],
            perimeter_err: k * e[1],
            constant_err: e[2],
        }
    }
}

/// Exponents `t^{n/2 - 1}` (2-D) or `t^{n/2 - 1/2}` (1-D).
pub fn sw_powers(dimension: usize, n_terms: usize) -> Vec<f64> {
    let shift = if dimension == 1 { 0.5 } else { 1.0 };
    (0..n_terms).map(|n| n as f64 / 2.0 - shift).collect()
}

fn window_indices(tr: &TraceSamples, lo: f64, hi: f64) -> Vec<usize> {
    (0..tr.len())
        .filter(|&i| tr.t_grid[i] >= lo * (1.0 - 1e-12) && tr.t_grid[i] <= hi * (1.0 + 1e-12))
        .collect()
}

fn fit_on(tr: &TraceSamples, n_terms: usize, idx: &[usize]) -> Result<SwCoefficients> {
    let powers = sw_powers(tr.dimension, n_terms);
    let sig = sigma(tr);
    let m = idx.len();
    let mut a = DMatrix::zeros(m, n_terms);
    let mut b = DVector::zeros(m);
    for (r, &i) in idx.iter().enumerate() {
        let t = tr.t_grid[i];
        for (c, p) in powers.iter().enumerate() {
            a[(r, c)] = t.powf(*p) / sig[i];
        }
        b[r] = tr.values[i] / sig[i];
    }
    let scale: Vec<f64> = (0..n_terms).map(|c| a.column(c).norm()).collect();
    for (c, s) in scale.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    let window = [tr.t_grid[idx[0]], tr.t_grid[idx[m - 1]]];
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Window(format!(
            "design matrix condition {condition:.3e} exceeds {MAX_CONDITION:.0e} on [{:.3e}, {:.3e}]; \
             narrow the t-range or fit fewer terms",
            window[0], window[1]
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Numeric(format!("least squares failed: {e}")))?;
    let resid = &b - &a * &x;
    let dof = (m - n_terms).max(1) as f64;
    let chi2_dof = resid.norm_squared() / dof;
    let v = svd.v_t.as_ref().unwrap().transpose();
    let mut cov = vec![vec![0.0; n_terms]; n_terms];
    let inflate = chi2_dof.max(1.0);
    for i in 0..n_terms {
        for j in 0..n_terms {
            let mut s = 0.0;
            for k in 0..n_terms {
                s += v[(i, k)] * v[(j, k)] / (sv[k] * sv[k]);
            }
            cov[i][j] = s * inflate / (scale[i] * scale[j]);
        }
    }
    let coef: Vec<f64> = (0..n_terms).map(|c| x[c] / scale[c]).collect();
    let stderr = (0..n_terms).map(|i| cov[i][i].sqrt()).collect();
    Ok(SwCoefficients {
        a0: coef[0],
        a1: coef[1],
        a2: coef[2],
        higher: coef[3..].to_vec(),
        n_terms,
        powers,
        stderr,
        covariance: cov,
        t_window: window,
        condition,
        chi2_dof,
        dimension: tr.dimension,
        bc: tr.bc,
    })
}

/// Weighted least-squares fit of the short-time power series.
///
/// With `t_window = None` the upper end shrinks geometrically from the
/// largest grid time until the fit is statistically consistent.
pub fn fit_algebraic(
    tr: &TraceSamples,
    n_terms: usize,
    t_window: Option<[f64; 2]>,
) -> Result<SwCoefficients> {
    if n_terms < 3 {
        return Err(Error::Argument(format!(
            "n_terms must be at least 3, got {n_terms}"
        )));
    }
    let need = 2 * n_terms;
    if let Some([lo, hi]) = t_window {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Window(format!("invalid window [{lo}, {hi}]")));
        }
        let idx = window_indices(tr, lo, hi);
        if idx.len() < need {
            return Err(Error::Window(format!(
                "{} grid points in [{lo:.3e}, {hi:.3e}], need at least {need}",
                idx.len()
            )));
        }
        return fit_on(tr, n_terms, &idx);
    }
    let lo = tr.t_grid[0];
    let mut hi = tr.t_grid[tr.len() - 1];
    let mut last: Option<SwCoefficients> = None;
    loop {
        let idx = window_indices(tr, lo, hi);
        if idx.len() < need {
            break;
        }
        match fit_on(tr, n_terms, &idx) {
            Ok(fit) => {
                if fit.chi2_dof <= 2.0 {
                    return Ok(fit);
                }
                last = Some(fit);
            }
            Err(e @ Error::Window(_)) if last.is_none() => {
                if idx.len() == need {
                    return Err(e);
                }
            }
            Err(_) => {}
        }
        hi /= 1.25;
    }
    last.ok_or_else(|| {
        Error::Window(format!(
            "fewer than {need} grid points in any window starting at {lo:.3e}"
        ))
    })
}

/// Leading quantities by sequential extrapolation in `√t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimates {
    pub geometry: Geometry,
    pub n_points: usize,
}

fn extrapolate(h: &[f64], y: &[f64], what: &str) -> Result<(f64, f64)> {
    let diag = neville_to_zero(h, y);
    let diffs: Vec<f64> = diag.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if diffs.is_empty() {
        return Err(Error::InsufficientRange(format!(
            "{what}: need at least two points"
        )));
    }
    let (k, dmin) =
        diffs.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, d)| if *d < acc.1 { (i, *d) } else { acc },
        );
    if diffs.len() > 1 && dmin >= diffs[0] {
        return Err(Error::InsufficientRange(format!(
            "{what}: extrapolation table does not contract; extend the grid to smaller t"
        )));
    }
    Ok((diag[k + 1], dmin))
}

pub const LIMIT_POINTS: usize = 8;
pub const LIMIT_SPAN: f64 = 64.0;

/// `|Ω| = lim 4πt P`, then the perimeter and the constant from the successive remainders.
pub fn limit_extract(tr: &TraceSamples) -> Result<LimitEstimates> {
    if tr.len() < 3 {
        return Err(Error::InsufficientRange(format!(
            "{} grid points, need at least 3",
            tr.len()
        )));
    }
    // Nodes spread geometrically over at most `LIMIT_SPAN` from the smallest time.
    let t_min = tr.t_grid[0];
    let span = (tr.t_grid[tr.len() - 1] / t_min).min(LIMIT_SPAN);
    let mut idx: Vec<usize> = (0..LIMIT_POINTS)
        .map(|k| {
            let target = t_min * span.powf(k as f64 / (LIMIT_POINTS - 1) as f64);
            let j = tr.t_grid.partition_point(|x| *x < target).min(tr.len() - 1);
            if j > 0 && target - tr.t_grid[j - 1] < tr.t_grid[j] - target {
                j - 1
            } else {
                j
            }
        })
        .collect();
    idx.dedup();
    let n = idx.len();
    let t: Vec<f64> = idx.iter().map(|&i| tr.t_grid[i]).collect();
    let p: Vec<f64> = idx.iter().map(|&i| tr.values[i]).collect();
    let h: Vec<f64> = t.iter().map(|x| x.sqrt()).collect();
    let sg = perimeter_sign(tr.bc);
    let geometry = if tr.dimension == 1 {
        let y0: Vec<f64> = (0..n).map(|i| 2.0 * (PI * t[i]).sqrt() * p[i]).collect();
        let (len, e0) = extrapolate(&h, &y0, "length")?;
        let y1: Vec<f64> = (0..n)
            .map(|i| p[i] - len / (2.0 * (PI * t[i]).sqrt()))
            .collect();
        let (c, e1) = extrapolate(&h, &y1, "constant")?;
        Geometry {
            area: len,
            perimeter: 4.0 * sg * c,
            constant: c,
            area_err: e0,
            perimeter_err: 4.0 * e1,
            constant_err: e1,
        }
    } else {
        let y0: Vec<f64> = (0..n).map(|i| 4.0 * PI * t[i] * p[i]).collect();
        let (area, e0) = extrapolate(&h, &y0, "area")?;
        let y1: Vec<f64> = (0..n)
            .map(|i| sg * 8.0 * (PI * t[i]).sqrt() * (p[i] - area / (4.0 * PI * t[i])))
            .collect();
        let (perim, e1) = extrapolate(&h, &y1, "perimeter")?;
        let y2: Vec<f64> = (0..n)
            .map(|i| p[i] - area / (4.0 * PI * t[i]) - sg * perim / (8.0 * (PI * t[i]).sqrt()))
            .collect();
        let (c, e2) = extrapolate(&h, &y2, "constant")?;
        Geometry {
            area,
            perimeter: perim,
            constant: c,
            area_err: e0,
            perimeter_err: e1,
            constant_err: e2,
        }
    };
    Ok(LimitEstimates {
        geometry,
        n_points: n,
    })
}

/// One transcendental term `sign · e^{lc} t^{-ν} e^{-δ²/t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub delta_sq: f64,
    pub delta_sq_stderr: f64,
    pub sign: i8,
    pub nu: f64,
    pub log_amplitude: f64,
    /// R² of the log-space fit for a single extraction, reduced χ² of the
    /// joint amplitude fit when peeled.
    pub fit_residual: f64,
    pub t_window: [f64; 2],
}

impl Exponent {
    pub fn delta(&self) -> f64 {
        self.delta_sq.sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.sign as f64 * (self.log_amplitude - self.nu * t.ln() - self.delta_sq / t).exp()
    }
}

struct Residual {
    t: Vec<f64>,
    r: Vec<f64>,
    noise: Vec<f64>,
}

fn residual(tr: &TraceSamples, sw: &SwCoefficients) -> Residual {
    let sig = sigma(tr);
    let r = (0..tr.len())
        .map(|i| tr.values[i] - sw.eval(tr.t_grid[i]))
        .collect();
    let noise = (0..tr.len())
        .map(|i| sig[i] + sw.eval_stderr(tr.t_grid[i]))
        .collect();
    Residual {
        t: tr.t_grid.clone(),
        r,
        noise,
    }
}

fn detectable_bound(res: &Residual, tr: &TraceSamples) -> f64 {
    (0..res.t.len())
        .map(|i| {
            let ratio = NOISE_FACTOR * res.noise[i] / tr.values[i].abs().max(f64::MIN_POSITIVE);
            if ratio < 1.0 {
                -res.t[i] * ratio.ln()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Indices of the auto window `[t_lo, 2 t_lo]`, `t_lo` the first point above the noise floor.
fn auto_window(t: &[f64], ok: &[bool]) -> Option<Vec<usize>> {
    let first = ok.iter().position(|b| *b)?;
    let lo = t[first];
    let mut idx: Vec<usize> = (first..t.len())
        .filter(|&i| ok[i] && t[i] <= 2.0 * lo)
        .collect();
    if idx.len() < MIN_WINDOW_POINTS {
        idx = (first..t.len())
            .filter(|&i| ok[i])
            .take(MIN_WINDOW_POINTS)
            .collect();
    }
    (idx.len() >= MIN_WINDOW_POINTS).then_some(idx)
}

/// Weighted fit of `ln|r| = c − ν ln t − δ²/t`.
fn log_fit(t: &[f64], r: &[f64], noise: &[f64], idx: &[usize]) -> Result<(f64, f64, f64, f64)> {
    let m = idx.len();
    let mut a = DMatrix::zeros(m, 3);
    let mut b = DVector::zeros(m);
    let mut ys = Vec::with_capacity(m);
    let mut ws = Vec::with_capacity(m);
    for (k, &i) in idx.iter().enumerate() {
        let w = r[i].abs() / noise[i];
        let y = r[i].abs().ln();
        a[(k, 0)] = w;
        a[(k, 1)] = -t[i].ln() * w;
        a[(k, 2)] = -w / t[i];
        b[k] = y * w;
        ys.push(y);
        ws.push(w * w);
    }
    let x = crate::numerics::solve_svd(&a, &b)
        .ok_or_else(|| Error::Numeric("degenerate exponent fit".into()))?;
    let wsum: f64 = ws.iter().sum();
    let ybar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let mut ss_tot = 0.0;
    let mut ss_res = 0.0;
    for (k, &i) in idx.iter().enumerate() {
        let fit = x[0] - x[1] * t[i].ln() - x[2] / t[i];
        ss_res += ws[k] * (ys[k] - fit).powi(2);
        ss_tot += ws[k] * (ys[k] - ybar).powi(2);
    }
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok((x[0], x[1], x[2], r2))
}

fn extract_from(
    res: &Residual,
    noise: &[f64],
    r: &[f64],
    window: Option<[f64; 2]>,
    upper_bound: impl Fn() -> f64,
) -> Result<Exponent> {
    let ok: Vec<bool> = (0..r.len())
        .map(|i| r[i].abs() > NOISE_FACTOR * noise[i])
        .collect();
    let idx = match window {
        Some([lo, hi]) => {
            let inside: Vec<usize> = (0..r.len())
                .filter(|&i| res.t[i] >= lo && res.t[i] <= hi)
                .collect();
            if inside.iter().any(|&i| !ok[i]) || inside.len() < MIN_WINDOW_POINTS {
                return Err(Error::SignalTooSmall {
                    upper_bound: upper_bound(),
                });
            }
            inside
        }
        None => auto_window(&res.t, &ok).ok_or_else(|| Error::SignalTooSmall {
            upper_bound: upper_bound(),
        })?,
    };
    let s0 = r[idx[0]].signum();
    if idx.iter().any(|&i| r[i].signum() != s0) {
        return Err(Error::Window(
            "residual changes sign inside the exponent window".into(),
        ));
    }
    let (c, nu, d2, r2) = log_fit(&res.t, r, noise, &idx)?;
    Ok(Exponent {
        delta_sq: d2,
        delta_sq_stderr: f64::NAN,
        sign: s0 as i8,
        nu,
        log_amplitude: c,
        fit_residual: r2,
        t_window: [res.t[idx[0]], res.t[*idx.last().unwrap()]],
    })
}

/// Leading exponent of `P − P_SW` from the behaviour of `ln|r|` near small `t`.
pub fn extract_exponent(
    tr: &TraceSamples,
    sw: &SwCoefficients,
    t_window: Option<[f64; 2]>,
) -> Result<Exponent> {
    let res = residual(tr, sw);
    let mut e = extract_from(&res, &res.noise, &res.r, t_window, || {
        detectable_bound(&res, tr)
    })?;
    e.delta_sq_stderr = 0.0;
    Ok(e)
}

/// Result of iterative peeling; `diagnostic` explains an early stop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peeled {
    pub exponents: Vec<Exponent>,
    pub diagnostic: Option<String>,
}

const NU_BOUNDS: (f64, f64) = (0.5, 1.5);

fn model_eval(p: &[f64], signs: &[f64], t: f64) -> f64 {
    p.chunks(3)
        .zip(signs)
        .map(|(q, s)| s * (q[0] - q[1] * t.ln() - q[2] / t).exp())
        .sum()
}

struct JointFit {
    params: Vec<f64>,
    chi2_dof: f64,
    covariance: DMatrix<f64>,
}

/// Projected Levenberg–Marquardt with box constraints on `ν` and `δ² ≥ 0`.
fn joint_fit(t: &[f64], r0: &[f64], sig: &[f64], signs: &[f64], p0: Vec<f64>) -> Option<JointFit> {
    let np = p0.len();
    let m = t.len();
    let lower: Vec<f64> = (0..np)
        .map(|i| match i % 3 {
            0 => f64::NEG_INFINITY,
            1 => NU_BOUNDS.0,
            _ => 0.0,
        })
        .collect();
    let upper: Vec<f64> = (0..np)
        .map(|i| match i % 3 {
            1 => NU_BOUNDS.1,
            _ => f64::INFINITY,
        })
        .collect();
    let clamp = |p: &mut Vec<f64>| {
        for i in 0..np {
            p[i] = p[i].clamp(lower[i], upper[i]);
        }
    };
    let eval = |p: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let mut f = DVector::zeros(m);
        let mut j = DMatrix::zeros(m, np);
        for k in 0..m {
            let mut model = 0.0;
            for (q, (chunk, s)) in p.chunks(3).zip(signs).enumerate() {
                let v = s * (chunk[0] - chunk[1] * t[k].ln() - chunk[2] / t[k]).exp();
                model += v;
                j[(k, 3 * q)] = -v / sig[k];
                j[(k, 3 * q + 1)] = t[k].ln() * v / sig[k];
                j[(k, 3 * q + 2)] = v / (t[k] * sig[k]);
            }
            f[k] = (r0[k] - model) / sig[k];
        }
        (f, j)
    };
    let mut p = p0;
    clamp(&mut p);
    let (mut f, mut j) = eval(&p);
    let mut cost = f.norm_squared();
    if !cost.is_finite() {
        return None;
    }
    let mut mu = 1e-3;
    for _ in 0..500 {
        // Augmented system [J; √μ D] δ = [−f; 0] keeps the conditioning of J.
        // Parameters pinned at a bound and pushed outward are frozen.
        let mut free = vec![true; np];
        let mut step = DVector::zeros(np);
        for _ in 0..=np {
            let mut aug = DMatrix::zeros(m + np, np);
            let mut rhs = DVector::zeros(m + np);
            for c in (0..np).filter(|&c| free[c]) {
                aug.view_mut((0, c), (m, 1)).copy_from(&j.column(c));
                aug[(m + c, c)] = (mu * j.column(c).norm_squared().max(1e-300)).sqrt();
            }
            rhs.rows_mut(0, m).copy_from(&(-&f));
            let Some(s) = crate::numerics::solve_svd(&aug, &rhs) else {
                break;
            };
            step = s;
            let mut changed = false;
            for c in 0..np {
                let out_low = p[c] <= lower[c] && step[c] < 0.0;
                let out_high = p[c] >= upper[c] && step[c] > 0.0;
                if free[c] && (out_low || out_high) {
                    free[c] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for c in 0..np {
            if !free[c] {
                step[c] = 0.0;
            }
        }
        let mut cand: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        clamp(&mut cand);
        let (f2, j2) = eval(&cand);
        let c2 = f2.norm_squared();
        if c2.is_finite() && c2 < cost {
            let rel = (cost - c2) / cost.max(f64::MIN_POSITIVE);
            p = cand;
            f = f2;
            j = j2;
            cost = c2;
            mu = (mu / 3.0).max(1e-12);
            if rel < 1e-15 {
                break;
            }
        } else {
            mu *= 4.0;
            if mu > 1e16 {
                break;
            }
        }
    }
    let dof = (m.saturating_sub(np)).max(1) as f64;
    let chi2_dof = cost / dof;
    let jtj = j.transpose() * &j;
    let eps = 1e-14 * jtj.norm();
    let covariance = jtj.pseudo_inverse(eps).ok()? * chi2_dof.max(1.0);
    Some(JointFit {
        params: p,
        chi2_dof,
        covariance,
    })
}

/// Iteratively extract, jointly refit and subtract transcendental terms.
pub fn peel_spectrum(tr: &TraceSamples, sw: &SwCoefficients, k_max: usize) -> Result<Peeled> {
    let res = residual(tr, sw);
    let t = &res.t;
    let mut params: Vec<f64> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut windows: Vec<[f64; 2]> = Vec::new();
    let mut chis: Vec<f64> = Vec::new();
    let mut cov = DMatrix::zeros(0, 0);
    let mut r = res.r.clone();
    let mut noise = res.noise.clone();
    let mut diagnostic = None;
    for k in 0..k_max {
        let e = match extract_from(&res, &noise, &r, None, || detectable_bound(&res, tr)) {
            Ok(e) => e,
            Err(Error::SignalTooSmall { upper_bound }) => {
                if k == 0 {
                    return Err(Error::SignalTooSmall { upper_bound });
                }
                diagnostic = Some(format!("noise floor reached after {k} exponents"));
                break;
            }
            Err(e) => {
                if k == 0 {
                    return Err(e);
                }
                diagnostic = Some(format!("stopped after {k} exponents: {e}"));
                break;
            }
        };
        let mut p0 = params.clone();
        p0.extend([
            e.log_amplitude,
            e.nu.clamp(NU_BOUNDS.0, NU_BOUNDS.1),
            e.delta_sq.max(0.0),
        ]);
        let mut s = signs.clone();
        s.push(e.sign as f64);
        let mut w = windows.clone();
        w.push(e.t_window);
        let lo = w[0][0];
        let hi = w.iter().map(|x| x[1]).fold(0.0, f64::max);
        let idx: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= lo && t[i] <= hi).collect();
        let tw: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
        let rw: Vec<f64> = idx.iter().map(|&i| res.r[i]).collect();
        let sg: Vec<f64> = idx
            .iter()
            .map(|&i| res.noise[i] + REL_SIGMA * res.r[i].abs())
            .collect();
        // Multi-start over the new term's power; deterministic best-of.
        let starts: Vec<Vec<f64>> = [e.nu, 0.5, 0.75, 1.0, 1.25, 1.5]
            .iter()
            .map(|&nu| {
                let nu = nu.clamp(NU_BOUNDS.0, NU_BOUNDS.1);
                let mut p = p0.clone();
                let n = p.len();
                let t0 = e.t_window[0];
                p[n - 3] = e.log_amplitude - (e.nu - nu) * t0.ln();
                p[n - 2] = nu;
                p
            })
            .collect();
        let best = starts
            .into_par_iter()
            .filter_map(|p| joint_fit(&tw, &rw, &sg, &s, p))
            .collect::<Vec<_>>()
            .into_iter()
            .min_by(|a, b| a.chi2_dof.total_cmp(&b.chi2_dof));
        let Some(fit) = best else {
            diagnostic = Some(format!("amplitude fit failed at exponent {}", k + 1));
            break;
        };
        let d2s: Vec<f64> = fit.params.chunks(3).map(|q| q[2]).collect();
        let duplicate = d2s.iter().enumerate().any(|(i, a)| {
            d2s[i + 1..]
                .iter()
                .any(|b| (a - b).abs() <= 1e-3 * a.abs().max(b.abs()))
        });
        if k > 0 && (fit.chi2_dof > MAX_TERM_CHI2 || duplicate) {
            diagnostic = Some(format!(
                "amplitude fit did not converge at exponent {} (reduced chi2 {:.3e})",
                k + 1,
                fit.chi2_dof
            ));
            break;
        }
        params = fit.params;
        signs = s;
        windows = w;
        chis.push(fit.chi2_dof);
        cov = fit.covariance;
        // Propagate the joint-fit uncertainty into the noise floor.
        let np = params.len();
        for i in 0..t.len() {
            let mut grad = vec![0.0; np];
            for (q, (chunk, sgn)) in params.chunks(3).zip(&signs).enumerate() {
                let v = sgn * (chunk[0] - chunk[1] * t[i].ln() - chunk[2] / t[i]).exp();
                grad[3 * q] = v;
                grad[3 * q + 1] = -t[i].ln() * v;
                grad[3 * q + 2] = -v / t[i];
            }
            let mut var = 0.0;
            for a in 0..np {
                for b in 0..np {
                    var += grad[a] * cov[(a, b)] * grad[b];
                }
            }
            r[i] = res.r[i] - model_eval(&params, &signs, t[i]);
            noise[i] = res.noise[i] + var.max(0.0).sqrt();
        }
    }
    let mut exponents: Vec<Exponent> = params
        .chunks(3)
        .enumerate()
        .map(|(q, c)| Exponent {
            delta_sq: c[2],
            delta_sq_stderr: cov[(3 * q + 2, 3 * q + 2)].max(0.0).sqrt(),
            sign: signs[q] as i8,
            nu: c[1],
            log_amplitude: c[0],
            fit_residual: chis[q],
            t_window: windows[q],
        })
        .collect();
    exponents.sort_by(|a, b| a.delta_sq.partial_cmp(&b.delta_sq).unwrap());
    Ok(Peeled {
        exponents,
        diagnostic,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub recovered_index: usize,
    pub delta_sq: f64,
    pub predicted: LengthEntry,
    pub relative_gap: f64,
}

/// Greedy nearest-first pairing of `√delta_sq` with predicted `δ`.
pub fn match_spectrum(
    recovered: &[f64],
    predicted: &LengthSpectrum,
    rel_tol: f64,
) -> (Vec<Match>, Vec<usize>) {
    let mut pairs = Vec::new();
    for (i, d2) in recovered.iter().enumerate() {
        let d = d2.max(0.0).sqrt();
        for (j, e) in predicted.entries.iter().enumerate() {
            let gap = (d - e.delta).abs() / e.delta;
            if gap <= rel_tol {
                pairs.push((gap, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut used_r = vec![false; recovered.len()];
    let mut used_p = vec![false; predicted.entries.len()];
    let mut matches = Vec::new();
    for (gap, i, j) in pairs {
        if used_r[i] || used_p[j] {
            continue;
        }
        used_r[i] = true;
        used_p[j] = true;
        matches.push(Match {
            recovered_index: i,
            delta_sq: recovered[i],
            predicted: predicted.entries[j].clone(),
            relative_gap: gap,
        });
    }
    matches.sort_by_key(|m| m.recovered_index);
    let unexplained = (0..recovered.len()).filter(|&i| !used_r[i]).collect();
    (matches, unexplained)
}

/// The fitted constant read as `(1 − r)/6` (holes) or as right-angle corners `1/16` each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantReadings {
    pub holes: f64,
    pub right_angle_corners: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryOptions {
    pub n_terms: usize,
    pub k_max: usize,
    pub rel_tol: f64,
    pub t_window: Option<[f64; 2]>,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            n_terms: 4,
            k_max: 3,
            rel_tol: 0.02,
            t_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub area: f64,
    pub perimeter: f64,
    pub constant: f64,
    pub uncertainty: Geometry,
    pub constant_readings: Option<ConstantReadings>,
    pub limits: Option<LimitEstimates>,
    pub sw: SwCoefficients,
    pub exponents: Vec<Exponent>,
    pub matches: Vec<Match>,
    pub unexplained: Vec<usize>,
    pub diagnostics: Vec<String>,
}

/// Full pipeline: fit, limits, peeling, matching.
pub fn recover(
    tr: &TraceSamples,
    predicted: Option<&LengthSpectrum>,
    opts: &RecoveryOptions,
) -> Result<RecoveryReport> {
    let sw = fit_algebraic(tr, opts.n_terms, opts.t_window)?;
    let g = sw.geometry();
    let mut diagnostics = Vec::new();
    let limits = match limit_extract(tr) {
        Ok(l) => Some(l),
        Err(e) => {
            diagnostics.push(format!("limit extraction: {e}"));
            None
        }
    };
    let exponents = if opts.k_max == 0 {
        Vec::new()
    } else {
        match peel_spectrum(tr, &sw, opts.k_max) {
            Ok(p) => {
                if let Some(d) = p.diagnostic {
                    diagnostics.push(d);
                }
                p.exponents
            }
            Err(Error::SignalTooSmall { upper_bound }) => {
                diagnostics.push(format!(
                    "no transcendental signal above the noise floor; detectable delta_sq below {upper_bound:.4e}"
                ));
                Vec::new()
            }
            Err(e) => {
                diagnostics.push(format!("exponent extraction: {e}"));
                Vec::new()
            }
        }
    };
    let d2: Vec<f64> = exponents.iter().map(|e| e.delta_sq).collect();
    let empty = LengthSpectrum {
        entries: Vec::new(),
    };
    let (matches, unexplained) = match_spectrum(&d2, predicted.unwrap_or(&empty), opts.rel_tol);
    Ok(RecoveryReport {
        area: g.area,
        perimeter: g.perimeter,
        constant: g.constant,
        uncertainty: g,
        constant_readings: (tr.dimension == 2).then_some(ConstantReadings {
            holes: 1.0 - 6.0 * g.constant,
            right_angle_corners: 16.0 * g.constant,
        }),
        limits,
        sw,
        exponents,
        matches,
        unexplained,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiards::OrbitKind;
    use crate::trace::{log_grid, Backend};

    fn synthetic(dim: usize, f: impl Fn(f64) -> f64, t: Vec<f64>) -> TraceSamples {
        let v: Vec<f64> = t.iter().map(|x| f(*x)).collect();
        let e = vec![0.0; t.len()];
        TraceSamples::new(
            t,
            v,
            e,
            Backend::Series,
            BoundaryCondition::Dirichlet,
            "x".into(),
            dim,
        )
        .unwrap()
    }

    #[test]
    fn exact_model_in_span() {
        let (c0, c1, c2) = (0.25, -0.3, 1.0 / 6.0);
        let tr = synthetic(2, |t| c0 / t + c1 / t.sqrt() + c2, log_grid(1e-3, 1.0, 60));
        let sw = fit_algebraic(&tr, 3, None).unwrap();
        assert!((sw.a0 / c0 - 1.0).abs() < 1e-10);
        assert!((sw.a1 / c1 - 1.0).abs() < 1e-10);
        assert!((sw.a2 / c2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ill_conditioned_window() {
        let tr = synthetic(2, |t| 1.0 / t, log_grid(1.0, 1.0 + 1e-9, 40));
        assert!(matches!(fit_algebraic(&tr, 8, None), Err(Error::Window(_))));
    }

    #[test]
    fn limits_of_pure_algebraic() {
        let tr = synthetic(
            2,
            |t| 1.0 / t - 0.5 / t.sqrt() + 0.2 + 0.1 * t.sqrt(),
            log_grid(1e-4, 1e-2, 40),
        );
        let l = limit_extract(&tr).unwrap().geometry;
        assert!((l.area - 4.0 * PI).abs() < 1e-8 * 4.0 * PI);
        assert!((l.perimeter - 4.0 * PI.sqrt()).abs() < 1e-8 * 4.0 * PI.sqrt());
        assert!((l.constant - 0.2).abs() < 1e-8);
    }

    #[test]
    fn constructed_exponent() {
        let t = log_grid(0.01, 0.1, 40);
        let sw_tr = synthetic(2, |t| t.sqrt() * (-1.0 / t).exp(), t);
        let sw = SwCoefficients {
            a0: 0.0,
            a1: 0.0,
            a2: 0.0,
            higher: vec![],
            n_terms: 3,
            powers: sw_powers(2, 3),
            stderr: vec![0.0; 3],
            covariance: vec![vec![0.0; 3]; 3],
            t_window: [0.01, 0.1],
            condition: 1.0,
            chi2_dof: 0.0,
            dimension: 2,
            bc: BoundaryCondition::Dirichlet,
        };
        let e = extract_exponent(&sw_tr, &sw, Some([0.01, 0.1])).unwrap();
        assert!((e.delta_sq - 1.0).abs() < 1e-6, "{}", e.delta_sq);
        assert_eq!(e.sign, 1);
    }

    #[test]
    fn two_constructed_exponentials() {
        let tr = synthetic(
            2,
            |t| {
                1.0 / t
                    + 2.0
                    + t.powf(-0.5) * (-1.0 / t).exp()
                    + 0.3 * t.powf(-0.5) * (-1.8 / t).exp()
            },
            log_grid(1e-3, 2.0, 200),
        );
        let sw = fit_algebraic(&tr, 4, Some([1e-3, 0.03])).unwrap();
        let p = peel_spectrum(&tr, &sw, 2).unwrap();
        assert_eq!(p.exponents.len(), 2, "{:?}", p);
        assert!((p.exponents[0].delta_sq - 1.0).abs() < 1e-3);
        assert!(
            (p.exponents[1].delta_sq - 1.8).abs() < 1e-3,
            "{:?}",
            p.exponents
        );
    }

    #[test]
    fn pure_algebraic_has_no_exponents() {
        let tr = synthetic(
            2,
            |t| 1.0 / t - 0.5 / t.sqrt() + 0.2,
            log_grid(1e-3, 1.0, 80),
        );
        let sw = fit_algebraic(&tr, 4, None).unwrap();
        assert!(matches!(
            peel_spectrum(&tr, &sw, 3),
            Err(Error::SignalTooSmall { .. })
        ));
        let rep = recover(&tr, None, &RecoveryOptions::default()).unwrap();
        assert!(rep.exponents.is_empty() && rep.matches.is_empty() && rep.unexplained.is_empty());
    }

    fn spectrum(deltas: &[f64]) -> LengthSpectrum {
        LengthSpectrum {
            entries: deltas
                .iter()
                .map(|d| LengthEntry {
                    delta: *d,
                    orbit_length: 2.0 * d,
                    reflections: 2,
                    multiple: 1,
                    kind: OrbitKind::DoubleNormal,
                    multiplicity: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn greedy_matching() {
        let (m, u) = match_spectrum(&[1.0], &spectrum(&[1.0]), 0.02);
        assert_eq!((m.len(), u.len()), (1, 0));
        let (m, u) = match_spectrum(&[1.0, 2.26], &spectrum(&[1.0, 1.5, 2.0, 2.25]), 0.02);
        assert!(u.is_empty());
        assert_eq!(m[0].predicted.delta, 1.0);
        assert_eq!(m[1].predicted.delta, 1.5);
        let (m, u) = match_spectrum(&[1.0, 4.0], &spectrum(&[]), 0.02);
        assert!(m.is_empty());
        assert_eq!(u, vec![0, 1]);
    }
}
