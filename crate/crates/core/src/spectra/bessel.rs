//! Bessel functions of the first kind and their zeros.

use crate::error::{Error, Result};
use crate::numerics::brent_root;
use std::f64::consts::PI;

pub const MAX_ORDER: usize = 200;
pub const MAX_INDEX: usize = 10_000;

fn use_series(n: usize, x: f64) -> bool {
    0.25 * x * x <= n as f64 + 1.0
}

/// Ascending power series of `J_n(x)`.
fn series(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    let q = -h * h;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    sum
}

fn start_order(nmax: usize, x: f64) -> usize {
    let base = (nmax as f64).max(x);
    (base + 30.0 + 10.0 * x.cbrt()).ceil() as usize
}

/// `J_0(x), …, J_nmax(x)` for `x > 0` by Miller's backward recurrence,
/// normalized with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return v;
    }
    let ax = x.abs();
    let m = start_order(nmax, ax);
    let mut out = vec![0.0; nmax + 1];
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        if k <= nmax {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if use_series(n, x.abs()) {
        let v = series(n, x.abs());
        return if x < 0.0 && n % 2 == 1 { -v } else { v };
    }
    bessel_j_all(n, x)[n]
}

/// `(J_n(x), J_n'(x), J_n''(x))`.
pub fn bessel_j_jet(n: usize, x: f64) -> (f64, f64, f64) {
    let v = if use_series(n + 1, x) {
        (0..=n + 1).map(|k| series(k, x)).collect::<Vec<_>>()
    } else {
        bessel_j_all(n + 1, x)
    };
    let jn = v[n];
    let d1 = if n == 0 {
        -v[1]
    } else {
        v[n - 1] - n as f64 / x * jn
    };
    let nf = n as f64;
    let d2 = -d1 / x - (1.0 - nf * nf / (x * x)) * jn;
    (jn, d1, d2)
}

/// McMahon asymptotic for the `k`-th zero of `J_n` or `J_n'`.
pub fn mcmahon(n: usize, k: usize, derivative: bool) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    let b = if derivative {
        (k as f64 + 0.5 * n as f64 - 0.75) * PI
    } else {
        (k as f64 + 0.5 * n as f64 - 0.25) * PI
    };
    let b8 = 8.0 * b;
    if derivative {
        b - (mu + 3.0) / b8 - 4.0 * (7.0 * mu * mu + 82.0 * mu - 9.0) / (3.0 * b8.powi(3))
    } else {
        b - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
    }
}

fn target(n: usize, derivative: bool, x: f64) -> (f64, f64) {
    let (j, d1, d2) = bessel_j_jet(n, x);
    if derivative {
        (d1, d2)
    } else {
        (j, d1)
    }
}

/// Safeguarded Newton polish inside `[lo, hi]`.
fn polish(n: usize, derivative: bool, mut x: f64, lo: f64, hi: f64) -> Result<f64> {
    for _ in 0..50 {
        let (f, df) = target(n, derivative, x);
        if f == 0.0 {
            return Ok(x);
        }
        let step = f / df;
        let mut nx = x - step;
        if !(nx > lo && nx < hi) || !nx.is_finite() {
            nx = 0.5 * (lo.max(x - 0.5) + hi.min(x + 0.5));
        }
        if (nx - x).abs() <= 4.0 * f64::EPSILON * x {
            return Ok(nx);
        }
        x = nx;
    }
    Err(Error::Numeric(format!(
        "Newton iteration for a zero of J_{n}{} did not converge near x = {x}",
        if derivative { "'" } else { "" }
    )))
}

/// Refine a bracketed zero to full precision.
pub fn refine_zero(n: usize, derivative: bool, lo: f64, hi: f64) -> Result<f64> {
    let f = |x: f64| target(n, derivative, x).0;
    let x0 = brent_root(f, lo, hi, 1e-10 * hi)
        .ok_or_else(|| Error::Numeric(format!("no sign change of J_{n} on [{lo}, {hi}]")))?;
    polish(n, derivative, x0, lo, hi)
}

/// `k`-th positive zero of `J_n` (or of `J_n'` when `derivative`).
pub fn bessel_j_zero(n: usize, k: usize, derivative: bool) -> Result<f64> {
    if n > MAX_ORDER || k == 0 || k > MAX_INDEX {
        return Err(Error::Argument(format!(
            "bessel zero needs order <= {MAX_ORDER} and 1 <= index <= {MAX_INDEX}, got ({n}, {k})"
        )));
    }
    if derivative && n == 0 {
        return bessel_j_zero(1, k, false);
    }
    if k >= 2 * n + 10 {
        let seed = mcmahon(n, k, derivative);
        let w = 0.4;
        return refine_zero(n, derivative, seed - w, seed + w);
    }
    let f = |x: f64| target(n, derivative, x).0;
    let h = 0.25;
    let mut lo = (n as f64).max(0.25);
    let mut flo = f(lo);
    let mut count = 0;
    loop {
        let hi = lo + h;
        let fhi = f(hi);
        if flo == 0.0 || flo.signum() != fhi.signum() {
            count += 1;
            if count == k {
                return refine_zero(n, derivative, lo, hi);
            }
        }
        lo = hi;
        flo = fhi;
    }
}
