//! Sampled traces and their CSV form.

use crate::error::{Error, Result};
use crate::spectra::BoundaryCondition;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Series,
    Images,
    Montecarlo,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Series => "series",
            Backend::Images => "images",
            Backend::Montecarlo => "montecarlo",
        }
    }
}

pub const CSV_HEADER: &str = "t,P,abs_error";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSamples {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub abs_error: Vec<f64>,
    pub backend: Backend,
    pub bc: BoundaryCondition,
    pub domain_digest: String,
    /// 1 for interval unions, 2 for planar domains.
    pub dimension: usize,
}

impl TraceSamples {
    pub fn new(
        t_grid: Vec<f64>,
        values: Vec<f64>,
        abs_error: Vec<f64>,
        backend: Backend,
        bc: BoundaryCondition,
        domain_digest: String,
        dimension: usize,
    ) -> Result<Self> {
        if t_grid.len() != values.len() || t_grid.len() != abs_error.len() {
            return Err(Error::Argument(
                "trace columns have different lengths".into(),
            ));
        }
        if t_grid.is_empty() {
            return Err(Error::Argument("trace is empty".into()));
        }
        if !(dimension == 1 || dimension == 2) {
            return Err(Error::Argument(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        if t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument(
                "t grid must be positive and strictly increasing".into(),
            ));
        }
        let strict = backend != Backend::Montecarlo;
        for (&v, &e) in values.iter().zip(&abs_error) {
            if !v.is_finite() || v < 0.0 || (strict && v == 0.0) {
                return Err(Error::Argument(format!("trace value {v} is not positive")));
            }
            if !(e >= 0.0) || !e.is_finite() {
                return Err(Error::Argument(format!(
                    "abs_error {e} is not a finite non-negative number"
                )));
            }
        }
        Ok(Self {
            t_grid,
            values,
            abs_error,
            backend,
            bc,
            domain_digest,
            dimension,
        })
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    /// CSV with header `t,P,abs_error`; 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * self.len());
        s.push_str(CSV_HEADER);
        s.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e}",
                self.t_grid[i], self.values[i], self.abs_error[i]
            );
        }
        s
    }

    /// Parse the CSV form. Provenance fields are supplied by the caller.
    pub fn from_csv(
        text: &str,
        backend: Backend,
        bc: BoundaryCondition,
        domain_digest: String,
        dimension: usize,
    ) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            Some(h) => {
                return Err(Error::Argument(format!(
                    "bad CSV header '{h}', expected '{CSV_HEADER}'"
                )))
            }
            None => return Err(Error::Argument("empty CSV".into())),
        }
        let (mut t, mut p, mut e) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Argument(format!(
                    "CSV row {} has {} columns",
                    i + 2,
                    cols.len()
                )));
            }
            let parse = |c: &str| {
                c.parse::<f64>()
                    .map_err(|_| Error::Argument(format!("CSV row {}: cannot parse '{c}'", i + 2)))
            };
            t.push(parse(cols[0])?);
            p.push(parse(cols[1])?);
            e.push(parse(cols[2])?);
        }
        Self::new(t, p, e, backend, bc, domain_digest, dimension)
    }
}

/// `n` log-spaced points from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t_min];
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                t_max
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn linear_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t_min];
    }
    (0..n)
        .map(|i| t_min + (t_max - t_min) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TraceSamples {
        TraceSamples::new(
            vec![0.1, 0.2],
            vec![1.0 / 3.0, 0.25],
            vec![1e-13, 0.0],
            Backend::Series,
            BoundaryCondition::Dirichlet,
            "x".into(),
            2,
        )
        .unwrap()
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let s = sample();
        let csv = s.to_csv();
        assert!(csv.starts_with("t,P,abs_error\n"));
        let back = TraceSamples::from_csv(
            &csv,
            Backend::Series,
            BoundaryCondition::Dirichlet,
            "x".into(),
            2,
        )
        .unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn csv_rejects_garbage() {
        let r = TraceSamples::from_csv(
            "t,P\n1,2\n",
            Backend::Series,
            BoundaryCondition::Dirichlet,
            "x".into(),
            2,
        );
        assert!(r.is_err());
        let r = TraceSamples::from_csv(
            "t,P,abs_error\n1,abc,0\n",
            Backend::Series,
            BoundaryCondition::Dirichlet,
            "x".into(),
            2,
        );
        assert!(r.is_err());
    }

    #[test]
    fn invariants_checked() {
        let bad = TraceSamples::new(
            vec![0.2, 0.1],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            Backend::Series,
            BoundaryCondition::Dirichlet,
            "x".into(),
            2,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn grids() {
        let g = log_grid(1e-3, 1.0, 4);
        assert_eq!(g.len(), 4);
        assert!((g[1] - 1e-2).abs() < 1e-15);
        assert_eq!(g[3], 1.0);
        let l = linear_grid(0.0, 1.0, 3);
        assert_eq!(l, vec![0.0, 0.5, 1.0]);
    }
}
