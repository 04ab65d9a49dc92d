use super::{BoundaryPoint, Domain, Point};
use crate::error::{Error, Result};
use crate::numerics::golden_min;

/// Inward normal chord from a boundary point.
#[derive(Debug, Clone, Copy)]
pub struct ChordHit {
    pub start: BoundaryPoint,
    pub end: Point,
    pub end_s: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub s: f64,
    pub l: f64,
    pub kind: ExtremumKind,
    /// The chord also meets the boundary orthogonally at its far end.
    /// Stationary points with `1 − l κ = 0` (far end at the centre of
    /// curvature) are extrema of `l` without being double normals.
    pub double_normal: bool,
}

/// Sampled normal-chord length `l(s)` over one period.
#[derive(Debug, Clone)]
pub struct ChordFunction {
    pub samples: Vec<(f64, f64)>,
    pub domain_perimeter: f64,
    pub extrema: Vec<Extremum>,
}

impl ChordFunction {
    pub fn min(&self) -> f64 {
        self.samples
            .iter()
            .map(|v| v.1)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .map(|v| v.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when `l` is constant within `1e-10` relative across all samples.
    pub fn is_constant(&self) -> bool {
        self.max() - self.min() <= 1e-10 * self.max()
    }
}

/// Sine of the angle between the chord and the far-end normal is below 1e-6.
fn far_end_orthogonal(domain: &Domain, s: f64) -> Result<bool> {
    let hit = domain.normal_chord_hit(s)?;
    let (_, comp, sl, _) = domain.nearest_boundary(&hit.end);
    let far = domain.boundary_point_unchecked(comp, sl);
    let d = -hit.start.outward_normal;
    let sin = d.x * far.outward_normal.y - d.y * far.outward_normal.x;
    Ok(sin.abs() < 1e-6)
}

pub(super) fn chord_function(domain: &Domain, n_samples: usize) -> Result<ChordFunction> {
    if domain.dimension() != 2 {
        return Err(Error::UnsupportedDimension { expected: "2-D" });
    }
    if n_samples < 16 {
        return Err(Error::Argument(format!(
            "n_samples must be at least 16, got {n_samples}"
        )));
    }
    let perim = domain.perimeter();
    let corners = domain.corners();
    let h = perim / n_samples as f64;
    let mut samples = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let mut s = k as f64 * h;
        if corners.iter().any(|c| (s - c).abs() < 1e-6 * h) {
            s += 1e-3 * h;
        }
        samples.push((s, domain.normal_chord(s)?));
    }
    let mut out = ChordFunction {
        samples,
        domain_perimeter: perim,
        extrema: Vec::new(),
    };
    if out.is_constant() {
        return Ok(out);
    }
    let n = out.samples.len();
    let mut found = Vec::new();
    for (c, comp) in domain.components().iter().enumerate() {
        if !comp.is_smooth() {
            continue;
        }
        let lo = domain.component_offset(c);
        let hi = lo + comp.length();
        let idx: Vec<usize> = (0..n)
            .filter(|&i| out.samples[i].0 >= lo && out.samples[i].0 < hi)
            .collect();
        let m = idx.len();
        if m < 3 {
            continue;
        }
        for j in 0..m {
            let l0 = out.samples[idx[(j + m - 1) % m]].1;
            let l1 = out.samples[idx[j]].1;
            let l2 = out.samples[idx[(j + 1) % m]].1;
            let kind = if l1 > l0 && l1 >= l2 {
                ExtremumKind::Max
            } else if l1 < l0 && l1 <= l2 {
                ExtremumKind::Min
            } else {
                continue;
            };
            let s1 = out.samples[idx[j]].0;
            let sign = if kind == ExtremumKind::Max { -1.0 } else { 1.0 };
            let f = |s: f64| {
                let sw = lo + (s - lo).rem_euclid(hi - lo);
                domain
                    .normal_chord(sw)
                    .map(|l| sign * l)
                    .unwrap_or(f64::INFINITY)
            };
            let (s, v) = golden_min(f, s1 - h, s1 + h, 1e-10 * perim);
            let s = lo + (s - lo).rem_euclid(hi - lo);
            found.push(Extremum {
                s,
                l: sign * v,
                kind,
                double_normal: far_end_orthogonal(domain, s)?,
            });
        }
    }
    for e in &found {
        out.samples.push((e.s, e.l));
    }
    out.samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out.samples
        .dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14 * perim);
    found.sort_by(|a, b| a.s.partial_cmp(&b.s).unwrap());
    out.extrema = found;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_chord_constant() {
        let d = Domain::disk(1.0).unwrap();
        let cf = d.chord_function(64).unwrap();
        assert!(cf.is_constant());
        assert!(cf.samples.iter().all(|v| (v.1 - 2.0).abs() < 1e-12));
        assert!(cf.extrema.is_empty());
    }

    #[test]
    fn round_ellipse_is_constant() {
        let d = Domain::ellipse(1.0, 1.0).unwrap();
        let cf = d.chord_function(128).unwrap();
        assert!(cf.is_constant());
    }

    #[test]
    fn ellipse_extrema() {
        let d = Domain::ellipse(2.0, 1.0).unwrap();
        let cf = d.chord_function(512).unwrap();
        assert!((cf.max() - 4.0).abs() < 1e-10);
        let normals: Vec<f64> = cf
            .extrema
            .iter()
            .filter(|e| e.double_normal)
            .map(|e| e.l)
            .collect();
        assert_eq!(normals.len(), 4);
        assert_eq!(
            normals.iter().filter(|l| (*l - 4.0).abs() < 1e-10).count(),
            2
        );
        assert_eq!(
            normals.iter().filter(|l| (*l - 2.0).abs() < 1e-10).count(),
            2
        );
        // Remaining extrema: far end at the centre of curvature, l κ = 1.
        for e in cf.extrema.iter().filter(|e| !e.double_normal) {
            assert_eq!(e.kind, ExtremumKind::Min);
            let k = d.boundary_point(e.s).unwrap().curvature;
            assert!((e.l * k - 1.0).abs() < 1e-6, "{}", e.l * k);
        }
        assert!(cf.min() < 2.0);
    }

    #[test]
    fn too_few_samples() {
        let d = Domain::disk(1.0).unwrap();
        assert!(d.chord_function(8).is_err());
    }
}
