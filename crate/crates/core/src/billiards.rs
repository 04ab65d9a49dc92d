//! Billiard orbits: double normals, N-bounce periodic orbits and the
//! predicted length spectrum.

use crate::error::{Error, Result};
use crate::geometry::{ChordFunction, Component, Domain, Point, Shape};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MAX_REFLECTIONS: usize = 12;
const MERGE_TOL: f64 = 1e-6;
const LAW_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitKind {
    DoubleNormal,
    NBounce,
    DegenerateFamily,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    /// Global arclengths of the bounce points.
    pub bounce_params: Vec<f64>,
    pub points: Vec<Point>,
    /// Total path length.
    pub length: f64,
    pub kind: OrbitKind,
    pub reflections: usize,
    /// Start and end of an open retraced ray (odd retraces of a double
    /// normal start at the chord midpoint); `None` for closed orbits.
    pub base_point: Option<Point>,
}

impl PeriodicOrbit {
    /// Path vertices in travel order, including the base point if any.
    fn path(&self) -> Vec<Point> {
        match self.base_point {
            Some(b) => {
                let mut v = vec![b];
                v.extend(self.points.iter().copied());
                v.push(b);
                v
            }
            None => self.points.clone(),
        }
    }

    /// Largest violation of the reflection law over all bounces.
    pub fn reflection_residual(&self, domain: &Domain) -> f64 {
        let path = self.path();
        let n = path.len();
        let closed = self.base_point.is_none();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let is_bounce = if closed { true } else { i > 0 && i < n - 1 };
            if !is_bounce {
                continue;
            }
            let prev = path[(i + n - 1) % n];
            let next = path[(i + 1) % n];
            let e_in = (path[i] - prev).normalize();
            let e_out = (next - path[i]).normalize();
            let nrm = match normal_at(domain, &path[i]) {
                Some(v) => v,
                None => return f64::INFINITY,
            };
            let reflected = e_in - nrm * (2.0 * e_in.dot(&nrm));
            worst = worst.max((e_out - reflected).norm());
        }
        worst
    }

    /// Largest tangential derivative of the length at a bounce.
    pub fn gradient_residual(&self, domain: &Domain) -> f64 {
        let path = self.path();
        let n = path.len();
        let closed = self.base_point.is_none();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            if !closed && (i == 0 || i == n - 1) {
                continue;
            }
            let e_in = (path[i] - path[(i + n - 1) % n]).normalize();
            let e_out = (path[(i + 1) % n] - path[i]).normalize();
            let Some(nrm) = normal_at(domain, &path[i]) else {
                return f64::INFINITY;
            };
            let tng = Point::new(-nrm.y, nrm.x);
            worst = worst.max((tng.dot(&e_in) - tng.dot(&e_out)).abs());
        }
        worst
    }

    pub fn delta(&self) -> f64 {
        0.5 * self.length
    }
}

fn normal_at(domain: &Domain, p: &Point) -> Option<Point> {
    let (_, comp, sl, _) = domain.nearest_boundary(p);
    Some(domain.boundary_point_unchecked(comp, sl).outward_normal)
}

/// Multi-start settings for the orbit finder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitSearch {
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for OrbitSearch {
    fn default() -> Self {
        Self {
            n_starts: 64,
            seed: 17,
        }
    }
}

fn smooth_required(domain: &Domain) -> Result<()> {
    if domain.dimension() != 2 {
        return Err(Error::UnsupportedDimension { expected: "2-D" });
    }
    if !domain.is_smooth() {
        return Err(Error::Geometry(format!(
            "{} boundary has corners; only parallel-edge orbits are supported",
            domain.kind()
        )));
    }
    Ok(())
}

fn rotationally_symmetric(domain: &Domain) -> bool {
    matches!(domain.shape(), Shape::Disk { .. } | Shape::Annulus { .. })
        || matches!(domain.shape(), Shape::Ellipse { a, b } if a == b)
}

/// Orbits with `n` bounces come in continuous families of equal length.
fn family_collapse(domain: &Domain, n: usize) -> bool {
    rotationally_symmetric(domain) || (matches!(domain.shape(), Shape::Ellipse { .. }) && n >= 3)
}

/// Critical-point problem of the cyclic length functional in native parameters.
struct Functional<'a> {
    domain: &'a Domain,
    comps: Vec<usize>,
}

impl Functional<'_> {
    fn comp(&self, i: usize) -> &Component {
        &self.domain.components()[self.comps[i]]
    }

    fn gradient_hessian(&self, u: &[f64]) -> (DVector<f64>, DMatrix<f64>, f64) {
        let n = u.len();
        let jets: Vec<_> = (0..n).map(|i| self.comp(i).jet(u[i])).collect();
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        let mut length = 0.0;
        let segs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        for &(i, j) in &segs {
            let w = jets[j].p - jets[i].p;
            let d = w.norm();
            length += d;
            if d == 0.0 {
                continue;
            }
            let e = w / d;
            let proj = |a: &Point, b: &Point| (a.dot(b) - a.dot(&e) * b.dot(&e)) / d;
            g[i] -= jets[i].d1.dot(&e);
            g[j] += jets[j].d1.dot(&e);
            h[(i, i)] += -jets[i].d2.dot(&e) + proj(&jets[i].d1, &jets[i].d1);
            h[(j, j)] += jets[j].d2.dot(&e) + proj(&jets[j].d1, &jets[j].d1);
            let c = -proj(&jets[i].d1, &jets[j].d1);
            h[(i, j)] += c;
            h[(j, i)] += c;
        }
        (g, h, length)
    }

    /// Tangential gradient in arclength units.
    fn scaled_gradient(&self, u: &[f64], g: &DVector<f64>) -> f64 {
        (0..u.len())
            .map(|i| (g[i] / self.comp(i).jet(u[i]).d1.norm()).abs())
            .fold(0.0, f64::max)
    }

    /// Levenberg–Marquardt on `∇L = 0`.
    fn solve(&self, mut u: Vec<f64>) -> Option<Vec<f64>> {
        let n = u.len();
        let (mut g, mut h, _) = self.gradient_hessian(&u);
        let mut gnorm = g.norm();
        let mut mu = 1e-6 * (h.norm() + 1.0);
        for _ in 0..300 {
            if self.scaled_gradient(&u, &g) < 1e-13 {
                return Some(u);
            }
            let a = h.transpose() * &h + DMatrix::identity(n, n) * mu;
            let rhs = -(h.transpose() * &g);
            let Some(step) = a.cholesky().map(|c| c.solve(&rhs)) else {
                mu *= 10.0;
                continue;
            };
            let cand: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let (g2, h2, _) = self.gradient_hessian(&cand);
            let n2 = g2.norm();
            if n2 < gnorm {
                u = cand;
                g = g2;
                h = h2;
                gnorm = n2;
                mu = (mu / 5.0).max(1e-300);
            } else {
                mu *= 4.0;
                if mu > 1e20 {
                    break;
                }
            }
        }
        if self.scaled_gradient(&u, &g) < 1e-10 {
            Some(u)
        } else {
            None
        }
    }
}

fn build_orbit(domain: &Domain, comps: &[usize], u: &[f64], kind: OrbitKind) -> PeriodicOrbit {
    let n = u.len();
    let mut params = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let c = &domain.components()[comps[i]];
        let sl = c.s_of_param(u[i]).rem_euclid(c.length());
        params.push(domain.component_offset(comps[i]) + sl);
        points.push(c.jet(u[i]).p);
    }
    let length = (0..n)
        .map(|i| (points[(i + 1) % n] - points[i]).norm())
        .sum();
    PeriodicOrbit {
        bounce_params: params,
        points,
        length,
        kind,
        reflections: n,
        base_point: None,
    }
}

/// Geometric admissibility: distinct consecutive points, each segment runs
/// inside Ω and first meets ∂Ω at its endpoint, reflection law holds.
fn admissible(domain: &Domain, orbit: &PeriodicOrbit) -> bool {
    let path = orbit.path();
    let n = path.len();
    let scale = domain.diameter_bound();
    let segs = if orbit.base_point.is_some() { n - 1 } else { n };
    for i in 0..segs {
        let a = path[i];
        let b = path[(i + 1) % n];
        let d = (b - a).norm();
        if d < MERGE_TOL * domain.perimeter() {
            return false;
        }
        let e = (b - a) / d;
        if !domain.contains(&(a + e * (0.5 * d))) {
            return false;
        }
        let start_on_boundary = orbit.base_point.is_none() || i > 0;
        let t_min = if start_on_boundary { 1e-9 * scale } else { 0.0 };
        let ends_inside = orbit.base_point.is_some() && i == segs - 1;
        match domain.ray_exit(&a, &e, t_min) {
            Ok(t) if (t - d).abs() <= 1e-7 * scale => {}
            Ok(t) if ends_inside && t > d => {}
            _ => return false,
        }
    }
    orbit.reflection_residual(domain) < LAW_TOL && orbit.gradient_residual(domain) < LAW_TOL
}

fn cyclic_arc(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs() % period;
    d.min(period - d)
}

fn same_orbit(a: &PeriodicOrbit, b: &PeriodicOrbit, perim: f64) -> bool {
    if a.reflections != b.reflections
        || a.base_point.is_some() != b.base_point.is_some()
        || (a.length - b.length).abs() > MERGE_TOL * perim
    {
        return false;
    }
    let n = a.bounce_params.len();
    let tol = MERGE_TOL * perim;
    let pa = &a.bounce_params;
    let pb = &b.bounce_params;
    for shift in 0..n {
        for rev in [false, true] {
            let ok = (0..n).all(|i| {
                let j = if rev {
                    (shift + n - i) % n
                } else {
                    (shift + i) % n
                };
                cyclic_arc(pa[i], pb[j], perim) <= tol
            });
            if ok {
                return true;
            }
        }
    }
    false
}

fn merge(domain: &Domain, mut orbits: Vec<PeriodicOrbit>) -> Vec<PeriodicOrbit> {
    orbits.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap()
            .then_with(|| a.bounce_params.partial_cmp(&b.bounce_params).unwrap())
    });
    let perim = domain.perimeter();
    let mut out: Vec<PeriodicOrbit> = Vec::new();
    for o in orbits {
        let family = family_collapse(domain, o.reflections) && o.base_point.is_none();
        let dup = out.iter().any(|k| {
            if family {
                k.reflections == o.reflections
                    && k.base_point.is_some() == o.base_point.is_some()
                    && (k.length - o.length).abs() <= 1e-9 * perim
            } else {
                same_orbit(k, &o, perim)
            }
        });
        if !dup {
            let mut o = o;
            if family && (o.kind == OrbitKind::NBounce || rotationally_symmetric(domain)) {
                o.kind = OrbitKind::DegenerateFamily;
            }
            out.push(o);
        }
    }
    out
}

/// Two-bounce orbits: extrema of the normal chord, or parallel edge pairs.
pub fn double_normal_orbits(domain: &Domain, chord: &ChordFunction) -> Result<Vec<PeriodicOrbit>> {
    if domain.dimension() != 2 {
        return Err(Error::UnsupportedDimension { expected: "2-D" });
    }
    if !domain.is_smooth() {
        return Ok(parallel_edge_orbits(domain));
    }
    if chord.is_constant() {
        let hit = domain.normal_chord_hit(0.0)?;
        let l = hit.length;
        return Ok(vec![PeriodicOrbit {
            bounce_params: vec![0.0, hit.end_s],
            points: vec![hit.start.position, hit.end],
            length: 2.0 * l,
            kind: OrbitKind::DegenerateFamily,
            reflections: 2,
            base_point: None,
        }]);
    }
    let mut found = Vec::new();
    for e in chord.extrema.iter().filter(|e| e.double_normal) {
        let hit = domain.normal_chord_hit(e.s)?;
        let (_, c0, s0) = locate(domain, hit.start.s);
        let (_, c1, s1) = locate(domain, hit.end_s);
        let comps = vec![c0, c1];
        let f = Functional {
            domain,
            comps: comps.clone(),
        };
        let u0 = vec![
            domain.components()[c0].param_of_s(s0),
            domain.components()[c1].param_of_s(s1),
        ];
        if let Some(u) = f.solve(u0) {
            let o = build_orbit(domain, &comps, &u, OrbitKind::DoubleNormal);
            if admissible(domain, &o) {
                found.push(o);
            }
        }
    }
    Ok(merge(domain, found))
}

fn locate(domain: &Domain, s: f64) -> (f64, usize, f64) {
    let s = s.rem_euclid(domain.perimeter());
    let mut c = domain.components().len() - 1;
    while c > 0 && domain.component_offset(c) > s {
        c -= 1;
    }
    (s, c, s - domain.component_offset(c))
}

fn parallel_edge_orbits(domain: &Domain) -> Vec<PeriodicOrbit> {
    let Some(Component::Polyline {
        vertices,
        cumulative,
    }) = domain.components().first()
    else {
        return Vec::new();
    };
    let n = vertices.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a0, a1) = (vertices[i], vertices[(i + 1) % n]);
            let (b0, b1) = (vertices[j], vertices[(j + 1) % n]);
            let ea = (a1 - a0).normalize();
            let eb = (b1 - b0).normalize();
            if ea.dot(&eb) > -1.0 + 1e-12 {
                continue;
            }
            // Overlap of the two edges projected on edge i.
            let pa: (f64, f64) = (0.0, (a1 - a0).dot(&ea));
            let (q0, q1) = ((b0 - a0).dot(&ea), (b1 - a0).dot(&ea));
            let lo = pa.0.max(q0.min(q1));
            let hi = pa.1.min(q0.max(q1));
            if hi - lo <= 1e-12 {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let p = a0 + ea * mid;
            let inward = Point::new(-ea.y, ea.x);
            let width = (b0 - a0).dot(&inward);
            if width <= 0.0 {
                continue;
            }
            let q = p + inward * width;
            let t_min = 1e-9 * domain.diameter_bound();
            match domain.ray_exit(&p, &inward, t_min) {
                Ok(t) if (t - width).abs() <= 1e-9 * domain.diameter_bound() => {}
                _ => continue,
            }
            let sb = cumulative[j] + (q - b0).norm();
            out.push(PeriodicOrbit {
                bounce_params: vec![cumulative[i] + mid, sb],
                points: vec![p, q],
                length: 2.0 * width,
                kind: OrbitKind::DegenerateFamily,
                reflections: 2,
                base_point: None,
            });
        }
    }
    out.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
    out
}

/// Retrace a double normal `N` times: closed `A,B,A,B,…` for even `N`, an open
/// ray from the chord midpoint for odd `N`. Length `N·l` either way.
pub fn retrace(orbit: &PeriodicOrbit, n: usize) -> PeriodicOrbit {
    let (a, b) = (orbit.points[0], orbit.points[1]);
    let (sa, sb) = (orbit.bounce_params[0], orbit.bounce_params[1]);
    let l = (b - a).norm();
    let points: Vec<Point> = (0..n).map(|i| if i % 2 == 0 { a } else { b }).collect();
    let params: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { sa } else { sb }).collect();
    PeriodicOrbit {
        bounce_params: params,
        points,
        length: n as f64 * l,
        kind: orbit.kind,
        reflections: n,
        base_point: if n % 2 == 1 {
            Some(0.5 * (a + b))
        } else {
            None
        },
    }
}

fn mirror_params(domain: &Domain, u: &[f64]) -> Vec<Vec<f64>> {
    match domain.shape() {
        Shape::Ellipse { .. } => vec![
            u.iter().map(|t| PI - t).collect(),
            u.iter().map(|t| -t).collect(),
            u.iter().map(|t| t + PI).collect(),
        ],
        _ => Vec::new(),
    }
}

/// Critical points of the cyclic length functional with `N` bounces.
pub fn n_bounce_orbits(
    domain: &Domain,
    n: usize,
    search: &OrbitSearch,
) -> Result<Vec<PeriodicOrbit>> {
    smooth_required(domain)?;
    if !(2..=MAX_REFLECTIONS).contains(&n) {
        return Err(Error::Argument(format!(
            "reflections must be in [2, {MAX_REFLECTIONS}], got {n}"
        )));
    }
    let ncomp = domain.components().len();
    let mut starts: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    for c in 0..ncomp {
        let period = domain.components()[c].param_period();
        for q in 1..=n / 2 {
            for u0 in [0.0, 0.25 * period, 0.1 * period, 0.37 * period] {
                let u: Vec<f64> = (0..n)
                    .map(|i| u0 + period * (q * i) as f64 / n as f64)
                    .collect();
                starts.push((vec![c; n], u));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    for _ in 0..search.n_starts {
        let comps: Vec<usize> = (0..n).map(|_| rng.random_range(0..ncomp)).collect();
        let u: Vec<f64> = comps
            .iter()
            .map(|&c| rng.random::<f64>() * domain.components()[c].param_period())
            .collect();
        starts.push((comps, u));
    }
    let kind = if n == 2 {
        OrbitKind::DoubleNormal
    } else {
        OrbitKind::NBounce
    };
    let mut found: Vec<PeriodicOrbit> = starts
        .par_iter()
        .flat_map_iter(|(comps, u)| {
            let f = Functional {
                domain,
                comps: comps.clone(),
            };
            let mut local = Vec::new();
            if let Some(sol) = f.solve(u.clone()) {
                let o = build_orbit(domain, comps, &sol, kind);
                if admissible(domain, &o) {
                    local.push(o);
                }
                for m in mirror_params(domain, &sol) {
                    if let Some(sol2) = f.solve(m) {
                        let o = build_orbit(domain, comps, &sol2, kind);
                        if admissible(domain, &o) {
                            local.push(o);
                        }
                    }
                }
            }
            local
        })
        .collect();
    let chord = domain.chord_function(256)?;
    for dn in double_normal_orbits(domain, &chord)? {
        let r = retrace(&dn, n);
        if admissible(domain, &r) {
            found.push(r);
        }
    }
    Ok(merge(domain, found))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthEntry {
    pub delta: f64,
    pub orbit_length: f64,
    pub reflections: usize,
    pub multiple: usize,
    pub kind: OrbitKind,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrum {
    pub entries: Vec<LengthEntry>,
}

impl LengthSpectrum {
    pub fn deltas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.delta).collect()
    }
}

fn assemble(mut raw: Vec<LengthEntry>) -> LengthSpectrum {
    raw.sort_by(|a, b| {
        a.delta
            .partial_cmp(&b.delta)
            .unwrap()
            .then(a.multiple.cmp(&b.multiple))
            .then(a.reflections.cmp(&b.reflections))
    });
    let mut out: Vec<LengthEntry> = Vec::new();
    for e in raw {
        match out.last_mut() {
            Some(last) if (e.delta - last.delta).abs() <= 1e-9 * last.delta.max(1.0) => {
                last.multiplicity += e.multiplicity;
            }
            _ => out.push(e),
        }
    }
    LengthSpectrum { entries: out }
}

fn push_with_multiples(
    raw: &mut Vec<LengthEntry>,
    o: &PeriodicOrbit,
    delta_max: f64,
    closed: bool,
) {
    let d = o.delta();
    let kmax = if closed {
        (delta_max / d + 1e-12).floor() as usize
    } else {
        1
    };
    for k in 1..=kmax.max(1) {
        if k as f64 * d > delta_max * (1.0 + 1e-12) {
            break;
        }
        raw.push(LengthEntry {
            delta: k as f64 * d,
            orbit_length: k as f64 * o.length,
            reflections: k * o.reflections,
            multiple: k,
            kind: o.kind,
            multiplicity: 1,
        });
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Half-lengths of periodic orbits and their repetitions up to `delta_max`.
pub fn predict_length_spectrum(
    domain: &Domain,
    delta_max: f64,
    n_max_reflections: usize,
    search: &OrbitSearch,
) -> Result<LengthSpectrum> {
    if !(delta_max > 0.0) {
        return Err(Error::Argument(format!(
            "delta_max must be positive, got {delta_max}"
        )));
    }
    let mut raw = Vec::new();
    match domain.shape() {
        Shape::IntervalSet { lengths } => {
            for &l in lengths {
                let mut k = 1;
                while k as f64 * l <= delta_max * (1.0 + 1e-12) {
                    raw.push(LengthEntry {
                        delta: k as f64 * l,
                        orbit_length: 2.0 * k as f64 * l,
                        reflections: 2 * k,
                        multiple: k,
                        kind: OrbitKind::DoubleNormal,
                        multiplicity: 1,
                    });
                    k += 1;
                }
            }
        }
        Shape::Rectangle { a, b } => {
            let mmax = (delta_max / a).floor() as usize;
            let nmax = (delta_max / b).floor() as usize;
            for m in 0..=mmax {
                for n in 0..=nmax {
                    if m == 0 && n == 0 {
                        continue;
                    }
                    let delta = ((m as f64 * a).powi(2) + (n as f64 * b).powi(2)).sqrt();
                    if delta > delta_max * (1.0 + 1e-12) {
                        continue;
                    }
                    let g = gcd(m, n);
                    raw.push(LengthEntry {
                        delta,
                        orbit_length: 2.0 * delta,
                        reflections: 2 * (m + n),
                        multiple: g,
                        kind: OrbitKind::DegenerateFamily,
                        multiplicity: 1,
                    });
                }
            }
        }
        Shape::Polygon { .. } => {
            let chord = domain.chord_function(64.max(4 * domain.corners().len()))?;
            for o in double_normal_orbits(domain, &chord)? {
                push_with_multiples(&mut raw, &o, delta_max, true);
            }
        }
        _ => {
            let chord = domain.chord_function(512)?;
            for o in double_normal_orbits(domain, &chord)? {
                push_with_multiples(&mut raw, &o, delta_max, true);
            }
            for n in 3..=n_max_reflections.min(MAX_REFLECTIONS) {
                for o in n_bounce_orbits(domain, n, search)? {
                    if o.delta() <= delta_max * (1.0 + 1e-12) {
                        let closed = o.base_point.is_none();
                        push_with_multiples(&mut raw, &o, delta_max, closed);
                    }
                }
            }
        }
    }
    Ok(assemble(raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lengths(v: &[PeriodicOrbit]) -> Vec<f64> {
        v.iter().map(|o| o.length).collect()
    }

    #[test]
    fn ellipse_double_normals() {
        let d = Domain::ellipse(2.0, 1.0).unwrap();
        let cf = d.chord_function(512).unwrap();
        let v = double_normal_orbits(&d, &cf).unwrap();
        let l = lengths(&v);
        assert_eq!(l.len(), 2, "{l:?}");
        assert!((l[0] - 4.0).abs() < 1e-10 && (l[1] - 8.0).abs() < 1e-10);
        for o in &v {
            assert!(o.reflection_residual(&d) < 1e-8);
        }
    }

    #[test]
    fn disk_family() {
        let d = Domain::disk(1.0).unwrap();
        let cf = d.chord_function(64).unwrap();
        let v = double_normal_orbits(&d, &cf).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, OrbitKind::DegenerateFamily);
        assert!((v[0].length - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_parallel_edges() {
        let d = Domain::rectangle(1.0, 2.0).unwrap();
        let cf = d.chord_function(64).unwrap();
        let l = lengths(&double_normal_orbits(&d, &cf).unwrap());
        assert_eq!(l.len(), 2);
        assert!((l[0] - 2.0).abs() < 1e-12 && (l[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn circle_triangle_and_square() {
        let d = Domain::disk(1.0).unwrap();
        let s = OrbitSearch::default();
        let l3 = lengths(&n_bounce_orbits(&d, 3, &s).unwrap());
        assert!(
            l3.iter().any(|l| (l - 3.0 * 3f64.sqrt()).abs() < 1e-10),
            "{l3:?}"
        );
        assert!(l3.iter().any(|l| (l - 6.0).abs() < 1e-10), "{l3:?}");
        let l4 = lengths(&n_bounce_orbits(&d, 4, &s).unwrap());
        assert!(
            l4.iter().any(|l| (l - 4.0 * 2f64.sqrt()).abs() < 1e-10),
            "{l4:?}"
        );
        assert!(l4.iter().any(|l| (l - 8.0).abs() < 1e-10), "{l4:?}");
        let l2 = lengths(&n_bounce_orbits(&d, 2, &s).unwrap());
        assert!(l2.iter().any(|l| (l - 4.0).abs() < 1e-10), "{l2:?}");
    }

    #[test]
    fn interval_spectrum() {
        let d = Domain::interval_set(&[1.0, 1.5]).unwrap();
        let sp = predict_length_spectrum(&d, 3.0, 2, &OrbitSearch::default()).unwrap();
        let deltas = sp.deltas();
        assert_eq!(deltas, vec![1.0, 1.5, 2.0, 3.0]);
        assert_eq!(sp.entries[3].multiplicity, 2);
    }

    #[test]
    fn rectangle_spectrum_contains_widths_and_diagonal() {
        let d = Domain::rectangle(1.0, 2.0).unwrap();
        let sp = predict_length_spectrum(&d, 2.5, 2, &OrbitSearch::default()).unwrap();
        let deltas = sp.deltas();
        assert!((deltas[0] - 1.0).abs() < 1e-15);
        assert!(deltas.iter().any(|x| (x - 5f64.sqrt()).abs() < 1e-12));
        assert!(deltas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn polygon_rejected_for_n_bounce() {
        let d = Domain::rectangle(1.0, 2.0).unwrap();
        assert!(n_bounce_orbits(&d, 3, &OrbitSearch::default()).is_err());
    }
}
