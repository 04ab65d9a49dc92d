use super::{Domain, Point, Shape};
use crate::error::Result;

/// Interior points with more than one nearest boundary normal.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticalLocus {
    /// Closed-form segment (a single point when both ends coincide).
    Segment {
        endpoints: [Point; 2],
        component_index: usize,
    },
    /// No critical points relative to any component.
    Empty,
    /// Points found by the jump detector; only approximate.
    Sampled {
        points: Vec<Point>,
        component_index: usize,
        approximate: bool,
    },
}

impl CriticalLocus {
    pub fn points(&self) -> Vec<Point> {
        match self {
            CriticalLocus::Segment { endpoints, .. } => {
                if endpoints[0] == endpoints[1] {
                    vec![endpoints[0]]
                } else {
                    endpoints.to_vec()
                }
            }
            CriticalLocus::Empty => Vec::new(),
            CriticalLocus::Sampled { points, .. } => points.clone(),
        }
    }
}

const GRID: usize = 96;

pub(super) fn critical_locus(domain: &Domain) -> Result<CriticalLocus> {
    match domain.shape() {
        Shape::Disk { .. } => Ok(CriticalLocus::Segment {
            endpoints: [Point::zeros(), Point::zeros()],
            component_index: 0,
        }),
        Shape::Annulus { .. } => Ok(CriticalLocus::Empty),
        Shape::Ellipse { a, b } => {
            let c = (a * a - b * b) / a;
            Ok(CriticalLocus::Segment {
                endpoints: [Point::new(-c, 0.0), Point::new(c, 0.0)],
                component_index: 0,
            })
        }
        Shape::IntervalSet { .. } => Err(crate::Error::UnsupportedDimension { expected: "2-D" }),
        _ => Ok(sampled(domain)),
    }
}

fn cyclic_gap(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs() % period;
    d.min(period - d)
}

fn projection(domain: &Domain, x: &Point) -> (f64, f64) {
    let (d, comp, sl, _) = domain.nearest_boundary(x);
    (d, domain.component_offset(comp) + sl)
}

fn sampled(domain: &Domain) -> CriticalLocus {
    let (lo, hi) = domain.bounding_box();
    let perim = domain.perimeter();
    let sep = 1e-3 * perim;
    let step = (hi - lo) / GRID as f64;
    let at = |i: usize, j: usize| {
        Point::new(
            lo.x + (i as f64 + 0.5) * step.x,
            lo.y + (j as f64 + 0.5) * step.y,
        )
    };
    let mut proj = vec![None; GRID * GRID];
    for j in 0..GRID {
        for i in 0..GRID {
            let x = at(i, j);
            if domain.contains(&x) {
                proj[j * GRID + i] = Some(projection(domain, &x).1);
            }
        }
    }
    let mut points = Vec::new();
    for j in 0..GRID {
        for i in 0..GRID {
            let Some(s0) = proj[j * GRID + i] else {
                continue;
            };
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni >= GRID || nj >= GRID {
                    continue;
                }
                let Some(s1) = proj[nj * GRID + ni] else {
                    continue;
                };
                if cyclic_gap(s0, s1, perim) <= sep {
                    continue;
                }
                let (mut a, mut b) = (at(i, j), at(ni, nj));
                let (sa, sb) = (s0, s1);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    let (_, sm) = projection(domain, &m);
                    if cyclic_gap(sm, sa, perim) <= cyclic_gap(sm, sb, perim) {
                        a = m;
                    } else {
                        b = m;
                    }
                    if (b - a).norm() < 1e-13 * perim {
                        break;
                    }
                }
                let m = 0.5 * (a + b);
                let (_, ca, la, pa) = domain.nearest_boundary(&a);
                let (_, cb, lb, pb) = domain.nearest_boundary(&b);
                let gap = cyclic_gap(
                    domain.component_offset(ca) + la,
                    domain.component_offset(cb) + lb,
                    perim,
                );
                let (dm, _) = projection(domain, &m);
                let (da, db) = ((m - pa).norm(), (m - pb).norm());
                let tie = (da - dm).abs() <= 1e-6 * dm && (db - dm).abs() <= 1e-6 * dm;
                if tie && (ca != cb || gap > sep) && domain.contains(&m) {
                    points.push(m);
                }
            }
        }
    }
    CriticalLocus::Sampled {
        points,
        component_index: 0,
        approximate: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let e = Domain::ellipse(2.0, 1.0).unwrap().critical_locus().unwrap();
        match e {
            CriticalLocus::Segment { endpoints, .. } => {
                assert!((endpoints[0].x + 1.5).abs() < 1e-12);
                assert!((endpoints[1].x - 1.5).abs() < 1e-12);
            }
            _ => panic!(),
        }
        let d = Domain::disk(1.0).unwrap().critical_locus().unwrap();
        assert_eq!(d.points(), vec![Point::zeros()]);
        let a = Domain::annulus(2.0, 1.0).unwrap().critical_locus().unwrap();
        assert_eq!(a, CriticalLocus::Empty);
    }

    #[test]
    fn rectangle_medial_axis_sampled() {
        let d = Domain::rectangle(1.0, 2.0).unwrap();
        let loc = d.critical_locus().unwrap();
        let pts = loc.points();
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(d.contains(p));
            let on_spine = p.x.abs() < 1e-6 && p.y.abs() <= 0.5 + 1e-6;
            let on_diag = ((0.5 - p.x.abs()) - (1.0 - p.y.abs())).abs() < 1e-6;
            assert!(on_spine || on_diag, "{p:?}");
        }
    }
}
