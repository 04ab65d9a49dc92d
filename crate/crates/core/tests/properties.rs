use heattrace::billiards::{n_bounce_orbits, OrbitSearch};
use heattrace::images::{images_trace_1d, ImageExpansion};
use heattrace::spectra::{eigenvalues, trace_series};
use heattrace::{BoundaryCondition, Domain, Point};
use proptest::prelude::*;
use std::f64::consts::PI;

const D: BoundaryCondition = BoundaryCondition::Dirichlet;
const N: BoundaryCondition = BoundaryCondition::Neumann;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn ellipse_distance_is_minimal(a in 1.0f64..3.0, ratio in 0.3f64..1.0, u in -0.9f64..0.9, v in -0.9f64..0.9) {
        let b = a * ratio;
        let domain = Domain::ellipse(a, b).unwrap();
        let x = Point::new(u * a * (1.0 - v * v).sqrt() * 0.99, v * b * 0.99);
        prop_assume!(domain.contains(&x));
        let (d, bp) = domain.distance_to_boundary(&x).unwrap();
        prop_assert!(((bp.position - x).norm() - d).abs() < 1e-10);
        let p = domain.perimeter();
        for k in 0..400 {
            let s = p * k as f64 / 400.0;
            let q = domain.boundary_point(s).unwrap().position;
            prop_assert!((q - x).norm() >= d - 1e-10);
        }
        // The foot point sees x along its normal.
        let along = (x - bp.position).normalize().dot(&-bp.outward_normal);
        prop_assert!(along > 1.0 - 1e-8);
    }

    #[test]
    fn polygon_distance_matches_brute_force(w in proptest::array::uniform4(0.05f64..1.0)) {
        let vertices = [[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [0.5, 1.5]];
        let domain = Domain::polygon(&vertices).unwrap();
        let total: f64 = w.iter().sum();
        let x = vertices
            .iter()
            .zip(&w)
            .fold(Point::zeros(), |acc, (v, wi)| acc + Point::new(v[0], v[1]) * (wi / total));
        let (d, _) = domain.distance_to_boundary(&x).unwrap();
        let p = domain.perimeter();
        let brute = (0..4000)
            .map(|k| p * (k as f64 + 0.5) / 4000.0)
            .filter_map(|s| domain.boundary_point(s).ok())
            .map(|bp| (bp.position - x).norm())
            .fold(f64::INFINITY, f64::min);
        prop_assert!(d <= brute + 1e-12);
        prop_assert!(brute - d < 2e-3);
    }

    #[test]
    fn ellipse_normal_chord_is_centrally_symmetric(a in 1.0f64..3.0, ratio in 0.3f64..0.95, frac in 0.0f64..0.5) {
        let domain = Domain::ellipse(a, a * ratio).unwrap();
        let p = domain.perimeter();
        let c1 = domain.normal_chord(frac * p).unwrap();
        let c2 = domain.normal_chord(frac * p + 0.5 * p).unwrap();
        prop_assert!((c1 - c2).abs() < 1e-9 * a);
        prop_assert!(c1 <= 2.0 * a + 1e-12);
    }

    #[test]
    fn theta_identity_for_random_lengths(a in 0.3f64..4.0, tau in 0.005f64..1.0) {
        let t = tau * a * a;
        let domain = Domain::interval_set(&[a]).unwrap();
        for bc in [D, N] {
            let series = trace_series(&eigenvalues(&domain, bc, 1e6).unwrap(), &[t]).unwrap().values[0];
            let images = images_trace_1d(t, &ImageExpansion::new(a, bc, 8).unwrap());
            prop_assert!((series - images).abs() <= 1e-11 * series.max(1.0));
        }
    }

    #[test]
    fn rectangle_trace_factorises(a in 0.5f64..2.0, b in 0.5f64..2.0, tau in 0.01f64..1.0) {
        let t = tau * a.min(b).powi(2);
        let rect = Domain::rectangle(a, b).unwrap();
        for bc in [D, N] {
            let p = trace_series(&eigenvalues(&rect, bc, 4e4).unwrap(), &[t]).unwrap().values[0];
            let pa = images_trace_1d(t, &ImageExpansion::new(a, bc, 8).unwrap());
            let pb = images_trace_1d(t, &ImageExpansion::new(b, bc, 8).unwrap());
            prop_assert!((p / (pa * pb) - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn trace_decreases_in_t(r in 0.5f64..2.0) {
        let disk = Domain::disk(r).unwrap();
        let grid: Vec<f64> = (0..20).map(|i| 0.01 * r * r * 1.3f64.powi(i)).collect();
        let tr = trace_series(&eigenvalues(&disk, D, 4e4 / (r * r)).unwrap(), &grid).unwrap();
        prop_assert!(tr.values.windows(2).all(|w| w[1] < w[0]));
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn circle_orbits_are_regular_polygons(r in 0.5f64..2.0, n in 2usize..=6) {
        let disk = Domain::disk(r).unwrap();
        let orbits = n_bounce_orbits(&disk, n, &OrbitSearch::default()).unwrap();
        prop_assert!(!orbits.is_empty());
        // Regular star polygons, plus the diameter retraced n times.
        let mut lengths: Vec<f64> = (1..=n / 2)
            .map(|q| 2.0 * n as f64 * r * (PI * q as f64 / n as f64).sin())
            .collect();
        lengths.push(2.0 * n as f64 * r);
        for o in &orbits {
            prop_assert!(lengths.iter().any(|l| (o.length - l).abs() < 1e-8 * l), "{} not in {:?}", o.length, lengths);
            prop_assert!(o.reflection_residual(&disk) < 1e-8);
        }
        prop_assert!(orbits.iter().any(|o| (o.length - lengths[0]).abs() < 1e-8 * lengths[0]));
    }

    #[test]
    fn ellipse_orbits_satisfy_reflection_law(a in 1.2f64..2.5, n in 2usize..=4) {
        let domain = Domain::ellipse(a, 1.0).unwrap();
        let orbits = n_bounce_orbits(&domain, n, &OrbitSearch::default()).unwrap();
        prop_assert!(!orbits.is_empty());
        for o in &orbits {
            prop_assert!(o.reflection_residual(&domain) < 1e-8);
            prop_assert!(o.gradient_residual(&domain) < 1e-8);
            prop_assert!(o.length <= 2.0 * n as f64 * a + 1e-9);
        }
    }
}
