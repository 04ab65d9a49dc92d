//! Acceptance suite. Every criterion prints one `PASS` or `FAIL` line with
//! the measured values and then asserts.

use heattrace::billiards::{
    double_normal_orbits, n_bounce_orbits, predict_length_spectrum, OrbitSearch,
};
use heattrace::images::{disk_triangle_eikonal, images_trace_1d, ImageExpansion, DEFAULT_IMAGES};
use heattrace::montecarlo::{mc_trace, McConfig};
use heattrace::recovery::{extract_exponent, fit_algebraic, match_spectrum, peel_spectrum};
use heattrace::spectra::{eigenvalues, trace_series, DEFAULT_LAMBDA_MAX_1D, DEFAULT_LAMBDA_MAX_2D};
use heattrace::trace::log_grid;
use heattrace::{BoundaryCondition, CriticalLocus, Domain, TraceSamples};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const D: BoundaryCondition = BoundaryCondition::Dirichlet;
const N: BoundaryCondition = BoundaryCondition::Neumann;

fn verdict(id: u32, name: &str, ok: bool, elapsed: Duration, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!(
        "{tag} [{id:02}] {name} ({:.2} s): {detail}",
        elapsed.as_secs_f64()
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

fn series(domain: &Domain, bc: BoundaryCondition, grid: &[f64]) -> TraceSamples {
    let lmax = if domain.dimension() == 1 {
        DEFAULT_LAMBDA_MAX_1D
    } else {
        DEFAULT_LAMBDA_MAX_2D
    };
    let spec = eigenvalues(domain, bc, lmax).unwrap();
    trace_series(&spec, grid).unwrap()
}

fn recovery_grid() -> Vec<f64> {
    log_grid(1e-3, 2.0, 200)
}

#[test]
fn c01_theta_identity() {
    let start = Instant::now();
    let grid = log_grid(0.01, 1.0, 50);
    let mut worst: f64 = 0.0;
    for a in [1.0, PI] {
        let domain = Domain::interval_set(&[a]).unwrap();
        for bc in [D, N] {
            let exact = series(&domain, bc, &grid);
            let cfg = ImageExpansion::new(a, bc, DEFAULT_IMAGES).unwrap();
            for (t, p) in grid.iter().zip(&exact.values) {
                worst = worst.max((images_trace_1d(*t, &cfg) - p).abs());
            }
        }
    }
    let el = start.elapsed();
    let ok = worst < 1e-10 && el < Duration::from_secs(1);
    verdict(
        1,
        "theta identity",
        ok,
        el,
        format!("max |images - series| = {worst:.3e}"),
    );
}

#[test]
fn c02_kac_coefficients_disk() {
    let start = Instant::now();
    let domain = Domain::disk(1.0).unwrap();
    let tr = series(&domain, D, &log_grid(1e-3, 2e-2, 60));
    let g = fit_algebraic(&tr, 5, Some([1e-3, 2e-2]))
        .unwrap()
        .geometry();
    let el = start.elapsed();
    let ok = (g.area - PI).abs() <= 1e-3
        && (g.perimeter - 2.0 * PI).abs() <= 1e-2
        && (g.constant - 1.0 / 6.0).abs() <= 1e-2
        && el < Duration::from_secs(30);
    verdict(
        2,
        "Kac coefficients, disk",
        ok,
        el,
        format!(
            "area {:.6}, perimeter {:.6}, constant {:.6}",
            g.area, g.perimeter, g.constant
        ),
    );
}

#[test]
fn c03_corner_constant_rectangle() {
    let start = Instant::now();
    let domain = Domain::rectangle(1.0, 2.0).unwrap();
    let tr = series(&domain, D, &recovery_grid());
    let g = fit_algebraic(&tr, 4, None).unwrap().geometry();
    let el = start.elapsed();
    let ok = (g.area - 2.0).abs() <= 1e-4
        && (g.perimeter - 6.0).abs() <= 1e-3
        && (g.constant - 0.25).abs() <= 1e-3
        && el < Duration::from_secs(5);
    verdict(
        3,
        "corner constant, rectangle",
        ok,
        el,
        format!(
            "area {:.8}, perimeter {:.8}, constant {:.8}",
            g.area, g.perimeter, g.constant
        ),
    );
}

#[test]
fn c04_interval_exponents() {
    let start = Instant::now();
    let domain = Domain::interval_set(&[1.0]).unwrap();
    let tr = series(&domain, D, &recovery_grid());
    let sw = fit_algebraic(&tr, 3, None).unwrap();
    let first = extract_exponent(&tr, &sw, None).unwrap();
    let peeled = peel_spectrum(&tr, &sw, 2).unwrap();
    let d2: Vec<f64> = peeled.exponents.iter().map(|e| e.delta_sq).collect();
    let el = start.elapsed();
    let ok = (first.delta_sq - 1.0).abs() <= 1e-3
        && d2.len() >= 2
        && (d2[1] - 4.0).abs() <= 5e-2
        && el < Duration::from_secs(5);
    verdict(
        4,
        "exponent extraction, 1-D",
        ok,
        el,
        format!("leading delta_sq {:.8}, peeled {d2:?}", first.delta_sq),
    );
}

#[test]
fn c05_bottleneck_width() {
    let start = Instant::now();
    let domain = Domain::rectangle(1.0, 2.0).unwrap();
    let tr = series(&domain, D, &recovery_grid());
    let sw = fit_algebraic(&tr, 4, None).unwrap();
    let e = extract_exponent(&tr, &sw, None).unwrap();
    let predicted = predict_length_spectrum(&domain, 3.0, 4, &OrbitSearch::default()).unwrap();
    let (matches, _) = match_spectrum(&[e.delta_sq], &predicted, 0.02);
    let width_match = matches
        .first()
        .is_some_and(|m| m.predicted.delta == 1.0 && m.predicted.reflections == 2);
    let el = start.elapsed();
    let ok = (e.delta_sq - 1.0).abs() <= 1e-2 && width_match && el < Duration::from_secs(10);
    verdict(
        5,
        "bottleneck width",
        ok,
        el,
        format!(
            "delta_sq {:.6}, matched {:?}",
            e.delta_sq,
            matches.first().map(|m| m.predicted.delta)
        ),
    );
}

#[test]
fn c06_multi_interval_spectrum() {
    let start = Instant::now();
    let domain = Domain::interval_set(&[1.0, 1.5]).unwrap();
    let tr = series(&domain, D, &recovery_grid());
    let sw = fit_algebraic(&tr, 3, None).unwrap();
    let peeled = peel_spectrum(&tr, &sw, 2).unwrap();
    let d2: Vec<f64> = peeled.exponents.iter().map(|e| e.delta_sq).collect();
    let predicted = predict_length_spectrum(&domain, 3.0, 2, &OrbitSearch::default()).unwrap();
    let (matches, unexplained) = match_spectrum(&d2, &predicted, 0.02);
    let matched: Vec<f64> = matches.iter().map(|m| m.predicted.delta).collect();
    let el = start.elapsed();
    let ok = d2.len() == 2
        && (d2[0] - 1.0).abs() <= 1e-3
        && (d2[1] - 2.25).abs() <= 1e-2
        && matched == vec![1.0, 1.5]
        && unexplained.is_empty()
        && el < Duration::from_secs(10);
    verdict(
        6,
        "multi-interval spectrum",
        ok,
        el,
        format!("delta_sq {d2:?}, matched deltas {matched:?}"),
    );
}

#[test]
fn c07_circle_closed_forms() {
    let start = Instant::now();
    let domain = Domain::disk(1.0).unwrap();
    let s = OrbitSearch::default();
    let lengths = |n: usize| -> Vec<f64> {
        n_bounce_orbits(&domain, n, &s)
            .unwrap()
            .iter()
            .map(|o| o.length)
            .collect()
    };
    let has = |v: &[f64], x: f64| v.iter().any(|l| (l - x).abs() <= 1e-8);
    let (l2, l3, l4) = (lengths(2), lengths(3), lengths(4));
    let el = start.elapsed();
    let ok = has(&l2, 4.0)
        && has(&l3, 3.0 * 3f64.sqrt())
        && has(&l4, 4.0 * 2f64.sqrt())
        && has(&l3, 6.0)
        && el < Duration::from_secs(10);
    verdict(
        7,
        "billiard closed forms, circle",
        ok,
        el,
        format!("N=2 {l2:?}, N=3 {l3:?}, N=4 {l4:?}"),
    );
}

#[test]
fn c08_ellipse_geometry() {
    let start = Instant::now();
    let domain = Domain::ellipse(2.0, 1.0).unwrap();
    let chord = domain.chord_function(512).unwrap();
    let lengths: Vec<f64> = double_normal_orbits(&domain, &chord)
        .unwrap()
        .iter()
        .map(|o| o.length)
        .collect();
    let locus = domain.critical_locus().unwrap();
    let ends = match locus {
        CriticalLocus::Segment { endpoints, .. } => Some(endpoints),
        _ => None,
    };
    let el = start.elapsed();
    let ok = lengths.len() == 2
        && (lengths[0] - 4.0).abs() <= 1e-8
        && (lengths[1] - 8.0).abs() <= 1e-8
        && ends.is_some_and(|e| {
            (e[0].x + 1.5).abs() <= 1e-12
                && (e[1].x - 1.5).abs() <= 1e-12
                && e[0].y == 0.0
                && e[1].y == 0.0
        })
        && el < Duration::from_secs(5);
    verdict(
        8,
        "ellipse geometry",
        ok,
        el,
        format!("orbit lengths {lengths:?}, locus {ends:?}"),
    );
}

#[test]
fn c09_disk_triangle_eikonal() {
    let start = Instant::now();
    let r = 1.0;
    let centre = disk_triangle_eikonal(0.0, r).unwrap();
    let rim = disk_triangle_eikonal(r, r).unwrap();
    let e0 = (centre / (4.0 * r) - 1.0).abs();
    let e1 = (rim / (3.0 * 3f64.sqrt() * r) - 1.0).abs();
    let el = start.elapsed();
    let ok = e0 <= 1e-12 && e1 <= 1e-12 && el < Duration::from_secs(1);
    verdict(
        9,
        "disk triangle eikonal",
        ok,
        el,
        format!("S(0) = {centre}, S(R) = {rim}"),
    );
}

#[test]
fn c10_monte_carlo_forward() {
    let start = Instant::now();
    let cfg = McConfig {
        n_paths: 1_000_000,
        ..McConfig::default()
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for domain in [
        Domain::disk(1.0).unwrap(),
        Domain::rectangle(1.0, 2.0).unwrap(),
    ] {
        let grid = [0.05, 0.1, 0.2];
        let exact = series(&domain, D, &grid);
        for (k, t) in grid.iter().enumerate() {
            let c = McConfig {
                seed: cfg.seed + k as u64,
                ..cfg
            };
            let est = mc_trace(&domain, D, *t, &c).unwrap();
            let z = (est.mean - exact.values[k]).abs() / est.stderr;
            let rel = est.stderr / est.mean;
            ok &= z <= 3.0 && rel <= 0.01;
            detail.push(format!("{} t={t}: z {z:.2}, rel {rel:.2e}", domain.kind()));
        }
    }
    let el = start.elapsed();
    ok &= el < Duration::from_secs(120);
    verdict(
        10,
        "Monte-Carlo forward validation",
        ok,
        el,
        detail.join("; "),
    );
}

#[test]
fn c11_neumann_sign_flip() {
    let start = Instant::now();
    let domain = Domain::interval_set(&[1.0]).unwrap();
    let grid = recovery_grid();
    let mut out = Vec::new();
    for bc in [D, N] {
        let tr = series(&domain, bc, &grid);
        let sw = fit_algebraic(&tr, 3, None).unwrap();
        out.push(extract_exponent(&tr, &sw, None).unwrap());
    }
    let el = start.elapsed();
    let ok = out[0].sign < 0
        && out[1].sign > 0
        && (out[0].delta_sq - out[1].delta_sq).abs() <= 1e-6
        && el < Duration::from_secs(5);
    verdict(
        11,
        "Neumann sign flip",
        ok,
        el,
        format!(
            "Dirichlet sign {:+} delta_sq {:.9}, Neumann sign {:+} delta_sq {:.9}",
            out[0].sign, out[0].delta_sq, out[1].sign, out[1].delta_sq
        ),
    );
}

#[test]
fn c12_disk_leading_exponent_diagnostic() {
    let start = Instant::now();
    let domain = Domain::disk(1.0).unwrap();
    let tr = series(&domain, D, &recovery_grid());
    let sw = fit_algebraic(&tr, 5, Some([1e-3, 2e-2])).unwrap();
    let outcome = extract_exponent(&tr, &sw, None);
    let el = start.elapsed();
    let (summary, json) = match &outcome {
        Ok(e) => {
            let near = [1.0, 4.0]
                .into_iter()
                .find(|c| (e.delta_sq - c).abs() <= 0.05 * c);
            let verdict = match near {
                Some(1.0) => "matches R^2 = 1".to_string(),
                Some(_) => "matches 4R^2 = 4".to_string(),
                None => "matches neither R^2 nor 4R^2".to_string(),
            };
            (
                format!(
                    "delta_sq {:.6} (sign {:+}, nu {:.3}): {verdict}",
                    e.delta_sq, e.sign, e.nu
                ),
                serde_json::json!({
                    "delta_sq": e.delta_sq,
                    "sign": e.sign,
                    "nu": e.nu,
                    "t_window": e.t_window,
                    "verdict": verdict,
                }),
            )
        }
        Err(err) => (
            format!("no exponent extracted: {err}"),
            serde_json::json!({ "error": err.to_string() }),
        ),
    };
    let archive =
        std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("disk_leading_exponent.json");
    std::fs::write(&archive, serde_json::to_string_pretty(&json).unwrap()).unwrap();
    // Diagnostic only: passes whenever the experiment runs within budget.
    verdict(
        12,
        "disk leading exponent (diagnostic)",
        el < Duration::from_secs(30),
        el,
        summary,
    );
}
