use heattrace::images::{images_trace_1d, ImageExpansion, DEFAULT_IMAGES};
use heattrace::montecarlo::{mc_trace, McConfig};
use heattrace::recovery::{extract_exponent, fit_algebraic};
use heattrace::spectra::{eigenvalues, trace_series, DEFAULT_LAMBDA_MAX_1D, DEFAULT_LAMBDA_MAX_2D};
use heattrace::trace::log_grid;
use heattrace::{BoundaryCondition, Domain, Spectrum};
use std::f64::consts::PI;

const D: BoundaryCondition = BoundaryCondition::Dirichlet;
const N: BoundaryCondition = BoundaryCondition::Neumann;

const J01: f64 = 2.404825557695773;
const J11: f64 = 3.831705970207512;
const J11_PRIME: f64 = 1.841183781340659;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    Bessel,
}

pub struct Check {
    pub name: &'static str,
    pub measured: String,
    pub tolerance: String,
    pub pass: bool,
}

type Outcome = Result<Check, String>;

fn spectrum(
    domain: &Domain,
    bc: BoundaryCondition,
    fault: Option<Fault>,
) -> Result<Spectrum, String> {
    let lmax = if domain.dimension() == 1 {
        DEFAULT_LAMBDA_MAX_1D
    } else {
        DEFAULT_LAMBDA_MAX_2D
    };
    let mut s = eigenvalues(domain, bc, lmax).map_err(|e| e.to_string())?;
    if fault == Some(Fault::Bessel) && domain.kind() == "disk" {
        for (v, _) in s.eigenvalues.iter_mut() {
            *v *= 1.0 + 1e-6;
        }
    }
    Ok(s)
}

fn theta_identity() -> Outcome {
    let grid = log_grid(0.01, 1.0, 50);
    let mut worst: f64 = 0.0;
    for a in [1.0, PI] {
        let domain = Domain::interval_set(&[a]).map_err(|e| e.to_string())?;
        for bc in [D, N] {
            let exact =
                trace_series(&spectrum(&domain, bc, None)?, &grid).map_err(|e| e.to_string())?;
            let cfg = ImageExpansion::new(a, bc, DEFAULT_IMAGES).map_err(|e| e.to_string())?;
            for (t, p) in grid.iter().zip(&exact.values) {
                worst = worst.max((images_trace_1d(*t, &cfg) - p).abs());
            }
        }
    }
    Ok(Check {
        name: "theta identity",
        measured: format!("{worst:.3e}"),
        tolerance: "1e-10".into(),
        pass: worst < 1e-10,
    })
}

fn rectangle_separability() -> Outcome {
    let grid = log_grid(0.01, 1.0, 30);
    let mut worst: f64 = 0.0;
    for bc in [D, N] {
        let rect = Domain::rectangle(1.0, 2.0).map_err(|e| e.to_string())?;
        let ia = Domain::interval_set(&[1.0]).map_err(|e| e.to_string())?;
        let ib = Domain::interval_set(&[2.0]).map_err(|e| e.to_string())?;
        let pr = trace_series(&spectrum(&rect, bc, None)?, &grid).map_err(|e| e.to_string())?;
        let pa = trace_series(&spectrum(&ia, bc, None)?, &grid).map_err(|e| e.to_string())?;
        let pb = trace_series(&spectrum(&ib, bc, None)?, &grid).map_err(|e| e.to_string())?;
        for i in 0..grid.len() {
            let prod = pa.values[i] * pb.values[i];
            worst = worst.max((pr.values[i] - prod).abs() / prod);
        }
    }
    Ok(Check {
        name: "rectangle separability",
        measured: format!("{worst:.3e}"),
        tolerance: "1e-12 rel".into(),
        pass: worst < 1e-12,
    })
}

fn bessel_table(fault: Option<Fault>) -> Outcome {
    let disk = Domain::disk(1.0).map_err(|e| e.to_string())?;
    let d = spectrum(&disk, D, fault)?;
    let n = spectrum(&disk, N, fault)?;
    let positive: Vec<f64> = n
        .eigenvalues
        .iter()
        .map(|v| v.0)
        .filter(|v| *v > 0.0)
        .collect();
    let got = [d.eigenvalues[0].0, d.eigenvalues[1].0, positive[0]];
    let want = [J01 * J01, J11 * J11, J11_PRIME * J11_PRIME];
    let worst = got
        .iter()
        .zip(&want)
        .map(|(g, w)| (g / w - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Check {
        name: "disk Bessel zeros",
        measured: format!("{worst:.3e}"),
        tolerance: "1e-13 rel".into(),
        pass: worst < 1e-13,
    })
}

fn disk_kac(fault: Option<Fault>) -> Outcome {
    let disk = Domain::disk(1.0).map_err(|e| e.to_string())?;
    let tr = trace_series(&spectrum(&disk, D, fault)?, &log_grid(1e-3, 2e-2, 60))
        .map_err(|e| e.to_string())?;
    let g = fit_algebraic(&tr, 5, Some([1e-3, 2e-2]))
        .map_err(|e| e.to_string())?
        .geometry();
    let pass = (g.area - PI).abs() <= 1e-3
        && (g.perimeter - 2.0 * PI).abs() <= 1e-2
        && (g.constant - 1.0 / 6.0).abs() <= 1e-2;
    Ok(Check {
        name: "disk Kac coefficients",
        measured: format!("{:.6} / {:.6} / {:.6}", g.area, g.perimeter, g.constant),
        tolerance: "1e-3 / 1e-2 / 1e-2".into(),
        pass,
    })
}

fn mc_versus_series() -> Outcome {
    let disk = Domain::disk(1.0).map_err(|e| e.to_string())?;
    let t = 0.1;
    let exact = trace_series(&spectrum(&disk, D, None)?, &[t])
        .map_err(|e| e.to_string())?
        .values[0];
    let cfg = McConfig {
        n_paths: 200_000,
        seed: 7,
        ..McConfig::default()
    };
    let est = mc_trace(&disk, D, t, &cfg).map_err(|e| e.to_string())?;
    let z = (est.mean - exact).abs() / est.stderr;
    let rel = est.stderr / est.mean;
    Ok(Check {
        name: "Monte-Carlo vs series, disk",
        measured: format!("z {z:.2}, rel {rel:.2e}"),
        tolerance: "z <= 4, rel <= 1e-2".into(),
        pass: z <= 4.0 && rel <= 1e-2,
    })
}

/// Disk leading-exponent experiment; reported, never failing.
fn disk_exponent_diagnostic() -> String {
    let run = || -> Result<String, String> {
        let disk = Domain::disk(1.0).map_err(|e| e.to_string())?;
        let tr = trace_series(&spectrum(&disk, D, None)?, &log_grid(1e-3, 2.0, 200))
            .map_err(|e| e.to_string())?;
        let sw = fit_algebraic(&tr, 5, Some([1e-3, 2e-2])).map_err(|e| e.to_string())?;
        let e = extract_exponent(&tr, &sw, None).map_err(|e| e.to_string())?;
        let verdict = if (e.delta_sq - 1.0).abs() <= 0.05 {
            "matches R^2 = 1"
        } else if (e.delta_sq - 4.0).abs() <= 0.2 {
            "matches 4R^2 = 4"
        } else {
            "matches neither R^2 nor 4R^2"
        };
        Ok(format!(
            "delta_sq {:.6} (nu {:.3}): {verdict}",
            e.delta_sq, e.nu
        ))
    };
    run().unwrap_or_else(|e| format!("no exponent extracted: {e}"))
}

/// Runs the identity suite, prints the table, returns whether all checks passed.
pub fn run(quick: bool, fault: Option<Fault>) -> bool {
    let mut checks: Vec<(&str, Outcome)> = vec![
        ("theta identity", theta_identity()),
        ("rectangle separability", rectangle_separability()),
        ("disk Bessel zeros", bessel_table(fault)),
        ("disk Kac coefficients", disk_kac(fault)),
    ];
    if !quick {
        checks.push(("Monte-Carlo vs series, disk", mc_versus_series()));
    }
    println!(
        "{:<30} {:<34} {:<22} status",
        "check", "measured", "tolerance"
    );
    let mut all = true;
    for (name, outcome) in checks {
        match outcome {
            Ok(c) => {
                all &= c.pass;
                let status = if c.pass { "PASS" } else { "FAIL" };
                println!(
                    "{:<30} {:<34} {:<22} {status}",
                    c.name, c.measured, c.tolerance
                );
            }
            Err(e) => {
                all = false;
                println!("{name:<30} {:<34} {:<22} FAIL", format!("error: {e}"), "-");
            }
        }
    }
    if quick {
        println!(
            "{:<30} {:<34} {:<22} SKIP",
            "Monte-Carlo vs series, disk", "-", "-"
        );
    }
    println!(
        "diagnostic: disk leading exponent: {}",
        disk_exponent_diagnostic()
    );
    all
}
