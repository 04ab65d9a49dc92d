mod config;
mod validate;

use clap::{Parser, Subcommand, ValueEnum};
use config::ExperimentConfig;
use heattrace::billiards::{predict_length_spectrum, LengthSpectrum};
use heattrace::images::{images_trace_samples, DEFAULT_IMAGES};
use heattrace::montecarlo::mc_trace_samples;
use heattrace::recovery::{recover, RecoveryReport};
use heattrace::spectra::{
    eigenvalues, trace_series, DEFAULT_LAMBDA_MAX_1D, DEFAULT_LAMBDA_MAX_2D, DEFAULT_TAIL_TOL,
};
use heattrace::{Backend, BoundaryCondition, Domain, Error, TraceSamples};
use serde::Serialize;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNEXPLAINED: u8 = 3;
const MAX_LAMBDA: f64 = 1e8;

#[derive(Parser)]
#[command(
    name = "heattrace",
    version,
    about = "Heat-kernel trace: forward models, recovery and billiard orbits"
)]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON); `-` reads stdin.
    #[arg(long)]
    config: String,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate P(t) on the configured grid.
    Trace(Common),
    /// Monte-Carlo trace, whatever backend the config names.
    Mc(Common),
    /// Predicted length spectrum from billiard orbits.
    Orbits(Common),
    /// Recover geometry and exponents from a trace CSV.
    Recover {
        #[command(flatten)]
        common: Common,
        /// Trace CSV; defaults to `trace.csv` in the output directory.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Cross-backend identity suite.
    Validate {
        /// Skip the Monte-Carlo check.
        #[arg(long)]
        quick: bool,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    Bessel,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDomain(_)
            | Error::UnsupportedDimension { .. }
            | Error::BackendUnavailable { .. }
            | Error::Argument(_)
            | Error::Truncation { .. }
            | Error::Window(_)
            | Error::InsufficientRange(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

struct Loaded {
    config: ExperimentConfig,
    domain: Domain,
    digest: String,
    out: PathBuf,
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let text = if common.config == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("cannot read config from stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(&common.config)
            .map_err(|e| Failure::Usage(format!("cannot read config '{}': {e}", common.config)))?
    };
    let config = ExperimentConfig::parse(&text).map_err(Failure::Usage)?;
    let domain = Domain::new(config.domain.clone())?;
    let out = common
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| {
        Failure::Usage(format!(
            "cannot create output directory '{}': {e}",
            out.display()
        ))
    })?;
    let digest = config.digest();
    Ok(Loaded {
        config,
        domain,
        digest,
        out,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Runtime(format!("cannot write '{}': {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn series_trace(
    domain: &Domain,
    bc: BoundaryCondition,
    grid: &[f64],
) -> Result<TraceSamples, Failure> {
    let mut lmax = if domain.dimension() == 1 {
        DEFAULT_LAMBDA_MAX_1D
    } else {
        DEFAULT_LAMBDA_MAX_2D
    };
    loop {
        let spec = eigenvalues(domain, bc, lmax)?;
        match trace_series(&spec, grid) {
            Err(Error::Truncation {
                required_lambda_max,
                ..
            }) if required_lambda_max > lmax && required_lambda_max <= MAX_LAMBDA => {
                lmax = required_lambda_max * 1.01;
            }
            other => return Ok(other?),
        }
    }
}

fn compute_trace(l: &Loaded, backend: Backend) -> Result<TraceSamples, Failure> {
    let grid = l.config.t_grid.points().map_err(Failure::Usage)?;
    let bc = l.config.bc;
    match backend {
        Backend::Series => series_trace(&l.domain, bc, &grid),
        Backend::Images => Ok(images_trace_samples(&l.domain, bc, &grid, DEFAULT_IMAGES)?),
        Backend::Montecarlo => Ok(mc_trace_samples(&l.domain, bc, &grid, &l.config.mc)?),
    }
}

#[derive(Serialize)]
struct TraceMeta<'a> {
    config_digest: &'a str,
    domain_digest: &'a str,
    domain_kind: &'a str,
    backend: Backend,
    bc: BoundaryCondition,
    n_points: usize,
    seed: Option<u64>,
    tail_tolerance: Option<f64>,
}

fn cmd_trace(common: &Common, force_mc: bool) -> Result<u8, Failure> {
    let l = load(common)?;
    let backend = if force_mc {
        Backend::Montecarlo
    } else {
        l.config.backend
    };
    let tr = compute_trace(&l, backend)?;
    write(&l.out.join("trace.csv"), &tr.to_csv())?;
    let meta = TraceMeta {
        config_digest: &l.digest,
        domain_digest: &tr.domain_digest,
        domain_kind: l.domain.kind(),
        backend,
        bc: tr.bc,
        n_points: tr.len(),
        seed: (backend == Backend::Montecarlo).then_some(l.config.mc.seed),
        tail_tolerance: (backend == Backend::Series).then_some(DEFAULT_TAIL_TOL),
    };
    write(&l.out.join("trace.meta.json"), &to_json(&meta))?;
    println!(
        "wrote {} points to {}",
        tr.len(),
        l.out.join("trace.csv").display()
    );
    Ok(0)
}

fn predicted(l: &Loaded) -> Result<LengthSpectrum, Failure> {
    let o = &l.config.orbits;
    Ok(predict_length_spectrum(
        &l.domain,
        o.delta_max,
        o.n_max_reflections,
        &o.search,
    )?)
}

#[derive(Serialize)]
struct OrbitsMeta<'a> {
    config_digest: &'a str,
    domain_digest: String,
    domain_kind: &'a str,
    delta_max: f64,
    n_max_reflections: usize,
    n_entries: usize,
    note: Option<&'static str>,
}

fn cmd_orbits(common: &Common) -> Result<u8, Failure> {
    let l = load(common)?;
    let spectrum = predicted(&l)?;
    write(&l.out.join("orbits.json"), &to_json(&spectrum.entries))?;
    let meta = OrbitsMeta {
        config_digest: &l.digest,
        domain_digest: l.domain.digest(),
        domain_kind: l.domain.kind(),
        delta_max: l.config.orbits.delta_max,
        n_max_reflections: l.config.orbits.n_max_reflections,
        n_entries: spectrum.entries.len(),
        note: (l.domain.dimension() == 1)
            .then_some("1-D domain: deltas are the multiples n*l_j of the interval lengths"),
    };
    write(&l.out.join("orbits.meta.json"), &to_json(&meta))?;
    println!(
        "{:>14} {:>14} {:>6} {:>5} {:>4}  kind",
        "delta", "orbit_length", "refl", "mult", "deg"
    );
    for e in &spectrum.entries {
        println!(
            "{:>14.10} {:>14.10} {:>6} {:>5} {:>4}  {:?}",
            e.delta, e.orbit_length, e.reflections, e.multiple, e.multiplicity, e.kind
        );
    }
    Ok(0)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config_digest: &'a str,
    domain_digest: String,
    trace_file: String,
    #[serde(flatten)]
    report: &'a RecoveryReport,
}

fn print_report(r: &RecoveryReport) {
    println!("{:<12} {:>16} {:>12}", "quantity", "value", "stderr");
    println!(
        "{:<12} {:>16.10} {:>12.3e}",
        "area", r.area, r.uncertainty.area_err
    );
    println!(
        "{:<12} {:>16.10} {:>12.3e}",
        "perimeter", r.perimeter, r.uncertainty.perimeter_err
    );
    println!(
        "{:<12} {:>16.10} {:>12.3e}",
        "constant", r.constant, r.uncertainty.constant_err
    );
    if let Some(c) = r.constant_readings {
        println!(
            "  read as holes: {:.4}; as right-angle corners: {:.4}",
            c.holes, c.right_angle_corners
        );
    }
    println!();
    println!(
        "{:>3} {:>14} {:>10} {:>5} {:>8} {:>12}  match",
        "#", "delta_sq", "delta", "sign", "nu", "fit"
    );
    for (i, e) in r.exponents.iter().enumerate() {
        let m = r
            .matches
            .iter()
            .find(|m| m.recovered_index == i)
            .map(|m| {
                format!(
                    "delta {:.6} ({:?}, x{}), gap {:.2e}",
                    m.predicted.delta, m.predicted.kind, m.predicted.multiple, m.relative_gap
                )
            })
            .unwrap_or_else(|| "unexplained".into());
        println!(
            "{:>3} {:>14.8} {:>10.6} {:>5} {:>8.4} {:>12.3e}  {m}",
            i + 1,
            e.delta_sq,
            e.delta(),
            if e.sign > 0 { "+" } else { "-" },
            e.nu,
            e.fit_residual
        );
    }
    for d in &r.diagnostics {
        println!("note: {d}");
    }
}

fn cmd_recover(common: &Common, trace: Option<&PathBuf>) -> Result<u8, Failure> {
    let l = load(common)?;
    let path = trace.cloned().unwrap_or_else(|| l.out.join("trace.csv"));
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Usage(format!("cannot read trace '{}': {e}", path.display())))?;
    let tr = TraceSamples::from_csv(
        &text,
        l.config.backend,
        l.config.bc,
        l.domain.digest(),
        l.domain.dimension(),
    )
    .map_err(|e| Failure::Usage(format!("malformed trace CSV '{}': {e}", path.display())))?;
    let spectrum = predicted(&l)?;
    let report = recover(&tr, Some(&spectrum), &l.config.recovery)?;
    let file = ReportFile {
        config_digest: &l.digest,
        domain_digest: l.domain.digest(),
        trace_file: path.display().to_string(),
        report: &report,
    };
    write(&l.out.join("report.json"), &to_json(&file))?;
    print_report(&report);
    Ok(if report.unexplained.is_empty() {
        0
    } else {
        EXIT_UNEXPLAINED
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Trace(c) => cmd_trace(c, false),
        Command::Mc(c) => cmd_trace(c, true),
        Command::Orbits(c) => cmd_orbits(c),
        Command::Recover { common, trace } => cmd_recover(common, trace.as_ref()),
        Command::Validate {
            quick,
            inject_fault,
        } => {
            let fault = inject_fault.map(|f| match f {
                FaultArg::Bessel => validate::Fault::Bessel,
            });
            Ok(if validate::run(*quick, fault) {
                0
            } else {
                EXIT_VALIDATION
            })
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
