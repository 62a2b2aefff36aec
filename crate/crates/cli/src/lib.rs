//! The `slice-gauss` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid config or usage, 2 infeasible slice,
//! 3 numerical failure, 4 I/O error.

pub mod checks;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use slice_gauss::harness::{
    self, convergence_sweep, emit_csv, emit_svg, gs_perturbation_study, rotation_stability_study, tail_study,
    GsRow, GsStudy, HarnessError, RotationRow, RotationStudy, Sweep, Table, TailRow, TailStudy,
};
use slice_gauss::linalg::{norm, sub};
use slice_gauss::{approximate_center, build_geometry, GaussianError, QuadratureError, SliceError, SliceSpec};

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "slice-gauss", version, about = "Sphere-slice integrals and their Gaussian limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 or unset: all cores).
    #[arg(long, global = true, env = "SLICE_GAUSS_THREADS")]
    threads: Option<usize>,
    /// Override the config output path.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the invariant suite (no config needed).
    Check,
    /// Print the slice geometry at one n as JSON.
    Geometry(ConfigArg),
    /// Slice Monte Carlo at one n against the Gaussian reference.
    Integrate(ConfigArg),
    /// Convergence sweep over n_schedule; writes CSV and SVG.
    Converge(ConfigArg),
    /// Tail fractions P(|x1| > t) for the configured thresholds.
    Tails(ConfigArg),
    /// Gram-Schmidt perturbation study.
    Perturb(ConfigArg),
    /// Rotation stability of slice integrals.
    Rotate(ConfigArg),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
}

/// Errors surfaced to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Harness(HarnessError),
    Io(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Harness(e)
    }
}

impl From<SliceError> for CliError {
    fn from(e: SliceError) -> Self {
        CliError::Harness(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Harness(h) => match h {
                HarnessError::InvalidInput(_) => EXIT_CONFIG,
                HarnessError::Io(_) => EXIT_IO,
                HarnessError::SeparationLost { .. } => EXIT_NUMERICAL,
                HarnessError::Slice(s) => match s {
                    SliceError::EmptySlice { .. } | SliceError::DegenerateFrame { .. } | SliceError::ZeroTruncation { .. } => {
                        EXIT_INFEASIBLE
                    }
                    _ => EXIT_CONFIG,
                },
                HarnessError::Quadrature(q) => match q {
                    QuadratureError::QuadratureNonConvergent { .. } => EXIT_NUMERICAL,
                    _ => EXIT_CONFIG,
                },
                HarnessError::Gaussian(g) => match g {
                    GaussianError::NotPsd(_) | GaussianError::NotSymmetric(_) => EXIT_NUMERICAL,
                    _ => EXIT_CONFIG,
                },
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Harness(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("cannot start worker threads: {e}");
            return EXIT_IO;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(path: &Path, cli: &Cli) -> Result<Experiment, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut experiment = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        experiment.config.seed = seed;
    }
    if let Some(out) = &cli.output {
        experiment.config.output = out.clone();
    }
    Ok(experiment)
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let arg = match &cli.command {
        Command::Check => return Ok(checks::run_all()),
        Command::Geometry(a)
        | Command::Integrate(a)
        | Command::Converge(a)
        | Command::Tails(a)
        | Command::Perturb(a)
        | Command::Rotate(a) => a,
    };
    let experiment = load(&arg.config, cli)?;
    match &cli.command {
        Command::Check => unreachable!(),
        Command::Geometry(_) => geometry(&experiment),
        Command::Integrate(_) => converge(&experiment, Some(experiment.n())),
        Command::Converge(_) => converge(&experiment, None),
        Command::Tails(_) => tails(&experiment),
        Command::Perturb(_) => perturb(&experiment),
        Command::Rotate(_) => rotate(&experiment),
    }
}

fn write_table(table: &Table, path: &Path) -> Result<(), CliError> {
    ensure_parent(path)?;
    emit_csv(table, path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    Ok(())
}

fn slice_spec(e: &Experiment, n: usize) -> Result<SliceSpec, CliError> {
    Ok(SliceSpec::new(e.family.clone(), e.config.p.clone(), e.config.k, n)?)
}

fn geometry(e: &Experiment) -> Result<i32, CliError> {
    let spec = slice_spec(e, e.n())?;
    let g = build_geometry(&spec)?;
    let approx = approximate_center(&spec)?;
    let out = json!({
        "n": spec.n,
        "k": spec.k,
        "gamma": spec.gamma(),
        "center": g.center(),
        "approx_center": approx,
        "q": g.q(),
        "radius": g.radius(),
        "r_n": g.scale_ratio(),
        "center_gap": norm(&sub(&approx, g.center())),
    });
    // a closed pipe (e.g. `| head`) is not an error for a printing command
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&out).expect("geometry serializes"));
    Ok(EXIT_OK)
}

fn converge(e: &Experiment, single_n: Option<usize>) -> Result<i32, CliError> {
    let c = &e.config;
    let schedule = single_n.map_or_else(|| c.n_schedule.clone(), |n| vec![n]);
    let final_n = *schedule.last().expect("non-empty schedule");
    let sweep = Sweep {
        family: e.members.clone(),
        p: c.p.clone(),
        k: c.k,
        integrand: c.integrand.clone(),
        n_schedule: schedule,
        samples: c.samples,
        seed: c.seed,
        reference: c.reference,
        bias_budget: e.bias_budget(),
    };
    let report = convergence_sweep(&sweep)?;
    println!(
        "reference {:.16e} ({}), fingerprint {}",
        report.reference.value,
        report.ref_method.as_str(),
        report.fingerprint
    );
    for row in &report.rows {
        println!(
            "n={} estimate={:.6} se={:.2e} abs_error={:.3e}",
            row.n, row.estimate, row.std_error, row.abs_error
        );
    }
    for f in &report.failures {
        eprintln!("n={}: {}", f.n, f.error);
    }
    if let Some(last) = report.rows.last() {
        let verdict = if report.passed(final_n) { "PASS" } else { "FAIL" };
        println!(
            "final n={} abs_error={:.3e} tolerance={:.3e} {verdict}",
            last.n,
            last.abs_error,
            report.tolerance(last)
        );
    }
    write_table(&report.to_table(), &c.output)?;
    if single_n.is_none() {
        let svg = c.output.with_extension("svg");
        emit_svg(&report, &svg)?;
        println!("wrote {}", svg.display());
    }
    if let Some(f) = report.failures.first() {
        return Err(CliError::Harness(HarnessError::Slice(f.error.clone())));
    }
    Ok(EXIT_OK)
}

fn tails(e: &Experiment) -> Result<i32, CliError> {
    let c = &e.config;
    let thresholds = c.thresholds.clone().unwrap_or_else(|| vec![2.0, 3.0, 4.0, 6.0]);
    let rows = tail_study(&TailStudy {
        spec: slice_spec(e, e.n())?,
        thresholds,
        count: c.samples,
        seed: c.seed,
    })?;
    for r in &rows {
        println!(
            "t={} fraction={:.3e} se={:.2e} envelope={:.3e} {}",
            r.t,
            r.fraction,
            r.std_error,
            r.envelope,
            if r.within_envelope { "ok" } else { "OUTSIDE" }
        );
    }
    write_table(&TailRow::table(&rows), &c.output)?;
    Ok(EXIT_OK)
}

fn epsilons(e: &Experiment, default: &[f64]) -> Vec<f64> {
    e.config.epsilons.clone().unwrap_or_else(|| default.to_vec())
}

fn perturb(e: &Experiment) -> Result<i32, CliError> {
    let c = &e.config;
    let base = match &c.base {
        Some(b) => b.clone(),
        None if e.family.gamma() > 0 => e.family.truncations(e.n()),
        None => {
            return Err(CliError::Config(ConfigError {
                field: "base".into(),
                message: "needed when the family is empty".into(),
            }))
        }
    };
    let rows = gs_perturbation_study(&GsStudy {
        base,
        epsilons: epsilons(e, &[1e-2, 1e-4, 1e-6]),
        seed: c.seed,
        directions: c.directions.clone(),
        unchecked: false,
    })?;
    for r in &rows {
        println!("epsilon={:e} max_diff={:.3e} ratio={:.4}", r.epsilon, r.max_diff, r.ratio);
    }
    println!("ratio band (max/min) {:.4}", harness::ratio_band(&rows));
    write_table(&GsRow::table(&rows), &c.output)?;
    Ok(EXIT_OK)
}

fn rotate(e: &Experiment) -> Result<i32, CliError> {
    let c = &e.config;
    let rows = rotation_stability_study(&RotationStudy {
        spec: slice_spec(e, e.n())?,
        f: e.integrand.clone(),
        epsilons: epsilons(e, &[0.0, 1e-1, 1e-2, 1e-3]),
        count: c.samples,
        seed: c.seed,
        mode: c.perturbation,
    })?;
    for r in &rows {
        println!("epsilon={:e} difference={:.3e} se={:.2e}", r.epsilon, r.difference, r.std_error);
    }
    write_table(&RotationRow::table(&rows), &c.output)?;
    Ok(EXIT_OK)
}
