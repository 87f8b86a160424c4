use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use peeling_core::cascade::{
    execute_cascade, write_csv, CascadeConfig, FaultInjection, Metadata, Mode,
};
use peeling_core::checks::{run_all, AcceptanceOptions, Scale};
use peeling_core::ode::{
    check_eigenvalue_condition, prop1_verify_with, random_prop1_system, Coupling,
    LinearRadialSystem, Source, Tolerances, EIGEN_TOL,
};
use peeling_core::weyl::{decompose, parts_to_json, weyl_from_json};
use peeling_core::Error;
use serde::{Deserialize, Serialize};

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "peeling",
    version,
    about = "Weyl decomposition and radial peeling cascades"
)]
struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = "PEELING_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a Weyl tensor (JSON components) into its irreducible parts.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        /// Written to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a system satisfying the eigenvalue hypothesis and report boundedness.
    Prop1(Prop1Args),
    /// Run the staged cascade and compare decay exponents with the tables.
    Cascade(CascadeArgs),
    /// Run the acceptance checks and print a pass/fail matrix.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct Prop1Args {
    /// Dimension of a random system.
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON system `{"a", "b2", "b", "y0"}` with `B = b2/r^2`, `b = b/r^2`;
    /// replaces the random system.
    #[arg(long, conflicts_with_all = ["n", "seed"])]
    system: Option<PathBuf>,
    #[arg(long, default_value_t = 1e6)]
    r_max: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Args)]
struct CascadeArgs {
    /// TOML file with `CascadeConfig` keys; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    nu: Option<u32>,
    /// generic, same_bw_decoupled, t_hat_decoupled or fully_decoupled.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    coupling_scale: Option<f64>,
    #[arg(long)]
    exponent_tol: Option<f64>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value = "cascade_csv")]
    csv_dir: PathBuf,
    /// Leave out the timestamp and runtime so reports are reproducible byte for byte.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run with the full sample counts.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = peeling_core::checks::acceptance::EXPONENT_TOL)]
    exponent_tol: f64,
    #[arg(long, value_enum)]
    inject_fault: Option<Fault>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Print results as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    /// Flip the sign of the −(d−3) entry in the weight −1 system.
    CheckvSign,
}

/// Distinguishes bad input (exit 2) from failed checks and runtime errors (exit 1).
enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Validation(_)
            | Error::InvalidParts(_)
            | Error::NonSquare { .. }
            | Error::Json(_) => Failure::Config(e.into()),
            _ => Failure::Run(e.into()),
        }
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn run_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Run(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decompose { input, out } => decompose_cmd(&cli.out_dir, input, out.as_deref()),
        Command::Prop1(args) => prop1_cmd(&cli.out_dir, args),
        Command::Cascade(args) => cascade_cmd(&cli.out_dir, args),
        Command::Selftest(args) => selftest_cmd(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn resolve(out_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

fn emit(out_dir: &Path, out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            let path = resolve(out_dir, p);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))
                    .map_err(run_err)?;
            }
            fs::write(&path, format!("{text}\n"))
                .with_context(|| format!("writing {}", path.display()))
                .map_err(run_err)
        }
        None => writeln!(std::io::stdout(), "{text}").map_err(run_err),
    }
}

fn read_input(p: &Path) -> Result<String, Failure> {
    fs::read_to_string(p)
        .with_context(|| format!("reading {}", p.display()))
        .map_err(config_err)
}

fn decompose_cmd(out_dir: &Path, input: &Path, out: Option<&Path>) -> Result<bool, Failure> {
    let c = weyl_from_json(&read_input(input)?)
        .map_err(|e| config_err(anyhow!("{}: {e}", input.display())))?;
    let parts = decompose(&c)?;
    emit(out_dir, out, &parts_to_json(&parts)?)?;
    Ok(true)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    a: Vec<Vec<f64>>,
    #[serde(default)]
    b2: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    b: Option<Vec<f64>>,
    y0: Vec<f64>,
}

fn matrix(rows: &[Vec<f64>], n: usize, name: &str) -> Result<DMatrix<f64>, Failure> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(config_err(anyhow!("{name} must be {n}x{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn load_system(p: &Path) -> Result<(LinearRadialSystem, DVector<f64>), Failure> {
    let file: SystemFile = serde_json::from_str(&read_input(p)?)
        .map_err(|e| config_err(anyhow!("{}: {e}", p.display())))?;
    let n = file.y0.len();
    let mut sys = LinearRadialSystem::new(matrix(&file.a, n, "a")?, 1.0)?;
    if let Some(b2) = &file.b2 {
        sys = sys.with_coupling(
            Coupling::InversePower {
                matrix: matrix(b2, n, "b2")?,
                power: 2.0,
            },
            2.0,
        )?;
    }
    if let Some(b) = &file.b {
        if b.len() != n {
            return Err(config_err(anyhow!("b must have {n} entries")));
        }
        sys = sys.with_source(
            Source::InversePower {
                vector: DVector::from_vec(b.clone()),
                power: 2.0,
            },
            2.0,
        )?;
    }
    Ok((sys, DVector::from_vec(file.y0)))
}

#[derive(Serialize)]
struct Prop1Report {
    n: usize,
    seed: Option<u64>,
    r_max: f64,
    eigen_real_parts: Vec<f64>,
    bounded: bool,
    sup_norm: f64,
    tail_slope: f64,
}

fn prop1_cmd(out_dir: &Path, args: &Prop1Args) -> Result<bool, Failure> {
    if !(args.r_max > 1.0 && args.r_max.is_finite()) {
        return Err(config_err(anyhow!("--r-max must exceed 1")));
    }
    let (sys, y0, seed) = match &args.system {
        Some(p) => {
            let (s, y) = load_system(p)?;
            (s, y, None)
        }
        None => {
            let (s, y) = random_prop1_system(args.n, args.seed)?;
            (s, y, Some(args.seed))
        }
    };
    let eig = check_eigenvalue_condition(sys.a(), EIGEN_TOL)?;
    // a violated hypothesis is bad input, not a failed check
    let b =
        prop1_verify_with(&sys, &y0, args.r_max, &Tolerances::default()).map_err(|e| match e {
            Error::Precondition(_) => config_err(e),
            e => Failure::from(e),
        })?;
    let report = Prop1Report {
        n: sys.dim(),
        seed,
        r_max: args.r_max,
        eigen_real_parts: eig.eigen_real_parts,
        bounded: b.bounded,
        sup_norm: b.sup_norm,
        tail_slope: b.tail_slope,
    };
    emit(
        out_dir,
        args.out.as_deref(),
        &serde_json::to_string_pretty(&report).map_err(run_err)?,
    )?;
    Ok(b.bounded)
}

fn cascade_config(args: &CascadeArgs) -> Result<CascadeConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => toml::from_str::<CascadeConfig>(&read_input(p)?)
            .map_err(|e| config_err(anyhow!("{}: {e}", p.display())))?,
        None => CascadeConfig::default(),
    };
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if let Some(nu) = args.nu {
        cfg.nu = nu;
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(r) = args.r_max {
        cfg.r_max = r;
    }
    if let Some(s) = args.coupling_scale {
        cfg.coupling_scale = s;
    }
    if let Some(t) = args.exponent_tol {
        cfg.exponent_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cascade_cmd(out_dir: &Path, args: &CascadeArgs) -> Result<bool, Failure> {
    let cfg = cascade_config(args)?;
    let mut run = execute_cascade(&cfg)?;
    if args.no_timestamp {
        run.report.metadata = None;
    } else if let Some(m) = &mut run.report.metadata {
        m.timestamp = Some(chrono::Utc::now().to_rfc3339());
    } else {
        run.report.metadata = Some(Metadata {
            timestamp: Some(chrono::Utc::now().to_rfc3339()),
            runtime_seconds: 0.0,
        });
    }
    if args.format != Format::Csv {
        emit(out_dir, args.out.as_deref(), &run.report.to_json_pretty()?)?;
    }
    if args.format != Format::Json {
        let dir = resolve(out_dir, &args.csv_dir);
        fs::create_dir_all(&dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(run_err)?;
        write_csv(&run, &dir)?;
    }
    for f in run.report.failures() {
        eprintln!("FAIL {f}");
    }
    Ok(run.report.all_pass)
}

fn selftest_cmd(args: &SelftestArgs) -> Result<bool, Failure> {
    if !(args.exponent_tol >= 0.0 && args.exponent_tol.is_finite()) {
        return Err(config_err(anyhow!("--exponent-tol must be nonnegative")));
    }
    let opts = AcceptanceOptions {
        scale: if args.full { Scale::Full } else { Scale::Quick },
        exponent_tol: args.exponent_tol,
        fault: args
            .inject_fault
            .map(|Fault::CheckvSign| FaultInjection::CheckvSign),
        seed: args.seed,
    };
    let results = run_all(&opts);
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&results).map_err(run_err)?
        );
    } else {
        for r in &results {
            println!(
                "{:>2}  {:<28} {}  {:>6.1}s  {}",
                r.id,
                r.name,
                if r.pass { "PASS" } else { "FAIL" },
                r.seconds,
                r.detail
            );
        }
        let passed = results.iter().filter(|r| r.pass).count();
        println!("{passed}/{} criteria passed", results.len());
    }
    Ok(results.iter().all(|r| r.pass))
}
