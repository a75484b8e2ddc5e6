//! `subreg`: command-line frontend for the solvers, regularity analyses, KKT analysis,
//! radius computations, the discretized control experiment and the example gallery.
//!
//! Exit codes: 0 success, 1 invalid input, 2 stalled or out of budget (or a failed demo
//! verdict), 3 subproblem failure, 4 a computational cap was exceeded.

mod commands;
mod problem;
mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{inputs_digest, CliError, Outcome, RunReport, Timings, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "subreg", version, about = "Strong subregularity toolkit")]
struct Cli {
    /// Seed of the ChaCha8 generator used by sampled routines.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock timings in the report (reports are then no longer reproducible).
    #[arg(long, global = true)]
    timings: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a generalized equation.
    Solve(SolveArgs),
    /// Estimate or compute a (q-)subregularity modulus.
    Regularity(RegularityArgs),
    /// Strict MFCQ, SOSC and strong subregularity of a KKT map.
    Kkt(KktArgs),
    /// Distance to loss of strong regularity.
    Radius(FileArg),
    /// Error study of the Euler discretization of a control problem.
    Ocp(OcpArgs),
    /// Run one of the scripted gallery examples.
    Demo(DemoArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Method {
    Josephy,
    Semismooth,
    Broyden,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Josephy)]
    pub method: Method,
    /// Starting point, comma separated; defaults to the file's start or a seeded point
    /// near the reference point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Iterate log (iter,residual,error,dm_quotient).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Routine {
    Rate,
    Qrate,
    Linear,
    Polyhedral,
    Slope,
    Radius,
}

#[derive(Args, Debug)]
pub struct RegularityArgs {
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub routine: Routine,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Domain and codomain norms, e.g. `l2,l2` or `linf,l2`.
    #[arg(long, default_value = "l2,l2")]
    pub norms: String,
    #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-5,1e-7")]
    pub radii: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct KktArgs {
    pub file: PathBuf,
    /// Primal point; overrides the file.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Multipliers; overrides the file.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct FileArg {
    pub file: PathBuf,
}

#[derive(Args, Debug)]
pub struct OcpArgs {
    pub file: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128,256")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 4096)]
    pub nref: usize,
    /// Study table (N,error,w_norm,iterations).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    pub name: String,
    /// Dimension for `ell-infty-diag`.
    #[arg(long)]
    pub n: Option<usize>,
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// The command name, its problem file and the options that influence the results.
fn describe(cli: &Cli) -> (&'static str, Option<&PathBuf>, BTreeMap<String, String>) {
    let mut o = BTreeMap::new();
    o.insert("seed".to_string(), cli.seed.to_string());
    let (name, file) = match &cli.command {
        Command::Solve(a) => {
            o.insert("method".into(), format!("{:?}", a.method).to_lowercase());
            o.insert("max_iter".into(), a.max_iter.to_string());
            if let Some(x0) = &a.x0 {
                o.insert("x0".into(), list(x0));
            }
            ("solve", Some(&a.file))
        }
        Command::Regularity(a) => {
            o.insert("routine".into(), format!("{:?}", a.routine).to_lowercase());
            o.insert("q".into(), a.q.to_string());
            o.insert("norms".into(), a.norms.clone());
            o.insert("radii".into(), list(&a.radii));
            ("regularity", Some(&a.file))
        }
        Command::Kkt(a) => {
            if let Some(x) = &a.x {
                o.insert("x".into(), list(x));
            }
            if let Some(y) = &a.y {
                o.insert("y".into(), list(y));
            }
            ("kkt", Some(&a.file))
        }
        Command::Radius(a) => ("radius", Some(&a.file)),
        Command::Ocp(a) => {
            o.insert("ns".into(), list(&a.ns));
            o.insert("nref".into(), a.nref.to_string());
            ("ocp", Some(&a.file))
        }
        Command::Demo(a) => {
            o.insert("name".into(), a.name.clone());
            if let Some(n) = a.n {
                o.insert("n".into(), n.to_string());
            }
            ("demo", None)
        }
    };
    (name, file, o)
}

fn read(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: &Cli, file: Option<&[u8]>) -> Result<Outcome, CliError> {
    let text = || -> Result<&str, CliError> {
        std::str::from_utf8(file.unwrap_or_default()).map_err(|_| "problem file is not UTF-8".into())
    };
    match &cli.command {
        Command::Solve(a) => commands::solve(text()?, a, cli.seed),
        Command::Regularity(a) => commands::regularity(text()?, a, cli.seed),
        Command::Kkt(a) => commands::kkt(text()?, a),
        Command::Radius(_) => commands::radius(text()?),
        Command::Ocp(a) => commands::ocp(text()?, a),
        Command::Demo(a) => commands::demo(a),
    }
}

fn write_text(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let started = Instant::now();
    let (name, path, options) = describe(&cli);
    let result = path.map(read).transpose().and_then(|bytes| {
        let outcome = run(&cli, bytes.as_deref())?;
        Ok((bytes, outcome))
    });
    let (bytes, outcome) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let csv_path = match &outcome.csv {
        Some((p, contents)) => {
            if let Err(e) = write_text(std::path::Path::new(p), contents) {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
            Some(p.clone())
        }
        None => None,
    };
    let report = RunReport {
        command: name.to_string(),
        inputs_digest: inputs_digest(name, bytes.as_deref(), &options),
        options,
        results: outcome.results,
        diagnostics: outcome.diagnostics,
        timings: cli.timings.then(|| Timings {
            total_seconds: started.elapsed().as_secs_f64(),
        }),
        csv: csv_path,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    let written = match &cli.out {
        Some(p) => write_text(p, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    ExitCode::from(outcome.exit_code as u8)
}
