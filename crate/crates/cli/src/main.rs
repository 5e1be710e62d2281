use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use qgraph_core::ensemble::{
    extremal, run_mc, run_scan, scatter_export, McConfig, RunMetadata, RunRecord, ScanConfig, FIELDS,
};
use qgraph_core::moments::QuadOptions;
use qgraph_core::report::{analyze, AnalysisOptions};
use qgraph_core::validation::{run_suite, Suite, ValidateOptions};
use qgraph_core::{Error, GraphSpec};

mod plot;

#[derive(Debug, Parser)]
#[command(name = "qgraph", version, about = "Spectra and nonlinear response of quantum graphs with delta potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Number of states retained in the sums over states.
    #[arg(long)]
    states: Option<usize>,
    /// Gauss–Legendre points per quadrature panel.
    #[arg(long = "quad-order")]
    quad_order: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one graph and write `report.json` and `moments.csv`.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a deterministic grid scan.
    Scan {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a seeded Monte Carlo ensemble.
    Mc {
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a property suite and write `<suite>.csv`; exits 5 if any row fails.
    Validate {
        /// oracle-wires, sum-rules, rotation-invariance or scale-invariance
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Interior nodes of the finite-difference grid.
        #[arg(long = "fd-grid")]
        fd_grid: Option<usize>,
        /// Number of graphs to evaluate.
        #[arg(long)]
        cases: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Emit the data behind one figure as CSV files.
    Plotdata {
        figure: String,
        /// Optional JSON file overriding the figure's defaults.
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
enum Failure {
    Parse(String),
    Invalid(String),
    Core(Error),
    Io(String),
    SuiteFailed(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Invalid(_) => 3,
            Failure::Core(e) if e.is_validation() => 3,
            Failure::Core(_) => 4,
            Failure::SuiteFailed(_) => 5,
            Failure::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Parse(_) => "parse",
            Failure::Invalid(_) => "validation",
            Failure::Core(e) => e.kind(),
            Failure::Io(_) => "io",
            Failure::SuiteFailed(_) => "validation_failed",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Parse(m) | Failure::Invalid(m) | Failure::Io(m) | Failure::SuiteFailed(m) => m.clone(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let body = serde_json::json!({ "error": f.kind(), "message": f.message(), "exit_code": f.code() });
            eprintln!("{body}");
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Solve { input, common } => solve(&input, &common),
        Command::Scan { config, common } => scan(&config, &common),
        Command::Mc { config, seed, common } => mc(&config, seed, &common),
        Command::Validate { suite, seed, fd_grid, cases, common } => validate(&suite, seed, fd_grid, cases, &common),
        Command::Plotdata { figure, config, seed, common } => {
            let figure: plot::Figure = figure.parse().map_err(Failure::Invalid)?;
            let cfg: plot::PlotConfig = match config {
                Some(p) => read_json(&p)?,
                None => plot::PlotConfig::default(),
            };
            let opts = analysis_options(&common, AnalysisOptions::default())?;
            let out = output_dir(&common.out)?;
            let files = plot::emit(figure, &cfg, &opts, seed, &out)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        match e.classify() {
            serde_json::error::Category::Data => Failure::Invalid(msg),
            _ => Failure::Parse(msg),
        }
    })
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub(crate) fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn output_dir(out: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    Ok(out.to_path_buf())
}

fn analysis_options(common: &Common, base: AnalysisOptions) -> CliResult<AnalysisOptions> {
    let mut opts = base;
    if let Some(n) = common.states {
        if n < 2 {
            return Err(Failure::Invalid(format!("--states must be at least 2, got {n}")));
        }
        opts.n_states = n;
    }
    if let Some(q) = common.quad_order {
        if q < 16 {
            return Err(Failure::Invalid(format!("--quad-order must be at least 16, got {q}")));
        }
        opts.quad = QuadOptions { order: q, ..opts.quad };
    }
    Ok(opts)
}

fn solve(input: &Path, common: &Common) -> CliResult<()> {
    let spec: GraphSpec = read_json(input)?;
    let opts = analysis_options(common, AnalysisOptions::default())?;
    let a = analyze(&spec, &opts)?;
    let out = output_dir(&common.out)?;
    write_json(&out.join("report.json"), &a.report)?;
    let mut w = create(&out.join("moments.csv"))?;
    a.table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_ensemble(out: &Path, records: &[RunRecord], meta: &RunMetadata) -> CliResult<()> {
    let mut w = create(&out.join("records.csv"))?;
    scatter_export(records, FIELDS, &mut w)?;
    w.flush()?;
    let best = serde_json::json!({
        "best_beta": extremal(records, |m| m.beta.abs()),
        "best_gamma": extremal(records, |m| m.gamma),
        "least_gamma": extremal(records, |m| -m.gamma_min),
    });
    write_json(&out.join("extremal.json"), &best)?;
    write_json(&out.join("metadata.json"), meta)?;
    let ok = records.iter().filter(|r| r.ok()).count();
    println!("{} records, {} failed", records.len(), records.len() - ok);
    Ok(())
}

fn scan(config: &Path, common: &Common) -> CliResult<()> {
    let mut cfg: ScanConfig = read_json(config)?;
    if let Some(n) = common.states {
        cfg.n_states = n;
    }
    if let Some(q) = common.quad_order {
        cfg.quad_order = q;
    }
    let out = output_dir(&common.out)?;
    let t = Instant::now();
    let records = run_scan(&cfg)?;
    let cfg_json = serde_json::to_value(&cfg).map_err(|e| Failure::Io(e.to_string()))?;
    let meta = RunMetadata::new("scan", None, &records, cfg_json, t.elapsed().as_secs_f64());
    write_ensemble(&out, &records, &meta)
}

fn mc(config: &Path, seed: Option<u64>, common: &Common) -> CliResult<()> {
    let mut cfg: McConfig = read_json(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = common.states {
        cfg.n_states = n;
    }
    if let Some(q) = common.quad_order {
        cfg.quad_order = q;
    }
    let out = output_dir(&common.out)?;
    let t = Instant::now();
    let outcome = run_mc(&cfg)?;
    let cfg_json = serde_json::to_value(&cfg).map_err(|e| Failure::Io(e.to_string()))?;
    let meta = RunMetadata::new("mc", Some(cfg.seed), &outcome.records, cfg_json, t.elapsed().as_secs_f64());
    write_ensemble(&out, &outcome.records, &meta)
}

fn validate(suite: &str, seed: Option<u64>, fd_grid: Option<usize>, cases: Option<usize>, common: &Common) -> CliResult<()> {
    let suite: Suite = suite.parse()?;
    let mut opts = ValidateOptions { cases, ..ValidateOptions::default() };
    if let Some(s) = seed {
        opts.seed = s;
    }
    if let Some(n) = fd_grid {
        opts.fd_grid = n;
    }
    if let Some(n) = common.states {
        opts.n_states = n;
    }
    if let Some(q) = common.quad_order {
        opts.quad_order = q;
    }
    let report = run_suite(suite, &opts)?;
    let out = output_dir(&common.out)?;
    let path = out.join(format!("{suite}.csv"));
    let mut w = create(&path)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let failed = report.failures().count();
    println!("{suite}: {} rows, {failed} failed, worst diff/tol {:.3e}", report.rows.len(), report.worst_ratio());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::SuiteFailed(format!("{failed} of {} rows failed; see {}", report.rows.len(), path.display())))
    }
}
