//! `kikuchi` command-line driver.
//!
//! Exit codes: 0 on success, 2 when the chosen parameters are infeasible,
//! 1 for every other failure (including a failed `verify`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kikuchi_core::experiment::{
    run_refute, run_sweep, run_verify, sweep_csv, Command, ExperimentConfig, Fixture, Format, ModeSpec, Source,
};
use kikuchi_core::spectral::SpectralMode;
use kikuchi_core::Error;

#[derive(Parser, Debug)]
#[command(name = "kikuchi", version, about = "Spectral refutation of semirandom XOR instances")]
struct Cli {
    /// TOML experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Certify the bipartite 2-XOR part left by the heavy-pair decomposition.
    #[command(name = "refute-2xor")]
    Refute2Xor(Common),
    /// Certify a 3-XOR instance with the [n] x [2] Kikuchi matrix.
    #[command(name = "refute-3xor")]
    Refute3Xor(Common),
    /// Certify an even-arity instance with the symmetric-difference Kikuchi matrix.
    #[command(name = "refute-even")]
    RefuteEven(Common),
    /// Decompose, then combine the 3-XOR and 2-XOR certificates.
    Combine(Common),
    /// Run a pipeline over an (n, k) grid and emit one row per point.
    Sweep(SweepArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SpectralArg {
    Dense,
    Product,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Report,
    Csv,
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Arity for random even-q instances.
    #[arg(long)]
    q: Option<usize>,
    /// Kikuchi level.
    #[arg(long = "l")]
    ell: Option<usize>,
    /// Heavy-pair threshold; derived from eps, delta and c when absent.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Hyperedges per random matching (default n / q).
    #[arg(long)]
    per_member: Option<usize>,
    /// exhaustive, balanced or sample:N.
    #[arg(long)]
    partitions: Option<ModeSpec>,
    /// exhaustive or sample:N.
    #[arg(long)]
    b: Option<ModeSpec>,
    #[arg(long, value_enum)]
    spectral: Option<SpectralArg>,
    /// Largest n for which brute-force values are computed.
    #[arg(long)]
    brute_cap: Option<usize>,
    /// Write the JSON report here and the CSV next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Instance file, or an LDC manifest when the extension is `.toml`.
    #[arg(long, conflicts_with = "fixture")]
    input: Option<PathBuf>,
    /// hadamard or hadamard-padded (sized by --k).
    #[arg(long)]
    fixture: Option<Fixture>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated n values.
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',')]
    k_values: Option<Vec<usize>>,
    /// Seeds per grid point.
    #[arg(long)]
    seeds: Option<usize>,
    /// refute-2xor, refute-3xor, refute-even or combine.
    #[arg(long, value_parser = parse_pipeline)]
    pipeline: Option<Command>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Suites to run (comma-separated); all when omitted.
    #[arg(long = "suite", value_delimiter = ',')]
    suites: Vec<String>,
    /// Trials per suite, overriding each suite's default.
    #[arg(long)]
    trials: Option<usize>,
}

fn parse_pipeline(s: &str) -> Result<Command, String> {
    match s {
        "refute-2xor" => Ok(Command::Refute2Xor),
        "refute-3xor" => Ok(Command::Refute3Xor),
        "refute-even" => Ok(Command::RefuteEven),
        "combine" => Ok(Command::Combine),
        _ => Err(format!("unknown pipeline `{s}`")),
    }
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(n, k, q, ell, eps, delta, c, seed, partitions, b, brute_cap);
        if self.d.is_some() {
            cfg.d = self.d;
        }
        if self.per_member.is_some() {
            cfg.per_member = self.per_member;
        }
        if let Some(s) = self.spectral {
            cfg.spectral = match s {
                SpectralArg::Dense => SpectralMode::DenseExact,
                SpectralArg::Product => SpectralMode::Product,
            };
        }
        if let Some(f) = self.format {
            cfg.format = match f {
                FormatArg::Report => Format::Report,
                FormatArg::Csv => Format::Csv,
            };
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if let Some(path) = &self.input {
            cfg.source = Source::File { path: path.clone() };
        } else if let Some(name) = self.fixture {
            cfg.source = Source::Fixture { name };
        }
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    let (command, common) = match &cli.command {
        Cmd::Refute2Xor(c) => (Command::Refute2Xor, c),
        Cmd::Refute3Xor(c) => (Command::Refute3Xor, c),
        Cmd::RefuteEven(c) => (Command::RefuteEven, c),
        Cmd::Combine(c) => (Command::Combine, c),
        Cmd::Sweep(s) => {
            if let Some(v) = &s.n_values {
                cfg.sweep.n_values = v.clone();
            }
            if let Some(v) = &s.k_values {
                cfg.sweep.k_values = v.clone();
            }
            if let Some(v) = s.seeds {
                cfg.sweep.seeds = v;
            }
            if let Some(p) = s.pipeline {
                cfg.sweep.pipeline = p;
            }
            (Command::Sweep, &s.common)
        }
        Cmd::Verify(v) => {
            if !v.suites.is_empty() {
                cfg.suites = v.suites.clone();
            }
            if v.trials.is_some() {
                cfg.trials = v.trials;
            }
            (Command::Verify, &v.common)
        }
    };
    cfg.command = command;
    common.apply(&mut cfg);
    Ok(cfg)
}

/// Rendered output: the JSON document and its CSV counterpart.
struct Output {
    json: String,
    csv: String,
    ok: bool,
}

fn execute(cfg: &ExperimentConfig) -> Result<Output, Error> {
    match cfg.command {
        Command::Sweep => {
            let rows = run_sweep(cfg)?;
            Ok(Output {
                json: serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
                csv: sweep_csv(&rows),
                ok: true,
            })
        }
        Command::Verify => {
            let report = run_verify(cfg)?;
            for s in &report.suites {
                eprintln!("{}", s.summary_line());
            }
            Ok(Output {
                json: report.to_json(),
                csv: report.to_csv(),
                ok: report.passed,
            })
        }
        _ => {
            let report = run_refute(cfg)?;
            eprintln!(
                "{}: mean bound {:.6} over {} sign vector(s), sound={}, violations={}",
                report.command,
                report.mean_bound,
                report.summary.rows.len(),
                report.sound,
                report.violations
            );
            Ok(Output {
                json: report.to_json(),
                csv: report.to_csv(),
                ok: true,
            })
        }
    }
}

fn write_outputs(path: &Path, out: &Output) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let csv_path = if path.extension().is_some_and(|e| e == "csv") {
        path.with_extension("csv.csv")
    } else {
        path.with_extension("csv")
    };
    std::fs::write(path, &out.json)?;
    std::fs::write(csv_path, &out.csv)?;
    Ok(())
}

fn run(cfg: &ExperimentConfig) -> Result<bool, Error> {
    let out = execute(cfg)?;
    if let Some(path) = &cfg.out {
        write_outputs(path, &out)?;
    }
    match cfg.format {
        Format::Report => print!("{}", out.json),
        Format::Csv => print!("{}", out.csv),
    }
    Ok(out.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut input = None;
    let result = build_config(&cli).and_then(|cfg| {
        if let Source::File { path } = &cfg.source {
            input = Some(path.clone());
        }
        run(&cfg)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            match (&e, input) {
                (Error::Parse { .. }, Some(path)) => eprintln!("error: {}: {e}", path.display()),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(if e.is_infeasible() { 2 } else { 1 })
        }
    }
}
