//! Experiment configs, report documents, CSV rows and parameter sweeps.
//!
//! A config fully determines its output: every random draw is taken from a
//! named sub-stream of the config seed.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{parse_family, suggested_threshold, Lines, MatchingFamily};
use crate::ldc::{hadamard_fixture, load_manifest, pad_to_qplus1, NormalLdc};
use crate::random::{random_matching_family, SeedStream};
use crate::refuter::{certify_signs, digest_text, BMode, BSummary, Pipeline, RefuteParams};
use crate::spectral::SpectralMode;
use crate::verify::{run_suites, Suite, SuiteResult};
use crate::xor::{PartitionMode, XorInstance};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "refute-2xor")]
    Refute2Xor,
    #[serde(rename = "refute-3xor")]
    Refute3Xor,
    #[serde(rename = "refute-even")]
    RefuteEven,
    #[serde(rename = "combine")]
    Combine,
    #[serde(rename = "sweep")]
    Sweep,
    #[serde(rename = "verify")]
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Refute2Xor => "refute-2xor",
            Command::Refute3Xor => "refute-3xor",
            Command::RefuteEven => "refute-even",
            Command::Combine => "combine",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }

    /// Arity of generated instances.
    fn arity(&self, q: usize) -> usize {
        match self {
            Command::RefuteEven => q,
            _ => 3,
        }
    }
}

/// `exhaustive`, `balanced` or `sample:N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModeSpec {
    Exhaustive,
    Balanced,
    Sample(usize),
}

impl fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeSpec::Exhaustive => f.write_str("exhaustive"),
            ModeSpec::Balanced => f.write_str("balanced"),
            ModeSpec::Sample(n) => write!(f, "sample:{n}"),
        }
    }
}

impl FromStr for ModeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(ModeSpec::Exhaustive),
            "balanced" => Ok(ModeSpec::Balanced),
            _ => s
                .strip_prefix("sample:")
                .and_then(|n| n.parse().ok())
                .filter(|&n: &usize| n > 0)
                .map(ModeSpec::Sample)
                .ok_or_else(|| {
                    Error::input(format!("mode `{s}`: expected exhaustive, balanced or sample:N"))
                }),
        }
    }
}

impl TryFrom<String> for ModeSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModeSpec> for String {
    fn from(m: ModeSpec) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// 2-query Hadamard code on `2^k` coordinates.
    Hadamard,
    /// The Hadamard code padded to 3 queries.
    HadamardPadded,
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hadamard" => Ok(Fixture::Hadamard),
            "hadamard-padded" => Ok(Fixture::HadamardPadded),
            _ => Err(Error::input(format!(
                "unknown fixture `{s}`; expected hadamard or hadamard-padded"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Source {
    /// Instance text (optionally with a sign line) or an LDC manifest (`.toml`).
    File { path: PathBuf },
    Fixture { name: Fixture },
    /// Random matchings drawn from the `instance` stream.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Report,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub seeds: usize,
    /// Pipeline run at every point; `sweep` and `verify` are not allowed.
    pub pipeline: Command,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            n_values: (8..=16).collect(),
            k_values: (2..=4).collect(),
            seeds: 1,
            pipeline: Command::Refute3Xor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub command: Command,
    pub source: Source,
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub ell: usize,
    /// Heavy-pair threshold; defaults to `ceil(c log n / (eps^2 delta^2))`.
    pub d: Option<usize>,
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
    pub seed: u64,
    /// Hyperedges per generated member; defaults to `floor(n / q)`.
    pub per_member: Option<usize>,
    pub partitions: ModeSpec,
    pub b: ModeSpec,
    pub spectral: SpectralMode,
    /// Brute-force values are computed when `n` is at most this.
    pub brute_cap: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub sweep: SweepGrid,
    /// Suites for `verify`; empty runs all.
    pub suites: Vec<String>,
    pub trials: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: Command::Refute3Xor,
            source: Source::Random,
            n: 12,
            k: 3,
            q: 3,
            ell: 2,
            d: None,
            eps: 0.5,
            delta: 0.5,
            c: 1.0,
            seed: 0,
            per_member: None,
            partitions: ModeSpec::Exhaustive,
            b: ModeSpec::Exhaustive,
            spectral: SpectralMode::DenseExact,
            brute_cap: 16,
            out: None,
            format: Format::Report,
            sweep: SweepGrid::default(),
            suites: Vec::new(),
            trials: None,
        }
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::input(format!("config: {e}")))
    }

    /// SHA-256 of the TOML form.
    pub fn digest(&self) -> String {
        digest_text(&self.to_toml())
    }

    fn streams(&self) -> SeedStream {
        SeedStream::new(self.seed)
    }

    pub fn threshold(&self, n: usize) -> usize {
        self.d
            .unwrap_or_else(|| suggested_threshold(n, self.eps, self.delta, self.c))
    }

    pub fn partition_mode(&self) -> PartitionMode {
        match self.partitions {
            ModeSpec::Exhaustive => PartitionMode::Exhaustive,
            ModeSpec::Balanced => PartitionMode::Balanced,
            ModeSpec::Sample(count) => PartitionMode::Sampled {
                count,
                seed: self.streams().seed("partition"),
            },
        }
    }

    pub fn b_mode(&self) -> Result<BMode> {
        match self.b {
            ModeSpec::Exhaustive => Ok(BMode::Exhaustive),
            ModeSpec::Balanced => Err(Error::input("`balanced` applies to partitions, not b")),
            ModeSpec::Sample(count) => Ok(BMode::Sampled {
                count,
                seed: self.streams().seed("b"),
            }),
        }
    }

    pub fn params(&self) -> RefuteParams {
        RefuteParams {
            ell: self.ell,
            partitions: self.partition_mode(),
            spectral: self.spectral,
            degree_bound: None,
            k_regime: None,
        }
    }

    fn pipeline(&self, command: Command, n: usize) -> Result<Pipeline> {
        Ok(match command {
            Command::Refute2Xor => Pipeline::TwoXor { d: self.threshold(n) },
            Command::Refute3Xor => Pipeline::ThreeXor,
            Command::RefuteEven => Pipeline::EvenQ,
            Command::Combine => Pipeline::Combine { d: self.threshold(n) },
            Command::Sweep | Command::Verify => {
                return Err(Error::input(format!("`{}` is not a pipeline", command.name())))
            }
        })
    }
}

/// A loaded instance: the family and, when the source fixes them, signs.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub family: MatchingFamily,
    pub signs: Option<Vec<i8>>,
    pub ldc: Option<NormalLdc>,
}

/// Parses the family text format, optionally followed by one sign line.
pub fn parse_instance(text: &str) -> Result<(MatchingFamily, Option<Vec<i8>>)> {
    let mut lines = Lines::new(text);
    let family = parse_family(&mut lines)?;
    if lines.next_content().is_none() {
        return Ok((family, None));
    }
    let inst = XorInstance::from_text(text)?;
    Ok((family, Some(inst.signs().to_vec())))
}

pub fn load_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    match &cfg.source {
        Source::File { path } => {
            if path.extension().is_some_and(|e| e == "toml") {
                let ldc = load_manifest(path)?;
                return Ok(Instance {
                    label: format!("manifest:{}", path.display()),
                    family: ldc.matchings.clone(),
                    signs: None,
                    ldc: Some(ldc),
                });
            }
            let text = std::fs::read_to_string(path)?;
            let (family, signs) = parse_instance(&text)?;
            Ok(Instance {
                label: format!("file:{}", path.display()),
                family,
                signs,
                ldc: None,
            })
        }
        Source::Fixture { name } => {
            let base = hadamard_fixture(cfg.k)?;
            let (label, ldc) = match name {
                Fixture::Hadamard => ("fixture:hadamard", base),
                Fixture::HadamardPadded => ("fixture:hadamard-padded", pad_to_qplus1(&base)?),
            };
            Ok(Instance {
                label: label.into(),
                family: ldc.matchings.clone(),
                signs: None,
                ldc: Some(ldc),
            })
        }
        Source::Random => {
            let q = cfg.command.arity(cfg.q);
            let mut rng = cfg.streams().rng("instance");
            let per = cfg.per_member.unwrap_or(cfg.n / q.max(1));
            Ok(Instance {
                label: format!("random:{}", cfg.seed),
                family: random_matching_family(&mut rng, cfg.n, q, cfg.k, per)?,
                signs: None,
                ldc: None,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub source: String,
    pub digest: String,
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterInfo {
    pub ell: usize,
    pub d: Option<usize>,
    pub partitions: String,
    pub b: String,
    pub spectral: String,
}

/// Machine-readable result of one refutation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub toolkit_version: String,
    pub config_digest: String,
    pub command: String,
    pub instance: InstanceInfo,
    pub parameters: ParameterInfo,
    pub mean_bound: f64,
    pub mean_value: Option<f64>,
    pub ratio: Option<f64>,
    pub sound: bool,
    pub violations: usize,
    pub summary: BSummary,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn csv_header() -> &'static [&'static str] {
        &[
            "command", "source", "n", "k", "q", "m", "ell", "d", "partitions", "b", "spectral",
            "mean_bound", "mean_value", "ratio", "sound", "violations",
        ]
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.command.clone(),
            self.instance.source.clone(),
            self.instance.n.to_string(),
            self.instance.k.to_string(),
            self.instance.q.to_string(),
            self.instance.m.to_string(),
            self.parameters.ell.to_string(),
            self.parameters.d.map(|d| d.to_string()).unwrap_or_default(),
            self.parameters.partitions.clone(),
            self.parameters.b.clone(),
            self.parameters.spectral.clone(),
            self.mean_bound.to_string(),
            opt(self.mean_value),
            opt(self.ratio),
            self.sound.to_string(),
            self.violations.to_string(),
        ]
    }

    pub fn to_csv(&self) -> String {
        write_csv(Self::csv_header(), std::iter::once(self.csv_fields()))
    }
}

pub(crate) fn write_csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Runs a refutation command on its configured instance.
pub fn run_refute(cfg: &ExperimentConfig) -> Result<Report> {
    let inst = load_instance(cfg)?;
    refute_instance(cfg, cfg.command, &inst)
}

fn refute_instance(cfg: &ExperimentConfig, command: Command, inst: &Instance) -> Result<Report> {
    let fam = &inst.family;
    let pipeline = cfg.pipeline(command, fam.n())?;
    let params = cfg.params();
    let brute = Some(cfg.brute_cap);
    let summary = match &inst.signs {
        Some(b) => certify_signs(pipeline, fam, &params, std::slice::from_ref(b), "fixed", brute)?,
        None => {
            let mode = cfg.b_mode()?;
            let signs = mode.sign_vectors(fam.k())?;
            certify_signs(pipeline, fam, &params, &signs, &mode.label(), brute)?
        }
    };
    let d = match pipeline {
        Pipeline::TwoXor { d } | Pipeline::Combine { d } => Some(d),
        _ => None,
    };
    Ok(Report {
        toolkit_version: TOOLKIT_VERSION.into(),
        config_digest: cfg.digest(),
        command: command.name().into(),
        instance: InstanceInfo {
            source: inst.label.clone(),
            digest: digest_text(&fam.to_text()),
            n: fam.n(),
            k: fam.k(),
            q: fam.q(),
            m: fam.m(),
        },
        parameters: ParameterInfo {
            ell: cfg.ell,
            d,
            partitions: cfg.partitions.to_string(),
            b: summary.b_mode.clone(),
            spectral: cfg.spectral.label().into(),
        },
        mean_bound: summary.mean_bound,
        mean_value: summary.mean_value,
        ratio: summary.ratio(),
        sound: summary.all_sound,
        violations: summary.violations,
        summary,
    })
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub seed: usize,
    pub m: Option<usize>,
    pub mean_bound: Option<f64>,
    pub mean_value: Option<f64>,
    pub ratio: Option<f64>,
    pub sound: Option<bool>,
    pub wall_ms: f64,
    /// `ok`, or the error that stopped this point.
    pub status: String,
}

pub const SWEEP_HEADER: [&str; 10] = [
    "n", "k", "seed", "m", "mean_bound", "mean_value", "ratio", "sound", "wall_ms", "status",
];

impl SweepRow {
    fn fields(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.seed.to_string(),
            self.m.map(|m| m.to_string()).unwrap_or_default(),
            f(self.mean_bound),
            f(self.mean_value),
            f(self.ratio),
            self.sound.map(|s| s.to_string()).unwrap_or_default(),
            format!("{:.3}", self.wall_ms),
            self.status.clone(),
        ]
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    write_csv(&SWEEP_HEADER, rows.iter().map(SweepRow::fields))
}

/// Runs the grid `n_values x k_values x seeds`, rows in grid order. A
/// failing point records its error in `status` and the sweep continues.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let grid = &cfg.sweep;
    let command = grid.pipeline;
    cfg.pipeline(command, 1)?;
    let points: Vec<(usize, usize, usize)> = grid
        .n_values
        .iter()
        .flat_map(|&n| {
            grid.k_values
                .iter()
                .flat_map(move |&k| (0..grid.seeds).map(move |s| (n, k, s)))
        })
        .collect();
    let root = cfg.streams();
    Ok(points
        .into_par_iter()
        .map(|(n, k, s)| {
            let start = Instant::now();
            let point = ExperimentConfig {
                command,
                source: Source::Random,
                n,
                k,
                seed: root.seed(&format!("point/{n}/{k}/{s}")),
                ..cfg.clone()
            };
            let res = load_instance(&point).and_then(|inst| refute_instance(&point, command, &inst));
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            match res {
                Ok(r) => SweepRow {
                    n,
                    k,
                    seed: s,
                    m: Some(r.instance.m),
                    mean_bound: Some(r.mean_bound),
                    mean_value: r.mean_value,
                    ratio: r.ratio,
                    sound: Some(r.sound),
                    wall_ms,
                    status: "ok".into(),
                },
                Err(e) => SweepRow {
                    n,
                    k,
                    seed: s,
                    m: None,
                    mean_bound: None,
                    mean_value: None,
                    ratio: None,
                    sound: None,
                    wall_ms,
                    status: e.to_string(),
                },
            }
        })
        .collect())
}

/// Result of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub toolkit_version: String,
    pub config_digest: String,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        write_csv(
            &["suite", "passed", "trials", "checks", "failures"],
            self.suites.iter().map(|s| {
                vec![
                    s.name.clone(),
                    s.passed().to_string(),
                    s.trials.to_string(),
                    s.checks.to_string(),
                    s.failures.len().to_string(),
                ]
            }),
        )
    }
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let selected = cfg
        .suites
        .iter()
        .map(|s| Suite::parse(s))
        .collect::<Result<Vec<_>>>()?;
    let suites = run_suites(&selected, cfg.seed, cfg.trials);
    Ok(VerifyReport {
        toolkit_version: TOOLKIT_VERSION.into(),
        config_digest: cfg.digest(),
        seed: cfg.seed,
        passed: suites.iter().all(SuiteResult::passed),
        suites,
    })
}
