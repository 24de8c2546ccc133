//! Binary codes and normal-form LDC fixtures: generator-matrix codes,
//! tabulated black-box codes, the Hadamard fixture, arity padding, bias
//! verification, and the XOR instance family `Psi_b`.

mod alphabet;
mod wldc;

pub use alphabet::{
    alphabet_reduce, two_bit_fixture, AlphabetReduction, CharacterChoice, GeneralAlphabetCode,
};
pub use wldc::{gkst_check, wldc_reduction, ReducedCode, VerifiedWldc, WldcParams, WldcReduction};

use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, MatchingFamily, Vertex};
use crate::xor::XorInstance;

/// Largest message length for exhaustive enumeration over messages.
pub const EXACT_K_CAP: usize = 16;

/// Linear code over GF(2) stored by columns: bit `i` of `columns[v]` is
/// the generator entry `G[i][v]`, so `encode(b)_v = <b, columns[v]>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCode {
    k: usize,
    columns: Vec<u64>,
}

impl LinearCode {
    pub fn new(k: usize, columns: Vec<u64>) -> Result<Self> {
        if k == 0 || k > 64 {
            return Err(Error::input(format!("message length k={k} must be in 1..=64")));
        }
        let mask = low_bits(k);
        if columns.iter().any(|&c| c & !mask != 0) {
            return Err(Error::input("a column uses bits beyond k"));
        }
        Ok(Self { k, columns })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[u64] {
        &self.columns
    }

    pub fn column(&self, v: usize) -> u64 {
        self.columns[v]
    }

    /// Encodes the message whose bit `i` is bit `i` of `msg`.
    pub fn encode(&self, msg: u64) -> Vec<bool> {
        self.columns
            .iter()
            .map(|&c| (c & msg).count_ones() % 2 == 1)
            .collect()
    }

    /// Generator matrix as `k` lines of `n` characters `0`/`1`.
    pub fn to_text(&self) -> String {
        (0..self.k)
            .map(|i| {
                let row: String = self
                    .columns
                    .iter()
                    .map(|&c| if c >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                row + "\n"
            })
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let Some(&(_, first)) = rows.first() else {
            return Err(Error::parse(1, "empty generator matrix"));
        };
        let n = first.len();
        let mut columns = vec![0u64; n];
        for (i, &(no, row)) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::parse(no, format!("row has {} bits, expected {n}", row.len())));
            }
            for (v, ch) in row.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => columns[v] |= 1 << i,
                    other => {
                        return Err(Error::parse(no, format!("unexpected character `{other}`")))
                    }
                }
            }
        }
        Self::new(rows.len(), columns).map_err(|e| Error::parse(1, e.to_string()))
    }
}

pub(crate) fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// A code given by its full codeword table, one entry per message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCode {
    k: usize,
    n: usize,
    words: Vec<Vec<bool>>,
}

impl TableCode {
    pub fn new(k: usize, n: usize, words: Vec<Vec<bool>>) -> Result<Self> {
        if k > EXACT_K_CAP {
            return Err(Error::capacity("k for tabulated codes", k, EXACT_K_CAP));
        }
        if words.len() != 1 << k || words.iter().any(|w| w.len() != n) {
            return Err(Error::input("codeword table must have 2^k words of length n"));
        }
        Ok(Self { k, n, words })
    }

    /// Tabulates an arbitrary encoder.
    pub fn from_fn(k: usize, n: usize, f: impl Fn(u64) -> Vec<bool> + Sync + Send) -> Result<Self> {
        if k > EXACT_K_CAP {
            return Err(Error::capacity("k for tabulated codes", k, EXACT_K_CAP));
        }
        let words = (0..1u64 << k).into_par_iter().map(f).collect();
        Self::new(k, n, words)
    }

    pub fn encode(&self, msg: u64) -> &[bool] {
        &self.words[msg as usize]
    }
}

/// Either a linear code or a tabulated black-box encoder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CodeSource {
    Linear(LinearCode),
    Table(TableCode),
}

impl CodeSource {
    pub fn k(&self) -> usize {
        match self {
            CodeSource::Linear(c) => c.k,
            CodeSource::Table(t) => t.k,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CodeSource::Linear(c) => c.n(),
            CodeSource::Table(t) => t.n,
        }
    }

    pub fn encode(&self, msg: u64) -> Vec<bool> {
        match self {
            CodeSource::Linear(c) => c.encode(msg),
            CodeSource::Table(t) => t.encode(msg).to_vec(),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearCode> {
        match self {
            CodeSource::Linear(c) => Some(c),
            CodeSource::Table(_) => None,
        }
    }
}

/// A code with decoding matchings `H_1..H_k` and bias parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalLdc {
    pub code: CodeSource,
    pub matchings: MatchingFamily,
    pub epsilon: f64,
    pub delta: f64,
    /// Weak mode only requires `sum |H_i| >= delta n k`.
    pub weak: bool,
}

impl NormalLdc {
    pub fn new(
        code: CodeSource,
        matchings: MatchingFamily,
        epsilon: f64,
        delta: f64,
        weak: bool,
    ) -> Result<Self> {
        if code.k() != matchings.k() || code.n() != matchings.n() {
            return Err(Error::input(format!(
                "code is k={}, n={} but matchings are k={}, n={}",
                code.k(),
                code.n(),
                matchings.k(),
                matchings.n()
            )));
        }
        for (name, v) in [("epsilon", epsilon), ("delta", delta)] {
            if !(v > 0.0 && v <= 0.5) {
                return Err(Error::input(format!("{name}={v} must lie in (0, 1/2]")));
            }
        }
        Ok(Self {
            code,
            matchings,
            epsilon,
            delta,
            weak,
        })
    }

    pub fn k(&self) -> usize {
        self.matchings.k()
    }

    pub fn n(&self) -> usize {
        self.matchings.n()
    }

    pub fn q(&self) -> usize {
        self.matchings.q()
    }

    /// Whether the matchings meet the size requirement.
    pub fn size_ok(&self) -> bool {
        let n = self.n() as f64;
        if self.weak {
            self.matchings.m() as f64 >= self.delta * n * self.k() as f64 - 1e-9
        } else {
            self.matchings
                .members()
                .iter()
                .all(|h| h.len() as f64 >= self.delta * n - 1e-9)
        }
    }
}

/// Manifest tying a generator matrix and a matching family together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdcManifest {
    /// Generator file, relative to the manifest.
    pub generator: PathBuf,
    /// Hypergraph family file, relative to the manifest.
    pub matchings: PathBuf,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub weak: bool,
}

/// Reads a manifest and the files it references.
pub fn load_manifest(path: &Path) -> Result<NormalLdc> {
    let text = std::fs::read_to_string(path)?;
    let manifest: LdcManifest =
        toml::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let code = LinearCode::from_text(&std::fs::read_to_string(dir.join(&manifest.generator))?)?;
    let fam = MatchingFamily::from_text(&std::fs::read_to_string(dir.join(&manifest.matchings))?)?;
    NormalLdc::new(
        CodeSource::Linear(code),
        fam,
        manifest.epsilon,
        manifest.delta,
        manifest.weak,
    )
}

/// Writes `<stem>.toml`, `<stem>.gen` and `<stem>.hg` into `dir`.
pub fn save_manifest(ldc: &NormalLdc, dir: &Path, stem: &str) -> Result<PathBuf> {
    let code = ldc
        .code
        .as_linear()
        .ok_or_else(|| Error::Unsupported("only linear codes have a manifest form".into()))?;
    std::fs::create_dir_all(dir)?;
    let manifest = LdcManifest {
        generator: format!("{stem}.gen").into(),
        matchings: format!("{stem}.hg").into(),
        epsilon: ldc.epsilon,
        delta: ldc.delta,
        weak: ldc.weak,
    };
    std::fs::write(dir.join(&manifest.generator), code.to_text())?;
    std::fs::write(dir.join(&manifest.matchings), ldc.matchings.to_text())?;
    let path = dir.join(format!("{stem}.toml"));
    let text = toml::to_string(&manifest).map_err(|e| Error::input(e.to_string()))?;
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Hadamard code on `n = 2^k` coordinates with `H_i = {{a, a ^ e_i}}`.
pub fn hadamard_fixture(k: usize) -> Result<NormalLdc> {
    if k == 0 || k > 12 {
        return Err(Error::capacity("k for the Hadamard fixture", k, 12));
    }
    let n = 1usize << k;
    let code = LinearCode::new(k, (0..n as u64).collect())?;
    let members = (0..k)
        .map(|i| {
            let edges = (0..n as Vertex)
                .filter(|a| a >> i & 1 == 0)
                .map(|a| vec![a, a | 1 << i])
                .collect();
            Hypergraph::matching(n, 2, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    NormalLdc::new(CodeSource::Linear(code), MatchingFamily::new(members)?, 0.5, 0.5, false)
}

/// Appends `n` constant-zero coordinates and extends every clause of
/// `H_i` with its own padding coordinate `n + (position of C in H_i)`.
pub fn pad_to_qplus1(ldc: &NormalLdc) -> Result<NormalLdc> {
    let n = ldc.n();
    if ldc.matchings.members().iter().any(|h| h.len() > n) {
        return Err(Error::input("some |H_i| exceeds n; padding cannot be injective"));
    }
    let members = ldc
        .matchings
        .members()
        .iter()
        .map(|h| {
            let edges = h
                .edges()
                .iter()
                .enumerate()
                .map(|(idx, e)| {
                    let mut e = e.clone();
                    e.push((n + idx) as Vertex);
                    e
                })
                .collect();
            Hypergraph::matching(2 * n, h.q() + 1, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    let code = match &ldc.code {
        CodeSource::Linear(c) => {
            let mut cols = c.columns.clone();
            cols.extend(std::iter::repeat_n(0, n));
            CodeSource::Linear(LinearCode::new(c.k, cols)?)
        }
        CodeSource::Table(t) => CodeSource::Table(TableCode::new(
            t.k,
            2 * n,
            t.words
                .iter()
                .map(|w| w.iter().copied().chain(std::iter::repeat_n(false, n)).collect())
                .collect(),
        )?),
    };
    NormalLdc::new(
        code,
        MatchingFamily::new(members)?,
        ldc.epsilon,
        ldc.delta / 2.0,
        ldc.weak,
    )
}

/// Bias `Pr_b[b_i = xor of C(b)_v over C]` of one clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseBias {
    pub i: usize,
    pub clause: usize,
    pub bias: f64,
    /// Exact value when every message was enumerated.
    pub exact: Option<Ratio<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub clauses: Vec<ClauseBias>,
    pub min_bias: f64,
    pub size_ok: bool,
    pub pass: bool,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum VerifyMode {
    Exact,
    Sampled { count: usize, seed: u64 },
}

/// Per-clause decoding bias; passes iff every bias is at least
/// `1/2 + epsilon` and the size requirement holds.
pub fn verify_normal(ldc: &NormalLdc, mode: VerifyMode) -> Result<BiasReport> {
    let k = ldc.k();
    let messages: Vec<u64> = match mode {
        VerifyMode::Exact => {
            if k > EXACT_K_CAP {
                return Err(Error::capacity("k for exact verification", k, EXACT_K_CAP));
            }
            (0..1u64 << k).collect()
        }
        VerifyMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::input("sampled verification needs count >= 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| rng.random::<u64>() & low_bits(k)).collect()
        }
    };
    let words: Vec<Vec<bool>> = messages.par_iter().map(|&b| ldc.code.encode(b)).collect();
    let clauses: Vec<(usize, usize, &Vec<Vertex>)> = ldc
        .matchings
        .members()
        .iter()
        .enumerate()
        .flat_map(|(i, h)| h.edges().iter().enumerate().map(move |(c, e)| (i, c, e)))
        .collect();
    let total = messages.len() as u64;
    let exact = matches!(mode, VerifyMode::Exact);
    let report: Vec<ClauseBias> = clauses
        .par_iter()
        .map(|&(i, clause, e)| {
            let hits = messages
                .iter()
                .zip(&words)
                .filter(|(&b, w)| {
                    let parity = e.iter().fold(false, |acc, &v| acc ^ w[v as usize]);
                    parity == (b >> i & 1 == 1)
                })
                .count() as u64;
            ClauseBias {
                i,
                clause,
                bias: hits as f64 / total as f64,
                exact: exact.then(|| Ratio::new(hits, total)),
            }
        })
        .collect();
    let min_bias = report.iter().map(|c| c.bias).fold(f64::INFINITY, f64::min);
    let size_ok = ldc.size_ok();
    let pass = size_ok && report.iter().all(|c| c.bias >= 0.5 + ldc.epsilon - 1e-12);
    Ok(BiasReport {
        clauses: report,
        min_bias: if min_bias.is_finite() { min_bias } else { 1.0 },
        size_ok,
        pass,
        exact,
    })
}

/// Message bit `i` set maps to sign `-1`.
pub fn message_to_signs(k: usize, msg: u64) -> Vec<i8> {
    crate::xor::signs_from_mask(k, msg)
}

/// Codeword as a `+-1` assignment (`0 -> +1`, `1 -> -1`).
pub fn codeword_assignment(ldc: &NormalLdc, msg: u64) -> crate::xor::Assignment {
    crate::xor::Assignment::from_bits(&ldc.code.encode(msg))
}

/// `Psi_b`: groups are the matchings, signs are `b`.
pub fn psi_from_ldc(ldc: &NormalLdc, signs: &[i8]) -> Result<XorInstance> {
    XorInstance::from_family(&ldc.matchings, signs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_k1() {
        let h = hadamard_fixture(1).unwrap();
        assert_eq!(h.n(), 2);
        assert_eq!(h.matchings.member(0).edges(), &[vec![0, 1]]);
        assert_eq!(h.code.encode(1), vec![false, true]);
    }

    #[test]
    fn hadamard_sizes_and_bias() {
        let h = hadamard_fixture(3).unwrap();
        assert!(h.matchings.members().iter().all(|m| m.len() == 4));
        let r = verify_normal(&h, VerifyMode::Exact).unwrap();
        assert!(r.pass);
        assert!(r.clauses.iter().all(|c| c.exact == Some(Ratio::from_integer(1))));
    }

    #[test]
    fn wrong_index_is_balanced() {
        let h = hadamard_fixture(3).unwrap();
        // clause of H_0 relabelled as decoding bit 1
        let mut members: Vec<Hypergraph> = h.matchings.members().to_vec();
        members.swap(0, 1);
        let bad = NormalLdc::new(h.code.clone(), MatchingFamily::new(members).unwrap(), 0.5, 0.5, false)
            .unwrap();
        let r = verify_normal(&bad, VerifyMode::Exact).unwrap();
        assert!(!r.pass);
        assert!(r.clauses.iter().filter(|c| c.i < 2).all(|c| c.bias == 0.5));
    }

    #[test]
    fn padding_preserves_sizes_and_exactness() {
        let h = hadamard_fixture(2).unwrap();
        let p = pad_to_qplus1(&h).unwrap();
        assert_eq!((p.n(), p.q()), (8, 3));
        assert_eq!(p.delta, 0.25);
        for i in 0..2 {
            assert_eq!(p.matchings.member(i).len(), h.matchings.member(i).len());
        }
        for msg in 0..4 {
            assert!(p.code.encode(msg)[4..].iter().all(|&b| !b));
        }
        assert!(verify_normal(&p, VerifyMode::Exact).unwrap().pass);
    }

    #[test]
    fn generator_round_trip() {
        let c = LinearCode::new(3, vec![0b101, 0b010, 0, 0b111]).unwrap();
        let t = c.to_text();
        assert_eq!(t, "1001\n0101\n1001\n");
        assert_eq!(LinearCode::from_text(&t).unwrap(), c);
        assert!(LinearCode::from_text("10\n1\n").is_err());
    }

    #[test]
    fn psi_is_satisfied_by_codeword() {
        let p = pad_to_qplus1(&hadamard_fixture(3).unwrap()).unwrap();
        for msg in 0..8 {
            let inst = psi_from_ldc(&p, &message_to_signs(3, msg)).unwrap();
            let v = inst.evaluate(&codeword_assignment(&p, msg)).unwrap();
            assert_eq!(v, Ratio::from_integer(1));
        }
    }
}
