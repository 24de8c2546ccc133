//! Certificate pipelines: 3-XOR through the Cauchy-Schwarz step and the
//! `[n] x [2]` Kikuchi matrix, even-arity refutation, the combination of the
//! decomposition with both refuters, averaging over sign vectors, and the
//! binomial-ratio sandwich.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::hypergraph::{decompose, BipartiteFamily, DecompositionResult, MatchingFamily};
use crate::kikuchi::{build_even_kikuchi, check_k_regime, per_clause_counts, KikuchiMatrix, PartitionKikuchi};
use crate::spectral::{g_b_brute_force, refute_2xor, spectral_norm_upper, SpectralMode};
use crate::xor::{signs_from_mask, PartitionMode, PartitionSet, XorInstance, DEFAULT_BRUTE_FORCE_CAP};

/// Lowercase hex SHA-256 of a text document.
pub fn digest_text(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// A numeric upper bound with the terms that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefutationCertificate {
    /// The bounded quantity: `f_b`, `g_b` or `psi_b`.
    pub target: String,
    pub instance_digest: String,
    pub bound: f64,
    pub components: Vec<(String, f64)>,
    pub partition_mode: String,
    pub spectral_method: String,
    /// False when a sampled expectation replaced an exact one.
    pub sound: bool,
    /// Relative floating-point tolerance granted to the spectral step.
    pub slack: f64,
    pub formula: String,
}

impl RefutationCertificate {
    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|c| c.0 == name).map(|c| c.1)
    }

    /// `bound >= value` up to the recorded slack.
    pub fn covers(&self, value: f64) -> bool {
        self.bound * (1.0 + self.slack) + 1e-9 >= value
    }
}

fn family_digest(family: &MatchingFamily, signs: &[i8]) -> Result<String> {
    Ok(digest_text(&XorInstance::from_family(family, signs)?.to_text()))
}

/// Parameters shared by the refutation pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefuteParams {
    pub ell: usize,
    pub partitions: PartitionMode,
    pub spectral: SpectralMode,
    /// When set, every pair degree must be at most this value.
    pub degree_bound: Option<usize>,
    /// When set, enforces `k <= n / c'`.
    pub k_regime: Option<f64>,
}

impl Default for RefuteParams {
    fn default() -> Self {
        Self {
            ell: 2,
            partitions: PartitionMode::Exhaustive,
            spectral: SpectralMode::DenseExact,
            degree_bound: None,
            k_regime: None,
        }
    }
}

/// Sign-independent precomputation for [`refute_3xor`]: one
/// [`PartitionKikuchi`] per partition.
#[derive(Debug, Clone)]
pub struct ThreeXorPlan {
    family: MatchingFamily,
    params: RefuteParams,
    set: PartitionSet,
    parts: Vec<PartitionKikuchi>,
}

impl ThreeXorPlan {
    pub fn new(family: &MatchingFamily, params: &RefuteParams) -> Result<Self> {
        family.require_q(3, "3-XOR refutation")?;
        if let Some(d) = params.degree_bound {
            if let Some(((u, v), deg)) = family.max_pair_degree() {
                if deg > d {
                    return Err(Error::input(format!(
                        "pair {{{u}, {v}}} has degree {deg} > d={d}"
                    )));
                }
            }
        }
        if let Some(c) = params.k_regime {
            check_k_regime(family.n(), family.k(), c)?;
        }
        let set = PartitionSet::new(params.partitions, family.k())?;
        let parts = set
            .partitions
            .par_iter()
            .map(|p| PartitionKikuchi::new(family, p, params.ell))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            family: family.clone(),
            params: *params,
            set,
            parts,
        })
    }

    pub fn family(&self) -> &MatchingFamily {
        &self.family
    }

    pub fn partitions(&self) -> &[PartitionKikuchi] {
        &self.parts
    }

    /// Certificate on `val(f_b) = max_x f_b(x)`, unnormalized.
    pub fn certify(&self, signs: &[i8]) -> Result<RefutationCertificate> {
        let fam = &self.family;
        let (n, m) = (fam.n() as f64, fam.m() as f64);
        let terms = self
            .parts
            .par_iter()
            .map(|pk| {
                let a = pk.assemble(signs)?;
                let (norm, slack) = if a.nnz() == 0 {
                    (0.0, 0.0)
                } else {
                    let sb = spectral_norm_upper(&a, self.params.spectral)?;
                    (sb.value, sb.slack)
                };
                let ratio = pk.dimension as f64 / pk.target as f64;
                Ok((ratio * norm, pk.degenerate.len() as f64, slack))
            })
            .collect::<Result<Vec<_>>>()?;
        let count = terms.len() as f64;
        let spectral_mean = terms.iter().map(|t| t.0).sum::<f64>() / count;
        let degenerate_mean = terms.iter().map(|t| t.1).sum::<f64>() / count;
        let slack = terms.iter().map(|t| t.2).fold(0.0, f64::max);
        let p = self.set.cross_probability;
        let cross = if *p.numer() == 0 {
            0.0
        } else {
            n * *p.denom() as f64 / *p.numer() as f64
        };
        let trivial = 3.0 * n * m;
        let rhs = trivial + cross * (spectral_mean + degenerate_mean);
        Ok(RefutationCertificate {
            target: "f_b".into(),
            instance_digest: family_digest(fam, signs)?,
            bound: (rhs.max(0.0) / 9.0).sqrt(),
            components: vec![
                ("trivial_3nm".into(), trivial),
                ("n_over_p".into(), cross),
                ("spectral_expectation".into(), spectral_mean),
                ("degenerate_expectation".into(), degenerate_mean),
                ("partitions".into(), count),
            ],
            partition_mode: self.params.partitions.label(),
            spectral_method: self.params.spectral.label().into(),
            sound: self.set.exact,
            slack,
            formula: "sqrt((3nm + (n/p) * (E[(N/D) ||A||] + E[degenerate])) / 9)".into(),
        })
    }
}

/// One-shot 3-XOR certificate on `val(f_b)`.
pub fn refute_3xor(
    family: &MatchingFamily,
    signs: &[i8],
    params: &RefuteParams,
) -> Result<RefutationCertificate> {
    ThreeXorPlan::new(family, params)?.certify(signs)
}

/// Sign-independent data for [`refute_even_q`]: equalized `A_i` per member.
#[derive(Debug, Clone)]
pub struct EvenQPlan {
    family: MatchingFamily,
    params: RefuteParams,
    /// `N = C(n, l)`.
    pub dimension: usize,
    /// Common per-clause count `D`.
    pub target: usize,
    /// Per-clause counts of each member before equalization.
    pub member_counts: Vec<Vec<usize>>,
    pub members: Vec<KikuchiMatrix>,
}

impl EvenQPlan {
    pub fn new(family: &MatchingFamily, params: &RefuteParams) -> Result<Self> {
        if !family.q().is_multiple_of(2) || family.q() == 0 {
            return Err(Error::input(format!(
                "even-arity refutation needs even q, got q={}",
                family.q()
            )));
        }
        if family.m() == 0 {
            return Err(Error::input("instance has no constraints (m = 0)"));
        }
        let raw = family
            .members()
            .par_iter()
            .map(|h| build_even_kikuchi(h, params.ell))
            .collect::<Result<Vec<_>>>()?;
        let member_counts: Vec<Vec<usize>> = raw
            .iter()
            .zip(family.members())
            .map(|(a, h)| per_clause_counts(a, h.len()))
            .collect();
        let target = member_counts.iter().flatten().copied().min().unwrap_or(0);
        if target == 0 {
            return Err(Error::Infeasible(format!(
                "some clause has no valid index pairs at n={}, q={}, l={}",
                family.n(),
                family.q(),
                params.ell
            )));
        }
        let members = raw
            .iter()
            .map(|a| equalize_per_clause(a, target))
            .collect::<Result<Vec<_>>>()?;
        let dimension = raw[0].rows();
        Ok(Self {
            family: family.clone(),
            params: *params,
            dimension,
            target,
            member_counts,
            members,
        })
    }

    /// `A = sum_i b_i A_i`.
    pub fn assemble(&self, signs: &[i8]) -> Result<KikuchiMatrix> {
        if signs.len() != self.members.len() {
            return Err(Error::input("sign vector length does not match k"));
        }
        let terms: Vec<(i64, &KikuchiMatrix)> =
            signs.iter().map(|&b| b as i64).zip(&self.members).collect();
        KikuchiMatrix::linear_combination(&terms)
    }

    /// Certificate on `val(psi_b)`, normalized.
    pub fn certify(&self, signs: &[i8]) -> Result<RefutationCertificate> {
        let a = self.assemble(signs)?;
        let sb = spectral_norm_upper(&a, self.params.spectral)?;
        let scale = self.dimension as f64 / (self.family.m() as f64 * self.target as f64);
        Ok(RefutationCertificate {
            target: "psi_b".into(),
            instance_digest: family_digest(&self.family, signs)?,
            bound: scale * sb.value,
            components: vec![
                ("N".into(), self.dimension as f64),
                ("m".into(), self.family.m() as f64),
                ("D".into(), self.target as f64),
                ("spectral_norm".into(), sb.value),
            ],
            partition_mode: "none".into(),
            spectral_method: self.params.spectral.label().into(),
            sound: true,
            slack: sb.slack,
            formula: "N / (m D) * ||A||".into(),
        })
    }
}

/// Keeps, for every clause, its `target` entries smallest in `(row, col)`.
fn equalize_per_clause(a: &KikuchiMatrix, target: usize) -> Result<KikuchiMatrix> {
    let prov = a
        .provenance()
        .ok_or_else(|| Error::ContractViolation("even-arity matrix lost provenance".into()))?;
    let mut seen: std::collections::BTreeMap<usize, usize> = Default::default();
    let mut keep = Vec::new();
    for (&(r, c, w), ids) in a.entries().iter().zip(prov) {
        // rows carry at most one clause, so entries never merge
        let id = ids[0];
        let used = seen.entry(id).or_insert(0);
        if *used < target {
            *used += 1;
            keep.push(((r, c, w), id));
        }
    }
    KikuchiMatrix::from_tagged(a.rows(), a.cols(), keep)
}

/// One-shot even-arity certificate on `val(psi_b)`.
pub fn refute_even_q(
    family: &MatchingFamily,
    signs: &[i8],
    params: &RefuteParams,
) -> Result<RefutationCertificate> {
    EvenQPlan::new(family, params)?.certify(signs)
}

/// Decomposition plus both refuters, reusable across sign vectors.
#[derive(Debug, Clone)]
pub struct CombinePlan {
    family: MatchingFamily,
    params: RefuteParams,
    pub decomposition: DecompositionResult,
    pub bipartite: BipartiteFamily,
    residual: ThreeXorPlan,
}

impl CombinePlan {
    pub fn new(family: &MatchingFamily, d: usize, params: &RefuteParams) -> Result<Self> {
        family.require_q(3, "the combined refutation")?;
        if family.m() == 0 {
            return Err(Error::input("instance has no constraints (m = 0)"));
        }
        let decomposition = decompose(family, d)?;
        let residual_params = RefuteParams {
            degree_bound: Some(d),
            ..*params
        };
        let residual = ThreeXorPlan::new(&decomposition.residual, &residual_params)?;
        Ok(Self {
            family: family.clone(),
            params: *params,
            bipartite: decomposition.bipartite_family(),
            decomposition,
            residual,
        })
    }

    /// Certificate on `val(psi_b)` as `(bound_f + bound_g) / m`.
    pub fn certify(&self, signs: &[i8]) -> Result<RefutationCertificate> {
        let f = self.residual.certify(signs)?;
        let g = if self.bipartite.right == 0 {
            None
        } else {
            Some(refute_2xor(&self.bipartite, signs, self.params.spectral)?)
        };
        let bound_g = g.as_ref().map_or(0.0, |c| c.bound);
        let m = self.family.m() as f64;
        Ok(RefutationCertificate {
            target: "psi_b".into(),
            instance_digest: family_digest(&self.family, signs)?,
            bound: (f.bound + bound_g) / m,
            components: vec![
                ("bound_f".into(), f.bound),
                ("bound_g".into(), bound_g),
                ("m".into(), m),
                ("heavy_pairs".into(), self.decomposition.heavy_pairs.len() as f64),
                ("d".into(), self.decomposition.threshold as f64),
            ],
            partition_mode: f.partition_mode.clone(),
            spectral_method: f.spectral_method.clone(),
            sound: f.sound && g.as_ref().is_none_or(|c| c.sound),
            slack: f.slack.max(g.as_ref().map_or(0.0, |c| c.slack)),
            formula: "(bound_f + bound_g) / m".into(),
        })
    }
}

/// One-shot combined certificate on `val(psi_b)`.
pub fn combine_theorem1(
    family: &MatchingFamily,
    signs: &[i8],
    d: usize,
    params: &RefuteParams,
) -> Result<RefutationCertificate> {
    CombinePlan::new(family, d, params)?.certify(signs)
}

/// Which certificate to average over `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "pipeline")]
pub enum Pipeline {
    /// 2-XOR refutation of the bipartite part of `decompose(d)`; bound on
    /// the unnormalized `val(g_b)`.
    TwoXor { d: usize },
    ThreeXor,
    EvenQ,
    Combine { d: usize },
}

impl Pipeline {
    pub fn label(&self) -> &'static str {
        match self {
            Pipeline::TwoXor { .. } => "refute-2xor",
            Pipeline::ThreeXor => "refute-3xor",
            Pipeline::EvenQ => "refute-even",
            Pipeline::Combine { .. } => "combine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum BMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

impl BMode {
    pub fn label(&self) -> String {
        match self {
            BMode::Exhaustive => "exhaustive".into(),
            BMode::Sampled { count, .. } => format!("sample:{count}"),
        }
    }

    pub fn sign_vectors(&self, k: usize) -> Result<Vec<Vec<i8>>> {
        match *self {
            BMode::Exhaustive => {
                if k > 16 {
                    return Err(Error::capacity("k for exhaustive sign vectors", k, 16));
                }
                Ok((0..1u64 << k).map(|m| signs_from_mask(k, m)).collect())
            }
            BMode::Sampled { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..count)
                    .map(|_| (0..k).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect())
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BRow {
    pub signs: Vec<i8>,
    /// Certified bound on the pipeline's target, normalized like `value`.
    pub bound: f64,
    /// Brute-force value of the target, when within the cap.
    pub value: Option<f64>,
    pub sound: bool,
    pub certificate: RefutationCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSummary {
    pub pipeline: Pipeline,
    pub b_mode: String,
    pub rows: Vec<BRow>,
    pub mean_bound: f64,
    pub mean_value: Option<f64>,
    pub all_sound: bool,
    /// Rows whose sound bound falls below the brute-force value.
    pub violations: usize,
}

impl BSummary {
    /// True when `E_b[bound] < 2 eps`, which a genuine LDC never allows.
    pub fn contradicts(&self, eps: f64) -> bool {
        self.mean_bound < 2.0 * eps
    }

    /// `E_b[bound] / E_b[value]` when values exist and are positive.
    pub fn ratio(&self) -> Option<f64> {
        self.mean_value.filter(|&v| v > 0.0).map(|v| self.mean_bound / v)
    }
}

/// Bounds on `val(psi_b)` (or `val(g_b)` for [`Pipeline::TwoXor`]) averaged
/// over sign vectors, with brute-force values when `n <= brute_cap`.
pub fn expectation_over_b(
    pipeline: Pipeline,
    family: &MatchingFamily,
    params: &RefuteParams,
    b_mode: BMode,
    brute_cap: Option<usize>,
) -> Result<BSummary> {
    let signs = b_mode.sign_vectors(family.k())?;
    certify_signs(pipeline, family, params, &signs, &b_mode.label(), brute_cap)
}

/// Like [`expectation_over_b`] over an explicit list of sign vectors.
pub fn certify_signs(
    pipeline: Pipeline,
    family: &MatchingFamily,
    params: &RefuteParams,
    signs: &[Vec<i8>],
    b_label: &str,
    brute_cap: Option<usize>,
) -> Result<BSummary> {
    let m = family.m();
    if m == 0 {
        return Err(Error::input("instance has no constraints (m = 0)"));
    }
    if signs.iter().any(|b| b.len() != family.k()) {
        return Err(Error::input("sign vector length does not match k"));
    }
    enum Plan {
        Two(BipartiteFamily),
        Three(ThreeXorPlan),
        Even(EvenQPlan),
        Combine(CombinePlan),
    }
    let plan = match pipeline {
        Pipeline::TwoXor { d } => {
            family.require_q(3, "the 2-XOR pipeline")?;
            Plan::Two(decompose(family, d)?.bipartite_family())
        }
        Pipeline::ThreeXor => Plan::Three(ThreeXorPlan::new(family, params)?),
        Pipeline::EvenQ => Plan::Even(EvenQPlan::new(family, params)?),
        Pipeline::Combine { d } => Plan::Combine(CombinePlan::new(family, d, params)?),
    };
    let cap = brute_cap.unwrap_or(DEFAULT_BRUTE_FORCE_CAP);
    let with_values = brute_cap.is_some() && family.n() <= cap;
    let rows = signs
        .par_iter()
        .map(|b| {
            let cert = match &plan {
                Plan::Two(bip) => refute_2xor(bip, b, params.spectral)?,
                Plan::Three(p) => {
                    let mut c = p.certify(b)?;
                    c.bound /= m as f64;
                    c
                }
                Plan::Even(p) => p.certify(b)?,
                Plan::Combine(p) => p.certify(b)?,
            };
            let value = if !with_values {
                None
            } else if let Plan::Two(bip) = &plan {
                Some(g_b_brute_force(bip, b, cap)? as f64)
            } else {
                let (v, _) = XorInstance::from_family(family, b)?.brute_force_val(cap)?;
                Some(*v.numer() as f64 / *v.denom() as f64)
            };
            Ok(BRow {
                signs: b.clone(),
                bound: cert.bound,
                value,
                sound: cert.sound,
                certificate: cert,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let count = rows.len().max(1) as f64;
    let violations = rows
        .iter()
        .filter(|r| r.sound && r.value.is_some_and(|v| !r.certificate.covers(v)))
        .count();
    let mean_bound = rows.iter().map(|r| r.bound).sum::<f64>() / count;
    let mean_value = with_values.then(|| rows.iter().filter_map(|r| r.value).sum::<f64>() / count);
    Ok(BSummary {
        pipeline,
        b_mode: b_label.into(),
        all_sound: rows.iter().all(|r| r.sound),
        rows,
        mean_bound,
        mean_value,
        violations,
    })
}

/// Exact `C(n-2q, l-q) / C(n, l)` and the `e^{-3q} (l/n)^q`,
/// `e^{3q} (l/n)^q` sandwich.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialRatio {
    pub n: usize,
    pub ell: usize,
    pub q: usize,
    pub ratio: Ratio<i128>,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

pub fn binomial_ratio(n: usize, ell: usize, q: usize) -> Result<BinomialRatio> {
    if q == 0 || ell < q || 2 * ell > n {
        return Err(Error::input(format!(
            "binomial ratio needs n/2 >= l >= q >= 1, got n={n}, l={ell}, q={q}"
        )));
    }
    let num = binomial(n as i64 - 2 * q as i64, ell as i64 - q as i64);
    let den = binomial(n as i64, ell as i64);
    let to_i = |v: u128| i128::try_from(v).map_err(|_| Error::capacity("binomial size", usize::MAX, usize::MAX));
    let ratio = Ratio::new(to_i(num)?, to_i(den)?);
    let base = (ell as f64 / n as f64).powi(q as i32);
    let lower = (-3.0 * q as f64).exp() * base;
    let upper = (3.0 * q as f64).exp() * base;
    let r = *ratio.numer() as f64 / *ratio.denom() as f64;
    Ok(BinomialRatio {
        n,
        ell,
        q,
        ratio,
        lower,
        upper,
        holds: lower <= r + 1e-12 && r <= upper + 1e-12,
    })
}
