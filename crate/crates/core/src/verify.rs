//! Randomized property suites for the combinatorial lemmas and pipelines.
//! Each suite is deterministic in its seed and reports every failing case.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::hypergraph::{check_decomposition, decompose, MatchingFamily};
use crate::kikuchi::{
    build_b_clause, build_b_owner, build_even_kikuchi, clause_target, counting_condition,
    even_count_lower_bound, half_clauses, lift, per_clause_counts, PartitionKikuchi,
};
use crate::ldc::{
    alphabet_reduce, gkst_check, hadamard_fixture, pad_to_qplus1, two_bit_fixture, verify_normal,
    wldc_reduction, VerifyMode, WldcParams,
};
use crate::random::{random_assignment, random_matching_family, random_signs, SeedStream};
use crate::refuter::{binomial_ratio, EvenQPlan, RefuteParams, CombinePlan, ThreeXorPlan};
use crate::spectral::{g_b_brute_force, khintchine_audit, refute_2xor, SpectralMode};
use crate::xor::{derive_4xor, signs_from_mask, Partition, XorInstance};
use crate::KikuchiMatrix;

/// Selectable suites, in their default run order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Decomposition,
    Counting,
    Degree,
    Identity,
    EvenUniformity,
    Sandwich,
    Khintchine,
    LdcExactness,
    Alphabet,
    Wldc,
    Soundness,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Decomposition,
        Suite::Counting,
        Suite::Degree,
        Suite::Identity,
        Suite::EvenUniformity,
        Suite::Sandwich,
        Suite::Khintchine,
        Suite::LdcExactness,
        Suite::Alphabet,
        Suite::Wldc,
        Suite::Soundness,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Decomposition => "decomposition",
            Suite::Counting => "counting",
            Suite::Degree => "degree",
            Suite::Identity => "identity",
            Suite::EvenUniformity => "even-uniformity",
            Suite::Sandwich => "sandwich",
            Suite::Khintchine => "khintchine",
            Suite::LdcExactness => "ldc",
            Suite::Alphabet => "alphabet",
            Suite::Wldc => "wldc",
            Suite::Soundness => "soundness",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(Suite::name).collect();
                Error::input(format!("unknown suite `{name}`; expected one of {}", names.join(", ")))
            })
    }

    /// Trial count used when the caller does not choose one.
    pub fn default_trials(&self) -> usize {
        match self {
            Suite::Decomposition | Suite::Identity => 200,
            Suite::Counting | Suite::Degree | Suite::EvenUniformity => 100,
            Suite::Sandwich => 1,
            Suite::Khintchine => 4,
            Suite::LdcExactness | Suite::Wldc => 1,
            Suite::Alphabet => 1,
            Suite::Soundness => 100,
        }
    }

    pub fn run(&self, seed: u64, trials: usize) -> SuiteResult {
        let streams = SeedStream::new(seed).child(self.name());
        let mut out = SuiteResult::new(self.name());
        let res = match self {
            Suite::Decomposition => decomposition(&streams, trials, &mut out),
            Suite::Counting => counting(&streams, trials, &mut out),
            Suite::Degree => degree(&streams, trials, &mut out),
            Suite::Identity => identity(&streams, trials, &mut out),
            Suite::EvenUniformity => even_uniformity(&streams, trials, &mut out),
            Suite::Sandwich => sandwich(&mut out),
            Suite::Khintchine => khintchine(&streams, trials, &mut out),
            Suite::LdcExactness => ldc_exactness(&mut out),
            Suite::Alphabet => alphabet(&mut out),
            Suite::Wldc => wldc(&mut out),
            Suite::Soundness => soundness(&streams, trials, &mut out),
        };
        if let Err(e) = res {
            out.fail(format!("suite aborted: {e}"));
        }
        out
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub trials: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            trials: 0,
            checks: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checks > 0
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.failures.push(what);
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{:<16} {} trials={} checks={} failures={}",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.trials,
            self.checks,
            self.failures.len()
        )
    }
}

/// Runs the selected suites (all when `selected` is empty).
pub fn run_suites(selected: &[Suite], seed: u64, trials: Option<usize>) -> Vec<SuiteResult> {
    let list: Vec<Suite> = if selected.is_empty() {
        Suite::ALL.to_vec()
    } else {
        selected.to_vec()
    };
    list.iter()
        .map(|s| s.run(seed, trials.unwrap_or_else(|| s.default_trials())))
        .collect()
}

fn random_family(rng: &mut impl Rng, n: usize, q: usize, k: usize) -> Result<MatchingFamily> {
    let per = rng.random_range(1..=n / q);
    random_matching_family(rng, n, q, k, per)
}

fn random_partition(rng: &mut impl Rng, k: usize) -> Partition {
    Partition::from_mask(k, rng.random::<u64>() & ((1 << k) - 1))
}

fn decomposition(s: &SeedStream, trials: usize, out: &mut SuiteResult) -> Result<()> {
    let mut rng = s.rng("instance");
    for _ in 0..trials {
        let n = rng.random_range(6..=20);
        let k = rng.random_range(1..=5);
        let d = rng.random_range(1..=3);
        let f = random_family(&mut rng, n, 3, k)?;
        let r = decompose(&f, d)?;
        out.trials += 1;
        out.check(check_decomposition(&f, &r).is_ok(), || {
            format!("n={n} k={k} d={d}: {}", check_decomposition(&f, &r).unwrap_err())
        });
        for i in 0..k {
            let (h, hp, g) = (f.member(i).len(), r.residual.member(i).len(), r.bipartite[i].len());
            out.check(h == hp + g, || format!("n={n} k={k} d={d}: |H_{i}|={h} != {hp} + {g}"));
        }
    }
    Ok(())
}

fn counting(s: &SeedStream, trials: usize, out: &mut SuiteResult) -> Result<()> {
    let mut rng = s.rng("instance");
    let ell = 2;
    while out.trials < trials {
        let n = rng.random_range(6..=14);
        let k = rng.random_range(2..=4);
        if !counting_condition(n, k, ell) {
            continue;
        }
        let f = random_family(&mut rng, n, 3, k)?;
        let p = random_partition(&mut rng, k);
        out.trials += 1;
        let derived = derive_4xor(&f, &p)?;
        let target = clause_target(n, ell);
        for i in p.left() {
            let half = half_clauses(&f, &p, i)?;
            for cl in derived.clauses.iter().filter(|c| c.i == i) {
                let b = build_b_clause(n, cl.c, cl.c_prime, ell, Some(&half))?;
                out.check(b.nnz() as u128 >= target, || {
                    format!("n={n} k={k}: clause {cl:?} keeps {} < {target}", b.nnz())
                });
            }
        }
    }
    Ok(())
}

fn degree(s: &SeedStream, trials: usize, out: &mut SuiteResult) -> Result<()> {
    let mut rng = s.rng("instance");
    for _ in 0..trials {
        let n = rng.random_range(6..=14);
        let k = rng.random_range(2..=4);
        let f = random_family(&mut rng, n, 3, k)?;
        let d = f.max_pair_degree().map_or(0, |x| x.1) as i64;
        let p = random_partition(&mut rng, k);
        out.trials += 1;
        for i in p.left() {
            let b = build_b_owner(&f, &p, i, 2)?;
            let worst = b.max_row_l1().max(b.max_col_l1());
            out.check(worst <= 2 * d, || format!("n={n} k={k} i={i}: l1 norm {worst} > 2d = {}", 2 * d));
        }
    }
    Ok(())
}

fn identity(s: &SeedStream, trials: usize, out: &mut SuiteResult) -> Result<()> {
    let mut rng = s.rng("instance");
    let mut attempts = 0;
    while out.trials < trials {
        attempts += 1;
        if attempts > 50 * trials.max(1) {
            out.fail(format!("only {} usable instances in {attempts} attempts", out.trials));
            break;
        }
        let n = rng.random_range(6..=10);
        let k = rng.random_range(2..=4);
        let ell = rng.random_range(2..=3);
        let f = random_family(&mut rng, n, 3, k)?;
        let p = random_partition(&mut rng, k);
        let pk = match PartitionKikuchi::new(&f, &p, ell) {
            Ok(pk) => pk,
            Err(e) if e.is_infeasible() => continue,
            Err(e) => return Err(e),
        };
        if !pk.degenerate.is_empty() {
            continue;
        }
        let b = random_signs(&mut rng, k);
        let x = random_assignment(&mut rng, n);
        out.trials += 1;
        let lhs = derive_4xor(&f, &p)?.evaluate(&b, &x) as i128 * pk.target as i128;
        let rhs = pk.assemble(&b)?.quadratic_form(&lift(&x, ell)?.z)?;
        out.check(lhs == rhs, || format!("n={n} k={k} l={ell}: D f = {lhs}, z^T A z = {rhs}"));
    }
    Ok(())
}

fn even_uniformity(s: &SeedStream, trials: usize, out: &mut SuiteResult) -> Result<()> {
    let mut rng = s.rng("instance");
    for t in 0..trials {
        let q = if t % 2 == 0 { 2 } else { 4 };
        let n = rng.random_range(2 * q..=12);
        let k = rng.random_range(1..=3);
        let ell = rng.random_range(q / 2..=q);
        let f = random_family(&mut rng, n, q, k)?;
        out.trials += 1;
        for (i, h) in f.members().iter().enumerate() {
            let counts = per_clause_counts(&build_even_kikuchi(h, ell)?, h.len());
            let uniform = counts.windows(2).all(|w| w[0] == w[1]);
            out.check(uniform, || format!("n={n} q={q} l={ell} H_{i}: counts {counts:?}"));
            let lb = even_count_lower_bound(n, q, ell, h.len());
            if let Some(&d) = counts.first() {
                out.check(d as i128 >= lb, || format!("n={n} q={q} l={ell} H_{i}: D={d} < {lb}"));
            }
        }
    }
    Ok(())
}

fn sandwich(out: &mut SuiteResult) -> Result<()> {
    for n in 2..=40 {
        for q in 1..=4 {
            for ell in q..=n / 2 {
                let r = binomial_ratio(n, ell, q)?;
                let want = num_rational::Ratio::new(
                    binomial(n as i64 - 2 * q as i64, ell as i64 - q as i64) as i128,
                    binomial(n as i64, ell as i64) as i128,
                );
                out.trials += 1;
                out.check(r.ratio == want, || format!("n={n} l={ell} q={q}: ratio {} != {want}", r.ratio));
                out.check(r.holds, || {
                    format!("n={n} l={ell} q={q}: {} outside [{}, {}]", r.ratio, r.lower, r.upper)
                });
            }
        }
    }
    Ok(())
}

/// Adjacency matrices of `k` random perfect-ish matchings on `[n]`.
pub fn matching_adjacency(rng: &mut impl Rng, n: usize, k: usize) -> Result<Vec<KikuchiMatrix>> {
    let f = random_matching_family(rng, n, 2, k, n / 2)?;
    f.members()
        .iter()
        .map(|h| {
            let trip = h
                .edges()
                .iter()
                .flat_map(|e| {
                    let (u, v) = (e[0] as usize, e[1] as usize);
                    [(u, v, 1), (v, u, 1)]
                })
                .collect();
            KikuchiMatrix::from_triplets(n, n, trip)
        })
        .collect()
}

fn khintchine(s: &SeedStream, trials: usize, out: &mut SuiteResult) -> Result<()> {
    let mut rng = s.rng("instance");
    for t in 0..trials {
        let n = rng.random_range(20..=200);
        let k = rng.random_range(1..=8);
        let mats = matching_adjacency(&mut rng, n, k)?;
        let audit = khintchine_audit(&mats, 200, s.seed(&format!("signs{t}")))?;
        out.trials += 1;
        out.check(!audit.violated, || {
            format!("n={n} k={k}: mean {} > 1.05 * {}", audit.empirical_mean, audit.bound)
        });
    }
    Ok(())
}

fn ldc_exactness(out: &mut SuiteResult) -> Result<()> {
    for k in 1..=10 {
        let h = hadamard_fixture(k)?;
        let r = verify_normal(&h, VerifyMode::Exact)?;
        out.trials += 1;
        out.check(r.pass && r.clauses.iter().all(|c| c.bias == 1.0), || {
            format!("hadamard k={k}: min bias {}", r.min_bias)
        });
    }
    for k in 1..=3 {
        let p = pad_to_qplus1(&hadamard_fixture(k)?)?;
        let r = verify_normal(&p, VerifyMode::Exact)?;
        out.check(r.pass && r.min_bias == 1.0, || format!("padded k={k}: min bias {}", r.min_bias));
        let plan = CombinePlan::new(&p.matchings, 2, &RefuteParams::default())?;
        for mask in 0..1u64 << k {
            let c = plan.certify(&signs_from_mask(k, mask))?;
            out.check(c.covers(1.0), || format!("padded k={k} b={mask:#b}: bound {}", c.bound));
        }
    }
    Ok(())
}

fn alphabet(out: &mut SuiteResult) -> Result<()> {
    for k in 1..=8 {
        let (code, fam, eps) = two_bit_fixture(k)?;
        let red = alphabet_reduce(&code, &fam, eps)?;
        let report = verify_normal(&red.ldc, VerifyMode::Exact)?;
        out.trials += 1;
        for c in &report.clauses {
            let adv = c.bias - 0.5;
            out.check(adv + 1e-12 >= red.target, || {
                format!("k={k} clause ({}, {}): advantage {adv} < {}", c.i, c.clause, red.target)
            });
        }
    }
    Ok(())
}

fn wldc(out: &mut SuiteResult) -> Result<()> {
    for k in 2..=4 {
        let p = pad_to_qplus1(&hadamard_fixture(k)?)?;
        let r = wldc_reduction(&p, &WldcParams::default())?;
        out.trials += 1;
        out.check(r.c2.is_some() || r.c3.is_some(), || format!("k={k}: no code produced"));
        for (name, c) in [("C2", &r.c2), ("C3", &r.c3)] {
            if let Some(c) = c {
                out.check(gkst_check(&c.wldc), || format!("k={k} {name}: n < 2^(delta k)"));
            }
        }
    }
    Ok(())
}

/// One soundness trial: every pipeline against brute force for all `b`.
fn soundness_trial(rng: &mut impl Rng, out: &mut SuiteResult) -> Result<()> {
    let n = rng.random_range(6..=14);
    let k = rng.random_range(1..=4);
    let params = RefuteParams::default();
    let f = random_family(rng, n, 3, k)?;
    let q_even = if rng.random_bool(0.5) { 2 } else { 4 };
    let fe = random_family(rng, n.max(2 * q_even), q_even, k.min(3))?;
    let d = rng.random_range(1..=2);
    let three = ThreeXorPlan::new(&f, &params)?;
    let comb = CombinePlan::new(&f, d, &params)?;
    let even = match EvenQPlan::new(&fe, &RefuteParams { ell: q_even / 2 + 1, ..params }) {
        Ok(p) => Some(p),
        Err(e) if e.is_infeasible() => None,
        Err(e) => return Err(e),
    };
    let bip = comb.bipartite.clone();
    let rows: Vec<Vec<(bool, String)>> = (0..1u64 << k)
        .into_par_iter()
        .map(|mask| -> Result<Vec<(bool, String)>> {
            let b = signs_from_mask(k, mask);
            let inst = XorInstance::from_family(&f, &b)?;
            let (fmax, _) = inst.brute_force_max(24)?;
            let (val, _) = inst.brute_force_val(24)?;
            let val = *val.numer() as f64 / *val.denom() as f64;
            let mut res = Vec::new();
            let c = three.certify(&b)?;
            res.push((c.covers(fmax as f64), format!("3xor n={n} k={k} b={mask:#b}: {} < {fmax}", c.bound)));
            if f.m() > 0 {
                let c = comb.certify(&b)?;
                res.push((c.covers(val), format!("combine n={n} k={k} d={d} b={mask:#b}: {} < {val}", c.bound)));
            }
            if bip.right > 0 {
                let c = refute_2xor(&bip, &b, SpectralMode::DenseExact)?;
                let g = g_b_brute_force(&bip, &b, 24)?;
                res.push((c.covers(g as f64), format!("2xor n={n} k={k} b={mask:#b}: {} < {g}", c.bound)));
            }
            if let Some(p) = &even {
                let be = &b[..fe.k()];
                let c = p.certify(be)?;
                let (v, _) = XorInstance::from_family(&fe, be)?.brute_force_val(24)?;
                let v = *v.numer() as f64 / *v.denom() as f64;
                res.push((c.covers(v), format!("even q={q_even} n={} b={mask:#b}: {} < {v}", fe.n(), c.bound)));
            }
            Ok(res)
        })
        .collect::<Result<_>>()?;
    out.trials += 1;
    for (ok, msg) in rows.into_iter().flatten() {
        out.check(ok, || msg);
    }
    Ok(())
}

fn soundness(s: &SeedStream, trials: usize, out: &mut SuiteResult) -> Result<()> {
    let mut rng = s.rng("instance");
    for _ in 0..trials {
        soundness_trial(&mut rng, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
        assert!(Suite::parse("nope").is_err());
    }

    #[test]
    fn small_runs_pass() {
        for s in [Suite::Decomposition, Suite::Identity, Suite::Counting, Suite::Degree] {
            let r = s.run(11, 10);
            assert!(r.passed(), "{}: {:?}", r.name, r.failures);
        }
    }

    #[test]
    fn soundness_smoke() {
        let r = Suite::Soundness.run(5, 3);
        assert!(r.passed(), "{:?}", r.failures);
    }
}
