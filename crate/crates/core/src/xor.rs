//! Signed XOR polynomials over ±1 variables, exact evaluation, brute-force
//! value oracles, and the derived 4-XOR instance obtained by cancelling a
//! shared vertex across a partition of the message indices.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{parse_hypergraphs, Hypergraph, Lines, MatchingFamily, Vertex};

/// Default variable cap for exhaustive value computation.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

/// Exhaustive partition enumeration cap on `k`.
pub const EXHAUSTIVE_K_CAP: usize = 16;

/// A ±1 assignment to `n` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<i8>);

impl Assignment {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::input("assignment entries must be +1 or -1"));
        }
        Ok(Self(values))
    }

    pub fn all_ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Bit `v` of `mask` set means `x_v = -1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self((0..n).map(|v| if mask >> v & 1 == 1 { -1 } else { 1 }).collect())
    }

    /// `x_v = (-1)^{bits[v]}`.
    pub fn from_bits(bits: &[bool]) -> Self {
        Self(bits.iter().map(|&b| if b { -1 } else { 1 }).collect())
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Product of `x_v` over `vars`.
    pub fn monomial(&self, vars: &[Vertex]) -> i8 {
        vars.iter().map(|&v| self.0[v as usize]).product()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }
}

/// Sign vector `b` from the low `k` bits of `mask` (bit set means `-1`).
pub fn signs_from_mask(k: usize, mask: u64) -> Vec<i8> {
    (0..k).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect()
}

fn check_signs(k: usize, signs: &[i8]) -> Result<()> {
    if signs.len() != k {
        return Err(Error::input(format!(
            "expected {k} signs, got {}",
            signs.len()
        )));
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::input("signs must be +1 or -1"));
    }
    Ok(())
}

/// `sum_i b_i sum_{C in H_i} prod_{v in C} x_v`, optionally divided by `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorInstance {
    n: usize,
    arity: usize,
    groups: Vec<Hypergraph>,
    signs: Vec<i8>,
}

impl XorInstance {
    pub fn new(groups: Vec<Hypergraph>, signs: Vec<i8>) -> Result<Self> {
        let first = groups
            .first()
            .ok_or_else(|| Error::input("an XOR instance needs at least one group"))?;
        let (n, arity) = (first.n(), first.q());
        if groups.iter().any(|g| g.n() != n || g.q() != arity) {
            return Err(Error::input("all groups must share n and arity"));
        }
        check_signs(groups.len(), &signs)?;
        Ok(Self {
            n,
            arity,
            groups,
            signs,
        })
    }

    pub fn from_family(family: &MatchingFamily, signs: &[i8]) -> Result<Self> {
        Self::new(family.members().to_vec(), signs.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn m(&self) -> usize {
        self.groups.iter().map(Hypergraph::len).sum()
    }

    pub fn groups(&self) -> &[Hypergraph] {
        &self.groups
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn with_signs(&self, signs: &[i8]) -> Result<Self> {
        Self::new(self.groups.clone(), signs.to_vec())
    }

    fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::input(format!(
                "assignment has length {}, instance has {} variables",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Unnormalized value `f_b(x)`.
    pub fn evaluate_unnormalized(&self, x: &Assignment) -> Result<i64> {
        self.check_len(x)?;
        Ok(self
            .groups
            .iter()
            .zip(&self.signs)
            .map(|(g, &b)| {
                b as i64 * g.edges().iter().map(|e| x.monomial(e) as i64).sum::<i64>()
            })
            .sum())
    }

    /// Normalized value `psi_b(x) = f_b(x) / m`.
    pub fn evaluate(&self, x: &Assignment) -> Result<Ratio<i64>> {
        let m = self.m();
        if m == 0 {
            return Err(Error::input("instance has no constraints (m = 0)"));
        }
        Ok(Ratio::new(self.evaluate_unnormalized(x)?, m as i64))
    }

    /// Fraction of constraints `prod x_C = b_i` satisfied by `x`.
    pub fn satisfied_fraction(&self, x: &Assignment) -> Result<Ratio<i64>> {
        let m = self.m() as i64;
        if m == 0 {
            return Err(Error::input("instance has no constraints (m = 0)"));
        }
        let f = self.evaluate_unnormalized(x)?;
        Ok(Ratio::new(m + f, 2 * m))
    }

    /// Exhaustive maximum of `f_b` over all `2^n` assignments.
    ///
    /// Walks a Gray code so each step flips one variable and updates only
    /// the clauses that contain it.
    pub fn brute_force_max(&self, cap: usize) -> Result<(i64, Assignment)> {
        if self.n > cap.min(63) {
            return Err(Error::capacity("variable count for brute force", self.n, cap.min(63)));
        }
        let mut clause_sign: Vec<i64> = Vec::with_capacity(self.m());
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (g, &b) in self.groups.iter().zip(&self.signs) {
            for e in g.edges() {
                let id = clause_sign.len();
                clause_sign.push(b as i64);
                for &v in e {
                    incident[v as usize].push(id);
                }
            }
        }
        // current monomial values times sign, starting from x = all ones
        let mut term = clause_sign.clone();
        let mut total: i64 = term.iter().sum();
        let mut best = total;
        let mut best_mask = 0u64;
        let mut mask = 0u64;
        for step in 1u64..(1u64 << self.n) {
            let v = step.trailing_zeros() as usize;
            mask ^= 1 << v;
            for &c in &incident[v] {
                total -= 2 * term[c];
                term[c] = -term[c];
            }
            if total > best {
                best = total;
                best_mask = mask;
            }
        }
        Ok((best, Assignment::from_mask(self.n, best_mask)))
    }

    /// `val(psi_b)` exactly, with an optimal assignment.
    pub fn brute_force_val(&self, cap: usize) -> Result<(Ratio<i64>, Assignment)> {
        let m = self.m();
        if m == 0 {
            return Err(Error::input("instance has no constraints (m = 0)"));
        }
        let (best, x) = self.brute_force_max(cap)?;
        Ok((Ratio::new(best, m as i64), x))
    }

    pub fn to_text(&self) -> String {
        let fam = crate::hypergraph::groups_to_text(self.n, self.arity, &self.groups);
        let signs: String = self
            .signs
            .iter()
            .map(|&s| if s == 1 { '+' } else { '-' })
            .collect();
        format!("{fam}{signs}\n")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let (header_no, groups) = parse_hypergraphs(&mut lines, false)?;
        let k = groups.len();
        let (no, sign_line) = lines.expect("a line of signs")?;
        let signs = sign_line
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(1i8),
                '-' => Ok(-1i8),
                other => Err(Error::parse(no, format!("unexpected sign character `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if signs.len() != k {
            return Err(Error::parse(no, format!("expected {k} signs, found {}", signs.len())));
        }
        if let Some((no, _)) = lines.next_content() {
            return Err(Error::parse(no, "trailing content after signs"));
        }
        Self::new(groups, signs).map_err(|e| Error::parse(header_no, e.to_string()))
    }
}

/// A split of `0..k` into `L` and `R = [k] \ L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    left: Vec<bool>,
}

impl Partition {
    pub fn new(left: Vec<bool>) -> Self {
        Self { left }
    }

    /// Bit `i` of `mask` set means `i` is in `L`.
    pub fn from_mask(k: usize, mask: u64) -> Self {
        Self {
            left: (0..k).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.left.len()
    }

    pub fn in_left(&self, i: usize) -> bool {
        self.left[i]
    }

    pub fn left(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.left.len()).filter(|&i| self.left[i])
    }

    pub fn right(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.left.len()).filter(|&i| !self.left[i])
    }

    pub fn left_size(&self) -> usize {
        self.left.iter().filter(|&&b| b).count()
    }
}

/// How partitions `(L, R)` are drawn for the Cauchy-Schwarz step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PartitionMode {
    /// All `2^k` independent-inclusion partitions (each index in `L` w.p. 1/2).
    Exhaustive,
    /// All partitions with `|L| = floor(k/2)`.
    Balanced,
    /// Independent-inclusion partitions sampled with a seed. Not sound.
    Sampled { count: usize, seed: u64 },
}

impl PartitionMode {
    pub fn is_exact(&self) -> bool {
        !matches!(self, PartitionMode::Sampled { .. })
    }

    pub fn label(&self) -> String {
        match self {
            PartitionMode::Exhaustive => "exhaustive".into(),
            PartitionMode::Balanced => "balanced".into(),
            PartitionMode::Sampled { count, .. } => format!("sample:{count}"),
        }
    }
}

/// Partitions together with the probability that a fixed ordered pair
/// `i != j` lands as `i in L, j in R`.
#[derive(Debug, Clone)]
pub struct PartitionSet {
    pub partitions: Vec<Partition>,
    pub cross_probability: Ratio<i64>,
    pub exact: bool,
}

impl PartitionSet {
    pub fn new(mode: PartitionMode, k: usize) -> Result<Self> {
        match mode {
            PartitionMode::Exhaustive => {
                if k > EXHAUSTIVE_K_CAP {
                    return Err(Error::capacity("k for exhaustive partitions", k, EXHAUSTIVE_K_CAP));
                }
                Ok(Self {
                    partitions: (0..1u64 << k).map(|m| Partition::from_mask(k, m)).collect(),
                    cross_probability: Ratio::new(1, 4),
                    exact: true,
                })
            }
            PartitionMode::Balanced => {
                if k > EXHAUSTIVE_K_CAP {
                    return Err(Error::capacity("k for balanced partitions", k, EXHAUSTIVE_K_CAP));
                }
                let half = k / 2;
                let partitions = (0..1u64 << k)
                    .filter(|m| m.count_ones() as usize == half)
                    .map(|m| Partition::from_mask(k, m))
                    .collect();
                let cross = if k < 2 {
                    Ratio::new(0, 1)
                } else {
                    Ratio::new((half * (k - half)) as i64, (k * (k - 1)) as i64)
                };
                Ok(Self {
                    partitions,
                    cross_probability: cross,
                    exact: true,
                })
            }
            PartitionMode::Sampled { count, seed } => {
                if count == 0 {
                    return Err(Error::input("sampled partition mode needs count >= 1"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let partitions = (0..count)
                    .map(|_| Partition::new((0..k).map(|_| rng.random_bool(0.5)).collect()))
                    .collect();
                Ok(Self {
                    partitions,
                    cross_probability: Ratio::new(1, 4),
                    exact: false,
                })
            }
        }
    }
}

/// One derived clause: `(u, C) in H_i`, `(u, C') in H_j` with `i in L`,
/// `j in R`. Its monomial is `x_C x_{C'}` and its coefficient `b_i b_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DerivedClause {
    pub i: usize,
    pub j: usize,
    pub u: Vertex,
    pub c: [Vertex; 2],
    pub c_prime: [Vertex; 2],
}

impl DerivedClause {
    /// The two source hyperedges share more than `u`, so the monomial has
    /// fewer than four distinct variables.
    pub fn is_degenerate(&self) -> bool {
        self.c.iter().any(|v| self.c_prime.contains(v))
    }

    pub fn monomial(&self, x: &Assignment) -> i8 {
        x.monomial(&self.c) * x.monomial(&self.c_prime)
    }
}

/// The 4-XOR polynomial `f_{L,R}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedFourXor {
    pub partition: Partition,
    pub clauses: Vec<DerivedClause>,
}

impl DerivedFourXor {
    /// `f_{L,R}(x) = sum b_i b_j x_C x_{C'}`.
    pub fn evaluate(&self, signs: &[i8], x: &Assignment) -> i64 {
        self.clauses
            .iter()
            .map(|c| (signs[c.i] * signs[c.j] * c.monomial(x)) as i64)
            .sum()
    }

    pub fn degenerate_count(&self) -> usize {
        self.clauses.iter().filter(|c| c.is_degenerate()).count()
    }
}

/// Removes `u` from a sorted 3-edge.
pub(crate) fn without(e: &[Vertex], u: Vertex) -> [Vertex; 2] {
    let mut rest = e.iter().copied().filter(|&v| v != u);
    [rest.next().unwrap(), rest.next().unwrap()]
}

/// Enumerates the clauses of `f_{L,R}`, ordered by `(i, j, u)`.
pub fn derive_4xor(family: &MatchingFamily, partition: &Partition) -> Result<DerivedFourXor> {
    family.require_q(3, "the derived 4-XOR instance")?;
    if partition.k() != family.k() {
        return Err(Error::input(format!(
            "partition covers {} indices, family has k={}",
            partition.k(),
            family.k()
        )));
    }
    let owners: Vec<Vec<Option<usize>>> =
        family.members().iter().map(Hypergraph::vertex_owner).collect();
    let mut clauses = Vec::new();
    for i in partition.left() {
        for j in partition.right() {
            for u in 0..family.n() {
                let (Some(ci), Some(cj)) = (owners[i][u], owners[j][u]) else {
                    continue;
                };
                let u = u as Vertex;
                clauses.push(DerivedClause {
                    i,
                    j,
                    u,
                    c: without(&family.member(i).edges()[ci], u),
                    c_prime: without(&family.member(j).edges()[cj], u),
                });
            }
        }
    }
    Ok(DerivedFourXor {
        partition: partition.clone(),
        clauses,
    })
}

/// Both sides of `(3 f(x))^2 <= 3nm + (n / p) E_{(L,R)} f_{L,R}(x)` where
/// `p` is the cross probability of the partition distribution (`1/4` for
/// independent inclusion, giving the familiar `4n`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauchySchwarzAudit {
    pub lhs: i128,
    pub rhs: Ratio<i128>,
}

impl CauchySchwarzAudit {
    pub fn holds(&self) -> bool {
        Ratio::from_integer(self.lhs) <= self.rhs
    }
}

pub fn cauchy_schwarz_audit(
    family: &MatchingFamily,
    signs: &[i8],
    x: &Assignment,
    mode: PartitionMode,
) -> Result<CauchySchwarzAudit> {
    family.require_q(3, "the Cauchy-Schwarz audit")?;
    if !mode.is_exact() {
        return Err(Error::input("the Cauchy-Schwarz audit needs an exact partition mode"));
    }
    let inst = XorInstance::from_family(family, signs)?;
    let f = inst.evaluate_unnormalized(x)? as i128;
    let set = PartitionSet::new(mode, family.k())?;
    let n = family.n() as i128;
    let m = family.m() as i128;
    let mut sum: i128 = 0;
    for p in &set.partitions {
        sum += derive_4xor(family, p)?.evaluate(signs, x) as i128;
    }
    let trivial = Ratio::from_integer(3 * n * m);
    let rhs = if *set.cross_probability.numer() == 0 {
        trivial
    } else {
        let p = Ratio::new(
            *set.cross_probability.numer() as i128,
            *set.cross_probability.denom() as i128,
        );
        let expectation = Ratio::new(sum, set.partitions.len() as i128);
        trivial + Ratio::from_integer(n) / p * expectation
    };
    Ok(CauchySchwarzAudit { lhs: 9 * f * f, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: usize, q: usize, groups: Vec<Vec<Vec<Vertex>>>, signs: Vec<i8>) -> XorInstance {
        let gs = groups
            .into_iter()
            .map(|g| Hypergraph::new(n, q, g).unwrap())
            .collect();
        XorInstance::new(gs, signs).unwrap()
    }

    #[test]
    fn single_clause_all_ones() {
        let i = inst(3, 3, vec![vec![vec![0, 1, 2]]], vec![1]);
        assert_eq!(i.evaluate(&Assignment::all_ones(3)).unwrap(), Ratio::from_integer(1));
        assert_eq!(i.brute_force_val(24).unwrap().0, Ratio::from_integer(1));
        let neg = i.with_signs(&[-1]).unwrap();
        assert_eq!(neg.brute_force_val(24).unwrap().0, Ratio::from_integer(1));
    }

    #[test]
    fn contradictory_pair_cancels() {
        let i = inst(2, 2, vec![vec![vec![0, 1]], vec![vec![0, 1]]], vec![1, -1]);
        for mask in 0..4 {
            let x = Assignment::from_mask(2, mask);
            assert_eq!(i.evaluate(&x).unwrap(), Ratio::from_integer(0));
            assert_eq!(i.satisfied_fraction(&x).unwrap(), Ratio::new(1, 2));
        }
        assert_eq!(i.brute_force_val(24).unwrap().0, Ratio::from_integer(0));
    }

    #[test]
    fn evaluate_length_mismatch() {
        let i = inst(3, 3, vec![vec![vec![0, 1, 2]]], vec![1]);
        assert!(i.evaluate(&Assignment::all_ones(4)).is_err());
        assert!(Assignment::new(vec![1, 0]).is_err());
    }

    #[test]
    fn brute_force_cap() {
        let i = inst(30, 3, vec![vec![vec![0, 1, 2]]], vec![1]);
        assert!(matches!(i.brute_force_val(24), Err(Error::Capacity { .. })));
    }

    #[test]
    fn derive_single_shared_vertex() {
        // {1,2,3} in L, {1,4,5} in R (one-based)
        let f = MatchingFamily::from_edges(5, 3, vec![vec![vec![0, 1, 2]], vec![vec![0, 3, 4]]])
            .unwrap();
        let d = derive_4xor(&f, &Partition::from_mask(2, 0b01)).unwrap();
        assert_eq!(
            d.clauses,
            vec![DerivedClause {
                i: 0,
                j: 1,
                u: 0,
                c: [1, 2],
                c_prime: [3, 4]
            }]
        );
        assert!(derive_4xor(&f, &Partition::from_mask(2, 0)).unwrap().clauses.is_empty());
        let disjoint = MatchingFamily::from_edges(6, 3, vec![vec![vec![0, 1, 2]], vec![vec![3, 4, 5]]])
            .unwrap();
        assert!(derive_4xor(&disjoint, &Partition::from_mask(2, 1)).unwrap().clauses.is_empty());
    }

    #[test]
    fn single_member_audit_is_trivial() {
        let f = MatchingFamily::from_edges(9, 3, vec![vec![vec![0, 1, 2], vec![3, 4, 5]]]).unwrap();
        for mask in 0..(1u64 << 9) {
            let x = Assignment::from_mask(9, mask);
            let a = cauchy_schwarz_audit(&f, &[1], &x, PartitionMode::Exhaustive).unwrap();
            assert_eq!(a.rhs, Ratio::from_integer(3 * 9 * 2));
            assert!(a.holds());
        }
    }

    #[test]
    fn text_round_trip() {
        let i = inst(4, 2, vec![vec![vec![0, 1]], vec![vec![0, 1], vec![2, 3]]], vec![1, -1]);
        let t = i.to_text();
        assert!(t.ends_with("+-\n"));
        assert_eq!(XorInstance::from_text(&t).unwrap(), i);
        assert!(XorInstance::from_text("4 1 2\n0 0\n+x\n").is_err());
    }

    #[test]
    fn balanced_cross_probability() {
        let s = PartitionSet::new(PartitionMode::Balanced, 4).unwrap();
        assert_eq!(s.partitions.len(), 6);
        assert_eq!(s.cross_probability, Ratio::new(4, 12));
    }
}
