//! Kikuchi matrices: the even-arity matrix with its zeroing rule, the
//! odd-arity rectangular variant, and the 3-XOR pipeline over subsets of
//! `[n] x [2]` (half clauses, per-clause matrices, equalization, assembly).
//!
//! Rows and columns are ranks of subsets under [`SubsetIndexer`] (colex).
//! For the two-copy ground set, `v^(1)` is element `v` and `v^(2)` is
//! element `n + v`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, bits, subsets_of_mask, SubsetIndexer};
use crate::error::{Error, Result};
use crate::hypergraph::{parse_numbers, Hypergraph, Lines, MatchingFamily, Vertex};
use crate::xor::{derive_4xor, Assignment, DerivedClause, Partition};

/// Sparse integer matrix in sorted `(row, col, weight)` triplet form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KikuchiMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, i64)>,
    /// Clause identifiers contributing to each entry, parallel to `entries`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    provenance: Option<Vec<Vec<usize>>>,
}

impl KikuchiMatrix {
    /// Sorts, merges duplicates by summing, and drops zero weights.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: Vec<(usize, usize, i64)>,
    ) -> Result<Self> {
        Self::build(rows, cols, triplets.into_iter().map(|t| (t, None)).collect(), false)
    }

    /// Like [`KikuchiMatrix::from_triplets`], tagging each triplet with a
    /// clause identifier.
    pub fn from_tagged(
        rows: usize,
        cols: usize,
        triplets: Vec<((usize, usize, i64), usize)>,
    ) -> Result<Self> {
        Self::build(
            rows,
            cols,
            triplets.into_iter().map(|(t, id)| (t, Some(id))).collect(),
            true,
        )
    }

    fn build(
        rows: usize,
        cols: usize,
        mut raw: Vec<((usize, usize, i64), Option<usize>)>,
        tagged: bool,
    ) -> Result<Self> {
        if let Some(((r, c, _), _)) = raw.iter().find(|((r, c, _), _)| *r >= rows || *c >= cols) {
            return Err(Error::input(format!(
                "entry ({r}, {c}) outside a {rows} x {cols} matrix"
            )));
        }
        raw.sort_unstable_by_key(|&((r, c, _), id)| (r, c, id));
        let mut entries: Vec<(usize, usize, i64)> = Vec::with_capacity(raw.len());
        let mut prov: Vec<Vec<usize>> = Vec::new();
        for ((r, c, w), id) in raw {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => {
                    last.2 += w;
                    if let Some(id) = id {
                        prov.last_mut().unwrap().push(id);
                    }
                }
                _ => {
                    entries.push((r, c, w));
                    if tagged {
                        prov.push(id.into_iter().collect());
                    }
                }
            }
        }
        let provenance = if tagged {
            let mut keep = entries.iter().map(|e| e.2 != 0);
            prov.retain(|_| keep.next().unwrap());
            Some(prov)
        } else {
            None
        };
        entries.retain(|e| e.2 != 0);
        Ok(Self {
            rows,
            cols,
            entries,
            provenance,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
            provenance: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, i64)] {
        &self.entries
    }

    pub fn provenance(&self) -> Option<&[Vec<usize>]> {
        self.provenance.as_deref()
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries
            .binary_search_by_key(&(row, col), |e| (e.0, e.1))
            .map_or(0, |i| self.entries[i].2)
    }

    pub fn transpose(&self) -> Self {
        let t = self.entries.iter().map(|&(r, c, w)| (c, r, w)).collect();
        Self::from_triplets(self.cols, self.rows, t).expect("transpose stays in bounds")
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.entries.iter().all(|&(r, c, w)| self.get(c, r) == w)
    }

    /// `sum_t coeff_t * M_t`. All terms must share a shape.
    pub fn linear_combination(terms: &[(i64, &KikuchiMatrix)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::input("linear combination of no matrices"));
        };
        let (rows, cols) = (first.rows, first.cols);
        if terms.iter().any(|(_, m)| m.rows != rows || m.cols != cols) {
            return Err(Error::input("linear combination of matrices with different shapes"));
        }
        let trip = terms
            .iter()
            .filter(|(a, _)| *a != 0)
            .flat_map(|&(a, m)| m.entries.iter().map(move |&(r, c, w)| (r, c, a * w)))
            .collect();
        Self::from_triplets(rows, cols, trip)
    }

    /// `u^T M v` in exact integer arithmetic.
    pub fn bilinear(&self, u: &[i8], v: &[i8]) -> Result<i128> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(Error::input("vector lengths do not match the matrix shape"));
        }
        Ok(self
            .entries
            .iter()
            .map(|&(r, c, w)| w as i128 * u[r] as i128 * v[c] as i128)
            .sum())
    }

    /// `z^T M z` for a square matrix.
    pub fn quadratic_form(&self, z: &[i8]) -> Result<i128> {
        self.bilinear(z, z)
    }

    pub fn row_l1(&self) -> Vec<i64> {
        let mut out = vec![0; self.rows];
        for &(r, _, w) in &self.entries {
            out[r] += w.abs();
        }
        out
    }

    pub fn col_l1(&self) -> Vec<i64> {
        let mut out = vec![0; self.cols];
        for &(_, c, w) in &self.entries {
            out[c] += w.abs();
        }
        out
    }

    pub fn max_row_l1(&self) -> i64 {
        self.row_l1().into_iter().max().unwrap_or(0)
    }

    pub fn max_col_l1(&self) -> i64 {
        self.col_l1().into_iter().max().unwrap_or(0)
    }

    /// Header `rows cols nnz`, then one `row col weight` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.cols, self.nnz());
        for &(r, c, w) in &self.entries {
            let _ = writeln!(out, "{r} {c} {w}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let (no, header) = lines.expect("header `rows cols nnz`")?;
        let h = parse_numbers(no, header, Some(3))?;
        let mut trip = Vec::with_capacity(h[2]);
        for _ in 0..h[2] {
            let (no, line) = lines.expect("an entry `row col weight`")?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::parse(no, "expected `row col weight`"));
            }
            let rc = parse_numbers(no, &parts[..2].join(" "), Some(2))?;
            let w: i64 = parts[2]
                .parse()
                .map_err(|_| Error::parse(no, format!("`{}` is not an integer", parts[2])))?;
            if rc[0] >= h[0] || rc[1] >= h[1] {
                return Err(Error::parse(no, "entry outside the declared shape"));
            }
            trip.push((rc[0], rc[1], w));
        }
        if let Some((no, _)) = lines.next_content() {
            return Err(Error::parse(no, "trailing content after entries"));
        }
        Self::from_triplets(h[0], h[1], trip)
    }
}

fn mask_of(vs: &[Vertex]) -> u128 {
    vs.iter().fold(0u128, |m, &v| m | 1u128 << v)
}

fn full_mask(width: usize) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

fn check_matching_arity(h: &Hypergraph, odd: bool) -> Result<()> {
    if h.n() > 128 {
        return Err(Error::capacity("n for Kikuchi matrices", h.n(), 128));
    }
    if (h.q() % 2 == 1) != odd {
        let want = if odd { "odd" } else { "even" };
        return Err(Error::input(format!("expected {want} arity, got q={}", h.q())));
    }
    if !h.is_matching() {
        return Err(Error::input("Kikuchi matrices need a matching"));
    }
    Ok(())
}

/// `A_i` over `l`-subsets of `[n]` for an even-arity matching.
///
/// `A_i(S, T) = 1` iff `S xor T = C` for some `C` in `H_i` and
/// `|S xor C'| != l`, `|T xor C'| != l` for every other `C'` in `H_i`.
/// Provenance records the index of `C` within `H_i`.
pub fn build_even_kikuchi(h: &Hypergraph, ell: usize) -> Result<KikuchiMatrix> {
    check_matching_arity(h, false)?;
    let half = h.q() / 2;
    if ell < half || h.q() == 0 {
        return Err(Error::input(format!(
            "l={ell} is below q/2={half}; no valid index pairs exist"
        )));
    }
    let ix = SubsetIndexer::new(h.n(), ell)?;
    let masks: Vec<u128> = h.edges().iter().map(|e| mask_of(e)).collect();
    let all = full_mask(h.n());
    let per_clause: Vec<Vec<((usize, usize, i64), usize)>> = masks
        .par_iter()
        .enumerate()
        .map(|(ci, &c)| {
            let mut out = Vec::new();
            for q in subsets_of_mask(all & !c, ell - half) {
                // both |S xor C'| and |T xor C'| reduce to |Q & C'|
                let blocked = masks
                    .iter()
                    .enumerate()
                    .any(|(o, &cp)| o != ci && (q & cp).count_ones() as usize == half);
                if blocked {
                    continue;
                }
                for cs in subsets_of_mask(c, half) {
                    let s = cs | q;
                    let t = (c & !cs) | q;
                    out.push(((ix.rank_mask(s), ix.rank_mask(t), 1), ci));
                }
            }
            out
        })
        .collect();
    KikuchiMatrix::from_tagged(ix.count(), ix.count(), per_clause.concat())
}

/// Rectangular `l`-subsets by `(l+1)`-subsets matrix for odd arity.
///
/// `A_i(S, T) = 1` iff `S xor T = C` in `H_i` and `|S xor C'| != l + 1`,
/// `|T xor C'| != l` for every other `C'`.
pub fn build_odd_asym(h: &Hypergraph, ell: usize) -> Result<KikuchiMatrix> {
    check_matching_arity(h, true)?;
    let small = (h.q() - 1) / 2;
    if ell < small {
        return Err(Error::input(format!(
            "l={ell} is below (q-1)/2={small}; no valid index pairs exist"
        )));
    }
    let rows = SubsetIndexer::new(h.n(), ell)?;
    let cols = SubsetIndexer::new(h.n(), ell + 1)?;
    let masks: Vec<u128> = h.edges().iter().map(|e| mask_of(e)).collect();
    let all = full_mask(h.n());
    let mut trip = Vec::new();
    for (ci, &c) in masks.iter().enumerate() {
        for q in subsets_of_mask(all & !c, ell - small) {
            let blocked = masks.iter().enumerate().any(|(o, &cp)| {
                let hit = (q & cp).count_ones() as usize;
                o != ci && (hit == small || hit == small + 1)
            });
            if blocked {
                continue;
            }
            for cs in subsets_of_mask(c, small) {
                let t = (c & !cs) | q;
                trip.push(((rows.rank_mask(cs | q), cols.rank_mask(t), 1), ci));
            }
        }
    }
    KikuchiMatrix::from_tagged(rows.count(), cols.count(), trip)
}

/// Number of nonzero entries each clause contributes, by provenance.
pub fn per_clause_counts(m: &KikuchiMatrix, clauses: usize) -> Vec<usize> {
    let mut counts = vec![0; clauses];
    if let Some(p) = m.provenance() {
        for ids in p {
            for &id in ids {
                counts[id] += 1;
            }
        }
    }
    counts
}

/// `C(q, q/2) C(n-q, l-q/2) - |H_i| C(q, q/2)^2 C(n-2q, l-q)`, the lower
/// bound on the per-clause count of the even-arity matrix.
pub fn even_count_lower_bound(n: usize, q: usize, ell: usize, h_size: usize) -> i128 {
    let (n, q, l) = (n as i64, q as i64, ell as i64);
    let cq = binomial(q, q / 2) as i128;
    cq * binomial(n - q, l - q / 2) as i128
        - h_size as i128 * cq * cq * binomial(n - 2 * q, l - q) as i128
}

/// Half clauses `(v^(1), w^(2))` owned by `i in L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfClauseSet {
    pub owner: usize,
    pub n: usize,
    pub pairs: BTreeSet<(Vertex, Vertex)>,
    // adjacency[v] = mask of w with (v, w) a half clause
    #[serde(skip)]
    adjacency: Vec<u64>,
}

impl HalfClauseSet {
    fn from_pairs(owner: usize, n: usize, pairs: BTreeSet<(Vertex, Vertex)>) -> Self {
        let mut adjacency = vec![0u64; n];
        for &(v, w) in &pairs {
            adjacency[v as usize] |= 1 << w;
        }
        Self {
            owner,
            n,
            pairs,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of half clauses fully contained in a subset of `[n] x [2]`.
    pub fn contained_in(&self, set: u128) -> u32 {
        let low = full_mask(self.n);
        let second = ((set >> self.n) & low) as u64;
        bits(set & low)
            .map(|v| (self.adjacency[v as usize] & second).count_ones())
            .sum()
    }
}

fn check_two_copy(n: usize) -> Result<()> {
    if n > 64 {
        return Err(Error::capacity("n for [n] x [2] Kikuchi matrices", n, 64));
    }
    Ok(())
}

/// `P_i`: all `(v^(1), w^(2))` with `(u, C) in H_i`, `(u, C') in H_j`,
/// `j in R`, `v in C`, `w in C'`.
pub fn half_clauses(
    family: &MatchingFamily,
    partition: &Partition,
    i: usize,
) -> Result<HalfClauseSet> {
    check_two_copy(family.n())?;
    if i >= partition.k() || !partition.in_left(i) {
        return Err(Error::input(format!("index {i} is not in L")));
    }
    let derived = derive_4xor(family, partition)?;
    let pairs = derived
        .clauses
        .iter()
        .filter(|c| c.i == i)
        .flat_map(|c| {
            c.c.iter()
                .flat_map(move |&v| c.c_prime.iter().map(move |&w| (v, w)))
        })
        .collect();
    Ok(HalfClauseSet::from_pairs(i, family.n(), pairs))
}

/// Target per-clause entry count `D = 2 C(2n-4, l-2)`.
pub fn clause_target(n: usize, ell: usize) -> u128 {
    2 * binomial(2 * n as i64 - 4, ell as i64 - 2)
}

/// Whether `4nk C(2n-6, l-4) + 16k C(2n-5, l-3) <= C(2n-4, l-2) / 2`.
pub fn counting_condition(n: usize, k: usize, ell: usize) -> bool {
    let (n, k, l) = (n as i64, k as i64, ell as i64);
    let lhs = 4 * (n * k) as u128 * binomial(2 * n - 6, l - 4)
        + 16 * k as u128 * binomial(2 * n - 5, l - 3);
    2 * lhs <= binomial(2 * n - 4, l - 2)
}

/// `B^{(i,C,C')}` over `l`-subsets of `[n] x [2]`.
///
/// Entries are the pairs `S = {c^(1), c'^(2)} + Q`, `T = {cbar^(1), cbar'^(2)} + Q`
/// with `Q` avoiding `C^(1)` and `C'^(2)`. When `half` is given, pairs where
/// `S` or `T` contains two or more half clauses are dropped.
pub fn build_b_clause(
    n: usize,
    c: [Vertex; 2],
    c_prime: [Vertex; 2],
    ell: usize,
    half: Option<&HalfClauseSet>,
) -> Result<KikuchiMatrix> {
    check_two_copy(n)?;
    if ell < 2 || ell > 2 * n {
        return Err(Error::input(format!("l={ell} must lie in 2..=2n")));
    }
    if c.iter().chain(&c_prime).any(|&v| v as usize >= n) || c[0] == c[1] || c_prime[0] == c_prime[1]
    {
        return Err(Error::input("C and C' must be 2-subsets of [n]"));
    }
    let ix = SubsetIndexer::new(2 * n, ell)?;
    let entries = b_clause_entries(&ix, n, c, c_prime, half);
    KikuchiMatrix::from_triplets(ix.count(), ix.count(), entries)
}

fn b_clause_entries(
    ix: &SubsetIndexer,
    n: usize,
    c: [Vertex; 2],
    c_prime: [Vertex; 2],
    half: Option<&HalfClauseSet>,
) -> Vec<(usize, usize, i64)> {
    let first = [1u128 << c[0], 1u128 << c[1]];
    let second = [1u128 << (n as u32 + c_prime[0]), 1u128 << (n as u32 + c_prime[1])];
    let used = first[0] | first[1] | second[0] | second[1];
    let ok = |s: u128| half.is_none_or(|h| h.contained_in(s) <= 1);
    let mut out = Vec::new();
    for q in subsets_of_mask(full_mask(2 * n) & !used, ix.size() - 2) {
        for a in 0..2 {
            for b in 0..2 {
                let s = q | first[a] | second[b];
                let t = q | first[1 - a] | second[1 - b];
                if ok(s) && ok(t) {
                    out.push((ix.rank_mask(s), ix.rank_mask(t), 1));
                }
            }
        }
    }
    out
}

/// Keeps the `target` entries smallest in `(row, col)` order.
pub fn equalize(m: &KikuchiMatrix, target: usize) -> Result<KikuchiMatrix> {
    if m.nnz() < target {
        return Err(Error::Infeasible(format!(
            "matrix has {} nonzero entries, equalization needs {target} (deficit {})",
            m.nnz(),
            target - m.nnz()
        )));
    }
    Ok(KikuchiMatrix {
        rows: m.rows,
        cols: m.cols,
        entries: m.entries[..target].to_vec(),
        provenance: m.provenance.as_ref().map(|p| p[..target].to_vec()),
    })
}

/// Per-partition Kikuchi data that does not depend on the signs `b`.
///
/// Degenerate derived clauses (source edges sharing a second vertex) are
/// kept out of the matrices and accounted for by their count.
#[derive(Debug, Clone)]
pub struct PartitionKikuchi {
    pub partition: Partition,
    pub n: usize,
    pub ell: usize,
    /// `N = C(2n, l)`.
    pub dimension: usize,
    pub target: usize,
    /// Non-degenerate clauses with their equalized matrices.
    pub clauses: Vec<(DerivedClause, KikuchiMatrix)>,
    pub degenerate: Vec<DerivedClause>,
    /// Pruned entry counts before equalization, parallel to `clauses`.
    pub pruned_counts: Vec<usize>,
}

impl PartitionKikuchi {
    pub fn new(family: &MatchingFamily, partition: &Partition, ell: usize) -> Result<Self> {
        let n = family.n();
        check_two_copy(n)?;
        if ell < 2 || ell > 2 * n {
            return Err(Error::input(format!("l={ell} must lie in 2..=2n")));
        }
        let ix = SubsetIndexer::new(2 * n, ell)?;
        let target = usize::try_from(clause_target(n, ell))
            .map_err(|_| Error::capacity("equalization target", usize::MAX, usize::MAX))?;
        let derived = derive_4xor(family, partition)?;
        let halves: Vec<Option<HalfClauseSet>> = (0..family.k())
            .map(|i| {
                partition
                    .in_left(i)
                    .then(|| half_clauses_from(&derived.clauses, i, n))
            })
            .collect();
        let (degenerate, generic): (Vec<_>, Vec<_>) =
            derived.clauses.into_iter().partition(DerivedClause::is_degenerate);
        let built: Vec<(DerivedClause, KikuchiMatrix, usize)> = generic
            .into_par_iter()
            .map(|cl| {
                let trip = b_clause_entries(&ix, n, cl.c, cl.c_prime, halves[cl.i].as_ref());
                let full = KikuchiMatrix::from_triplets(ix.count(), ix.count(), trip)?;
                let count = full.nnz();
                let eq = equalize(&full, target).map_err(|_| {
                    Error::Infeasible(format!(
                        "derived clause (i={}, j={}, u={}, C={:?}, C'={:?}) keeps {count} entries after pruning, needs D={target} (deficit {}) at n={n}, l={ell}",
                        cl.i, cl.j, cl.u, cl.c, cl.c_prime, target - count
                    ))
                })?;
                Ok((cl, eq, count))
            })
            .collect::<Result<Vec<_>>>()?;
        let pruned_counts = built.iter().map(|b| b.2).collect();
        Ok(Self {
            partition: partition.clone(),
            n,
            ell,
            dimension: ix.count(),
            target,
            clauses: built.into_iter().map(|(c, m, _)| (c, m)).collect(),
            degenerate,
            pruned_counts,
        })
    }

    /// `A = sum b_i b_j A^{(i,C,C')}`, with provenance indexing `clauses`.
    pub fn assemble(&self, signs: &[i8]) -> Result<KikuchiMatrix> {
        if signs.len() != self.partition.k() {
            return Err(Error::input("sign vector length does not match k"));
        }
        let trip = self
            .clauses
            .iter()
            .enumerate()
            .flat_map(|(id, (cl, m))| {
                let w = (signs[cl.i] * signs[cl.j]) as i64;
                m.entries().iter().map(move |&(r, c, x)| ((r, c, w * x), id))
            })
            .collect();
        KikuchiMatrix::from_tagged(self.dimension, self.dimension, trip)
    }

    /// Exact `D * f_{L,R}(x)` restricted to non-degenerate clauses.
    pub fn scaled_generic_value(&self, signs: &[i8], x: &Assignment) -> i128 {
        self.clauses
            .iter()
            .map(|(cl, _)| (signs[cl.i] * signs[cl.j] * cl.monomial(x)) as i128)
            .sum::<i128>()
            * self.target as i128
    }
}

fn half_clauses_from(clauses: &[DerivedClause], i: usize, n: usize) -> HalfClauseSet {
    let pairs = clauses
        .iter()
        .filter(|c| c.i == i)
        .flat_map(|c| {
            c.c.iter()
                .flat_map(move |&v| c.c_prime.iter().map(move |&w| (v, w)))
        })
        .collect();
    HalfClauseSet::from_pairs(i, n, pairs)
}

/// Summary of the clauses that went into an assembled `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseAudit {
    pub generic: usize,
    pub degenerate: usize,
    pub target: usize,
    pub min_pruned_count: Option<usize>,
}

/// Builds `A` for one partition and sign vector.
pub fn assemble_a(
    family: &MatchingFamily,
    partition: &Partition,
    signs: &[i8],
    ell: usize,
) -> Result<(KikuchiMatrix, ClauseAudit)> {
    let pk = PartitionKikuchi::new(family, partition, ell)?;
    let a = pk.assemble(signs)?;
    Ok((
        a,
        ClauseAudit {
            generic: pk.clauses.len(),
            degenerate: pk.degenerate.len(),
            target: pk.target,
            min_pruned_count: pk.pruned_counts.iter().copied().min(),
        },
    ))
}

/// `B_i = sum_{j in R} sum B^{(i,C,C')}` with half-clause pruning, over all
/// derived clauses owned by `i` (degenerate ones included).
pub fn build_b_owner(
    family: &MatchingFamily,
    partition: &Partition,
    i: usize,
    ell: usize,
) -> Result<KikuchiMatrix> {
    let n = family.n();
    let half = half_clauses(family, partition, i)?;
    let ix = SubsetIndexer::new(2 * n, ell)?;
    if ell < 2 {
        return Err(Error::input("l must be at least 2"));
    }
    let derived = derive_4xor(family, partition)?;
    let trip: Vec<(usize, usize, i64)> = derived
        .clauses
        .par_iter()
        .filter(|c| c.i == i)
        .flat_map_iter(|c| b_clause_entries(&ix, n, c.c, c.c_prime, Some(&half)))
        .collect();
    KikuchiMatrix::from_triplets(ix.count(), ix.count(), trip)
}

/// `z_S` over ranked `l`-subsets of a ground set whose element `e` reads
/// variable `e mod n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedAssignment {
    pub ell: usize,
    pub universe: usize,
    pub z: Vec<i8>,
}

fn lift_over(x: &Assignment, universe: usize, ell: usize) -> Result<LiftedAssignment> {
    let n = x.len();
    let ix = SubsetIndexer::new(universe, ell)?;
    let z = (0..ix.count())
        .into_par_iter()
        .map(|r| {
            let s = ix.unrank(r).expect("rank in range");
            s.iter().map(|&e| x.values()[e as usize % n]).product()
        })
        .collect();
    Ok(LiftedAssignment { ell, universe, z })
}

/// Lift to `l`-subsets of `[n] x [2]`.
pub fn lift(x: &Assignment, ell: usize) -> Result<LiftedAssignment> {
    check_two_copy(x.len())?;
    lift_over(x, 2 * x.len(), ell)
}

/// Lift to `l`-subsets of `[n]` (even-arity matrices).
pub fn lift_plain(x: &Assignment, ell: usize) -> Result<LiftedAssignment> {
    lift_over(x, x.len(), ell)
}

/// `max(2, floor(sqrt(n/k) / c))`.
pub fn suggested_ell(n: usize, k: usize, c: f64) -> usize {
    let raw = ((n as f64) / (k.max(1) as f64)).sqrt() / c;
    (raw.floor() as usize).max(2)
}

/// Enforces `k <= n / c'`.
pub fn check_k_regime(n: usize, k: usize, c_prime: f64) -> Result<()> {
    if (k as f64) * c_prime > n as f64 {
        return Err(Error::input(format!(
            "k={k} exceeds n/c'={:.3}; split the message indices into blocks",
            n as f64 / c_prime
        )));
    }
    Ok(())
}
