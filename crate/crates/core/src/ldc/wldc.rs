//! Reduction of a linear 3-query weak LDC to two candidate linear 2-query
//! weak LDCs: `C2` on the original coordinates through shared heavy pairs,
//! and `C3` on `l`-subsets of `[n] x [2]` through Kikuchi graphs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{low_bits, LinearCode, NormalLdc};
use crate::combinatorics::SubsetIndexer;
use crate::error::{Error, Result};
use crate::hypergraph::{decompose, duplicate_heavy_pairs, Hypergraph, MatchingFamily, Vertex};
use crate::kikuchi::build_b_owner;
use crate::spectral::dense_cap;
use crate::xor::{derive_4xor, Partition};

/// A linear code with 2-uniform matchings whose every clause decodes its
/// message bit for every message. Only [`VerifiedWldc::verify`] builds one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedWldc {
    code: LinearCode,
    matchings: MatchingFamily,
    delta: f64,
}

impl VerifiedWldc {
    /// Checks every clause against all `2^k` messages.
    pub fn verify(code: LinearCode, matchings: MatchingFamily) -> Result<Self> {
        if matchings.q() != 2 || matchings.k() != code.k() || matchings.n() != code.n() {
            return Err(Error::input("expected 2-uniform matchings matching the code's k and n"));
        }
        let k = code.k();
        if k > 16 {
            return Err(Error::capacity("k for exhaustive wLDC verification", k, 16));
        }
        for (i, h) in matchings.members().iter().enumerate() {
            for e in h.edges() {
                let (cu, cv) = (code.column(e[0] as usize), code.column(e[1] as usize));
                let bad = (0..1u64 << k).find(|&b| {
                    let parity = ((cu ^ cv) & b).count_ones() % 2 == 1;
                    parity != (b >> i & 1 == 1)
                });
                if let Some(b) = bad {
                    return Err(Error::ContractViolation(format!(
                        "clause {e:?} of H_{i} fails to decode message {b:#b}"
                    )));
                }
            }
        }
        let delta = matchings.m() as f64 / (code.n() * k) as f64;
        Ok(Self {
            code,
            matchings,
            delta,
        })
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn matchings(&self) -> &MatchingFamily {
        &self.matchings
    }

    /// `sum |M_i| / (n k)`.
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `n >= 2^{delta k}` for a verified linear weak 2-query LDC.
pub fn gkst_check(w: &VerifiedWldc) -> bool {
    (w.code.n() as f64).log2() + 1e-12 >= w.delta * w.code.k() as f64
}

/// Message bits of `L`, compressed: bit `t` of the result is bit `L[t]`.
fn gather(col: u64, left: &[usize]) -> u64 {
    left.iter()
        .enumerate()
        .fold(0, |acc, (t, &i)| acc | ((col >> i & 1) << t))
}

fn restrict(code_cols: impl Iterator<Item = u64>, left: &[usize]) -> Result<LinearCode> {
    LinearCode::new(left.len(), code_cols.map(|c| gather(c, left)).collect())
}

/// Greedy matching over edges in the given order.
fn greedy_matching(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut used = vec![false; n];
    let mut out = Vec::new();
    for &(u, v) in edges {
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            out.push((u, v));
        }
    }
    out
}

fn max_degree(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut deg = vec![0usize; n];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg.into_iter().max().unwrap_or(0)
}

/// One of the two reduced codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedCode {
    /// Surviving message indices `L`, in increasing order.
    pub left: Vec<usize>,
    /// `|G_i|` (edges before matching extraction), parallel to `left`.
    pub graph_edges: Vec<usize>,
    /// Maximum vertex degree of each graph, parallel to `left`.
    pub max_degrees: Vec<usize>,
    pub wldc: VerifiedWldc,
    pub gkst: bool,
}

impl ReducedCode {
    pub fn delta(&self) -> f64 {
        self.wldc.delta()
    }

    pub fn matching_edges(&self) -> usize {
        self.wldc.matchings().m()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WldcParams {
    pub d: usize,
    pub ell: usize,
    /// Constant in the size targets `c delta d/(d+k)` and `c delta^2/d`.
    pub size_constant: f64,
}

impl Default for WldcParams {
    fn default() -> Self {
        Self {
            d: 2,
            ell: 2,
            size_constant: 1.0 / 16.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WldcReduction {
    pub delta: f64,
    pub heavy_pairs: usize,
    pub bipartite_edges: usize,
    pub residual_edges: usize,
    /// `sum |G_i| >= delta n k / 2`.
    pub branch_c2: bool,
    /// `sum |H'_i| >= delta n k / 2`.
    pub branch_c3: bool,
    pub c2: Option<ReducedCode>,
    pub c3: Option<ReducedCode>,
    pub c2_target: f64,
    pub c3_target: f64,
    pub c2_meets: bool,
    pub c3_meets: bool,
    /// Some code whose branch condition holds meets its size target.
    pub guarantee_holds: bool,
}

/// Builds both candidate codes from a linear 3-query weak LDC.
pub fn wldc_reduction(ldc: &NormalLdc, params: &WldcParams) -> Result<WldcReduction> {
    let code = ldc.code.as_linear().ok_or_else(|| {
        Error::Unsupported(
            "the reduction fixes the dropped message bits to 0, which only preserves decoding for linear codes"
                .into(),
        )
    })?;
    let family = &ldc.matchings;
    family.require_q(3, "the weak LDC reduction")?;
    let (n, k) = (family.n(), family.k());
    if k > 12 {
        return Err(Error::capacity("k for the weak LDC reduction", k, 12));
    }
    let verified = verify_linear_exact(code, family)?;
    if !verified {
        return Err(Error::input("input clauses do not decode exactly"));
    }
    let d = params.d.max(1);
    let dec = decompose(family, d)?;
    let delta = family.m() as f64 / (n * k) as f64;
    let bipartite_edges = dec.bipartite_edge_count();
    let residual_edges = dec.residual.m();
    let half = delta * (n * k) as f64 / 2.0;

    let c2 = if bipartite_edges > 0 {
        Some(build_c2(code, &dec, d)?)
    } else {
        None
    };
    let c3 = if residual_edges > 0 {
        Some(build_c3(code, &dec.residual, params.ell)?)
    } else {
        None
    };
    let c = params.size_constant;
    let c2_target = c * delta * d as f64 / (d + k) as f64;
    let c3_target = c * delta * delta / d as f64;
    let c2_meets = c2.as_ref().is_some_and(|r| r.delta() >= c2_target);
    let c3_meets = c3.as_ref().is_some_and(|r| r.delta() >= c3_target);
    let branch_c2 = bipartite_edges as f64 >= half;
    let branch_c3 = residual_edges as f64 >= half;
    Ok(WldcReduction {
        delta,
        heavy_pairs: dec.heavy_pairs.len(),
        bipartite_edges,
        residual_edges,
        branch_c2,
        branch_c3,
        c2,
        c3,
        c2_target,
        c3_target,
        c2_meets,
        c3_meets,
        guarantee_holds: (branch_c2 && c2_meets) || (branch_c3 && c3_meets),
    })
}

fn verify_linear_exact(code: &LinearCode, family: &MatchingFamily) -> Result<bool> {
    Ok(family.members().iter().enumerate().all(|(i, h)| {
        h.edges()
            .iter()
            .all(|e| e.iter().fold(0u64, |acc, &v| acc ^ code.column(v as usize)) == 1 << i)
    }))
}

/// Partitions with `|L| >= ceil(k/2)`, as sorted `L` lists.
fn large_left_sets(k: usize) -> Vec<Vec<usize>> {
    (0..1u64 << k)
        .filter(|m| 2 * (m.count_ones() as usize) >= k && (m.count_ones() as usize) < k)
        .map(|m| (0..k).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

fn build_c2(code: &LinearCode, dec: &crate::hypergraph::DecompositionResult, d: usize) -> Result<ReducedCode> {
    let n = code.n();
    let k = dec.bipartite.len();
    let dup = duplicate_heavy_pairs(dec, d);
    // for each copy, the (member, left vertex) pairs using it
    let mut by_copy: Vec<Vec<(usize, Vertex)>> = vec![Vec::new(); dup.copies.len()];
    for (i, g) in dup.graphs.iter().enumerate() {
        for &(w, c) in g {
            by_copy[c].push((i, w));
        }
    }
    let graphs_for = |left: &[usize]| -> Vec<Vec<(usize, usize)>> {
        let in_left: Vec<bool> = (0..k).map(|i| left.contains(&i)).collect();
        left.iter()
            .map(|&i| {
                let mut edges = BTreeSet::new();
                for &(w, c) in &dup.graphs[i] {
                    for &(j, v) in &by_copy[c] {
                        if !in_left[j] && v != w {
                            edges.insert((w.min(v) as usize, w.max(v) as usize));
                        }
                    }
                }
                edges.into_iter().collect()
            })
            .collect()
    };
    let left = large_left_sets(k)
        .into_iter()
        .max_by_key(|l| {
            let total: usize = graphs_for(l).iter().map(Vec::len).sum();
            // ties go to the first candidate in enumeration order
            (total, std::cmp::Reverse(l.clone()))
        })
        .ok_or_else(|| Error::input("need k >= 2 to split message indices"))?;
    let graphs = graphs_for(&left);
    finish(code.columns().iter().copied(), n, left, graphs)
}

fn build_c3(code: &LinearCode, residual: &MatchingFamily, ell: usize) -> Result<ReducedCode> {
    let n = residual.n();
    let k = residual.k();
    if ell < 2 {
        return Err(Error::input("l must be at least 2"));
    }
    let ix = SubsetIndexer::new(2 * n, ell)?;
    let big_n = ix.count();
    let cap = dense_cap();
    if big_n > cap {
        return Err(Error::capacity("C(2n, l) for the Kikuchi code", big_n, cap));
    }
    // choose L maximizing the number of cross derived clauses
    let left = large_left_sets(k)
        .into_iter()
        .map(|l| {
            let p = Partition::new((0..k).map(|i| l.contains(&i)).collect());
            let count = derive_4xor(residual, &p).map(|d| d.clauses.len());
            count.map(|c| (c, l))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max_by_key(|(c, l)| (*c, std::cmp::Reverse(l.clone())))
        .map(|(_, l)| l)
        .ok_or_else(|| Error::input("need k >= 2 to split message indices"))?;
    let partition = Partition::new((0..k).map(|i| left.contains(&i)).collect());
    let graphs = left
        .iter()
        .map(|&i| {
            let b = build_b_owner(residual, &partition, i, ell)?;
            let edges: BTreeSet<(usize, usize)> = b
                .entries()
                .iter()
                .filter(|e| e.0 != e.1)
                .map(|e| (e.0.min(e.1), e.0.max(e.1)))
                .collect();
            Ok(edges.into_iter().collect())
        })
        .collect::<Result<Vec<Vec<(usize, usize)>>>>()?;
    let columns = (0..big_n).map(|r| {
        ix.unrank(r)
            .expect("rank in range")
            .iter()
            .fold(0u64, |acc, &e| acc ^ code.column(e as usize % n))
    });
    finish(columns, big_n, left, graphs)
}

fn finish(
    columns: impl Iterator<Item = u64>,
    n: usize,
    left: Vec<usize>,
    graphs: Vec<Vec<(usize, usize)>>,
) -> Result<ReducedCode> {
    let code = restrict(columns, &left)?;
    let mut members = Vec::with_capacity(left.len());
    let mut max_degrees = Vec::with_capacity(left.len());
    for (g, i) in graphs.iter().zip(&left) {
        let m = greedy_matching(n, g);
        let deg = max_degree(n, g);
        if !g.is_empty() && 2 * deg * m.len() < g.len() {
            return Err(Error::ContractViolation(format!(
                "greedy matching for index {i} has {} edges, below |E|/(2 maxdeg) = {}/{}",
                m.len(),
                g.len(),
                2 * deg
            )));
        }
        max_degrees.push(deg);
        let edges = m.into_iter().map(|(u, v)| vec![u as Vertex, v as Vertex]).collect();
        members.push(Hypergraph::matching(n, 2, edges)?);
    }
    let wldc = VerifiedWldc::verify(code, MatchingFamily::new(members)?)?;
    let gkst = gkst_check(&wldc);
    if !gkst {
        return Err(Error::ContractViolation(format!(
            "verified weak 2-LDC with n={} and delta*k={} violates n >= 2^(delta k)",
            wldc.code().n(),
            wldc.delta() * wldc.code().k() as f64
        )));
    }
    debug_assert!(wldc.code().k() <= 64 && wldc.code().columns().iter().all(|&c| c & !low_bits(wldc.code().k()) == 0));
    Ok(ReducedCode {
        left,
        graph_edges: graphs.iter().map(Vec::len).collect(),
        max_degrees,
        wldc,
        gkst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldc::{hadamard_fixture, pad_to_qplus1};

    #[test]
    fn hadamard_passes_gkst() {
        let h = hadamard_fixture(4).unwrap();
        let code = h.code.as_linear().unwrap().clone();
        let w = VerifiedWldc::verify(code, h.matchings.clone()).unwrap();
        assert_eq!(w.delta(), 0.5);
        assert!(gkst_check(&w));
    }

    #[test]
    fn verification_rejects_bad_clause() {
        let h = hadamard_fixture(2).unwrap();
        let code = h.code.as_linear().unwrap().clone();
        let swapped = MatchingFamily::new(vec![h.matchings.member(1).clone(), h.matchings.member(0).clone()])
            .unwrap();
        assert!(VerifiedWldc::verify(code, swapped).is_err());
    }

    #[test]
    fn padded_hadamard_reduction_decodes() {
        let p = pad_to_qplus1(&hadamard_fixture(3).unwrap()).unwrap();
        let r = wldc_reduction(&p, &WldcParams { d: 1, ell: 2, size_constant: 1.0 / 16.0 }).unwrap();
        assert!(r.branch_c2 || r.branch_c3);
        for c in [&r.c2, &r.c3].into_iter().flatten() {
            assert!(c.gkst);
            assert!(2 * c.left.len() >= 3);
        }
    }

    #[test]
    fn nonlinear_is_unsupported() {
        let p = pad_to_qplus1(&hadamard_fixture(2).unwrap()).unwrap();
        let table = crate::ldc::TableCode::from_fn(2, 8, |b| p.code.encode(b)).unwrap();
        let nl = NormalLdc::new(crate::ldc::CodeSource::Table(table), p.matchings.clone(), 0.5, 0.25, false)
            .unwrap();
        assert!(matches!(wldc_reduction(&nl, &WldcParams::default()), Err(Error::Unsupported(_))));
    }
}
