//! Upper bounds on spectral norms, a power-iteration lower estimate, the
//! 2-XOR certificate for bipartite instances, and an empirical check of the
//! matrix Khintchine bound.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::BipartiteFamily;
use crate::kikuchi::KikuchiMatrix;
use crate::refuter::{digest_text, RefutationCertificate};

/// Default cap on dense block dimensions; `KIKUCHI_DENSE_CAP` overrides it.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// Multiplicative inflation applied to eigensolver output.
pub const DENSE_SLACK: f64 = 1e-9;

/// Inflation covering the rounding of a single square root.
const PRODUCT_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMode {
    /// Symmetric eigensolve of the smaller Gram matrix, block by block.
    DenseExact,
    /// `sqrt(max column l1 * max row l1)`, valid at any size.
    Product,
}

impl SpectralMode {
    pub fn label(&self) -> &'static str {
        match self {
            SpectralMode::DenseExact => "dense",
            SpectralMode::Product => "product",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub value: f64,
    pub method: SpectralMode,
    pub slack: f64,
}

/// Dense cap from the environment, falling back to [`DEFAULT_DENSE_CAP`].
pub fn dense_cap() -> usize {
    std::env::var("KIKUCHI_DENSE_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}

pub fn spectral_norm_upper(m: &KikuchiMatrix, mode: SpectralMode) -> Result<SpectralBound> {
    spectral_norm_upper_capped(m, mode, dense_cap())
}

pub fn spectral_norm_upper_capped(
    m: &KikuchiMatrix,
    mode: SpectralMode,
    cap: usize,
) -> Result<SpectralBound> {
    match mode {
        SpectralMode::Product => {
            let p = (m.max_row_l1() as f64 * m.max_col_l1() as f64).sqrt();
            Ok(SpectralBound {
                value: p * (1.0 + PRODUCT_SLACK),
                method: mode,
                slack: PRODUCT_SLACK,
            })
        }
        SpectralMode::DenseExact => {
            let sigma = blocks(m)
                .into_iter()
                .map(|b| block_norm(&b, cap))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(SpectralBound {
                value: sigma * (1.0 + DENSE_SLACK),
                method: mode,
                slack: DENSE_SLACK,
            })
        }
    }
}

/// Connected block of a sparse matrix: local entries and dimensions.
struct Block {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Splits into blocks connected through shared rows or columns; the norm
/// is the maximum over blocks. Empty rows and columns vanish.
fn blocks(m: &KikuchiMatrix) -> Vec<Block> {
    let mut row_id: BTreeMap<usize, usize> = BTreeMap::new();
    let mut col_id: BTreeMap<usize, usize> = BTreeMap::new();
    for &(r, c, _) in m.entries() {
        let nr = row_id.len();
        row_id.entry(r).or_insert(nr);
        let nc = col_id.len();
        col_id.entry(c).or_insert(nc);
    }
    let nr = row_id.len();
    let mut parent: Vec<usize> = (0..nr + col_id.len()).collect();
    for &(r, c, _) in m.entries() {
        let a = find(&mut parent, row_id[&r]);
        let b = find(&mut parent, nr + col_id[&c]);
        parent[a] = b;
    }
    let mut by_root: BTreeMap<usize, (BTreeMap<usize, usize>, BTreeMap<usize, usize>, Vec<(usize, usize, f64)>)> =
        BTreeMap::new();
    for &(r, c, w) in m.entries() {
        let root = find(&mut parent, row_id[&r]);
        let (rows, cols, entries) = by_root.entry(root).or_default();
        let lr = rows.len();
        let lr = *rows.entry(r).or_insert(lr);
        let lc = cols.len();
        let lc = *cols.entry(c).or_insert(lc);
        entries.push((lr, lc, w as f64));
    }
    by_root
        .into_values()
        .map(|(rows, cols, entries)| Block {
            rows: rows.len(),
            cols: cols.len(),
            entries,
        })
        .collect()
}

fn block_norm(b: &Block, cap: usize) -> Result<f64> {
    if b.rows == 1 || b.cols == 1 {
        return Ok(b.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt());
    }
    let big = b.rows.max(b.cols);
    if big > cap {
        return Err(Error::Capacity {
            what: "dense block dimension",
            actual: big,
            cap,
            hint: "; use the product bound (--spectral product) or raise KIKUCHI_DENSE_CAP",
        });
    }
    let mut dense = DMatrix::<f64>::zeros(b.rows, b.cols);
    for &(r, c, w) in &b.entries {
        dense[(r, c)] += w;
    }
    let gram = if b.rows <= b.cols {
        &dense * dense.transpose()
    } else {
        dense.transpose() * &dense
    };
    Ok(largest_eigenvalue(gram).max(0.0).sqrt())
}

fn largest_eigenvalue(sym: DMatrix<f64>) -> f64 {
    if sym.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Lower estimate of the largest singular value by power iteration on
/// `M^T M`. Never used inside certificates.
pub fn power_iteration_lower(m: &KikuchiMatrix, iterations: usize, seed: u64) -> f64 {
    if m.nnz() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..m.cols()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut best: f64 = 0.0;
    for _ in 0..iterations.max(1) {
        let norm_v = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm_v == 0.0 {
            break;
        }
        v.iter_mut().for_each(|a| *a /= norm_v);
        let mut u = vec![0.0; m.rows()];
        for &(r, c, w) in m.entries() {
            u[r] += w as f64 * v[c];
        }
        let norm_u = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        best = best.max(norm_u);
        let mut next = vec![0.0; m.cols()];
        for &(r, c, w) in m.entries() {
            next[c] += w as f64 * u[r];
        }
        v = next;
    }
    best
}

/// `sum_i b_i A_i` where `A_i` is the `n x |P|` adjacency matrix of `G_i`.
pub fn bipartite_matrix(bip: &BipartiteFamily, signs: &[i8]) -> Result<KikuchiMatrix> {
    if signs.len() != bip.k() {
        return Err(Error::input("sign vector length does not match k"));
    }
    let trip = bip
        .graphs
        .iter()
        .zip(signs)
        .flat_map(|(g, &b)| g.iter().map(move |&(w, p)| (w as usize, p, b as i64)))
        .collect();
    KikuchiMatrix::from_triplets(bip.n, bip.right, trip)
}

/// `g_b(x, y) = sum_i b_i sum_{(w,p) in G_i} x_w y_p`.
pub fn g_b_value(bip: &BipartiteFamily, signs: &[i8], x: &[i8], y: &[i8]) -> i64 {
    bip.graphs
        .iter()
        .zip(signs)
        .map(|(g, &b)| {
            b as i64 * g.iter().map(|&(w, p)| (x[w as usize] * y[p]) as i64).sum::<i64>()
        })
        .sum()
}

/// Exact `val(g_b)`: enumerates `x` and picks each `y_p` optimally.
pub fn g_b_brute_force(bip: &BipartiteFamily, signs: &[i8], cap: usize) -> Result<i64> {
    if bip.n > cap.min(40) {
        return Err(Error::capacity("left vertices for brute force", bip.n, cap.min(40)));
    }
    let m = bipartite_matrix(bip, signs)?;
    let mut cols: Vec<Vec<(usize, i64)>> = vec![Vec::new(); bip.right];
    for &(r, c, w) in m.entries() {
        cols[c].push((r, w));
    }
    let best = (0u64..1u64 << bip.n)
        .into_par_iter()
        .map(|mask| {
            cols.iter()
                .map(|col| {
                    col.iter()
                        .map(|&(r, w)| if mask >> r & 1 == 1 { -w } else { w })
                        .sum::<i64>()
                        .abs()
                })
                .sum::<i64>()
        })
        .max()
        .unwrap_or(0);
    Ok(best)
}

/// Certificate `sqrt(n |P|) * ||sum_i b_i A_i||` on `val(g_b)`.
pub fn refute_2xor(
    bip: &BipartiteFamily,
    signs: &[i8],
    mode: SpectralMode,
) -> Result<RefutationCertificate> {
    if !bip.is_matching_family() {
        return Err(Error::input("every G_i must be a matching"));
    }
    let a = bipartite_matrix(bip, signs)?;
    let sb = if a.nnz() == 0 {
        SpectralBound {
            value: 0.0,
            method: mode,
            slack: 0.0,
        }
    } else {
        spectral_norm_upper(&a, mode)?
    };
    let scale = ((bip.n * bip.right) as f64).sqrt();
    let digest_src = format!(
        "{}\n{:?}",
        serde_json::to_string(bip).expect("serializable"),
        signs
    );
    Ok(RefutationCertificate {
        target: "g_b".into(),
        instance_digest: digest_text(&digest_src),
        bound: scale * sb.value,
        components: vec![
            ("sqrt_n_times_p".into(), scale),
            ("spectral_norm".into(), sb.value),
        ],
        partition_mode: "none".into(),
        spectral_method: mode.label().into(),
        sound: true,
        slack: sb.slack,
        formula: "sqrt(n*|P|) * ||sum_i b_i A_i||".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KhintchineAudit {
    pub samples: usize,
    pub empirical_mean: f64,
    pub sigma2: f64,
    pub d1: usize,
    pub d2: usize,
    pub bound: f64,
    /// True when `empirical_mean > 1.05 * bound`.
    pub violated: bool,
}

/// Compares the sample mean of `||sum_i b_i A_i||` with
/// `sqrt(2 sigma^2 log(d1 + d2))`.
pub fn khintchine_audit(
    mats: &[KikuchiMatrix],
    samples: usize,
    seed: u64,
) -> Result<KhintchineAudit> {
    if samples == 0 {
        return Err(Error::input("Khintchine audit needs at least one sample"));
    }
    let first = mats
        .first()
        .ok_or_else(|| Error::input("Khintchine audit needs at least one matrix"))?;
    let (d1, d2) = (first.rows(), first.cols());
    if mats.iter().any(|m| m.rows() != d1 || m.cols() != d2) {
        return Err(Error::input("matrices must share a shape"));
    }
    let cap = dense_cap();
    if d1.max(d2) > cap {
        return Err(Error::capacity("Khintchine matrix dimension", d1.max(d2), cap));
    }
    let mut left = DMatrix::<f64>::zeros(d1, d1);
    let mut right = DMatrix::<f64>::zeros(d2, d2);
    for m in mats {
        let mut dense = DMatrix::<f64>::zeros(d1, d2);
        for &(r, c, w) in m.entries() {
            dense[(r, c)] = w as f64;
        }
        left += &dense * dense.transpose();
        right += dense.transpose() * &dense;
    }
    let sigma2 = largest_eigenvalue(left).max(largest_eigenvalue(right)).max(0.0);
    let bound = (2.0 * sigma2 * ((d1 + d2) as f64).ln()).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<i64>> = (0..samples)
        .map(|_| {
            (0..mats.len())
                .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
                .collect()
        })
        .collect();
    let norms = draws
        .par_iter()
        .map(|b| {
            let terms: Vec<(i64, &KikuchiMatrix)> = b.iter().copied().zip(mats).collect();
            let sum = KikuchiMatrix::linear_combination(&terms)?;
            Ok(spectral_norm_upper_capped(&sum, SpectralMode::DenseExact, cap)?.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let empirical_mean = norms.iter().sum::<f64>() / samples as f64;
    Ok(KhintchineAudit {
        samples,
        empirical_mean,
        sigma2,
        d1,
        d2,
        bound,
        violated: empirical_mean > 1.05 * bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, t: Vec<(usize, usize, i64)>) -> KikuchiMatrix {
        KikuchiMatrix::from_triplets(rows, cols, t).unwrap()
    }

    #[test]
    fn identity_and_ones() {
        let id = mat(2, 2, vec![(0, 0, 1), (1, 1, 1)]);
        let ones = mat(2, 2, vec![(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)]);
        for mode in [SpectralMode::DenseExact, SpectralMode::Product] {
            assert!((spectral_norm_upper(&id, mode).unwrap().value - 1.0).abs() < 1e-8);
            assert!((spectral_norm_upper(&ones, mode).unwrap().value - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn transpose_agrees() {
        let m = mat(3, 4, vec![(0, 0, 2), (0, 3, -1), (1, 1, 1), (2, 1, 3), (2, 2, 1)]);
        let a = spectral_norm_upper(&m, SpectralMode::DenseExact).unwrap().value;
        let b = spectral_norm_upper(&m.transpose(), SpectralMode::DenseExact).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let t = (0..10).flat_map(|i| [(i, i, 1), (i, (i + 1) % 10, 1)]).collect();
        let m = mat(10, 10, t);
        let err = spectral_norm_upper_capped(&m, SpectralMode::DenseExact, 5).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        assert!(spectral_norm_upper_capped(&m, SpectralMode::Product, 5).is_ok());
    }

    #[test]
    fn single_edge_two_xor() {
        let bip = BipartiteFamily::new(4, 1, vec![vec![(0, 0)]]).unwrap();
        let cert = refute_2xor(&bip, &[1], SpectralMode::DenseExact).unwrap();
        assert!((cert.bound - 2.0).abs() < 1e-8);
        assert_eq!(g_b_brute_force(&bip, &[1], 24).unwrap(), 1);
        let empty = BipartiteFamily::new(4, 0, vec![vec![]]).unwrap();
        assert_eq!(refute_2xor(&empty, &[1], SpectralMode::DenseExact).unwrap().bound, 0.0);
    }

    #[test]
    fn disjoint_diagonal_khintchine() {
        let mats: Vec<_> = (0..4).map(|i| mat(4, 4, vec![(i, i, 1)])).collect();
        let a = khintchine_audit(&mats, 20, 7).unwrap();
        assert!((a.empirical_mean - 1.0).abs() < 1e-8);
        assert!((a.sigma2 - 1.0).abs() < 1e-12);
        assert!(!a.violated);
    }
}
