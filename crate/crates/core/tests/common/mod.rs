//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's own evaluators.

#![allow(dead_code)]

use kikuchi_core::hypergraph::{BipartiteFamily, MatchingFamily};

pub fn binom(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Colex unranking of `size`-subsets.
pub fn colex_unrank(mut rank: u128, size: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(size);
    for i in (1..=size as i64).rev() {
        let mut c = i - 1;
        while binom(c + 1, i) <= rank {
            c += 1;
        }
        rank -= binom(c, i);
        out.push(c as u32);
    }
    out.reverse();
    out
}

pub fn mono(x: &[i8], vars: &[u32]) -> i64 {
    vars.iter().map(|&v| x[v as usize] as i64).product()
}

/// `sum_i b_i sum_{C in H_i} x^C`.
pub fn poly(f: &MatchingFamily, b: &[i8], x: &[i8]) -> i64 {
    f.members()
        .iter()
        .zip(b)
        .map(|(h, &bi)| bi as i64 * h.edges().iter().map(|e| mono(x, e)).sum::<i64>())
        .sum()
}

pub fn assignment(n: usize, mask: u64) -> Vec<i8> {
    (0..n).map(|v| if mask >> v & 1 == 1 { -1 } else { 1 }).collect()
}

pub fn signs(k: usize, mask: u64) -> Vec<i8> {
    assignment(k, mask)
}

pub fn brute_max(f: &MatchingFamily, b: &[i8]) -> i64 {
    (0..1u64 << f.n())
        .map(|mask| poly(f, b, &assignment(f.n(), mask)))
        .max()
        .unwrap()
}

/// `max_{x,y} sum_i b_i sum_{(w,p) in G_i} x_w y_p`, choosing each `y_p`
/// optimally for every `x`.
pub fn brute_g(bip: &BipartiteFamily, b: &[i8]) -> i64 {
    (0..1u64 << bip.n)
        .map(|mask| {
            let x = assignment(bip.n, mask);
            let mut col = vec![0i64; bip.right];
            for (g, &bi) in bip.graphs.iter().zip(b) {
                for &(w, p) in g {
                    col[p] += bi as i64 * x[w as usize] as i64;
                }
            }
            col.iter().map(|c| c.abs()).sum::<i64>()
        })
        .max()
        .unwrap_or(0)
}

/// `f_{L,R}(x)` by walking shared vertices directly.
pub fn f_lr(f: &MatchingFamily, left: &[bool], b: &[i8], x: &[i8]) -> i64 {
    let mut total = 0;
    for u in 0..f.n() as u32 {
        let touching: Vec<(usize, Vec<u32>)> = f
            .members()
            .iter()
            .enumerate()
            .filter_map(|(i, h)| {
                h.edges()
                    .iter()
                    .find(|e| e.contains(&u))
                    .map(|e| (i, e.iter().copied().filter(|&v| v != u).collect()))
            })
            .collect();
        for (i, c) in &touching {
            for (j, cp) in &touching {
                if left[*i] && !left[*j] {
                    total += b[*i] as i64 * b[*j] as i64 * mono(x, c) * mono(x, cp);
                }
            }
        }
    }
    total
}

/// Largest pair degree in the union of the members.
pub fn max_pair_degree(f: &MatchingFamily) -> usize {
    let n = f.n();
    let mut deg = vec![0usize; n * n];
    for h in f.members() {
        for e in h.edges() {
            for a in 0..e.len() {
                for c in a + 1..e.len() {
                    deg[e[a] as usize * n + e[c] as usize] += 1;
                }
            }
        }
    }
    deg.into_iter().max().unwrap_or(0)
}
