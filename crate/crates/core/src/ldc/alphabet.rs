//! Reduction from codes over a small alphabet to binary codes: each symbol
//! is replaced by its first-order Reed-Muller encoding and each decoder is
//! replaced by its best-correlated character.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CodeSource, NormalLdc, TableCode, EXACT_K_CAP};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, MatchingFamily, Vertex};

/// Code `{0,1}^k -> Sigma^n` with `Sigma` a set of `sigma_bits`-bit
/// symbols, tabulated over all messages, plus one decoder truth table per
/// clause.
///
/// `decoders[i][c]` is indexed by the packed query answers
/// `sum_t y_t << (t * sigma_bits)`, where `y_t` is the symbol at the
/// `t`-th smallest vertex of clause `c` of `H_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralAlphabetCode {
    pub k: usize,
    pub n: usize,
    pub sigma_bits: usize,
    pub alphabet: Vec<u8>,
    pub codewords: Vec<Vec<u8>>,
    pub decoders: Vec<Vec<Vec<bool>>>,
}

impl GeneralAlphabetCode {
    pub fn new(
        k: usize,
        n: usize,
        sigma_bits: usize,
        alphabet: Vec<u8>,
        codewords: Vec<Vec<u8>>,
        decoders: Vec<Vec<Vec<bool>>>,
    ) -> Result<Self> {
        if k > EXACT_K_CAP {
            return Err(Error::capacity("k for alphabet codes", k, EXACT_K_CAP));
        }
        if sigma_bits == 0 || sigma_bits > 3 {
            return Err(Error::input("symbol width must be 1, 2 or 3 bits"));
        }
        if alphabet.is_empty() || alphabet.iter().any(|&s| s as usize >= 1 << sigma_bits) {
            return Err(Error::input("alphabet symbols must fit the symbol width"));
        }
        if codewords.len() != 1 << k || codewords.iter().any(|w| w.len() != n) {
            return Err(Error::input("codeword table must have 2^k words of length n"));
        }
        if codewords.iter().flatten().any(|s| !alphabet.contains(s)) {
            return Err(Error::input("codeword uses a symbol outside the alphabet"));
        }
        if decoders.len() != k {
            return Err(Error::input("need decoders for every message index"));
        }
        Ok(Self {
            k,
            n,
            sigma_bits,
            alphabet,
            codewords,
            decoders,
        })
    }

    /// Probability over messages that the decoder of clause `c` of `H_i`
    /// outputs `b_i`.
    pub fn decoder_bias(&self, i: usize, c: usize, clause: &[Vertex]) -> f64 {
        let hits = (0..1u64 << self.k)
            .filter(|&b| {
                let idx = self.pack(b, clause);
                self.decoders[i][c][idx] == (b >> i & 1 == 1)
            })
            .count();
        hits as f64 / (1u64 << self.k) as f64
    }

    fn pack(&self, msg: u64, clause: &[Vertex]) -> usize {
        clause
            .iter()
            .enumerate()
            .map(|(t, &v)| (self.codewords[msg as usize][v as usize] as usize) << (t * self.sigma_bits))
            .sum()
    }
}

/// `RM_1(sigma)_{(a, t)} = <a, sigma> xor t`, at offset `(a << 1) | t`.
pub fn rm1_encode(sigma: u8, sigma_bits: usize) -> Vec<bool> {
    (0..1u32 << (sigma_bits + 1))
        .map(|pos| {
            let (a, t) = (pos >> 1, pos & 1 == 1);
            ((a & sigma as u32).count_ones() % 2 == 1) ^ t
        })
        .collect()
}

/// The character chosen for one clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterChoice {
    pub i: usize,
    pub clause: usize,
    /// `S_t` as a bitmask over symbol bits, one per query.
    pub sets: Vec<u8>,
    pub t: bool,
    /// Decoder bias of the original clause.
    pub input_bias: f64,
    /// `|E[(-1)^{b_i + chi_S}]| / 2`, the advantage of the character.
    pub advantage: f64,
    pub target: f64,
    pub new_clause: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphabetReduction {
    pub ldc: NormalLdc,
    pub choices: Vec<CharacterChoice>,
    /// `eps / (2^q |Sigma|^{q/2})`.
    pub target: f64,
    pub n_prime: usize,
}

/// Replaces each symbol by its RM_1 encoding and each clause by the query
/// set of its best character.
///
/// Fails with a contract violation when a clause's best character falls
/// short of the target advantage.
pub fn alphabet_reduce(
    code: &GeneralAlphabetCode,
    matchings: &MatchingFamily,
    eps: f64,
) -> Result<AlphabetReduction> {
    let (k, q, w) = (code.k, matchings.q(), code.sigma_bits);
    if k > 12 {
        return Err(Error::capacity("k for alphabet reduction", k, 12));
    }
    if matchings.k() != k || matchings.n() != code.n {
        return Err(Error::input("matchings do not match the code's k and n"));
    }
    if q < 2 {
        return Err(Error::input("alphabet reduction needs q >= 2"));
    }
    if (1usize << w) > 2 * code.alphabet.len() {
        return Err(Error::input(format!(
            "symbol width {w} is too wide for an alphabet of size {}",
            code.alphabet.len()
        )));
    }
    for (i, h) in matchings.members().iter().enumerate() {
        if code.decoders[i].len() != h.len()
            || code.decoders[i].iter().any(|t| t.len() != 1 << (q * w))
        {
            return Err(Error::input(format!("decoder tables for H_{i} have the wrong shape")));
        }
    }
    let block = 1usize << (w + 1);
    let n_prime = code.n * block;
    let sigma = code.alphabet.len() as f64;
    let target = eps / (2f64.powi(q as i32) * sigma.powf(q as f64 / 2.0));
    let clauses: Vec<(usize, usize, &Vec<Vertex>)> = matchings
        .members()
        .iter()
        .enumerate()
        .flat_map(|(i, h)| h.edges().iter().enumerate().map(move |(c, e)| (i, c, e)))
        .collect();
    let choices = clauses
        .par_iter()
        .map(|&(i, c, e)| {
            let width = q * w;
            let mut count = vec![0i64; 1 << width];
            for b in 0..1u64 << k {
                count[code.pack(b, e)] += if b >> i & 1 == 1 { -1 } else { 1 };
            }
            // best character over all packed (S_1..S_q), first maximum wins
            let (best_s, best_corr) = (0..1usize << width)
                .map(|s| {
                    let corr: i64 = count
                        .iter()
                        .enumerate()
                        .map(|(idx, &cnt)| if (idx & s).count_ones() % 2 == 1 { -cnt } else { cnt })
                        .sum();
                    (s, corr)
                })
                .fold((0, 0i64), |best, cur| if cur.1.abs() > best.1.abs() { cur } else { best });
            let advantage = best_corr.unsigned_abs() as f64 / (1u64 << k) as f64 / 2.0;
            let input_bias = code.decoder_bias(i, c, e);
            if advantage + 1e-12 < target {
                return Err(Error::ContractViolation(format!(
                    "clause {c} of H_{i}: best character advantage {advantage} is below {target} (decoder bias {input_bias})"
                )));
            }
            let t = best_corr < 0;
            let sets: Vec<u8> = (0..q).map(|j| ((best_s >> (j * w)) & ((1 << w) - 1)) as u8).collect();
            let mut new_clause: Vec<Vertex> = e
                .iter()
                .zip(&sets)
                .enumerate()
                .map(|(j, (&v, &s))| {
                    let tbit = usize::from(j == 0 && t);
                    (v as usize * block + ((s as usize) << 1) + tbit) as Vertex
                })
                .collect();
            new_clause.sort_unstable();
            Ok(CharacterChoice {
                i,
                clause: c,
                sets,
                t,
                input_bias,
                advantage,
                target,
                new_clause,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let members = (0..k)
        .map(|i| {
            let edges = choices
                .iter()
                .filter(|ch| ch.i == i)
                .map(|ch| ch.new_clause.clone())
                .collect();
            Hypergraph::matching(n_prime, q, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    let table = TableCode::from_fn(k, n_prime, |b| {
        code.codewords[b as usize]
            .iter()
            .flat_map(|&s| rm1_encode(s, w))
            .collect()
    })?;
    let min_adv = choices.iter().map(|c| c.advantage).fold(0.5, f64::min);
    let family = MatchingFamily::new(members)?;
    let delta = family.m() as f64 / (n_prime * k) as f64;
    let ldc = NormalLdc::new(
        CodeSource::Table(table),
        family,
        min_adv.clamp(f64::MIN_POSITIVE, 0.5),
        delta.clamp(f64::MIN_POSITIVE, 0.5),
        true,
    )?;
    Ok(AlphabetReduction {
        ldc,
        choices,
        target,
        n_prime,
    })
}

/// Two-bit-alphabet fixture on `2^{k+1}` positions.
///
/// Position `a < 2^k` holds the symbol with bit 0 `h_a = <a, b>` and bit 1
/// `g_a = h_a AND h_{rot(a)}`; the remaining positions hold symbol 0.
/// Clause `{a, a ^ e_i, 2^k + idx}` of `H_i` decodes with
/// `h(y_1) xor h(y_2) xor (g(y_1) AND g(y_2)) xor h(y_3)`, so the nonlinear
/// term costs some bias. Returns the code, its matchings, and the exact
/// `eps` with every decoder bias at least `1/2 + eps/2`.
pub fn two_bit_fixture(k: usize) -> Result<(GeneralAlphabetCode, MatchingFamily, f64)> {
    if k == 0 || k > 8 {
        return Err(Error::capacity("k for the two-bit fixture", k, 8));
    }
    let half = 1usize << k;
    let n = 2 * half;
    let rot = |a: u64| ((a << 1) | (a >> (k - 1))) & ((1 << k) - 1);
    let h = |a: u64, b: u64| (a & b).count_ones() % 2 == 1;
    let codewords: Vec<Vec<u8>> = (0..1u64 << k)
        .map(|b| {
            (0..n as u64)
                .map(|a| {
                    if a as usize >= half {
                        return 0;
                    }
                    let ha = h(a, b);
                    let ga = ha && h(rot(a), b);
                    u8::from(ha) | u8::from(ga) << 1
                })
                .collect()
        })
        .collect();
    let table: Vec<bool> = (0..64usize)
        .map(|idx| {
            let (y1, y2, y3) = (idx & 3, (idx >> 2) & 3, (idx >> 4) & 3);
            let hb = |y: usize| y & 1 == 1;
            let gb = |y: usize| y & 2 == 2;
            hb(y1) ^ hb(y2) ^ (gb(y1) && gb(y2)) ^ hb(y3)
        })
        .collect();
    let mut members = Vec::with_capacity(k);
    let mut decoders = Vec::with_capacity(k);
    for i in 0..k {
        let edges: Vec<Vec<Vertex>> = (0..half as Vertex)
            .filter(|a| a >> i & 1 == 0)
            .enumerate()
            .map(|(idx, a)| vec![a, a | 1 << i, (half + idx) as Vertex])
            .collect();
        decoders.push(vec![table.clone(); edges.len()]);
        members.push(Hypergraph::matching(n, 3, edges)?);
    }
    let family = MatchingFamily::new(members)?;
    let code = GeneralAlphabetCode::new(k, n, 2, vec![0b00, 0b01, 0b11], codewords, decoders)?;
    let min_bias = family
        .members()
        .iter()
        .enumerate()
        .flat_map(|(i, hg)| hg.edges().iter().enumerate().map(move |(c, e)| (i, c, e)))
        .map(|(i, c, e)| code.decoder_bias(i, c, e))
        .fold(1.0, f64::min);
    Ok((code, family, 2.0 * (min_bias - 0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldc::{verify_normal, VerifyMode};

    #[test]
    fn rm1_zero_coordinate() {
        for s in 0..4u8 {
            let e = rm1_encode(s, 2);
            assert_eq!(e.len(), 8);
            assert!(!e[0]);
            for a in 0..4u32 {
                for t in 0..2u32 {
                    let want = ((a & s as u32).count_ones() % 2 == 1) ^ (t == 1);
                    assert_eq!(e[((a << 1) | t) as usize], want);
                }
            }
        }
    }

    #[test]
    fn single_bit_decoder_selects_singleton() {
        // symbol at v has bit 1 = b_{v mod 2} and bit 0 = the other message bit
        let k = 2;
        let n = 4;
        let codewords: Vec<Vec<u8>> = (0..4u64)
            .map(|b| {
                (0..n)
                    .map(|v| {
                        let i = v % 2;
                        ((b >> i & 1) as u8) << 1 | (b >> (1 - i) & 1) as u8
                    })
                    .collect()
            })
            .collect();
        // clause {i, i + 2}: decoder reads bit 1 of the first symbol
        let table: Vec<bool> = (0..16usize).map(|idx| idx & 2 == 2).collect();
        let fam = MatchingFamily::from_edges(n, 2, vec![vec![vec![0, 2]], vec![vec![1, 3]]]).unwrap();
        let code = GeneralAlphabetCode::new(
            k,
            n,
            2,
            vec![0, 1, 2, 3],
            codewords,
            vec![vec![table.clone()], vec![table]],
        )
        .unwrap();
        let r = alphabet_reduce(&code, &fam, 1.0).unwrap();
        for ch in &r.choices {
            assert_eq!(ch.sets, vec![0b10, 0]);
            assert!(!ch.t);
            assert_eq!(ch.advantage, 0.5);
        }
        assert_eq!(r.n_prime, 32);
        assert!(verify_normal(&r.ldc, VerifyMode::Exact).unwrap().clauses.iter().all(|c| c.bias == 1.0));
    }

    #[test]
    fn constant_decoder_selects_empty_character() {
        let k = 1;
        let codewords = vec![vec![0u8, 0], vec![0u8, 0]];
        // a constant decoder carries no correlation; the empty tuple wins ties
        let table = vec![true; 4];
        let fam = MatchingFamily::from_edges(2, 2, vec![vec![vec![0, 1]]]).unwrap();
        let code = GeneralAlphabetCode::new(k, 2, 1, vec![0, 1], codewords, vec![vec![table]]).unwrap();
        let r = alphabet_reduce(&code, &fam, 0.0).unwrap();
        assert_eq!(r.choices[0].sets, vec![0, 0]);
    }

    #[test]
    fn two_bit_fixture_reduces() {
        let (code, fam, eps) = two_bit_fixture(3).unwrap();
        assert_eq!(code.alphabet.len(), 3);
        assert!(eps > 0.0 && eps <= 1.0);
        let r = alphabet_reduce(&code, &fam, eps).unwrap();
        assert_eq!(r.n_prime, 16 * 8);
        assert!(r.choices.iter().all(|c| c.advantage >= c.target));
        assert!(r.n_prime <= 4 * code.n * code.alphabet.len());
    }
}
