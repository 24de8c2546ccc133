//! Seeded instance generators. A root seed fans out into named sub-streams
//! so that changing one consumer does not shift the draws of another.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hypergraph::{edge_pairs, Hypergraph, MatchingFamily, Vertex};
use crate::xor::Assignment;

/// Root seed with named, independent sub-streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    root: u64,
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// 32-byte seed `sha256(root_le || name)`.
    fn key(&self, name: &str) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.root.to_le_bytes());
        h.update(name.as_bytes());
        h.finalize().into()
    }

    pub fn rng(&self, name: &str) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key(name))
    }

    /// A 64-bit seed for APIs that take a plain `u64`.
    pub fn seed(&self, name: &str) -> u64 {
        let k = self.key(name);
        u64::from_le_bytes(k[..8].try_into().expect("8 bytes"))
    }

    /// A child stream rooted at [`SeedStream::seed`] of `name`.
    pub fn child(&self, name: &str) -> SeedStream {
        SeedStream::new(self.seed(name))
    }
}

/// `k` random `q`-uniform matchings on `[n]`, each with `per_member`
/// hyperedges (vertex-disjoint within a member).
pub fn random_matching_family(
    rng: &mut impl Rng,
    n: usize,
    q: usize,
    k: usize,
    per_member: usize,
) -> Result<MatchingFamily> {
    check_shape(n, q, k, per_member)?;
    let mut verts: Vec<Vertex> = (0..n as Vertex).collect();
    let members = (0..k)
        .map(|_| {
            verts.shuffle(rng);
            let edges = verts
                .chunks(q)
                .take(per_member)
                .map(|c| {
                    let mut e = c.to_vec();
                    e.sort_unstable();
                    e
                })
                .collect();
            Hypergraph::matching(n, q, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    MatchingFamily::new(members)
}

/// Like [`random_matching_family`] but keeps every pair degree at most `d`
/// by rejecting offending hyperedges. Members may end up with fewer than
/// `per_member` edges.
pub fn random_low_degree_family(
    rng: &mut impl Rng,
    n: usize,
    q: usize,
    k: usize,
    per_member: usize,
    d: usize,
) -> Result<MatchingFamily> {
    check_shape(n, q, k, per_member)?;
    let mut degrees: BTreeMap<(Vertex, Vertex), usize> = BTreeMap::new();
    let mut verts: Vec<Vertex> = (0..n as Vertex).collect();
    let members = (0..k)
        .map(|_| {
            verts.shuffle(rng);
            let mut edges = Vec::new();
            for chunk in verts.chunks_exact(q) {
                if edges.len() == per_member {
                    break;
                }
                let mut e = chunk.to_vec();
                e.sort_unstable();
                if edge_pairs(&e).all(|p| degrees.get(&p).copied().unwrap_or(0) < d) {
                    for p in edge_pairs(&e) {
                        *degrees.entry(p).or_default() += 1;
                    }
                    edges.push(e);
                }
            }
            Hypergraph::matching(n, q, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    MatchingFamily::new(members)
}

fn check_shape(n: usize, q: usize, k: usize, per_member: usize) -> Result<()> {
    if q == 0 || k == 0 {
        return Err(Error::input("q and k must be positive"));
    }
    if per_member * q > n {
        return Err(Error::input(format!(
            "{per_member} disjoint {q}-sets do not fit in n={n}"
        )));
    }
    Ok(())
}

pub fn random_signs(rng: &mut impl Rng, k: usize) -> Vec<i8> {
    (0..k).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()
}

pub fn random_assignment(rng: &mut impl Rng, n: usize) -> Assignment {
    Assignment::new(random_signs(rng, n)).expect("entries are +-1")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_named_and_reproducible() {
        let s = SeedStream::new(7);
        let a: u64 = s.rng("instance").random();
        let b: u64 = s.rng("instance").random();
        let c: u64 = s.rng("partition").random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(s.seed("b"), SeedStream::new(8).seed("b"));
    }

    #[test]
    fn matching_family_shape() {
        let mut rng = SeedStream::new(1).rng("t");
        let f = random_matching_family(&mut rng, 12, 3, 4, 3).unwrap();
        assert_eq!((f.n(), f.q(), f.k(), f.m()), (12, 3, 4, 12));
        assert!(f.members().iter().all(Hypergraph::is_matching));
    }

    #[test]
    fn low_degree_respects_bound() {
        let mut rng = SeedStream::new(2).rng("t");
        for d in 1..4 {
            let f = random_low_degree_family(&mut rng, 12, 3, 4, 4, d).unwrap();
            assert!(f.max_pair_degree().is_none_or(|(_, deg)| deg <= d));
        }
    }

    #[test]
    fn oversized_members_rejected() {
        let mut rng = SeedStream::new(3).rng("t");
        assert!(random_matching_family(&mut rng, 5, 3, 1, 2).is_err());
    }
}
