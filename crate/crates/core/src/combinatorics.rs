//! Binomial coefficients and the colexicographic subset indexer used to
//! address rows and columns of Kikuchi matrices.

use crate::error::{Error, Result};

/// `C(n, k)` in `u128`, returning 0 when `k > n` or `k < 0`.
pub fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Checked `C(n, k)` as `usize` for sizing matrices.
pub fn binomial_usize(n: usize, k: usize) -> Option<usize> {
    usize::try_from(binomial(n as i64, k as i64)).ok()
}

/// Bijection between `0..C(universe, size)` and sorted `size`-subsets of
/// `0..universe`, in colexicographic order.
///
/// `rank(S) = sum_j C(s_j, j + 1)` for `s_0 < s_1 < ...`.
#[derive(Debug, Clone)]
pub struct SubsetIndexer {
    universe: usize,
    size: usize,
    count: usize,
    // table[v][j] = C(v, j) for v < universe, j <= size
    table: Vec<Vec<usize>>,
}

impl SubsetIndexer {
    pub fn new(universe: usize, size: usize) -> Result<Self> {
        if universe > 128 {
            return Err(Error::capacity("subset universe", universe, 128));
        }
        let count = binomial_usize(universe, size)
            .ok_or_else(|| Error::input(format!("C({universe}, {size}) overflows usize")))?;
        let table = (0..=universe)
            .map(|v| {
                (0..=size + 1)
                    .map(|j| binomial_usize(v, j).unwrap_or(usize::MAX))
                    .collect()
            })
            .collect();
        Ok(Self {
            universe,
            size,
            count,
            table,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of subsets, `C(universe, size)`.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Rank of a strictly increasing subset.
    pub fn rank(&self, subset: &[u32]) -> Result<usize> {
        if subset.len() != self.size {
            return Err(Error::input(format!(
                "subset has {} elements, indexer expects {}",
                subset.len(),
                self.size
            )));
        }
        let mut prev: Option<u32> = None;
        let mut r = 0usize;
        for (j, &s) in subset.iter().enumerate() {
            if s as usize >= self.universe || prev.is_some_and(|p| p >= s) {
                return Err(Error::input(format!(
                    "subset {subset:?} is not strictly increasing within 0..{}",
                    self.universe
                )));
            }
            prev = Some(s);
            r += self.table[s as usize][j + 1];
        }
        Ok(r)
    }

    /// Rank of a subset given as a bitmask over the universe.
    pub fn rank_mask(&self, mask: u128) -> usize {
        debug_assert_eq!(mask.count_ones() as usize, self.size);
        let mut r = 0usize;
        let mut rest = mask;
        let mut j = 1;
        while rest != 0 {
            let s = rest.trailing_zeros() as usize;
            r += self.table[s][j];
            j += 1;
            rest &= rest - 1;
        }
        r
    }

    pub fn unrank(&self, rank: usize) -> Result<Vec<u32>> {
        if rank >= self.count {
            return Err(Error::input(format!(
                "rank {rank} out of range 0..{}",
                self.count
            )));
        }
        let mut out = vec![0u32; self.size];
        let mut r = rank;
        let mut hi = self.universe;
        for j in (1..=self.size).rev() {
            // largest v < hi with C(v, j) <= r
            let mut v = hi - 1;
            while self.table[v][j] > r {
                v -= 1;
            }
            out[j - 1] = v as u32;
            r -= self.table[v][j];
            hi = v;
        }
        Ok(out)
    }

    pub fn unrank_mask(&self, rank: usize) -> Result<u128> {
        Ok(self
            .unrank(rank)?
            .into_iter()
            .fold(0u128, |m, s| m | (1u128 << s)))
    }
}

/// Iterates all `size`-subsets of the set bits of `pool` as bitmasks, in
/// increasing numeric order of the mask.
pub fn subsets_of_mask(pool: u128, size: usize) -> Vec<u128> {
    let elems: Vec<u32> = bits(pool).collect();
    let mut out = Vec::new();
    if size > elems.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().fold(0u128, |m, &i| m | (1u128 << elems[i])));
        // advance like an odometer
        let mut pos = size;
        loop {
            if pos == 0 {
                out.sort_unstable();
                return out;
            }
            pos -= 1;
            if idx[pos] < elems.len() - size + pos {
                idx[pos] += 1;
                for t in pos + 1..size {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Set bit positions of a `u128`, ascending.
pub fn bits(mut mask: u128) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros();
            mask &= mask - 1;
            Some(b)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(8, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(5, -1), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }

    #[test]
    fn indexer_is_exhaustive_bijection() {
        for universe in 0..=10 {
            for size in 0..=universe {
                let ix = SubsetIndexer::new(universe, size).unwrap();
                let mut seen = vec![false; ix.count()];
                for r in 0..ix.count() {
                    let s = ix.unrank(r).unwrap();
                    assert_eq!(ix.rank(&s).unwrap(), r);
                    let mask = s.iter().fold(0u128, |m, &v| m | 1 << v);
                    assert_eq!(ix.rank_mask(mask), r);
                    seen[r] = true;
                }
                assert!(seen.iter().all(|&b| b));
            }
        }
    }

    #[test]
    fn colex_order() {
        let ix = SubsetIndexer::new(4, 2).unwrap();
        let all: Vec<_> = (0..6).map(|r| ix.unrank(r).unwrap()).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 3],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn rank_rejects_bad_subsets() {
        let ix = SubsetIndexer::new(5, 2).unwrap();
        assert!(ix.rank(&[2, 1]).is_err());
        assert!(ix.rank(&[1, 5]).is_err());
        assert!(ix.rank(&[1]).is_err());
        assert!(ix.unrank(10).is_err());
    }

    #[test]
    fn subsets_of_mask_counts() {
        let pool = 0b1011_0110u128;
        for size in 0..=5 {
            let subs = subsets_of_mask(pool, size);
            assert_eq!(subs.len() as u128, binomial(5, size as i64));
            assert!(subs.iter().all(|s| s & !pool == 0 && s.count_ones() as usize == size));
        }
    }
}
