//! Uniform hypergraphs, matching families, pair degrees and the greedy
//! heavy-pair decomposition.
//!
//! Vertices are zero-based: a hypergraph on `n` vertices uses `0..n`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = u32;

/// A `q`-uniform hypergraph on `0..n`. Every edge is strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypergraph {
    n: usize,
    q: usize,
    edges: Vec<Vec<Vertex>>,
}

impl Hypergraph {
    pub fn new(n: usize, q: usize, edges: Vec<Vec<Vertex>>) -> Result<Self> {
        for e in &edges {
            check_edge(n, q, e)?;
        }
        Ok(Self { n, q, edges })
    }

    /// Like [`Hypergraph::new`] but also requires pairwise-disjoint edges.
    pub fn matching(n: usize, q: usize, edges: Vec<Vec<Vertex>>) -> Result<Self> {
        let h = Self::new(n, q, edges)?;
        if let Some((a, b)) = h.first_overlap() {
            return Err(Error::input(format!(
                "not a matching: edges {:?} and {:?} intersect",
                h.edges[a], h.edges[b]
            )));
        }
        Ok(h)
    }

    pub fn empty(n: usize, q: usize) -> Self {
        Self {
            n,
            q,
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn edges(&self) -> &[Vec<Vertex>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_matching(&self) -> bool {
        self.first_overlap().is_none()
    }

    fn first_overlap(&self) -> Option<(usize, usize)> {
        let mut owner: Vec<Option<usize>> = vec![None; self.n];
        for (idx, e) in self.edges.iter().enumerate() {
            for &v in e {
                if let Some(prev) = owner[v as usize] {
                    return Some((prev, idx));
                }
                owner[v as usize] = Some(idx);
            }
        }
        None
    }

    /// Number of edges containing every vertex of `subset`.
    pub fn degree(&self, subset: &[Vertex]) -> Result<usize> {
        check_vertices(self.n, subset)?;
        Ok(degree_in(self.edges.iter(), subset))
    }

    /// For each vertex, the index of the edge containing it (matchings only
    /// have at most one).
    pub(crate) fn vertex_owner(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.n];
        for (idx, e) in self.edges.iter().enumerate() {
            for &v in e {
                owner[v as usize] = Some(idx);
            }
        }
        owner
    }
}

fn check_vertices(n: usize, subset: &[Vertex]) -> Result<()> {
    if let Some(v) = subset.iter().find(|&&v| v as usize >= n) {
        return Err(Error::input(format!("vertex {v} out of range 0..{n}")));
    }
    Ok(())
}

fn check_edge(n: usize, q: usize, e: &[Vertex]) -> Result<()> {
    if e.len() != q {
        return Err(Error::input(format!(
            "edge {e:?} has {} vertices, expected {q}",
            e.len()
        )));
    }
    check_vertices(n, e)?;
    if e.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input(format!("edge {e:?} is not strictly increasing")));
    }
    Ok(())
}

fn degree_in<'a>(edges: impl Iterator<Item = &'a Vec<Vertex>>, subset: &[Vertex]) -> usize {
    edges
        .filter(|e| subset.iter().all(|v| e.binary_search(v).is_ok()))
        .count()
}

/// The matchings `H_1..H_k` of a normal-form code or XOR instance.
///
/// The union is a multiset: an edge present in two members counts twice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchingFamily {
    n: usize,
    q: usize,
    members: Vec<Hypergraph>,
    total_edges: usize,
}

impl MatchingFamily {
    pub fn new(members: Vec<Hypergraph>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::input("a matching family needs at least one member"))?;
        let (n, q) = (first.n, first.q);
        for (i, h) in members.iter().enumerate() {
            if h.n != n || h.q != q {
                return Err(Error::input(format!(
                    "member {i} is on n={} with q={}, family has n={n}, q={q}",
                    h.n, h.q
                )));
            }
            if let Some((a, b)) = h.first_overlap() {
                return Err(Error::input(format!(
                    "member {i} is not a matching: edges {:?} and {:?} intersect",
                    h.edges[a], h.edges[b]
                )));
            }
        }
        let total_edges = members.iter().map(Hypergraph::len).sum();
        Ok(Self {
            n,
            q,
            members,
            total_edges,
        })
    }

    /// Builds a family from raw edge lists.
    pub fn from_edges(n: usize, q: usize, members: Vec<Vec<Vec<Vertex>>>) -> Result<Self> {
        let hs = members
            .into_iter()
            .map(|edges| Hypergraph::new(n, q, edges))
            .collect::<Result<Vec<_>>>()?;
        Self::new(hs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    /// Total edge count `m`.
    pub fn m(&self) -> usize {
        self.total_edges
    }

    pub fn members(&self) -> &[Hypergraph] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &Hypergraph {
        &self.members[i]
    }

    /// Degree of `subset` in the union of all members.
    pub fn degree(&self, subset: &[Vertex]) -> Result<usize> {
        check_vertices(self.n, subset)?;
        Ok(degree_in(
            self.members.iter().flat_map(|h| h.edges.iter()),
            subset,
        ))
    }

    /// Degree of every vertex pair contained in some edge of the union.
    pub fn pair_degrees(&self) -> BTreeMap<(Vertex, Vertex), usize> {
        let mut deg = BTreeMap::new();
        for e in self.members.iter().flat_map(|h| h.edges.iter()) {
            for (a, b) in edge_pairs(e) {
                *deg.entry((a, b)).or_insert(0) += 1;
            }
        }
        deg
    }

    /// Largest pair degree, with the lexicographically first pair attaining it.
    pub fn max_pair_degree(&self) -> Option<((Vertex, Vertex), usize)> {
        self.pair_degrees()
            .into_iter()
            .fold(None, |best, (p, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((p, d)),
            })
    }

    pub(crate) fn require_q(&self, q: usize, what: &str) -> Result<()> {
        if self.q != q {
            return Err(Error::input(format!(
                "{what} needs a {q}-uniform family, got q={}",
                self.q
            )));
        }
        Ok(())
    }

    /// Serializes to the line-oriented text format:
    /// a header `n k q`, then for each member a line `i |H_i|` followed by
    /// one edge per line.
    pub fn to_text(&self) -> String {
        groups_to_text(self.n, self.q, &self.members)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let fam = parse_family(&mut lines)?;
        if let Some((no, _)) = lines.next_content() {
            return Err(Error::parse(no, "trailing content after last member"));
        }
        Ok(fam)
    }
}

pub(crate) fn groups_to_text(n: usize, q: usize, groups: &[Hypergraph]) -> String {
    let mut out = format!("{} {} {}\n", n, groups.len(), q);
    for (i, h) in groups.iter().enumerate() {
        let _ = writeln!(out, "{} {}", i, h.len());
        for e in &h.edges {
            let line: Vec<String> = e.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

/// All vertex pairs of a sorted edge, each as `(small, large)`.
pub(crate) fn edge_pairs(e: &[Vertex]) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
    e.iter()
        .enumerate()
        .flat_map(move |(a, &u)| e[a + 1..].iter().map(move |&v| (u, v)))
}

pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank, non-comment line with its one-based line number.
    pub(crate) fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let l = l.trim();
            if !l.is_empty() && !l.starts_with('#') {
                return Some((i + 1, l));
            }
        }
        None
    }

    pub(crate) fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.next_content() {
            Some(x) => Ok(x),
            None => Err(Error::parse(
                self.last + 1,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }
}

pub(crate) fn parse_numbers(no: usize, line: &str, expected: Option<usize>) -> Result<Vec<usize>> {
    let nums = line
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(no, format!("`{t}` is not a nonnegative integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(want) = expected {
        if nums.len() != want {
            return Err(Error::parse(
                no,
                format!("expected {want} integers, found {}", nums.len()),
            ));
        }
    }
    Ok(nums)
}

pub(crate) fn parse_family(lines: &mut Lines<'_>) -> Result<MatchingFamily> {
    let (_, members) = parse_hypergraphs(lines, true)?;
    MatchingFamily::new(members)
}

/// Parses the `n k q` block format; returns the header line number too.
pub(crate) fn parse_hypergraphs(
    lines: &mut Lines<'_>,
    require_matching: bool,
) -> Result<(usize, Vec<Hypergraph>)> {
    let (header_no, header) = lines.expect("header `n k q`")?;
    let h = parse_numbers(header_no, header, Some(3))?;
    let (n, k, q) = (h[0], h[1], h[2]);
    if k == 0 {
        return Err(Error::parse(header_no, "k must be at least 1"));
    }
    let mut members = Vec::with_capacity(k);
    for expect_i in 0..k {
        let (no, block) = lines.expect("member header `i |H_i|`")?;
        let b = parse_numbers(no, block, Some(2))?;
        if b[0] != expect_i {
            return Err(Error::parse(
                no,
                format!("expected member index {expect_i}, found {}", b[0]),
            ));
        }
        let mut edges = Vec::with_capacity(b[1]);
        let mut last_no = no;
        for _ in 0..b[1] {
            let (no, line) = lines.expect("an edge")?;
            last_no = no;
            let e: Vec<Vertex> = parse_numbers(no, line, Some(q))?
                .into_iter()
                .map(|v| v as Vertex)
                .collect();
            check_edge(n, q, &e).map_err(|err| Error::parse(no, err.to_string()))?;
            edges.push(e);
        }
        let hg = Hypergraph { n, q, edges };
        if require_matching {
            if let Some((a, b)) = hg.first_overlap() {
                return Err(Error::parse(
                    last_no,
                    format!(
                        "member {expect_i} is not a matching: edges {:?} and {:?} intersect",
                        hg.edges[a], hg.edges[b]
                    ),
                ));
            }
        }
        members.push(hg);
    }
    Ok((header_no, members))
}

/// Output of [`decompose`].
///
/// `bipartite[i]` holds the edges `(w, p)` of `G_i`, where `p` indexes
/// `heavy_pairs` and the removed hyperedge was `{w} ∪ heavy_pairs[p]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub residual: MatchingFamily,
    pub bipartite: Vec<Vec<(Vertex, usize)>>,
    pub heavy_pairs: Vec<(Vertex, Vertex)>,
    pub threshold: usize,
}

impl DecompositionResult {
    pub fn bipartite_edge_count(&self) -> usize {
        self.bipartite.iter().map(Vec::len).sum()
    }

    /// The 2-XOR side as a [`BipartiteFamily`].
    pub fn bipartite_family(&self) -> BipartiteFamily {
        BipartiteFamily {
            n: self.residual.n(),
            right: self.heavy_pairs.len(),
            graphs: self.bipartite.clone(),
        }
    }
}

/// Bipartite graphs `G_1..G_k` with left vertices `0..n` and right vertices
/// `0..right`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteFamily {
    pub n: usize,
    pub right: usize,
    pub graphs: Vec<Vec<(Vertex, usize)>>,
}

impl BipartiteFamily {
    pub fn new(n: usize, right: usize, graphs: Vec<Vec<(Vertex, usize)>>) -> Result<Self> {
        for (i, g) in graphs.iter().enumerate() {
            for &(w, p) in g {
                if w as usize >= n || p >= right {
                    return Err(Error::input(format!(
                        "G_{i} edge ({w}, {p}) outside [0,{n}) x [0,{right})"
                    )));
                }
            }
        }
        Ok(Self { n, right, graphs })
    }

    pub fn k(&self) -> usize {
        self.graphs.len()
    }

    /// True when every `G_i` is a matching on both sides.
    pub fn is_matching_family(&self) -> bool {
        self.graphs.iter().all(|g| {
            let left: BTreeSet<_> = g.iter().map(|e| e.0).collect();
            let right: BTreeSet<_> = g.iter().map(|e| e.1).collect();
            left.len() == g.len() && right.len() == g.len()
        })
    }
}

/// Suggested decomposition threshold `ceil(c * ln(n) / (eps^2 delta^2))`.
pub fn suggested_threshold(n: usize, eps: f64, delta: f64, c: f64) -> usize {
    let raw = c * (n.max(2) as f64).ln() / (eps * eps * delta * delta);
    (raw.ceil() as usize).max(1)
}

/// Greedy heavy-pair decomposition of a 3-uniform family.
///
/// While some pair `{u, v}` has degree above `d` in the residual union, the
/// lexicographically smallest such pair is selected and every residual edge
/// `{u, v, w}` containing it moves to `G_i` as `(w, {u, v})`.
pub fn decompose(family: &MatchingFamily, d: usize) -> Result<DecompositionResult> {
    family.require_q(3, "decomposition")?;
    if d == 0 {
        return Err(Error::input("decomposition threshold d must be at least 1"));
    }
    let k = family.k();
    let mut alive: Vec<Vec<bool>> = family.members.iter().map(|h| vec![true; h.len()]).collect();
    let mut incidence: BTreeMap<(Vertex, Vertex), Vec<(usize, usize)>> = BTreeMap::new();
    let mut degree: BTreeMap<(Vertex, Vertex), usize> = BTreeMap::new();
    for (i, h) in family.members.iter().enumerate() {
        for (idx, e) in h.edges.iter().enumerate() {
            for p in edge_pairs(e) {
                incidence.entry(p).or_default().push((i, idx));
                *degree.entry(p).or_insert(0) += 1;
            }
        }
    }
    // pair degrees only decrease, so the heavy set only ever shrinks
    let mut heavy: BTreeSet<(Vertex, Vertex)> = degree
        .iter()
        .filter(|&(_, &deg)| deg > d)
        .map(|(&p, _)| p)
        .collect();

    let mut heavy_pairs = Vec::new();
    let mut bipartite: Vec<Vec<(Vertex, usize)>> = vec![Vec::new(); k];
    while let Some(p) = heavy.pop_first() {
        let pid = heavy_pairs.len();
        heavy_pairs.push(p);
        for &(i, idx) in &incidence[&p] {
            if !alive[i][idx] {
                continue;
            }
            alive[i][idx] = false;
            let e = &family.members[i].edges[idx];
            let w = *e.iter().find(|&&v| v != p.0 && v != p.1).expect("3-uniform edge");
            bipartite[i].push((w, pid));
            for q in edge_pairs(e) {
                let deg = degree.get_mut(&q).expect("pair was counted");
                *deg -= 1;
                if *deg <= d {
                    heavy.remove(&q);
                }
            }
        }
    }

    let members = family
        .members
        .iter()
        .zip(&alive)
        .map(|(h, live)| Hypergraph {
            n: h.n,
            q: h.q,
            edges: h
                .edges
                .iter()
                .zip(live)
                .filter(|(_, &a)| a)
                .map(|(e, _)| e.clone())
                .collect(),
        })
        .collect();
    Ok(DecompositionResult {
        residual: MatchingFamily::new(members)?,
        bipartite,
        heavy_pairs,
        threshold: d,
    })
}

/// Heavy pairs split into copies so that each copy carries between `d` and
/// `2d - 1` bipartite edges (pairs with fewer than `d` edges keep one copy).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicatedPairs {
    /// `(heavy pair index, copy index)` for every copy.
    pub copies: Vec<(usize, usize)>,
    /// `graphs[i]` lists `(w, copy id)` edges, parallel to the input `G_i`.
    pub graphs: Vec<Vec<(Vertex, usize)>>,
}

/// Duplicates heavy pairs so each copy appears in at most `2d` edges.
pub fn duplicate_heavy_pairs(result: &DecompositionResult, d: usize) -> DuplicatedPairs {
    let d = d.max(1);
    let mut per_pair: Vec<Vec<(usize, usize)>> = vec![Vec::new(); result.heavy_pairs.len()];
    for (i, g) in result.bipartite.iter().enumerate() {
        for (idx, &(_, p)) in g.iter().enumerate() {
            per_pair[p].push((i, idx));
        }
    }
    let mut copies = Vec::new();
    let mut graphs: Vec<Vec<(Vertex, usize)>> = result
        .bipartite
        .iter()
        .map(|g| g.iter().map(|&(w, _)| (w, usize::MAX)).collect())
        .collect();
    for (p, uses) in per_pair.iter().enumerate() {
        let groups = (uses.len() / d).max(1);
        let base = copies.len();
        for c in 0..groups {
            copies.push((p, c));
        }
        for (t, &(i, idx)) in uses.iter().enumerate() {
            graphs[i][idx].1 = base + t % groups;
        }
    }
    DuplicatedPairs { copies, graphs }
}

/// Re-verifies every clause of the decomposition lemma against the input.
///
/// Returns a description of the first violated property.
pub fn check_decomposition(
    input: &MatchingFamily,
    result: &DecompositionResult,
) -> std::result::Result<(), String> {
    let k = input.k();
    let d = result.threshold;
    if result.residual.k() != k || result.bipartite.len() != k {
        return Err("output does not have k members".into());
    }
    // (1) G_i edges are (w, p) with w in [n], p in P
    for (i, g) in result.bipartite.iter().enumerate() {
        for &(w, p) in g {
            if w as usize >= input.n() || p >= result.heavy_pairs.len() {
                return Err(format!("property 1: G_{i} edge ({w}, {p}) out of range"));
            }
        }
    }
    let heavy_set: BTreeSet<_> = result.heavy_pairs.iter().collect();
    if heavy_set.len() != result.heavy_pairs.len() {
        return Err("property 1: heavy pair listed twice".into());
    }
    for i in 0..k {
        let orig: BTreeSet<&Vec<Vertex>> = input.member(i).edges().iter().collect();
        let kept: BTreeSet<&Vec<Vertex>> = result.residual.member(i).edges().iter().collect();
        // (2) H'_i subset of H_i
        if !kept.is_subset(&orig) {
            return Err(format!("property 2: H'_{i} is not a subset of H_{i}"));
        }
        // (3) one-to-one correspondence between H_i \ H'_i and G_i
        let mut rebuilt: BTreeSet<Vec<Vertex>> = BTreeSet::new();
        for &(w, p) in &result.bipartite[i] {
            let (u, v) = result.heavy_pairs[p];
            if w == u || w == v {
                return Err(format!("property 3: G_{i} edge reuses a pair vertex"));
            }
            let mut c = vec![u, v, w];
            c.sort_unstable();
            if !rebuilt.insert(c) {
                return Err(format!("property 3: G_{i} maps two edges to one hyperedge"));
            }
        }
        let removed: BTreeSet<Vec<Vertex>> =
            orig.difference(&kept).map(|e| (*e).clone()).collect();
        if removed != rebuilt {
            return Err(format!(
                "property 3: G_{i} does not correspond to H_{i} minus H'_{i}"
            ));
        }
        if input.member(i).len() != result.residual.member(i).len() + result.bipartite[i].len() {
            return Err(format!("conservation: |H_{i}| != |H'_{i}| + |G_{i}|"));
        }
        // (5) matchings stay matchings
        if input.member(i).is_matching() {
            if !result.residual.member(i).is_matching() {
                return Err(format!("property 5: H'_{i} is not a matching"));
            }
            let left: BTreeSet<_> = result.bipartite[i].iter().map(|e| e.0).collect();
            let right: BTreeSet<_> = result.bipartite[i].iter().map(|e| e.1).collect();
            if left.len() != result.bipartite[i].len() || right.len() != result.bipartite[i].len() {
                return Err(format!("property 5: G_{i} is not a matching"));
            }
        }
    }
    // (4) exhaustive pair scan over the residual union
    let n = input.n() as Vertex;
    for u in 0..n {
        for v in u + 1..n {
            let deg = result.residual.degree(&[u, v]).map_err(|e| e.to_string())?;
            if deg > d {
                return Err(format!(
                    "property 4: residual pair {{{u}, {v}}} has degree {deg} > {d}"
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, q: usize, members: Vec<Vec<Vec<Vertex>>>) -> MatchingFamily {
        MatchingFamily::from_edges(n, q, members).unwrap()
    }

    #[test]
    fn degree_examples() {
        // vertices shifted to zero-based
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 2], vec![0, 1, 3]]).unwrap();
        assert_eq!(h.degree(&[0, 1]).unwrap(), 2);
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(h.degree(&[]).unwrap(), 1);
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(h.degree(&[2, 3]).unwrap(), 0);
        assert!(h.degree(&[6]).is_err());
    }

    #[test]
    fn invalid_edges_rejected() {
        assert!(Hypergraph::new(4, 3, vec![vec![0, 2, 1]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![0, 1]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![0, 1, 4]]).is_err());
        assert!(Hypergraph::matching(6, 3, vec![vec![0, 1, 2], vec![2, 3, 4]]).is_err());
        assert!(MatchingFamily::new(vec![]).is_err());
    }

    #[test]
    fn decompose_single_heavy_pair() {
        // {1,2,3},{1,2,4} in one-based notation
        let f = fam(5, 3, vec![vec![vec![0, 1, 2]], vec![vec![0, 1, 3]]]);
        let r = decompose(&f, 1).unwrap();
        assert!(r.residual.members().iter().all(Hypergraph::is_empty));
        assert_eq!(r.heavy_pairs, vec![(0, 1)]);
        assert_eq!(r.bipartite, vec![vec![(2, 0)], vec![(3, 0)]]);
        check_decomposition(&f, &r).unwrap();

        let r2 = decompose(&f, 2).unwrap();
        assert_eq!(r2.residual, f);
        assert!(r2.heavy_pairs.is_empty());
        assert!(r2.bipartite.iter().all(Vec::is_empty));
    }

    #[test]
    fn decompose_rejects_wrong_arity() {
        let f = fam(4, 2, vec![vec![vec![0, 1]]]);
        assert!(decompose(&f, 1).is_err());
        let f = fam(4, 3, vec![vec![vec![0, 1, 2]]]);
        assert!(decompose(&f, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = fam(7, 3, vec![vec![vec![0, 1, 2], vec![3, 4, 6]], vec![], vec![vec![1, 2, 5]]]);
        let text = f.to_text();
        assert_eq!(MatchingFamily::from_text(&text).unwrap(), f);
        assert!(text.starts_with("7 3 3\n0 2\n0 1 2\n"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "5 1 3\n0 1\n0 1 9\n";
        match MatchingFamily::from_text(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let overlapping = "5 1 3\n0 2\n0 1 2\n2 3 4\n";
        assert!(matches!(
            MatchingFamily::from_text(overlapping),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(MatchingFamily::from_text("5 1\n").is_err());
    }

    #[test]
    fn duplication_bounds_copy_load() {
        // six edges through pair {0,1}, one per member
        let members: Vec<Vec<Vec<Vertex>>> = (0..6).map(|t| vec![vec![0, 1, 2 + t]]).collect();
        let f = fam(8, 3, members);
        let r = decompose(&f, 2).unwrap();
        assert_eq!(r.heavy_pairs, vec![(0, 1)]);
        let dup = duplicate_heavy_pairs(&r, 2);
        assert_eq!(dup.copies.len(), 3);
        let mut load = vec![0; dup.copies.len()];
        for g in &dup.graphs {
            for &(_, c) in g {
                load[c] += 1;
            }
        }
        assert!(load.iter().all(|&l| (2..=4).contains(&l)));
    }

    #[test]
    fn threshold_helper() {
        assert_eq!(suggested_threshold(100, 1.0, 1.0, 1.0), 5);
        assert!(suggested_threshold(100, 0.1, 0.5, 2.0) > 3000);
    }
}
