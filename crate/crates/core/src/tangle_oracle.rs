//! Brute-force tangles on small graphs: every vertex subset is a bitmask and
//! every check enumerates subsets in ascending bitmask order, so witnesses
//! are canonical.

use crate::error::{Error, Result};
use crate::graph::{clique_order, min_clique_weight, require_clique, WeightedGraph};
use crate::numeric::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest universe the oracle enumerates.
pub const MAX_VERTICES: usize = 20;

/// An explicit family of vertex subsets with an order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangleFamily {
    n: usize,
    order: f64,
    members: Vec<u64>,
}

impl TangleFamily {
    /// Members are sorted and deduplicated.
    pub fn new(n: usize, order: f64, mut members: Vec<u64>) -> Result<Self> {
        check_cap(n)?;
        if let Some(&bad) = members.iter().find(|&&m| m >> n != 0) {
            return Err(Error::VertexOutOfRange { index: 63 - bad.leading_zeros() as usize, n });
        }
        members.sort_unstable();
        members.dedup();
        Ok(TangleFamily { n, order, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn contains(&self, set: u64) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n > MAX_VERTICES {
        return Err(Error::CapExceeded { n, cap: MAX_VERTICES });
    }
    Ok(())
}

fn full(n: usize) -> u64 {
    (1u64 << n) - 1
}

/// Bitmask of a vertex list.
pub fn to_mask(n: usize, set: &[usize]) -> Result<u64> {
    check_cap(n)?;
    set.iter().try_fold(0u64, |m, &i| if i < n { Ok(m | 1 << i) } else { Err(Error::VertexOutOfRange { index: i, n }) })
}

/// Vertex list of a bitmask, ascending.
pub fn from_mask(set: u64) -> Vec<usize> {
    (0..64).filter(|i| (set >> i) & 1 == 1).collect()
}

/// κ for every subset, indexed by bitmask.
fn kappa_table(g: &WeightedGraph) -> Result<Vec<f64>> {
    check_cap(g.n())?;
    let edges = g.edges();
    Ok((0..1u64 << g.n())
        .into_par_iter()
        .map(|s| edges.iter().filter(|(i, j, _)| (s >> i) & 1 != (s >> j) & 1).map(|e| e.2).sum())
        .collect())
}

/// Every `S ⊆ V` with `κ(S) < k`, both orientations, ascending bitmask order.
pub fn low_order_separations(g: &WeightedGraph, k: f64) -> Result<Vec<u64>> {
    let table = kappa_table(g)?;
    Ok((0..table.len() as u64).filter(|&s| table[s as usize] < k).collect())
}

/// Tangle axiom that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    /// A member has κ at or above the order.
    T0,
    /// A low-order set is oriented neither or both ways.
    T1,
    /// Three members share no vertex.
    T2,
    /// A member is a single vertex.
    T3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Offending sets as bitmasks: one for T.0, T.1, T.3, three for T.2.
    pub witness: Vec<u64>,
}

/// `None` if the family is a tangle of its order in `g`, otherwise the first violation.
pub fn verify_tangle_axioms(g: &WeightedGraph, family: &TangleFamily) -> Result<Option<Violation>> {
    if family.n != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: family.n });
    }
    let table = kappa_table(g)?;
    let k = family.order;
    if let Some(&s) = family.members.iter().find(|&&s| table[s as usize] >= k) {
        return Ok(Some(Violation { axiom: Axiom::T0, witness: vec![s] }));
    }
    let all = full(g.n());
    for s in 0..=all {
        if table[s as usize] < k && family.contains(s) == family.contains(all & !s) {
            return Ok(Some(Violation { axiom: Axiom::T1, witness: vec![s] }));
        }
    }
    let m = &family.members;
    for (a, &x) in m.iter().enumerate() {
        for (b, &y) in m.iter().enumerate().skip(a) {
            let xy = x & y;
            if xy == 0 {
                return Ok(Some(Violation { axiom: Axiom::T2, witness: vec![x, y, y] }));
            }
            if let Some(&z) = m[b..].iter().find(|&&z| xy & z == 0) {
                return Ok(Some(Violation { axiom: Axiom::T2, witness: vec![x, y, z] }));
            }
        }
    }
    if let Some(&s) = m.iter().find(|s| s.count_ones() == 1) {
        return Ok(Some(Violation { axiom: Axiom::T3, witness: vec![s] }));
    }
    Ok(None)
}

/// `{S : κ(S) < (2/9)|W|²w_W and |S∩W| > |W∖S|}` for a clique `W` with at least two vertices.
pub fn materialize_clique_tangle(g: &WeightedGraph, w: &[usize]) -> Result<TangleFamily> {
    let n = g.n();
    let wm = to_mask(n, w)?;
    require_clique(g, w)?;
    let size = wm.count_ones() as usize;
    if size < 2 {
        return Err(Error::InvalidSpec(format!("clique needs at least two vertices, got {size}")));
    }
    let order = clique_order(size, min_clique_weight(g, &from_mask(wm))?);
    let table = kappa_table(g)?;
    let members = (0..=full(n))
        .filter(|&s| {
            let inside = (s & wm).count_ones() as usize;
            table[s as usize] < order && inside > size - inside
        })
        .collect();
    TangleFamily::new(n, order, members)
}

/// Lowest-bitmask `S ∈ t1` whose complement lies in `t2`.
pub fn incomparable(t1: &TangleFamily, t2: &TangleFamily) -> Result<Option<u64>> {
    if t1.n != t2.n {
        return Err(Error::DimensionMismatch { expected: t1.n, got: t2.n });
    }
    let all = full(t1.n);
    Ok(t1.members.iter().copied().find(|&s| t2.contains(all & !s)))
}

/// Random weighted graph on `n` vertices with a planted clique on `clique`
/// (weights in (0.2, 1]) and other edges present with probability ½.
pub fn planted_clique_graph(n: usize, clique: &[usize], seed: u64) -> Result<WeightedGraph> {
    let wm = to_mask(n, clique)?;
    let mut r = rng::stream(seed, 0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let planted = (wm >> i) & 1 == 1 && (wm >> j) & 1 == 1;
            if planted {
                edges.push((i, j, 0.2 + 0.8 * rng::uniform_open(&mut r)));
            } else if rng::uniform_open(&mut r) < 0.5 {
                edges.push((i, j, rng::uniform_open(&mut r)));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges)
}

/// Outcome of [`clique_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub cases: usize,
    /// Case index with what went wrong.
    pub failures: Vec<(usize, String)>,
}

/// Random planted-clique graphs (3 ≤ n ≤ 9, |W| ≥ 2): each materialized
/// clique family must satisfy the axioms and give every member more than
/// two thirds of W.
pub fn clique_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let results: Vec<Option<(usize, String)>> = (0..cases)
        .into_par_iter()
        .map(|case| -> Result<Option<(usize, String)>> {
            let case_seed = rng::derive_seed(seed, case as u64);
            let mut r = rng::stream(case_seed, 1);
            let n = rng::uniform_index(&mut r, 3, 9);
            let size = rng::uniform_index(&mut r, 2, n);
            let mut verts: Vec<usize> = (0..n).collect();
            for i in 0..size {
                let j = rng::uniform_index(&mut r, i, n - 1);
                verts.swap(i, j);
            }
            let w = &verts[..size];
            let g = planted_clique_graph(n, w, case_seed)?;
            let family = materialize_clique_tangle(&g, w)?;
            if let Some(v) = verify_tangle_axioms(&g, &family)? {
                return Ok(Some((case, format!("{:?} witness {:?}", v.axiom, v.witness))));
            }
            let wm = to_mask(n, w)?;
            if let Some(s) = family.members().iter().find(|&&s| 3 * (s & wm).count_ones() as usize <= 2 * size) {
                return Ok(Some((case, format!("member {s:#b} holds at most two thirds of W"))));
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport { cases, failures: results.into_iter().flatten().collect() })
}
