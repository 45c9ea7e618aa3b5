//! Similarity graphs on datasets, the edge-connectivity function and the
//! clique-tangle membership test.

use crate::error::{Error, Result};
use crate::mixture::Dataset;
use crate::regions::Region;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// How pairwise distances become edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightModel {
    /// Unit edge iff the distance is at most δ.
    DeltaNeighborhood(f64),
    /// Every pair weighted exp(−dist²/(2c²)).
    GaussianKernel(f64),
}

impl WeightModel {
    /// Weight at squared distance `d2`; zero means no edge.
    #[inline]
    pub fn weight(&self, d2: f64) -> f64 {
        match *self {
            WeightModel::DeltaNeighborhood(delta) => {
                if d2 <= delta * delta {
                    1.0
                } else {
                    0.0
                }
            }
            // kept strictly positive so the graph stays complete under underflow
            WeightModel::GaussianKernel(c) => (-d2 / (2.0 * c * c)).exp().max(f64::MIN_POSITIVE),
        }
    }

    /// The scale parameter δ or c.
    pub fn parameter(&self) -> f64 {
        match *self {
            WeightModel::DeltaNeighborhood(p) | WeightModel::GaussianKernel(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Sorted adjacency lists with weights.
    Sparse(Vec<Vec<(usize, f64)>>),
    /// Row-major n×n weights, zero diagonal.
    Dense(Vec<f64>),
}

/// Undirected graph on vertices `0..n` with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    storage: Storage,
}

impl WeightedGraph {
    /// Graph from an explicit edge list; rejects loops, duplicates and
    /// nonpositive weights.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { index: v, n });
                }
            }
            if i == j {
                return Err(Error::InvalidSpec(format!("self-loop at vertex {i}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidSpec(format!("edge {i}-{j} has weight {w}")));
            }
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_by_key(|e| e.0);
            if list.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::InvalidSpec(format!("duplicate edge at vertex {i}")));
            }
        }
        Ok(WeightedGraph { n, storage: Storage::Sparse(adj) })
    }

    /// Complete graph with unit weights.
    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0))).collect();
        WeightedGraph::from_edges(n, &edges).expect("valid complete graph")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight of `{i, j}`, zero if absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.storage {
            Storage::Sparse(adj) => adj[i].binary_search_by_key(&j, |e| e.0).map(|p| adj[i][p].1).unwrap_or(0.0),
            Storage::Dense(w) => w[i * self.n + j],
        }
    }

    /// Edges `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            match &self.storage {
                Storage::Sparse(adj) => out.extend(adj[i].iter().filter(|e| e.0 > i).map(|&(j, w)| (i, j, w))),
                Storage::Dense(w) => out.extend((i + 1..self.n).map(|j| (i, j, w[i * self.n + j]))),
            }
        }
        out
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().iter().map(|e| e.2).sum()
    }

    /// Writes one `i j weight` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, j, w) in self.edges() {
            writeln!(out, "{i} {j} {w}")?;
        }
        Ok(())
    }

    /// κ of the vertex set given as a membership mask.
    pub fn cut_weight(&self, inside: &[bool]) -> f64 {
        match &self.storage {
            Storage::Sparse(adj) => adj
                .iter()
                .enumerate()
                .filter(|(i, _)| inside[*i])
                .flat_map(|(_, list)| list.iter())
                .filter(|(j, _)| !inside[*j])
                .map(|e| e.1)
                .sum(),
            Storage::Dense(w) => {
                let mut total = 0.0;
                for i in (0..self.n).filter(|&i| inside[i]) {
                    let row = &w[i * self.n..(i + 1) * self.n];
                    total += row.iter().zip(inside).filter(|(_, &b)| !b).map(|(x, _)| x).sum::<f64>();
                }
                total
            }
        }
    }
}

fn mask(n: usize, set: &[usize]) -> Result<Vec<bool>> {
    let mut m = vec![false; n];
    for &i in set {
        *m.get_mut(i).ok_or(Error::VertexOutOfRange { index: i, n })? = true;
    }
    Ok(m)
}

/// Graph on the columns of `data` under the weight model.
pub fn build_graph(data: &Dataset, model: WeightModel) -> Result<WeightedGraph> {
    model.validate()?;
    let n = data.n();
    let d2 = |i: usize, j: usize| -> f64 { data.column(i).iter().zip(data.column(j)).map(|(a, b)| (a - b) * (a - b)).sum() };
    let storage = match model {
        WeightModel::DeltaNeighborhood(_) => {
            let mut adj = vec![Vec::new(); n];
            for i in 0..n {
                for j in i + 1..n {
                    if model.weight(d2(i, j)) > 0.0 {
                        adj[i].push((j, 1.0));
                        adj[j].push((i, 1.0));
                    }
                }
            }
            for list in &mut adj {
                list.sort_by_key(|e| e.0);
            }
            Storage::Sparse(adj)
        }
        WeightModel::GaussianKernel(_) => {
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = model.weight(d2(i, j));
                    w[i * n + j] = v;
                    w[j * n + i] = v;
                }
            }
            Storage::Dense(w)
        }
    };
    Ok(WeightedGraph { n, storage })
}

/// Indices of the columns lying in `region`.
pub fn vertices_in(data: &Dataset, region: &Region) -> Result<Vec<usize>> {
    if let Some(d) = region.dim() {
        if d != data.dim() {
            return Err(Error::DimensionMismatch { expected: data.dim(), got: d });
        }
    }
    Ok(data.columns().enumerate().filter(|(_, x)| region.contains_unchecked(x)).map(|(i, _)| i).collect())
}

/// κ_G(S): total weight of edges with exactly one endpoint in `s`.
pub fn edge_connectivity(g: &WeightedGraph, s: &[usize]) -> Result<f64> {
    Ok(g.cut_weight(&mask(g.n, s)?))
}

/// Smallest edge weight inside `w`, or 1 when `w` spans no edge.
pub fn min_clique_weight(g: &WeightedGraph, w: &[usize]) -> Result<f64> {
    mask(g.n, w)?;
    let mut min = f64::INFINITY;
    for (a, &i) in w.iter().enumerate() {
        for &j in &w[a + 1..] {
            let x = g.weight(i, j);
            if x > 0.0 {
                min = min.min(x);
            }
        }
    }
    Ok(if min.is_finite() { min } else { 1.0 })
}

/// Fails with the first missing edge if `w` is not a clique.
pub fn require_clique(g: &WeightedGraph, w: &[usize]) -> Result<()> {
    mask(g.n, w)?;
    for (a, &i) in w.iter().enumerate() {
        for &j in &w[a + 1..] {
            if i != j && g.weight(i, j) <= 0.0 {
                return Err(Error::NotAClique(i.min(j), i.max(j)));
            }
        }
    }
    Ok(())
}

/// Order of the clique tangle: (2/9)·|W|²·w_W.
pub fn clique_order(size: usize, min_weight: f64) -> f64 {
    2.0 / 9.0 * (size * size) as f64 * min_weight
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CliqueTangleTest {
    /// The clique has at least two vertices, so its tangle is nonempty.
    pub nonempty: bool,
    /// `κ(S)` is below the order and `S` holds a strict majority of `W`.
    pub contains_s: bool,
    pub order: f64,
    pub kappa: f64,
}

/// Evaluates the membership inequalities of `S` in the tangle induced by clique `W`.
pub fn clique_tangle_test(g: &WeightedGraph, w: &[usize], s: &[usize]) -> Result<CliqueTangleTest> {
    require_clique(g, w)?;
    let ms = mask(g.n, s)?;
    let order = clique_order(w.len(), min_clique_weight(g, w)?);
    let kappa = g.cut_weight(&ms);
    let inside = w.iter().filter(|&&i| ms[i]).count();
    Ok(CliqueTangleTest { nonempty: w.len() >= 2, contains_s: kappa < order && inside > w.len() - inside, order, kappa })
}
