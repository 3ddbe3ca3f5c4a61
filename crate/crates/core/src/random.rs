//! Seeded random graphs, cost matrices and conflict sets (ChaCha8 streams).

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::instance::{ConflictSet, CostMatrix};

/// Name of the generator recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8";

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected simple graph with `n` vertices and `m` edges: a random
/// recursive tree plus uniformly chosen extra edges, then shuffled.
pub fn random_connected_graph<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameters("graph needs a vertex".into()));
    }
    let max_edges = n * (n - 1) / 2;
    if m + 1 < n || m > max_edges {
        return Err(Error::InvalidParameters(format!(
            "{} edges impossible for a connected simple graph on {} vertices",
            m, n
        )));
    }
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut present = vec![false; n * n];
    let mut edges = Vec::with_capacity(m);
    let mut add = |u: usize, v: usize, edges: &mut Vec<(usize, usize)>| {
        let (a, b) = (u.min(v), u.max(v));
        if a == b || present[a * n + b] {
            return false;
        }
        present[a * n + b] = true;
        edges.push((a, b));
        true
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        add(labels[i], labels[j], &mut edges);
    }
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    rest.shuffle(rng);
    for (a, b) in rest {
        if edges.len() == m {
            break;
        }
        add(a, b, &mut edges);
    }
    edges.shuffle(rng);
    Graph::new(n, edges)
}

/// Dense matrix with independent uniform entries in `lo..=hi`.
pub fn random_costs<R: Rng>(m: usize, lo: i64, hi: i64, rng: &mut R) -> CostMatrix {
    let rows = (0..m)
        .map(|_| (0..m).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect();
    CostMatrix::from_rows(rows).expect("square by construction")
}

/// Symmetric dense matrix with uniform entries in `lo..=hi`.
pub fn random_symmetric_costs<R: Rng>(m: usize, lo: i64, hi: i64, rng: &mut R) -> CostMatrix {
    let mut q = CostMatrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            let v = rng.gen_range(lo..=hi);
            q.set(i, j, v);
            q.set(j, i, v);
        }
    }
    q
}

/// Uniform diagonal and uniform entries on adjacent ordered pairs; zero
/// elsewhere. Sparse storage is used for large graphs.
pub fn adjacent_random_costs<R: Rng>(g: &Graph, lo: i64, hi: i64, rng: &mut R) -> CostMatrix {
    let mut q = CostMatrix::zeros(g.num_edges());
    for e in 0..g.num_edges() {
        q.set(e, e, rng.gen_range(lo..=hi));
    }
    for v in 0..g.num_vertices() {
        let inc = g.incident_edges(v);
        for (a, &e) in inc.iter().enumerate() {
            for &f in &inc[a + 1..] {
                q.set(e, f, rng.gen_range(lo..=hi));
                q.set(f, e, rng.gen_range(lo..=hi));
            }
        }
    }
    q
}

/// Each adjacent pair becomes a conflict with probability `p`.
pub fn random_adjacent_conflicts<R: Rng>(g: &Graph, p: f64, rng: &mut R) -> ConflictSet {
    let mut s = ConflictSet::new();
    for v in 0..g.num_vertices() {
        let inc = g.incident_edges(v);
        for (a, &e) in inc.iter().enumerate() {
            for &f in &inc[a + 1..] {
                if rng.gen_bool(p) {
                    s.insert_or_keep(g.num_edges(), e, f).expect("valid pair");
                }
            }
        }
    }
    s
}

/// Each edge pair becomes a conflict with probability `p`.
pub fn random_conflicts<R: Rng>(g: &Graph, p: f64, rng: &mut R) -> ConflictSet {
    let m = g.num_edges();
    let mut s = ConflictSet::new();
    for e in 0..m {
        for f in e + 1..m {
            if rng.gen_bool(p) {
                s.insert(m, e, f).expect("fresh pair");
            }
        }
    }
    s
}
