//! Row subproblems, the natural lower bound, graded-matrix recognition and
//! the π-critical tree.
//!
//! `MST(i,Q)` is the minimum spanning tree under weights `w(e_j) = q(i,j)`
//! with value `z^i`; the natural lower bound is the minimum spanning tree
//! value under weights `z^i`. When some simultaneous permutation makes `Q`
//! doubly graded, the tree picked greedily by permuted rank attains the bound.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::enumerate::SolveResult;
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph, SpanningTree, UnionFind};
use crate::instance::{objective_bottleneck, objective_sum, CostMatrix, Instance, ProblemKind};

/// A bijection on `0..m`; `forward[e]` is the rank of edge `e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let m = forward.len();
        let mut inverse = vec![usize::MAX; m];
        for (a, &p) in forward.iter().enumerate() {
            if p >= m || inverse[p] != usize::MAX {
                return Err(Error::InvalidPermutation(format!("{:?} is not a bijection", forward)));
            }
            inverse[p] = a;
        }
        Ok(Permutation { forward, inverse })
    }

    pub fn identity(m: usize) -> Self {
        Permutation {
            forward: (0..m).collect(),
            inverse: (0..m).collect(),
        }
    }

    /// Permutation listing `order[0]` first, `order[1]` second and so on.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let mut forward = vec![usize::MAX; order.len()];
        for (rank, &e) in order.iter().enumerate() {
            if e >= order.len() || forward[e] != usize::MAX {
                return Err(Error::InvalidPermutation(format!("{:?} is not an ordering", order)));
            }
            forward[e] = rank;
        }
        Ok(Permutation {
            forward,
            inverse: order.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn rank(&self, e: usize) -> usize {
        self.forward[e]
    }

    pub fn at_rank(&self, r: usize) -> usize {
        self.inverse[r]
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// `pi(Q)` with `pi(Q)[i][j] = Q[pi^-1(i)][pi^-1(j)]`.
    pub fn apply(&self, q: &CostMatrix) -> CostMatrix {
        q.permuted(&self.forward)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.forward
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradedKind {
    RowGraded,
    DoublyGraded,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedCertificate {
    pub kind: GradedKind,
    pub pi: Option<Permutation>,
}

/// Rows nondecreasing.
pub fn is_row_graded(q: &CostMatrix) -> bool {
    let m = q.dim();
    (0..m).all(|i| (1..m).all(|j| q.get(i, j - 1) <= q.get(i, j)))
}

/// Rows and columns nondecreasing.
pub fn is_doubly_graded(q: &CostMatrix) -> bool {
    let m = q.dim();
    is_row_graded(q) && (0..m).all(|j| (1..m).all(|i| q.get(i - 1, j) <= q.get(i, j)))
}

/// Direct check of a certificate against `q`.
pub fn check_certificate(q: &CostMatrix, cert: &GradedCertificate) -> bool {
    match (&cert.kind, &cert.pi) {
        (GradedKind::None, _) => true,
        (_, None) => false,
        (GradedKind::RowGraded, Some(p)) => p.len() == q.dim() && is_row_graded(&p.apply(q)),
        (GradedKind::DoublyGraded, Some(p)) => p.len() == q.dim() && is_doubly_graded(&p.apply(q)),
    }
}

/// Adds `a -> b` whenever a line strictly increases from `a` to `b`.
/// Consecutive value groups suffice since the order is then transitive.
fn line_constraints(values: Vec<(i64, usize)>, succ: &mut [Vec<usize>]) {
    let mut values = values;
    values.sort_unstable();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last: Option<i64> = None;
    for (v, c) in values {
        if last != Some(v) {
            groups.push(Vec::new());
            last = Some(v);
        }
        groups.last_mut().expect("pushed").push(c);
    }
    for w in groups.windows(2) {
        for &a in &w[0] {
            for &b in &w[1] {
                succ[a].push(b);
            }
        }
    }
}

/// Kahn's algorithm, smallest index first; `None` on a cycle.
fn linear_extension(succ: &mut [Vec<usize>]) -> Option<Vec<usize>> {
    let m = succ.len();
    let mut indeg = vec![0usize; m];
    for s in succ.iter_mut() {
        s.sort_unstable();
        s.dedup();
        for &b in s.iter() {
            indeg[b] += 1;
        }
    }
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..m).filter(|&a| indeg[a] == 0).map(std::cmp::Reverse).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(std::cmp::Reverse(a)) = ready.pop() {
        order.push(a);
        for &b in &succ[a] {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.push(std::cmp::Reverse(b));
            }
        }
    }
    (order.len() == m).then_some(order)
}

fn find_grading(q: &CostMatrix, columns_too: bool) -> Option<Permutation> {
    let m = q.dim();
    let mut succ = vec![Vec::new(); m];
    for r in 0..m {
        line_constraints((0..m).map(|c| (q.get(r, c), c)).collect(), &mut succ);
        if columns_too {
            line_constraints((0..m).map(|c| (q.get(c, r), c)).collect(), &mut succ);
        }
    }
    let order = linear_extension(&mut succ)?;
    Some(Permutation::from_order(&order).expect("topological order is a permutation"))
}

/// A permutation making `q` row graded, if one exists.
pub fn recognize_row_graded(q: &CostMatrix) -> Option<Permutation> {
    find_grading(q, false)
}

/// A permutation making `q` doubly graded, if one exists.
pub fn recognize_doubly_graded(q: &CostMatrix) -> Option<Permutation> {
    find_grading(q, true)
}

/// Strongest grading available: doubly, else row, else none.
pub fn recognize_graded(q: &CostMatrix) -> GradedCertificate {
    if let Some(pi) = recognize_doubly_graded(q) {
        return GradedCertificate {
            kind: GradedKind::DoublyGraded,
            pi: Some(pi),
        };
    }
    if let Some(pi) = recognize_row_graded(q) {
        return GradedCertificate {
            kind: GradedKind::RowGraded,
            pi: Some(pi),
        };
    }
    GradedCertificate {
        kind: GradedKind::None,
        pi: None,
    }
}

/// Kruskal over edges in the given order.
pub fn greedy_tree(g: &Graph, order: &[usize]) -> Result<EdgeSet> {
    let mut uf = UnionFind::new(g.num_vertices());
    let mut tree = Vec::with_capacity(g.num_vertices());
    for &e in order {
        let (u, v) = g.endpoints(e)?;
        if uf.union(u, v) {
            tree.push(e);
        }
    }
    if tree.len() + 1 != g.num_vertices().max(1) {
        return Err(Error::Disconnected);
    }
    Ok(EdgeSet::new(tree))
}

/// Minimum spanning tree under `weights`, ties by edge index. The tree also
/// minimises the largest weight.
pub fn minimum_spanning_tree(g: &Graph, weights: &[i64]) -> Result<EdgeSet> {
    if weights.len() != g.num_edges() {
        return Err(Error::DimensionMismatch {
            expected: g.num_edges(),
            found: weights.len(),
        });
    }
    let mut order: Vec<usize> = (0..g.num_edges()).collect();
    order.sort_by_key(|&e| (weights[e], e));
    greedy_tree(g, &order)
}

fn row_weights(q: &CostMatrix, i: usize) -> Vec<i64> {
    (0..q.dim()).map(|j| q.get(i, j)).collect()
}

fn max_over(t: &EdgeSet, w: &[i64]) -> i64 {
    t.iter().map(|&e| w[e]).max().unwrap_or(0)
}

/// `MST(i,Q)`: value `z^i` and its tree.
pub fn mst_row(inst: &Instance, i: usize) -> Result<(i64, EdgeSet)> {
    inst.graph.check_edge(i)?;
    let w = row_weights(&inst.q, i);
    let t = minimum_spanning_tree(&inst.graph, &w)?;
    Ok((t.iter().map(|&e| w[e]).sum(), t))
}

/// Bottleneck row subproblem: `min_T max_{j in T} q(i,j)`.
pub fn mst_row_bottleneck(inst: &Instance, i: usize) -> Result<(i64, EdgeSet)> {
    inst.graph.check_edge(i)?;
    let w = row_weights(&inst.q, i);
    let t = minimum_spanning_tree(&inst.graph, &w)?;
    Ok((max_over(&t, &w), t))
}

/// Natural lower bound with the row values it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaturalBound {
    pub value: i64,
    pub z: Vec<i64>,
    pub tree: EdgeSet,
}

/// Sum version: `z^i` per edge, then a minimum spanning tree under `z`.
pub fn natural_lower_bound(inst: &Instance) -> Result<NaturalBound> {
    if !inst.graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let z = (0..inst.num_edges())
        .map(|i| mst_row(inst, i).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let tree = minimum_spanning_tree(&inst.graph, &z)?;
    Ok(NaturalBound {
        value: tree.iter().map(|&e| z[e]).sum(),
        z,
        tree,
    })
}

/// Bottleneck version: row minimax values, then a minimax tree over them.
pub fn natural_lower_bound_bottleneck(inst: &Instance) -> Result<NaturalBound> {
    if !inst.graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let z = (0..inst.num_edges())
        .map(|i| mst_row_bottleneck(inst, i).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let tree = minimum_spanning_tree(&inst.graph, &z)?;
    Ok(NaturalBound {
        value: max_over(&tree, &z),
        z,
        tree,
    })
}

/// The spanning tree whose rank set is lexicographically smallest: Kruskal in
/// rank order.
pub fn pi_critical_tree(g: &Graph, pi: &Permutation) -> Result<SpanningTree> {
    if pi.len() != g.num_edges() {
        return Err(Error::DimensionMismatch {
            expected: g.num_edges(),
            found: pi.len(),
        });
    }
    let t = greedy_tree(g, pi.inverse())?;
    SpanningTree::new(g, t)
}

/// Result of the graded solver together with its certificate and bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedSolution {
    pub result: SolveResult,
    pub certificate: GradedCertificate,
    pub lower_bound: i64,
}

fn doubly_certificate(inst: &Instance) -> Result<GradedCertificate> {
    let pi = recognize_doubly_graded(&inst.q).ok_or(Error::NotDoublyGraded)?;
    Ok(GradedCertificate {
        kind: GradedKind::DoublyGraded,
        pi: Some(pi),
    })
}

/// QMST on a permuted doubly graded matrix: the π-critical tree.
pub fn solve_doubly_graded(inst: &Instance) -> Result<GradedSolution> {
    let certificate = doubly_certificate(inst)?;
    let pi = certificate.pi.as_ref().expect("doubly graded certificate carries pi");
    let t0 = pi_critical_tree(&inst.graph, pi)?;
    let value = objective_sum(inst, t0.edges())?;
    let bound = natural_lower_bound(inst)?;
    Ok(GradedSolution {
        result: SolveResult::optimal(ProblemKind::Qmst, "graded", value, t0.edges().clone()),
        certificate,
        lower_bound: bound.value,
    })
}

/// QBST on a permuted doubly graded matrix: the same π-critical tree.
pub fn solve_doubly_graded_bottleneck(inst: &Instance) -> Result<GradedSolution> {
    let certificate = doubly_certificate(inst)?;
    let pi = certificate.pi.as_ref().expect("doubly graded certificate carries pi");
    let t0 = pi_critical_tree(&inst.graph, pi)?;
    let value = objective_bottleneck(inst, t0.edges())?;
    let bound = natural_lower_bound_bottleneck(inst)?;
    Ok(GradedSolution {
        result: SolveResult::optimal(ProblemKind::Qbst, "graded", value, t0.edges().clone()),
        certificate,
        lower_bound: bound.value,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NnlCheck {
    pub certified: bool,
    pub tree: EdgeSet,
    pub value: i64,
    pub lower_bound: i64,
}

/// Optimality check for a row-graded certificate: the π-critical tree `T0`
/// is optimal when it is also a minimum spanning tree under the row values
/// `z^i`. A failed check means "not certified", not "not optimal".
pub fn certify_nnl(inst: &Instance, pi: &Permutation) -> Result<NnlCheck> {
    if !is_row_graded(&pi.apply(&inst.q)) {
        return Err(Error::NotRowGraded);
    }
    let t0 = pi_critical_tree(&inst.graph, pi)?;
    let bound = natural_lower_bound(inst)?;
    let t0_under_z: i64 = t0.as_slice().iter().map(|&e| bound.z[e]).sum();
    Ok(NnlCheck {
        certified: t0_under_z == bound.value,
        tree: t0.edges().clone(),
        value: objective_sum(inst, t0.edges())?,
        lower_bound: bound.value,
    })
}

/// A sorted matrix (rows and columns nondecreasing) from 2D prefix sums of
/// values in `0..=step`, shifted by `offset`.
pub fn sorted_doubly_graded<R: Rng>(m: usize, step: i64, offset: i64, rng: &mut R) -> CostMatrix {
    let mut acc = vec![vec![0i64; m + 1]; m + 1];
    for i in 0..m {
        for j in 0..m {
            let r = rng.gen_range(0..=step);
            acc[i + 1][j + 1] = acc[i][j + 1] + acc[i + 1][j] - acc[i][j] + r;
        }
    }
    let rows = (0..m)
        .map(|i| (0..m).map(|j| acc[i + 1][j + 1] + offset).collect())
        .collect();
    CostMatrix::from_rows(rows).expect("square")
}

/// A permuted doubly graded matrix and the permutation that sorts it.
pub fn random_doubly_graded<R: Rng>(m: usize, step: i64, offset: i64, rng: &mut R) -> (CostMatrix, Permutation) {
    let sorted = sorted_doubly_graded(m, step, offset, rng);
    let mut forward: Vec<usize> = (0..m).collect();
    forward.shuffle(rng);
    let sigma = Permutation::new(forward).expect("shuffle is a bijection");
    // q[a][b] = sorted[sigma(a)][sigma(b)], so sigma(q) = sorted
    let mut q = CostMatrix::zeros(m);
    for a in 0..m {
        for b in 0..m {
            q.set(a, b, sorted.get(sigma.rank(a), sigma.rank(b)));
        }
    }
    debug_assert_eq!(sigma.apply(&q), sorted);
    (q, sigma)
}

/// A permuted row-graded matrix: each row sorted independently, then permuted.
pub fn random_row_graded<R: Rng>(m: usize, lo: i64, hi: i64, rng: &mut R) -> (CostMatrix, Permutation) {
    let mut sorted = CostMatrix::zeros(m);
    for i in 0..m {
        let mut row: Vec<i64> = (0..m).map(|_| rng.gen_range(lo..=hi)).collect();
        row.sort_unstable();
        for (j, v) in row.into_iter().enumerate() {
            sorted.set(i, j, v);
        }
    }
    let mut forward: Vec<usize> = (0..m).collect();
    forward.shuffle(rng);
    let sigma = Permutation::new(forward).expect("bijection");
    let mut q = CostMatrix::zeros(m);
    for a in 0..m {
        for b in 0..m {
            q.set(a, b, sorted.get(sigma.rank(a), sigma.rank(b)));
        }
    }
    (q, sigma)
}
