//! Exact solvers by search.
//!
//! [`solve_exact`] enumerates every spanning tree (backtracking over edges in
//! index order, include before exclude) and is the reference oracle for all
//! other solvers. [`solve_conflicts`] is a branch-and-bound for kinds whose
//! objective is linear or empty; it handles conflict instances far beyond the
//! enumeration guard.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph, UnionFind};
use crate::instance::{evaluate, Aggregation, Instance, ProblemKind};
use crate::tree_count::count_graph;

/// Default ceiling on the number of spanning trees an enumeration may visit.
pub const DEFAULT_TREE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

/// Outcome of any solver. `value` and `tree` are absent when infeasible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub kind: ProblemKind,
    pub method: String,
    pub value: Option<i64>,
    pub tree: Option<EdgeSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trees_enumerated: Option<u64>,
}

impl SolveResult {
    pub fn optimal(kind: ProblemKind, method: &str, value: i64, tree: EdgeSet) -> Self {
        SolveResult {
            status: SolveStatus::Optimal,
            kind,
            method: method.to_string(),
            value: Some(value),
            tree: Some(tree),
            trees_enumerated: None,
        }
    }

    pub fn infeasible(kind: ProblemKind, method: &str) -> Self {
        SolveResult {
            status: SolveStatus::Infeasible,
            kind,
            method: method.to_string(),
            value: None,
            tree: None,
            trees_enumerated: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumOptions {
    pub tree_limit: u64,
    pub threads: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            tree_limit: DEFAULT_TREE_LIMIT,
            threads: 1,
        }
    }
}

fn check_guard(g: &Graph, limit: u64) -> Result<BigUint> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let tau = count_graph(g);
    if tau > BigUint::from(limit) {
        return Err(Error::GuardExceeded {
            estimated: tau.to_string(),
            limit,
        });
    }
    Ok(tau)
}

trait Visitor {
    fn push(&mut self, e: usize, chosen: &[usize]);
    fn pop(&mut self);
    fn leaf(&mut self, chosen: &[usize]);
}

/// Backtracking state. Every node of the search lies on a path to a tree:
/// includes never close a cycle and excludes never disconnect what is left.
struct Walker<'g> {
    g: &'g Graph,
    uf: UnionFind,
    chosen: Vec<usize>,
    scratch: Vec<usize>,
}

impl<'g> Walker<'g> {
    fn new(g: &'g Graph) -> Self {
        Walker {
            g,
            uf: UnionFind::new(g.num_vertices()),
            chosen: Vec::with_capacity(g.num_vertices()),
            scratch: vec![0; g.num_vertices()],
        }
    }

    fn target(&self) -> usize {
        self.g.num_vertices().saturating_sub(1)
    }

    fn can_include(&self, i: usize) -> bool {
        let (u, v) = self.g.edges()[i];
        !self.uf.same(u, v)
    }

    /// Edge `i` may be dropped iff its endpoints stay connected through the
    /// chosen forest and the edges after `i`.
    fn can_exclude(&mut self, i: usize) -> bool {
        let edges = self.g.edges();
        if self.chosen.len() + (edges.len() - i - 1) < self.target() {
            return false;
        }
        let parent = &mut self.scratch;
        for (v, p) in parent.iter_mut().enumerate() {
            *p = self.uf.find(v);
        }
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let (u, v) = edges[i];
        if root(parent, u) == root(parent, v) {
            return true;
        }
        for &(a, b) in &edges[i + 1..] {
            let (ra, rb) = (root(parent, a), root(parent, b));
            if ra != rb {
                parent[ra] = rb;
                if root(parent, u) == root(parent, v) {
                    return true;
                }
            }
        }
        false
    }

    fn include(&mut self, i: usize) {
        let (u, v) = self.g.edges()[i];
        self.uf.union(u, v);
        self.chosen.push(i);
    }

    fn undo_include(&mut self) {
        self.chosen.pop();
        self.uf.rollback();
    }

    fn run<V: Visitor>(&mut self, i: usize, visitor: &mut V) {
        if self.chosen.len() == self.target() {
            visitor.leaf(&self.chosen);
            return;
        }
        if i == self.g.num_edges() {
            return;
        }
        if self.can_include(i) {
            visitor.push(i, &self.chosen);
            self.include(i);
            self.run(i + 1, visitor);
            self.undo_include();
            visitor.pop();
        }
        if self.can_exclude(i) {
            self.run(i + 1, visitor);
        }
    }
}

struct FnVisitor<F: FnMut(&[usize])>(F);

impl<F: FnMut(&[usize])> Visitor for FnVisitor<F> {
    fn push(&mut self, _: usize, _: &[usize]) {}
    fn pop(&mut self) {}
    fn leaf(&mut self, chosen: &[usize]) {
        (self.0)(chosen)
    }
}

/// Visits every spanning tree once, in lexicographic order of sorted edge
/// lists. Returns the number visited.
pub fn enumerate_spanning_trees<F: FnMut(&[usize])>(g: &Graph, limit: u64, visitor: F) -> Result<u64> {
    check_guard(g, limit)?;
    let mut count = 0u64;
    let mut inner = visitor;
    let mut v = FnVisitor(|t: &[usize]| {
        count += 1;
        inner(t)
    });
    Walker::new(g).run(0, &mut v);
    Ok(count)
}

/// All spanning trees as edge sets.
pub fn all_spanning_trees(g: &Graph, limit: u64) -> Result<Vec<EdgeSet>> {
    let mut out = Vec::new();
    enumerate_spanning_trees(g, limit, |t| out.push(EdgeSet::new(t.to_vec())))?;
    Ok(out)
}

/// Incremental objective tracking along the search path.
struct Scorer<'a> {
    inst: &'a Instance,
    aggregation: Option<Aggregation>,
    interactions: bool,
    conflicts: bool,
    partners: Vec<Vec<usize>>,
    in_tree: Vec<bool>,
    /// Per depth: aggregate so far (None while empty under max) and violations.
    stack: Vec<(Option<i64>, usize)>,
    path: Vec<usize>,
    best: Option<(i64, Vec<usize>)>,
    visited: u64,
}

impl<'a> Scorer<'a> {
    fn new(inst: &'a Instance, kind: ProblemKind) -> Self {
        let shape = kind.shape();
        Scorer {
            inst,
            aggregation: shape.aggregation,
            interactions: shape.interactions,
            conflicts: shape.conflicts,
            partners: inst.conflicts.partners(inst.num_edges()),
            in_tree: vec![false; inst.num_edges()],
            stack: vec![(None, 0)],
            path: Vec::new(),
            best: None,
            visited: 0,
        }
    }

    fn value(&self) -> i64 {
        self.stack.last().expect("nonempty").0.unwrap_or(0)
    }
}

impl Visitor for Scorer<'_> {
    fn push(&mut self, e: usize, chosen: &[usize]) {
        let q = &self.inst.q;
        let (acc, viol) = *self.stack.last().expect("nonempty");
        let next = match self.aggregation {
            None => None,
            Some(Aggregation::Sum) => {
                let mut d = q.get(e, e);
                if self.interactions {
                    for &f in chosen {
                        d += q.get(e, f) + q.get(f, e);
                    }
                }
                Some(acc.unwrap_or(0) + d)
            }
            Some(Aggregation::Max) => {
                let mut d = q.get(e, e);
                if self.interactions {
                    for &f in chosen {
                        d = d.max(q.get(e, f)).max(q.get(f, e));
                    }
                }
                Some(acc.map_or(d, |a| a.max(d)))
            }
        };
        let added = if self.conflicts {
            self.partners[e].iter().filter(|&&f| self.in_tree[f]).count()
        } else {
            0
        };
        self.in_tree[e] = true;
        self.path.push(e);
        self.stack.push((next, viol + added));
    }

    fn pop(&mut self) {
        self.stack.pop();
        let e = self.path.pop().expect("balanced");
        self.in_tree[e] = false;
    }

    fn leaf(&mut self, chosen: &[usize]) {
        self.visited += 1;
        if self.stack.last().expect("nonempty").1 > 0 {
            return;
        }
        let v = self.value();
        if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
            self.best = Some((v, chosen.to_vec()));
        }
    }
}

/// Global optimum of `kind` by full enumeration; conflict kinds only accept
/// trees without violations. Ties go to the lexicographically smallest tree.
pub fn solve_exact(inst: &Instance, kind: ProblemKind) -> Result<SolveResult> {
    solve_exact_with(inst, kind, &EnumOptions::default())
}

pub fn solve_exact_with(inst: &Instance, kind: ProblemKind, opts: &EnumOptions) -> Result<SolveResult> {
    check_guard(&inst.graph, opts.tree_limit)?;
    let (best, visited) = if opts.threads <= 1 {
        let mut scorer = Scorer::new(inst, kind);
        Walker::new(&inst.graph).run(0, &mut scorer);
        (scorer.best, scorer.visited)
    } else {
        solve_sharded(inst, kind, opts.threads)
    };
    let mut result = match best {
        None => SolveResult::infeasible(kind, "enum"),
        Some((value, tree)) => {
            let tree = EdgeSet::new(tree);
            let check = evaluate(inst, kind, &tree)?;
            debug_assert_eq!(check.value, value);
            debug_assert_eq!(check.violations, 0);
            SolveResult::optimal(kind, "enum", check.value, tree)
        }
    };
    result.trees_enumerated = Some(visited);
    Ok(result)
}

/// A search node: next edge to decide and the edges chosen so far.
type Task = (usize, Vec<usize>);

fn frontier(g: &Graph, want: usize) -> Vec<Task> {
    let mut level: Vec<Task> = vec![(0, Vec::new())];
    let target = g.num_vertices().saturating_sub(1);
    for _ in 0..g.num_edges() {
        if level.len() >= want {
            break;
        }
        let mut next = Vec::with_capacity(level.len() * 2);
        for (i, chosen) in level {
            if chosen.len() == target || i == g.num_edges() {
                next.push((i, chosen));
                continue;
            }
            let mut w = Walker::new(g);
            for &e in &chosen {
                w.include(e);
            }
            if w.can_include(i) {
                let mut with = chosen.clone();
                with.push(i);
                next.push((i + 1, with));
            }
            if w.can_exclude(i) {
                next.push((i + 1, chosen));
            }
        }
        level = next;
    }
    level
}

type ShardResult = (Option<(i64, Vec<usize>)>, u64);

fn solve_sharded(inst: &Instance, kind: ProblemKind, threads: usize) -> ShardResult {
    let tasks = frontier(&inst.graph, threads * 8);
    let slots: Vec<Mutex<Option<ShardResult>>> =
        tasks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= tasks.len() {
                    break;
                }
                let (start, chosen) = &tasks[idx];
                let mut scorer = Scorer::new(inst, kind);
                let mut walker = Walker::new(&inst.graph);
                for &e in chosen {
                    scorer.push(e, &walker.chosen);
                    walker.include(e);
                }
                walker.run(*start, &mut scorer);
                *slots[idx].lock().expect("slot") = Some((scorer.best, scorer.visited));
            });
        }
    });
    // reduce in task order, which is the sequential visiting order
    let mut best: Option<(i64, Vec<usize>)> = None;
    let mut visited = 0;
    for slot in slots {
        let (b, v) = slot.into_inner().expect("slot").expect("every task ran");
        visited += v;
        if let Some((value, tree)) = b {
            if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
                best = Some((value, tree));
            }
        }
    }
    (best, visited)
}

/// Branch-and-bound for MSTC, MSTAC, BSTC, BSTAC, FSTC and FSTAC.
///
/// Each node relaxes the undecided conflicts and runs Kruskal with the forced
/// edges first. A conflict-free relaxed tree is optimal for its subtree;
/// otherwise a violated pair `{e,f}` splits the node into "e out" and
/// "e in, f out". The relaxed value bounds the subtree from below. Among
/// equal values the first tree found is kept, which need not be the
/// lexicographically smallest.
pub fn solve_conflicts(inst: &Instance, kind: ProblemKind) -> Result<SolveResult> {
    solve_conflicts_restricted(inst, kind, &vec![false; inst.num_edges()])
}

/// As [`solve_conflicts`] with some edges unavailable.
pub fn solve_conflicts_restricted(inst: &Instance, kind: ProblemKind, forbidden: &[bool]) -> Result<SolveResult> {
    let shape = kind.shape();
    if shape.interactions {
        return Err(Error::UnsupportedKind {
            kind: kind.to_string(),
            method: "conflict branching",
        });
    }
    if forbidden.len() != inst.num_edges() {
        return Err(Error::DimensionMismatch {
            expected: inst.num_edges(),
            found: forbidden.len(),
        });
    }
    if !inst.graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let m = inst.num_edges();
    let cost = |e: usize| match shape.aggregation {
        None => 0,
        Some(_) => inst.q.linear(e),
    };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&e| (cost(e), e));
    let mut bb = Branching {
        inst,
        aggregation: shape.aggregation,
        order,
        state: forbidden.iter().map(|&f| if f { Decision::Out } else { Decision::Free }).collect(),
        best: None,
        stop_at_first: shape.aggregation.is_none(),
        conflict_pairs: inst.conflicts.iter().collect(),
    };
    bb.search();
    Ok(match bb.best {
        None => SolveResult::infeasible(kind, "conflict-branching"),
        Some((_, tree)) => {
            let tree = EdgeSet::new(tree);
            let check = evaluate(inst, kind, &tree)?;
            debug_assert_eq!(check.violations, 0);
            SolveResult::optimal(kind, "conflict-branching", check.value, tree)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decision {
    Free,
    In,
    Out,
}

struct Branching<'a> {
    inst: &'a Instance,
    aggregation: Option<Aggregation>,
    order: Vec<usize>,
    state: Vec<Decision>,
    best: Option<(i64, Vec<usize>)>,
    stop_at_first: bool,
    conflict_pairs: Vec<(usize, usize)>,
}

impl Branching<'_> {
    fn relaxed(&self) -> Option<(i64, Vec<usize>)> {
        let g = &self.inst.graph;
        let mut uf = UnionFind::new(g.num_vertices());
        let mut tree = Vec::with_capacity(g.num_vertices());
        for e in (0..g.num_edges()).filter(|&e| self.state[e] == Decision::In) {
            let (u, v) = g.edges()[e];
            if !uf.union(u, v) {
                return None;
            }
            tree.push(e);
        }
        for &e in &self.order {
            if self.state[e] == Decision::Free {
                let (u, v) = g.edges()[e];
                if uf.union(u, v) {
                    tree.push(e);
                }
            }
        }
        if tree.len() + 1 != g.num_vertices().max(1) {
            return None;
        }
        tree.sort_unstable();
        let vals = tree.iter().map(|&e| self.inst.q.linear(e));
        let value = match self.aggregation {
            None => 0,
            Some(Aggregation::Sum) => vals.sum(),
            Some(Aggregation::Max) => vals.max().unwrap_or(0),
        };
        Some((value, tree))
    }

    fn search(&mut self) {
        if self.stop_at_first && self.best.is_some() {
            return;
        }
        let Some((bound, tree)) = self.relaxed() else {
            return;
        };
        if let Some((b, _)) = &self.best {
            if bound >= *b {
                return;
            }
        }
        let mut in_tree = vec![false; self.inst.num_edges()];
        for &e in &tree {
            in_tree[e] = true;
        }
        let violated = self
            .conflict_pairs
            .iter()
            .copied()
            .find(|&(e, f)| in_tree[e] && in_tree[f]);
        let Some((e, f)) = violated else {
            self.best = Some((bound, tree));
            return;
        };
        // both are free or one is forced in; never both forced in
        let (keep, drop) = if self.state[e] == Decision::In { (e, f) } else { (f, e) };
        if self.state[drop] == Decision::In {
            return;
        }
        let saved = (self.state[keep], self.state[drop]);
        self.state[drop] = Decision::Out;
        self.search();
        self.state[drop] = saved.1;
        if self.state[keep] == Decision::Free {
            self.state[drop] = Decision::In;
            self.state[keep] = Decision::Out;
            self.search();
        }
        self.state[keep] = saved.0;
        self.state[drop] = saved.1;
    }
}

/// Is there a tree whose bottleneck (diagonal included) is at most `mu`?
///
/// Edges with `c_e > mu` are removed and pairs with an entry above `mu` become
/// conflicts; the resulting FSTC instance is solved by branching. The result
/// carries kind QBST and the bottleneck of the tree found.
pub fn solve_qbst_threshold(inst: &Instance, mu: i64) -> Result<SolveResult> {
    let m = inst.num_edges();
    let forbidden: Vec<bool> = (0..m).map(|e| inst.q.linear(e) > mu).collect();
    let mut conflicts = crate::instance::ConflictSet::new();
    for e in 0..m {
        for f in e + 1..m {
            if inst.q.get(e, f) > mu || inst.q.get(f, e) > mu {
                conflicts.insert_or_keep(m, e, f)?;
            }
        }
    }
    let fstc = Instance::new(inst.graph.clone(), inst.q.clone(), conflicts, ProblemKind::Fstc)?;
    let r = solve_conflicts_restricted(&fstc, ProblemKind::Fstc, &forbidden)?;
    Ok(match r.tree {
        None => SolveResult::infeasible(ProblemKind::Qbst, "threshold"),
        Some(tree) => {
            let value = crate::instance::objective_bottleneck(inst, &tree)?;
            debug_assert!(value <= mu);
            SolveResult::optimal(ProblemKind::Qbst, "threshold", value, tree)
        }
    })
}

/// QBST optimum by bisection over the distinct entries of `Q`.
pub fn solve_qbst_by_thresholds(inst: &Instance) -> Result<SolveResult> {
    let values = inst.q.distinct_values();
    let (mut lo, mut hi) = (0usize, values.len() - 1);
    let mut found = solve_qbst_threshold(inst, values[hi])?;
    if !found.is_feasible() {
        return Ok(found);
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        let r = solve_qbst_threshold(inst, values[mid])?;
        if r.is_feasible() {
            hi = mid;
            found = r;
        } else {
            lo = mid + 1;
        }
    }
    debug_assert_eq!(found.value, Some(values[hi]));
    Ok(found)
}
