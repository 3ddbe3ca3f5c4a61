//! Linear-time dynamic program for adjacent-only problems on `(k,n)`-ladders.
//!
//! Layer `i` covers the first `i` cycles `L^i`. Four tree states and three
//! two-forest states are kept per layer, classified by which of `e^i_k`,
//! `e^i_{k-1}`, `e^i_{k-2}` they contain:
//!
//! | state | `e_k` | `e_{k-1}` | `e_{k-2}` | shape |
//! |-------|-------|-----------|-----------|-------|
//! | T1    | yes   | yes       | no        | tree  |
//! | T2    | yes   | no        | yes       | tree  |
//! | T3    | no    | yes       | yes       | tree  |
//! | T4    | yes   | yes       | yes       | tree  |
//! | F1    | no    | yes       | no        | forest|
//! | F2    | no    | no        | yes       | forest|
//! | F3    | no    | yes       | yes       | forest|
//!
//! Forests separate the two endpoints of `e^i_k`. Cycle `i+1` adds the path
//! `P` of its `k-1` edges other than `e^{i+1}_1`, minus a set of removed
//! positions:
//!
//! * from any tree: remove one edge (`e_{k-2}` gives T1, `e_{k-1}` T2, `e_k`
//!   T3, a middle edge T4) or two edges including `e_k` (with `e_{k-2}` F1,
//!   with `e_{k-1}` F2, with a middle edge F3);
//! * from any forest: add all of `P` (T4) or all but `e_k` (F3).
//!
//! Only the endpoints of `P` touch old edges, and the old edges they touch are
//! among `e^i_k`, `e^i_{k-1}`, `e^i_{k-2}`, so the cost of a step depends on
//! the predecessor state alone. Scores are `(violations, cost)` pairs compared
//! lexicographically; violations are tracked only for conflict kinds.
//!
//! Under max aggregation with interaction costs the aggregate starts at 0:
//! every spanning tree of a ladder with `k >= 4` contains two non-adjacent
//! edges, whose entry is 0.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::enumerate::SolveResult;
use crate::error::{Error, Result};
use crate::families::{CyclePath, LadderStructure};
use crate::graph::{EdgeSet, SpanningTree};
use crate::instance::{evaluate, Aggregation, Instance, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateId {
    T1,
    T2,
    T3,
    T4,
    F1,
    F2,
    F3,
}

impl StateId {
    pub const ALL: [StateId; 7] = [
        StateId::T1,
        StateId::T2,
        StateId::T3,
        StateId::T4,
        StateId::F1,
        StateId::F2,
        StateId::F3,
    ];
    pub const TREES: [StateId; 4] = [StateId::T1, StateId::T2, StateId::T3, StateId::T4];
    const FORESTS: [StateId; 3] = [StateId::F1, StateId::F2, StateId::F3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_tree(self) -> bool {
        self.index() < 4
    }

    /// Presence of `(e_k, e_{k-1}, e_{k-2})`.
    pub fn pattern(self) -> (bool, bool, bool) {
        use StateId::*;
        match self {
            T1 => (true, true, false),
            T2 => (true, false, true),
            T3 => (false, true, true),
            T4 => (true, true, true),
            F1 => (false, true, false),
            F2 => (false, false, true),
            F3 => (false, true, true),
        }
    }

    fn classify(has_k: bool, has_k1: bool, has_k2: bool, tree: bool) -> Option<StateId> {
        StateId::ALL
            .into_iter()
            .find(|s| s.is_tree() == tree && s.pattern() == (has_k, has_k1, has_k2))
    }
}

/// Lexicographic `(violations, cost)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Score {
    pub violations: usize,
    pub cost: i64,
}

/// Aggregation rules derived from the problem kind.
#[derive(Debug, Clone, Copy)]
struct Rules {
    max: bool,
    interactions: bool,
    conflicts: bool,
    /// linear costs contribute (false for feasibility kinds)
    linear: bool,
    identity: i64,
}

impl Rules {
    fn for_kind(kind: ProblemKind) -> Rules {
        let shape = kind.shape();
        let max = shape.aggregation == Some(Aggregation::Max);
        Rules {
            max,
            interactions: shape.interactions,
            conflicts: shape.conflicts,
            linear: shape.aggregation.is_some(),
            identity: if max && !shape.interactions { i64::MIN } else { 0 },
        }
    }

    fn empty(&self) -> Score {
        Score {
            violations: 0,
            cost: self.identity,
        }
    }

    #[inline]
    fn join(&self, a: Score, b: Score) -> Score {
        Score {
            violations: a.violations + b.violations,
            cost: if self.max { a.cost.max(b.cost) } else { a.cost + b.cost },
        }
    }

    fn elem(&self, inst: &Instance, e: usize) -> Score {
        Score {
            violations: 0,
            cost: if self.linear { inst.q.get(e, e) } else { self.identity },
        }
    }

    /// Both ordered entries of an unordered pair plus its conflict.
    fn pair(&self, inst: &Instance, e: usize, f: usize) -> Score {
        let cost = if self.interactions {
            let (a, b) = (inst.q.get(e, f), inst.q.get(f, e));
            if self.max {
                a.max(b)
            } else {
                a + b
            }
        } else {
            self.identity
        };
        Score {
            violations: usize::from(self.conflicts && inst.conflicts.contains(e, f)),
            cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Back {
    Base(Vec<usize>),
    Step { pred: StateId, removed: [u32; 2], len: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Record {
    score: Score,
    back: Back,
}

/// Work counters. `recurrence_applications` counts state updates for layers
/// `2..=n` (seven each); `candidate_evaluations` counts every predecessor and
/// removal pair scored, base layer included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpStats {
    pub layers: usize,
    pub recurrence_applications: u64,
    pub candidate_evaluations: u64,
}

/// Optional behaviour for tests and diagnostics.
#[derive(Default)]
pub struct DpOptions<'h> {
    /// Cross-check every segment delta against [`dp_delta_cost`].
    pub verify_deltas: bool,
    /// Rewrites a state score right after layer `i` (1-based) is computed.
    #[allow(clippy::type_complexity)]
    pub layer_hook: Option<&'h dyn Fn(usize, StateId, Score) -> Score>,
}

/// Completed table with backpointers.
#[derive(Debug, Clone)]
pub struct DpTable {
    layers: Vec<[Option<Record>; 7]>,
    paths: Vec<CyclePath>,
    pub stats: DpStats,
}

impl DpTable {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Score of a state at 1-based layer `i`, `None` when unreachable.
    pub fn score(&self, i: usize, state: StateId) -> Option<Score> {
        self.layers[i - 1][state.index()].as_ref().map(|r| r.score)
    }

    /// Edges of the solution behind a state, sorted.
    pub fn edges(&self, i: usize, state: StateId) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        let mut state = state;
        for layer in (0..i).rev() {
            let rec = self.layers[layer][state.index()]
                .as_ref()
                .ok_or_else(|| Error::MalformedStructure(format!("state {:?} unreachable at layer {}", state, layer + 1)))?;
            match &rec.back {
                Back::Base(edges) => {
                    debug_assert_eq!(layer, 0);
                    out.extend_from_slice(edges);
                }
                Back::Step { pred, removed, len } => {
                    let removed = &removed[..*len as usize];
                    out.extend(
                        self.paths[layer]
                            .path
                            .iter()
                            .enumerate()
                            .filter(|(p, _)| !removed.contains(&(*p as u32)))
                            .map(|(_, &e)| e),
                    );
                    state = *pred;
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Outcome of [`dp_solve`]: the solver result plus counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpSolution {
    pub result: SolveResult,
    pub final_state: Option<StateId>,
    pub score: Score,
    pub stats: DpStats,
}

fn check_inputs(inst: &Instance, ladder: &LadderStructure, kind: ProblemKind) -> Result<Vec<CyclePath>> {
    if inst.graph != ladder.graph {
        return Err(Error::MalformedStructure(
            "instance graph differs from the ladder witness".into(),
        ));
    }
    let paths = ladder.layout()?;
    let shape = kind.shape();
    if shape.interactions {
        if let Some((i, j)) = inst
            .q
            .nonzeros()
            .into_iter()
            .find(|&(i, j, _)| i != j && !inst.graph.edges_adjacent(i, j).unwrap_or(false))
            .map(|(i, j, _)| (i, j))
        {
            return Err(Error::NotAdjacentOnly(i, j));
        }
    }
    if shape.conflicts {
        if let Some((e, f)) = inst.conflicts.first_non_adjacent(&inst.graph) {
            return Err(Error::ConflictNotAdjacent(e, f));
        }
    }
    Ok(paths)
}

/// Score of `subset` taken on its own: every ordered pair, diagonal included.
fn direct_score(inst: &Instance, rules: &Rules, subset: &[usize]) -> Score {
    let mut s = rules.empty();
    for (a, &e) in subset.iter().enumerate() {
        s = rules.join(s, rules.elem(inst, e));
        for &f in &subset[a + 1..] {
            s = rules.join(s, rules.pair(inst, e, f));
        }
    }
    s
}

fn base_layer(inst: &Instance, ladder: &LadderStructure, rules: &Rules, stats: &mut DpStats) -> [Option<Record>; 7] {
    let k = ladder.k;
    let labels = &ladder.cycle_edges[0];
    let (ek, ek1, ek2) = (labels[k - 1], labels[k - 2], labels[k - 3]);
    let mut out: [Option<Record>; 7] = Default::default();
    let mut consider = |removed: &[usize]| {
        let mut subset: Vec<usize> = labels.iter().copied().filter(|e| !removed.contains(e)).collect();
        subset.sort_unstable();
        let tree = removed.len() == 1;
        let has = |e: usize| !removed.contains(&e);
        let Some(state) = StateId::classify(has(ek), has(ek1), has(ek2), tree) else {
            return;
        };
        stats.candidate_evaluations += 1;
        let score = direct_score(inst, rules, &subset);
        let slot = &mut out[state.index()];
        let better = match slot {
            None => true,
            Some(r) => match score.cmp(&r.score) {
                Ordering::Less => true,
                Ordering::Equal => matches!(&r.back, Back::Base(old) if subset < *old),
                Ordering::Greater => false,
            },
        };
        if better {
            *slot = Some(Record {
                score,
                back: Back::Base(subset),
            });
        }
    };
    for a in 0..k {
        consider(&[labels[a]]);
        for b in a + 1..k {
            consider(&[labels[a], labels[b]]);
        }
    }
    out
}

/// Per-layer precomputation over the path of the new cycle.
struct Segments {
    len: usize,
    elem: Vec<Score>,
    link: Vec<Score>,
    /// `prefix[j]` scores positions `0..j`
    prefix: Vec<Score>,
    /// `suffix[j]` scores positions `j..len`
    suffix: Vec<Score>,
    /// boundary terms of `P[0]` and `P[len-1]` per predecessor state
    bound_r: [Score; 7],
    bound_s: [Score; 7],
}

impl Segments {
    fn new(inst: &Instance, rules: &Rules, path: &[usize], boundary: (usize, usize, usize)) -> Segments {
        let len = path.len();
        let elem: Vec<Score> = path.iter().map(|&e| rules.elem(inst, e)).collect();
        let link: Vec<Score> = path.windows(2).map(|w| rules.pair(inst, w[0], w[1])).collect();
        let mut prefix = vec![rules.empty(); len + 1];
        for j in 0..len {
            let with_link = if j > 0 { rules.join(prefix[j], link[j - 1]) } else { prefix[j] };
            prefix[j + 1] = rules.join(with_link, elem[j]);
        }
        let mut suffix = vec![rules.empty(); len + 1];
        for j in (0..len).rev() {
            let with_link = if j + 1 < len { rules.join(suffix[j + 1], link[j]) } else { suffix[j + 1] };
            suffix[j] = rules.join(with_link, elem[j]);
        }
        let (bk, bk1, bk2) = boundary;
        let (first, last) = (path[0], path[len - 1]);
        let mut bound_r = [rules.empty(); 7];
        let mut bound_s = [rules.empty(); 7];
        for s in StateId::ALL {
            let (pk, pk1, pk2) = s.pattern();
            let mut r = rules.empty();
            let mut t = rules.empty();
            if pk {
                r = rules.join(r, rules.pair(inst, first, bk));
                t = rules.join(t, rules.pair(inst, last, bk));
            }
            if pk1 {
                r = rules.join(r, rules.pair(inst, first, bk1));
            }
            if pk2 {
                t = rules.join(t, rules.pair(inst, last, bk2));
            }
            bound_r[s.index()] = r;
            bound_s[s.index()] = t;
        }
        Segments {
            len,
            elem,
            link,
            prefix,
            suffix,
            bound_r,
            bound_s,
        }
    }

    /// Delta for removing sorted positions `lo <= hi` (`lo == hi` for one),
    /// given the score of the middle segment `lo+1..hi`.
    fn delta(&self, rules: &Rules, pred: StateId, lo: usize, hi: usize, middle: Score) -> Score {
        let mut d = rules.join(self.prefix[lo], self.suffix[hi + 1]);
        d = rules.join(d, middle);
        if lo > 0 {
            d = rules.join(d, self.bound_r[pred.index()]);
        }
        if hi + 1 < self.len {
            d = rules.join(d, self.bound_s[pred.index()]);
        }
        d
    }

    fn full(&self, rules: &Rules, pred: StateId) -> Score {
        let d = rules.join(self.prefix[self.len], self.bound_r[pred.index()]);
        rules.join(d, self.bound_s[pred.index()])
    }
}

struct Candidate {
    score: Score,
    pred: StateId,
    removed: [u32; 2],
    len: u8,
}

fn added_edges(path: &[usize], removed: &[u32]) -> Vec<usize> {
    let mut v: Vec<usize> = path
        .iter()
        .enumerate()
        .filter(|(p, _)| !removed.contains(&(*p as u32)))
        .map(|(_, &e)| e)
        .collect();
    v.sort_unstable();
    v
}

fn offer(slot: &mut Option<Candidate>, cand: Candidate, path: &[usize]) {
    let better = match slot {
        None => true,
        Some(cur) => match cand.score.cmp(&cur.score) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                let a = added_edges(path, &cand.removed[..cand.len as usize]);
                let b = added_edges(path, &cur.removed[..cur.len as usize]);
                a < b || (a == b && cand.pred < cur.pred)
            }
        },
    };
    if better {
        *slot = Some(cand);
    }
}

/// Builds the full DP table.
pub fn dp_table(inst: &Instance, ladder: &LadderStructure, kind: ProblemKind, opts: &DpOptions) -> Result<DpTable> {
    let paths = check_inputs(inst, ladder, kind)?;
    let rules = Rules::for_kind(kind);
    let k = ladder.k;
    let mut stats = DpStats {
        layers: ladder.n,
        ..Default::default()
    };
    let mut layers: Vec<[Option<Record>; 7]> = Vec::with_capacity(ladder.n);
    let mut first = base_layer(inst, ladder, &rules, &mut stats);
    apply_hook(opts, 1, &mut first);
    layers.push(first);

    for i in 1..ladder.n {
        let cp = &paths[i];
        let prev_labels = &ladder.cycle_edges[i - 1];
        let boundary = (prev_labels[k - 1], prev_labels[k - 2], prev_labels[k - 3]);
        let seg = Segments::new(inst, &rules, &cp.path, boundary);
        let prev = &layers[i - 1];
        let (pk, pk1, pk2) = (cp.pos_k, cp.pos_k1, cp.pos_k2);
        let middles: Vec<usize> = (0..seg.len).filter(|&p| p != pk && p != pk1 && p != pk2).collect();
        let mut next: [Option<Candidate>; 7] = Default::default();

        let check = |pred: StateId, removed: &[usize], got: Score| -> Result<()> {
            if opts.verify_deltas {
                let added = EdgeSet::new(added_edges(&cp.path, &removed.iter().map(|&r| r as u32).collect::<Vec<_>>()));
                let (bk, bk1, bk2) = pred.pattern();
                let naive = dp_delta_cost(inst, ladder, i + 1, [bk, bk1, bk2], &added, kind)?;
                assert_eq!(naive, got, "segment delta disagrees with the direct sum at layer {}", i + 1);
            }
            Ok(())
        };

        for pred in StateId::TREES {
            let Some(rec) = &prev[pred.index()] else { continue };
            let base = rec.score;
            // single removals: e_{k-2} -> T1, e_{k-1} -> T2, e_k -> T3, middle -> T4
            for (target, pos) in [(StateId::T1, pk2), (StateId::T2, pk1), (StateId::T3, pk)]
                .into_iter()
                .chain(middles.iter().map(|&l| (StateId::T4, l)))
            {
                let d = seg.delta(&rules, pred, pos, pos, rules.empty());
                check(pred, &[pos], d)?;
                stats.candidate_evaluations += 1;
                offer(
                    &mut next[target.index()],
                    Candidate {
                        score: rules.join(base, d),
                        pred,
                        removed: [pos as u32, 0],
                        len: 1,
                    },
                    &cp.path,
                );
            }
            // double removals with e_k: adjacent partners leave an empty middle
            for (target, pos) in [(StateId::F1, pk2), (StateId::F2, pk1)] {
                let (lo, hi) = (pk.min(pos), pk.max(pos));
                let d = seg.delta(&rules, pred, lo, hi, rules.empty());
                check(pred, &[lo, hi], d)?;
                stats.candidate_evaluations += 1;
                offer(
                    &mut next[target.index()],
                    Candidate {
                        score: rules.join(base, d),
                        pred,
                        removed: [lo as u32, hi as u32],
                        len: 2,
                    },
                    &cp.path,
                );
            }
            // F3 from a tree: e_k and a middle edge; the segment between them
            // grows by one position per step
            let mut middle = rules.empty();
            for (grown, l) in (0..pk).rev().filter(|&l| l + 1 < pk).enumerate() {
                let add = l + 1;
                middle = if grown == 0 {
                    seg.elem[add]
                } else {
                    rules.join(rules.join(seg.elem[add], seg.link[add]), middle)
                };
                if l == pk1 || l == pk2 {
                    continue;
                }
                let d = seg.delta(&rules, pred, l, pk, middle);
                check(pred, &[l, pk], d)?;
                stats.candidate_evaluations += 1;
                offer(
                    &mut next[StateId::F3.index()],
                    Candidate {
                        score: rules.join(base, d),
                        pred,
                        removed: [l as u32, pk as u32],
                        len: 2,
                    },
                    &cp.path,
                );
            }
            let mut middle = rules.empty();
            for (grown, l) in (pk + 2..seg.len).enumerate() {
                let add = l - 1;
                middle = if grown == 0 {
                    seg.elem[add]
                } else {
                    rules.join(rules.join(middle, seg.link[add - 1]), seg.elem[add])
                };
                if l == pk1 || l == pk2 {
                    continue;
                }
                let d = seg.delta(&rules, pred, pk, l, middle);
                check(pred, &[pk, l], d)?;
                stats.candidate_evaluations += 1;
                offer(
                    &mut next[StateId::F3.index()],
                    Candidate {
                        score: rules.join(base, d),
                        pred,
                        removed: [pk as u32, l as u32],
                        len: 2,
                    },
                    &cp.path,
                );
            }
        }
        for pred in StateId::FORESTS {
            let Some(rec) = &prev[pred.index()] else { continue };
            let base = rec.score;
            let d = seg.full(&rules, pred);
            check(pred, &[], d)?;
            stats.candidate_evaluations += 1;
            offer(
                &mut next[StateId::T4.index()],
                Candidate {
                    score: rules.join(base, d),
                    pred,
                    removed: [0, 0],
                    len: 0,
                },
                &cp.path,
            );
            let d = seg.delta(&rules, pred, pk, pk, rules.empty());
            check(pred, &[pk], d)?;
            stats.candidate_evaluations += 1;
            offer(
                &mut next[StateId::F3.index()],
                Candidate {
                    score: rules.join(base, d),
                    pred,
                    removed: [pk as u32, 0],
                    len: 1,
                },
                &cp.path,
            );
        }
        stats.recurrence_applications += 7;
        let mut layer: [Option<Record>; 7] = next.map(|c| {
            c.map(|c| Record {
                score: c.score,
                back: Back::Step {
                    pred: c.pred,
                    removed: c.removed,
                    len: c.len,
                },
            })
        });
        apply_hook(opts, i + 1, &mut layer);
        layers.push(layer);
    }
    Ok(DpTable { layers, paths, stats })
}

fn apply_hook(opts: &DpOptions, i: usize, layer: &mut [Option<Record>; 7]) {
    if let Some(hook) = opts.layer_hook {
        for s in StateId::ALL {
            if let Some(r) = layer[s.index()].as_mut() {
                r.score = hook(i, s, r.score);
            }
        }
    }
}

/// Solves `kind` on a ladder instance. The instance must be adjacent-only in
/// whatever the kind uses (interactions, conflicts or both).
pub fn dp_solve(inst: &Instance, ladder: &LadderStructure, kind: ProblemKind) -> Result<DpSolution> {
    dp_solve_with(inst, ladder, kind, &DpOptions::default())
}

pub fn dp_solve_with(inst: &Instance, ladder: &LadderStructure, kind: ProblemKind, opts: &DpOptions) -> Result<DpSolution> {
    let table = dp_table(inst, ladder, kind, opts)?;
    let n = ladder.n;
    let mut best: Option<(Score, Vec<usize>, StateId)> = None;
    for s in StateId::TREES {
        let Some(score) = table.score(n, s) else { continue };
        if best.as_ref().is_some_and(|(b, _, _)| score > *b) {
            continue;
        }
        let edges = table.edges(n, s)?;
        let replace = match &best {
            None => true,
            Some((b, t, _)) => score < *b || edges < *t,
        };
        if replace {
            best = Some((score, edges, s));
        }
    }
    let (score, edges, state) = best.ok_or_else(|| Error::MalformedStructure("no tree state reachable".into()))?;
    let tree = dp_reconstruct(&inst.graph, edges)?;
    let result = if score.violations > 0 {
        SolveResult::infeasible(kind, "ladder-dp")
    } else {
        let value = if kind.shape().aggregation.is_some() { score.cost } else { 0 };
        if opts.layer_hook.is_none() {
            let check = evaluate(inst, kind, tree.edges())?;
            assert_eq!(
                (check.value, check.violations),
                (value, 0),
                "reconstructed tree does not reproduce the DP value"
            );
        }
        SolveResult::optimal(kind, "ladder-dp", value, tree.edges().clone())
    };
    Ok(DpSolution {
        result,
        final_state: Some(state),
        score,
        stats: table.stats,
    })
}

/// Wraps reconstructed edges as a checked spanning tree.
pub fn dp_reconstruct(g: &crate::graph::Graph, edges: Vec<usize>) -> Result<SpanningTree> {
    SpanningTree::new(g, EdgeSet::new(edges))
}

/// Direct cost of extending a layer-`(i-1)` state by `added` edges of cycle
/// `i` (1-based, `i >= 2`). `boundary` flags the presence of
/// `(e^{i-1}_k, e^{i-1}_{k-1}, e^{i-1}_{k-2})` in the predecessor. Sums every
/// ordered pair inside `added` and both directions between `added` and the
/// present boundary edges, plus the diagonal of `added`.
pub fn dp_delta_cost(
    inst: &Instance,
    ladder: &LadderStructure,
    i: usize,
    boundary: [bool; 3],
    added: &EdgeSet,
    kind: ProblemKind,
) -> Result<Score> {
    if i < 2 || i > ladder.n {
        return Err(Error::InvalidParameters(format!("layer {} has no predecessor", i)));
    }
    let k = ladder.k;
    let cycle = &ladder.cycle_edges[i - 1];
    if let Some(&e) = added.iter().find(|&&e| !cycle[1..].contains(&e)) {
        return Err(Error::InvalidParameters(format!("edge {} is not a new edge of cycle {}", e, i)));
    }
    let rules = Rules::for_kind(kind);
    let prev = &ladder.cycle_edges[i - 2];
    let present: Vec<usize> = [prev[k - 1], prev[k - 2], prev[k - 3]]
        .into_iter()
        .zip(boundary)
        .filter(|&(_, p)| p)
        .map(|(e, _)| e)
        .collect();
    let mut s = direct_score(inst, &rules, added.as_slice());
    for &e in added.iter() {
        for &b in &present {
            s = rules.join(s, rules.pair(inst, e, b));
        }
    }
    Ok(s)
}
