//! Generators for the sparse graph families: fans, wheels, fan-stars, rung
//! ladders, `(k,n)`-ladders and `(k,n)`-accordions.
//!
//! Edge orders are fixed so that cost matrices and fixtures are reproducible:
//!
//! * fan `F_n`: path vertices `v1..vn` are `0..n`, the hub is `n`. Path edges
//!   `(v1,v2)..(v_{n-1},v_n)` first, then spokes `(u,v1)..(u,vn)`.
//! * wheel `W_n`: the fan order followed by the closing edge `(v1,vn)`.
//! * fan-star `FS_n`: the fan order with the deleted path edges skipped.
//! * rung ladder `L_n`: rails `v_i = i`, `u_i = n + i`; top rail edges, then
//!   bottom rail edges, then rungs `(v_i,u_i)`.
//! * fused families: the first cycle is `0..k` with edges `(j,j+1)` and the
//!   closing edge `(k-1,0)`; each later cycle appends its `k-1` new path
//!   edges `(r,w1),(w1,w2),..,(w_{k-2},s)` where `(r,s)` is the fused edge.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameters(msg.into())
}

/// Fan `F_n`: a path on `n` vertices plus a hub joined to all of them.
pub fn make_fan(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(invalid("fan needs n >= 1"));
    }
    Graph::new(n + 1, fan_edges(n))
}

fn fan_edges(n: usize) -> Vec<(usize, usize)> {
    let hub = n;
    let mut edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    edges.extend((0..n).map(|i| (hub, i)));
    edges
}

/// Wheel `W_n`: the fan plus the edge `(v1, vn)`.
pub fn make_wheel(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(invalid("wheel needs n >= 3"));
    }
    let mut edges = fan_edges(n);
    edges.push((0, n - 1));
    Graph::new(n + 1, edges)
}

/// Fan-star `FS_n`, `n = 3k`: the fan without the path edges `(v_{3i}, v_{3i+1})`.
pub fn make_fan_star(n: usize) -> Result<Graph> {
    if n == 0 || !n.is_multiple_of(3) {
        return Err(invalid("fan-star needs n divisible by 3"));
    }
    let hub = n;
    // 1-based (v_{3i}, v_{3i+1}) is 0-based (3i-1, 3i)
    let mut edges: Vec<(usize, usize)> = (0..n - 1)
        .filter(|i| (i + 1) % 3 != 0)
        .map(|i| (i, i + 1))
        .collect();
    edges.extend((0..n).map(|i| (hub, i)));
    Graph::new(n + 1, edges)
}

/// The rung ladder `L_n` as a plain graph (valid for `n >= 1`).
pub fn ladder_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(invalid("ladder needs n >= 1"));
    }
    let mut edges = Vec::with_capacity(3 * n - 2);
    edges.extend((0..n - 1).map(|i| (i, i + 1)));
    edges.extend((0..n - 1).map(|i| (n + i, n + i + 1)));
    edges.extend((0..n).map(|i| (i, n + i)));
    Graph::new(2 * n, edges)
}

/// The rung ladder `L_n` labelled as the `(4, n-1)`-ladder it is.
///
/// `L_n` has `n` rungs and therefore `n - 1` squares; `L_1` is a single edge
/// with no cycle and is rejected here (use [`ladder_graph`] for it).
pub fn make_ladder(n: usize) -> Result<LadderStructure> {
    if n < 2 {
        return Err(invalid(
            "L_1 is a single rung with no cycle; a ladder structure needs n >= 2",
        ));
    }
    let graph = ladder_graph(n)?;
    let top = |i: usize| i;
    let bottom = |i: usize| (n - 1) + i;
    let rung = |i: usize| 2 * (n - 1) + i;
    let squares = n - 1;
    let mut cycle_edges = Vec::with_capacity(squares);
    let mut anchors = Vec::with_capacity(squares);
    for i in 0..squares {
        // e1 = rung i, e2 = bottom rail (= e_{k-2}), e3 = top rail (= e_{k-1}), e4 = rung i+1
        cycle_edges.push(vec![rung(i), bottom(i), top(i), rung(i + 1)]);
        anchors.push((i + 1, n + i + 1));
    }
    let free_edge_choices = (1..squares).map(rung).collect();
    let ladder = LadderStructure {
        graph,
        k: 4,
        n: squares,
        cycle_edges,
        anchors,
        free_edge_choices,
    };
    ladder.layout()?;
    Ok(ladder)
}

/// Which edges become free after a fusion step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FreeRule {
    /// edges with at least one new endpoint
    Accordion,
    /// edges with both endpoints new
    Ladder,
}

/// Incremental builder for fused-cycle graphs.
struct Fusion {
    k: usize,
    rule: FreeRule,
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    /// per cycle: (shared edge, path vertices from r to s, path edges); cycle 1 has no shared edge
    cycles: Vec<(Option<usize>, Vec<usize>, Vec<usize>)>,
    free: Vec<usize>,
    choices: Vec<usize>,
}

impl Fusion {
    fn new(k: usize, rule: FreeRule) -> Self {
        let mut edges: Vec<(usize, usize)> = (0..k - 1).map(|j| (j, j + 1)).collect();
        edges.push((k - 1, 0));
        let vertices: Vec<usize> = (0..k).collect();
        Fusion {
            k,
            rule,
            num_vertices: k,
            cycles: vec![(None, vertices, (0..k).collect())],
            free: (0..k).collect(),
            edges,
            choices: Vec::new(),
        }
    }

    fn fuse(&mut self, f: usize) -> Result<()> {
        let step = self.cycles.len() + 1;
        if !self.free.contains(&f) {
            return Err(Error::InvalidChoice { step, edge: f });
        }
        let (r, s) = self.edges[f];
        let mut path = vec![r];
        path.extend(self.num_vertices..self.num_vertices + self.k - 2);
        path.push(s);
        self.num_vertices += self.k - 2;
        let first_new = self.edges.len();
        for w in path.windows(2) {
            self.edges.push((w[0], w[1]));
        }
        let path_edges: Vec<usize> = (first_new..self.edges.len()).collect();
        self.free = match self.rule {
            FreeRule::Accordion => path_edges.clone(),
            FreeRule::Ladder => path_edges[1..path_edges.len() - 1].to_vec(),
        };
        self.cycles.push((Some(f), path, path_edges));
        self.choices.push(f);
        Ok(())
    }

    fn graph(&self) -> Result<Graph> {
        Graph::new(self.num_vertices, self.edges.clone())
    }
}

/// Where the free-edge choices of a fused construction come from.
#[derive(Debug, Clone)]
pub enum FreeEdgeChoice {
    /// Always the lowest-index free edge.
    Lowest,
    /// Uniform among free edges, driven by a ChaCha8 stream from this seed.
    Seeded(u64),
    /// One global edge index per fusion step (`n - 1` entries).
    Explicit(Vec<usize>),
}

fn run_fusion(k: usize, n: usize, rule: FreeRule, choice: &FreeEdgeChoice) -> Result<Fusion> {
    let mut fusion = Fusion::new(k, rule);
    let mut rng = match choice {
        FreeEdgeChoice::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    if let FreeEdgeChoice::Explicit(list) = choice {
        if list.len() != n - 1 {
            return Err(invalid(format!(
                "expected {} free-edge choices, got {}",
                n - 1,
                list.len()
            )));
        }
    }
    for step in 0..n - 1 {
        if fusion.free.is_empty() {
            return Err(invalid(format!("no free edge left at step {}", step + 2)));
        }
        let f = match choice {
            FreeEdgeChoice::Lowest => *fusion.free.iter().min().expect("nonempty"),
            FreeEdgeChoice::Seeded(_) => *fusion
                .free
                .choose(rng.as_mut().expect("seeded"))
                .expect("nonempty"),
            FreeEdgeChoice::Explicit(list) => list[step],
        };
        fusion.fuse(f)?;
    }
    Ok(fusion)
}

/// A labelled `(k,n)`-ladder.
///
/// `cycle_edges[i]` lists `e^i_1 .. e^i_k` (0-based positions `0..k`):
/// `e^i_1` is shared with the previous cycle, `e^i_k` with the next one, and
/// `e^i_{k-1}`, `e^i_{k-2}` are the cycle edges meeting `e^i_k` at
/// `anchors[i].0` and `anchors[i].1` respectively. The middle labels
/// `e^i_2 .. e^i_{k-3}` follow the cycle walk from the `anchors[i-1].0` side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderStructure {
    pub graph: Graph,
    pub k: usize,
    pub n: usize,
    pub cycle_edges: Vec<Vec<usize>>,
    pub anchors: Vec<(usize, usize)>,
    pub free_edge_choices: Vec<usize>,
}

/// Per-cycle path view derived from a validated ladder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclePath {
    /// Cycle edges other than `e^i_1`, walking from `v^{i-1}_1` to `v^{i-1}_2`.
    pub path: Vec<usize>,
    /// Positions of `e^i_k`, `e^i_{k-1}`, `e^i_{k-2}` within `path`.
    pub pos_k: usize,
    pub pos_k1: usize,
    pub pos_k2: usize,
}

impl LadderStructure {
    /// Labelled label `e^i_l` with 1-based `i` and `l`.
    pub fn label(&self, i: usize, l: usize) -> usize {
        self.cycle_edges[i - 1][l - 1]
    }

    /// Checks every ladder invariant and returns the path view of each cycle.
    ///
    /// This is the structural validator used before running the ladder DP on
    /// a witness loaded from disk.
    pub fn layout(&self) -> Result<Vec<CyclePath>> {
        let bad = |msg: String| Error::MalformedStructure(msg);
        let (k, n, g) = (self.k, self.n, &self.graph);
        if k < 4 {
            return Err(bad(format!("k = {} < 4", k)));
        }
        if n == 0 || self.cycle_edges.len() != n || self.anchors.len() != n {
            return Err(bad("cycle or anchor list length does not match n".into()));
        }
        if g.num_edges() != n * (k - 1) + 1 || g.num_vertices() != n * (k - 2) + 2 {
            return Err(bad("edge or vertex count does not match n(k-1)+1, n(k-2)+2".into()));
        }
        let mut owner = vec![0usize; g.num_edges()];
        let mut seen_vertex = vec![false; g.num_vertices()];
        let mut paths = Vec::with_capacity(n);
        for i in 0..n {
            let labels = &self.cycle_edges[i];
            if labels.len() != k {
                return Err(bad(format!("cycle {} has {} labels", i + 1, labels.len())));
            }
            for &e in labels {
                g.check_edge(e)?;
            }
            let verts = cycle_vertices(g, labels)
                .ok_or_else(|| bad(format!("cycle {} is not a simple {}-cycle", i + 1, k)))?;
            for &e in labels {
                owner[e] += 1;
            }
            if i > 0 && labels[0] != self.cycle_edges[i - 1][k - 1] {
                return Err(bad(format!("e^{}_1 differs from e^{}_k", i + 1, i)));
            }
            if i > 0 {
                let prev: &Vec<usize> = &self.cycle_edges[i - 1];
                let shared = labels.iter().filter(|e| prev.contains(e)).count();
                if shared != 1 {
                    return Err(bad(format!("cycles {} and {} share {} edges", i, i + 1, shared)));
                }
            }
            let (v1, v2) = self.anchors[i];
            let (a, b) = g.endpoints(labels[k - 1])?;
            if !((a == v1 && b == v2) || (a == v2 && b == v1)) {
                return Err(bad(format!("anchors of cycle {} are not the ends of e^i_k", i + 1)));
            }
            let touches = |e: usize, v: usize| {
                let (x, y) = g.edges()[e];
                x == v || y == v
            };
            if !touches(labels[k - 2], v1) || touches(labels[k - 2], v2) {
                return Err(bad(format!("e^{}_(k-1) must meet e^i_k at v1 only", i + 1)));
            }
            if !touches(labels[k - 3], v2) || touches(labels[k - 3], v1) {
                return Err(bad(format!("e^{}_(k-2) must meet e^i_k at v2 only", i + 1)));
            }
            if i > 0 {
                // anchors of a later cycle must be vertices introduced by that cycle
                if seen_vertex[v1] || seen_vertex[v2] {
                    return Err(bad(format!(
                        "e^{}_k has an endpoint outside the new vertices of its cycle",
                        i + 1
                    )));
                }
                let (r, s) = self.anchors[i - 1];
                paths.push(walk_path(g, labels, r, s, k).ok_or_else(|| {
                    bad(format!("cannot walk cycle {} from the previous anchors", i + 1))
                })?);
            } else {
                let (x, y) = g.endpoints(labels[0])?;
                let first = walk_path(g, labels, x, y, k)
                    .or_else(|| walk_path(g, labels, y, x, k))
                    .ok_or_else(|| bad("cannot walk the first cycle".into()))?;
                paths.push(first);
            }
            for v in verts {
                seen_vertex[v] = true;
            }
        }
        if owner.contains(&0) {
            return Err(bad("some edge belongs to no cycle".into()));
        }
        // every label must be distinct within its cycle, and an edge may sit in
        // two cycles only when it is the shared edge of consecutive cycles
        let shared_total: usize = owner.iter().filter(|&&c| c == 2).count();
        if owner.iter().any(|&c| c > 2) || shared_total != n - 1 {
            return Err(bad("non-consecutive cycles share edges".into()));
        }
        for p in &paths {
            let ok = (p.pos_k1 + 1 == p.pos_k && p.pos_k2 == p.pos_k + 1)
                || (p.pos_k2 + 1 == p.pos_k && p.pos_k1 == p.pos_k + 1);
            if !ok {
                return Err(bad("e^i_(k-1), e^i_(k-2) are not the path neighbours of e^i_k".into()));
            }
        }
        Ok(paths)
    }

    pub fn to_sidecar(&self, family: &str) -> StructureSidecar {
        StructureSidecar {
            family: family.to_string(),
            k: Some(self.k),
            n: self.n,
            cycle_edges: self.cycle_edges.clone(),
            anchors: Some(self.anchors.clone()),
            free_edge_choices: self.free_edge_choices.clone(),
        }
    }

    /// Rebuilds a ladder from a graph and its sidecar, validating it.
    pub fn from_sidecar(graph: Graph, sidecar: &StructureSidecar) -> Result<Self> {
        let anchors = sidecar
            .anchors
            .clone()
            .ok_or_else(|| Error::MalformedStructure("sidecar has no anchors".into()))?;
        let k = sidecar
            .k
            .ok_or_else(|| Error::MalformedStructure("sidecar has no k".into()))?;
        let ladder = LadderStructure {
            graph,
            k,
            n: sidecar.n,
            cycle_edges: sidecar.cycle_edges.clone(),
            anchors,
            free_edge_choices: sidecar.free_edge_choices.clone(),
        };
        ladder.layout()?;
        Ok(ladder)
    }
}

/// Vertices of a simple cycle formed by `edges`, or `None`.
fn cycle_vertices(g: &Graph, edges: &[usize]) -> Option<Vec<usize>> {
    let mut verts: Vec<usize> = edges
        .iter()
        .flat_map(|&e| {
            let (u, v) = g.edges()[e];
            [u, v]
        })
        .collect();
    verts.sort_unstable();
    let mut uniq = verts.clone();
    uniq.dedup();
    if uniq.len() != edges.len() || verts.len() != 2 * uniq.len() {
        return None;
    }
    // each vertex appears exactly twice
    if verts.chunks(2).any(|c| c[0] != c[1]) {
        return None;
    }
    // 2-regular, so it is one cycle iff walking from any vertex uses every edge
    let mut used = vec![false; edges.len()];
    let mut at = uniq[0];
    for _ in 0..edges.len() {
        let next = (0..edges.len()).find(|&x| {
            let (u, v) = g.edges()[edges[x]];
            !used[x] && (u == at || v == at)
        })?;
        used[next] = true;
        let (u, v) = g.edges()[edges[next]];
        at = if u == at { v } else { u };
    }
    (at == uniq[0]).then_some(uniq)
}

/// Walks `labels` minus `labels[0]` from `r`, which must end at `s`.
fn walk_path(g: &Graph, labels: &[usize], r: usize, s: usize, k: usize) -> Option<CyclePath> {
    let (a, b) = g.edges()[labels[0]];
    if !((a == r && b == s) || (a == s && b == r)) {
        return None;
    }
    let mut remaining: Vec<usize> = labels[1..].to_vec();
    let mut path = Vec::with_capacity(k - 1);
    let mut at = r;
    while !remaining.is_empty() {
        let idx = remaining.iter().position(|&e| {
            let (x, y) = g.edges()[e];
            x == at || y == at
        })?;
        let e = remaining.swap_remove(idx);
        let (x, y) = g.edges()[e];
        at = if x == at { y } else { x };
        path.push(e);
    }
    if at != s {
        return None;
    }
    let pos = |e: usize| path.iter().position(|&p| p == e);
    Some(CyclePath {
        pos_k: pos(labels[k - 1])?,
        pos_k1: pos(labels[k - 2])?,
        pos_k2: pos(labels[k - 3])?,
        path,
    })
}

/// A `(k,n)`-ladder; the free edge at each step is the lowest-index one.
pub fn make_kn_ladder(k: usize, n: usize) -> Result<LadderStructure> {
    build_kn_ladder(k, n, &FreeEdgeChoice::Lowest)
}

/// A `(k,n)`-ladder with an explicit or seeded choice of free edges.
pub fn build_kn_ladder(k: usize, n: usize, choice: &FreeEdgeChoice) -> Result<LadderStructure> {
    if k < 4 {
        return Err(invalid(
            "(k,n)-ladders need k >= 4: a triangle fused on a free edge leaves no edge with two new endpoints",
        ));
    }
    if n == 0 {
        return Err(invalid("(k,n)-ladder needs n >= 1"));
    }
    let fusion = run_fusion(k, n, FreeRule::Ladder, choice)?;
    let graph = fusion.graph()?;
    // the edge that would be fused next closes the last cycle's labelling
    let last_exit = *fusion.free.iter().min().expect("ladder keeps a free edge");
    let exits: Vec<usize> = fusion
        .choices
        .iter()
        .copied()
        .chain(std::iter::once(last_exit))
        .collect();

    let mut cycle_edges = Vec::with_capacity(n);
    let mut anchors = Vec::with_capacity(n);
    for (i, (shared, path_vertices, path_edges)) in fusion.cycles.iter().enumerate() {
        let exit = exits[i];
        let (path_vertices, path_edges, entry) = match shared {
            Some(f) => (path_vertices.clone(), path_edges.clone(), *f),
            None => first_cycle_path(&fusion.edges, exit, k),
        };
        let t = path_edges
            .iter()
            .position(|&e| e == exit)
            .expect("exit edge lies on the cycle path");
        debug_assert!(t >= 1 && t + 1 < path_edges.len());
        let mut labels = Vec::with_capacity(k);
        labels.push(entry);
        labels.extend(
            path_edges
                .iter()
                .enumerate()
                .filter(|&(x, _)| x + 1 < t || x > t + 1)
                .map(|(_, &e)| e),
        );
        labels.push(path_edges[t + 1]);
        labels.push(path_edges[t - 1]);
        labels.push(exit);
        cycle_edges.push(labels);
        anchors.push((path_vertices[t], path_vertices[t + 1]));
    }
    let ladder = LadderStructure {
        graph,
        k,
        n,
        cycle_edges,
        anchors,
        free_edge_choices: fusion.choices,
    };
    debug_assert!(ladder.layout().is_ok());
    Ok(ladder)
}

/// Orients the first cycle so that `exit` is the second edge of the path.
fn first_cycle_path(edges: &[(usize, usize)], exit: usize, k: usize) -> (Vec<usize>, Vec<usize>, usize) {
    // cycle edge j joins j and j+1 (mod k)
    let j = exit;
    let vertex = |x: usize| x % k;
    let start = (j + k - 1) % k;
    let path_vertices: Vec<usize> = (0..k).map(|x| vertex(start + x)).collect();
    let path_edges: Vec<usize> = (0..k - 1).map(|x| (start + x) % k).collect();
    let entry = (start + k - 1) % k;
    debug_assert_eq!(edges[exit], (j, (j + 1) % k));
    (path_vertices, path_edges, entry)
}

/// A `(k,n)`-accordion together with the trace that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccordionStructure {
    pub graph: Graph,
    pub k: usize,
    pub n: usize,
    /// Per cycle: the shared edge first (cycle 1: its edges in index order),
    /// then the new path edges.
    pub cycle_edges: Vec<Vec<usize>>,
    pub free_edge_choices: Vec<usize>,
}

impl AccordionStructure {
    pub fn to_sidecar(&self) -> StructureSidecar {
        StructureSidecar {
            family: "kn-accordion".into(),
            k: Some(self.k),
            n: self.n,
            cycle_edges: self.cycle_edges.clone(),
            anchors: None,
            free_edge_choices: self.free_edge_choices.clone(),
        }
    }
}

/// A `(k,n)`-accordion; free edges are those with at least one new endpoint.
pub fn make_kn_accordion(k: usize, n: usize, choice: &FreeEdgeChoice) -> Result<AccordionStructure> {
    if k < 3 {
        return Err(invalid("(k,n)-accordion needs k >= 3"));
    }
    if n == 0 {
        return Err(invalid("(k,n)-accordion needs n >= 1"));
    }
    let fusion = run_fusion(k, n, FreeRule::Accordion, choice)?;
    let cycle_edges = fusion
        .cycles
        .iter()
        .map(|(shared, _, path_edges)| match shared {
            Some(f) => std::iter::once(*f).chain(path_edges.iter().copied()).collect(),
            None => path_edges.clone(),
        })
        .collect();
    Ok(AccordionStructure {
        graph: fusion.graph()?,
        k,
        n,
        cycle_edges,
        free_edge_choices: fusion.choices,
    })
}

/// JSON sidecar describing how a generated graph decomposes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSidecar {
    pub family: String,
    pub k: Option<usize>,
    pub n: usize,
    pub cycle_edges: Vec<Vec<usize>>,
    pub anchors: Option<Vec<(usize, usize)>>,
    pub free_edge_choices: Vec<usize>,
}
