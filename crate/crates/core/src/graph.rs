//! Undirected simple graphs with stable edge indexing.
//!
//! Vertices are dense integers `0..n`. Edges are identified by their position
//! in the construction list and keep that index forever; every cost matrix,
//! conflict set and tree in the crate refers to edges by this index.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.num_vertices, raw.edges)
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph {
            num_vertices: g.num_vertices,
            edges: g.edges,
        }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, repeated edges and dangling endpoints.
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut incident = vec![Vec::new(); num_vertices];
        for (index, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w >= num_vertices {
                    return Err(Error::VertexOutOfRange {
                        vertex: w,
                        num_vertices,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            incident[u].push(index);
            incident[v].push(index);
        }
        Ok(Graph {
            num_vertices,
            edges,
            incident,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> Result<(usize, usize)> {
        self.edges.get(e).copied().ok_or(Error::EdgeOutOfRange {
            index: e,
            num_edges: self.edges.len(),
        })
    }

    /// Edge indices incident to `v`, in index order.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    /// Index of the edge joining `u` and `v`, if any.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.incident
            .get(u)?
            .iter()
            .copied()
            .find(|&e| {
                let (a, b) = self.edges[e];
                (a == u && b == v) || (a == v && b == u)
            })
    }

    pub(crate) fn check_edge(&self, e: usize) -> Result<()> {
        if e < self.edges.len() {
            Ok(())
        } else {
            Err(Error::EdgeOutOfRange {
                index: e,
                num_edges: self.edges.len(),
            })
        }
    }

    /// True iff the two edges share an endpoint.
    pub fn edges_adjacent(&self, e: usize, f: usize) -> Result<bool> {
        let (a, b) = self.endpoints(e)?;
        let (c, d) = self.endpoints(f)?;
        Ok(a == c || a == d || b == c || b == d)
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.num_vertices);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf.components() <= 1
    }

    /// True iff `s` is acyclic, connected and covers every vertex.
    pub fn is_spanning_tree(&self, s: &EdgeSet) -> bool {
        if s.len() + 1 != self.num_vertices.max(1) {
            return false;
        }
        let mut uf = UnionFind::new(self.num_vertices);
        for &e in s.iter() {
            let Some(&(u, v)) = self.edges.get(e) else {
                return false;
            };
            if !uf.union(u, v) {
                return false;
            }
        }
        uf.components() <= 1
    }

    /// `G - e` as a multigraph.
    pub fn delete_edge(&self, e: usize) -> Result<Multigraph> {
        self.check_edge(e)?;
        Ok(Multigraph::from(self).delete(e))
    }

    /// `G / e`: endpoints of `e` merged, loops dropped, parallel edges kept.
    pub fn contract_edge(&self, e: usize) -> Result<Multigraph> {
        self.check_edge(e)?;
        Ok(Multigraph::from(self).contract(e))
    }

    /// Renders the `p`/`e` line format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p {} {}", self.num_vertices, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "e {} {}", u, v);
        }
        out
    }

    /// Parses the `p`/`e` line format. Blank lines and `c` comment lines are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let mut tokens = line.split_whitespace();
            let Some(tag) = tokens.next() else { continue };
            let parse_err = |message: &str| Error::Parse {
                line: line_no,
                message: message.to_string(),
            };
            let mut number = |what: &str| -> Result<usize> {
                tokens
                    .next()
                    .ok_or_else(|| parse_err(&format!("missing {}", what)))?
                    .parse::<usize>()
                    .map_err(|_| parse_err(&format!("invalid {}", what)))
            };
            match tag {
                "c" => continue,
                "p" => {
                    if header.is_some() {
                        return Err(parse_err("duplicate header"));
                    }
                    let n = number("vertex count")?;
                    let m = number("edge count")?;
                    header = Some((n, m));
                }
                "e" => {
                    if header.is_none() {
                        return Err(parse_err("edge before header"));
                    }
                    let u = number("endpoint")?;
                    let v = number("endpoint")?;
                    edges.push((u, v));
                }
                _ => return Err(parse_err("unknown line tag")),
            }
        }
        let (n, m) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing header".into(),
        })?;
        if edges.len() != m {
            return Err(Error::Parse {
                line: 0,
                message: format!("header declares {} edges, found {}", m, edges.len()),
            });
        }
        Graph::new(n, edges)
    }
}

/// A set of edge indices, kept sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct EdgeSet(Vec<usize>);

impl EdgeSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        EdgeSet(members)
    }

    /// Builds a set and checks every member against the host graph.
    pub fn over(g: &Graph, members: Vec<usize>) -> Result<Self> {
        for &e in &members {
            g.check_edge(e)?;
        }
        Ok(EdgeSet::new(members))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for EdgeSet {
    fn from(v: Vec<usize>) -> Self {
        EdgeSet::new(v)
    }
}

impl From<EdgeSet> for Vec<usize> {
    fn from(s: EdgeSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        EdgeSet::new(iter.into_iter().collect())
    }
}

/// An edge set certified to be a spanning tree of the graph it was built against.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpanningTree {
    edges: EdgeSet,
}

impl SpanningTree {
    pub fn new(g: &Graph, edges: EdgeSet) -> Result<Self> {
        if g.is_spanning_tree(&edges) {
            Ok(SpanningTree { edges })
        } else {
            Err(Error::NotSpanningTree)
        }
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn as_slice(&self) -> &[usize] {
        self.edges.as_slice()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.contains(e)
    }
}

/// A spanning forest of exactly two trees with the anchors in different trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoForest {
    edges: EdgeSet,
    anchor_a: usize,
    anchor_b: usize,
}

impl TwoForest {
    pub fn new(g: &Graph, edges: EdgeSet, anchor_a: usize, anchor_b: usize) -> Result<Self> {
        for v in [anchor_a, anchor_b] {
            if v >= g.num_vertices() {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    num_vertices: g.num_vertices(),
                });
            }
        }
        let mut uf = UnionFind::new(g.num_vertices());
        for &e in edges.iter() {
            let (u, v) = g.endpoints(e)?;
            if !uf.union(u, v) {
                return Err(Error::NotTwoForest);
            }
        }
        if uf.components() != 2 || uf.same(anchor_a, anchor_b) {
            return Err(Error::NotTwoForest);
        }
        Ok(TwoForest {
            edges,
            anchor_a,
            anchor_b,
        })
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn anchors(&self) -> (usize, usize) {
        (self.anchor_a, self.anchor_b)
    }
}

/// Disjoint-set forest with union by size and an undo log.
///
/// No path compression, so `rollback` can restore any earlier state exactly.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
    history: Vec<Option<(usize, usize)>>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
            history: Vec::new(),
        }
    }

    pub fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Merges the classes of `a` and `b`; false if they were already merged.
    /// Every call pushes one undo record.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.history.push(None);
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        self.history.push(Some((ra, rb)));
        true
    }

    /// Undoes the most recent `union` call.
    pub fn rollback(&mut self) {
        if let Some(Some((ra, rb))) = self.history.pop() {
            self.parent[rb] = rb;
            self.size[ra] -= self.size[rb];
            self.components += 1;
        }
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

/// Loopless multigraph used only by the deletion-contraction counter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multigraph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl From<&Graph> for Multigraph {
    fn from(g: &Graph) -> Self {
        Multigraph {
            num_vertices: g.num_vertices(),
            edges: g.edges().to_vec(),
        }
    }
}

impl Multigraph {
    pub fn delete(&self, e: usize) -> Multigraph {
        let mut edges = self.edges.clone();
        edges.remove(e);
        Multigraph {
            num_vertices: self.num_vertices,
            edges,
        }
    }

    /// Merges the endpoints of `e` into the smaller label and renumbers densely.
    pub fn contract(&self, e: usize) -> Multigraph {
        let (a, b) = self.edges[e];
        let (keep, gone) = (a.min(b), a.max(b));
        let relabel = |w: usize| {
            let w = if w == gone { keep } else { w };
            if w > gone {
                w - 1
            } else {
                w
            }
        };
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (relabel(u), relabel(v)))
            .filter(|&(u, v)| u != v)
            .collect();
        Multigraph {
            num_vertices: self.num_vertices - 1,
            edges,
        }
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.num_vertices);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf.components() <= 1
    }

    /// Relabels vertices by first appearance and sorts the edge list, so equal
    /// keys mean identical labelled multigraphs up to that relabelling.
    pub fn normalized(&self) -> Multigraph {
        let mut label = vec![usize::MAX; self.num_vertices];
        let mut next = 0;
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                for w in [u, v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        next += 1;
                    }
                }
                (label[u].min(label[v]), label[u].max(label[v]))
            })
            .collect();
        edges.sort_unstable();
        Multigraph {
            num_vertices: self.num_vertices,
            edges,
        }
    }
}
