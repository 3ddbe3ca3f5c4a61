//! Instances: a graph, a cost matrix whose diagonal carries the linear costs,
//! an optional conflict set and the problem kind, plus the evaluators.
//!
//! Off-diagonal entries are counted per ordered pair, so
//! `z(T) = sum_{e in T} sum_{f in T} q(e,f)` with `q(e,e) = c_e`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph};

/// Largest edge count written as dense rows in instance files.
pub const DENSE_JSON_LIMIT: usize = 512;

/// Largest edge count kept as a dense array in memory.
pub const DENSE_STORAGE_LIMIT: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Storage {
    Dense(Vec<i64>),
    /// Per row, nonzero entries sorted by column.
    Sparse(Vec<Vec<(usize, i64)>>),
}

/// Square integer matrix indexed by edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    m: usize,
    storage: Storage,
}

impl CostMatrix {
    /// All-zero matrix; dense or sparse depending on `m`.
    pub fn zeros(m: usize) -> Self {
        let storage = if m <= DENSE_STORAGE_LIMIT {
            Storage::Dense(vec![0; m * m])
        } else {
            Storage::Sparse(vec![Vec::new(); m])
        };
        CostMatrix { m, storage }
    }

    /// Sparse all-zero matrix regardless of size.
    pub fn sparse_zeros(m: usize) -> Self {
        CostMatrix {
            m,
            storage: Storage::Sparse(vec![Vec::new(); m]),
        }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let m = rows.len();
        let mut data = Vec::with_capacity(m * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        let dense = CostMatrix {
            m,
            storage: Storage::Dense(data),
        };
        if m <= DENSE_STORAGE_LIMIT {
            Ok(dense)
        } else {
            let mut sparse = CostMatrix::sparse_zeros(m);
            for (i, j, v) in dense.nonzeros() {
                sparse.set(i, j, v);
            }
            Ok(sparse)
        }
    }

    /// Builds from `(i, j, value)` triplets; later duplicates overwrite.
    pub fn from_triplets(m: usize, triplets: &[(usize, usize, i64)]) -> Result<Self> {
        let mut q = CostMatrix::zeros(m);
        for &(i, j, v) in triplets {
            if i >= m || j >= m {
                return Err(Error::EdgeOutOfRange {
                    index: i.max(j),
                    num_edges: m,
                });
            }
            q.set(i, j, v);
        }
        Ok(q)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.m + j],
            Storage::Sparse(rows) => match rows[i].binary_search_by_key(&j, |&(c, _)| c) {
                Ok(p) => rows[i][p].1,
                Err(_) => 0,
            },
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        assert!(i < self.m && j < self.m, "cost index out of range");
        match &mut self.storage {
            Storage::Dense(d) => d[i * self.m + j] = v,
            Storage::Sparse(rows) => {
                let row = &mut rows[i];
                match row.binary_search_by_key(&j, |&(c, _)| c) {
                    Ok(p) if v == 0 => {
                        row.remove(p);
                    }
                    Ok(p) => row[p].1 = v,
                    Err(_) if v == 0 => {}
                    Err(p) => row.insert(p, (j, v)),
                }
            }
        }
    }

    /// Diagonal entry `c_e`.
    pub fn linear(&self, e: usize) -> i64 {
        self.get(e, e)
    }

    /// Nonzero entries of row `i` in column order.
    pub fn row_nonzeros(&self, i: usize) -> Vec<(usize, i64)> {
        match &self.storage {
            Storage::Dense(d) => d[i * self.m..(i + 1) * self.m]
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0)
                .map(|(j, &v)| (j, v))
                .collect(),
            Storage::Sparse(rows) => rows[i].clone(),
        }
    }

    /// All nonzero entries in row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, i64)> {
        (0..self.m)
            .flat_map(|i| self.row_nonzeros(i).into_iter().map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn transpose(&self) -> CostMatrix {
        let mut t = self.blank_like();
        for (i, j, v) in self.nonzeros() {
            t.set(j, i, v);
        }
        t
    }

    /// `pi(Q)` with `pi(Q)[pi(a)][pi(b)] = Q[a][b]`, `forward[a] = pi(a)`.
    pub fn permuted(&self, forward: &[usize]) -> CostMatrix {
        assert_eq!(forward.len(), self.m);
        let mut p = self.blank_like();
        for (i, j, v) in self.nonzeros() {
            p.set(forward[i], forward[j], v);
        }
        p
    }

    pub fn max_entry(&self) -> i64 {
        let nz = self.nonzeros();
        let stored = nz.iter().map(|&(_, _, v)| v).max();
        if nz.len() < self.m * self.m {
            stored.map_or(0, |v| v.max(0))
        } else {
            stored.unwrap_or(0)
        }
    }

    /// Distinct entry values in ascending order (0 included when some entry is 0).
    pub fn distinct_values(&self) -> Vec<i64> {
        let nz = self.nonzeros();
        let mut vals: BTreeSet<i64> = nz.iter().map(|&(_, _, v)| v).collect();
        if nz.len() < self.m * self.m {
            vals.insert(0);
        }
        vals.into_iter().collect()
    }

    fn blank_like(&self) -> CostMatrix {
        match self.storage {
            Storage::Dense(_) => CostMatrix {
                m: self.m,
                storage: Storage::Dense(vec![0; self.m * self.m]),
            },
            Storage::Sparse(_) => CostMatrix::sparse_zeros(self.m),
        }
    }
}

/// Unordered conflict pairs `{e,f}`, `e != f`, stored as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConflictSet {
    pairs: BTreeSet<(usize, usize)>,
}

impl ConflictSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(m: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut s = ConflictSet::new();
        for &(e, f) in pairs {
            s.insert(m, e, f)?;
        }
        Ok(s)
    }

    /// Adds `{e,f}`; an existing pair is an error.
    pub fn insert(&mut self, m: usize, e: usize, f: usize) -> Result<()> {
        if e == f || e >= m || f >= m {
            return Err(Error::InvalidConflict(e, f));
        }
        if !self.pairs.insert((e.min(f), e.max(f))) {
            return Err(Error::InvalidConflict(e, f));
        }
        Ok(())
    }

    /// Adds `{e,f}` unless already present.
    pub fn insert_or_keep(&mut self, m: usize, e: usize, f: usize) -> Result<()> {
        if e == f || e >= m || f >= m {
            return Err(Error::InvalidConflict(e, f));
        }
        self.pairs.insert((e.min(f), e.max(f)));
        Ok(())
    }

    pub fn contains(&self, e: usize, f: usize) -> bool {
        self.pairs.contains(&(e.min(f), e.max(f)))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Conflict partners of every edge.
    pub fn partners(&self, m: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); m];
        for (e, f) in self.iter() {
            out[e].push(f);
            out[f].push(e);
        }
        out
    }

    /// True when every pair shares an endpoint in `g`.
    pub fn all_adjacent(&self, g: &Graph) -> bool {
        self.first_non_adjacent(g).is_none()
    }

    pub fn first_non_adjacent(&self, g: &Graph) -> Option<(usize, usize)> {
        self.iter()
            .find(|&(e, f)| !g.edges_adjacent(e, f).unwrap_or(false))
    }
}

/// How a problem kind scores a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Sum,
    Max,
}

/// The objective and constraint pattern behind a [`ProblemKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KindShape {
    /// `None` for pure feasibility kinds.
    pub aggregation: Option<Aggregation>,
    /// Off-diagonal entries contribute.
    pub interactions: bool,
    /// Conflict pairs must be respected.
    pub conflicts: bool,
    /// Interactions or conflicts are restricted to adjacent edge pairs.
    pub adjacent_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProblemKind {
    Qmst,
    Aqmst,
    Qbst,
    Aqbst,
    Mstc,
    Mstac,
    Bstc,
    Bstac,
    Fstc,
    Fstac,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 10] = [
        ProblemKind::Qmst,
        ProblemKind::Aqmst,
        ProblemKind::Qbst,
        ProblemKind::Aqbst,
        ProblemKind::Mstc,
        ProblemKind::Mstac,
        ProblemKind::Bstc,
        ProblemKind::Bstac,
        ProblemKind::Fstc,
        ProblemKind::Fstac,
    ];

    pub fn shape(self) -> KindShape {
        use Aggregation::*;
        use ProblemKind::*;
        let (aggregation, interactions, conflicts) = match self {
            Qmst | Aqmst => (Some(Sum), true, false),
            Qbst | Aqbst => (Some(Max), true, false),
            Mstc | Mstac => (Some(Sum), false, true),
            Bstc | Bstac => (Some(Max), false, true),
            Fstc | Fstac => (None, false, true),
        };
        let adjacent_only = matches!(self, Aqmst | Aqbst | Mstac | Bstac | Fstac);
        KindShape {
            aggregation,
            interactions,
            conflicts,
            adjacent_only,
        }
    }

    pub fn name(self) -> &'static str {
        use ProblemKind::*;
        match self {
            Qmst => "QMST",
            Aqmst => "AQMST",
            Qbst => "QBST",
            Aqbst => "AQBST",
            Mstc => "MSTC",
            Mstac => "MSTAC",
            Bstc => "BSTC",
            Bstac => "BSTAC",
            Fstc => "FSTC",
            Fstac => "FSTAC",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInstance(format!("unknown problem kind {:?}", s)))
    }
}

/// A problem instance. Construction checks dimensions and conflict indices;
/// adjacency restrictions are checked by [`Instance::check_kind`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub q: CostMatrix,
    pub conflicts: ConflictSet,
    pub kind: ProblemKind,
}

impl Instance {
    pub fn new(graph: Graph, q: CostMatrix, conflicts: ConflictSet, kind: ProblemKind) -> Result<Self> {
        let m = graph.num_edges();
        if q.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: q.dim(),
            });
        }
        if let Some((e, f)) = conflicts.iter().find(|&(_, f)| f >= m) {
            return Err(Error::InvalidConflict(e, f));
        }
        Ok(Instance {
            graph,
            q,
            conflicts,
            kind,
        })
    }

    /// Instance without conflicts.
    pub fn quadratic(graph: Graph, q: CostMatrix, kind: ProblemKind) -> Result<Self> {
        Instance::new(graph, q, ConflictSet::new(), kind)
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn with_kind(&self, kind: ProblemKind) -> Instance {
        Instance {
            kind,
            ..self.clone()
        }
    }

    /// Checks the adjacency restriction that `kind` imposes.
    pub fn check_kind(&self, kind: ProblemKind) -> Result<()> {
        let shape = kind.shape();
        if !shape.adjacent_only {
            return Ok(());
        }
        if shape.interactions {
            if let Some((i, j)) = first_non_adjacent_entry(self) {
                return Err(Error::NotAdjacentOnly(i, j));
            }
        }
        if shape.conflicts {
            if let Some((e, f)) = self.conflicts.first_non_adjacent(&self.graph) {
                return Err(Error::ConflictNotAdjacent(e, f));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from(self)).expect("instance serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInstance(e.to_string()))?;
        Instance::try_from(file)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    graph: Graph,
    #[serde(default)]
    q: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    conflicts: Vec<[usize; 2]>,
    #[serde(default = "default_kind")]
    kind: ProblemKind,
}

fn default_kind() -> ProblemKind {
    ProblemKind::Qmst
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        let m = inst.q.dim();
        let q = if m <= DENSE_JSON_LIMIT {
            inst.q.to_rows()
        } else {
            inst.q
                .nonzeros()
                .into_iter()
                .map(|(i, j, v)| vec![i as i64, j as i64, v])
                .collect()
        };
        InstanceFile {
            graph: inst.graph.clone(),
            q: Some(q),
            conflicts: inst.conflicts.iter().map(|(e, f)| [e, f]).collect(),
            kind: inst.kind,
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let m = file.graph.num_edges();
        let q = match file.q {
            None => CostMatrix::zeros(m),
            Some(rows) if m <= DENSE_JSON_LIMIT => {
                if rows.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: rows.len(),
                    });
                }
                CostMatrix::from_rows(rows)?
            }
            Some(triplets) => {
                let mut q = CostMatrix::zeros(m);
                for t in triplets {
                    match t.as_slice() {
                        &[i, j, v] if i >= 0 && j >= 0 && (i as usize) < m && (j as usize) < m => {
                            q.set(i as usize, j as usize, v)
                        }
                        _ => {
                            return Err(Error::InvalidInstance(format!(
                                "bad sparse entry {:?} for {} edges",
                                t, m
                            )))
                        }
                    }
                }
                q
            }
        };
        let pairs: Vec<(usize, usize)> = file.conflicts.iter().map(|p| (p[0], p[1])).collect();
        let conflicts = ConflictSet::from_pairs(m, &pairs)?;
        Instance::new(file.graph, q, conflicts, file.kind)
    }
}

fn membership(m: usize, t: &EdgeSet) -> Result<Vec<bool>> {
    let mut mask = vec![false; m];
    for &e in t.iter() {
        if e >= m {
            return Err(Error::EdgeOutOfRange {
                index: e,
                num_edges: m,
            });
        }
        mask[e] = true;
    }
    Ok(mask)
}

/// `z(T)`: every ordered pair of tree edges, the diagonal once per edge.
pub fn objective_sum(inst: &Instance, t: &EdgeSet) -> Result<i64> {
    let q = &inst.q;
    if q.is_dense() {
        let edges = t.as_slice();
        if let Some(&bad) = edges.iter().find(|&&e| e >= q.dim()) {
            return Err(Error::EdgeOutOfRange {
                index: bad,
                num_edges: q.dim(),
            });
        }
        return Ok(edges
            .iter()
            .map(|&e| edges.iter().map(|&f| q.get(e, f)).sum::<i64>())
            .sum());
    }
    let mask = membership(q.dim(), t)?;
    Ok(t.iter()
        .map(|&e| {
            q.row_nonzeros(e)
                .into_iter()
                .filter(|&(f, _)| mask[f])
                .map(|(_, v)| v)
                .sum::<i64>()
        })
        .sum())
}

/// Bottleneck over ordered pairs of tree edges, diagonal included.
pub fn objective_bottleneck(inst: &Instance, t: &EdgeSet) -> Result<i64> {
    objective_bottleneck_with(inst, t, true)
}

/// Bottleneck with the diagonal optionally left out. An empty pair set scores 0.
pub fn objective_bottleneck_with(inst: &Instance, t: &EdgeSet, include_diagonal: bool) -> Result<i64> {
    let q = &inst.q;
    let mask = membership(q.dim(), t)?;
    let size = t.len();
    let pairs = if include_diagonal {
        size * size
    } else {
        size * size.saturating_sub(1)
    };
    if pairs == 0 {
        return Ok(0);
    }
    let mut best: Option<i64> = None;
    let mut seen = 0usize;
    for &e in t.iter() {
        for (f, v) in q.row_nonzeros(e) {
            if mask[f] && (include_diagonal || f != e) {
                seen += 1;
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
    }
    let best = match best {
        Some(b) if seen == pairs => b,
        Some(b) => b.max(0),
        None => 0,
    };
    Ok(best)
}

/// Number of conflict pairs with both edges in `t`.
pub fn conflict_violations(inst: &Instance, t: &EdgeSet) -> Result<usize> {
    let mask = membership(inst.num_edges(), t)?;
    Ok(inst.conflicts.iter().filter(|&(e, f)| mask[e] && mask[f]).count())
}

/// Score of `t` for `kind` (feasibility kinds score 0).
pub fn objective_for_kind(inst: &Instance, kind: ProblemKind, t: &EdgeSet) -> Result<i64> {
    let shape = kind.shape();
    match (shape.aggregation, shape.interactions) {
        (None, _) => {
            membership(inst.num_edges(), t)?;
            Ok(0)
        }
        (Some(Aggregation::Sum), true) => objective_sum(inst, t),
        (Some(Aggregation::Max), true) => objective_bottleneck(inst, t),
        (Some(agg), false) => {
            membership(inst.num_edges(), t)?;
            let vals = t.iter().map(|&e| inst.q.linear(e));
            Ok(match agg {
                Aggregation::Sum => vals.sum(),
                Aggregation::Max => vals.max().unwrap_or(0),
            })
        }
    }
}

/// Value and violation count of a tree under a kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: i64,
    pub violations: usize,
}

impl Evaluation {
    pub fn feasible(&self) -> bool {
        self.violations == 0
    }
}

/// Evaluates `t` under `kind`; violations are counted only for conflict kinds.
pub fn evaluate(inst: &Instance, kind: ProblemKind, t: &EdgeSet) -> Result<Evaluation> {
    let value = objective_for_kind(inst, kind, t)?;
    let violations = if kind.shape().conflicts {
        conflict_violations(inst, t)?
    } else {
        0
    };
    Ok(Evaluation { value, violations })
}

/// 0/1 matrix with `q(e,f) = q(f,e) = 1` for each conflict pair.
pub fn conflicts_to_quadratic(graph: &Graph, s: &ConflictSet) -> CostMatrix {
    let mut q = CostMatrix::zeros(graph.num_edges());
    for (e, f) in s.iter() {
        q.set(e, f, 1);
        q.set(f, e, 1);
    }
    q
}

/// True iff every nonzero off-diagonal entry sits on an adjacent edge pair.
pub fn validate_adjacent_only(inst: &Instance) -> bool {
    first_non_adjacent_entry(inst).is_none()
}

fn first_non_adjacent_entry(inst: &Instance) -> Option<(usize, usize)> {
    inst.q
        .nonzeros()
        .into_iter()
        .find(|&(i, j, _)| i != j && !inst.graph.edges_adjacent(i, j).unwrap_or(false))
        .map(|(i, j, _)| (i, j))
}
