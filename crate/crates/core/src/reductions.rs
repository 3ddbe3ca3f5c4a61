//! 3-SAT to conflict-constrained spanning tree instances: FSTAC on fan-stars
//! and FSTC on ladders. Also assignment decoding, a truth-table oracle and
//! DIMACS CNF input.
//!
//! Ladder layout: `L_{2n+1}` with top rail `v_0..v_{2n}` and bottom rail
//! `u_0..u_{2n}`. Clause `i` owns the degree-3 vertex `u_{2i+1}`; its literal
//! edges are `(u_{2i}, u_{2i+1})`, the rung `(v_{2i+1}, u_{2i+1})` and
//! `(u_{2i+1}, u_{2i+2})`. The top rail and the even rungs are filler and
//! already span every other vertex, so a spanning tree must take at least
//! one literal edge per clause.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::enumerate::{solve_conflicts, solve_exact, SolveResult};
use crate::error::{Error, Result};
use crate::families::{ladder_graph, make_fan_star};
use crate::graph::{EdgeSet, Graph};
use crate::instance::{conflict_violations, ConflictSet, CostMatrix, Instance, ProblemKind};

/// Largest variable count accepted by [`sat_brute_force`].
pub const SAT_BRUTE_FORCE_MAX_VARS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    pub fn is_complement(self, other: Literal) -> bool {
        self.var == other.var && self.positive != other.positive
    }

    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }

    /// DIMACS form: `var + 1`, negated for negative literals.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeSatInstance {
    pub num_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl ThreeSatInstance {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        let sat = ThreeSatInstance { num_vars, clauses };
        sat.validate()?;
        Ok(sat)
    }

    pub fn validate(&self) -> Result<()> {
        for (c, clause) in self.clauses.iter().enumerate() {
            if let Some(l) = clause.iter().find(|l| l.var >= self.num_vars) {
                return Err(Error::MalformedFormula(format!(
                    "clause {} uses variable {} but there are {} variables",
                    c, l.var, self.num_vars
                )));
            }
        }
        Ok(())
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.num_vars && self.clauses.iter().all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// Every pair of clause positions holding complementary literals, in
    /// position order. Pairs inside one clause are included.
    pub fn complementary_positions(&self) -> Vec<((usize, usize), (usize, usize))> {
        let pos: Vec<(usize, usize)> = (0..self.clauses.len())
            .flat_map(|c| (0..3).map(move |j| (c, j)))
            .collect();
        let lit = |(c, j): (usize, usize)| self.clauses[c][j];
        let mut out = Vec::new();
        for (a, &p) in pos.iter().enumerate() {
            for &r in &pos[a + 1..] {
                if lit(p).is_complement(lit(r)) {
                    out.push((p, r));
                }
            }
        }
        out
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            let _ = writeln!(s, "{} {} {} 0", c[0].to_dimacs(), c[1].to_dimacs(), c[2].to_dimacs());
        }
        s
    }

    /// Parses DIMACS CNF. Clauses may span lines; each must have exactly
    /// three literals. `c` lines are comments and a `%` line ends the input.
    pub fn from_dimacs(text: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<Literal> = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if header.is_some() {
                    return Err(perr(line_no, "second problem line".into()));
                }
                if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                    return Err(perr(line_no, "expected `p cnf <vars> <clauses>`".into()));
                }
                let num = |s: &str| s.parse::<usize>().map_err(|e| perr(line_no, format!("bad count {:?}: {}", s, e)));
                header = Some((num(parts[2])?, num(parts[3])?));
                continue;
            }
            let (num_vars, _) = header.ok_or_else(|| perr(line_no, "clause before problem line".into()))?;
            for tok in line.split_whitespace() {
                let v: i64 = tok
                    .parse()
                    .map_err(|e| perr(line_no, format!("bad literal {:?}: {}", tok, e)))?;
                if v == 0 {
                    if current.len() != 3 {
                        return Err(perr(line_no, format!("clause has {} literals, expected 3", current.len())));
                    }
                    clauses.push([current[0], current[1], current[2]]);
                    current.clear();
                    continue;
                }
                let var = v.unsigned_abs() as usize - 1;
                if var >= num_vars {
                    return Err(perr(line_no, format!("variable {} exceeds declared {}", v.abs(), num_vars)));
                }
                current.push(Literal { var, positive: v > 0 });
            }
        }
        let (num_vars, num_clauses) = header.ok_or_else(|| perr(last_line, "missing problem line".into()))?;
        if !current.is_empty() {
            return Err(perr(last_line, "unterminated clause".into()));
        }
        if clauses.len() != num_clauses {
            return Err(perr(
                last_line,
                format!("declared {} clauses, found {}", num_clauses, clauses.len()),
            ));
        }
        ThreeSatInstance::new(num_vars, clauses)
    }
}

/// Instance plus the edge holding each clause position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutput {
    pub sat: ThreeSatInstance,
    pub instance: Instance,
    /// `literal_edge_map[i][j]` is the edge of literal `j` in clause `i`.
    pub literal_edge_map: Vec<[usize; 3]>,
}

/// Sidecar written next to the instance JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionSidecar {
    pub construction: String,
    pub sat: ThreeSatInstance,
    pub literal_edge_map: Vec<[usize; 3]>,
}

impl ReductionOutput {
    pub fn sidecar(&self, construction: &str) -> ReductionSidecar {
        ReductionSidecar {
            construction: construction.to_string(),
            sat: self.sat.clone(),
            literal_edge_map: self.literal_edge_map.clone(),
        }
    }

    pub fn from_sidecar(instance: Instance, sidecar: ReductionSidecar) -> Result<Self> {
        sidecar.sat.validate()?;
        let m = instance.num_edges();
        if sidecar.literal_edge_map.len() != sidecar.sat.clauses.len()
            || sidecar.literal_edge_map.iter().flatten().any(|&e| e >= m)
        {
            return Err(Error::InvalidInstance("literal edge map does not fit the instance".into()));
        }
        Ok(ReductionOutput {
            sat: sidecar.sat,
            instance,
            literal_edge_map: sidecar.literal_edge_map,
        })
    }
}

fn build(sat: &ThreeSatInstance, graph: Graph, map: Vec<[usize; 3]>, kind: ProblemKind) -> Result<ReductionOutput> {
    let m = graph.num_edges();
    let mut conflicts = ConflictSet::new();
    for ((c1, j1), (c2, j2)) in sat.complementary_positions() {
        conflicts.insert(m, map[c1][j1], map[c2][j2])?;
    }
    let instance = Instance::new(graph, CostMatrix::zeros(m), conflicts, kind)?;
    Ok(ReductionOutput {
        sat: sat.clone(),
        instance,
        literal_edge_map: map,
    })
}

fn check_nonempty(sat: &ThreeSatInstance) -> Result<()> {
    sat.validate()?;
    if sat.clauses.is_empty() {
        return Err(Error::MalformedFormula("formula has no clauses".into()));
    }
    Ok(())
}

/// Fan-star `FS_{3n}` for `n` clauses. Clause `i` owns path vertices
/// `3i..3i+2`; its literal edges are the spokes to those vertices.
pub fn reduce_to_fanstar(sat: &ThreeSatInstance) -> Result<ReductionOutput> {
    check_nonempty(sat)?;
    let n = sat.clauses.len();
    let graph = make_fan_star(3 * n)?;
    let hub = 3 * n;
    let map = (0..n)
        .map(|c| {
            let spoke = |j: usize| graph.find_edge(hub, 3 * c + j).expect("spoke");
            [spoke(0), spoke(1), spoke(2)]
        })
        .collect();
    build(sat, graph, map, ProblemKind::Fstac)
}

/// Ladder `L_{2n+1}` for `n` clauses; see the module docs for the layout.
pub fn reduce_to_ladder(sat: &ThreeSatInstance) -> Result<ReductionOutput> {
    check_nonempty(sat)?;
    let n = sat.clauses.len();
    let len = 2 * n + 1;
    let graph = ladder_graph(len)?;
    let v = |i: usize| i;
    let u = |i: usize| len + i;
    let map = (0..n)
        .map(|c| {
            let mid = 2 * c + 1;
            let e = |a: usize, b: usize| graph.find_edge(a, b).expect("ladder edge");
            [e(u(mid - 1), u(mid)), e(v(mid), u(mid)), e(u(mid), u(mid + 1))]
        })
        .collect();
    build(sat, graph, map, ProblemKind::Fstc)
}

/// Variable `x` is true iff some positive occurrence of `x` has its edge in
/// `t`. The tree must be spanning and conflict-free.
pub fn decode_assignment(out: &ReductionOutput, t: &EdgeSet) -> Result<Vec<bool>> {
    if !out.instance.graph.is_spanning_tree(t) {
        return Err(Error::NotSpanningTree);
    }
    let violations = conflict_violations(&out.instance, t)?;
    if violations > 0 {
        return Err(Error::InfeasibleTree(violations));
    }
    let mut assignment = vec![false; out.sat.num_vars];
    for (clause, edges) in out.sat.clauses.iter().zip(&out.literal_edge_map) {
        for (l, &e) in clause.iter().zip(edges) {
            if l.positive && t.contains(e) {
                assignment[l.var] = true;
            }
        }
    }
    Ok(assignment)
}

/// Exact feasibility: enumeration within its guard, conflict branching
/// beyond it.
pub fn solve_reduction(out: &ReductionOutput) -> Result<SolveResult> {
    let kind = out.instance.kind;
    match solve_exact(&out.instance, kind) {
        Err(Error::GuardExceeded { .. }) => solve_conflicts(&out.instance, kind),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatVerdict {
    pub satisfiable: bool,
    /// First model in counting order, variable 0 as the low bit.
    pub model: Option<Vec<bool>>,
}

pub fn sat_brute_force(sat: &ThreeSatInstance) -> Result<SatVerdict> {
    sat.validate()?;
    if sat.num_vars > SAT_BRUTE_FORCE_MAX_VARS {
        return Err(Error::SizeGuard(format!(
            "{} variables > {} for truth-table search",
            sat.num_vars, SAT_BRUTE_FORCE_MAX_VARS
        )));
    }
    // Each clause as (mask of its variables, required bits) per literal.
    let clauses: Vec<[(u32, u32); 3]> = sat
        .clauses
        .iter()
        .map(|c| c.map(|l| (1u32 << l.var, if l.positive { 1u32 << l.var } else { 0 })))
        .collect();
    for bits in 0u32..(1u32 << sat.num_vars) {
        if clauses
            .iter()
            .all(|c| c.iter().any(|&(mask, want)| bits & mask == want))
        {
            let model = (0..sat.num_vars).map(|v| bits >> v & 1 == 1).collect();
            return Ok(SatVerdict {
                satisfiable: true,
                model: Some(model),
            });
        }
    }
    Ok(SatVerdict {
        satisfiable: false,
        model: None,
    })
}

/// Clauses of three independently drawn literals (repeats allowed).
pub fn random_formula<R: Rng>(num_vars: usize, num_clauses: usize, rng: &mut R) -> Result<ThreeSatInstance> {
    if num_vars == 0 {
        return Err(Error::InvalidParameters("formula needs a variable".into()));
    }
    let mut lit = || Literal {
        var: rng.gen_range(0..num_vars),
        positive: rng.gen_bool(0.5),
    };
    let clauses = (0..num_clauses).map(|_| [lit(), lit(), lit()]).collect();
    ThreeSatInstance::new(num_vars, clauses)
}
