//! Scaling measurement for the ladder DP: solve at `n` and `2n` and compare
//! work counters.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::families::make_kn_ladder;
use crate::instance::{Instance, ProblemKind};
use crate::ladder_dp::dp_solve;
use crate::random::{adjacent_random_costs, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub k: usize,
    pub n: usize,
    pub edges: usize,
    pub value: Option<i64>,
    pub recurrence_applications: u64,
    pub candidate_evaluations: u64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub kind: ProblemKind,
    pub seed: u64,
    pub runs: Vec<BenchRun>,
    /// `recurrence_applications` at `2n` over the value at `n`.
    pub recurrence_ratio: f64,
    pub candidate_ratio: f64,
}

/// One AQMST solve on a `(k,n)`-ladder with adjacent costs in `-5..=9`.
/// Only the DP itself is timed.
pub fn bench_run(k: usize, n: usize, seed: u64) -> Result<BenchRun> {
    let ladder = make_kn_ladder(k, n)?;
    let q = adjacent_random_costs(&ladder.graph, -5, 9, &mut rng_from_seed(seed));
    let inst = Instance::quadratic(ladder.graph.clone(), q, ProblemKind::Aqmst)?;
    let start = Instant::now();
    let sol = dp_solve(&inst, &ladder, ProblemKind::Aqmst)?;
    let solve_seconds = start.elapsed().as_secs_f64();
    Ok(BenchRun {
        k,
        n,
        edges: inst.num_edges(),
        value: sol.result.value,
        recurrence_applications: sol.stats.recurrence_applications,
        candidate_evaluations: sol.stats.candidate_evaluations,
        solve_seconds,
    })
}

pub fn bench_scaling(k: usize, n: usize, seed: u64) -> Result<BenchReport> {
    let small = bench_run(k, n, seed)?;
    let large = bench_run(k, 2 * n, seed)?;
    let ratio = |a: u64, b: u64| b as f64 / a.max(1) as f64;
    Ok(BenchReport {
        kind: ProblemKind::Aqmst,
        seed,
        recurrence_ratio: ratio(small.recurrence_applications, large.recurrence_applications),
        candidate_ratio: ratio(small.candidate_evaluations, large.candidate_evaluations),
        runs: vec![small, large],
    })
}
