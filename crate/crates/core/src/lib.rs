//! Quadratic minimum spanning tree toolkit: graph families, spanning-tree
//! counting, exact oracles, the ladder dynamic program, graded-matrix solvers,
//! base systems and 3-SAT instance generators.

pub mod bench;
pub mod enumerate;
pub mod error;
pub mod families;
pub mod graded;
pub mod graph;
pub mod instance;
pub mod ladder_dp;
pub mod matroid;
pub mod random;
pub mod reductions;
pub mod tree_count;

pub use enumerate::{solve_exact, SolveResult, SolveStatus};
pub use error::{Error, Result};
pub use graph::{EdgeSet, Graph, Multigraph, SpanningTree, TwoForest, UnionFind};
pub use instance::{CostMatrix, ConflictSet, Instance, ProblemKind};
