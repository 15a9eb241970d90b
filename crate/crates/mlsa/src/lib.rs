//! Solver toolkit for the Maximum Leaf Spanning Arborescence problem (MLSA)
//! on rooted DAGs.
//!
//! The pipeline reduces an MLSA instance to a hereditary set packing problem
//! over the out-neighborhoods of the graph, peels off sets of size above 3
//! greedily, runs a local search on the 3-bounded remainder, and lifts the
//! packed sets back to a spanning arborescence. Exact branch-and-bound
//! oracles and worst-case instance generators are included for validation
//! and benchmarking.

pub mod cli;
pub mod digraph;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod generators;
pub mod local_search;
pub mod oracles;
pub mod packing;
pub mod reduction;

pub use digraph::{Arborescence, Digraph};
pub use packing::{ElemSet, Packing, SetFamily};
