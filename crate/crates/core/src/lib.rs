//! Exact asymptotic Hamming distortion of trellis coded quantizers.
//!
//! A labelled graph `G` defines a quantizer: a source sequence is encoded as
//! the label sequence of the path through `G` closest to it in Hamming
//! distance, found by the Viterbi algorithm. The per-sample distortion
//! converges to a constant `D(G)`, which this crate computes exactly:
//!
//! 1. [`statespace`] enumerates the finite set of reduced Viterbi cost
//!    vectors reachable from the zero vector.
//! 2. [`chain`] builds the Markov chain those vectors follow under an i.i.d.
//!    source and solves for its stationary law in rational arithmetic.
//! 3. `D(G)` is the stationary probability that the next symbol raises the
//!    minimum path cost.
//!
//! [`symmetry`] lumps the chain by a vertex permutation group, [`sim`]
//! estimates `D(G)` by simulation, and [`rd`] computes the distortion-rate
//! bound `D(R)` for comparison.

pub mod chain;
pub mod cli;
mod error;
pub mod graph;
mod linalg;
pub mod rd;
mod scc;
pub mod sim;
pub mod source;
pub mod statespace;
pub mod symmetry;
pub mod viterbi;

pub use chain::{analyze, AnalysisReport};
pub use error::{Error, Result};
pub use graph::{de_bruijn, example_debruijn8, parse_graph, LabeledGraph};
pub use linalg::solve as solve_rational;
pub use source::SourceModel;
pub use statespace::StateSpace;
