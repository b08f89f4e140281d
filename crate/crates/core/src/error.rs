use thiserror::Error;

/// Errors raised by the analysis pipeline.
///
/// Every variant names the stage that produced it so that CLI diagnostics
/// can be traced back without a backtrace.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph parse: line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("graph: label `{label}` is not in the alphabet")]
    UnknownLabel { label: String },

    #[error("graph: duplicate {kind} `{id}`")]
    Duplicate { kind: &'static str, id: String },

    #[error("graph: vertex `{vertex}` has no outgoing edge")]
    NoOutEdge { vertex: String },

    #[error("graph: {0}")]
    InvalidGraph(String),

    #[error("de Bruijn: order {order} needs {expected} labels, got {actual}")]
    LabelCount {
        order: u32,
        expected: usize,
        actual: usize,
    },

    #[error("graph: not primitive (no exact path length up to the bound {bound})")]
    NotPrimitive { bound: usize },

    #[error("graph: out-degrees are not uniform (found {min} and {max})")]
    NonUniformDegree { min: usize, max: usize },

    #[error("viterbi: empty source sequence")]
    EmptyInput,

    #[error("viterbi: symbol index {0} is outside the alphabet")]
    SymbolOutOfRange(usize),

    #[error("viterbi: brute force would enumerate {paths} paths (limit {limit})")]
    InstanceTooLarge { paths: u128, limit: u128 },

    #[error("statespace: state {state:?} has a component above k = {k}")]
    ComponentBound { state: Vec<u32>, k: u32 },

    #[error("statespace: more than {cap} states")]
    StateCapExceeded { cap: usize },

    #[error("statespace: vector {0:?} is not a member of the state space")]
    NotInSpace(Vec<u32>),

    #[error("source: {0}")]
    Source(String),

    #[error("source: alphabet {source_alphabet:?} does not match graph alphabet {graph_alphabet:?}")]
    AlphabetMismatch {
        source_alphabet: Vec<String>,
        graph_alphabet: Vec<String>,
    },

    #[error("chain: singular linear system")]
    Singular,

    #[error("symmetry: {0}")]
    Permutation(String),

    #[error("symmetry: permutation #{perm} maps state {state:?} outside the state space")]
    NotInvariant { perm: usize, state: Vec<u32> },

    #[error(
        "symmetry: partition is not lumpable: fiber {fiber} members {first} and {second} differ on {target}"
    )]
    NotLumpable {
        fiber: usize,
        first: usize,
        second: usize,
        target: String,
    },

    #[error("rd: {0}")]
    RateOutOfRange(String),

    #[error("rd: Blahut iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("rd: D(G) = {dg} is below D(R) = {dr} beyond tolerance {tol}")]
    BoundViolation { dg: f64, dr: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
