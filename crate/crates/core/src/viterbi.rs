//! Hamming-distortion Viterbi recursion over a labelled graph.
//!
//! `transition` is the unreduced operator: the vector of best path costs into
//! each vertex after one more source symbol. `reduced_transition` subtracts
//! the minimum component, which keeps vectors bounded and exposes the
//! per-step distortion increment.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, Symbol};

/// One cost per vertex, in graph vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateVector(pub Vec<u32>);

impl StateVector {
    pub fn zero(len: usize) -> Self {
        StateVector(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_component(&self) -> u32 {
        self.0.iter().copied().min().unwrap_or(0)
    }

    pub fn max_component(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn is_reduced(&self) -> bool {
        self.min_component() == 0
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// Subtracts the minimum component in place and returns it.
    pub fn reduce(&mut self) -> u32 {
        let m = self.min_component();
        for c in &mut self.0 {
            *c -= m;
        }
        m
    }
}

impl fmt::Display for StateVector {
    /// Space-separated components.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub next_reduced: StateVector,
    /// Minimum component of the unreduced successor; 0 or 1 for reduced input.
    pub increment: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingResult {
    /// Edge indices of the chosen path.
    pub path: Vec<usize>,
    pub labels: Vec<Symbol>,
    pub total_distortion: u64,
}

#[inline]
pub fn hamming(a1: Symbol, a2: Symbol) -> u32 {
    u32::from(a1 != a2)
}

pub fn transition(g: &LabeledGraph, s: &StateVector, x: Symbol) -> StateVector {
    let mut out = StateVector(vec![0; g.vertex_count()]);
    transition_into(g, &s.0, x, &mut out.0);
    out
}

/// Allocation-free form of [`transition`] used by the hot loops.
pub(crate) fn transition_into(g: &LabeledGraph, s: &[u32], x: Symbol, out: &mut [u32]) {
    let edges = g.edges();
    for (v, slot) in out.iter_mut().enumerate() {
        *slot = g
            .incoming(v)
            .iter()
            .map(|&e| s[edges[e].from] + hamming(x, edges[e].label))
            .min()
            .unwrap_or(u32::MAX);
    }
}

pub fn reduced_transition(g: &LabeledGraph, s: &StateVector, x: Symbol) -> StepResult {
    let mut next = transition(g, s, x);
    let increment = next.reduce();
    StepResult {
        next_reduced: next,
        increment,
    }
}

/// Minimum-distortion path for `xs` with a free start vertex.
///
/// Ties are broken by the lowest edge index at every stage and by the lowest
/// vertex index at the final stage.
#[allow(clippy::needless_range_loop)]
pub fn encode(g: &LabeledGraph, xs: &[Symbol]) -> Result<EncodingResult> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_symbols(g, xs)?;
    let n = g.vertex_count();
    let edges = g.edges();
    let mut cost = vec![0u64; n];
    let mut next = vec![0u64; n];
    // best incoming edge per (stage, vertex)
    let mut back: Vec<u32> = Vec::with_capacity(xs.len() * n);
    for &x in xs {
        for v in 0..n {
            let mut best = u64::MAX;
            let mut arg = 0usize;
            for &e in g.incoming(v) {
                let c = cost[edges[e].from] + u64::from(hamming(x, edges[e].label));
                if c < best {
                    best = c;
                    arg = e;
                }
            }
            next[v] = best;
            back.push(arg as u32);
        }
        std::mem::swap(&mut cost, &mut next);
    }
    let (mut v, &total) = cost
        .iter()
        .enumerate()
        .min_by_key(|&(i, c)| (*c, i))
        .expect("graph has vertices");
    let mut path = vec![0usize; xs.len()];
    for stage in (0..xs.len()).rev() {
        let e = back[stage * n + v] as usize;
        path[stage] = e;
        v = edges[e].from;
    }
    let labels = path.iter().map(|&e| edges[e].label).collect();
    Ok(EncodingResult {
        path,
        labels,
        total_distortion: total,
    })
}

/// Path enumeration cap for [`brute_force_min`].
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// Exhaustive minimum of the Hamming distortion over every length-`n` path.
pub fn brute_force_min(g: &LabeledGraph, xs: &[Symbol]) -> Result<u64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_symbols(g, xs)?;
    // paths of length i ending at each vertex
    let mut counts = vec![1u128; g.vertex_count()];
    for _ in xs {
        let mut next = vec![0u128; g.vertex_count()];
        for e in g.edges() {
            next[e.to] = next[e.to].saturating_add(counts[e.from]);
        }
        counts = next;
    }
    let paths = counts.iter().fold(0u128, |a, &c| a.saturating_add(c));
    if paths > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            paths,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    fn walk(g: &LabeledGraph, xs: &[Symbol], v: usize, acc: u64, best: &mut u64) {
        let Some((&x, rest)) = xs.split_first() else {
            *best = (*best).min(acc);
            return;
        };
        for &e in g.outgoing(v) {
            let edge = g.edges()[e];
            walk(g, rest, edge.to, acc + u64::from(hamming(x, edge.label)), best);
        }
    }

    let mut best = u64::MAX;
    for start in 0..g.vertex_count() {
        walk(g, xs, start, 0, &mut best);
    }
    Ok(best)
}

/// Runs the reduced recursion from the zero vector and returns the summed increments.
pub fn increment_count(g: &LabeledGraph, xs: &[Symbol]) -> Result<u64> {
    check_symbols(g, xs)?;
    let mut s = vec![0u32; g.vertex_count()];
    let mut t = vec![0u32; g.vertex_count()];
    let mut total = 0u64;
    for &x in xs {
        transition_into(g, &s, x, &mut t);
        let m = t.iter().copied().min().unwrap_or(0);
        for c in &mut t {
            *c -= m;
        }
        total += u64::from(m);
        std::mem::swap(&mut s, &mut t);
    }
    Ok(total)
}

fn check_symbols(g: &LabeledGraph, xs: &[Symbol]) -> Result<()> {
    match xs.iter().find(|&&x| x >= g.alphabet().len()) {
        Some(&x) => Err(Error::SymbolOutOfRange(x)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{example_debruijn8, parse_graph};

    fn g3() -> LabeledGraph {
        parse_graph(include_str!("../data/g3.g")).unwrap()
    }

    const A: Symbol = 0;
    const B: Symbol = 1;

    #[test]
    fn hamming_values() {
        assert_eq!(hamming(0, 0), 0);
        assert_eq!(hamming(0, 1), 1);
        assert_eq!(hamming(3, 3), 0);
    }

    #[test]
    fn transitions_on_g3() {
        let g = g3();
        assert_eq!(transition(&g, &StateVector(vec![0, 0]), B), StateVector(vec![1, 0]));
        assert_eq!(transition(&g, &StateVector(vec![1, 0]), B), StateVector(vec![1, 1]));

        let step = reduced_transition(&g, &StateVector(vec![1, 0]), B);
        assert_eq!(step.next_reduced, StateVector(vec![0, 0]));
        assert_eq!(step.increment, 1);

        let step = reduced_transition(&g, &StateVector(vec![0, 0]), A);
        assert_eq!(step.next_reduced, StateVector(vec![0, 0]));
        assert_eq!(step.increment, 0);
    }

    #[test]
    fn zero_vector_fixed_when_symbol_enters_every_vertex() {
        let g = example_debruijn8();
        for x in 0..4 {
            let covered = (0..8).all(|v| g.incoming(v).iter().any(|&e| g.edges()[e].label == x));
            let t = transition(&g, &StateVector::zero(8), x);
            assert_eq!(covered, t.is_zero());
        }
        let perfect = parse_graph(include_str!("../data/perfect.g")).unwrap();
        for x in 0..4 {
            let step = reduced_transition(&perfect, &StateVector::zero(1), x);
            assert_eq!(step, StepResult { next_reduced: StateVector::zero(1), increment: 0 });
        }
    }

    #[test]
    fn encode_examples() {
        let g = example_debruijn8();
        for x in 0..4 {
            assert_eq!(encode(&g, &[x]).unwrap().total_distortion, 0);
        }
        let g = g3();
        assert_eq!(encode(&g, &[B, B]).unwrap().total_distortion, 1);
        assert_eq!(encode(&g, &[A, A, A]).unwrap().total_distortion, 0);
        assert_eq!(encode(&g, &[]).unwrap_err(), Error::EmptyInput);
        assert_eq!(encode(&g, &[5]).unwrap_err(), Error::SymbolOutOfRange(5));
    }

    #[test]
    fn encode_tie_breaking() {
        // two parallel self-loops both labelled a: the lower edge index wins
        let g = parse_graph("alphabet a b\nedge v v a\nedge v v a\nedge v v b\n").unwrap();
        let r = encode(&g, &[A, A]).unwrap();
        assert_eq!(r.path, vec![0, 0]);
        let r = encode(&g, &[B, A]).unwrap();
        assert_eq!(r.path, vec![2, 0]);
        // final-vertex tie goes to the lowest vertex index
        let g = parse_graph("alphabet a\nedge u v a\nedge v u a\nedge u u a\nedge v v a\n").unwrap();
        let r = encode(&g, &[A]).unwrap();
        assert_eq!(g.edges()[*r.path.last().unwrap()].to, 0);
    }

    #[test]
    fn brute_force_examples() {
        let g = g3();
        assert_eq!(brute_force_min(&g, &[B, B]).unwrap(), 1);
        assert_eq!(brute_force_min(&g, &[B, A, B]).unwrap(), 0);
        let g = example_debruijn8();
        // a label sequence read off a path: 000 -> 001 -> 011 -> 111 -> 111
        let path = [1usize, 3, 7, 15];
        let xs: Vec<Symbol> = path.iter().map(|&e| g.edges()[e].label).collect();
        assert_eq!(brute_force_min(&g, &xs).unwrap(), 0);
        assert!(matches!(
            brute_force_min(&g, &vec![0; 30]),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn increments_match_encoder_on_g3() {
        let g = g3();
        let xs = [B, B, A, B, B, B, A];
        let enc = encode(&g, &xs).unwrap();
        assert_eq!(increment_count(&g, &xs).unwrap(), enc.total_distortion);
        assert_eq!(brute_force_min(&g, &xs).unwrap(), enc.total_distortion);
    }
}
