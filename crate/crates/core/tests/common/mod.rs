#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tcq::graph::{Edge, LabeledGraph};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn load(name: &str) -> LabeledGraph {
    tcq::parse_graph(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

/// Random strongly connected aperiodic graph with up to `max_v` vertices and
/// `max_a` symbols. Rejection-sampled, so every call returns a primitive graph.
pub fn random_primitive(rng: &mut impl Rng, max_v: usize, max_a: usize) -> LabeledGraph {
    loop {
        let n = rng.gen_range(1..=max_v);
        let a = rng.gen_range(1..=max_a);
        let mut edges = Vec::new();
        for from in 0..n {
            for _ in 0..rng.gen_range(1..=3) {
                edges.push(Edge {
                    from,
                    to: rng.gen_range(0..n),
                    label: rng.gen_range(0..a),
                });
            }
        }
        let vertices = (0..n).map(|i| format!("v{i}")).collect();
        let alphabet = (0..a).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        let g = LabeledGraph::new(vertices, alphabet, edges).unwrap();
        if g.validate().is_primitive() {
            return g;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unreduced Viterbi recursion in u64: min over final vertices of the
/// accumulated path cost. Independent of the reduction and of `encode`.
pub fn unreduced_min(g: &LabeledGraph, xs: &[usize]) -> u64 {
    let mut cost = vec![0u64; g.vertex_count()];
    for &x in xs {
        let mut next = vec![u64::MAX; g.vertex_count()];
        for e in g.edges() {
            let c = cost[e.from] + u64::from(e.label != x);
            next[e.to] = next[e.to].min(c);
        }
        cost = next;
    }
    cost.into_iter().min().unwrap()
}

/// Every length-`len` sequence over `0..a`, in lexicographic order.
pub fn all_sequences(a: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..a).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}
