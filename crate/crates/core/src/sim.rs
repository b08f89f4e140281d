//! Monte Carlo estimate of `D(G)` from the reduced Viterbi recursion.
//!
//! Symbol `i` of the source stream is drawn from the 64-bit word at stream
//! position `i` of a ChaCha8 generator keyed by the seed, so any index range
//! can be regenerated independently of the others.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{LabeledGraph, Symbol};
use crate::source::SourceModel;
use crate::viterbi::transition_into;

/// Number of batches used for the batch-means standard error.
pub const BATCHES: u64 = 100;

/// Per-symbol sampling bias bound from the 2^64 quantization.
pub const SAMPLING_BIAS_BOUND: f64 = 1.0 / 18_446_744_073_709_551_616.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// One chain over the whole stream.
    Sequential,
    /// Every batch restarts from the zero vector; batches are spread over
    /// `workers` threads. Results do not depend on the worker count.
    Parallel { workers: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub n: u64,
    pub increments: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
    pub batches: u64,
    pub mode: SimMode,
    pub sampling_bias_bound: f64,
}

impl SimResult {
    pub fn z_score(&self, exact: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.estimate == exact {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - exact) / self.stderr
        }
    }
}

/// Inverse-CDF sampler over `2^64` with largest-remainder rounding.
#[derive(Debug, Clone)]
pub struct Sampler {
    /// Cumulative thresholds; the last equals `2^64`.
    cumulative: Vec<u128>,
}

impl Sampler {
    pub fn new(probs: &[BigRational]) -> Self {
        let scale = BigInt::from(1u128 << 64);
        let mut counts = Vec::with_capacity(probs.len());
        let mut remainders = Vec::with_capacity(probs.len());
        for p in probs {
            let scaled = p.numer() * &scale;
            let (q, r) = scaled.div_rem(p.denom());
            counts.push(q.to_u128().expect("probability at most 1"));
            remainders.push(BigRational::new(r, p.denom().clone()));
        }
        let total: u128 = counts.iter().sum();
        let deficit = (1u128 << 64) - total;
        let mut order: Vec<usize> = (0..probs.len()).collect();
        order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
        for &i in order.iter().take(deficit as usize) {
            counts[i] += 1;
        }
        let mut acc = 0u128;
        let cumulative = counts
            .iter()
            .map(|c| {
                acc += c;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn sample(&self, word: u64) -> Symbol {
        let w = u128::from(word);
        self.cumulative.partition_point(|&c| c <= w)
    }
}

fn stream_at(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(u128::from(index) * 2);
    rng
}

/// Source symbols `start..start + len` of the stream keyed by `seed`.
pub fn sample_symbols(src: &SourceModel, alphabet: &[String], seed: u64, start: u64, len: usize) -> Result<Vec<Symbol>> {
    let sampler = Sampler::new(&src.aligned(alphabet)?);
    let mut rng = stream_at(seed, start);
    Ok((0..len).map(|_| sampler.sample(rng.next_u64())).collect())
}

/// Advances `state` through stream indices `start..end`; returns the summed increments.
fn run_range(
    g: &LabeledGraph,
    sampler: &Sampler,
    seed: u64,
    state: &mut Vec<u32>,
    start: u64,
    end: u64,
) -> u64 {
    let mut rng = stream_at(seed, start);
    let mut next = vec![0u32; state.len()];
    let mut count = 0u64;
    for _ in start..end {
        let x = sampler.sample(rng.next_u64());
        transition_into(g, state, x, &mut next);
        let m = next.iter().copied().min().unwrap_or(0);
        if m != 0 {
            for c in &mut next {
                *c -= m;
            }
            count += u64::from(m);
        }
        std::mem::swap(state, &mut next);
    }
    count
}

pub fn simulate(
    g: &LabeledGraph,
    src: &SourceModel,
    n: u64,
    seed: u64,
    mode: SimMode,
) -> Result<SimResult> {
    assert!(n >= 1, "simulate needs at least one sample");
    let sampler = Sampler::new(&src.aligned(g.alphabet())?);
    let batches = BATCHES.min(n);
    let bounds: Vec<u64> = (0..=batches).map(|j| n * j / batches).collect();
    let zero = vec![0u32; g.vertex_count()];

    let per_batch: Vec<u64> = match mode {
        SimMode::Sequential => {
            let mut state = zero;
            bounds
                .windows(2)
                .map(|w| run_range(g, &sampler, seed, &mut state, w[0], w[1]))
                .collect()
        }
        SimMode::Parallel { workers } => {
            let workers = workers.max(1).min(batches as usize);
            let mut out = vec![0u64; batches as usize];
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        let bounds = &bounds;
                        let sampler = &sampler;
                        let zero = &zero;
                        scope.spawn(move || {
                            (w..batches as usize)
                                .step_by(workers)
                                .map(|b| {
                                    let mut state = zero.clone();
                                    (b, run_range(g, sampler, seed, &mut state, bounds[b], bounds[b + 1]))
                                })
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                for h in handles {
                    for (b, c) in h.join().expect("simulation worker panicked") {
                        out[b] = c;
                    }
                }
            });
            out
        }
    };

    let increments: u64 = per_batch.iter().sum();
    let estimate = increments as f64 / n as f64;
    let means: Vec<f64> = per_batch
        .iter()
        .zip(bounds.windows(2))
        .map(|(&c, w)| c as f64 / (w[1] - w[0]) as f64)
        .collect();
    let stderr = if batches < 2 {
        0.0
    } else {
        let b = batches as f64;
        let mean = means.iter().sum::<f64>() / b;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0);
        (var / b).sqrt()
    };
    Ok(SimResult {
        n,
        increments,
        estimate,
        stderr,
        seed,
        batches,
        mode,
        sampling_bias_bound: SAMPLING_BIAS_BOUND,
    })
}
