//! Distortion-rate baseline for a memoryless source under Hamming distortion.
//!
//! Floating point throughout: `D(R)` comes from an iterative algorithm and is
//! only used as a lower reference for the exact `D(G)`.

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, Rate};
use crate::source::SourceModel;

/// Inner iteration cap for one Blahut run.
pub const MAX_ITERATIONS: usize = 200_000;
const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    /// Bits per sample.
    pub rate: f64,
    pub distortion: f64,
    /// Bound on both the Blahut convergence gap and the rate mismatch.
    pub tolerance: f64,
    /// Lagrangian slope `s <= 0` at which the point was found.
    pub slope: f64,
}

/// Coding rate and the bit count `B_n = n R + ceil(log2 |V|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateReport {
    pub rate: Rate,
    pub header_bits: u32,
}

impl RateReport {
    pub fn for_graph(g: &LabeledGraph) -> Result<Self> {
        let n = g.vertex_count();
        Ok(Self {
            rate: g.rate()?,
            header_bits: usize::BITS - (n - 1).leading_zeros(),
        })
    }

    /// `B_n` for integer rates.
    pub fn bits(&self, n: u64) -> Option<u64> {
        self.rate
            .bits
            .map(|r| n * u64::from(r) + u64::from(self.header_bits))
    }

    pub fn formula(&self) -> String {
        format!("B_n = n*{} + {}", self.rate, self.header_bits)
    }
}

fn hamming_kernel(beta: f64, same: bool) -> f64 {
    if same {
        1.0
    } else {
        (-beta).exp()
    }
}

/// One Blahut run at fixed slope `-beta`; returns (rate bits, distortion).
#[allow(clippy::needless_range_loop)]
fn blahut_at_slope(p: &[f64], beta: f64, tol: f64) -> Result<(f64, f64)> {
    let m = p.len();
    let mut q = vec![1.0 / m as f64; m];
    let mut z = vec![0.0; m];
    let mut c = vec![0.0; m];
    for _ in 0..MAX_ITERATIONS {
        for x in 0..m {
            z[x] = (0..m).map(|y| q[y] * hamming_kernel(beta, x == y)).sum();
        }
        for y in 0..m {
            c[y] = (0..m)
                .filter(|&x| p[x] > 0.0)
                .map(|x| p[x] * hamming_kernel(beta, x == y) / z[x])
                .sum();
        }
        let max_log_c = c.iter().copied().fold(f64::MIN, f64::max).ln();
        let avg_log_c: f64 = (0..m)
            .filter(|&y| q[y] > 0.0 && c[y] > 0.0)
            .map(|y| q[y] * c[y] * c[y].ln())
            .sum();
        for y in 0..m {
            q[y] *= c[y];
        }
        let norm: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= norm);
        if (max_log_c - avg_log_c) / std::f64::consts::LN_2 < tol {
            return Ok(evaluate(p, &q, beta));
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
    })
}

/// Rate (bits) and distortion of the test channel induced by output law `q`.
fn evaluate(p: &[f64], q: &[f64], beta: f64) -> (f64, f64) {
    let m = p.len();
    let mut rate = 0.0;
    let mut dist = 0.0;
    let mut out = vec![0.0; m];
    let mut channel = vec![vec![0.0; m]; m];
    for x in 0..m {
        let z: f64 = (0..m).map(|y| q[y] * hamming_kernel(beta, x == y)).sum();
        for y in 0..m {
            channel[x][y] = q[y] * hamming_kernel(beta, x == y) / z;
            out[y] += p[x] * channel[x][y];
        }
    }
    for x in 0..m {
        for y in 0..m {
            let w = p[x] * channel[x][y];
            if w > 0.0 {
                rate += w * (channel[x][y] / out[y]).log2();
                if x != y {
                    dist += w;
                }
            }
        }
    }
    (rate.max(0.0), dist)
}

/// `D(R)` at a target rate, by bisection on the Blahut slope.
pub fn blahut(src: &SourceModel, target_rate: f64, tol: f64) -> Result<RdPoint> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::RateOutOfRange(format!("tolerance {tol} must be positive")));
    }
    let p = src.to_f64();
    let entropy = src.entropy_bits();
    if !(0.0..=entropy + 1e-12).contains(&target_rate) {
        return Err(Error::RateOutOfRange(format!(
            "target rate {target_rate} outside [0, H = {entropy}]"
        )));
    }
    let point = |rate, distortion, slope| RdPoint {
        rate,
        distortion,
        tolerance: tol,
        slope,
    };
    if target_rate == 0.0 {
        let pmax = p.iter().copied().fold(0.0, f64::max);
        return Ok(point(0.0, 1.0 - pmax, 0.0));
    }
    if target_rate >= entropy - 1e-12 {
        return Ok(point(entropy, 0.0, f64::NEG_INFINITY));
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_point = blahut_at_slope(&p, hi, tol)?;
    while hi_point.0 < target_rate {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Ok(point(hi_point.0, hi_point.1, -lo));
        }
        hi_point = blahut_at_slope(&p, hi, tol)?;
    }
    let mut best = (hi, hi_point);
    for _ in 0..MAX_BISECTIONS {
        if (best.1 .0 - target_rate).abs() <= tol || hi - lo <= f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let r = blahut_at_slope(&p, mid, tol)?;
        if r.0 < target_rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if (r.0 - target_rate).abs() < (best.1 .0 - target_rate).abs() {
            best = (mid, r);
        }
    }
    let (beta, (rate, distortion)) = best;
    Ok(point(rate, distortion, -beta))
}

/// `D(R)` clamped to 0 at or above the source entropy.
pub fn distortion_rate(src: &SourceModel, rate: f64, tol: f64) -> Result<RdPoint> {
    blahut(src, rate.min(src.entropy_bits()), tol)
}

fn binary_entropy(d: f64) -> f64 {
    if d <= 0.0 || d >= 1.0 {
        0.0
    } else {
        -d * d.log2() - (1.0 - d) * (1.0 - d).log2()
    }
}

/// Solves `log2 m - H2(D) - D log2(m - 1) = R` for `D` in `[0, 1 - 1/m]`.
pub fn hamming_rd_closed_form(alphabet_size: usize, rate: f64) -> Result<f64> {
    if alphabet_size < 2 {
        return Err(Error::RateOutOfRange(format!(
            "alphabet size {alphabet_size} must be at least 2"
        )));
    }
    let m = alphabet_size as f64;
    let rmax = m.log2();
    if !(0.0..=rmax + 1e-12).contains(&rate) {
        return Err(Error::RateOutOfRange(format!(
            "rate {rate} outside [0, log2 {alphabet_size}]"
        )));
    }
    // R(D) is flat at D = 1 - 1/m, so bisection there only resolves sqrt(eps)
    if rate <= 0.0 {
        return Ok(1.0 - 1.0 / m);
    }
    let f = |d: f64| rmax - binary_entropy(d) - d * (m - 1.0).log2();
    let (mut lo, mut hi) = (0.0, 1.0 - 1.0 / m);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub dg: f64,
    pub dr: f64,
    pub gap: f64,
    pub rate: f64,
}

/// Compares `D(G)` with `D(R)`; `D(G) < D(R) - tol` signals a bug upstream.
pub fn gap_report(dg: f64, rd: &RdPoint, tol: f64) -> Result<GapReport> {
    if dg < rd.distortion - tol {
        return Err(Error::BoundViolation {
            dg,
            dr: rd.distortion,
            tol,
        });
    }
    Ok(GapReport {
        dg,
        dr: rd.distortion,
        gap: dg - rd.distortion,
        rate: rd.rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{example_debruijn8, parse_graph};

    fn uniform(m: usize) -> SourceModel {
        let names: Vec<String> = (0..m).map(|i| format!("s{i}")).collect();
        SourceModel::uniform(&names).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let d = hamming_rd_closed_form(4, 1.0).unwrap();
        assert!((d - 0.1893).abs() < 1e-4, "{d}");
        // bracket by direct evaluation
        let f = |d: f64| 2.0 - binary_entropy(d) - d * 3f64.log2();
        assert!(f(0.188) > 1.0 && f(0.190) < 1.0);
        assert!(hamming_rd_closed_form(4, 2.0).unwrap() < 1e-12);
        assert!((hamming_rd_closed_form(2, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(hamming_rd_closed_form(4, 2.5).is_err());
        assert!(hamming_rd_closed_form(1, 0.0).is_err());
    }

    #[test]
    fn blahut_uniform_quaternary() {
        let p = blahut(&uniform(4), 1.0, 1e-9).unwrap();
        let oracle = hamming_rd_closed_form(4, 1.0).unwrap();
        assert!((p.distortion - oracle).abs() < 1e-6, "{} vs {oracle}", p.distortion);
        assert!((p.rate - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn blahut_endpoints() {
        let src = SourceModel::parse("a:1/2,b:1/4,c:1/4", &["a", "b", "c"]).unwrap();
        let p = blahut(&src, 0.0, 1e-9).unwrap();
        assert!((p.distortion - 0.5).abs() < 1e-15);
        let p = blahut(&src, 1.5, 1e-9).unwrap();
        assert_eq!(p.distortion, 0.0);
        assert!(blahut(&src, 1.6, 1e-9).is_err());
        assert!(blahut(&src, -0.1, 1e-9).is_err());
        assert!(blahut(&src, 0.5, 0.0).is_err());
    }

    #[test]
    fn blahut_nonuniform_interior_point_is_on_the_curve() {
        let src = SourceModel::parse("a:1/2,b:1/4,c:1/4", &["a", "b", "c"]).unwrap();
        let mut last = f64::INFINITY;
        for r in [0.2, 0.5, 0.8, 1.1, 1.4] {
            let p = blahut(&src, r, 1e-9).unwrap();
            assert!((p.rate - r).abs() <= 1e-9);
            assert!(p.distortion < last);
            assert!(p.distortion >= 0.0 && p.distortion <= 0.5);
            last = p.distortion;
        }
    }

    #[test]
    fn rate_reports() {
        let r = RateReport::for_graph(&example_debruijn8()).unwrap();
        assert_eq!(r.rate.bits, Some(1));
        assert_eq!(r.header_bits, 3);
        assert_eq!(r.bits(100), Some(103));
        assert_eq!(r.formula(), "B_n = n*1 + 3");
        let single = parse_graph("alphabet a b\nedge v v a\nedge v v b\n").unwrap();
        let r = RateReport::for_graph(&single).unwrap();
        assert_eq!(r.header_bits, 0);
        let five = parse_graph(
            "alphabet a\nedge 0 1 a\nedge 1 2 a\nedge 2 3 a\nedge 3 4 a\nedge 4 0 a\n",
        )
        .unwrap();
        assert_eq!(RateReport::for_graph(&five).unwrap().header_bits, 3);
    }

    #[test]
    fn gap_examples() {
        let dr = blahut(&uniform(4), 1.0, 1e-9).unwrap();
        let g = gap_report(452.0 / 1809.0, &dr, 1e-9).unwrap();
        assert!((g.gap - 0.0606).abs() < 1e-3);
        let lossless = distortion_rate(&uniform(2), 1.0, 1e-9).unwrap();
        assert_eq!(lossless.distortion, 0.0);
        assert!(gap_report(1.0 / 6.0, &lossless, 1e-9).is_ok());
        assert!(matches!(
            gap_report(0.1, &dr, 1e-9),
            Err(Error::BoundViolation { .. })
        ));
    }
}
