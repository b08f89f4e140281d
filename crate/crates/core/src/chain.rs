//! Markov chain on the reduced state space, its stationary distribution, and
//! the asymptotic distortion `D(G) = sum_s q(s) * Pr[increment | s]`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::graph::{LabeledGraph, Rate};
use crate::linalg;
use crate::rd::GapReport;
use crate::scc;
use crate::source::{decimal, SourceModel};
use crate::statespace::StateSpace;

/// Exact stochastic matrix in sparse row form plus per-state increment mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    rows: Vec<Vec<(usize, BigRational)>>,
    absorb: Vec<BigRational>,
}

impl MarkovChain {
    /// Rows are merged per target and zero entries dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, BigRational)>>, absorb: Vec<BigRational>) -> Self {
        assert_eq!(rows.len(), absorb.len(), "one absorb mass per state");
        let rows = rows
            .into_iter()
            .map(|mut row| {
                row.sort_by_key(|(j, _)| *j);
                let mut merged: Vec<(usize, BigRational)> = Vec::with_capacity(row.len());
                for (j, p) in row {
                    match merged.last_mut() {
                        Some((last, acc)) if *last == j => *acc += p,
                        _ => merged.push((j, p)),
                    }
                }
                merged.retain(|(_, p)| !p.is_zero());
                merged
            })
            .collect();
        Self { rows, absorb }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, BigRational)] {
        &self.rows[i]
    }

    pub fn prob(&self, i: usize, j: usize) -> BigRational {
        self.rows[i]
            .binary_search_by_key(&j, |(t, _)| *t)
            .map(|pos| self.rows[i][pos].1.clone())
            .unwrap_or_else(|_| BigRational::zero())
    }

    /// Probability that the next symbol from state `i` costs one unit of distortion.
    pub fn absorb_mass(&self, i: usize) -> &BigRational {
        &self.absorb[i]
    }

    pub fn absorb(&self) -> &[BigRational] {
        &self.absorb
    }

    pub fn is_stochastic(&self) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().map(|(_, p)| p).sum::<BigRational>().is_one())
    }

    fn support(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(j, _)| *j).collect())
            .collect()
    }
}

pub fn build_chain(ss: &StateSpace, src: &SourceModel) -> Result<MarkovChain> {
    let p = src.aligned(ss.graph().alphabet())?;
    let mut rows = Vec::with_capacity(ss.len());
    let mut absorb = Vec::with_capacity(ss.len());
    for i in 0..ss.len() {
        let mut row = Vec::with_capacity(p.len());
        let mut mass = BigRational::zero();
        for (arc, px) in ss.arcs_from(i).iter().zip(&p) {
            row.push((arc.next, px.clone()));
            if arc.increment == 1 {
                mass += px;
            }
        }
        rows.push(row);
        absorb.push(mass);
    }
    Ok(MarkovChain::from_rows(rows, absorb))
}

/// Closed irreducible classes and the remaining transient states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    /// Ordered by smallest member; members ascending.
    pub closed: Vec<Vec<usize>>,
    pub transient: Vec<usize>,
}

pub fn closed_classes(mc: &MarkovChain) -> ClassPartition {
    let adj = mc.support();
    let (comps, comp) = scc::tarjan(&adj);
    let mut is_closed = vec![true; comps.len()];
    for (i, succ) in adj.iter().enumerate() {
        if succ.iter().any(|&j| comp[j] != comp[i]) {
            is_closed[comp[i]] = false;
        }
    }
    let mut closed: Vec<Vec<usize>> = comps
        .iter()
        .zip(&is_closed)
        .filter(|(_, &c)| c)
        .map(|(m, _)| m.clone())
        .collect();
    closed.sort_by_key(|m| m[0]);
    let mut transient: Vec<usize> = comps
        .iter()
        .zip(&is_closed)
        .filter(|(_, &c)| !c)
        .flat_map(|(m, _)| m.iter().copied())
        .collect();
    transient.sort_unstable();
    ClassPartition { closed, transient }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub q: Vec<BigRational>,
    pub classes: ClassPartition,
    /// Exactly one closed class, so `q` is the only solution of `q = qP`.
    pub unique: bool,
}

impl StationaryDistribution {
    /// `q P = q` and `sum q = 1` with zero residual.
    pub fn is_exact_fixed_point(&self, mc: &MarkovChain) -> bool {
        let mut qp = vec![BigRational::zero(); mc.size()];
        for (i, qi) in self.q.iter().enumerate() {
            if qi.is_zero() {
                continue;
            }
            for (j, p) in mc.row(i) {
                qp[*j] += qi * p;
            }
        }
        qp == self.q && self.q.iter().sum::<BigRational>().is_one()
    }
}

/// Stationary distribution of the chain started at state 0.
///
/// With one closed class this is the unique solution of the balance
/// equations. With several, it is the Cesàro limit from state 0: each
/// class's own stationary law weighted by the probability of absorption
/// into that class.
pub fn stationary(mc: &MarkovChain) -> Result<StationaryDistribution> {
    let classes = closed_classes(mc);
    let n = mc.size();
    let mut q = vec![BigRational::zero(); n];
    let weights = absorption_from_start(mc, &classes)?;
    for (class, w) in classes.closed.iter().zip(&weights) {
        if w.is_zero() {
            continue;
        }
        let pi = class_stationary(mc, class)?;
        for (&s, p) in class.iter().zip(pi) {
            q[s] = w * p;
        }
    }
    Ok(StationaryDistribution {
        unique: classes.closed.len() == 1,
        q,
        classes,
    })
}

fn class_stationary(mc: &MarkovChain, class: &[usize]) -> Result<Vec<BigRational>> {
    let m = class.len();
    if m == 1 {
        return Ok(vec![BigRational::one()]);
    }
    let pos = local_index(mc.size(), class);
    // a[eq][var]: balance for target j is sum_i q_i P[i][j] - q_j = 0.
    let mut a = vec![vec![BigRational::zero(); m]; m];
    for (li, &i) in class.iter().enumerate() {
        for (j, p) in mc.row(i) {
            let lj = pos[*j].expect("closed class has no exits");
            a[lj][li] += p;
        }
        a[li][li] -= BigRational::one();
    }
    // one balance equation is redundant; replace it with normalization
    a[0] = vec![BigRational::one(); m];
    let mut b = vec![BigRational::zero(); m];
    b[0] = BigRational::one();
    linalg::solve(&a, &b)
}

/// Probability of eventually entering each closed class from state 0.
fn absorption_from_start(mc: &MarkovChain, classes: &ClassPartition) -> Result<Vec<BigRational>> {
    let k = classes.closed.len();
    if let Some(c) = classes.closed.iter().position(|m| m.contains(&0)) {
        let mut w = vec![BigRational::zero(); k];
        w[c] = BigRational::one();
        return Ok(w);
    }
    if k == 1 {
        return Ok(vec![BigRational::one()]);
    }
    let transient = &classes.transient;
    let t = transient.len();
    let pos = local_index(mc.size(), transient);
    let mut class_of = vec![None; mc.size()];
    for (c, members) in classes.closed.iter().enumerate() {
        for &s in members {
            class_of[s] = Some(c);
        }
    }
    // (I - P_TT) h_c = P_T,c 1
    let mut a = vec![vec![BigRational::zero(); t]; t];
    let mut rhs = vec![vec![BigRational::zero(); t]; k];
    for (li, &i) in transient.iter().enumerate() {
        a[li][li] += BigRational::one();
        for (j, p) in mc.row(i) {
            match (pos[*j], class_of[*j]) {
                (Some(lj), _) => a[li][lj] -= p,
                (None, Some(c)) => rhs[c][li] += p,
                (None, None) => unreachable!("every state is transient or closed"),
            }
        }
    }
    let start = pos[0].expect("state 0 is transient here");
    rhs.iter()
        .map(|b| linalg::solve(&a, b).map(|h| h[start].clone()))
        .collect()
}

fn local_index(n: usize, members: &[usize]) -> Vec<Option<usize>> {
    let mut pos = vec![None; n];
    for (l, &s) in members.iter().enumerate() {
        pos[s] = Some(l);
    }
    pos
}

/// Result of the exact pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    /// `D(G)` in lowest terms.
    pub distortion: BigRational,
    pub state_count: usize,
    pub class_count: usize,
    pub unique: bool,
    pub k: u32,
    /// `None` when out-degrees are not uniform.
    pub rate: Option<Rate>,
    pub rd: Option<GapReport>,
}

impl AnalysisReport {
    pub fn distortion_decimal(&self) -> String {
        decimal(&self.distortion, 10)
    }
}

pub fn distortion(
    ss: &StateSpace,
    mc: &MarkovChain,
    sd: &StationaryDistribution,
) -> AnalysisReport {
    let distortion = sd
        .q
        .iter()
        .zip(mc.absorb())
        .map(|(q, a)| q * a)
        .sum::<BigRational>();
    AnalysisReport {
        distortion,
        state_count: ss.len(),
        class_count: sd.classes.closed.len(),
        unique: sd.unique,
        k: ss.k(),
        rate: ss.graph().rate().ok(),
        rd: None,
    }
}

/// Full exact pipeline with intermediate products.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub space: StateSpace,
    pub chain: MarkovChain,
    pub stationary: StationaryDistribution,
    pub report: AnalysisReport,
}

pub fn analyze_detailed(g: &LabeledGraph, src: &SourceModel, cap: usize) -> Result<Analysis> {
    let space = StateSpace::enumerate_with_cap(g, cap)?;
    let chain = build_chain(&space, src)?;
    let stationary = stationary(&chain)?;
    let report = distortion(&space, &chain, &stationary);
    Ok(Analysis {
        space,
        chain,
        stationary,
        report,
    })
}

pub fn analyze(g: &LabeledGraph, src: &SourceModel) -> Result<AnalysisReport> {
    analyze_detailed(g, src, crate::statespace::DEFAULT_STATE_CAP).map(|a| a.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{example_debruijn8, parse_graph};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn g3() -> LabeledGraph {
        parse_graph(include_str!("../data/g3.g")).unwrap()
    }

    #[test]
    fn g3_chain() {
        let ss = StateSpace::enumerate(&g3()).unwrap();
        let src = SourceModel::parse("uniform", &["a", "b"]).unwrap();
        let mc = build_chain(&ss, &src).unwrap();
        assert_eq!(mc.row(0), [(0, q(1, 2)), (1, q(1, 2))]);
        assert_eq!(mc.row(1), [(0, q(1, 1))]);
        assert_eq!(mc.absorb(), [q(0, 1), q(1, 2)]);
        assert!(mc.is_stochastic());

        let classes = closed_classes(&mc);
        assert_eq!(classes.closed, vec![vec![0, 1]]);

        let sd = stationary(&mc).unwrap();
        assert_eq!(sd.q, vec![q(2, 3), q(1, 3)]);
        assert!(sd.unique);
        assert!(sd.is_exact_fixed_point(&mc));
        assert_eq!(distortion(&ss, &mc, &sd).distortion, q(1, 6));
    }

    #[test]
    fn degenerate_chains() {
        let perfect = parse_graph(include_str!("../data/perfect.g")).unwrap();
        let src = SourceModel::uniform(perfect.alphabet()).unwrap();
        let ss = StateSpace::enumerate(&perfect).unwrap();
        let mc = build_chain(&ss, &src).unwrap();
        assert_eq!(mc.row(0), [(0, q(1, 1))]);
        assert_eq!(mc.absorb(), [q(0, 1)]);
        assert_eq!(stationary(&mc).unwrap().q, vec![q(1, 1)]);
        assert_eq!(analyze(&perfect, &src).unwrap().distortion, q(0, 1));

        let lone = parse_graph(include_str!("../data/selfloop.g")).unwrap();
        let src = SourceModel::uniform(lone.alphabet()).unwrap();
        let ss = StateSpace::enumerate(&lone).unwrap();
        let mc = build_chain(&ss, &src).unwrap();
        assert_eq!(mc.row(0), [(0, q(1, 1))]);
        assert_eq!(mc.absorb(), [q(1, 2)]);
        assert_eq!(analyze(&lone, &src).unwrap().distortion, q(1, 2));
    }

    #[test]
    fn alphabet_mismatch() {
        let ss = StateSpace::enumerate(&g3()).unwrap();
        let src = SourceModel::parse("uniform", &["a", "b", "c"]).unwrap();
        assert!(matches!(
            build_chain(&ss, &src),
            Err(crate::Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn identity_has_two_closed_classes() {
        let mc = MarkovChain::from_rows(
            vec![vec![(0, q(1, 1))], vec![(1, q(1, 1))]],
            vec![q(0, 1), q(1, 1)],
        );
        let classes = closed_classes(&mc);
        assert_eq!(classes.closed, vec![vec![0], vec![1]]);
        let sd = stationary(&mc).unwrap();
        assert!(!sd.unique);
        // Cesàro limit from state 0 stays at state 0
        assert_eq!(sd.q, vec![q(1, 1), q(0, 1)]);
    }

    #[test]
    fn absorption_weighted_mixture() {
        // 0 -> {1: 1/3, 2: 2/3}; 1 and 3 form a closed 2-cycle, 2 absorbing.
        let mc = MarkovChain::from_rows(
            vec![
                vec![(1, q(1, 3)), (2, q(2, 3))],
                vec![(3, q(1, 1))],
                vec![(2, q(1, 1))],
                vec![(1, q(1, 1))],
            ],
            vec![q(0, 1); 4],
        );
        let classes = closed_classes(&mc);
        assert_eq!(classes.closed, vec![vec![1, 3], vec![2]]);
        assert_eq!(classes.transient, vec![0]);
        let sd = stationary(&mc).unwrap();
        assert!(!sd.unique);
        assert_eq!(sd.q, vec![q(0, 1), q(1, 6), q(2, 3), q(1, 6)]);
        assert!(sd.is_exact_fixed_point(&mc));
    }

    #[test]
    fn transient_prefix_gets_zero_mass() {
        // 0 -> 1 -> 2 <-> 1 is closed {1,2}; 0 transient
        let mc = MarkovChain::from_rows(
            vec![
                vec![(1, q(1, 1))],
                vec![(1, q(1, 4)), (2, q(3, 4))],
                vec![(1, q(1, 1))],
            ],
            vec![q(0, 1), q(1, 2), q(0, 1)],
        );
        let sd = stationary(&mc).unwrap();
        assert!(sd.unique);
        assert_eq!(sd.q, vec![q(0, 1), q(4, 7), q(3, 7)]);
        assert!(sd.is_exact_fixed_point(&mc));
    }

    #[test]
    fn example_debruijn8_pipeline() {
        let g = example_debruijn8();
        let src = SourceModel::uniform(g.alphabet()).unwrap();
        let a = analyze_detailed(&g, &src, 1000).unwrap();
        assert_eq!(a.report.state_count, 107);
        assert_eq!(a.report.class_count, 1);
        assert!(a.report.unique);
        assert_eq!(a.report.k, 3);
        assert_eq!(a.report.distortion, q(452, 1809));
        assert_eq!(a.report.distortion_decimal(), "0.2498618021");
        assert!(a.stationary.is_exact_fixed_point(&a.chain));
        // the zero vector is transient
        assert!(a.stationary.q[0].is_zero());
    }
}
