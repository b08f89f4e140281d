//! Property tests over random primitive graphs.

mod common;

use num_rational::BigRational;
use proptest::prelude::*;

use common::{random_primitive, rng, unreduced_min};
use tcq::chain::{analyze_detailed, build_chain, stationary};
use tcq::sim::{simulate, SimMode};
use tcq::statespace::{Membership, StateSpace, DEFAULT_STATE_CAP};
use tcq::symmetry::{induced_fibers, quotient, quotient_analyze, PermutationGroup};
use tcq::viterbi::{encode, increment_count, reduced_transition, transition, StateVector};
use tcq::{LabeledGraph, SourceModel};

fn graph() -> impl Strategy<Value = LabeledGraph> {
    any::<u64>().prop_map(|seed| random_primitive(&mut rng(seed), 5, 3))
}

fn graph_and_seq(max_len: usize) -> impl Strategy<Value = (LabeledGraph, Vec<usize>)> {
    graph().prop_flat_map(move |g| {
        let a = g.alphabet().len();
        (Just(g), prop::collection::vec(0..a, 1..=max_len))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn states_are_reduced_and_bounded(g in graph()) {
        let ss = StateSpace::enumerate(&g).unwrap();
        prop_assert!(ss.check_component_bound());
        prop_assert!(ss.states().iter().all(StateVector::is_reduced));
        prop_assert!(ss.states()[0].is_zero());
        for (i, s) in ss.states().iter().enumerate() {
            for x in 0..ss.alphabet_len() {
                let arc = ss.arc(i, x);
                prop_assert!(arc.increment <= 1);
                let m = ss.membership_increment(s, x).unwrap();
                prop_assert_eq!(m == Membership::Incremented, arc.increment == 1);
            }
        }
    }

    #[test]
    fn reduction_commutes_with_transition((g, xs) in graph_and_seq(40)) {
        // V(s + c) = V(s) + c, so reducing late or early gives the same vector
        let n = g.vertex_count();
        let mut raw = StateVector::zero(n);
        let mut red = StateVector::zero(n);
        let mut total = 0u64;
        for &x in &xs {
            raw = transition(&g, &raw, x);
            let step = reduced_transition(&g, &red, x);
            total += u64::from(step.increment);
            red = step.next_reduced;
            let mut r = raw.clone();
            let m = r.reduce();
            prop_assert_eq!(&r, &red);
            prop_assert_eq!(u64::from(m), total);
        }
    }

    #[test]
    fn encoder_matches_oracles((g, xs) in graph_and_seq(60)) {
        let enc = encode(&g, &xs).unwrap();
        prop_assert_eq!(enc.total_distortion, increment_count(&g, &xs).unwrap());
        prop_assert_eq!(enc.total_distortion, unreduced_min(&g, &xs));
    }

    #[test]
    fn stationary_is_an_exact_fixed_point(g in graph()) {
        let ss = StateSpace::enumerate(&g).unwrap();
        let src = SourceModel::uniform(g.alphabet()).unwrap();
        let mc = build_chain(&ss, &src).unwrap();
        prop_assert!(mc.is_stochastic());
        let sd = stationary(&mc).unwrap();
        prop_assert!(sd.is_exact_fixed_point(&mc));
        let total: BigRational = sd.q.iter().sum();
        prop_assert_eq!(total, BigRational::from_integer(1.into()));
    }

    #[test]
    fn trivial_group_quotient_is_the_chain(g in graph()) {
        let ss = StateSpace::enumerate(&g).unwrap();
        let src = SourceModel::uniform(g.alphabet()).unwrap();
        let fp = induced_fibers(&ss, &PermutationGroup::trivial(g.vertex_count())).unwrap();
        prop_assert_eq!(fp.len(), ss.len());
        let qa = quotient_analyze(&quotient(&ss, &src, &fp).unwrap()).unwrap();
        let full = analyze_detailed(&g, &src, DEFAULT_STATE_CAP).unwrap();
        prop_assert_eq!(qa.distortion, full.report.distortion);
    }

    #[test]
    fn simulation_is_seed_deterministic(g in graph(), seed in any::<u64>()) {
        let src = SourceModel::uniform(g.alphabet()).unwrap();
        let a = simulate(&g, &src, 2_000, seed, SimMode::Sequential).unwrap();
        let b = simulate(&g, &src, 2_000, seed, SimMode::Sequential).unwrap();
        prop_assert_eq!(a, b);
        let p1 = simulate(&g, &src, 2_000, seed, SimMode::Parallel { workers: 1 }).unwrap();
        let p3 = simulate(&g, &src, 2_000, seed, SimMode::Parallel { workers: 3 }).unwrap();
        prop_assert_eq!(p1.increments, p3.increments);
    }
}
