//! Lumping the state-space chain by a group of vertex permutations.
//!
//! A permutation `p` of vertex indices acts on a state vector by moving the
//! component at vertex `i` to vertex `p[i]`. Orbits of the enumerated states
//! ("fibers") are candidate blocks of a quotient chain; lumpability is
//! checked exactly rather than assumed.

use std::collections::{BTreeMap, HashSet, VecDeque};

use num_rational::BigRational;
use num_traits::Zero;

use crate::chain::{self, build_chain, MarkovChain, StationaryDistribution};
use crate::error::{Error, Result};
use crate::source::SourceModel;
use crate::statespace::StateSpace;
use crate::viterbi::StateVector;

/// Element-count cap for group closure.
pub const MAX_GROUP_ORDER: usize = 1 << 20;

pub type Permutation = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
}

/// `(a ∘ b)[i] = a[b[i]]`.
pub fn compose(a: &[usize], b: &[usize]) -> Permutation {
    b.iter().map(|&i| a[i]).collect()
}

pub fn apply(p: &[usize], s: &StateVector) -> StateVector {
    let mut out = vec![0; s.len()];
    for (i, &c) in s.0.iter().enumerate() {
        out[p[i]] = c;
    }
    StateVector(out)
}

impl PermutationGroup {
    /// Closes `generators` under composition.
    pub fn generate(degree: usize, generators: Vec<Permutation>) -> Result<Self> {
        for (k, g) in generators.iter().enumerate() {
            if g.len() != degree {
                return Err(Error::Permutation(format!(
                    "permutation #{k} has {} entries, expected {degree}",
                    g.len()
                )));
            }
            let mut seen = vec![false; degree];
            for &i in g {
                if i >= degree || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Permutation(format!("permutation #{k} is not a bijection")));
                }
            }
        }
        let identity: Permutation = (0..degree).collect();
        let mut elements = vec![identity.clone()];
        let mut seen: HashSet<Permutation> = HashSet::from([identity]);
        let mut queue: VecDeque<usize> = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for g in &generators {
                let h = compose(g, &elements[i]);
                if seen.insert(h.clone()) {
                    if elements.len() >= MAX_GROUP_ORDER {
                        return Err(Error::Permutation(format!(
                            "group order exceeds {MAX_GROUP_ORDER}"
                        )));
                    }
                    elements.push(h);
                    queue.push_back(elements.len() - 1);
                }
            }
        }
        Ok(Self {
            degree,
            generators,
            elements,
        })
    }

    pub fn trivial(degree: usize) -> Self {
        Self::generate(degree, Vec::new()).expect("identity group")
    }

    /// Permutation file: one permutation per line as the images of `0..n-1`.
    pub fn parse(text: &str, degree: usize) -> Result<Self> {
        let mut gens = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let perm = content
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Permutation, _>>()
                .map_err(|e| Error::Permutation(format!("line {}: {e}", lineno + 1)))?;
            gens.push(perm);
        }
        Self::generate(degree, gens)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberPartition {
    /// State indices per fiber, ascending; fibers ordered by first member.
    pub fibers: Vec<Vec<usize>>,
    pub fiber_of: Vec<usize>,
    /// Lexicographically least state of each fiber.
    pub representatives: Vec<StateVector>,
}

impl FiberPartition {
    /// Arbitrary blocks over the states of `ss`; must partition them.
    pub fn from_blocks(ss: &StateSpace, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut fiber_of = vec![usize::MAX; ss.len()];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        for (f, block) in blocks.iter().enumerate() {
            for &s in block {
                if s >= ss.len() || fiber_of[s] != usize::MAX {
                    return Err(Error::Permutation(format!(
                        "blocks do not partition the state space (state {s})"
                    )));
                }
                fiber_of[s] = f;
            }
        }
        if fiber_of.contains(&usize::MAX) {
            return Err(Error::Permutation("blocks do not cover the state space".into()));
        }
        let representatives = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&s| &ss.states()[s])
                    .min()
                    .expect("non-empty block")
                    .clone()
            })
            .collect();
        Ok(Self {
            fibers: blocks,
            fiber_of,
            representatives,
        })
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.fibers.iter().map(Vec::len).collect()
    }
}

/// Orbits of the enumerated states under `grp`.
pub fn induced_fibers(ss: &StateSpace, grp: &PermutationGroup) -> Result<FiberPartition> {
    if grp.degree() != ss.graph().vertex_count() {
        return Err(Error::Permutation(format!(
            "group acts on {} points but the graph has {} vertices",
            grp.degree(),
            ss.graph().vertex_count()
        )));
    }
    let mut assigned = vec![false; ss.len()];
    let mut blocks = Vec::new();
    for (i, s) in ss.states().iter().enumerate() {
        if assigned[i] {
            continue;
        }
        let mut orbit = Vec::new();
        for (k, p) in grp.elements().iter().enumerate() {
            let image = apply(p, s);
            let j = ss.index_of(&image).ok_or(Error::NotInvariant {
                perm: k,
                state: s.0.clone(),
            })?;
            if !assigned[j] {
                assigned[j] = true;
                orbit.push(j);
            }
        }
        blocks.push(orbit);
    }
    FiberPartition::from_blocks(ss, blocks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientChain {
    /// Chain over fibers; its absorb masses are the per-fiber increment masses.
    pub chain: MarkovChain,
    pub lumpable: bool,
    pub partition: FiberPartition,
}

impl QuotientChain {
    pub fn super_absorb(&self) -> &[BigRational] {
        self.chain.absorb()
    }
}

/// Block-to-block masses of one state.
fn block_profile(mc: &MarkovChain, fp: &FiberPartition, s: usize) -> BTreeMap<usize, BigRational> {
    let mut out: BTreeMap<usize, BigRational> = BTreeMap::new();
    for (j, p) in mc.row(s) {
        *out.entry(fp.fiber_of[*j]).or_insert_with(BigRational::zero) += p;
    }
    out
}

/// Lumps `mc` along `fp`, failing with a witness if any block is not lumpable.
pub fn lump(mc: &MarkovChain, fp: &FiberPartition) -> Result<QuotientChain> {
    let mut rows = Vec::with_capacity(fp.len());
    let mut absorb = Vec::with_capacity(fp.len());
    for (f, members) in fp.fibers.iter().enumerate() {
        let rep = members[0];
        let profile = block_profile(mc, fp, rep);
        for &other in &members[1..] {
            let theirs = block_profile(mc, fp, other);
            if theirs != profile {
                let target = profile
                    .keys()
                    .chain(theirs.keys())
                    .find(|t| profile.get(t) != theirs.get(t))
                    .expect("profiles differ somewhere");
                return Err(Error::NotLumpable {
                    fiber: f,
                    first: rep,
                    second: other,
                    target: format!("fiber {target}"),
                });
            }
            if mc.absorb_mass(other) != mc.absorb_mass(rep) {
                return Err(Error::NotLumpable {
                    fiber: f,
                    first: rep,
                    second: other,
                    target: "increment mass".into(),
                });
            }
        }
        rows.push(profile.into_iter().collect());
        absorb.push(mc.absorb_mass(rep).clone());
    }
    Ok(QuotientChain {
        chain: MarkovChain::from_rows(rows, absorb),
        lumpable: true,
        partition: fp.clone(),
    })
}

pub fn quotient(ss: &StateSpace, src: &SourceModel, fp: &FiberPartition) -> Result<QuotientChain> {
    let mc = build_chain(ss, src)?;
    lump(&mc, fp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientAnalysis {
    /// Stationary mass per fiber.
    pub q: Vec<BigRational>,
    pub distortion: BigRational,
    pub stationary: StationaryDistribution,
}

/// Stationary law and distortion of the lumped chain. The zero vector is
/// always alone in fiber 0, so the Cesàro start state carries over.
pub fn quotient_analyze(qc: &QuotientChain) -> Result<QuotientAnalysis> {
    let sd = chain::stationary(&qc.chain)?;
    let distortion = sd
        .q
        .iter()
        .zip(qc.super_absorb())
        .map(|(q, a)| q * a)
        .sum();
    Ok(QuotientAnalysis {
        q: sd.q.clone(),
        distortion,
        stationary: sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{example_debruijn8, parse_graph};

    fn example_group() -> PermutationGroup {
        PermutationGroup::parse(include_str!("../data/pi8.perm"), 8).unwrap()
    }

    #[test]
    fn group_closure() {
        let g = example_group();
        assert_eq!(g.order(), 8);
        // three involutions generate the same group
        let small = PermutationGroup::generate(
            8,
            vec![
                vec![1, 0, 3, 2, 5, 4, 7, 6],
                vec![2, 3, 0, 1, 6, 7, 4, 5],
                vec![4, 5, 6, 7, 0, 1, 2, 3],
            ],
        )
        .unwrap();
        let mut a = small.elements().to_vec();
        let mut b = g.elements().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        let cyc = PermutationGroup::generate(4, vec![vec![1, 2, 3, 0]]).unwrap();
        assert_eq!(cyc.order(), 4);
    }

    #[test]
    fn bad_permutations() {
        assert!(PermutationGroup::generate(3, vec![vec![0, 0, 1]]).is_err());
        assert!(PermutationGroup::generate(3, vec![vec![0, 1]]).is_err());
        assert!(PermutationGroup::generate(3, vec![vec![0, 1, 3]]).is_err());
        assert!(PermutationGroup::parse("0 1 x\n", 3).is_err());
    }

    #[test]
    fn action_is_a_group_action() {
        let g = example_group();
        let ss = StateSpace::enumerate(&example_debruijn8()).unwrap();
        for s in ss.states() {
            assert_eq!(&apply(&g.elements()[0], s), s);
            for a in g.generators() {
                for b in g.generators() {
                    assert_eq!(apply(&compose(a, b), s), apply(a, &apply(b, s)));
                }
            }
        }
    }

    #[test]
    fn example_fibers() {
        let ss = StateSpace::enumerate(&example_debruijn8()).unwrap();
        let fp = induced_fibers(&ss, &example_group()).unwrap();
        assert_eq!(fp.len(), 16);
        assert_eq!(fp.sizes().iter().sum::<usize>(), 107);
        assert_eq!(fp.fibers[0], vec![0]);
        let trivial = induced_fibers(&ss, &PermutationGroup::trivial(8)).unwrap();
        assert_eq!(trivial.len(), 107);
    }

    #[test]
    fn not_invariant_group() {
        let g = parse_graph(include_str!("../data/g3.g")).unwrap();
        let ss = StateSpace::enumerate(&g).unwrap();
        let swap = PermutationGroup::generate(2, vec![vec![1, 0]]).unwrap();
        // (1,0) maps to (0,1), which is not enumerated
        assert!(matches!(
            induced_fibers(&ss, &swap),
            Err(Error::NotInvariant { .. })
        ));
        let fp = induced_fibers(&ss, &PermutationGroup::trivial(2)).unwrap();
        assert_eq!(fp.len(), 2);
    }

    #[test]
    fn trivial_quotient_equals_chain() {
        let g = parse_graph(include_str!("../data/g3.g")).unwrap();
        let src = SourceModel::uniform(g.alphabet()).unwrap();
        let ss = StateSpace::enumerate(&g).unwrap();
        let fp = induced_fibers(&ss, &PermutationGroup::trivial(2)).unwrap();
        let qc = quotient(&ss, &src, &fp).unwrap();
        assert_eq!(qc.chain, build_chain(&ss, &src).unwrap());
        let qa = quotient_analyze(&qc).unwrap();
        assert_eq!(qa.distortion, BigRational::new(1.into(), 6.into()));

        let perfect = parse_graph(include_str!("../data/perfect.g")).unwrap();
        let src = SourceModel::uniform(perfect.alphabet()).unwrap();
        let ss = StateSpace::enumerate(&perfect).unwrap();
        let fp = induced_fibers(&ss, &PermutationGroup::trivial(1)).unwrap();
        let qa = quotient_analyze(&quotient(&ss, &src, &fp).unwrap()).unwrap();
        assert!(qa.distortion.is_zero());
    }

    #[test]
    fn merged_blocks_are_not_lumpable() {
        let ss = StateSpace::enumerate(&example_debruijn8()).unwrap();
        let src = SourceModel::uniform(ss.graph().alphabet()).unwrap();
        let fp = induced_fibers(&ss, &example_group()).unwrap();
        let fiber_with = |digits: [u32; 8]| {
            let id = ss.index_of(&StateVector(digits.to_vec())).unwrap();
            fp.fiber_of[id]
        };
        let s2 = fiber_with([0, 0, 0, 0, 1, 1, 1, 1]);
        let s3 = fiber_with([0, 1, 1, 0, 1, 1, 1, 1]);
        let mut blocks = fp.fibers.clone();
        let moved = std::mem::take(&mut blocks[s3]);
        blocks[s2].extend(moved);
        let merged = FiberPartition::from_blocks(&ss, blocks).unwrap();
        assert!(matches!(
            quotient(&ss, &src, &merged),
            Err(Error::NotLumpable { .. })
        ));
    }

    #[test]
    fn from_blocks_validation() {
        let g = parse_graph(include_str!("../data/g3.g")).unwrap();
        let ss = StateSpace::enumerate(&g).unwrap();
        assert!(FiberPartition::from_blocks(&ss, vec![vec![0]]).is_err());
        assert!(FiberPartition::from_blocks(&ss, vec![vec![0, 1], vec![1]]).is_err());
        assert!(FiberPartition::from_blocks(&ss, vec![vec![0, 5], vec![1]]).is_err());
    }
}
