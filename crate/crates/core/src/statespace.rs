//! The finite set of reduced Viterbi state vectors reachable from the zero vector.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, Symbol};
use crate::viterbi::{transition_into, StateVector};

/// Default cap on the number of enumerated states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub next: usize,
    pub increment: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    /// `V(s, x)` is already reduced and lies in the state space.
    InSpace,
    /// `V(s, x)` has minimum component 1 and lies outside the state space.
    Incremented,
}

#[derive(Debug, Clone)]
pub struct StateSpace {
    graph: LabeledGraph,
    states: Vec<StateVector>,
    index: HashMap<StateVector, usize>,
    /// Row-major `(state, symbol)` table.
    arcs: Vec<Arc>,
    /// BFS tree: the state and symbol through which each state was discovered.
    parent: Vec<Option<(usize, Symbol)>>,
    k: u32,
}

impl StateSpace {
    pub fn enumerate(g: &LabeledGraph) -> Result<Self> {
        Self::enumerate_with_cap(g, DEFAULT_STATE_CAP)
    }

    /// Breadth-first closure of the zero vector under the reduced operator,
    /// symbols visited in alphabet order.
    pub fn enumerate_with_cap(g: &LabeledGraph, cap: usize) -> Result<Self> {
        let k = g.exact_path_constant()?;
        let n = g.vertex_count();
        let alpha = g.alphabet().len();
        let zero = StateVector::zero(n);
        let mut states = vec![zero.clone()];
        let mut index = HashMap::from([(zero, 0usize)]);
        let mut parent = vec![None];
        let mut arcs = Vec::new();
        let mut scratch = vec![0u32; n];

        let mut head = 0;
        while head < states.len() {
            for x in 0..alpha {
                transition_into(g, &states[head].0, x, &mut scratch);
                let increment = scratch.iter().copied().min().unwrap_or(0);
                let mut next = StateVector(scratch.clone());
                next.reduce();
                if increment > 1 {
                    return Err(Error::ComponentBound {
                        state: states[head].0.clone(),
                        k,
                    });
                }
                let id = match index.entry(next) {
                    Entry::Occupied(o) => *o.get(),
                    Entry::Vacant(v) => {
                        if v.key().max_component() > k {
                            return Err(Error::ComponentBound {
                                state: v.key().0.clone(),
                                k,
                            });
                        }
                        if states.len() >= cap {
                            return Err(Error::StateCapExceeded { cap });
                        }
                        let id = states.len();
                        states.push(v.key().clone());
                        v.insert(id);
                        parent.push(Some((head, x)));
                        id
                    }
                };
                arcs.push(Arc {
                    next: id,
                    increment,
                });
            }
            head += 1;
        }

        Ok(Self {
            graph: g.clone(),
            states,
            index,
            arcs,
            parent,
            k,
        })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn alphabet_len(&self) -> usize {
        self.graph.alphabet().len()
    }

    pub fn index_of(&self, s: &StateVector) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn arc(&self, state: usize, x: Symbol) -> Arc {
        self.arcs[state * self.alphabet_len() + x]
    }

    /// Arcs out of `state`, one per symbol in alphabet order.
    pub fn arcs_from(&self, state: usize) -> &[Arc] {
        let a = self.alphabet_len();
        &self.arcs[state * a..(state + 1) * a]
    }

    pub fn max_component(&self) -> u32 {
        self.states.iter().map(StateVector::max_component).max().unwrap_or(0)
    }

    /// Every component of every state is at most `k`.
    pub fn check_component_bound(&self) -> bool {
        self.states.iter().all(|s| s.max_component() <= self.k)
    }

    /// Classifies `V(s, x)` and cross-checks the three equivalent views:
    /// arc increment, minimum of the unreduced vector, and membership.
    pub fn membership_increment(&self, s: &StateVector, x: Symbol) -> Result<Membership> {
        let id = self.index_of(s).ok_or_else(|| Error::NotInSpace(s.0.clone()))?;
        if x >= self.alphabet_len() {
            return Err(Error::SymbolOutOfRange(x));
        }
        let mut v = vec![0u32; s.len()];
        transition_into(&self.graph, &s.0, x, &mut v);
        let unreduced = StateVector(v);
        let incremented = self.arc(id, x).increment == 1;
        assert_eq!(incremented, unreduced.min_component() > 0, "arc increment disagrees with V(s, x)");
        assert_eq!(
            incremented,
            self.index_of(&unreduced).is_none(),
            "membership disagrees with arc increment"
        );
        Ok(if incremented {
            Membership::Incremented
        } else {
            Membership::InSpace
        })
    }

    /// A symbol sequence driving the zero vector to `state`.
    pub fn witness(&self, state: usize) -> Vec<Symbol> {
        let mut seq = Vec::new();
        let mut cur = state;
        while let Some((p, x)) = self.parent[cur] {
            seq.push(x);
            cur = p;
        }
        seq.reverse();
        seq
    }

    /// Line-oriented dump: state list then arc table.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "states {}\nvertices {}\nk {}\n",
            self.len(),
            self.graph.vertex_count(),
            self.k
        );
        for (i, s) in self.states.iter().enumerate() {
            out.push_str(&format!("{i}: {s}\n"));
        }
        out.push_str("arcs state symbol next increment\n");
        for i in 0..self.len() {
            for (x, arc) in self.arcs_from(i).iter().enumerate() {
                out.push_str(&format!(
                    "{i} {} {} {}\n",
                    self.graph.alphabet()[x],
                    arc.next,
                    arc.increment
                ));
            }
        }
        out
    }
}
