use std::fmt::Write as _;
use std::sync::Arc;

use super::TreeAutomaton;
use crate::commutative::{parikh_decompose, semilinear_membership, SemilinearSet};
use crate::config::Guards;
use crate::error::{Error, Result};
use crate::structures::UnrankedTree;

/// Tree automaton whose horizontal constraints are semilinear sets over the
/// number of children in each state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingTreeAutomaton {
    name: String,
    labels: Arc<Vec<String>>,
    states: Vec<String>,
    finals: Vec<bool>,
    delta: Vec<Vec<SemilinearSet>>,
}

impl TreeAutomaton {
    /// Replaces every horizontal DFA by its letter-count decomposition.
    pub fn to_counting(&self, guards: &Guards) -> Result<CountingTreeAutomaton> {
        self.require_invariant()?;
        let r = self.states.len();
        let delta = self
            .delta
            .iter()
            .map(|row| {
                row.iter()
                    .map(|d| match d {
                        None => Ok(SemilinearSet::empty(r)),
                        Some(d) => parikh_decompose(d, false, guards),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CountingTreeAutomaton {
            name: self.name.clone(),
            labels: self.labels.clone(),
            states: self.states.clone(),
            finals: self.finals.clone(),
            delta,
        })
    }
}

impl CountingTreeAutomaton {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn constraint(&self, q: usize, a: usize) -> &SemilinearSet {
        &self.delta[q][a]
    }

    pub fn label_index(&self, a: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == a)
    }

    /// Bottom-up evaluation on an unordered tree. Every node must admit
    /// exactly one state.
    pub fn run(&self, t: &UnrankedTree) -> Result<bool> {
        let n = t.size();
        let r = self.states.len();
        let mut states = vec![0usize; n];
        for v in (0..n).rev() {
            let a = self
                .label_index(t.label_name(v))
                .ok_or_else(|| Error::UnknownLabel(t.label_name(v).to_string()))?;
            let mut counts = vec![0u64; r];
            for &c in t.children(v) {
                counts[states[c]] += 1;
            }
            let mut hits = Vec::new();
            for q in 0..r {
                if semilinear_membership(&self.delta[q][a], &counts)? {
                    hits.push(q);
                }
            }
            match hits.len() {
                1 => states[v] = hits[0],
                0 => return Err(Error::NoCandidateState(t.address_text(v))),
                _ => {
                    return Err(Error::AmbiguousState {
                        path: t.address_text(v),
                        states: hits.iter().map(|&q| self.states[q].as_str()).collect::<Vec<_>>().join(","),
                    })
                }
            }
        }
        Ok(n > 0 && self.finals[states[0]])
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cta {}", self.name);
        let _ = writeln!(s, "labels {}", self.labels.join(" "));
        let _ = writeln!(s, "states {}", self.states.join(" "));
        let fin: Vec<&str> = (0..self.states.len())
            .filter(|&q| self.finals[q])
            .map(|q| self.states[q].as_str())
            .collect();
        let _ = writeln!(s, "final {}", fin.join(" "));
        for q in 0..self.states.len() {
            for a in 0..self.labels.len() {
                let _ = writeln!(s, "delta {} {} {}", self.states[q], self.labels[a], self.delta[q][a]);
            }
        }
        s.push_str("end\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{a_leaves, even_a_leaves};
    use super::*;
    use crate::structures::enumerate_unordered_trees;
    use crate::structures::text::parse_tree;

    #[test]
    fn even_a_leaves_constraints() {
        let c = even_a_leaves().to_counting(&Guards::default()).unwrap();
        // Children counts are (e, o); the o count carries the parity.
        assert_eq!(c.constraint(0, 1).to_string(), "{(S[0,1], S[0,2])}");
        assert_eq!(c.constraint(1, 1).to_string(), "{(S[0,1], S[1,2])}");
        assert_eq!(c.constraint(1, 0).to_string(), "{(S[0,0], S[0,0]), (S[0,0], S[1,2]), (S[1,1], S[1,2])}");
        let two = parse_tree("b(a, a)", None).unwrap();
        let three = parse_tree("b(a, a, a)", None).unwrap();
        assert!(c.run(&two).unwrap());
        assert!(!c.run(&three).unwrap());
    }

    #[test]
    fn agrees_with_ordered_runs() {
        let ta = even_a_leaves();
        let c = ta.to_counting(&Guards::default()).unwrap();
        let alphabet = Arc::new(vec!["a".to_string(), "b".to_string()]);
        for t in enumerate_unordered_trees(alphabet, 6) {
            assert_eq!(c.run(&t).unwrap(), ta.accepts_unordered(&t).unwrap());
            assert_eq!(c.run(&t).unwrap(), a_leaves(&t) % 2 == 0);
        }
    }

    #[test]
    fn partial_automata_report_the_node() {
        let eps = "dfa eps\nalphabet q\nstates 0 1\ninitial 0\naccepting 0\ntrans 0 q 1\ntrans 1 q 1\nend\n\
                   ta leaf\nlabels a\nstates q\nfinal q\ndelta q a eps\nend\n";
        let ta = super::super::parse_tree_automata(eps).unwrap().remove(0);
        let c = ta.to_counting(&Guards::default()).unwrap();
        assert_eq!(c.constraint(0, 0).to_string(), "{(S[0,0])}");
        assert_eq!(
            c.run(&parse_tree("a(a(a))", None).unwrap()).unwrap_err(),
            Error::NoCandidateState("1".into())
        );
    }
}
