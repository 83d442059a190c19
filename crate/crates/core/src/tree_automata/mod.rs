//! Unranked tree automata whose horizontal languages are DFAs over the
//! state set, their counting counterparts, and the synthesis of automata
//! computing sibling-invariant types.
//!
//! Text format: DFA blocks (see [`crate::commutative`]) followed by
//!
//! ```text
//! ta NAME
//! labels a b
//! states e o
//! final e
//! delta e a DFA-NAME
//! end
//! ```
//!
//! A missing `delta` entry is the empty language.

mod counting;
mod courcelle;
mod synth;

pub use counting::CountingTreeAutomaton;
pub use courcelle::{courcelle_check, CourcelleVerdict};
pub use synth::{compare_syntheses, synthesize_invariant_type_ta, Conflict, Synthesis};

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::commutative::{parse_dfa_blocks, Dfa};
use crate::error::{Error, Result};
use crate::structures::{SiblingOrder, UnrankedTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAutomaton {
    name: String,
    labels: Arc<Vec<String>>,
    states: Vec<String>,
    finals: Vec<bool>,
    /// `delta[q][a]`; `None` is the empty language.
    delta: Vec<Vec<Option<Dfa>>>,
    deterministic: bool,
}

/// Outcome of a run on an ordered tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub accepted: bool,
    /// State per node, for deterministic automata that reach the root.
    pub states: Option<Vec<usize>>,
    /// A node whose children all got states but which admits none.
    pub failure: Option<usize>,
}

/// A pair of states whose horizontal languages share a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overlap {
    pub label: usize,
    pub first: usize,
    pub second: usize,
    pub word: Vec<usize>,
}

impl TreeAutomaton {
    pub fn new(
        name: &str,
        labels: Vec<String>,
        states: Vec<String>,
        finals: Vec<bool>,
        delta: Vec<Vec<Option<Dfa>>>,
    ) -> Result<Self> {
        if states.is_empty() || states.len() > 64 {
            return Err(Error::InvalidArgument(format!(
                "automaton `{name}` needs between 1 and 64 states"
            )));
        }
        if finals.len() != states.len() || delta.len() != states.len() {
            return Err(Error::InvalidArgument(format!("automaton `{name}` is malformed")));
        }
        for row in &delta {
            if row.len() != labels.len() {
                return Err(Error::InvalidArgument(format!("automaton `{name}` is malformed")));
            }
            for d in row.iter().flatten() {
                if d.alphabet() != states.as_slice() {
                    return Err(Error::AlphabetMismatch(format!(
                        "horizontal dfa `{}` must read the states {:?}, found {:?}",
                        d.name(),
                        states,
                        d.alphabet()
                    )));
                }
            }
        }
        let mut ta = TreeAutomaton {
            name: name.to_string(),
            labels: Arc::new(labels),
            states,
            finals,
            delta,
            deterministic: false,
        };
        ta.deterministic = ta.overlap().is_none();
        Ok(ta)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn horizontal(&self, q: usize, a: usize) -> Option<&Dfa> {
        self.delta[q][a].as_ref()
    }

    pub fn with_finals(mut self, finals: Vec<bool>) -> Result<Self> {
        if finals.len() != self.states.len() {
            return Err(Error::InvalidArgument("wrong number of final flags".into()));
        }
        self.finals = finals;
        Ok(self)
    }

    /// The first pair of states with a common horizontal word, if any.
    pub fn overlap(&self) -> Option<Overlap> {
        for a in 0..self.labels.len() {
            for p in 0..self.states.len() {
                for q in p + 1..self.states.len() {
                    if let (Some(x), Some(y)) = (&self.delta[p][a], &self.delta[q][a]) {
                        if let Some(word) = x.common_word(y).expect("same alphabet") {
                            return Some(Overlap {
                                label: a,
                                first: p,
                                second: q,
                                word,
                            });
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// First horizontal language that is not closed under permutation, as
    /// (state, label, witness text).
    pub fn invariance_violation(&self) -> Option<(usize, usize, String)> {
        for q in 0..self.states.len() {
            for a in 0..self.labels.len() {
                if let Some(w) = self.delta[q][a].as_ref().and_then(Dfa::witness_text) {
                    return Some((q, a, w));
                }
            }
        }
        None
    }

    pub fn is_sibling_invariant(&self) -> bool {
        self.invariance_violation().is_none()
    }

    pub(crate) fn require_invariant(&self) -> Result<()> {
        match self.invariance_violation() {
            None => Ok(()),
            Some((q, a, w)) => Err(Error::NotSiblingInvariant {
                state: self.states[q].clone(),
                label: self.labels[a].clone(),
                witness: w,
            }),
        }
    }

    /// Label index in this automaton for every node of `t`.
    pub(crate) fn label_map(&self, t: &UnrankedTree) -> Result<Vec<usize>> {
        let by_name: HashMap<&str, usize> = self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        (0..t.size())
            .map(|v| {
                by_name
                    .get(t.label_name(v))
                    .copied()
                    .ok_or_else(|| Error::UnknownLabel(t.label_name(v).to_string()))
            })
            .collect()
    }

    /// Bottom-up run on `t` with children taken in `ord` (the written order
    /// when `None`). Nondeterministic automata are simulated on state sets
    /// and report acceptance only.
    pub fn run(&self, t: &UnrankedTree, ord: Option<&SiblingOrder>) -> Result<RunResult> {
        let written = t.written_order();
        let ord = ord.unwrap_or(&written);
        let (t2, _) = t.reordered(ord)?;
        let labels = self.label_map(&t2)?;
        if !self.is_deterministic() {
            return Ok(RunResult {
                accepted: self.run_sets(&t2, &labels),
                states: None,
                failure: None,
            });
        }
        let n = t2.size();
        let mut states = vec![usize::MAX; n];
        // Preorder numbering: children come after parents, so a reverse
        // sweep is bottom-up.
        let mut failure = None;
        for v in (0..n).rev() {
            let word: Vec<usize> = t2.children(v).iter().map(|&c| states[c]).collect();
            if word.contains(&usize::MAX) {
                continue;
            }
            let hit = (0..self.states.len())
                .find(|&q| self.delta[q][labels[v]].as_ref().is_some_and(|d| d.accepts(&word)));
            match hit {
                Some(q) => states[v] = q,
                None => failure = Some(v),
            }
        }
        if let Some(v) = failure {
            // Report the failure in the caller's numbering.
            let mut old_of_new = vec![0; n];
            let (_, map) = t.reordered(ord)?;
            for (old, &new) in map.iter().enumerate() {
                old_of_new[new] = old;
            }
            return Ok(RunResult {
                accepted: false,
                states: None,
                failure: Some(old_of_new[v]),
            });
        }
        let accepted = self.finals[states[0]];
        let (_, map) = t.reordered(ord)?;
        let states_old = (0..n).map(|old| states[map[old]]).collect();
        Ok(RunResult {
            accepted,
            states: Some(states_old),
            failure: None,
        })
    }

    fn run_sets(&self, t: &UnrankedTree, labels: &[usize]) -> bool {
        let n = t.size();
        let mut sets = vec![0u64; n];
        for v in (0..n).rev() {
            let mut mine = 0u64;
            for q in 0..self.states.len() {
                let Some(d) = &self.delta[q][labels[v]] else { continue };
                let mut cur = vec![false; d.state_count()];
                cur[d.initial()] = true;
                for &c in t.children(v) {
                    let mut next = vec![false; d.state_count()];
                    for x in (0..d.state_count()).filter(|&x| cur[x]) {
                        for s in (0..self.states.len()).filter(|&s| sets[c] >> s & 1 == 1) {
                            next[d.step(x, s)] = true;
                        }
                    }
                    cur = next;
                }
                if (0..d.state_count()).any(|x| cur[x] && d.is_accepting(x)) {
                    mine |= 1 << q;
                }
            }
            sets[v] = mine;
        }
        (0..self.states.len()).any(|q| sets[0] >> q & 1 == 1 && self.finals[q])
    }

    /// Acceptance of an unordered tree, read off its written order.
    pub fn accepts_unordered(&self, t: &UnrankedTree) -> Result<bool> {
        self.require_invariant()?;
        Ok(self.run(t, None)?.accepted)
    }

    /// Text form: one DFA block per transition, then the automaton block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut refs = Vec::new();
        for q in 0..self.states.len() {
            for a in 0..self.labels.len() {
                if let Some(d) = &self.delta[q][a] {
                    let name = format!("{}.{}.{}", self.name, self.states[q], self.labels[a]);
                    s.push_str(&d.clone().with_name(&name).to_text());
                    refs.push((q, a, name));
                }
            }
        }
        let _ = writeln!(s, "ta {}", self.name);
        let _ = writeln!(s, "labels {}", self.labels.join(" "));
        let _ = writeln!(s, "states {}", self.states.join(" "));
        let fin: Vec<&str> = (0..self.states.len())
            .filter(|&q| self.finals[q])
            .map(|q| self.states[q].as_str())
            .collect();
        let _ = writeln!(s, "final {}", fin.join(" "));
        for (q, a, name) in refs {
            let _ = writeln!(s, "delta {} {} {}", self.states[q], self.labels[a], name);
        }
        s.push_str("end\n");
        s
    }
}

#[derive(Default)]
struct TaBlock {
    name: String,
    start: usize,
    labels: Option<Vec<String>>,
    states: Option<Vec<String>>,
    finals: Vec<(String, usize)>,
    delta: Vec<(String, String, String, usize)>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::parse("tree automaton", line, 1, msg)
}

/// Parses every `ta` block in `text`; DFA blocks anywhere in the file are
/// available to all of them by name.
pub fn parse_tree_automata(text: &str) -> Result<Vec<TreeAutomaton>> {
    let mut blocks: Vec<TaBlock> = Vec::new();
    let mut open: Option<TaBlock> = None;
    let dfas = parse_dfa_blocks(text, |head, rest, ln| {
        let words: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        match (&mut open, head) {
            (None, "ta") => {
                if words.len() != 1 {
                    return Err(perr(ln, "`ta` takes one name"));
                }
                open = Some(TaBlock {
                    name: words[0].clone(),
                    start: ln,
                    ..Default::default()
                });
            }
            (Some(_), "end") => blocks.push(open.take().expect("open")),
            (Some(b), "labels") => b.labels = Some(words),
            (Some(b), "states") => b.states = Some(words),
            (Some(b), "final") => b.finals.extend(words.into_iter().map(|w| (w, ln))),
            (Some(b), "delta") => {
                if words.len() != 3 {
                    return Err(perr(ln, "`delta` takes: state label dfa-name"));
                }
                b.delta.push((words[0].clone(), words[1].clone(), words[2].clone(), ln));
            }
            _ => return Err(perr(ln, format!("unexpected `{head}`"))),
        }
        Ok(())
    })?;
    if let Some(b) = open {
        return Err(perr(b.start, format!("automaton `{}` is not closed by `end`", b.name)));
    }
    let by_name: HashMap<&str, &Dfa> = dfas.iter().map(|d| (d.name(), d)).collect();
    let mut out = Vec::new();
    for b in blocks {
        let labels = b.labels.ok_or_else(|| perr(b.start, "missing `labels`"))?;
        let states = b.states.ok_or_else(|| perr(b.start, "missing `states`"))?;
        let q_idx = |q: &str, ln| {
            states
                .iter()
                .position(|s| s == q)
                .ok_or_else(|| perr(ln, format!("unknown state `{q}`")))
        };
        let mut finals = vec![false; states.len()];
        for (q, ln) in &b.finals {
            finals[q_idx(q, *ln)?] = true;
        }
        let mut delta: Vec<Vec<Option<Dfa>>> = vec![vec![None; labels.len()]; states.len()];
        for (q, a, d, ln) in &b.delta {
            let qi = q_idx(q, *ln)?;
            let ai = labels
                .iter()
                .position(|l| l == a)
                .ok_or_else(|| perr(*ln, format!("unknown label `{a}`")))?;
            let dfa = by_name.get(d.as_str()).ok_or_else(|| perr(*ln, format!("unknown dfa `{d}`")))?;
            if delta[qi][ai].is_some() {
                return Err(perr(*ln, format!("duplicate delta for ({q}, {a})")));
            }
            delta[qi][ai] = Some((*dfa).clone());
        }
        out.push(TreeAutomaton::new(&b.name, labels, states, finals, delta)?);
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::config::Guards;
    use crate::structures::text::parse_tree;
    use crate::structures::{enumerate_unordered_trees, sibling_orders};

    /// Even number of a-labelled leaves. States: e (even), o (odd).
    pub(crate) const EVEN_A_LEAVES: &str = "
dfa even-o-nonempty
alphabet e o
states s0 s1 n0 n1
initial s0
accepting n0
trans s0 e n0
trans s0 o n1
trans s1 e n1
trans s1 o n0
trans n0 e n0
trans n0 o n1
trans n1 e n1
trans n1 o n0
end
dfa odd-o-or-empty
alphabet e o
states s0 n0 n1
initial s0
accepting s0 n1
trans s0 e n0
trans s0 o n1
trans n0 e n0
trans n0 o n1
trans n1 e n1
trans n1 o n0
end
dfa even-o
alphabet e o
states p0 p1
initial p0
accepting p0
trans p0 e p0
trans p0 o p1
trans p1 e p1
trans p1 o p0
end
dfa odd-o
alphabet e o
states p0 p1
initial p0
accepting p1
trans p0 e p0
trans p0 o p1
trans p1 e p1
trans p1 o p0
end
ta even-a-leaves
labels a b
states e o
final e
delta e a even-o-nonempty
delta o a odd-o-or-empty
delta e b even-o
delta o b odd-o
end
";

    pub(crate) fn even_a_leaves() -> TreeAutomaton {
        parse_tree_automata(EVEN_A_LEAVES).unwrap().remove(0)
    }

    pub(crate) fn a_leaves(t: &UnrankedTree) -> usize {
        (0..t.size())
            .filter(|&v| t.children(v).is_empty() && t.label_name(v) == "a")
            .count()
    }

    #[test]
    fn even_a_leaves_counts() {
        let ta = even_a_leaves();
        assert!(ta.is_deterministic());
        assert!(ta.is_sibling_invariant());
        let alphabet = Arc::new(vec!["a".to_string(), "b".to_string()]);
        for t in enumerate_unordered_trees(alphabet, 5) {
            let want = a_leaves(&t) % 2 == 0;
            for o in sibling_orders(&t, &Guards::default()).unwrap() {
                assert_eq!(ta.run(&t, Some(&o)).unwrap().accepted, want, "{}", t.to_text());
            }
            assert_eq!(ta.accepts_unordered(&t).unwrap(), want);
        }
    }

    #[test]
    fn run_reports_states_and_failures() {
        let ta = even_a_leaves();
        let t = parse_tree("a(b, b)", None).unwrap();
        let r = ta.run(&t, None).unwrap();
        assert!(r.accepted);
        assert_eq!(r.states, Some(vec![0, 0, 0]));
        // A leaf-only automaton: delta(q, a) = {ε} for q only.
        let eps = "dfa eps\nalphabet q\nstates 0 1\ninitial 0\naccepting 0\ntrans 0 q 1\ntrans 1 q 1\nend\n\
                   ta leaf\nlabels a\nstates q\nfinal q\ndelta q a eps\nend\n";
        let leaf = parse_tree_automata(eps).unwrap().remove(0);
        assert!(leaf.run(&parse_tree("a", None).unwrap(), None).unwrap().accepted);
        let r = leaf.run(&parse_tree("a(a)", None).unwrap(), None).unwrap();
        assert!(!r.accepted);
        assert_eq!(r.failure, Some(0));
        assert!(matches!(
            leaf.run(&parse_tree("b", None).unwrap(), None),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn nondeterministic_runs_use_state_sets() {
        // Both states accept every word: guess-anything automaton.
        let all = "dfa all\nalphabet x y\nstates 0\ninitial 0\naccepting 0\ntrans 0 x 0\ntrans 0 y 0\nend\n\
                   ta guess\nlabels a\nstates x y\nfinal y\ndelta x a all\ndelta y a all\nend\n";
        let ta = parse_tree_automata(all).unwrap().remove(0);
        let o = ta.overlap().unwrap();
        assert_eq!((o.first, o.second, o.word.len()), (0, 1, 0));
        let r = ta.run(&parse_tree("a(a)", None).unwrap(), None).unwrap();
        assert!(r.accepted);
        assert_eq!(r.states, None);
    }

    #[test]
    fn order_sensitive_automaton_is_rejected() {
        // Children must read x* y*.
        let text = "dfa xy\nalphabet x y\nstates 0 1 2\ninitial 0\naccepting 0 1\n\
                    trans 0 x 0\ntrans 0 y 1\ntrans 1 x 2\ntrans 1 y 1\ntrans 2 x 2\ntrans 2 y 2\nend\n\
                    ta ord\nlabels a b\nstates x y\nfinal x\ndelta x a xy\ndelta y b xy\nend\n";
        let ta = parse_tree_automata(text).unwrap().remove(0);
        assert!(!ta.is_sibling_invariant());
        let (q, a, w) = ta.invariance_violation().unwrap();
        assert_eq!((q, a, w.as_str()), (0, 0, "xy/yx"));
        assert!(matches!(
            ta.accepts_unordered(&parse_tree("a", None).unwrap()),
            Err(Error::NotSiblingInvariant { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let ta = even_a_leaves();
        let back = parse_tree_automata(&ta.to_text()).unwrap().remove(0);
        assert_eq!(back.states(), ta.states());
        let alphabet = Arc::new(vec!["a".to_string(), "b".to_string()]);
        for t in enumerate_unordered_trees(alphabet, 4) {
            assert_eq!(back.run(&t, None).unwrap(), ta.run(&t, None).unwrap());
        }
        let err = parse_tree_automata("ta x\nlabels a\nstates q\ndelta q a nope\nend\n").unwrap_err();
        assert!(err.to_string().contains("unknown dfa `nope`"));
    }
}
