use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::TreeAutomaton;
use crate::commutative::Dfa;
use crate::config::Guards;
use crate::error::{Error, Result};
use crate::invariance::FlipPartition;
use crate::logic::Logic;
use crate::structures::{enumerate_unordered_trees, next_permutation, SiblingOrder, UnrankedTree};

/// Two trees with the same root label and the same multiset of child
/// states but different root states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub label: String,
    pub children: Vec<usize>,
    pub first: (usize, UnrankedTree),
    pub second: (usize, UnrankedTree),
}

/// The automaton computing sibling-invariant types on trees up to a size
/// bound, with the observed transition table and its self-checks.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub automaton: TreeAutomaton,
    pub partition: FlipPartition,
    pub bound: usize,
    /// Every tree of the universe with its state.
    pub trees: Vec<(UnrankedTree, usize)>,
    /// (root label, sorted child states) to root state, with a witness tree.
    pub table: BTreeMap<(usize, Vec<usize>), (usize, usize)>,
    pub conflicts: Vec<Conflict>,
    pub permutation_checks: usize,
    /// Trees where reordering the root's children changed the root state.
    pub permutation_failures: Vec<UnrankedTree>,
    /// Largest number of children seen at a node.
    pub max_children: usize,
}

impl Synthesis {
    pub fn is_consistent(&self) -> bool {
        self.conflicts.is_empty() && self.permutation_failures.is_empty()
    }

    pub fn state_count(&self) -> usize {
        self.automaton.states().len()
    }
}

fn check_guards(alphabet: &[String], k: usize, bound: usize, guards: &Guards) -> Result<()> {
    if alphabet.len() > guards.synth_max_alphabet {
        return Err(Error::guard("synth_max_alphabet", guards.synth_max_alphabet as u128, alphabet.len() as u128));
    }
    if k > guards.synth_max_rank {
        return Err(Error::guard("synth_max_rank", guards.synth_max_rank as u128, k as u128));
    }
    if bound > guards.synth_max_nodes {
        return Err(Error::guard("synth_max_nodes", guards.synth_max_nodes as u128, bound as u128));
    }
    Ok(())
}

/// Count vectors over `states` letters with total at most `cap`, indexed
/// densely, plus one overflow state at the end.
struct CountSpace {
    vectors: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl CountSpace {
    fn new(states: usize, cap: usize) -> Self {
        let mut vectors = Vec::new();
        let mut cur = vec![0; states];
        fn fill(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            for c in 0..=left {
                cur[i] = c;
                fill(i + 1, left - c, cur, out);
            }
            cur[i] = 0;
        }
        fill(0, cap, &mut cur, &mut vectors);
        let index = vectors.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        CountSpace { vectors, index }
    }

    fn overflow(&self) -> usize {
        self.vectors.len()
    }

    fn dfa(&self, name: &str, letters: &[String], accept: impl Fn(&[usize]) -> bool) -> Result<Dfa> {
        let n = self.vectors.len() + 1;
        let mut trans = Vec::with_capacity(n);
        for v in &self.vectors {
            let row = (0..letters.len())
                .map(|a| {
                    let mut w = v.clone();
                    w[a] += 1;
                    *self.index.get(&w).unwrap_or(&self.overflow())
                })
                .collect();
            trans.push(row);
        }
        trans.push(vec![self.overflow(); letters.len()]);
        let mut accepting: Vec<bool> = self.vectors.iter().map(|v| accept(v)).collect();
        accepting.push(false);
        let states = (0..n).map(|i| format!("c{i}")).collect();
        Dfa::new(name, letters.to_vec(), states, 0, accepting, trans)
    }
}

/// Builds the automaton whose states are the sibling-invariant rank-`k`
/// types realized by trees of at most `bound` nodes.
pub fn synthesize_invariant_type_ta(
    alphabet: Arc<Vec<String>>,
    k: usize,
    logic: Logic,
    bound: usize,
    guards: &Guards,
) -> Result<Synthesis> {
    check_guards(&alphabet, k, bound, guards)?;
    let universe = enumerate_unordered_trees(alphabet.clone(), bound);
    let partition = FlipPartition::build_trees_over(alphabet.clone(), k, logic, bound, &universe, guards)?;
    let state_count = partition.component_count();
    let mut state_of: HashMap<String, usize> = HashMap::new();
    let mut trees = Vec::with_capacity(universe.len());
    for t in &universe {
        let s = partition.tree_invariant_type_of(t)?.0 as usize;
        state_of.insert(t.canonical_text(), s);
        trees.push((t.clone(), s));
    }

    let subtree_state = |t: &UnrankedTree, v: usize| -> Result<usize> {
        let sub = subtree(t, v)?;
        state_of
            .get(&sub.canonical_text())
            .copied()
            .ok_or_else(|| Error::InvalidTree(format!("subtree {} outside the universe", sub.to_text())))
    };

    let mut table: BTreeMap<(usize, Vec<usize>), (usize, usize)> = BTreeMap::new();
    let mut conflicts = Vec::new();
    let mut permutation_checks = 0;
    let mut permutation_failures = Vec::new();
    let mut max_children = 0;
    for (i, (t, s)) in trees.iter().enumerate() {
        let kids = t.children(0);
        max_children = max_children.max(kids.len());
        let mut child_states = kids.iter().map(|&c| subtree_state(t, c)).collect::<Result<Vec<_>>>()?;
        child_states.sort_unstable();
        let key = (t.label(0), child_states.clone());
        match table.get(&key) {
            None => {
                table.insert(key, (*s, i));
            }
            Some(&(other, j)) if other != *s => conflicts.push(Conflict {
                label: t.label_name(0).to_string(),
                children: child_states.clone(),
                first: (other, trees[j].0.clone()),
                second: (*s, t.clone()),
            }),
            _ => {}
        }
        // Every rearrangement of the root's children must keep the state.
        let mut perm: Vec<usize> = (0..kids.len()).collect();
        let mut groups = t.written_order().groups().to_vec();
        while next_permutation(&mut perm) {
            groups[0] = perm.iter().map(|&p| kids[p]).collect();
            let (r, _) = t.reordered(&SiblingOrder::new(t, groups.clone())?)?;
            permutation_checks += 1;
            if partition.tree_invariant_type_of(&r)?.0 as usize != *s {
                permutation_failures.push(r);
                break;
            }
        }
    }

    let letters: Vec<String> = (0..state_count).map(|i| format!("t{i}")).collect();
    let space = CountSpace::new(state_count, max_children);
    let mut delta = vec![vec![None; alphabet.len()]; state_count];
    for (q, row) in delta.iter_mut().enumerate() {
        for (a, slot) in row.iter_mut().enumerate() {
            let accept = |v: &[usize]| {
                let mut ms = Vec::new();
                for (s, &c) in v.iter().enumerate() {
                    ms.extend(std::iter::repeat(s).take(c));
                }
                table.get(&(a, ms)).is_some_and(|&(r, _)| r == q)
            };
            if table.iter().any(|(&(la, _), &(r, _))| la == a && r == q) {
                *slot = Some(space.dfa(&format!("h.t{q}.{}", alphabet[a]), &letters, accept)?);
            }
        }
    }
    let automaton = TreeAutomaton::new(
        &format!("types-{}-k{}-n{}", logic, k, bound).to_lowercase(),
        alphabet.to_vec(),
        letters,
        vec![true; state_count],
        delta,
    )?;
    Ok(Synthesis {
        automaton,
        partition,
        bound,
        trees,
        table,
        conflicts,
        permutation_checks,
        permutation_failures,
        max_children,
    })
}

fn subtree(t: &UnrankedTree, v: usize) -> Result<UnrankedTree> {
    let kids = t
        .children(v)
        .iter()
        .map(|&c| subtree(t, c))
        .collect::<Result<Vec<_>>>()?;
    UnrankedTree::node(t.label_name(v), &kids, t.alphabet_arc().clone())
}

/// Transitions of `small` that change meaning in `large`, which must be a
/// build over a larger universe with the same alphabet and rank. States of
/// `small` must map to single states of `large` through shared trees.
pub fn compare_syntheses(small: &Synthesis, large: &Synthesis) -> Vec<String> {
    let mut problems = Vec::new();
    let large_state: HashMap<String, usize> = large.trees.iter().map(|(t, s)| (t.canonical_text(), *s)).collect();
    let mut map: HashMap<usize, usize> = HashMap::new();
    for (t, s) in &small.trees {
        match large_state.get(&t.canonical_text()) {
            None => problems.push(format!("tree {} missing from the larger universe", t.to_text())),
            Some(&l) => {
                if let Some(&prev) = map.get(s) {
                    if prev != l {
                        problems.push(format!("state t{s} splits into t{prev} and t{l} (tree {})", t.to_text()));
                    }
                } else {
                    map.insert(*s, l);
                }
            }
        }
    }
    for ((a, ms), &(r, _)) in &small.table {
        let Some(mapped) = ms.iter().map(|s| map.get(s).copied()).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let mut mapped = mapped;
        mapped.sort_unstable();
        match (large.table.get(&(*a, mapped)), map.get(&r)) {
            (Some(&(lr, _)), Some(&mr)) if lr == mr => {}
            (got, want) => problems.push(format!(
                "transition ({}, {:?}) maps to {:?} instead of {:?}",
                small.automaton.labels()[*a],
                ms,
                got.map(|g| g.0),
                want
            )),
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    fn guards() -> Guards {
        Guards {
            synth_max_nodes: 6,
            ..Guards::default()
        }
    }

    #[test]
    fn rank_zero_single_letter() {
        let s = synthesize_invariant_type_ta(Arc::new(vec!["a".into()]), 0, Logic::Mso, 4, &guards()).unwrap();
        assert_eq!(s.state_count(), 1);
        assert!(s.is_consistent());
        for (t, _) in &s.trees {
            assert!(s.automaton.run(t, None).unwrap().accepted);
        }
    }

    #[test]
    fn rank_one_two_letters() {
        let ab = Arc::new(vec!["a".to_string(), "b".to_string()]);
        let small = synthesize_invariant_type_ta(ab.clone(), 1, Logic::Fo, 5, &guards()).unwrap();
        assert!(small.is_consistent(), "{:?}", small.conflicts);
        assert!(small.permutation_checks > 0);
        assert!(small.automaton.is_sibling_invariant());
        assert!(small.automaton.is_deterministic());
        // The automaton reproduces the state of every tree it was built from.
        for (t, s) in &small.trees {
            assert_eq!(small.automaton.run(t, None).unwrap().states.unwrap()[0], *s);
        }
        let large = synthesize_invariant_type_ta(ab, 1, Logic::Fo, 6, &guards()).unwrap();
        assert_eq!(compare_syntheses(&small, &large), Vec::<String>::new());
    }

    #[test]
    fn guards_apply() {
        let ab = Arc::new(vec!["a".to_string(), "b".to_string(), "c".to_string()]);
        let e = synthesize_invariant_type_ta(ab, 1, Logic::Fo, 3, &Guards::default()).unwrap_err();
        assert!(e.is_guard());
    }
}
