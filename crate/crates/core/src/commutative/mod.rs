//! Deterministic finite automata, permutation-closure testing and the
//! decomposition of commutative regular languages into arithmetic
//! progressions on letter counts.
//!
//! Text format:
//!
//! ```text
//! dfa M
//! alphabet a b
//! states 0 1 2
//! initial 0
//! accepting 2
//! trans 0 a 1
//! end
//! ```

mod semilinear;

pub use semilinear::{parikh_decompose, parikh_vector, semilinear_membership, unary_semilinear, Progression, SemilinearSet};

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    name: String,
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: usize,
    accepting: Vec<bool>,
    /// `trans[q][a]`.
    trans: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn new(
        name: &str,
        alphabet: Vec<String>,
        states: Vec<String>,
        initial: usize,
        accepting: Vec<bool>,
        trans: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidArgument(format!("dfa `{name}` has no states")));
        }
        if initial >= n || accepting.len() != n || trans.len() != n {
            return Err(Error::InvalidArgument(format!("dfa `{name}` is malformed")));
        }
        for row in &trans {
            if row.len() != alphabet.len() || row.iter().any(|&t| t >= n) {
                return Err(Error::InvalidArgument(format!("dfa `{name}` has a partial or out-of-range transition")));
            }
        }
        for (i, a) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(a) {
                return Err(Error::DuplicateSymbol(a.clone()));
            }
        }
        for (i, q) in states.iter().enumerate() {
            if states[..i].contains(q) {
                return Err(Error::DuplicateSymbol(q.clone()));
            }
        }
        Ok(Dfa {
            name: name.to_string(),
            alphabet,
            states,
            initial,
            accepting,
            trans,
        })
    }

    /// Builds a DFA with states named `0..n`.
    pub fn from_table(name: &str, alphabet: &[&str], initial: usize, accepting: &[usize], trans: Vec<Vec<usize>>) -> Result<Self> {
        let n = trans.len();
        let mut acc = vec![false; n];
        for &q in accepting {
            if q >= n {
                return Err(Error::InvalidArgument(format!("accepting state {q} out of range")));
            }
            acc[q] = true;
        }
        Dfa::new(
            name,
            alphabet.iter().map(|s| s.to_string()).collect(),
            (0..n).map(|i| i.to_string()).collect(),
            initial,
            acc,
            trans,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn step(&self, q: usize, a: usize) -> usize {
        self.trans[q][a]
    }

    pub fn run_from(&self, q: usize, word: &[usize]) -> usize {
        word.iter().fold(q, |q, &a| self.trans[q][a])
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        self.accepting[self.run_from(self.initial, word)]
    }

    pub fn letter_index(&self, a: &str) -> Option<usize> {
        self.alphabet.iter().position(|x| x == a)
    }

    /// Letter indices of a word given by letter names.
    pub fn encode<S: AsRef<str>>(&self, word: &[S]) -> Result<Vec<usize>> {
        word.iter()
            .map(|a| self.letter_index(a.as_ref()).ok_or_else(|| Error::UnknownLabel(a.as_ref().to_string())))
            .collect()
    }

    /// Renders a word: letters concatenated when all are one character,
    /// otherwise joined by `.`; `ε` for the empty word.
    pub fn word_text(&self, word: &[usize]) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        let sep = if self.alphabet.iter().all(|a| a.chars().count() == 1) { "" } else { "." };
        word.iter().map(|&a| self.alphabet[a].as_str()).collect::<Vec<_>>().join(sep)
    }

    /// Shortest words reaching each state, or `None` if unreachable.
    pub fn access_words(&self) -> Vec<Option<Vec<usize>>> {
        let mut out: Vec<Option<Vec<usize>>> = vec![None; self.state_count()];
        out[self.initial] = Some(Vec::new());
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for a in 0..self.alphabet.len() {
                let t = self.trans[q][a];
                if out[t].is_none() {
                    let mut w = out[q].clone().expect("visited");
                    w.push(a);
                    out[t] = Some(w);
                    queue.push_back(t);
                }
            }
        }
        out
    }

    /// The reachable part, states renumbered in breadth-first order.
    pub fn trim(&self) -> Dfa {
        let access = self.access_words();
        let mut order: Vec<usize> = (0..self.state_count()).filter(|&q| access[q].is_some()).collect();
        order.sort_by(|&p, &q| {
            let (wp, wq) = (access[p].as_ref().unwrap(), access[q].as_ref().unwrap());
            wp.len().cmp(&wq.len()).then_with(|| wp.cmp(wq))
        });
        let index: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        Dfa {
            name: self.name.clone(),
            alphabet: self.alphabet.clone(),
            states: order.iter().map(|&q| self.states[q].clone()).collect(),
            initial: 0,
            accepting: order.iter().map(|&q| self.accepting[q]).collect(),
            trans: order.iter().map(|&q| self.trans[q].iter().map(|t| index[t]).collect()).collect(),
        }
    }

    /// Equivalence class of every state under Moore refinement.
    fn state_classes(&self) -> Vec<usize> {
        let n = self.state_count();
        let mut class: Vec<usize> = self.accepting.iter().map(|&b| b as usize).collect();
        loop {
            let mut sig: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let mut next = vec![0; n];
            for q in 0..n {
                let key = (class[q], self.trans[q].iter().map(|&t| class[t]).collect());
                let len = sig.len();
                next[q] = *sig.entry(key).or_insert(len);
            }
            let before = class.iter().collect::<std::collections::HashSet<_>>().len();
            if sig.len() == before {
                return next;
            }
            class = next;
        }
    }

    /// The minimal complete DFA for the same language, states numbered in
    /// breadth-first order from the initial state.
    pub fn minimize(&self) -> Dfa {
        let t = self.trim();
        let class = t.state_classes();
        let classes = class.iter().max().map_or(0, |m| m + 1);
        let mut rep = vec![usize::MAX; classes];
        for q in 0..t.state_count() {
            if rep[class[q]] == usize::MAX {
                rep[class[q]] = q;
            }
        }
        let quotient = Dfa {
            name: t.name.clone(),
            alphabet: t.alphabet.clone(),
            states: rep.iter().map(|&q| t.states[q].clone()).collect(),
            initial: class[t.initial],
            accepting: rep.iter().map(|&q| t.accepting[q]).collect(),
            trans: rep.iter().map(|&q| t.trans[q].iter().map(|&s| class[s]).collect()).collect(),
        };
        quotient.trim()
    }

    /// A shortest word accepted from exactly one of `p` and `q`.
    fn distinguishing_suffix(&self, p: usize, q: usize) -> Option<Vec<usize>> {
        let mut seen = HashMap::new();
        seen.insert((p, q), Vec::new());
        let mut queue = VecDeque::from([(p, q)]);
        while let Some((x, y)) = queue.pop_front() {
            let w = seen[&(x, y)].clone();
            if self.accepting[x] != self.accepting[y] {
                return Some(w);
            }
            for a in 0..self.alphabet.len() {
                let next = (self.trans[x][a], self.trans[y][a]);
                if !seen.contains_key(&next) {
                    let mut w2 = w.clone();
                    w2.push(a);
                    seen.insert(next, w2);
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// Two words that differ by one adjacent swap, exactly one of which is
    /// in the language, or `None` if the language is closed under
    /// permutation.
    pub fn commutativity_witness(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let m = self.minimize();
        let access = m.access_words();
        let r = m.alphabet.len();
        for q in 0..m.state_count() {
            for a in 0..r {
                for b in a + 1..r {
                    let ab = m.run_from(q, &[a, b]);
                    let ba = m.run_from(q, &[b, a]);
                    if ab != ba {
                        let u = access[q].clone().expect("trimmed");
                        let v = m.distinguishing_suffix(ab, ba).expect("minimal");
                        let word = |x, y| [u.as_slice(), &[x, y], v.as_slice()].concat();
                        let (w1, w2) = (word(a, b), word(b, a));
                        return Some(if m.accepts(&w1) { (w1, w2) } else { (w2, w1) });
                    }
                }
            }
        }
        None
    }

    pub fn is_commutative(&self) -> bool {
        self.commutativity_witness().is_none()
    }

    /// `witness=u/v` text for a non-commutative DFA.
    pub fn witness_text(&self) -> Option<String> {
        self.commutativity_witness()
            .map(|(a, b)| format!("{}/{}", self.word_text(&a), self.word_text(&b)))
    }

    /// A shortest word accepted by both automata (same alphabet order).
    pub fn common_word(&self, other: &Dfa) -> Result<Option<Vec<usize>>> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(format!("{:?} vs {:?}", self.alphabet, other.alphabet)));
        }
        let start = (self.initial, other.initial);
        let mut seen: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();
        seen.insert(start, (usize::MAX, usize::MAX, usize::MAX));
        let mut queue = VecDeque::from([start]);
        while let Some((p, q)) = queue.pop_front() {
            if self.accepting[p] && other.accepting[q] {
                let mut word = Vec::new();
                let mut cur = (p, q);
                while cur != start {
                    let (pp, pq, a) = seen[&cur];
                    word.push(a);
                    cur = (pp, pq);
                }
                word.reverse();
                return Ok(Some(word));
            }
            for a in 0..self.alphabet.len() {
                let next = (self.trans[p][a], other.trans[q][a]);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(next) {
                    e.insert((p, q, a));
                    queue.push_back(next);
                }
            }
        }
        Ok(None)
    }

    pub fn is_empty(&self) -> bool {
        let access = self.access_words();
        !(0..self.state_count()).any(|q| access[q].is_some() && self.accepting[q])
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dfa {}", self.name);
        let _ = writeln!(s, "alphabet {}", self.alphabet.join(" "));
        let _ = writeln!(s, "states {}", self.states.join(" "));
        let _ = writeln!(s, "initial {}", self.states[self.initial]);
        let acc: Vec<&str> = (0..self.state_count())
            .filter(|&q| self.accepting[q])
            .map(|q| self.states[q].as_str())
            .collect();
        let _ = writeln!(s, "accepting {}", acc.join(" "));
        for q in 0..self.state_count() {
            for a in 0..self.alphabet.len() {
                let _ = writeln!(s, "trans {} {} {}", self.states[q], self.alphabet[a], self.states[self.trans[q][a]]);
            }
        }
        s.push_str("end\n");
        s
    }
}

#[derive(Default)]
struct DfaBlock {
    name: String,
    start: usize,
    alphabet: Option<Vec<String>>,
    states: Option<Vec<String>>,
    initial: Option<(String, usize)>,
    accepting: Vec<(String, usize)>,
    trans: Vec<(String, String, String, usize)>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::parse("dfa", line, 1, msg)
}

impl DfaBlock {
    fn finish(self) -> Result<Dfa> {
        let alphabet = self.alphabet.ok_or_else(|| perr(self.start, "missing `alphabet`"))?;
        let states = self.states.ok_or_else(|| perr(self.start, "missing `states`"))?;
        let idx = |q: &str, line: usize| {
            states
                .iter()
                .position(|s| s == q)
                .ok_or_else(|| perr(line, format!("unknown state `{q}`")))
        };
        let (init, iline) = self.initial.ok_or_else(|| perr(self.start, "missing `initial`"))?;
        let initial = idx(&init, iline)?;
        let mut accepting = vec![false; states.len()];
        for (q, line) in &self.accepting {
            accepting[idx(q, *line)?] = true;
        }
        let mut trans = vec![vec![usize::MAX; alphabet.len()]; states.len()];
        for (p, a, q, line) in &self.trans {
            let ai = alphabet
                .iter()
                .position(|x| x == a)
                .ok_or_else(|| perr(*line, format!("unknown letter `{a}`")))?;
            let pi = idx(p, *line)?;
            if trans[pi][ai] != usize::MAX {
                return Err(perr(*line, format!("duplicate transition for ({p}, {a})")));
            }
            trans[pi][ai] = idx(q, *line)?;
        }
        for (pi, row) in trans.iter().enumerate() {
            if let Some(ai) = row.iter().position(|&t| t == usize::MAX) {
                return Err(perr(
                    self.start,
                    format!("missing transition for ({}, {})", states[pi], alphabet[ai]),
                ));
            }
        }
        Dfa::new(&self.name, alphabet, states, initial, accepting, trans)
    }
}

/// Parses one line of a DFA block into `block`. Returns `Ok(false)` when
/// the keyword is not a DFA keyword.
fn dfa_line(block: &mut DfaBlock, head: &str, rest: &str, ln: usize) -> Result<bool> {
    let words: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
    match head {
        "alphabet" => block.alphabet = Some(words),
        "states" => block.states = Some(words),
        "initial" => {
            if words.len() != 1 {
                return Err(perr(ln, "`initial` takes one state"));
            }
            block.initial = Some((words[0].clone(), ln));
        }
        "accepting" => block.accepting.extend(words.into_iter().map(|w| (w, ln))),
        "trans" => {
            if words.len() != 3 {
                return Err(perr(ln, "`trans` takes: state letter state"));
            }
            block.trans.push((words[0].clone(), words[1].clone(), words[2].clone(), ln));
        }
        _ => return Ok(false),
    }
    Ok(true)
}

/// Splits `text` into `dfa … end` blocks and hands any other top-level line
/// to `other`. Comments start with `#`.
pub(crate) fn parse_dfa_blocks(
    text: &str,
    mut other: impl FnMut(&str, &str, usize) -> Result<()>,
) -> Result<Vec<Dfa>> {
    let mut out = Vec::new();
    let mut cur: Option<DfaBlock> = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match &mut cur {
            None if head == "dfa" => {
                if rest.is_empty() {
                    return Err(perr(ln, "missing dfa name"));
                }
                cur = Some(DfaBlock {
                    name: rest.to_string(),
                    start: ln,
                    ..Default::default()
                });
            }
            None => other(head, rest, ln)?,
            Some(_) if head == "end" => out.push(cur.take().expect("open block").finish()?),
            Some(b) => {
                if !dfa_line(b, head, rest, ln)? {
                    return Err(perr(ln, format!("unexpected `{head}` inside a dfa block")));
                }
            }
        }
    }
    if let Some(b) = cur {
        return Err(perr(b.start, format!("dfa `{}` is not closed by `end`", b.name)));
    }
    Ok(out)
}

/// Parses every DFA block in `text`.
pub fn parse_dfas(text: &str) -> Result<Vec<Dfa>> {
    parse_dfa_blocks(text, |head, _, ln| Err(perr(ln, format!("unexpected `{head}` outside a dfa block"))))
}

/// Parses a file holding exactly one DFA.
pub fn parse_dfa(text: &str) -> Result<Dfa> {
    let mut all = parse_dfas(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("one")),
        n => Err(perr(1, format!("expected one dfa, found {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn a_star_b_star() -> Dfa {
        Dfa::from_table("ab", &["a", "b"], 0, &[0, 1], vec![vec![0, 1], vec![2, 1], vec![2, 2]]).unwrap()
    }

    fn even_a() -> Dfa {
        Dfa::from_table("even-a", &["a", "b"], 0, &[0], vec![vec![1, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn commutativity() {
        assert_eq!(a_star_b_star().witness_text().as_deref(), Some("ab/ba"));
        assert!(even_a().is_commutative());
    }

    #[test]
    fn minimize_merges_equivalent_states() {
        // Four states counting a's mod 4, accepting the even ones.
        let d = Dfa::from_table(
            "m4",
            &["a"],
            0,
            &[0, 2],
            vec![vec![1], vec![2], vec![3], vec![0]],
        )
        .unwrap();
        let m = d.minimize();
        assert_eq!(m.state_count(), 2);
        for n in 0..10 {
            assert_eq!(m.accepts(&vec![0; n]), n % 2 == 0);
        }
        // Unreachable states are dropped.
        let u = Dfa::from_table("u", &["a"], 0, &[1], vec![vec![0], vec![1]]).unwrap();
        assert_eq!(u.minimize().state_count(), 1);
        assert!(u.is_empty());
    }

    #[test]
    fn text_round_trip() {
        let d = even_a();
        let back = parse_dfa(&d.to_text()).unwrap();
        assert_eq!(back, d);
        let err = parse_dfa("dfa M\nalphabet a\nstates 0\ninitial 0\nend\n").unwrap_err();
        assert_eq!(err.code(), "parse-error");
        let err = parse_dfa("dfa M\nalphabet a\nstates 0\ninitial 1\ntrans 0 a 0\nend\n").unwrap_err();
        assert!(err.to_string().contains("unknown state `1`"), "{err}");
    }

    #[test]
    fn common_words() {
        let d = a_star_b_star();
        let e = even_a();
        let w = d.common_word(&e).unwrap().unwrap();
        assert!(w.is_empty());
        let odd = Dfa::from_table("odd-a", &["a", "b"], 0, &[1], vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(odd.common_word(&e).unwrap(), None);
        assert_eq!(d.common_word(&odd).unwrap(), Some(vec![0]));
    }
}
