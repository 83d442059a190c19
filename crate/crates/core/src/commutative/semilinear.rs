use std::collections::BTreeSet;
use std::fmt;

use super::Dfa;
use crate::config::Guards;
use crate::error::{Error, Result};

/// `S[k,p] = { k + n·p : n ≥ 0 }`; period 0 is the singleton `{k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Progression {
    pub offset: u64,
    pub period: u64,
}

impl Progression {
    pub fn new(offset: u64, period: u64) -> Self {
        Progression { offset, period }
    }

    pub fn contains(&self, m: u64) -> bool {
        m >= self.offset
            && if self.period == 0 {
                m == self.offset
            } else {
                (m - self.offset) % self.period == 0
            }
    }
}

impl fmt::Display for Progression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S[{},{}]", self.offset, self.period)
    }
}

/// A finite union of products of progressions, one per letter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemilinearSet {
    arity: usize,
    tuples: BTreeSet<Vec<Progression>>,
}

impl SemilinearSet {
    pub fn empty(arity: usize) -> Self {
        SemilinearSet {
            arity,
            tuples: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, tuple: Vec<Progression>) -> Result<()> {
        if tuple.len() != self.arity {
            return Err(Error::InvalidArgument(format!(
                "tuple of length {} in a set of arity {}",
                tuple.len(),
                self.arity
            )));
        }
        self.tuples.insert(tuple);
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Vec<Progression>> {
        self.tuples.iter()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

impl fmt::Display for SemilinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .tuples
            .iter()
            .map(|t| format!("({})", t.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Whether some tuple of `s` contains `v` componentwise.
pub fn semilinear_membership(s: &SemilinearSet, v: &[u64]) -> Result<bool> {
    if v.len() != s.arity {
        return Err(Error::InvalidArgument(format!(
            "vector of length {} against arity {}",
            v.len(),
            s.arity
        )));
    }
    Ok(s.tuples.iter().any(|t| t.iter().zip(v).all(|(p, &m)| p.contains(m))))
}

/// Letter counts of a word over `r` letters.
pub fn parikh_vector(word: &[usize], r: usize) -> Vec<u64> {
    let mut v = vec![0u64; r];
    for &a in word {
        v[a] += 1;
    }
    v
}

/// Walks `letter` from `start` until the path closes into a cycle. Returns
/// the visited states and the index where the cycle begins.
fn lasso(d: &Dfa, start: usize, letter: usize) -> (Vec<usize>, usize) {
    let mut path = Vec::new();
    let mut seen = vec![usize::MAX; d.state_count()];
    let mut q = start;
    while seen[q] == usize::MAX {
        seen[q] = path.len();
        path.push(q);
        q = d.step(q, letter);
    }
    (path, seen[q])
}

/// Exponents `n` with `start -letter^n-> target`, as progressions.
fn reach_lengths(d: &Dfa, start: usize, letter: usize, target: impl Fn(usize) -> bool) -> Vec<Progression> {
    let (path, mu) = lasso(d, start, letter);
    let lambda = (path.len() - mu) as u64;
    path.iter()
        .enumerate()
        .filter(|&(_, &q)| target(q))
        .map(|(i, _)| Progression::new(i as u64, if i < mu { 0 } else { lambda }))
        .collect()
}

/// The lengths of accepted words of a one-letter DFA.
pub fn unary_semilinear(d: &Dfa) -> Result<Vec<Progression>> {
    if d.alphabet().len() != 1 {
        return Err(Error::AlphabetMismatch(format!(
            "expected a one-letter alphabet, found {}",
            d.alphabet().len()
        )));
    }
    Ok(reach_lengths(d, d.initial(), 0, |q| d.is_accepting(q)))
}

/// Letter-count characterization of a DFA: for each chain of states
/// `q0 -a1*-> q1 -a2*-> … -ar*-> qr` with `qr` accepting, the product of the
/// exponent sets. It describes the language exactly when the language is
/// closed under permutation.
pub fn parikh_decompose(d: &Dfa, require_commutative: bool, guards: &Guards) -> Result<SemilinearSet> {
    if require_commutative {
        if let Some(w) = d.witness_text() {
            return Err(Error::NotCommutative(w));
        }
    }
    let m = d.minimize();
    let r = m.alphabet().len();
    let sequences = (m.state_count() as u128).checked_pow(r as u32).unwrap_or(u128::MAX);
    if sequences > guards.parikh_max_sequences as u128 {
        return Err(Error::guard("parikh_max_sequences", guards.parikh_max_sequences as u128, sequences));
    }
    let mut out = SemilinearSet::empty(r);
    let mut chosen: Vec<Vec<Progression>> = Vec::with_capacity(r);
    chain(&m, m.initial(), 0, &mut chosen, &mut out);
    Ok(out)
}

fn chain(d: &Dfa, q: usize, i: usize, chosen: &mut Vec<Vec<Progression>>, out: &mut SemilinearSet) {
    let r = d.alphabet().len();
    if i == r {
        if d.is_accepting(q) {
            product(chosen, &mut Vec::with_capacity(r), out);
        }
        return;
    }
    let (path, _) = lasso(d, q, i);
    let mut targets = path.clone();
    targets.sort_unstable();
    for t in targets {
        chosen.push(reach_lengths(d, q, i, |x| x == t));
        chain(d, t, i + 1, chosen, out);
        chosen.pop();
    }
}

fn product(chosen: &[Vec<Progression>], cur: &mut Vec<Progression>, out: &mut SemilinearSet) {
    if cur.len() == chosen.len() {
        out.tuples.insert(cur.clone());
        return;
    }
    for &p in &chosen[cur.len()] {
        cur.push(p);
        product(chosen, cur, out);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unary(accepting: &[usize], trans: Vec<usize>) -> Dfa {
        Dfa::from_table("u", &["a"], 0, accepting, trans.into_iter().map(|t| vec![t]).collect()).unwrap()
    }

    fn show(ps: &[Progression]) -> String {
        ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn unary_lassos() {
        assert_eq!(show(&unary_semilinear(&unary(&[0], vec![1, 0])).unwrap()), "S[0,2]");
        assert_eq!(show(&unary_semilinear(&unary(&[1], vec![1, 2, 3, 1])).unwrap()), "S[1,3]");
        // {a, aaa}: a dead sink closes the lasso.
        let finite = unary(&[1, 3], vec![1, 2, 3, 4, 4]);
        assert_eq!(show(&unary_semilinear(&finite).unwrap()), "S[1,0] S[3,0]");
        let at_least_two = unary(&[2], vec![1, 2, 2]);
        assert_eq!(show(&unary_semilinear(&at_least_two).unwrap()), "S[2,1]");
    }

    #[test]
    fn two_counters() {
        // |w|_a even and |w|_b = 1 mod 3; state = 3·(a mod 2) + (b mod 3).
        let trans = (0..6).map(|q| vec![(q + 3) % 6, q / 3 * 3 + (q % 3 + 1) % 3]).collect();
        let d = Dfa::from_table("m", &["a", "b"], 0, &[1], trans).unwrap();
        let s = parikh_decompose(&d, true, &Guards::default()).unwrap();
        assert_eq!(s.to_string(), "{(S[0,2], S[1,3])}");
        assert!(semilinear_membership(&s, &[4, 7]).unwrap());
        assert!(!semilinear_membership(&s, &[3, 1]).unwrap());
        assert!(semilinear_membership(&s, &[1]).is_err());
        assert!(!semilinear_membership(&SemilinearSet::empty(2), &[0, 0]).unwrap());
    }

    #[test]
    fn epsilon_only() {
        let d = Dfa::from_table("eps", &["a", "b"], 0, &[0], vec![vec![1, 1], vec![1, 1]]).unwrap();
        let s = parikh_decompose(&d, true, &Guards::default()).unwrap();
        assert_eq!(s.to_string(), "{(S[0,0], S[0,0])}");
    }

    #[test]
    fn requires_commutativity_when_asked() {
        let d = Dfa::from_table("ab", &["a", "b"], 0, &[0, 1], vec![vec![0, 1], vec![2, 1], vec![2, 2]]).unwrap();
        assert_eq!(
            parikh_decompose(&d, true, &Guards::default()).unwrap_err(),
            Error::NotCommutative("ab/ba".into())
        );
        // Without the flag the partitioned-word family is still produced.
        let s = parikh_decompose(&d, false, &Guards::default()).unwrap();
        assert!(semilinear_membership(&s, &[1, 1]).unwrap());
    }

    #[test]
    fn guard_on_state_sequences() {
        let g = Guards {
            parikh_max_sequences: 3,
            ..Guards::default()
        };
        let trans = (0..6).map(|q| vec![(q + 3) % 6, q / 3 * 3 + (q % 3 + 1) % 3]).collect();
        let d = Dfa::from_table("m", &["a", "b"], 0, &[1], trans).unwrap();
        assert!(parikh_decompose(&d, false, &g).unwrap_err().is_guard());
    }
}
