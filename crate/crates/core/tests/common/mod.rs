#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;

use ordinv::structures::{Structure, UnrankedTree, Vocabulary};

pub fn graphs() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::new([("E", 2)], &[]).unwrap())
}

pub fn graphs_with_p() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::new([("E", 2), ("P", 1)], &[]).unwrap())
}

pub fn unary() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::new([("P", 1)], &[]).unwrap())
}

pub fn ab() -> Arc<Vec<String>> {
    Arc::new(vec!["a".to_string(), "b".to_string()])
}

/// Random structure over `vocab` of size in `sizes`; cells drawn from a bit
/// stream long enough for the largest size.
pub fn structure(vocab: Arc<Vocabulary>, sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Structure> {
    let max = *sizes.end();
    let cells: usize = vocab.relations().iter().map(|r| max.pow(r.arity as u32)).sum();
    (sizes, prop::collection::vec(any::<bool>(), cells)).prop_map(move |(n, bits)| {
        let mut s = Structure::new(vocab.clone(), n).unwrap();
        let mut it = bits.into_iter();
        for (ri, r) in vocab.relations().iter().enumerate() {
            let count = n.pow(r.arity as u32);
            for c in 0..count {
                let mut tuple = vec![0; r.arity];
                let mut x = c;
                for slot in tuple.iter_mut().rev() {
                    *slot = x % n;
                    x /= n;
                }
                if it.next().unwrap_or(false) {
                    s.set(ri, &tuple, true).unwrap();
                }
            }
        }
        s
    })
}

/// Random permutation of `0..n`.
pub fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

/// Random structure paired with a permutation of its domain.
pub fn structure_and_perm(
    vocab: Arc<Vocabulary>,
    sizes: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = (Structure, Vec<usize>)> {
    structure(vocab, sizes).prop_flat_map(|s| {
        let n = s.size();
        (Just(s), permutation(n))
    })
}

/// Random tree over {a, b} with at most `max` nodes, built by attaching each
/// new node to a random earlier one.
pub fn tree(max: usize) -> impl Strategy<Value = UnrankedTree> {
    (1..=max)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(any::<prop::sample::Index>(), n - 1),
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_map(|(parents, labels)| {
            let n = labels.len();
            let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (i, p) in parents.iter().enumerate() {
                kids[p.index(i + 1)].push(i + 1);
            }
            fn build(v: usize, kids: &[Vec<usize>], labels: &[bool]) -> UnrankedTree {
                let sub: Vec<UnrankedTree> = kids[v].iter().map(|&c| build(c, kids, labels)).collect();
                UnrankedTree::node(if labels[v] { "b" } else { "a" }, &sub, ab()).unwrap()
            }
            build(0, &kids, &labels)
        })
}
