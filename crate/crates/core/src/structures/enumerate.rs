use std::cmp::Ordering;
use std::sync::Arc;

use super::{next_permutation, Relation, Structure, Vocabulary};
use crate::config::Guards;
use crate::error::{Error, Result};

/// Lazily yields every structure of a fixed size (optionally only the
/// canonical representative of each isomorphism class).
pub struct StructureEnumerator {
    vocab: Arc<Vocabulary>,
    size: usize,
    up_to_iso: bool,
    cells: Vec<usize>,
    total_bits: u32,
    next_bits: u64,
    consts: Vec<usize>,
    done: bool,
}

impl StructureEnumerator {
    fn build(&self) -> Structure {
        let mut rels = Vec::with_capacity(self.cells.len());
        let mut offset = 0;
        for (r, sym) in self.vocab.relations().iter().enumerate() {
            let mut rel = Relation::new(sym.arity, self.size).expect("checked by guard");
            let cells = self.cells[r];
            for i in 0..cells {
                if self.next_bits >> (offset + i) & 1 == 1 {
                    rel.bits[i / 64] |= 1 << (i % 64);
                }
            }
            offset += cells;
            rels.push(rel);
        }
        Structure {
            vocab: self.vocab.clone(),
            size: self.size,
            rels,
            consts: self.consts.clone(),
        }
    }

    fn advance(&mut self) {
        // Constants vary fastest, then the relation bits.
        for c in self.consts.iter_mut() {
            *c += 1;
            if *c < self.size {
                return;
            }
            *c = 0;
        }
        self.next_bits += 1;
        if self.next_bits >> self.total_bits != 0 {
            self.done = true;
        }
    }
}

impl Iterator for StructureEnumerator {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        while !self.done {
            let s = self.build();
            self.advance();
            if !self.up_to_iso || is_canonical(&s) {
                return Some(s);
            }
        }
        None
    }
}

/// All structures of size exactly `n` over `vocab`.
pub fn enumerate_structures(
    vocab: Arc<Vocabulary>,
    n: usize,
    up_to_iso: bool,
    guards: &Guards,
) -> Result<StructureEnumerator> {
    let mut total: u128 = 0;
    let mut cells = Vec::new();
    for r in vocab.relations() {
        let c = (n as u128).pow(r.arity as u32);
        total += c;
        cells.push(c as usize);
    }
    if total > guards.enum_max_bits as u128 {
        return Err(Error::guard("enum_max_bits", guards.enum_max_bits, total));
    }
    let no_elements_for_constants = n == 0 && !vocab.constants().is_empty();
    Ok(StructureEnumerator {
        consts: vec![0; vocab.constants().len()],
        vocab,
        size: n,
        up_to_iso,
        cells,
        total_bits: total as u32,
        next_bits: 0,
        done: no_elements_for_constants,
    })
}

/// Whether `s` carries the lexicographically minimal encoding among all of
/// its relabelings. The encoding lists relation cells in declaration order
/// (tuples lexicographic), then constant values.
pub fn is_canonical(s: &Structure) -> bool {
    let n = s.size();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut inv = vec![0; n];
    while next_permutation(&mut perm) {
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        if compare_relabeled(s, &perm, &inv) == Ordering::Less {
            return false;
        }
    }
    true
}

/// The canonical representative of the isomorphism class of `s`.
pub fn canonical_form(s: &Structure) -> Structure {
    let mut perm: Vec<usize> = (0..s.size()).collect();
    let mut best = s.clone();
    while next_permutation(&mut perm) {
        let candidate = s.permuted(&perm);
        if compare_codes(&candidate, &best) == Ordering::Less {
            best = candidate;
        }
    }
    best
}

fn compare_codes(a: &Structure, b: &Structure) -> Ordering {
    for r in 0..a.vocab().relations().len() {
        let (ra, rb) = (a.relation(r), b.relation(r));
        let cells = a.size().pow(ra.arity() as u32);
        for i in 0..cells {
            let x = ra.bits[i / 64] >> (i % 64) & 1;
            let y = rb.bits[i / 64] >> (i % 64) & 1;
            if x != y {
                return x.cmp(&y);
            }
        }
    }
    a.constants().cmp(b.constants())
}

/// Compares the relabeling `i ↦ perm[i]` of `s` with `s` itself, cell by
/// cell with early exit.
fn compare_relabeled(s: &Structure, perm: &[usize], inv: &[usize]) -> Ordering {
    let n = s.size();
    let mut tuple = Vec::new();
    let mut source = Vec::new();
    for r in 0..s.vocab().relations().len() {
        let rel = s.relation(r);
        let arity = rel.arity();
        let cells = n.pow(arity as u32);
        tuple.clear();
        tuple.resize(arity, 0);
        source.clear();
        source.resize(arity, 0);
        for i in 0..cells {
            let mut rem = i;
            for slot in (0..arity).rev() {
                tuple[slot] = rem % n;
                rem /= n;
            }
            for (d, &t) in source.iter_mut().zip(tuple.iter()) {
                *d = inv[t];
            }
            let x = rel.holds(&source) as u8;
            let y = (rel.bits[i / 64] >> (i % 64) & 1) as u8;
            if x != y {
                return x.cmp(&y);
            }
        }
    }
    let relabeled: Vec<usize> = s.constants().iter().map(|&c| perm[c]).collect();
    relabeled.as_slice().cmp(s.constants())
}
