//! Finite relational structures, linear orders and unranked trees.

mod enumerate;
mod ops;
mod order;
pub mod text;
mod tree;

pub use enumerate::{canonical_form, enumerate_structures, is_canonical, StructureEnumerator};
pub use ops::{direct_product, disjoint_union, lex_product_order, PART_LEFT, PART_RIGHT};
pub use order::{enumerate_orders, next_permutation, LinearOrder};
pub use tree::{
    enumerate_unordered_trees, sibling_orders, tree_vocabulary, EdgeSemantics, SiblingOrder,
    UnrankedTree,
};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Name of the auxiliary linear-order symbol.
pub const ORDER: &str = "<";
/// One-step child relation of a tree encoding.
pub const CHILD: &str = "child";
/// Sibling-order relation of a tree encoding.
pub const SIB: &str = "sib";
/// Prefix of label and part predicates.
pub const PART_PREFIX: &str = "P_";

const MAX_RELATION_BITS: usize = 1 << 24;

fn is_reserved(name: &str) -> bool {
    name == ORDER || name == CHILD || name == SIB || name.starts_with(PART_PREFIX)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelSym {
    pub name: String,
    pub arity: usize,
}

/// A relational vocabulary: relation symbols with positive arities plus
/// constant symbols, all names distinct.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    relations: Vec<RelSym>,
    constants: Vec<String>,
}

impl Vocabulary {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a user vocabulary. Reserved names (`<`, `child`, `sib`, `P_*`)
    /// are rejected; they only enter through the dedicated constructors.
    pub fn new<R, S>(relations: R, constants: &[&str]) -> Result<Self>
    where
        R: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut v = Vocabulary::empty();
        for (name, arity) in relations {
            let name = name.into();
            if is_reserved(&name) {
                return Err(Error::ReservedSymbol(name));
            }
            v.push_relation(name, arity)?;
        }
        for c in constants {
            if is_reserved(c) {
                return Err(Error::ReservedSymbol(c.to_string()));
            }
            v.push_constant(c.to_string())?;
        }
        Ok(v)
    }

    fn name_taken(&self, name: &str) -> bool {
        self.relations.iter().any(|r| r.name == name) || self.constants.iter().any(|c| c == name)
    }

    fn push_relation(&mut self, name: String, arity: usize) -> Result<()> {
        if arity == 0 {
            return Err(Error::InvalidStructure(format!("relation `{name}` has arity 0")));
        }
        if name.is_empty() {
            return Err(Error::InvalidStructure("empty relation name".into()));
        }
        if self.name_taken(&name) {
            return Err(Error::DuplicateSymbol(name));
        }
        self.relations.push(RelSym { name, arity });
        Ok(())
    }

    fn push_constant(&mut self, name: String) -> Result<()> {
        if self.name_taken(&name) {
            return Err(Error::DuplicateSymbol(name));
        }
        self.constants.push(name);
        Ok(())
    }

    /// Adds a relation symbol, reserved names included. Crate-internal: only
    /// the designated constructors introduce reserved symbols.
    pub(crate) fn with_relation(&self, name: &str, arity: usize) -> Result<Self> {
        let mut v = self.clone();
        v.push_relation(name.to_string(), arity)?;
        Ok(v)
    }

    pub(crate) fn from_parts(relations: Vec<RelSym>, constants: Vec<String>) -> Result<Self> {
        let mut v = Vocabulary::empty();
        for r in relations {
            v.push_relation(r.name, r.arity)?;
        }
        for c in constants {
            v.push_constant(c)?;
        }
        Ok(v)
    }

    pub fn relations(&self) -> &[RelSym] {
        &self.relations
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }

    pub fn has_order(&self) -> bool {
        self.relation_index(ORDER).is_some()
    }

    /// The vocabulary with the given relation removed (no-op when absent).
    pub fn without(&self, name: &str) -> Self {
        Vocabulary {
            relations: self.relations.iter().filter(|r| r.name != name).cloned().collect(),
            constants: self.constants.clone(),
        }
    }

    /// Parses a compact listing such as `E/2 P/1 c` (relations carry an
    /// arity, bare names are constants; commas and spaces both separate).
    pub fn parse_compact(text: &str) -> Result<Self> {
        let mut rels: Vec<(String, usize)> = Vec::new();
        let mut consts: Vec<String> = Vec::new();
        for tok in text.split([',', ' ']).filter(|t| !t.is_empty()) {
            match tok.split_once('/') {
                Some((n, a)) => {
                    let arity = a.parse().map_err(|_| {
                        Error::InvalidArgument(format!("bad arity in `{tok}`"))
                    })?;
                    rels.push((n.to_string(), arity));
                }
                None => consts.push(tok.to_string()),
            }
        }
        let c: Vec<&str> = consts.iter().map(String::as_str).collect();
        Vocabulary::new(rels, &c)
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for r in &self.relations {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}/{}", r.name, r.arity)?;
        }
        for c in &self.constants {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(c)?;
        }
        if first {
            f.write_str("(empty)")?;
        }
        Ok(())
    }
}

/// Dense interpretation of one relation over a domain of fixed size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    arity: usize,
    size: usize,
    bits: Vec<u64>,
}

impl Relation {
    fn new(arity: usize, size: usize) -> Result<Self> {
        let cells = size
            .checked_pow(arity as u32)
            .filter(|&c| c <= MAX_RELATION_BITS)
            .ok_or_else(|| Error::InvalidStructure("relation table too large".into()))?;
        Ok(Relation {
            arity,
            size,
            bits: vec![0; cells.div_ceil(64)],
        })
    }

    #[inline]
    fn index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &t| acc * self.size + t)
    }

    #[inline]
    pub fn holds(&self, tuple: &[usize]) -> bool {
        let i = self.index(tuple);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, tuple: &[usize], value: bool) {
        let i = self.index(tuple);
        if value {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// All tuples in lexicographic order.
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        let cells = self.size.pow(self.arity as u32);
        let mut out = Vec::new();
        for i in 0..cells {
            if self.bits[i / 64] >> (i % 64) & 1 == 1 {
                let mut t = vec![0; self.arity];
                let mut rem = i;
                for slot in t.iter_mut().rev() {
                    *slot = rem % self.size;
                    rem /= self.size;
                }
                out.push(t);
            }
        }
        out
    }
}

/// A finite structure with domain `{0, …, size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    vocab: Arc<Vocabulary>,
    size: usize,
    rels: Vec<Relation>,
    consts: Vec<usize>,
}

impl Structure {
    /// A structure with all relations empty and every constant at element 0.
    pub fn new(vocab: Arc<Vocabulary>, size: usize) -> Result<Self> {
        if size == 0 && !vocab.constants().is_empty() {
            return Err(Error::InvalidStructure(
                "the empty structure cannot interpret constants".into(),
            ));
        }
        let rels = vocab
            .relations()
            .iter()
            .map(|r| Relation::new(r.arity, size))
            .collect::<Result<Vec<_>>>()?;
        let consts = vec![0; vocab.constants().len()];
        Ok(Structure {
            vocab,
            size,
            rels,
            consts,
        })
    }

    /// A structure over the empty vocabulary.
    pub fn pure_set(size: usize) -> Self {
        Structure::new(Arc::new(Vocabulary::empty()), size).expect("empty vocabulary")
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_arc(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, idx: usize) -> &Relation {
        &self.rels[idx]
    }

    #[inline]
    pub fn holds(&self, rel: usize, tuple: &[usize]) -> bool {
        self.rels[rel].holds(tuple)
    }

    pub fn constant(&self, idx: usize) -> usize {
        self.consts[idx]
    }

    pub fn constants(&self) -> &[usize] {
        &self.consts
    }

    fn check_tuple(&self, rel: usize, tuple: &[usize]) -> Result<()> {
        let sym = &self.vocab.relations()[rel];
        if tuple.len() != sym.arity {
            return Err(Error::ArityMismatch {
                name: sym.name.clone(),
                expected: sym.arity,
                got: tuple.len(),
            });
        }
        if let Some(&bad) = tuple.iter().find(|&&t| t >= self.size) {
            return Err(Error::InvalidStructure(format!(
                "element {bad} outside domain of size {}",
                self.size
            )));
        }
        Ok(())
    }

    pub fn set(&mut self, rel: usize, tuple: &[usize], value: bool) -> Result<()> {
        if rel >= self.rels.len() {
            return Err(Error::InvalidStructure(format!("no relation #{rel}")));
        }
        self.check_tuple(rel, tuple)?;
        self.rels[rel].set(tuple, value);
        Ok(())
    }

    pub fn insert(&mut self, rel_name: &str, tuple: &[usize]) -> Result<()> {
        let rel = self
            .vocab
            .relation_index(rel_name)
            .ok_or_else(|| Error::UnknownSymbol(rel_name.to_string()))?;
        self.set(rel, tuple, true)
    }

    pub fn set_constant(&mut self, name: &str, value: usize) -> Result<()> {
        let idx = self
            .vocab
            .constant_index(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        if value >= self.size {
            return Err(Error::InvalidStructure(format!(
                "constant `{name}` = {value} outside domain of size {}",
                self.size
            )));
        }
        self.consts[idx] = value;
        Ok(())
    }

    /// Adds a (possibly reserved) relation with the given tuples.
    pub(crate) fn with_relation<I>(&self, name: &str, arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let vocab = Arc::new(self.vocab.with_relation(name, arity)?);
        let mut rels = self.rels.clone();
        let mut r = Relation::new(arity, self.size)?;
        for t in tuples {
            if t.len() != arity || t.iter().any(|&e| e >= self.size) {
                return Err(Error::InvalidStructure(format!("bad tuple for `{name}`")));
            }
            r.set(&t, true);
        }
        rels.push(r);
        Ok(Structure {
            vocab,
            size: self.size,
            rels,
            consts: self.consts.clone(),
        })
    }

    /// The expansion `(A, <)` with `<` interpreted as the given strict order.
    pub fn with_order(&self, order: &LinearOrder) -> Result<Self> {
        if order.len() != self.size {
            return Err(Error::InvalidOrder(format!(
                "order over {} elements for a structure of size {}",
                order.len(),
                self.size
            )));
        }
        let perm = order.as_slice();
        let mut tuples = Vec::with_capacity(self.size * self.size.saturating_sub(1) / 2);
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                tuples.push(vec![perm[i], perm[j]]);
            }
        }
        self.with_relation(ORDER, 2, tuples)
    }

    /// Drops one relation symbol (used to strip auxiliary relations).
    pub fn without_relation(&self, name: &str) -> Self {
        match self.vocab.relation_index(name) {
            None => self.clone(),
            Some(idx) => {
                let mut rels = self.rels.clone();
                rels.remove(idx);
                Structure {
                    vocab: Arc::new(self.vocab.without(name)),
                    size: self.size,
                    rels,
                    consts: self.consts.clone(),
                }
            }
        }
    }

    /// Renames relation symbols (the renaming must be injective on names).
    pub fn rename_relations(&self, map: &[(&str, &str)]) -> Result<Self> {
        let relations: Vec<RelSym> = self
            .vocab
            .relations()
            .iter()
            .map(|r| {
                let name = map
                    .iter()
                    .find(|(from, _)| *from == r.name)
                    .map(|(_, to)| to.to_string())
                    .unwrap_or_else(|| r.name.clone());
                RelSym { name, arity: r.arity }
            })
            .collect();
        let vocab = Vocabulary::from_parts(relations, self.vocab.constants().to_vec())?;
        Ok(Structure {
            vocab: Arc::new(vocab),
            size: self.size,
            rels: self.rels.clone(),
            consts: self.consts.clone(),
        })
    }

    /// Isomorphic copy in which element `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.size);
        let rels = self
            .rels
            .iter()
            .map(|r| {
                let mut out = Relation::new(r.arity, self.size).expect("same shape");
                for t in r.tuples() {
                    let mapped: Vec<usize> = t.iter().map(|&e| perm[e]).collect();
                    out.set(&mapped, true);
                }
                out
            })
            .collect();
        Structure {
            vocab: self.vocab.clone(),
            size: self.size,
            rels,
            consts: self.consts.iter().map(|&c| perm[c]).collect(),
        }
    }

    /// Relabels so that the element at position `i` of `order` becomes `i`.
    pub fn relabeled_by(&self, order: &LinearOrder) -> Self {
        let mut perm = vec![0; self.size];
        for (pos, &e) in order.as_slice().iter().enumerate() {
            perm[e] = pos;
        }
        self.permuted(&perm)
    }

    /// Extracts the strict order interpreted by `<`, if the symbol is present
    /// and is a strict linear order.
    pub fn order(&self) -> Option<LinearOrder> {
        let idx = self.vocab.relation_index(ORDER)?;
        let mut below: Vec<(usize, usize)> = (0..self.size)
            .map(|a| ((0..self.size).filter(|&b| self.holds(idx, &[b, a])).count(), a))
            .collect();
        below.sort_unstable();
        let perm: Vec<usize> = below.iter().map(|&(_, a)| a).collect();
        let order = LinearOrder::new(perm).ok()?;
        let expected = Structure::new(self.vocab.clone(), self.size)
            .ok()?
            .without_relation(ORDER)
            .with_order(&order)
            .ok()?;
        let idx2 = expected.vocab.relation_index(ORDER)?;
        (expected.rels[idx2] == self.rels[idx]).then_some(order)
    }
}
