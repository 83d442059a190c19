//! Rank-k FO and MSO types as hash-consed canonical trees.
//!
//! A type node holds the atomic diagram of the pinned parameters, the set of
//! child types reachable by pinning one more element and, for MSO, the set of
//! child types reachable by pinning one more subset. Children are stored as
//! sorted, deduplicated id lists, so structural equality of nodes coincides
//! with equality of the canonical trees.

mod ef;
mod sentence;

pub use ef::ef_equivalent;
pub use sentence::materialize_type_sentence;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::logic::Logic;
use crate::structures::{enumerate_structures, Structure, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NodeKey {
    logic: Logic,
    rank: usize,
    vocab: u32,
    elems: usize,
    sets: usize,
    diagram: Vec<u64>,
    elem_children: Vec<TypeId>,
    set_children: Vec<TypeId>,
}

#[derive(Debug, Clone)]
struct Node {
    key: NodeKey,
    hash: [u8; 32],
}

/// Append-only interning table for type nodes.
#[derive(Debug, Default, Clone)]
pub struct TypeRegistry {
    nodes: Vec<Node>,
    index: HashMap<NodeKey, TypeId>,
    vocabs: Vec<Arc<Vocabulary>>,
    vocab_index: HashMap<Vocabulary, u32>,
}

/// Pinned parameters: elements and subsets of the domain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Params {
    pub elements: Vec<usize>,
    pub sets: Vec<Vec<usize>>,
}

impl Params {
    pub fn none() -> Self {
        Self::default()
    }
}

/// Number of diagram bits for `terms` pinned terms and `sets` pinned sets.
fn diagram_len(vocab: &Vocabulary, terms: usize, sets: usize) -> usize {
    let rel: usize = vocab.relations().iter().map(|r| terms.pow(r.arity as u32)).sum();
    rel + terms * terms.saturating_sub(1) / 2 + terms * sets
}

impl TypeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn vocab_id(&mut self, v: &Arc<Vocabulary>) -> u32 {
        if let Some(&id) = self.vocab_index.get(v.as_ref()) {
            return id;
        }
        let id = self.vocabs.len() as u32;
        self.vocabs.push(v.clone());
        self.vocab_index.insert(v.as_ref().clone(), id);
        id
    }

    fn intern(&mut self, key: NodeKey) -> TypeId {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let hash = self.hash_of(&key);
        let id = TypeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            key: key.clone(),
            hash,
        });
        self.index.insert(key, id);
        id
    }

    fn hash_of(&self, key: &NodeKey) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(format!(
            "{}|{}|{}|{}|{}|",
            key.logic,
            key.rank,
            key.elems,
            key.sets,
            self.vocabs[key.vocab as usize]
        ));
        for w in &key.diagram {
            h.update(w.to_le_bytes());
        }
        for (tag, kids) in [(b"E", &key.elem_children), (b"S", &key.set_children)] {
            h.update(tag);
            let mut hs: Vec<[u8; 32]> = kids.iter().map(|&c| self.nodes[c.index()].hash).collect();
            hs.sort_unstable();
            for x in hs {
                h.update(x);
            }
        }
        h.finalize().into()
    }

    /// Content hash of the canonical tree, stable across registries and runs.
    pub fn hash(&self, id: TypeId) -> [u8; 32] {
        self.nodes[id.index()].hash
    }

    /// Short hexadecimal rendering of [`TypeRegistry::hash`].
    pub fn hash_hex(&self, id: TypeId) -> String {
        self.nodes[id.index()].hash[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn logic(&self, id: TypeId) -> Logic {
        self.nodes[id.index()].key.logic
    }

    pub fn rank(&self, id: TypeId) -> usize {
        self.nodes[id.index()].key.rank
    }

    pub fn vocabulary(&self, id: TypeId) -> &Arc<Vocabulary> {
        &self.vocabs[self.nodes[id.index()].key.vocab as usize]
    }

    /// Numbers of pinned elements and pinned sets.
    pub fn profile(&self, id: TypeId) -> (usize, usize) {
        let k = &self.nodes[id.index()].key;
        (k.elems, k.sets)
    }

    pub fn element_children(&self, id: TypeId) -> &[TypeId] {
        &self.nodes[id.index()].key.elem_children
    }

    pub fn set_children(&self, id: TypeId) -> &[TypeId] {
        &self.nodes[id.index()].key.set_children
    }

    pub(crate) fn diagram(&self, id: TypeId) -> &[u64] {
        &self.nodes[id.index()].key.diagram
    }

    /// Deterministic nested-parenthesis text of the canonical tree. Children
    /// are sorted by their own serialization.
    pub fn serialize(&self, id: TypeId) -> String {
        let mut memo = HashMap::new();
        self.serialize_memo(id, &mut memo)
    }

    fn serialize_memo(&self, id: TypeId, memo: &mut HashMap<TypeId, String>) -> String {
        if let Some(s) = memo.get(&id) {
            return s.clone();
        }
        let k = &self.nodes[id.index()].key;
        let bits = diagram_len(&self.vocabs[k.vocab as usize], self.terms(k), k.sets);
        let diag: String = (0..bits)
            .map(|i| if k.diagram[i / 64] >> (i % 64) & 1 == 1 { '1' } else { '0' })
            .collect();
        let mut out = format!("({} {} {}:{} [{}]", k.logic, k.rank, k.elems, k.sets, diag);
        for (tag, kids) in [("E", &k.elem_children), ("S", &k.set_children)] {
            if k.rank == 0 || (tag == "S" && k.logic == Logic::Fo) {
                continue;
            }
            let mut parts: Vec<String> = kids.iter().map(|&c| self.serialize_memo(c, memo)).collect();
            parts.sort();
            out.push_str(&format!(" {tag}{{{}}}", parts.join(" ")));
        }
        out.push(')');
        memo.insert(id, out.clone());
        out
    }

    fn terms(&self, k: &NodeKey) -> usize {
        self.vocabs[k.vocab as usize].constants().len() + k.elems
    }

    /// Re-interns a type from another registry into this one.
    pub fn import(&mut self, other: &TypeRegistry, id: TypeId) -> TypeId {
        let mut memo = HashMap::new();
        self.import_memo(other, id, &mut memo)
    }

    fn import_memo(&mut self, other: &TypeRegistry, id: TypeId, memo: &mut HashMap<TypeId, TypeId>) -> TypeId {
        if let Some(&t) = memo.get(&id) {
            return t;
        }
        let k = &other.nodes[id.index()].key;
        let vocab = self.vocab_id(&other.vocabs[k.vocab as usize]);
        let mut map = |kids: &[TypeId], this: &mut TypeRegistry| {
            let mut v: Vec<TypeId> = kids.iter().map(|&c| this.import_memo(other, c, memo)).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let elem_children = map(&k.elem_children, self);
        let set_children = map(&k.set_children, self);
        let key = NodeKey {
            logic: k.logic,
            rank: k.rank,
            vocab,
            elems: k.elems,
            sets: k.sets,
            diagram: k.diagram.clone(),
            elem_children,
            set_children,
        };
        let t = self.intern(key);
        memo.insert(id, t);
        t
    }
}

fn check_guards(s: &Structure, k: usize, logic: Logic, guards: &Guards) -> Result<()> {
    let (max_size, max_rank, size_name, rank_name) = match logic {
        Logic::Fo => (guards.fo_max_size, guards.fo_max_rank, "fo_max_size", "fo_max_rank"),
        Logic::Mso => (guards.mso_max_size, guards.mso_max_rank, "mso_max_size", "mso_max_rank"),
    };
    if s.size() > max_size {
        return Err(Error::guard(size_name, max_size as u128, s.size() as u128));
    }
    if k > max_rank {
        return Err(Error::guard(rank_name, max_rank as u128, k as u128));
    }
    if logic == Logic::Mso && s.size() > 63 {
        return Err(Error::guard("mso_max_size", 63u128, s.size() as u128));
    }
    Ok(())
}

struct Computer<'a> {
    s: &'a Structure,
    reg: &'a mut TypeRegistry,
    logic: Logic,
    vocab: u32,
    memo: HashMap<(usize, Vec<usize>, Vec<u64>), TypeId>,
}

impl Computer<'_> {
    fn diagram(&self, elems: &[usize], sets: &[u64]) -> Vec<u64> {
        let s = self.s;
        let vocab = s.vocab();
        let mut terms: Vec<usize> = s.constants().to_vec();
        terms.extend_from_slice(elems);
        let m = terms.len();
        let len = diagram_len(vocab, m, sets.len());
        let mut bits = vec![0u64; len.div_ceil(64).max(1)];
        let mut i = 0;
        let mut push = |b: bool, i: &mut usize| {
            if b {
                bits[*i / 64] |= 1 << (*i % 64);
            }
            *i += 1;
        };
        let mut tuple = Vec::new();
        for (r, sym) in vocab.relations().iter().enumerate() {
            let cells = m.pow(sym.arity as u32);
            for c in 0..cells {
                tuple.clear();
                let mut rem = c;
                for _ in 0..sym.arity {
                    tuple.push(terms[rem % m]);
                    rem /= m;
                }
                tuple.reverse();
                push(s.holds(r, &tuple), &mut i);
            }
        }
        for a in 0..m {
            for b in a + 1..m {
                push(terms[a] == terms[b], &mut i);
            }
        }
        for &t in &terms {
            for &set in sets {
                push(set >> t & 1 == 1, &mut i);
            }
        }
        bits
    }

    fn compute(&mut self, k: usize, elems: &mut Vec<usize>, sets: &mut Vec<u64>) -> TypeId {
        let memo_key = (k, elems.clone(), sets.clone());
        if let Some(&t) = self.memo.get(&memo_key) {
            return t;
        }
        let diagram = self.diagram(elems, sets);
        let mut elem_children = Vec::new();
        let mut set_children = Vec::new();
        if k > 0 {
            for b in 0..self.s.size() {
                elems.push(b);
                elem_children.push(self.compute(k - 1, elems, sets));
                elems.pop();
            }
            if self.logic == Logic::Mso {
                for mask in 0..1u64 << self.s.size() {
                    sets.push(mask);
                    set_children.push(self.compute(k - 1, elems, sets));
                    sets.pop();
                }
            }
        }
        elem_children.sort_unstable();
        elem_children.dedup();
        set_children.sort_unstable();
        set_children.dedup();
        let t = self.reg.intern(NodeKey {
            logic: self.logic,
            rank: k,
            vocab: self.vocab,
            elems: elems.len(),
            sets: sets.len(),
            diagram,
            elem_children,
            set_children,
        });
        self.memo.insert(memo_key, t);
        t
    }
}

/// The rank-`k` type of `(s, params)` in `logic`.
pub fn rank_type(
    reg: &mut TypeRegistry,
    s: &Structure,
    params: &Params,
    k: usize,
    logic: Logic,
    guards: &Guards,
) -> Result<TypeId> {
    check_guards(s, k, logic, guards)?;
    let n = s.size();
    if let Some(&bad) = params.elements.iter().find(|&&e| e >= n) {
        return Err(Error::ParameterOutOfDomain(format!("element {bad} (size {n})")));
    }
    let mut sets = Vec::with_capacity(params.sets.len());
    for set in &params.sets {
        let mut mask = 0u64;
        for &e in set {
            if e >= n || e >= 64 {
                return Err(Error::ParameterOutOfDomain(format!("set element {e} (size {n})")));
            }
            mask |= 1 << e;
        }
        sets.push(mask);
    }
    if logic == Logic::Fo && !sets.is_empty() {
        return Err(Error::InvalidArgument("first-order types cannot pin sets".into()));
    }
    let vocab = reg.vocab_id(s.vocab_arc());
    let mut c = Computer {
        s,
        reg,
        logic,
        vocab,
        memo: HashMap::new(),
    };
    let mut elems = params.elements.clone();
    Ok(c.compute(k, &mut elems, &mut sets))
}

/// Every type realized by a structure of size at most `max_n`, with the
/// first witness found (sizes ascending, canonical enumeration order).
pub fn realized_types(
    reg: &mut TypeRegistry,
    vocab: Arc<Vocabulary>,
    k: usize,
    logic: Logic,
    max_n: usize,
    guards: &Guards,
) -> Result<Vec<(TypeId, Structure)>> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for n in 0..=max_n {
        for s in enumerate_structures(vocab.clone(), n, true, guards)? {
            let t = rank_type(reg, &s, &Params::none(), k, logic, guards)?;
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(t) {
                e.insert(out.len());
                out.push((t, s));
            }
        }
    }
    Ok(out)
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{LinearOrder, Vocabulary};

    fn tp(reg: &mut TypeRegistry, s: &Structure, k: usize, logic: Logic) -> TypeId {
        rank_type(reg, s, &Params::none(), k, logic, &Guards::default()).unwrap()
    }

    fn line(n: usize) -> Structure {
        Structure::pure_set(n).with_order(&LinearOrder::identity(n)).unwrap()
    }

    #[test]
    fn pure_sets() {
        let mut r = TypeRegistry::new();
        let p = Structure::pure_set;
        assert_eq!(tp(&mut r, &p(2), 1, Logic::Fo), tp(&mut r, &p(3), 1, Logic::Fo));
        assert_ne!(tp(&mut r, &p(1), 2, Logic::Fo), tp(&mut r, &p(2), 2, Logic::Fo));
        // One set move creates no pinned element, so MSO rank 1 also sees
        // only emptiness of the domain.
        assert_eq!(tp(&mut r, &p(2), 1, Logic::Mso), tp(&mut r, &p(3), 1, Logic::Mso));
        assert_eq!(tp(&mut r, &p(2), 2, Logic::Mso), tp(&mut r, &p(3), 2, Logic::Mso));
        assert_ne!(tp(&mut r, &p(2), 3, Logic::Mso), tp(&mut r, &p(3), 3, Logic::Mso));
        assert_ne!(tp(&mut r, &p(0), 1, Logic::Fo), tp(&mut r, &p(1), 1, Logic::Fo));
    }

    #[test]
    fn linear_orders() {
        let mut r = TypeRegistry::new();
        assert_eq!(tp(&mut r, &line(3), 2, Logic::Fo), tp(&mut r, &line(4), 2, Logic::Fo));
        assert_ne!(tp(&mut r, &line(2), 2, Logic::Fo), tp(&mut r, &line(3), 2, Logic::Fo));
    }

    #[test]
    fn realized_type_counts() {
        let g = Guards::default();
        let empty = Arc::new(Vocabulary::empty());
        let mut r = TypeRegistry::new();
        assert_eq!(realized_types(&mut r, empty.clone(), 0, Logic::Fo, 3, &g).unwrap().len(), 1);
        assert_eq!(realized_types(&mut r, empty, 1, Logic::Fo, 3, &g).unwrap().len(), 2);
        // Unary P at rank 1: which of P and its complement are non-empty,
        // plus the empty structure.
        let unary = Arc::new(Vocabulary::new([("P", 1)], &[]).unwrap());
        assert_eq!(realized_types(&mut r, unary, 1, Logic::Fo, 2, &g).unwrap().len(), 4);
    }

    #[test]
    fn parameters_and_guards() {
        let mut r = TypeRegistry::new();
        let s = line(3);
        let g = Guards::default();
        let first = Params {
            elements: vec![0],
            sets: vec![],
        };
        let last = Params {
            elements: vec![2],
            sets: vec![],
        };
        let a = rank_type(&mut r, &s, &first, 1, Logic::Fo, &g).unwrap();
        let b = rank_type(&mut r, &s, &last, 1, Logic::Fo, &g).unwrap();
        assert_ne!(a, b);
        assert_eq!(r.profile(a), (1, 0));
        let bad = Params {
            elements: vec![3],
            sets: vec![],
        };
        assert!(matches!(
            rank_type(&mut r, &s, &bad, 1, Logic::Fo, &g),
            Err(Error::ParameterOutOfDomain(_))
        ));
        assert!(rank_type(&mut r, &s, &Params::none(), 4, Logic::Mso, &g).unwrap_err().is_guard());
        assert!(rank_type(&mut r, &line(9), &Params::none(), 1, Logic::Fo, &g).unwrap_err().is_guard());
    }

    #[test]
    fn hashes_are_registry_independent() {
        let mut r1 = TypeRegistry::new();
        let mut r2 = TypeRegistry::new();
        // Different interning order in the two registries.
        tp(&mut r2, &line(2), 2, Logic::Mso);
        let a = tp(&mut r1, &line(3), 2, Logic::Mso);
        let b = tp(&mut r2, &line(3), 2, Logic::Mso);
        assert_eq!(r1.hash(a), r2.hash(b));
        assert_eq!(r1.serialize(a), r2.serialize(b));
        let c = r2.import(&r1, a);
        assert_eq!(c, b);
    }
}
