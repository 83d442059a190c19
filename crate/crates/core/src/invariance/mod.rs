//! Order-invariant types as connected components of the k-flip relation,
//! computed inside a bounded universe of structures.
//!
//! Nodes are ordered rank-k types, that is types of expansions `(A, aux)`
//! where `aux` is a linear order or a sibling order. Two nodes are joined
//! when one underlying structure realizes both. Components are the
//! invariant types relative to the universe.

mod check;

pub use check::{check_invariance, check_tree_invariance, query_membership, tree_query_membership, Counterexample, Verdict};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::logic::Logic;
use crate::structures::{
    enumerate_orders, enumerate_structures, enumerate_unordered_trees, sibling_orders, tree_vocabulary,
    EdgeSemantics, LinearOrder, Structure, UnrankedTree, Vocabulary,
};
use crate::types::{rank_type, Params, TypeId, TypeRegistry};

/// The auxiliary relations whose choice must not matter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuxClass {
    LinearOrders,
    SiblingOrders { alphabet: Arc<Vec<String>> },
}

impl fmt::Display for AuxClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuxClass::LinearOrders => write!(f, "linear-orders"),
            AuxClass::SiblingOrders { alphabet } => write!(f, "sibling-orders[{}]", alphabet.join(",")),
        }
    }
}

/// Index of a component in a [`FlipPartition`]. Components are numbered by
/// the smallest content hash among their member types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InvariantTypeId(pub u32);

impl fmt::Display for InvariantTypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inv{}", self.0)
    }
}

/// One realized ordered type with its first witness.
#[derive(Debug, Clone)]
pub struct OrderedTypeNode {
    pub type_id: TypeId,
    pub hash: [u8; 32],
    /// The expansion, carrying `<` or `sib` as an ordinary relation.
    pub witness: Structure,
}

#[derive(Debug, Clone)]
pub struct FlipPartition {
    vocab: Arc<Vocabulary>,
    k: usize,
    logic: Logic,
    aux: AuxClass,
    bound: usize,
    registry: TypeRegistry,
    nodes: Vec<OrderedTypeNode>,
    by_hash: HashMap<[u8; 32], usize>,
    component: Vec<InvariantTypeId>,
    /// Smallest member hash per component.
    names: Vec<[u8; 32]>,
    single_expansion: bool,
}

/// Ordered types depend on the auxiliary relation only through atoms that
/// mention two pinned terms; with at most one term there is nothing to see.
fn aux_irrelevant(k: usize, constants: usize) -> bool {
    k + constants <= 1
}

const CHUNK: usize = 16;

fn hex(h: &[u8]) -> String {
    h.iter().map(|b| format!("{b:02x}")).collect()
}

impl FlipPartition {
    /// Partition over every structure of size at most `bound` (up to
    /// isomorphism) expanded by all linear orders.
    pub fn build(vocab: Arc<Vocabulary>, k: usize, logic: Logic, bound: usize, guards: &Guards) -> Result<Self> {
        let mut universe = Vec::new();
        for n in 0..=bound {
            universe.extend(enumerate_structures(vocab.clone(), n, true, guards)?);
        }
        Self::build_over(vocab, k, logic, bound, universe, guards)
    }

    /// Partition over an explicit list of underlying structures, expanded by
    /// all linear orders. `bound` is recorded as the universe bound.
    pub fn build_over(
        vocab: Arc<Vocabulary>,
        k: usize,
        logic: Logic,
        bound: usize,
        universe: Vec<Structure>,
        guards: &Guards,
    ) -> Result<Self> {
        let single = aux_irrelevant(k, vocab.constants().len());
        let mut groups = Vec::with_capacity(universe.len());
        for a in &universe {
            if a.vocab() != vocab.as_ref() {
                return Err(Error::VocabularyMismatch(format!("{} vs {}", a.vocab(), vocab)));
            }
            let orders = if single {
                vec![LinearOrder::identity(a.size())]
            } else {
                enumerate_orders(a.size(), guards)?
            };
            // Relabeling along the order makes isomorphic ordered expansions
            // literally equal, so they share one cache entry.
            let expansions: Vec<Structure> = orders
                .iter()
                .map(|o| a.relabeled_by(o).with_order(&LinearOrder::identity(a.size())))
                .collect::<Result<_>>()?;
            groups.push(expansions);
        }
        Self::from_groups(vocab, k, logic, AuxClass::LinearOrders, bound, groups, guards)
    }

    /// Partition over all unordered trees of at most `bound` nodes, expanded
    /// by all sibling orders.
    pub fn build_trees(
        alphabet: Arc<Vec<String>>,
        k: usize,
        logic: Logic,
        bound: usize,
        guards: &Guards,
    ) -> Result<Self> {
        let trees = enumerate_unordered_trees(alphabet.clone(), bound);
        Self::build_trees_over(alphabet, k, logic, bound, &trees, guards)
    }

    pub fn build_trees_over(
        alphabet: Arc<Vec<String>>,
        k: usize,
        logic: Logic,
        bound: usize,
        trees: &[UnrankedTree],
        guards: &Guards,
    ) -> Result<Self> {
        let vocab = Arc::new(tree_vocabulary(&alphabet, false)?);
        let single = aux_irrelevant(k, 0);
        let mut groups = Vec::with_capacity(trees.len());
        for t in trees {
            let orders = if single {
                vec![t.written_order()]
            } else {
                sibling_orders(t, guards)?
            };
            let mut expansions = Vec::with_capacity(orders.len());
            for o in &orders {
                let (r, _) = t.reordered(o)?;
                expansions.push(r.to_structure(Some(&r.written_order()), EdgeSemantics::Child)?);
            }
            groups.push(expansions);
        }
        Self::from_groups(vocab, k, logic, AuxClass::SiblingOrders { alphabet }, bound, groups, guards)
    }

    fn from_groups(
        vocab: Arc<Vocabulary>,
        k: usize,
        logic: Logic,
        aux: AuxClass,
        bound: usize,
        groups: Vec<Vec<Structure>>,
        guards: &Guards,
    ) -> Result<Self> {
        let single_expansion = aux_irrelevant(k, vocab.constants().len());
        // Distinct expansions in first-seen order.
        let mut slot: HashMap<&Structure, usize> = HashMap::new();
        let mut distinct: Vec<&Structure> = Vec::new();
        let mut group_slots: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
        for g in &groups {
            let mut ids = Vec::with_capacity(g.len());
            for e in g {
                let next = distinct.len();
                let id = *slot.entry(e).or_insert_with(|| {
                    distinct.push(e);
                    next
                });
                ids.push(id);
            }
            group_slots.push(ids);
        }

        // Types are computed in private registries per fixed-size chunk and
        // imported in order, so the result does not depend on the thread count.
        let partial: Vec<(TypeRegistry, Vec<TypeId>)> = distinct
            .par_chunks(CHUNK)
            .map(|part| -> Result<_> {
                let mut reg = TypeRegistry::new();
                let ids = part
                    .iter()
                    .map(|s| rank_type(&mut reg, s, &Params::none(), k, logic, guards))
                    .collect::<Result<Vec<_>>>()?;
                Ok((reg, ids))
            })
            .collect::<Result<_>>()?;

        let mut registry = TypeRegistry::new();
        let mut nodes: Vec<OrderedTypeNode> = Vec::new();
        let mut node_of: HashMap<TypeId, usize> = HashMap::new();
        let mut slot_node = Vec::with_capacity(distinct.len());
        let mut pos = 0;
        for (reg, ids) in &partial {
            for &id in ids {
                let t = registry.import(reg, id);
                let next = nodes.len();
                let n = *node_of.entry(t).or_insert_with(|| {
                    nodes.push(OrderedTypeNode {
                        type_id: t,
                        hash: reg.hash(id),
                        witness: distinct[pos].clone(),
                    });
                    next
                });
                slot_node.push(n);
                pos += 1;
            }
        }

        let mut uf = UnionFind::<usize>::new(nodes.len());
        for ids in &group_slots {
            for w in ids.windows(2) {
                uf.union(slot_node[w[0]], slot_node[w[1]]);
            }
        }
        let mut min_hash: HashMap<usize, [u8; 32]> = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            let root = uf.find(i);
            let e = min_hash.entry(root).or_insert(n.hash);
            if n.hash < *e {
                *e = n.hash;
            }
        }
        let mut names: Vec<[u8; 32]> = min_hash.values().copied().collect();
        names.sort_unstable();
        let rank_of: HashMap<[u8; 32], u32> = names.iter().enumerate().map(|(i, h)| (*h, i as u32)).collect();
        let component = (0..nodes.len())
            .map(|i| InvariantTypeId(rank_of[&min_hash[&uf.find(i)]]))
            .collect();
        let by_hash = nodes.iter().enumerate().map(|(i, n)| (n.hash, i)).collect();
        Ok(FlipPartition {
            vocab,
            k,
            logic,
            aux,
            bound,
            registry,
            nodes,
            by_hash,
            component,
            names,
            single_expansion,
        })
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn logic(&self) -> Logic {
        self.logic
    }

    pub fn aux(&self) -> &AuxClass {
        &self.aux
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn registry(&self) -> &TypeRegistry {
        &self.registry
    }

    pub fn nodes(&self) -> &[OrderedTypeNode] {
        &self.nodes
    }

    pub fn component_of_node(&self, node: usize) -> InvariantTypeId {
        self.component[node]
    }

    pub fn component_count(&self) -> usize {
        self.names.len()
    }

    /// Stable name of a component: the leading hex digits of its smallest
    /// member hash.
    pub fn component_name(&self, id: InvariantTypeId) -> String {
        hex(&self.names[id.0 as usize][..8])
    }

    /// Whether only one expansion per structure was needed because the
    /// auxiliary relation is invisible at this rank.
    /// The expansion realizing the component's smallest member type.
    pub fn component_witness(&self, id: InvariantTypeId) -> &Structure {
        let name = self.names[id.0 as usize];
        &self.nodes[self.by_hash[&name]].witness
    }

    pub fn used_single_expansion(&self) -> bool {
        self.single_expansion
    }

    fn lookup(&self, s: &Structure) -> Result<InvariantTypeId> {
        let mut reg = TypeRegistry::new();
        let t = rank_type(&mut reg, s, &Params::none(), self.k, self.logic, &Guards::permissive())?;
        match self.by_hash.get(&reg.hash(t)) {
            Some(&n) => Ok(self.component[n]),
            None => Err(Error::OutsideUniverse {
                size: s.size(),
                bound: self.bound,
            }),
        }
    }

    /// The component of `a` expanded by its identity order. Any order gives
    /// the same answer when `a` lies inside the universe.
    pub fn invariant_type_of(&self, a: &Structure) -> Result<InvariantTypeId> {
        self.invariant_type_under(a, &LinearOrder::identity(a.size()))
    }

    /// The component of `(a, order)`.
    pub fn invariant_type_under(&self, a: &Structure, order: &LinearOrder) -> Result<InvariantTypeId> {
        if self.aux != AuxClass::LinearOrders {
            return Err(Error::InvalidArgument("partition is over sibling orders".into()));
        }
        if a.vocab() != self.vocab.as_ref() {
            return Err(Error::VocabularyMismatch(format!("{} vs {}", a.vocab(), self.vocab)));
        }
        if a.size() > self.bound {
            return Err(Error::OutsideUniverse {
                size: a.size(),
                bound: self.bound,
            });
        }
        self.lookup(&a.with_order(order)?)
    }

    /// The component of a tree under its written sibling order.
    pub fn tree_invariant_type_of(&self, t: &UnrankedTree) -> Result<InvariantTypeId> {
        let alphabet = match &self.aux {
            AuxClass::SiblingOrders { alphabet } => alphabet,
            AuxClass::LinearOrders => return Err(Error::InvalidArgument("partition is over linear orders".into())),
        };
        if t.alphabet() != alphabet.as_slice() {
            return Err(Error::AlphabetMismatch(format!("{:?} vs {:?}", t.alphabet(), alphabet)));
        }
        if t.size() > self.bound {
            return Err(Error::OutsideUniverse {
                size: t.size(),
                bound: self.bound,
            });
        }
        self.lookup(&t.to_structure(Some(&t.written_order()), EdgeSemantics::Child)?)
    }

    /// Deterministic text dump: one block per component, member hashes
    /// sorted.
    pub fn dump(&self) -> String {
        let mut out = format!(
            "partition logic={} k={} aux={} bound={} vocab={}\n",
            self.logic, self.k, self.aux, self.bound, self.vocab
        );
        let mut members: Vec<Vec<&OrderedTypeNode>> = vec![Vec::new(); self.names.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            members[self.component[i].0 as usize].push(n);
        }
        for (c, ms) in members.iter_mut().enumerate() {
            ms.sort_by_key(|n| n.hash);
            out.push_str(&format!(
                "component {} members={}\n",
                self.component_name(InvariantTypeId(c as u32)),
                ms.len()
            ));
            for n in ms.iter() {
                out.push_str(&format!("  type {} size={}\n", hex(&n.hash), n.witness.size()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Vocabulary;

    fn empty() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::empty())
    }

    #[test]
    fn rank_one_empty_vocabulary() {
        let g = Guards::default();
        let p = FlipPartition::build(empty(), 1, Logic::Fo, 3, &g).unwrap();
        assert!(p.used_single_expansion());
        // Empty versus non-empty.
        assert_eq!(p.component_count(), 2);
        let ids: Vec<_> = (0..=3).map(|n| p.invariant_type_of(&Structure::pure_set(n)).unwrap()).collect();
        assert_ne!(ids[0], ids[1]);
        assert_eq!(ids[1], ids[3]);
    }

    #[test]
    fn unary_rank_zero_merges_expansions() {
        let g = Guards::default();
        let v = Arc::new(Vocabulary::new([("P", 1)], &[]).unwrap());
        let p = FlipPartition::build(v.clone(), 0, Logic::Fo, 2, &g).unwrap();
        let mut a = Structure::new(v, 2).unwrap();
        a.insert("P", &[0]).unwrap();
        let x = p.invariant_type_under(&a, &LinearOrder::identity(2)).unwrap();
        let y = p.invariant_type_under(&a, &LinearOrder::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn expansions_of_one_structure_share_a_component() {
        let g = Guards::default();
        let v = Arc::new(Vocabulary::new([("P", 1)], &[]).unwrap());
        let p = FlipPartition::build(v.clone(), 2, Logic::Fo, 3, &g).unwrap();
        for n in 0..=3 {
            for a in enumerate_structures(v.clone(), n, false, &g).unwrap() {
                let ids: Vec<_> = enumerate_orders(n, &g)
                    .unwrap()
                    .iter()
                    .map(|o| p.invariant_type_under(&a, o).unwrap())
                    .collect();
                assert!(ids.windows(2).all(|w| w[0] == w[1]));
            }
        }
        assert!(matches!(
            p.invariant_type_of(&Structure::new(v, 4).unwrap()),
            Err(Error::OutsideUniverse { size: 4, bound: 3 })
        ));
    }

    #[test]
    fn build_is_deterministic_and_dumps() {
        let g = Guards::default();
        let a = FlipPartition::build(empty(), 2, Logic::Mso, 4, &g).unwrap();
        let b = FlipPartition::build(empty(), 2, Logic::Mso, 4, &g).unwrap();
        assert_eq!(a.dump(), b.dump());
        assert!(a.dump().starts_with("partition logic=MSO k=2 aux=linear-orders bound=4"));
    }

    #[test]
    fn tree_partition_ignores_sibling_order() {
        let g = Guards::default();
        let alphabet = Arc::new(vec!["a".to_string(), "b".to_string()]);
        let p = FlipPartition::build_trees(alphabet.clone(), 2, Logic::Fo, 4, &g).unwrap();
        for t in enumerate_unordered_trees(alphabet, 4) {
            let ids: Vec<_> = sibling_orders(&t, &g)
                .unwrap()
                .iter()
                .map(|o| p.tree_invariant_type_of(&t.reordered(o).unwrap().0).unwrap())
                .collect();
            assert!(ids.windows(2).all(|w| w[0] == w[1]));
        }
    }
}
