//! Composition tables for invariant types of disjoint unions and products.
//!
//! Component types are computed over the bare vocabulary. Union composites
//! are typed over the vocabulary enlarged by `P_left` and `P_right`; product
//! composites keep the bare vocabulary. The composite partition is built
//! over the composites that the factor universe actually produces.

mod lex;
mod transport;

pub use lex::{verify_lex_ef_lemma, LexReport};
pub use transport::{verify_flip_transport, TransportReport};

pub(crate) use crate::structures::text::format_compact as compact;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::invariance::{FlipPartition, InvariantTypeId};
use crate::logic::Logic;
use crate::structures::{
    direct_product, disjoint_union, enumerate_structures, LinearOrder, Structure, Vocabulary,
    PART_LEFT, PART_RIGHT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operation {
    Union,
    Product,
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operation::Union => "union",
            Operation::Product => "product",
        })
    }
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(Operation::Union),
            "product" => Ok(Operation::Product),
            other => Err(Error::InvalidArgument(format!("unknown operation `{other}`"))),
        }
    }
}

impl Operation {
    pub fn apply(self, a: &Structure, b: &Structure) -> Result<Structure> {
        match self {
            Operation::Union => disjoint_union(a, b),
            Operation::Product => direct_product(a, b),
        }
    }

    /// Order on the composite induced by factor orders: `A` before `B` for
    /// unions, lexicographic for products.
    pub fn combine_orders(self, a: &Structure, oa: &LinearOrder, b: &Structure, ob: &LinearOrder) -> Result<LinearOrder> {
        match self {
            Operation::Union => {
                let mut perm = oa.as_slice().to_vec();
                perm.extend(ob.as_slice().iter().map(|&e| e + a.size()));
                LinearOrder::new(perm)
            }
            Operation::Product => crate::structures::lex_product_order(oa, ob, a.size(), b.size()),
        }
    }

    fn min_factor_size(self) -> usize {
        match self {
            Operation::Union => 0,
            Operation::Product => 1,
        }
    }

    fn composite_bound(self, bound: usize) -> usize {
        match self {
            Operation::Union => 2 * bound,
            Operation::Product => bound * bound,
        }
    }
}

/// Validates the request and returns guards raised so that composites of
/// the requested bound can be typed.
pub(crate) fn fv_guards(op: Operation, k: usize, logic: Logic, bound: usize, guards: &Guards) -> Result<Guards> {
    if k > guards.fv_max_rank {
        return Err(Error::guard("fv_max_rank", guards.fv_max_rank as u128, k as u128));
    }
    match op {
        Operation::Product => {
            if logic != Logic::Fo {
                return Err(Error::Unsupported("product tables are first-order only".into()));
            }
            if bound > guards.fv_product_max_bound {
                return Err(Error::guard("fv_product_max_bound", guards.fv_product_max_bound as u128, bound as u128));
            }
        }
        Operation::Union => {
            if logic == Logic::Mso && k > 1 {
                return Err(Error::Unsupported("second-order union tables are limited to rank 1".into()));
            }
            if bound > guards.fv_union_max_bound {
                return Err(Error::guard("fv_union_max_bound", guards.fv_union_max_bound as u128, bound as u128));
            }
        }
    }
    let n = op.composite_bound(bound);
    let mut g = guards.clone();
    g.fo_max_size = g.fo_max_size.max(n);
    g.mso_max_size = g.mso_max_size.max(n);
    g.ef_max_size = g.ef_max_size.max(n);
    Ok(g)
}

/// Factor representatives up to isomorphism, sizes ascending.
pub(crate) fn factors(vocab: &Arc<Vocabulary>, min: usize, bound: usize, guards: &Guards) -> Result<Vec<Structure>> {
    let mut out = Vec::new();
    for n in min..=bound {
        out.extend(enumerate_structures(vocab.clone(), n, true, guards)?);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub value: InvariantTypeId,
    pub witness: (Structure, Structure),
}

/// A key reached with two different composite types.
#[derive(Debug, Clone)]
pub struct Violation {
    pub key: (InvariantTypeId, InvariantTypeId),
    pub first: Entry,
    pub second: Entry,
}

#[derive(Debug, Clone)]
pub struct CompositionTable {
    op: Operation,
    components: FlipPartition,
    composites: FlipPartition,
    entries: BTreeMap<(InvariantTypeId, InvariantTypeId), Entry>,
    pairs: usize,
    violations: Vec<Violation>,
}

/// Types every pair of factors of size at most `bound` and records the
/// composite type per pair of component types.
pub fn build_composition_table(
    op: Operation,
    vocab: Arc<Vocabulary>,
    k: usize,
    logic: Logic,
    bound: usize,
    guards: &Guards,
) -> Result<CompositionTable> {
    if !vocab.constants().is_empty() {
        return Err(Error::ConstantsPresent);
    }
    let g = fv_guards(op, k, logic, bound, guards)?;
    let components = FlipPartition::build(vocab.clone(), k, logic, bound, &g)?;
    let reps = factors(&vocab, op.min_factor_size(), bound, &g)?;
    let comp_types = reps
        .iter()
        .map(|a| components.invariant_type_of(a))
        .collect::<Result<Vec<_>>>()?;

    let pairs: Vec<(usize, usize)> = (0..reps.len()).flat_map(|i| (0..reps.len()).map(move |j| (i, j))).collect();
    let composites: Vec<Structure> = pairs
        .par_iter()
        .map(|&(i, j)| op.apply(&reps[i], &reps[j]))
        .collect::<Result<_>>()?;
    let mut seen = HashSet::new();
    let universe: Vec<Structure> = composites.iter().filter(|c| seen.insert(*c)).cloned().collect();
    let comp_vocab = match universe.first() {
        Some(c) => c.vocab_arc().clone(),
        None => return Err(Error::InvalidArgument("no factor pairs in range".into())),
    };
    let composite_partition = FlipPartition::build_over(comp_vocab, k, logic, op.composite_bound(bound), universe, &g)?;
    let values = composites
        .par_iter()
        .map(|c| composite_partition.invariant_type_of(c))
        .collect::<Result<Vec<_>>>()?;

    let mut entries: BTreeMap<(InvariantTypeId, InvariantTypeId), Entry> = BTreeMap::new();
    let mut violations = Vec::new();
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let key = (comp_types[i], comp_types[j]);
        let entry = Entry {
            value: values[p],
            witness: (reps[i].clone(), reps[j].clone()),
        };
        match entries.get(&key) {
            None => {
                entries.insert(key, entry);
            }
            Some(first) if first.value != entry.value => violations.push(Violation {
                key,
                first: first.clone(),
                second: entry,
            }),
            _ => {}
        }
    }
    Ok(CompositionTable {
        op,
        components,
        composites: composite_partition,
        entries,
        pairs: pairs.len(),
        violations,
    })
}

fn random_structure(vocab: &Arc<Vocabulary>, n: usize, rng: &mut ChaCha8Rng) -> Result<Structure> {
    let mut s = Structure::new(vocab.clone(), n)?;
    for (r, sym) in vocab.relations().iter().enumerate() {
        let cells = n.pow(sym.arity as u32);
        for mut code in 0..cells {
            let mut t = vec![0; sym.arity];
            for slot in t.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            if rng.gen_bool(0.5) {
                s.set(r, &t, true)?;
            }
        }
    }
    Ok(s)
}

/// Outcome of checking a table against freshly drawn factor pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl CompositionTable {
    pub fn operation(&self) -> Operation {
        self.op
    }

    pub fn rank(&self) -> usize {
        self.components.rank()
    }

    pub fn logic(&self) -> Logic {
        self.components.logic()
    }

    pub fn bound(&self) -> usize {
        self.components.bound()
    }

    pub fn composite_bound(&self) -> usize {
        self.composites.bound()
    }

    pub fn components(&self) -> &FlipPartition {
        &self.components
    }

    pub fn composites(&self) -> &FlipPartition {
        &self.composites
    }

    pub fn entries(&self) -> &BTreeMap<(InvariantTypeId, InvariantTypeId), Entry> {
        &self.entries
    }

    /// Number of factor pairs inspected.
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn is_functional(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn compose(&self, a: InvariantTypeId, b: InvariantTypeId) -> Result<InvariantTypeId> {
        self.entries.get(&(a, b)).map(|e| e.value).ok_or_else(|| {
            let name = |t: InvariantTypeId| {
                if (t.0 as usize) < self.components.component_count() {
                    self.components.component_name(t)
                } else {
                    t.to_string()
                }
            };
            Error::MissingKey(format!("({}, {})", name(a), name(b)))
        })
    }

    /// Composite type of an actual pair, computed directly.
    pub fn composite_type_of(&self, a: &Structure, b: &Structure) -> Result<InvariantTypeId> {
        self.composites.invariant_type_of(&self.op.apply(a, b)?)
    }

    /// Draws `samples` random labeled factor pairs and checks that the table
    /// predicts the composite type computed directly.
    pub fn replay(&self, samples: usize, seed: u64) -> Result<ReplayReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = self.components.vocab().clone();
        let lo = self.op.min_factor_size();
        let mut mismatches = Vec::new();
        for _ in 0..samples {
            let na = rng.gen_range(lo..=self.bound());
            let nb = rng.gen_range(lo..=self.bound());
            let a = random_structure(&vocab, na, &mut rng)?;
            let b = random_structure(&vocab, nb, &mut rng)?;
            let predicted = self.compose(self.components.invariant_type_of(&a)?, self.components.invariant_type_of(&b)?)?;
            let actual = self.composite_type_of(&a, &b)?;
            if predicted != actual {
                mismatches.push(format!(
                    "{} ; {} predicted {} found {}",
                    compact(&a),
                    compact(&b),
                    self.composites.component_name(predicted),
                    self.composites.component_name(actual)
                ));
            }
        }
        Ok(ReplayReport {
            checked: samples,
            mismatches,
        })
    }

    fn component_line(p: &FlipPartition, id: InvariantTypeId) -> String {
        format!("  {} witness={}", p.component_name(id), compact(&p.component_witness(id).without_relation("<")))
    }

    /// Deterministic text: rows sorted by component names.
    pub fn to_text(&self) -> String {
        let c = &self.components;
        let m = &self.composites;
        let mut out = format!(
            "fv-table op={} logic={} k={} bound={} composite-bound={}\n",
            self.op,
            c.logic(),
            c.rank(),
            c.bound(),
            m.bound()
        );
        out.push_str(&format!("component-vocabulary {}\n", c.vocab()));
        out.push_str(&format!("composite-vocabulary {}\n", m.vocab()));
        let mut names: Vec<String> = (0..c.component_count())
            .map(|i| Self::component_line(c, InvariantTypeId(i as u32)))
            .collect();
        names.sort();
        out.push_str(&format!("components {}\n", names.len()));
        for l in names {
            out.push_str(&l);
            out.push('\n');
        }
        let mut names: Vec<String> = (0..m.component_count())
            .map(|i| Self::component_line(m, InvariantTypeId(i as u32)))
            .collect();
        names.sort();
        out.push_str(&format!("composites {}\n", names.len()));
        for l in names {
            out.push_str(&l);
            out.push('\n');
        }
        let mut rows: Vec<String> = self
            .entries
            .iter()
            .map(|((a, b), e)| {
                format!(
                    "  {} {} -> {} witness={} ; {}",
                    c.component_name(*a),
                    c.component_name(*b),
                    m.component_name(e.value),
                    compact(&e.witness.0),
                    compact(&e.witness.1)
                )
            })
            .collect();
        rows.sort();
        out.push_str(&format!("entries {}\n", rows.len()));
        for r in rows {
            out.push_str(&r);
            out.push('\n');
        }
        out.push_str(&format!("pairs {}\n", self.pairs));
        out.push_str(&format!("violations {}\n", self.violations.len()));
        for v in &self.violations {
            out.push_str(&format!(
                "  {} {} -> {} via {} ; {} and {} via {} ; {}\n",
                c.component_name(v.key.0),
                c.component_name(v.key.1),
                m.component_name(v.first.value),
                compact(&v.first.witness.0),
                compact(&v.first.witness.1),
                m.component_name(v.second.value),
                compact(&v.second.witness.0),
                compact(&v.second.witness.1)
            ));
        }
        out
    }
}

/// Exchanges the two part predicates of a union composite.
pub fn swap_parts(s: &Structure) -> Result<Structure> {
    let (l, r) = match (s.vocab().relation_index(PART_LEFT), s.vocab().relation_index(PART_RIGHT)) {
        (Some(l), Some(r)) => (l, r),
        _ => return Err(Error::UnknownSymbol(format!("{PART_LEFT}/{PART_RIGHT}"))),
    };
    let mut out = s.clone();
    for e in 0..s.size() {
        out.set(l, &[e], s.holds(r, &[e]))?;
        out.set(r, &[e], s.holds(l, &[e]))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graphs() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::new([("E", 2)], &[]).unwrap())
    }

    #[test]
    fn rank_zero_product_is_one_entry() {
        let t = build_composition_table(Operation::Product, graphs(), 0, Logic::Fo, 2, &Guards::default()).unwrap();
        // Sentences of rank 0 over a relational vocabulary are constants,
        // and every factor is non-empty.
        assert_eq!(t.components().component_count(), 1);
        assert_eq!(t.entries().len(), 1);
        assert!(t.is_functional());
    }

    #[test]
    fn union_rank_one_is_functional_and_replays() {
        let t = build_composition_table(Operation::Union, graphs(), 1, Logic::Fo, 3, &Guards::default()).unwrap();
        assert!(t.is_functional(), "{}", t.to_text());
        // Empty, all loops, no loops, both.
        assert_eq!(t.components().component_count(), 4);
        assert_eq!(t.entries().len(), 16);
        let r = t.replay(20, 0).unwrap();
        assert_eq!(r.mismatches, Vec::<String>::new());
    }

    #[test]
    fn union_is_symmetric_up_to_part_swap() {
        let t = build_composition_table(Operation::Union, graphs(), 1, Logic::Fo, 2, &Guards::default()).unwrap();
        for ((a, b), e) in t.entries() {
            let (x, y) = &e.witness;
            let swapped = swap_parts(&disjoint_union(y, x).unwrap()).unwrap();
            assert_eq!(t.composites().invariant_type_of(&swapped).unwrap(), t.compose(*a, *b).unwrap());
        }
    }

    #[test]
    fn missing_keys_and_guards() {
        let t = build_composition_table(Operation::Union, graphs(), 1, Logic::Fo, 1, &Guards::default()).unwrap();
        let e = t.compose(InvariantTypeId(0), InvariantTypeId(99)).unwrap_err();
        assert_eq!(e.code(), "missing-key");
        let g = Guards::default();
        assert!(build_composition_table(Operation::Product, graphs(), 1, Logic::Fo, 4, &g)
            .unwrap_err()
            .is_guard());
        assert_eq!(
            build_composition_table(Operation::Product, graphs(), 1, Logic::Mso, 2, &g)
                .unwrap_err()
                .code(),
            "unsupported"
        );
    }

    #[test]
    fn text_is_deterministic() {
        let a = build_composition_table(Operation::Product, graphs(), 1, Logic::Fo, 2, &Guards::default()).unwrap();
        let b = build_composition_table(Operation::Product, graphs(), 1, Logic::Fo, 2, &Guards::default()).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert!(a.to_text().contains("violations 0"));
    }
}
