mod common;

use std::collections::HashMap;
use std::sync::Arc;

use proptest::prelude::*;

use common::{graphs, structure_and_perm, unary};
use ordinv::invariance::{FlipPartition, InvariantTypeId};
use ordinv::logic::Logic;
use ordinv::structures::{enumerate_orders, enumerate_structures, Structure, Vocabulary};
use ordinv::Guards;

fn universe(vocab: &Arc<Vocabulary>, max: usize) -> Vec<Structure> {
    (0..=max)
        .flat_map(|n| enumerate_structures(vocab.clone(), n, true, &Guards::default()).unwrap())
        .collect()
}

/// Maps components of `small` to components of `large` through shared
/// structures and fails if one component of `small` lands in two.
fn assert_no_split(small: &FlipPartition, large: &FlipPartition, structures: &[Structure]) {
    let mut image: HashMap<InvariantTypeId, InvariantTypeId> = HashMap::new();
    for s in structures {
        let (a, b) = (small.invariant_type_of(s).unwrap(), large.invariant_type_of(s).unwrap());
        let prev = *image.entry(a).or_insert(b);
        assert_eq!(prev, b, "component {} splits at bound {}", small.component_name(a), large.bound());
    }
}

#[test]
fn components_never_split_as_the_bound_grows() {
    let g = Guards::default();
    for (vocab, logic, k) in [
        (unary(), Logic::Mso, 2),
        (unary(), Logic::Fo, 2),
        (graphs(), Logic::Fo, 1),
        (graphs(), Logic::Mso, 1),
    ] {
        let parts: Vec<FlipPartition> = (2..=4)
            .map(|n| FlipPartition::build(vocab.clone(), k, logic, n, &g).unwrap())
            .collect();
        for w in 0..parts.len() - 1 {
            assert_no_split(&parts[w], &parts[w + 1], &universe(&vocab, w + 2));
        }
    }
}

#[test]
fn every_expansion_lands_in_one_component() {
    // A fixpoint of the merge: no structure has two expansions in different
    // components, and distinct components never share an ordered type.
    let g = Guards::default();
    for (vocab, logic, k) in [(unary(), Logic::Mso, 2), (graphs(), Logic::Fo, 2)] {
        let p = FlipPartition::build(vocab.clone(), k, logic, 3, &g).unwrap();
        for s in universe(&vocab, 3) {
            let first = p.invariant_type_of(&s).unwrap();
            for o in enumerate_orders(s.size(), &g).unwrap() {
                assert_eq!(p.invariant_type_under(&s, &o).unwrap(), first);
            }
        }
        let mut by_hash = HashMap::new();
        for (i, n) in p.nodes().iter().enumerate() {
            let c = p.component_of_node(i);
            assert_eq!(*by_hash.entry(n.hash).or_insert(c), c);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariant_types_are_isomorphism_invariant((s, perm) in structure_and_perm(graphs(), 0..=3)) {
        let p = FlipPartition::build(graphs(), 1, Logic::Fo, 3, &Guards::default()).unwrap();
        prop_assert_eq!(p.invariant_type_of(&s).unwrap(), p.invariant_type_of(&s.permuted(&perm)).unwrap());
    }
}
