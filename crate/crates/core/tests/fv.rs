mod common;

use std::collections::HashMap;

use common::graphs;
use ordinv::fv::{build_composition_table, verify_lex_ef_lemma, Operation};
use ordinv::logic::Logic;
use ordinv::Guards;

#[test]
fn entries_only_merge_when_the_bound_grows() {
    let g = Guards::default();
    for (op, logic, k) in [
        (Operation::Union, Logic::Fo, 1),
        (Operation::Union, Logic::Mso, 1),
        (Operation::Product, Logic::Fo, 1),
    ] {
        let small = build_composition_table(op, graphs(), k, logic, 2, &g).unwrap();
        let large = build_composition_table(op, graphs(), k, logic, 3, &g).unwrap();
        assert!(small.is_functional() && large.is_functional());
        let mut image = HashMap::new();
        for ((ta, tb), e) in small.entries() {
            let (a, b) = &e.witness;
            // Components and composites of the small table map to single
            // classes of the large one.
            let ca = large.components().invariant_type_of(a).unwrap();
            let cb = large.components().invariant_type_of(b).unwrap();
            assert_eq!(*image.entry(("left", *ta)).or_insert(ca), ca);
            assert_eq!(*image.entry(("right", *tb)).or_insert(cb), cb);
            let v = large.composite_type_of(a, b).unwrap();
            assert_eq!(*image.entry(("value", e.value)).or_insert(v), v, "{op} entry changed");
            assert_eq!(large.compose(ca, cb).unwrap(), v);
        }
    }
}

#[test]
fn lex_products_of_equivalent_factors_up_to_rank_two() {
    for k in 0..=2 {
        let r = verify_lex_ef_lemma(graphs(), k, 3, &Guards::default()).unwrap();
        assert!(r.passed(), "k={k}: {:?}", r.violations);
        assert_eq!(r.factors, 530);
        assert_eq!(r.products, r.factors * r.factors);
    }
}
