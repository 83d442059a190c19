mod common;

use proptest::prelude::*;

use common::{graphs, graphs_with_p, structure, structure_and_perm};
use ordinv::logic::Logic;
use ordinv::structures::enumerate_structures;
use ordinv::types::{rank_type, realized_types, Params, TypeRegistry};
use ordinv::Guards;

fn logic() -> impl Strategy<Value = Logic> {
    prop_oneof![Just(Logic::Fo), Just(Logic::Mso)]
}

proptest! {
    #[test]
    fn isomorphic_copies_share_types((s, perm) in structure_and_perm(graphs_with_p(), 0..=4), k in 0usize..=2, l in logic()) {
        let g = Guards::default();
        let mut reg = TypeRegistry::new();
        let a = rank_type(&mut reg, &s, &Params::none(), k, l, &g).unwrap();
        let b = rank_type(&mut reg, &s.permuted(&perm), &Params::none(), k, l, &g).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ids_do_not_depend_on_the_registry(s in structure(graphs(), 0..=4), k in 0usize..=2, l in logic()) {
        let g = Guards::default();
        let (mut r1, mut r2) = (TypeRegistry::new(), TypeRegistry::new());
        // Warm one registry with unrelated work first.
        for n in 0..=2 {
            for t in enumerate_structures(graphs(), n, true, &g).unwrap() {
                rank_type(&mut r1, &t, &Params::none(), k, l, &g).unwrap();
            }
        }
        let a = rank_type(&mut r1, &s, &Params::none(), k, l, &g).unwrap();
        let b = rank_type(&mut r2, &s, &Params::none(), k, l, &g).unwrap();
        prop_assert_eq!(r1.hash(a), r2.hash(b));
        prop_assert_eq!(r1.serialize(a), r2.serialize(b));
    }
}

#[test]
fn refinement_is_monotone_in_rank() {
    let g = Guards::default();
    let all: Vec<_> = (0..=3)
        .flat_map(|n| enumerate_structures(graphs(), n, true, &g).unwrap())
        .collect();
    for l in [Logic::Fo, Logic::Mso] {
        let mut reg = TypeRegistry::new();
        let ids: Vec<Vec<_>> = (0..=2)
            .map(|k| {
                all.iter()
                    .map(|s| rank_type(&mut reg, s, &Params::none(), k, l, &g).unwrap())
                    .collect()
            })
            .collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                for k in 1..=2 {
                    if ids[k][i] == ids[k][j] {
                        for lower in 0..k {
                            assert_eq!(ids[lower][i], ids[lower][j], "{l} k={k} vs {lower}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn realized_types_are_reproducible() {
    let g = Guards::default();
    for l in [Logic::Fo, Logic::Mso] {
        let run = || {
            let mut reg = TypeRegistry::new();
            let mut trees: Vec<String> = realized_types(&mut reg, graphs(), 2, l, 3, &g)
                .unwrap()
                .into_iter()
                .map(|(t, _)| reg.serialize(t))
                .collect();
            trees.sort();
            trees
        };
        let first = run();
        assert!(!first.is_empty());
        assert_eq!(first, run());
    }
}
