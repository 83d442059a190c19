mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use common::{graphs, graphs_with_p, structure, tree};
use ordinv::structures::text::parse_tree;
use ordinv::structures::{
    canonical_form, direct_product, disjoint_union, enumerate_structures, lex_product_order, LinearOrder,
};
use ordinv::Guards;

proptest! {
    #[test]
    fn union_and_product_sizes(a in structure(graphs_with_p(), 0..=5), b in structure(graphs_with_p(), 0..=5)) {
        let u = disjoint_union(&a, &b).unwrap();
        prop_assert_eq!(u.size(), a.size() + b.size());
        if a.size() > 0 && b.size() > 0 {
            prop_assert_eq!(direct_product(&a, &b).unwrap().size(), a.size() * b.size());
        }
    }

    #[test]
    fn tree_text_round_trip(t in tree(9)) {
        let canon = t.canonical_text();
        let back = parse_tree(&canon, Some(t.alphabet_arc().clone())).unwrap();
        prop_assert_eq!(back.canonical_text(), canon.clone());
        prop_assert_eq!(back.size(), t.size());
        let written = parse_tree(&t.to_text(), Some(t.alphabet_arc().clone())).unwrap();
        prop_assert_eq!(written.to_text(), t.to_text());
    }
}

#[test]
fn quotient_matches_full_stream() {
    let g = Guards::default();
    for n in 0..=3 {
        let reps: Vec<_> = enumerate_structures(graphs(), n, true, &g).unwrap().collect();
        let canon: HashSet<_> = reps.iter().map(canonical_form).collect();
        assert_eq!(canon.len(), reps.len(), "representatives at size {n} are pairwise non-isomorphic");
        for s in enumerate_structures(graphs(), n, false, &g).unwrap() {
            assert!(canon.contains(&canonical_form(&s)), "class of {s:?} missing");
        }
    }
}

#[test]
fn lex_order_is_a_lexicographic_permutation() {
    let g = Guards::default();
    for na in 1..=5 {
        for nb in 1..=5 {
            let oas = ordinv::structures::enumerate_orders(na, &g).unwrap();
            let obs = ordinv::structures::enumerate_orders(nb, &g).unwrap();
            for oa in &oas {
                for ob in &obs {
                    let o = lex_product_order(oa, ob, na, nb).unwrap();
                    assert!(LinearOrder::new(o.as_slice().to_vec()).is_ok());
                    // Pair (x, y) is encoded as x + na * y; y is compared first.
                    for p in 0..na * nb {
                        for q in 0..na * nb {
                            let (x1, y1, x2, y2) = (p % na, p / na, q % na, q / na);
                            let lex = ob.less(y1, y2) || (y1 == y2 && oa.less(x1, x2));
                            assert_eq!(o.less(p, q), lex);
                        }
                    }
                }
            }
        }
    }
}
