mod common;

use proptest::prelude::*;

use common::{graphs_with_p, permutation, structure, structure_and_perm, unary};
use ordinv::logic::build::count;
use ordinv::logic::macros::order_divisibility_sentence;
use ordinv::logic::{evaluate, parse_formula_infer, Assignment, Formula};
use ordinv::structures::LinearOrder;

/// Formulas in one free variable `x` over `E/2` and `P/1`.
fn unary_battery() -> Vec<Formula> {
    [
        "(P x)",
        "(E x x)",
        "(exists y (E x y))",
        "(forall y (implies (E y x) (P y)))",
        "(existsS S (and (in x S) (forall y (implies (in y S) (P y)))))",
        "(exists y (and (not (= x y)) (E y x) (not (P y))))",
    ]
    .iter()
    .map(|t| parse_formula_infer(t).unwrap())
    .collect()
}

proptest! {
    #[test]
    fn evaluation_is_isomorphism_invariant((s, perm) in structure_and_perm(graphs_with_p(), 1..=4)) {
        let copy = s.permuted(&perm);
        for f in unary_battery() {
            for v in 0..s.size() {
                let here = evaluate(&s, &f, &Assignment::new().with_element("x", v)).unwrap();
                let there = evaluate(&copy, &f, &Assignment::new().with_element("x", perm[v])).unwrap();
                prop_assert_eq!(here, there, "{} at {}", f, v);
            }
        }
    }

    #[test]
    fn counting_matches_external_count(s in structure(graphs_with_p(), 0..=5), p in 2u64..=4) {
        for psi in unary_battery() {
            let satisfiers = (0..s.size())
                .filter(|&v| evaluate(&s, &psi, &Assignment::new().with_element("x", v)).unwrap())
                .count() as u64;
            let q = count(p, "x", psi.clone());
            prop_assert_eq!(evaluate(&s, &q, &Assignment::new()).unwrap(), satisfiers % p == 0);
        }
    }

    #[test]
    fn divisibility_ignores_the_order(
        (s, o1, o2) in structure(unary(), 0..=6)
            .prop_flat_map(|s| { let n = s.size(); (Just(s), permutation(n), permutation(n)) }),
        p in 2u64..=3,
    ) {
        let f = order_divisibility_sentence(p, &parse_formula_infer("(P x)").unwrap(), "x").unwrap();
        let eval = |o: Vec<usize>| {
            let ordered = s.with_order(&LinearOrder::new(o).unwrap()).unwrap();
            evaluate(&ordered, &f, &Assignment::new()).unwrap()
        };
        let expected = (0..s.size()).filter(|&v| s.holds(0, &[v])).count() as u64 % p == 0;
        prop_assert_eq!(eval(o1), expected);
        prop_assert_eq!(eval(o2), expected);
    }
}

#[test]
fn divisibility_rank_offset_is_fixed() {
    // p - 1 marker sets plus three element quantifiers around psi.
    for psi in ["(= x x)", "(P x)", "(exists y (E x y))", "(forall y (exists z (and (E x y) (E y z))))"] {
        let f = parse_formula_infer(psi).unwrap();
        for p in 2..=5u64 {
            let d = order_divisibility_sentence(p, &f, "x").unwrap();
            assert_eq!(d.quantifier_rank(), f.quantifier_rank() + p as usize + 2, "{psi} p={p}");
        }
    }
}
