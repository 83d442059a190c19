//! Formula constructions: the even-cardinality sentence, divisibility
//! sentences over an order, and the depth-first order on trees defined from
//! `child` and `sib`.

use std::collections::BTreeSet;

use super::build::*;
use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::structures::{EdgeSemantics, CHILD, ORDER, SIB};

struct Fresh {
    taken: BTreeSet<String>,
}

impl Fresh {
    fn new(f: Option<&Formula>) -> Self {
        Fresh {
            taken: f.map(Formula::names).unwrap_or_default(),
        }
    }

    fn get(&mut self, base: &str) -> String {
        let mut i = 0;
        loop {
            let cand = if i == 0 { base.to_string() } else { format!("{base}{i}") };
            if self.taken.insert(cand.clone()) {
                return cand;
            }
            i += 1;
        }
    }
}

/// "The domain has even cardinality", via a set holding every other element
/// of `<` starting from the second one, which must contain the last element.
pub fn phi_even() -> Formula {
    let first = |x: &str| not(exists("z", lt("z", x)));
    let last = |x: &str| not(exists("z", lt(x, "z")));
    let succ = |x: &str, y: &str| {
        and(vec![
            lt(x, y),
            not(exists("z", and(vec![lt(x, "z"), lt("z", y)]))),
        ])
    };
    exists_set(
        "S",
        and(vec![
            forall("x", implies(first("x"), not(member("x", "S")))),
            forall(
                "x",
                forall(
                    "y",
                    implies(succ("x", "y"), iff(member("y", "S"), not(member("x", "S")))),
                ),
            ),
            forall("x", implies(last("x"), member("x", "S"))),
        ]),
    )
}

/// A sentence over `<` stating that the number of elements satisfying
/// `psi(x)` is divisible by `p`. Marker sets `X1..X(p-1)` label the
/// satisfiers by position mod `p`; residue 0 is the unmarked satisfiers.
pub fn order_divisibility_sentence(p: u64, psi: &Formula, x: &str) -> Result<Formula> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("modulus {p} must be at least 2")));
    }
    let (free, free_sets) = psi.free_variables();
    if !free_sets.is_empty() || free.iter().any(|v| v != x) {
        return Err(Error::InvalidArgument(format!(
            "the counted formula may only have `{x}` free"
        )));
    }
    let mut fresh = Fresh::new(Some(psi));
    let markers: Vec<String> = (1..p).map(|i| fresh.get(&format!("X{i}"))).collect();
    let (u, v, w) = (fresh.get("u"), fresh.get("v"), fresh.get("w"));
    let at = |t: &str| psi.substitute(x, &Term::Var(t.to_string()));
    // residue(t) = r as a formula.
    let residue = |t: &str, r: usize| -> Formula {
        if r == 0 {
            let mut parts = vec![at(t)];
            parts.extend(markers.iter().map(|m| not(member(t, m))));
            and(parts)
        } else {
            member(t, &markers[r - 1])
        }
    };
    let p = p as usize;
    let mut well_formed = Vec::new();
    for (i, m) in markers.iter().enumerate() {
        well_formed.push(implies(member(&u, m), at(&u)));
        for m2 in &markers[i + 1..] {
            well_formed.push(not(and(vec![member(&u, m), member(&u, m2)])));
        }
    }
    let first = and(vec![at(&u), not(exists(&w, and(vec![lt(&w, &u), at(&w)])))]);
    let last = and(vec![at(&u), not(exists(&w, and(vec![lt(&u, &w), at(&w)])))]);
    let succ = and(vec![
        at(&u),
        at(&v),
        lt(&u, &v),
        not(exists(&w, and(vec![lt(&u, &w), lt(&w, &v), at(&w)]))),
    ]);
    let steps: Vec<Formula> = (0..p)
        .map(|r| implies(residue(&u, r), residue(&v, (r + 1) % p)))
        .collect();
    let body = and(vec![
        forall(&u, and(well_formed)),
        forall(&u, implies(first, residue(&u, 1 % p))),
        forall(&u, forall(&v, implies(succ, and(steps)))),
        forall(&u, implies(last, residue(&u, 0))),
    ]);
    Ok(markers
        .iter()
        .rev()
        .fold(body, |acc, m| exists_set(m, acc)))
}

/// `Q_p x psi`.
pub fn counting_sentence(p: u64, psi: &Formula, x: &str) -> Formula {
    count(p, x, psi.clone())
}

/// `x` is an ancestor-or-self of `y` in a tree encoding.
pub fn ancestor_or_self(x: &str, y: &str, edges: EdgeSemantics, fresh_from: &Formula) -> Formula {
    let mut fresh = Fresh::new(Some(fresh_from));
    fresh.taken.insert(x.to_string());
    fresh.taken.insert(y.to_string());
    ancestor_or_self_with(x, y, edges, &mut fresh)
}

fn ancestor_or_self_with(x: &str, y: &str, edges: EdgeSemantics, fresh: &mut Fresh) -> Formula {
    match edges {
        EdgeSemantics::Descendant => or(vec![eq(x, y), atom(CHILD, &[x, y])]),
        EdgeSemantics::Child => {
            let (set, a, b) = (fresh.get("Anc"), fresh.get("a"), fresh.get("b"));
            let closed = forall(
                &a,
                forall(
                    &b,
                    implies(and(vec![member(&a, &set), atom(CHILD, &[&a, &b])]), member(&b, &set)),
                ),
            );
            forall_set(&set, implies(and(vec![member(x, &set), closed]), member(y, &set)))
        }
    }
}

/// Depth-first (document) order from `child` and `sib`: `x` precedes `y` if
/// `x` is a proper ancestor of `y`, or lies under an earlier sibling of an
/// ancestor-or-self of `y`.
fn tree_order(x: &str, y: &str, edges: EdgeSemantics, fresh: &mut Fresh) -> Formula {
    let proper = and(vec![not(eq(x, y)), ancestor_or_self_with(x, y, edges, fresh)]);
    let (s, t) = (fresh.get("s"), fresh.get("t"));
    let sibling_branch = exists(
        &s,
        exists(
            &t,
            and(vec![
                atom(SIB, &[&s, &t]),
                ancestor_or_self_with(&s, x, edges, fresh),
                ancestor_or_self_with(&t, y, edges, fresh),
            ]),
        ),
    );
    or(vec![proper, sibling_branch])
}

/// Rewrites every `<` atom into the depth-first order defined from `child`
/// and `sib`, so a sentence over an order can be read on sibling-ordered
/// trees.
pub fn order_via_siblings(f: &Formula, edges: EdgeSemantics) -> Result<Formula> {
    let mut fresh = Fresh::new(Some(f));
    let mut failure = None;
    let out = f.replace_relation(ORDER, &mut |args| match (&args[0], &args[1]) {
        (Term::Var(a), Term::Var(b)) => tree_order(a, b, edges, &mut fresh),
        _ => {
            failure = Some(Error::Unsupported("constants in order atoms over trees".into()));
            Formula::False
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Guards;
    use crate::logic::{evaluate, Assignment};
    use crate::structures::text::parse_tree;
    use crate::structures::{enumerate_orders, sibling_orders, LinearOrder, Structure};

    fn on_order(n: usize, f: &Formula, order: &LinearOrder) -> bool {
        let s = Structure::pure_set(n).with_order(order).unwrap();
        evaluate(&s, f, &Assignment::new()).unwrap()
    }

    #[test]
    fn phi_even_matches_parity() {
        let f = phi_even();
        assert!(f.is_sentence());
        assert_eq!(f.quantifier_rank(), 4);
        let got: Vec<bool> = (0..=8).map(|n| on_order(n, &f, &LinearOrder::identity(n))).collect();
        let want: Vec<bool> = (0..=8).map(|n| n % 2 == 0).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn divisibility_sentence_matches_modulus() {
        let psi = eq("x", "x");
        for p in 2..=4u64 {
            let f = order_divisibility_sentence(p, &psi, "x").unwrap();
            assert_eq!(f.quantifier_rank() as u64, p + 2);
            let max_n = if p == 4 { 6 } else { 9 };
            for n in 0..=max_n {
                assert_eq!(
                    on_order(n, &f, &LinearOrder::identity(n)),
                    n as u64 % p == 0,
                    "p={p} n={n}"
                );
            }
        }
        assert!(order_divisibility_sentence(1, &psi, "x").is_err());
        assert!(order_divisibility_sentence(2, &eq("x", "y"), "x").is_err());
    }

    #[test]
    fn divisibility_is_order_independent_on_small_sets() {
        let f = order_divisibility_sentence(3, &eq("x", "x"), "x").unwrap();
        let g = Guards::default();
        for n in 0..=4 {
            let verdicts: BTreeSet<bool> = enumerate_orders(n, &g)
                .unwrap()
                .iter()
                .map(|o| on_order(n, &f, o))
                .collect();
            assert_eq!(verdicts.len(), 1);
        }
    }

    #[test]
    fn tree_order_is_preorder() {
        let t = parse_tree("a(b(a, a), b)", None).unwrap();
        let lt_tree = order_via_siblings(&lt("x", "y"), EdgeSemantics::Child).unwrap();
        let ord = t.written_order();
        let s = t.to_structure(Some(&ord), EdgeSemantics::Child).unwrap();
        for x in 0..t.size() {
            for y in 0..t.size() {
                let a = Assignment::new().with_element("x", x).with_element("y", y);
                assert_eq!(evaluate(&s, &lt_tree, &a).unwrap(), x < y, "{x} {y}");
            }
        }
        let sd = t.to_structure(Some(&ord), EdgeSemantics::Descendant).unwrap();
        let lt_desc = order_via_siblings(&lt("x", "y"), EdgeSemantics::Descendant).unwrap();
        for x in 0..t.size() {
            for y in 0..t.size() {
                let a = Assignment::new().with_element("x", x).with_element("y", y);
                assert_eq!(evaluate(&sd, &lt_desc, &a).unwrap(), x < y);
            }
        }
    }

    #[test]
    fn phi_even_over_trees_counts_nodes() {
        let f = order_via_siblings(&phi_even(), EdgeSemantics::Child).unwrap();
        let g = Guards::default();
        for text in ["a", "a(b)", "a(b, b)", "a(b(a), b)", "a(a, a(b, b))"] {
            let t = parse_tree(text, None).unwrap();
            for ord in sibling_orders(&t, &g).unwrap() {
                let s = t.to_structure(Some(&ord), EdgeSemantics::Child).unwrap();
                assert_eq!(
                    evaluate(&s, &f, &Assignment::new()).unwrap(),
                    t.size() % 2 == 0,
                    "{text}"
                );
            }
        }
    }
}
