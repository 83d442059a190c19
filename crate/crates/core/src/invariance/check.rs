use std::sync::Arc;

use rayon::prelude::*;

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::logic::{Assignment, Compiled, Formula};
use crate::structures::{
    enumerate_orders, enumerate_structures, enumerate_unordered_trees, sibling_orders, EdgeSemantics, LinearOrder,
    SiblingOrder, Structure, UnrankedTree, Vocabulary, ORDER, SIB,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    Orders {
        structure: Structure,
        first: LinearOrder,
        second: LinearOrder,
        first_value: bool,
    },
    SiblingOrders {
        tree: UnrankedTree,
        first: SiblingOrder,
        second: SiblingOrder,
        first_value: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// No two auxiliary relations disagree on any structure up to the bound.
    InvariantUpTo(usize),
    Counterexample(Box<Counterexample>),
}

impl Verdict {
    pub fn is_invariant(&self) -> bool {
        matches!(self, Verdict::InvariantUpTo(_))
    }
}

fn check_symbols(f: &Formula, vocab: &Vocabulary, extra: &str) -> Result<()> {
    for (name, arity) in f.relations() {
        let expected = if name == extra {
            2
        } else {
            match vocab.relation_index(&name) {
                Some(i) => vocab.relations()[i].arity,
                None => return Err(Error::UnknownSymbol(name)),
            }
        };
        if expected != arity {
            return Err(Error::ArityMismatch { name, expected, got: arity });
        }
    }
    if let Some(v) = f.free_variables().0.into_iter().next() {
        return Err(Error::UnboundVariable(v));
    }
    Ok(())
}

/// Evaluates `f` on every structure of size at most `bound` (up to
/// isomorphism) under every linear order and reports the first pair of
/// orders that disagree.
pub fn check_invariance(f: &Formula, vocab: Arc<Vocabulary>, bound: usize, guards: &Guards) -> Result<Verdict> {
    check_symbols(f, &vocab, ORDER)?;
    if !f.uses_order() {
        return Ok(Verdict::InvariantUpTo(bound));
    }
    let compiled = Compiled::new(f);
    let empty = Assignment::new();
    for n in 0..=bound {
        let orders = enumerate_orders(n, guards)?;
        let structures: Vec<Structure> = enumerate_structures(vocab.clone(), n, true, guards)?.collect();
        let found: Vec<Option<Counterexample>> = structures
            .par_iter()
            .map(|a| -> Result<Option<Counterexample>> {
                let mut first = None;
                for o in &orders {
                    let v = compiled.eval(&a.with_order(o)?, &empty, guards)?;
                    match first {
                        None => first = Some(v),
                        Some(f0) if f0 != v => {
                            return Ok(Some(Counterexample::Orders {
                                structure: a.clone(),
                                first: orders[0].clone(),
                                second: o.clone(),
                                first_value: f0,
                            }))
                        }
                        _ => {}
                    }
                }
                Ok(None)
            })
            .collect::<Result<_>>()?;
        if let Some(c) = found.into_iter().flatten().next() {
            return Ok(Verdict::Counterexample(Box::new(c)));
        }
    }
    Ok(Verdict::InvariantUpTo(bound))
}

/// Evaluates `f` on every unordered tree of at most `bound` nodes under every
/// sibling order.
pub fn check_tree_invariance(
    f: &Formula,
    alphabet: Arc<Vec<String>>,
    bound: usize,
    edges: EdgeSemantics,
    guards: &Guards,
) -> Result<Verdict> {
    let vocab = crate::structures::tree_vocabulary(&alphabet, false)?;
    check_symbols(f, &vocab, SIB)?;
    if !f.uses_relation(SIB) {
        return Ok(Verdict::InvariantUpTo(bound));
    }
    let compiled = Compiled::new(f);
    let empty = Assignment::new();
    let trees = enumerate_unordered_trees(alphabet, bound);
    let found: Vec<Option<Counterexample>> = trees
        .par_iter()
        .map(|t| -> Result<Option<Counterexample>> {
            let orders = sibling_orders(t, guards)?;
            let mut first = None;
            for o in &orders {
                let v = compiled.eval(&t.to_structure(Some(o), edges)?, &empty, guards)?;
                match first {
                    None => first = Some(v),
                    Some(f0) if f0 != v => {
                        return Ok(Some(Counterexample::SiblingOrders {
                            tree: t.clone(),
                            first: orders[0].clone(),
                            second: o.clone(),
                            first_value: f0,
                        }))
                    }
                    _ => {}
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    Ok(match found.into_iter().flatten().next() {
        Some(c) => Verdict::Counterexample(Box::new(c)),
        None => Verdict::InvariantUpTo(bound),
    })
}

/// Membership in the class defined by an order-invariant sentence, read off
/// the identity order.
pub fn query_membership(f: &Formula, a: &Structure, guards: &Guards) -> Result<bool> {
    let s = if a.vocab().has_order() {
        a.clone()
    } else {
        a.with_order(&LinearOrder::identity(a.size()))?
    };
    Compiled::new(f).eval(&s, &Assignment::new(), guards)
}

/// Membership for a sibling-invariant sentence, read off the written order.
pub fn tree_query_membership(f: &Formula, t: &UnrankedTree, edges: EdgeSemantics, guards: &Guards) -> Result<bool> {
    let s = t.to_structure(Some(&t.written_order()), edges)?;
    Compiled::new(f).eval(&s, &Assignment::new(), guards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::build::*;
    use crate::logic::macros::phi_even;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phi_even_is_invariant() {
        let g = Guards::default();
        let v = check_invariance(&phi_even(), Arc::new(Vocabulary::empty()), 6, &g).unwrap();
        assert_eq!(v, Verdict::InvariantUpTo(6));
        for n in 0..=8 {
            assert_eq!(query_membership(&phi_even(), &Structure::pure_set(n), &g).unwrap(), n % 2 == 0);
        }
    }

    #[test]
    fn least_element_in_p_is_not_invariant() {
        let g = Guards::default();
        let v = Arc::new(Vocabulary::new([("P", 1)], &[]).unwrap());
        let least = forall("y", or(vec![lt("x", "y"), eq("x", "y")]));
        let f = exists("x", and(vec![least, atom("P", &["x"])]));
        match check_invariance(&f, v, 3, &g).unwrap() {
            Verdict::Counterexample(c) => match *c {
                Counterexample::Orders { structure, .. } => {
                    let p = structure.relation(0).len();
                    assert!(p != 0 && p != structure.size());
                }
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn order_free_sentences_skip_the_scan() {
        let g = Guards::default();
        let v = Arc::new(Vocabulary::new([("E", 2)], &[]).unwrap());
        let f = exists("x", atom("E", &["x", "x"]));
        assert_eq!(check_invariance(&f, v.clone(), 40, &g).unwrap(), Verdict::InvariantUpTo(40));
        assert!(matches!(
            check_invariance(&atom("E", &["x", "x"]), v.clone(), 2, &g),
            Err(Error::UnboundVariable(_))
        ));
        assert!(matches!(
            check_invariance(&exists("x", atom("F", &["x"])), v, 2, &g),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn sampled_orders_agree() {
        let g = Guards::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = phi_even();
        for n in 0..=6 {
            let want = query_membership(&f, &Structure::pure_set(n), &g).unwrap();
            for _ in 0..20 {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let s = Structure::pure_set(n).with_order(&LinearOrder::new(perm).unwrap()).unwrap();
                assert_eq!(query_membership(&f, &s, &g).unwrap(), want);
            }
        }
    }

    #[test]
    fn first_child_label_is_not_sibling_invariant() {
        let g = Guards::default();
        let alphabet = Arc::new(vec!["a".to_string(), "b".to_string()]);
        // Some node has an a-labelled child with no earlier sibling.
        let f = exists(
            "x",
            exists(
                "y",
                and(vec![
                    atom("child", &["x", "y"]),
                    atom("P_a", &["y"]),
                    not(exists("z", atom("sib", &["z", "y"]))),
                ]),
            ),
        );
        let v = check_tree_invariance(&f, alphabet.clone(), 4, EdgeSemantics::Child, &g).unwrap();
        assert!(!v.is_invariant());
        let g2 = exists("x", atom("P_a", &["x"]));
        assert!(check_tree_invariance(&g2, alphabet, 4, EdgeSemantics::Child, &g).unwrap().is_invariant());
    }
}
