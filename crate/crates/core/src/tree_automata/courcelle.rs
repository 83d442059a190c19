use std::sync::Arc;

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::invariance::{check_tree_invariance, Counterexample, Verdict};
use crate::logic::macros::order_via_siblings;
use crate::logic::{Assignment, Compiled, Formula};
use crate::structures::{enumerate_unordered_trees, EdgeSemantics, UnrankedTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CourcelleVerdict {
    EquivalentUpTo(usize),
    /// First tree on which the counting sentence and the ordered sentence
    /// disagree, with the counting sentence's value.
    Counterexample { tree: UnrankedTree, counting_value: bool },
}

/// Compares a counting sentence on unordered trees with a sentence over
/// sibling-ordered trees, on every tree of at most `bound` nodes. The ordered
/// sentence may use `<`, which is read as depth-first order.
pub fn courcelle_check(
    counting: &Formula,
    ordered: &Formula,
    alphabet: Arc<Vec<String>>,
    bound: usize,
    edges: EdgeSemantics,
    guards: &Guards,
) -> Result<CourcelleVerdict> {
    let ordered = if ordered.uses_order() {
        order_via_siblings(ordered, edges)?
    } else {
        ordered.clone()
    };
    if let Verdict::Counterexample(c) = check_tree_invariance(&ordered, alphabet.clone(), bound, edges, guards)? {
        if let Counterexample::SiblingOrders { tree, first, second, .. } = *c {
            let show = |o: &crate::structures::SiblingOrder| tree.reordered(o).map(|(t, _)| t.to_text());
            return Err(Error::FormulaNotInvariant(format!(
                "tree {} orders {} and {}",
                tree.to_text(),
                show(&first)?,
                show(&second)?
            )));
        }
    }
    let c = Compiled::new(counting);
    let o = Compiled::new(&ordered);
    let empty = Assignment::new();
    for t in enumerate_unordered_trees(alphabet, bound) {
        let cv = c.eval(&t.to_structure(None, edges)?, &empty, guards)?;
        let ov = o.eval(&t.to_structure(Some(&t.written_order()), edges)?, &empty, guards)?;
        if cv != ov {
            return Ok(CourcelleVerdict::Counterexample {
                tree: t,
                counting_value: cv,
            });
        }
    }
    Ok(CourcelleVerdict::EquivalentUpTo(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::build::*;
    use crate::logic::macros::{order_divisibility_sentence, phi_even};

    fn ab() -> Arc<Vec<String>> {
        Arc::new(vec!["a".to_string(), "b".to_string()])
    }

    #[test]
    fn parity_matches_phi_even() {
        let g = Guards::default();
        let q2 = count(2, "x", eq("x", "x"));
        let v = courcelle_check(&q2, &phi_even(), ab(), 4, EdgeSemantics::Child, &g).unwrap();
        assert_eq!(v, CourcelleVerdict::EquivalentUpTo(4));
    }

    #[test]
    fn order_free_sentences() {
        let g = Guards::default();
        let f = exists("x", atom("P_a", &["x"]));
        let v = courcelle_check(&f, &f, ab(), 4, EdgeSemantics::Child, &g).unwrap();
        assert_eq!(v, CourcelleVerdict::EquivalentUpTo(4));
    }

    #[test]
    fn mismatched_moduli() {
        let g = Guards::default();
        let q2 = count(2, "x", eq("x", "x"));
        let mod3 = order_divisibility_sentence(3, &eq("x", "x"), "x").unwrap();
        match courcelle_check(&q2, &mod3, Arc::new(vec!["a".to_string()]), 4, EdgeSemantics::Descendant, &g).unwrap() {
            // Size 1: 1 is odd and not divisible by 3, so both are false;
            // size 2 separates them.
            CourcelleVerdict::Counterexample { tree, counting_value } => {
                assert_eq!(tree.size(), 2);
                assert!(counting_value);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_invariant_ordered_side() {
        let g = Guards::default();
        let first_child_a = exists(
            "x",
            and(vec![
                atom("P_a", &["x"]),
                exists("p", atom("child", &["p", "x"])),
                not(exists("z", atom("sib", &["z", "x"]))),
            ]),
        );
        let err = courcelle_check(&Formula::True, &first_child_a, ab(), 3, EdgeSemantics::Child, &g).unwrap_err();
        assert_eq!(err.code(), "formula-not-invariant");
    }
}
