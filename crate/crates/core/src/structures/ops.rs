use std::sync::Arc;

use super::{LinearOrder, RelSym, Structure, Vocabulary};
use crate::error::{Error, Result};

/// Unary predicate marking the left part of a disjoint union.
pub const PART_LEFT: &str = "P_left";
/// Unary predicate marking the right part of a disjoint union.
pub const PART_RIGHT: &str = "P_right";

fn check_shared(a: &Structure, b: &Structure) -> Result<()> {
    if a.vocab() != b.vocab() {
        return Err(Error::VocabularyMismatch(format!(
            "`{}` versus `{}`",
            a.vocab(),
            b.vocab()
        )));
    }
    if !a.vocab().constants().is_empty() {
        return Err(Error::ConstantsPresent);
    }
    Ok(())
}

/// `A ⊔ B`: B is shifted by `|A|`, and `P_left`/`P_right` mark the parts.
pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<Structure> {
    check_shared(a, b)?;
    for name in [PART_LEFT, PART_RIGHT] {
        if a.vocab().relation_index(name).is_some() {
            return Err(Error::DuplicateSymbol(name.to_string()));
        }
    }
    let shift = a.size();
    let mut rels = a.vocab().relations().to_vec();
    rels.push(RelSym {
        name: PART_LEFT.into(),
        arity: 1,
    });
    rels.push(RelSym {
        name: PART_RIGHT.into(),
        arity: 1,
    });
    let vocab = Arc::new(Vocabulary::from_parts(rels, Vec::new())?);
    let mut out = Structure::new(vocab, a.size() + b.size())?;
    for r in 0..a.vocab().relations().len() {
        for t in a.relation(r).tuples() {
            out.set(r, &t, true)?;
        }
        for t in b.relation(r).tuples() {
            let shifted: Vec<usize> = t.iter().map(|&e| e + shift).collect();
            out.set(r, &shifted, true)?;
        }
    }
    let left = a.vocab().relations().len();
    for e in 0..a.size() {
        out.set(left, &[e], true)?;
    }
    for e in 0..b.size() {
        out.set(left + 1, &[e + shift], true)?;
    }
    Ok(out)
}

/// `A × B` with the pair `(a, b)` encoded as `a + |A|·b`.
pub fn direct_product(a: &Structure, b: &Structure) -> Result<Structure> {
    check_shared(a, b)?;
    if a.size() == 0 || b.size() == 0 {
        return Err(Error::EmptyFactor);
    }
    let na = a.size();
    let mut out = Structure::new(a.vocab_arc().clone(), na * b.size())?;
    for r in 0..a.vocab().relations().len() {
        let ta = a.relation(r).tuples();
        let tb = b.relation(r).tuples();
        for x in &ta {
            for y in &tb {
                let t: Vec<usize> = x.iter().zip(y).map(|(&p, &q)| p + na * q).collect();
                out.set(r, &t, true)?;
            }
        }
    }
    Ok(out)
}

/// Lexicographic order on pair codes, comparing the second component first.
pub fn lex_product_order(
    oa: &LinearOrder,
    ob: &LinearOrder,
    size_a: usize,
    size_b: usize,
) -> Result<LinearOrder> {
    if oa.len() != size_a || ob.len() != size_b {
        return Err(Error::InvalidOrder(format!(
            "orders of sizes {}×{} for factors of sizes {size_a}×{size_b}",
            oa.len(),
            ob.len()
        )));
    }
    let mut perm = Vec::with_capacity(size_a * size_b);
    for &b in ob.as_slice() {
        for &a in oa.as_slice() {
            perm.push(a + size_a * b);
        }
    }
    LinearOrder::new(perm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let v = Arc::new(Vocabulary::new([("E", 2)], &[]).unwrap());
        let mut s = Structure::new(v, n).unwrap();
        for &(x, y) in edges {
            s.insert("E", &[x, y]).unwrap();
        }
        s
    }

    #[test]
    fn union_marks_parts() {
        let u = disjoint_union(&Structure::pure_set(1), &Structure::pure_set(1)).unwrap();
        assert_eq!(u.size(), 2);
        let l = u.vocab().relation_index(PART_LEFT).unwrap();
        let r = u.vocab().relation_index(PART_RIGHT).unwrap();
        assert_eq!(u.relation(l).tuples(), vec![vec![0]]);
        assert_eq!(u.relation(r).tuples(), vec![vec![1]]);

        let u = disjoint_union(&graph(2, &[(0, 1)]), &graph(1, &[])).unwrap();
        assert_eq!(u.size(), 3);
        assert_eq!(u.relation(0).tuples(), vec![vec![0, 1]]);
        let l = u.vocab().relation_index(PART_LEFT).unwrap();
        assert_eq!(u.relation(l).tuples(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn union_rejects_mismatch_and_constants() {
        assert!(matches!(
            disjoint_union(&graph(1, &[]), &Structure::pure_set(1)),
            Err(Error::VocabularyMismatch(_))
        ));
        let v = Arc::new(Vocabulary::new(Vec::<(String, usize)>::new(), &["c"]).unwrap());
        let s = Structure::new(v, 1).unwrap();
        assert_eq!(disjoint_union(&s, &s), Err(Error::ConstantsPresent));
    }

    #[test]
    fn product_is_componentwise() {
        let p = direct_product(&graph(1, &[(0, 0)]), &graph(2, &[(0, 1)])).unwrap();
        assert_eq!(p.size(), 2);
        assert_eq!(p.relation(0).tuples(), vec![vec![0, 1]]);
        let p = direct_product(&graph(1, &[]), &graph(1, &[])).unwrap();
        assert_eq!(p.size(), 1);
        assert!(p.relation(0).is_empty());
        assert_eq!(
            direct_product(&graph(0, &[]), &graph(1, &[])),
            Err(Error::EmptyFactor)
        );
    }

    #[test]
    fn lex_order_compares_second_component_first() {
        let o = lex_product_order(
            &LinearOrder::new(vec![0, 1]).unwrap(),
            &LinearOrder::identity(1),
            2,
            1,
        )
        .unwrap();
        assert_eq!(o.as_slice(), &[0, 1]);
        let o = lex_product_order(
            &LinearOrder::new(vec![1, 0]).unwrap(),
            &LinearOrder::new(vec![0, 1]).unwrap(),
            2,
            2,
        )
        .unwrap();
        assert_eq!(o.as_slice(), &[1, 0, 3, 2]);
        assert!(lex_product_order(&LinearOrder::identity(2), &LinearOrder::identity(2), 3, 2)
            .is_err());
    }
}
