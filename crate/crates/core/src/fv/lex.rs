use std::sync::Arc;

use rayon::prelude::*;

use super::{compact, factors, fv_guards, Operation};
use crate::config::Guards;
use crate::error::Result;
use crate::logic::Logic;
use crate::structures::{direct_product, enumerate_structures, lex_product_order, LinearOrder, Structure, Vocabulary};
use crate::types::ef_equivalent;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexReport {
    /// Ordered factors inspected (every labeled structure with the identity order).
    pub factors: usize,
    /// Rank-k equivalence classes among them.
    pub classes: usize,
    /// Products checked against their class representative.
    pub products: usize,
    pub violations: Vec<String>,
}

impl LexReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn ordered(s: &Structure) -> Result<Structure> {
    s.with_order(&LinearOrder::identity(s.size()))
}

fn lex(a: &Structure, b: &Structure) -> Result<Structure> {
    let o = lex_product_order(
        &LinearOrder::identity(a.size()),
        &LinearOrder::identity(b.size()),
        a.size(),
        b.size(),
    )?;
    direct_product(a, b)?.with_order(&o)
}

/// Checks that lexicographically ordered products of rank-`k` equivalent
/// ordered factors are rank-`k` equivalent, for all ordered factors of size
/// `1..=max_size`. Equivalence is an equivalence relation, so comparing every
/// product with the product of its class representatives covers every
/// quadruple.
pub fn verify_lex_ef_lemma(vocab: Arc<Vocabulary>, k: usize, max_size: usize, guards: &Guards) -> Result<LexReport> {
    let g = fv_guards(Operation::Product, k, Logic::Fo, max_size, guards)?;
    // The iso-class listing only validates the vocabulary and the bit budget.
    factors(&vocab, 1, max_size, &g)?;
    let mut plain = Vec::new();
    for n in 1..=max_size {
        plain.extend(enumerate_structures(vocab.clone(), n, false, &g)?);
    }
    let ordered_factors = plain.iter().map(ordered).collect::<Result<Vec<_>>>()?;

    let mut reps: Vec<usize> = Vec::new();
    let mut class = Vec::with_capacity(plain.len());
    for (i, f) in ordered_factors.iter().enumerate() {
        let mut found = None;
        for (c, &r) in reps.iter().enumerate() {
            if ef_equivalent(f, &ordered_factors[r], k, Logic::Fo, &g)? {
                found = Some(c);
                break;
            }
        }
        class.push(found.unwrap_or_else(|| {
            reps.push(i);
            reps.len() - 1
        }));
    }
    let reference: Vec<Vec<Structure>> = reps
        .iter()
        .map(|&a| reps.iter().map(|&b| lex(&plain[a], &plain[b])).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let violations: Vec<Vec<String>> = (0..plain.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<String>> {
            let mut out = Vec::new();
            for j in 0..plain.len() {
                let p = lex(&plain[i], &plain[j])?;
                if !ef_equivalent(&p, &reference[class[i]][class[j]], k, Logic::Fo, &g)? {
                    out.push(format!(
                        "{} x {} differs from {} x {}",
                        compact(&plain[i]),
                        compact(&plain[j]),
                        compact(&plain[reps[class[i]]]),
                        compact(&plain[reps[class[j]]])
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(LexReport {
        factors: plain.len(),
        classes: reps.len(),
        products: plain.len() * plain.len(),
        violations: violations.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_factors() {
        let v = Arc::new(Vocabulary::new([("E", 2)], &[]).unwrap());
        let r = verify_lex_ef_lemma(v, 2, 1, &Guards::default()).unwrap();
        assert_eq!(r.factors, 2);
        assert_eq!(r.classes, 2);
        assert!(r.passed());
    }

    #[test]
    fn rank_one_up_to_two() {
        let v = Arc::new(Vocabulary::new([("E", 2)], &[]).unwrap());
        let r = verify_lex_ef_lemma(v, 1, 2, &Guards::default()).unwrap();
        assert_eq!(r.factors, 2 + 16);
        assert_eq!(r.products, 18 * 18);
        assert!(r.passed(), "{:?}", r.violations);
    }
}
