//! Hintikka sentences for small first-order types.

use super::{TypeId, TypeRegistry};
use crate::error::{Error, Result};
use crate::logic::build::{and, not, or};
use crate::logic::{Formula, Logic, Term};
use crate::structures::Vocabulary;

const MAX_RANK: usize = 2;
const MAX_RELATIONS: usize = 2;

fn literal(f: Formula, positive: bool) -> Formula {
    if positive {
        f
    } else {
        not(f)
    }
}

fn diagram_formula(vocab: &Vocabulary, terms: &[Term], bits: &[u64]) -> Formula {
    let m = terms.len();
    let mut i = 0;
    let mut bit = || {
        let b = bits[i / 64] >> (i % 64) & 1 == 1;
        i += 1;
        b
    };
    let mut lits = Vec::new();
    for sym in vocab.relations() {
        for c in 0..m.pow(sym.arity as u32) {
            let mut args = Vec::with_capacity(sym.arity);
            let mut rem = c;
            for _ in 0..sym.arity {
                args.push(terms[rem % m].clone());
                rem /= m;
            }
            args.reverse();
            lits.push(literal(Formula::Atom(sym.name.clone(), args), bit()));
        }
    }
    for a in 0..m {
        for b in a + 1..m {
            lits.push(literal(Formula::Eq(terms[a].clone(), terms[b].clone()), bit()));
        }
    }
    and(lits)
}

fn hintikka(reg: &TypeRegistry, id: TypeId, terms: &mut Vec<Term>, var_base: &str) -> Formula {
    let vocab = reg.vocabulary(id).clone();
    let diagram = diagram_formula(&vocab, terms, reg.diagram(id));
    if reg.rank(id) == 0 {
        return diagram;
    }
    let y = format!("{var_base}{}", terms.len() - vocab.constants().len() + 1);
    terms.push(Term::Var(y.clone()));
    let kids: Vec<Formula> = reg
        .element_children(id)
        .iter()
        .map(|&c| hintikka(reg, c, terms, var_base))
        .collect();
    terms.pop();
    let mut parts = vec![diagram];
    parts.extend(kids.iter().map(|k| Formula::Exists(y.clone(), Box::new(k.clone()))));
    parts.push(Formula::Forall(y, Box::new(or(kids))));
    and(parts)
}

/// A first-order sentence true exactly on the structures whose rank-k type
/// is `id`.
pub fn materialize_type_sentence(reg: &TypeRegistry, id: TypeId) -> Result<Formula> {
    if reg.logic(id) != Logic::Fo {
        return Err(Error::Unsupported("sentences for MSO types".into()));
    }
    if reg.profile(id) != (0, 0) {
        return Err(Error::InvalidArgument("type has pinned parameters".into()));
    }
    if reg.rank(id) > MAX_RANK {
        return Err(Error::guard("materialize_max_rank", MAX_RANK as u128, reg.rank(id) as u128));
    }
    let vocab = reg.vocabulary(id).clone();
    if vocab.relations().len() > MAX_RELATIONS {
        return Err(Error::guard(
            "materialize_max_relations",
            MAX_RELATIONS as u128,
            vocab.relations().len() as u128,
        ));
    }
    let mut base = "x".to_string();
    while vocab.constants().iter().any(|c| c.starts_with(&base)) {
        base.insert(0, 'x');
    }
    let mut terms: Vec<Term> = vocab.constants().iter().map(|c| Term::Const(c.clone())).collect();
    Ok(hintikka(reg, id, &mut terms, &base))
}
