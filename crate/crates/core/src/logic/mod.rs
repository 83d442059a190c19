//! FO, MSO and CMSO formulas: syntax, parsing, quantifier rank, evaluation.

mod eval;
pub mod macros;
mod parse;

pub use eval::{evaluate, evaluate_with, Assignment, Compiled};
pub use parse::{parse_formula, parse_formula_infer};

use std::collections::BTreeSet;
use std::fmt;

use crate::structures::ORDER;

/// Which quantifier families a formula (or type) may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Logic {
    Fo,
    Mso,
}

impl Logic {
    pub fn name(self) -> &'static str {
        match self {
            Logic::Fo => "FO",
            Logic::Mso => "MSO",
        }
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Logic {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fo" => Ok(Logic::Fo),
            "mso" => Ok(Logic::Mso),
            _ => Err(crate::Error::InvalidArgument(format!("unknown logic `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    In(Term, String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsSet(String, Box<Formula>),
    ForallSet(String, Box<Formula>),
    /// `Q_p x φ`: the number of satisfying elements is divisible by `p`.
    Count(u64, String, Box<Formula>),
}

/// Small constructors used by macros and tests.
pub mod build {
    use super::{Formula, Term};

    pub fn atom(rel: &str, vars: &[&str]) -> Formula {
        Formula::Atom(rel.to_string(), vars.iter().map(|v| Term::var(v)).collect())
    }
    pub fn lt(x: &str, y: &str) -> Formula {
        atom(crate::structures::ORDER, &[x, y])
    }
    pub fn eq(x: &str, y: &str) -> Formula {
        Formula::Eq(Term::var(x), Term::var(y))
    }
    pub fn member(x: &str, set: &str) -> Formula {
        Formula::In(Term::var(x), set.to_string())
    }
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(fs: Vec<Formula>) -> Formula {
        Formula::And(fs)
    }
    pub fn or(fs: Vec<Formula>) -> Formula {
        Formula::Or(fs)
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(f))
    }
    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }
    pub fn exists_set(x: &str, f: Formula) -> Formula {
        Formula::ExistsSet(x.to_string(), Box::new(f))
    }
    pub fn forall_set(x: &str, f: Formula) -> Formula {
        Formula::ForallSet(x.to_string(), Box::new(f))
    }
    pub fn count(p: u64, x: &str, f: Formula) -> Formula {
        Formula::Count(p, x.to_string(), Box::new(f))
    }
}

impl Formula {
    /// Maximum nesting depth of quantifiers; `Q_p` counts as one level.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) | Formula::In(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0)
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::Exists(_, f)
            | Formula::Forall(_, f)
            | Formula::ExistsSet(_, f)
            | Formula::ForallSet(_, f)
            | Formula::Count(_, _, f) => 1 + f.quantifier_rank(),
        }
    }

    pub fn uses_sets(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| {
            if matches!(f, Formula::ExistsSet(..) | Formula::ForallSet(..) | Formula::In(..)) {
                found = true;
            }
        });
        found
    }

    pub fn uses_counting(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| found |= matches!(f, Formula::Count(..)));
        found
    }

    /// Whether the order symbol occurs.
    pub fn uses_relation(&self, rel: &str) -> bool {
        let mut found = false;
        self.walk(&mut |f| {
            if let Formula::Atom(r, _) = f {
                found |= r == rel;
            }
        });
        found
    }

    pub fn uses_order(&self) -> bool {
        self.uses_relation(ORDER)
    }

    /// Relation symbols with their arities, in order of first occurrence.
    pub fn relations(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Atom(r, args) = f {
                if !out.iter().any(|(n, _)| n == r) {
                    out.push((r.clone(), args.len()));
                }
            }
        });
        out
    }

    fn walk(&self, visit: &mut impl FnMut(&Formula)) {
        visit(self);
        match self {
            Formula::Not(f)
            | Formula::Exists(_, f)
            | Formula::Forall(_, f)
            | Formula::ExistsSet(_, f)
            | Formula::ForallSet(_, f)
            | Formula::Count(_, _, f) => f.walk(visit),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.walk(visit)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            _ => {}
        }
    }

    /// Free first-order and set variables, each sorted by name.
    pub fn free_variables(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut fo = BTreeSet::new();
        let mut so = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut Vec::new(), &mut fo, &mut so);
        (fo, so)
    }

    fn collect_free(
        &self,
        bound_fo: &mut Vec<String>,
        bound_so: &mut Vec<String>,
        fo: &mut BTreeSet<String>,
        so: &mut BTreeSet<String>,
    ) {
        let term = |t: &Term, bound_fo: &Vec<String>, fo: &mut BTreeSet<String>| {
            if let Term::Var(v) = t {
                if !bound_fo.contains(v) {
                    fo.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => args.iter().for_each(|t| term(t, bound_fo, fo)),
            Formula::Eq(a, b) => {
                term(a, bound_fo, fo);
                term(b, bound_fo, fo);
            }
            Formula::In(t, set) => {
                term(t, bound_fo, fo);
                if !bound_so.contains(set) {
                    so.insert(set.clone());
                }
            }
            Formula::Not(f) => f.collect_free(bound_fo, bound_so, fo, so),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_free(bound_fo, bound_so, fo, so))
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound_fo, bound_so, fo, so);
                b.collect_free(bound_fo, bound_so, fo, so);
            }
            Formula::Exists(x, f) | Formula::Forall(x, f) | Formula::Count(_, x, f) => {
                bound_fo.push(x.clone());
                f.collect_free(bound_fo, bound_so, fo, so);
                bound_fo.pop();
            }
            Formula::ExistsSet(x, f) | Formula::ForallSet(x, f) => {
                bound_so.push(x.clone());
                f.collect_free(bound_fo, bound_so, fo, so);
                bound_so.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        let (fo, so) = self.free_variables();
        fo.is_empty() && so.is_empty()
    }

    /// Every identifier occurring anywhere (bound, free, sets, constants).
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Atom(_, args) => args.iter().for_each(|t| {
                out.insert(t.name().to_string());
            }),
            Formula::Eq(a, b) => {
                out.insert(a.name().to_string());
                out.insert(b.name().to_string());
            }
            Formula::In(t, s) => {
                out.insert(t.name().to_string());
                out.insert(s.clone());
            }
            Formula::Exists(x, _)
            | Formula::Forall(x, _)
            | Formula::ExistsSet(x, _)
            | Formula::ForallSet(x, _)
            | Formula::Count(_, x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Replaces free occurrences of the element variable `from` by `to`.
    /// `to` must not be bound anywhere inside the formula.
    pub fn substitute(&self, from: &str, to: &Term) -> Formula {
        let sub = |t: &Term| match t {
            Term::Var(v) if v == from => to.clone(),
            other => other.clone(),
        };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(r, args) => Formula::Atom(r.clone(), args.iter().map(sub).collect()),
            Formula::Eq(a, b) => Formula::Eq(sub(a), sub(b)),
            Formula::In(t, s) => Formula::In(sub(t), s.clone()),
            Formula::Not(f) => Formula::Not(Box::new(f.substitute(from, to))),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(from, to)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(from, to)).collect()),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.substitute(from, to)),
                Box::new(b.substitute(from, to)),
            ),
            Formula::Iff(a, b) => Formula::Iff(
                Box::new(a.substitute(from, to)),
                Box::new(b.substitute(from, to)),
            ),
            Formula::Exists(x, f) if x == from => Formula::Exists(x.clone(), f.clone()),
            Formula::Forall(x, f) if x == from => Formula::Forall(x.clone(), f.clone()),
            Formula::Count(p, x, f) if x == from => Formula::Count(*p, x.clone(), f.clone()),
            Formula::Exists(x, f) => Formula::Exists(x.clone(), Box::new(f.substitute(from, to))),
            Formula::Forall(x, f) => Formula::Forall(x.clone(), Box::new(f.substitute(from, to))),
            Formula::Count(p, x, f) => Formula::Count(*p, x.clone(), Box::new(f.substitute(from, to))),
            Formula::ExistsSet(x, f) => Formula::ExistsSet(x.clone(), Box::new(f.substitute(from, to))),
            Formula::ForallSet(x, f) => Formula::ForallSet(x.clone(), Box::new(f.substitute(from, to))),
        }
    }

    /// Replaces every atom of relation `rel` by `expand(args)`.
    pub fn replace_relation(&self, rel: &str, expand: &mut impl FnMut(&[Term]) -> Formula) -> Formula {
        let mut rec = |f: &Formula| f.replace_relation(rel, expand);
        match self {
            Formula::Atom(r, args) if r == rel => expand(args),
            Formula::Not(f) => Formula::Not(Box::new(rec(f))),
            Formula::And(fs) => Formula::And(fs.iter().map(&mut rec).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(&mut rec).collect()),
            Formula::Implies(a, b) => {
                let a = rec(a);
                Formula::Implies(Box::new(a), Box::new(rec(b)))
            }
            Formula::Iff(a, b) => {
                let a = rec(a);
                Formula::Iff(Box::new(a), Box::new(rec(b)))
            }
            Formula::Exists(x, f) => Formula::Exists(x.clone(), Box::new(rec(f))),
            Formula::Forall(x, f) => Formula::Forall(x.clone(), Box::new(rec(f))),
            Formula::Count(p, x, f) => Formula::Count(*p, x.clone(), Box::new(rec(f))),
            Formula::ExistsSet(x, f) => Formula::ExistsSet(x.clone(), Box::new(rec(f))),
            Formula::ForallSet(x, f) => Formula::ForallSet(x.clone(), Box::new(rec(f))),
            other => other.clone(),
        }
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    f.write_str(t.name())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, fs: &[Formula]| -> fmt::Result {
            write!(f, "({head}")?;
            for g in fs {
                write!(f, " {g}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(r, args) => {
                if r == ORDER {
                    f.write_str("(lt")?;
                } else {
                    write!(f, "({r}")?;
                }
                for a in args {
                    f.write_str(" ")?;
                    write_term(f, a)?;
                }
                f.write_str(")")
            }
            Formula::Eq(a, b) => write!(f, "(= {} {})", a.name(), b.name()),
            Formula::In(t, s) => write!(f, "(in {} {s})", t.name()),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(fs) => list(f, "and", fs),
            Formula::Or(fs) => list(f, "or", fs),
            Formula::Implies(a, b) => write!(f, "(implies {a} {b})"),
            Formula::Iff(a, b) => write!(f, "(iff {a} {b})"),
            Formula::Exists(x, g) => write!(f, "(exists {x} {g})"),
            Formula::Forall(x, g) => write!(f, "(forall {x} {g})"),
            Formula::ExistsSet(x, g) => write!(f, "(existsS {x} {g})"),
            Formula::ForallSet(x, g) => write!(f, "(forallS {x} {g})"),
            Formula::Count(p, x, g) => write!(f, "(count {p} {x} {g})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    #[test]
    fn ranks() {
        assert_eq!(atom("E", &["x", "y"]).quantifier_rank(), 0);
        assert_eq!(exists("x", exists("y", atom("E", &["x", "y"]))).quantifier_rank(), 2);
        assert_eq!(
            count(2, "x", exists("y", atom("E", &["x", "y"]))).quantifier_rank(),
            2
        );
    }

    #[test]
    fn free_variables_respect_binding() {
        let f = and(vec![exists("x", atom("E", &["x", "y"])), member("x", "X")]);
        let (fo, so) = f.free_variables();
        assert_eq!(fo.into_iter().collect::<Vec<_>>(), vec!["x", "y"]);
        assert_eq!(so.into_iter().collect::<Vec<_>>(), vec!["X"]);
        assert!(!f.is_sentence());
    }

    #[test]
    fn substitution_stops_at_rebinding() {
        let f = and(vec![eq("x", "y"), exists("x", eq("x", "y"))]);
        let g = f.substitute("x", &Term::var("z"));
        assert_eq!(g.to_string(), "(and (= z y) (exists x (= x y)))");
    }
}
