use std::collections::{BTreeMap, BTreeSet};

use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::structures::{Vocabulary, ORDER};

#[derive(Debug)]
enum Sexp {
    Atom(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }
}

fn err_at(pos: (usize, usize), msg: impl Into<String>) -> Error {
    Error::parse("formula", pos.0, pos.1, msg)
}

fn read(text: &str) -> Result<Sexp> {
    let mut tokens: Vec<(String, usize, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("");
        let mut chars = line.char_indices().peekable();
        while let Some((c0, ch)) = chars.next() {
            match ch {
                '(' | ')' => tokens.push((ch.to_string(), i + 1, c0 + 1)),
                c if c.is_whitespace() => {}
                _ => {
                    let mut tok = ch.to_string();
                    while let Some(&(_, c)) = chars.peek() {
                        if c == '(' || c == ')' || c.is_whitespace() {
                            break;
                        }
                        tok.push(c);
                        chars.next();
                    }
                    tokens.push((tok, i + 1, c0 + 1));
                }
            }
        }
    }
    let mut pos = 0;
    fn parse(tokens: &[(String, usize, usize)], pos: &mut usize) -> Result<Sexp> {
        let (tok, l, c) = tokens
            .get(*pos)
            .ok_or_else(|| {
                let (l, c) = tokens.last().map(|t| (t.1, t.2)).unwrap_or((1, 1));
                err_at((l, c), "unexpected end of input")
            })?
            .clone();
        *pos += 1;
        match tok.as_str() {
            "(" => {
                let mut items = Vec::new();
                loop {
                    match tokens.get(*pos) {
                        None => return Err(err_at((l, c), "unclosed `(`")),
                        Some((t, _, _)) if t == ")" => {
                            *pos += 1;
                            return Ok(Sexp::List(items, l, c));
                        }
                        Some(_) => items.push(parse(tokens, pos)?),
                    }
                }
            }
            ")" => Err(err_at((l, c), "unexpected `)`")),
            _ => Ok(Sexp::Atom(tok, l, c)),
        }
    }
    let e = parse(&tokens, &mut pos)?;
    if let Some((_, l, c)) = tokens.get(pos) {
        return Err(err_at((*l, *c), "trailing input after formula"));
    }
    Ok(e)
}

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "implies", "iff", "exists", "forall", "existsS", "forallS", "count", "=",
    "lt", "in", "true", "false",
];

struct Parser<'v> {
    vocab: Option<&'v Vocabulary>,
    fo: Vec<String>,
    so: Vec<String>,
    arities: BTreeMap<String, usize>,
}

impl Parser<'_> {
    fn ident(&self, e: &Sexp) -> Result<String> {
        match e {
            Sexp::Atom(s, ..) if !KEYWORDS.contains(&s.as_str()) && s != "(" => Ok(s.clone()),
            other => Err(err_at(other.pos(), "expected an identifier")),
        }
    }

    fn term(&self, e: &Sexp) -> Result<Term> {
        let name = self.ident(e)?;
        if self.fo.contains(&name) {
            return Ok(Term::Var(name));
        }
        if self.so.contains(&name) {
            return Err(err_at(e.pos(), format!("set variable `{name}` used as an element")));
        }
        if self.vocab.is_some_and(|v| v.constant_index(&name).is_some()) {
            return Ok(Term::Const(name));
        }
        Ok(Term::Var(name))
    }

    fn arity(&self, items: &[Sexp], n: usize, pos: (usize, usize), head: &str) -> Result<()> {
        if items.len() != n + 1 {
            return Err(err_at(
                pos,
                format!("`{head}` takes {n} argument(s), got {}", items.len() - 1),
            ));
        }
        Ok(())
    }

    fn formula(&mut self, e: &Sexp) -> Result<Formula> {
        let (items, pos) = match e {
            Sexp::Atom(s, ..) if s == "true" => return Ok(Formula::True),
            Sexp::Atom(s, ..) if s == "false" => return Ok(Formula::False),
            Sexp::Atom(s, l, c) => return Err(err_at((*l, *c), format!("expected a formula, found `{s}`"))),
            Sexp::List(items, l, c) => (items, (*l, *c)),
        };
        let head = match items.first() {
            Some(Sexp::Atom(h, ..)) => h.as_str(),
            Some(other) => return Err(err_at(other.pos(), "expected an operator")),
            None => return Err(err_at(pos, "empty list")),
        };
        match head {
            "true" | "false" => {
                self.arity(items, 0, pos, head)?;
                Ok(if head == "true" { Formula::True } else { Formula::False })
            }
            "and" | "or" => {
                let fs = items[1..]
                    .iter()
                    .map(|x| self.formula(x))
                    .collect::<Result<Vec<_>>>()?;
                Ok(if head == "and" { Formula::And(fs) } else { Formula::Or(fs) })
            }
            "not" => {
                self.arity(items, 1, pos, head)?;
                Ok(Formula::Not(Box::new(self.formula(&items[1])?)))
            }
            "implies" | "iff" => {
                self.arity(items, 2, pos, head)?;
                let a = Box::new(self.formula(&items[1])?);
                let b = Box::new(self.formula(&items[2])?);
                Ok(if head == "implies" { Formula::Implies(a, b) } else { Formula::Iff(a, b) })
            }
            "exists" | "forall" | "existsS" | "forallS" => {
                self.arity(items, 2, pos, head)?;
                let x = self.ident(&items[1])?;
                let set = head.ends_with('S');
                if set {
                    self.so.push(x.clone());
                } else {
                    self.fo.push(x.clone());
                }
                let body = self.formula(&items[2]);
                if set {
                    self.so.pop();
                } else {
                    self.fo.pop();
                }
                let body = Box::new(body?);
                Ok(match head {
                    "exists" => Formula::Exists(x, body),
                    "forall" => Formula::Forall(x, body),
                    "existsS" => Formula::ExistsSet(x, body),
                    _ => Formula::ForallSet(x, body),
                })
            }
            "count" => {
                self.arity(items, 3, pos, head)?;
                let p: u64 = match &items[1] {
                    Sexp::Atom(s, ..) => s.parse().ok().filter(|&p| p >= 1),
                    _ => None,
                }
                .ok_or_else(|| err_at(items[1].pos(), "counting modulus must be a positive integer"))?;
                let x = self.ident(&items[2])?;
                self.fo.push(x.clone());
                let body = self.formula(&items[3]);
                self.fo.pop();
                Ok(Formula::Count(p, x, Box::new(body?)))
            }
            "=" => {
                self.arity(items, 2, pos, head)?;
                Ok(Formula::Eq(self.term(&items[1])?, self.term(&items[2])?))
            }
            "lt" | "<" => {
                self.arity(items, 2, pos, head)?;
                Ok(Formula::Atom(
                    ORDER.to_string(),
                    vec![self.term(&items[1])?, self.term(&items[2])?],
                ))
            }
            "in" => {
                self.arity(items, 2, pos, head)?;
                let t = self.term(&items[1])?;
                let set = self.ident(&items[2])?;
                if self.fo.contains(&set) {
                    return Err(err_at(items[2].pos(), format!("`{set}` is an element variable")));
                }
                Ok(Formula::In(t, set))
            }
            rel => {
                let args = items[1..]
                    .iter()
                    .map(|x| self.term(x))
                    .collect::<Result<Vec<_>>>()?;
                if args.is_empty() {
                    return Err(err_at(pos, format!("relation `{rel}` applied to no arguments")));
                }
                match self.vocab {
                    Some(v) => {
                        let idx = v
                            .relation_index(rel)
                            .ok_or_else(|| Error::UnknownSymbol(rel.to_string()))?;
                        let expected = v.relations()[idx].arity;
                        if expected != args.len() {
                            return Err(Error::ArityMismatch {
                                name: rel.to_string(),
                                expected,
                                got: args.len(),
                            });
                        }
                    }
                    None => match self.arities.get(rel) {
                        Some(&a) if a != args.len() => {
                            return Err(Error::ArityMismatch {
                                name: rel.to_string(),
                                expected: a,
                                got: args.len(),
                            })
                        }
                        _ => {
                            self.arities.insert(rel.to_string(), args.len());
                        }
                    },
                }
                Ok(Formula::Atom(rel.to_string(), args))
            }
        }
    }
}

/// Renames bound variables so that no binder shadows another binder or a
/// free variable. Names that are already unique are kept.
pub(crate) fn alpha_rename(f: &Formula) -> Formula {
    let (free_fo, free_so) = f.free_variables();
    let mut taken: BTreeSet<String> = f.names();
    taken.extend(free_fo.iter().cloned());
    let mut used: BTreeSet<String> = free_fo.into_iter().chain(free_so).collect();
    fn fresh(base: &str, taken: &mut BTreeSet<String>, used: &mut BTreeSet<String>) -> String {
        if !used.contains(base) {
            used.insert(base.to_string());
            return base.to_string();
        }
        let mut i = 1;
        loop {
            let cand = format!("{base}_{i}");
            if !taken.contains(&cand) && !used.contains(&cand) {
                taken.insert(cand.clone());
                used.insert(cand.clone());
                return cand;
            }
            i += 1;
        }
    }
    fn go(
        f: &Formula,
        map: &mut Vec<(String, String)>,
        taken: &mut BTreeSet<String>,
        used: &mut BTreeSet<String>,
    ) -> Formula {
        let look = |map: &Vec<(String, String)>, n: &str| {
            map.iter()
                .rev()
                .find(|(from, _)| from == n)
                .map(|(_, to)| to.clone())
                .unwrap_or_else(|| n.to_string())
        };
        let term = |map: &Vec<(String, String)>, t: &Term| match t {
            Term::Var(v) => Term::Var(look(map, v)),
            c => c.clone(),
        };
        let bind = |x: &str,
                        body: &Formula,
                        map: &mut Vec<(String, String)>,
                        taken: &mut BTreeSet<String>,
                        used: &mut BTreeSet<String>| {
            let nx = fresh(x, taken, used);
            map.push((x.to_string(), nx.clone()));
            let b = go(body, map, taken, used);
            map.pop();
            (nx, Box::new(b))
        };
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(r, args) => Formula::Atom(r.clone(), args.iter().map(|t| term(map, t)).collect()),
            Formula::Eq(a, b) => Formula::Eq(term(map, a), term(map, b)),
            Formula::In(t, s) => Formula::In(term(map, t), look(map, s)),
            Formula::Not(g) => Formula::Not(Box::new(go(g, map, taken, used))),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| go(g, map, taken, used)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| go(g, map, taken, used)).collect()),
            Formula::Implies(a, b) => {
                let a = go(a, map, taken, used);
                Formula::Implies(Box::new(a), Box::new(go(b, map, taken, used)))
            }
            Formula::Iff(a, b) => {
                let a = go(a, map, taken, used);
                Formula::Iff(Box::new(a), Box::new(go(b, map, taken, used)))
            }
            Formula::Exists(x, g) => {
                let (x, g) = bind(x, g, map, taken, used);
                Formula::Exists(x, g)
            }
            Formula::Forall(x, g) => {
                let (x, g) = bind(x, g, map, taken, used);
                Formula::Forall(x, g)
            }
            Formula::Count(p, x, g) => {
                let (x, g) = bind(x, g, map, taken, used);
                Formula::Count(*p, x, g)
            }
            Formula::ExistsSet(x, g) => {
                let (x, g) = bind(x, g, map, taken, used);
                Formula::ExistsSet(x, g)
            }
            Formula::ForallSet(x, g) => {
                let (x, g) = bind(x, g, map, taken, used);
                Formula::ForallSet(x, g)
            }
        }
    }
    go(f, &mut Vec::new(), &mut taken, &mut used)
}

/// Parses an s-expression formula and checks it against `vocab`. The order
/// symbol (`lt`) is always accepted: it names the auxiliary order of an
/// expansion.
pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Formula> {
    let sexp = read(text)?;
    let mut p = Parser {
        vocab: Some(vocab),
        fo: Vec::new(),
        so: Vec::new(),
        arities: BTreeMap::new(),
    };
    Ok(alpha_rename(&p.formula(&sexp)?))
}

/// Parses without a vocabulary: relation arities are inferred (and must be
/// used consistently), and every unbound identifier is a free variable.
pub fn parse_formula_infer(text: &str) -> Result<Formula> {
    let sexp = read(text)?;
    let mut p = Parser {
        vocab: None,
        fo: Vec::new(),
        so: Vec::new(),
        arities: BTreeMap::new(),
    };
    Ok(alpha_rename(&p.formula(&sexp)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> Vocabulary {
        Vocabulary::new([("E", 2)], &["c"]).unwrap()
    }

    #[test]
    fn grammar_examples() {
        let v = Vocabulary::empty();
        assert_eq!(
            parse_formula("(exists x (= x x))", &v).unwrap().to_string(),
            "(exists x (= x x))"
        );
        assert_eq!(
            parse_formula("(count 2 x (= x x))", &v).unwrap().to_string(),
            "(count 2 x (= x x))"
        );
        let f = parse_formula("(existsS X (forall x (in x X)))", &v).unwrap();
        assert_eq!(f.to_string(), "(existsS X (forall x (in x X)))");
        assert!(f.is_sentence());
    }

    #[test]
    fn checks_vocabulary() {
        let v = graph();
        assert!(parse_formula("(exists x (E x c))", &v).unwrap().is_sentence());
        assert!(matches!(
            parse_formula("(exists x (F x x))", &v),
            Err(Error::UnknownSymbol(_))
        ));
        assert!(matches!(
            parse_formula("(exists x (E x))", &v),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(parse_formula("(exists x (lt x c))", &v).is_ok());
        assert!(matches!(
            parse_formula_infer("(and (R x) (R x y))"),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let v = Vocabulary::empty();
        match parse_formula("(exists x\n  (= x x)", &v) {
            Err(Error::Parse { line: 1, col: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_formula("(exists x (frob))", &v) {
            Err(Error::Parse { line: 1, col: 11, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("(count 0 x true)", &v).is_err());
        assert!(parse_formula("(exists x (= x x)) x", &v).is_err());
        assert!(parse_formula("(existsS X (= X X))", &v).is_err());
    }

    #[test]
    fn alpha_renaming_removes_shadowing() {
        let f = parse_formula_infer("(and (P x) (exists x (exists x (P x))))").unwrap();
        assert_eq!(f.to_string(), "(and (P x) (exists x_1 (exists x_2 (P x_2))))");
    }
}
