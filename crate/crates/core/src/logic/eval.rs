use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Formula, Term};
use crate::config::Guards;
use crate::error::{Error, Result};
use crate::structures::Structure;

/// Values for the free variables of a formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub elements: BTreeMap<String, usize>,
    pub sets: BTreeMap<String, BTreeSet<usize>>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_element(mut self, var: &str, value: usize) -> Self {
        self.elements.insert(var.to_string(), value);
        self
    }

    pub fn with_set(mut self, var: &str, members: impl IntoIterator<Item = usize>) -> Self {
        self.sets.insert(var.to_string(), members.into_iter().collect());
        self
    }
}

#[derive(Debug, Clone, Copy)]
enum Arg {
    Slot(usize),
    Const(usize),
}

#[derive(Debug, Clone, Copy)]
enum Quant {
    Exists,
    Forall,
    ExistsSet,
    ForallSet,
    Count(u64),
}

#[derive(Debug)]
enum Node {
    Bool(bool),
    Rel(usize, Vec<Arg>),
    Eq(Arg, Arg),
    In(Arg, usize),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Quant {
        kind: Quant,
        slot: usize,
        body: Box<Node>,
        /// Memo table index and the element slots the value depends on.
        memo: Option<(usize, Vec<usize>)>,
    },
}

/// A formula compiled to slot-addressed form, reusable across structures.
#[derive(Debug)]
pub struct Compiled {
    root: Node,
    rels: Vec<(String, usize)>,
    consts: Vec<String>,
    free_fo: Vec<(String, usize)>,
    free_so: Vec<(String, usize)>,
    n_fo: usize,
    n_so: usize,
    uses_set_quantifiers: bool,
    memo_tables: usize,
}

struct Deps {
    fo: BTreeSet<usize>,
    so: bool,
    heavy: bool,
}

struct Compiler {
    rels: Vec<(String, usize)>,
    consts: Vec<String>,
    free_fo: Vec<(String, usize)>,
    free_so: Vec<(String, usize)>,
    scope_fo: Vec<(String, usize)>,
    scope_so: Vec<(String, usize)>,
    n_fo: usize,
    n_so: usize,
    memo_tables: usize,
    uses_set_quantifiers: bool,
}

impl Compiler {
    fn arg(&mut self, t: &Term, deps: &mut Deps) -> Arg {
        match t {
            Term::Const(c) => {
                let idx = match self.consts.iter().position(|x| x == c) {
                    Some(i) => i,
                    None => {
                        self.consts.push(c.clone());
                        self.consts.len() - 1
                    }
                };
                Arg::Const(idx)
            }
            Term::Var(v) => {
                let slot = match self.scope_fo.iter().rev().find(|(n, _)| n == v) {
                    Some(&(_, s)) => s,
                    None => match self.free_fo.iter().find(|(n, _)| n == v) {
                        Some(&(_, s)) => s,
                        None => {
                            let s = self.n_fo;
                            self.n_fo += 1;
                            self.free_fo.push((v.clone(), s));
                            s
                        }
                    },
                };
                deps.fo.insert(slot);
                Arg::Slot(slot)
            }
        }
    }

    fn set_slot(&mut self, name: &str) -> usize {
        match self.scope_so.iter().rev().find(|(n, _)| n == name) {
            Some(&(_, s)) => s,
            None => match self.free_so.iter().find(|(n, _)| n == name) {
                Some(&(_, s)) => s,
                None => {
                    let s = self.n_so;
                    self.n_so += 1;
                    self.free_so.push((name.to_string(), s));
                    s
                }
            },
        }
    }

    fn compile(&mut self, f: &Formula) -> (Node, Deps) {
        let mut deps = Deps {
            fo: BTreeSet::new(),
            so: false,
            heavy: false,
        };
        let node = match f {
            Formula::True => Node::Bool(true),
            Formula::False => Node::Bool(false),
            Formula::Atom(r, args) => {
                let idx = match self.rels.iter().position(|(n, _)| n == r) {
                    Some(i) => i,
                    None => {
                        self.rels.push((r.clone(), args.len()));
                        self.rels.len() - 1
                    }
                };
                let args = args.iter().map(|t| self.arg(t, &mut deps)).collect();
                Node::Rel(idx, args)
            }
            Formula::Eq(a, b) => {
                let a = self.arg(a, &mut deps);
                Node::Eq(a, self.arg(b, &mut deps))
            }
            Formula::In(t, s) => {
                let a = self.arg(t, &mut deps);
                deps.so = true;
                Node::In(a, self.set_slot(s))
            }
            Formula::Not(g) => {
                let (n, d) = self.compile(g);
                deps = d;
                Node::Not(Box::new(n))
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let mut nodes = Vec::with_capacity(fs.len());
                for g in fs {
                    let (n, d) = self.compile(g);
                    merge(&mut deps, d);
                    nodes.push(n);
                }
                if matches!(f, Formula::And(_)) {
                    Node::And(nodes)
                } else {
                    Node::Or(nodes)
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let (na, da) = self.compile(a);
                let (nb, db) = self.compile(b);
                merge(&mut deps, da);
                merge(&mut deps, db);
                if matches!(f, Formula::Implies(..)) {
                    Node::Implies(Box::new(na), Box::new(nb))
                } else {
                    Node::Iff(Box::new(na), Box::new(nb))
                }
            }
            Formula::Exists(x, g) | Formula::Forall(x, g) | Formula::Count(_, x, g) => {
                let slot = self.n_fo;
                self.n_fo += 1;
                self.scope_fo.push((x.clone(), slot));
                let (body, mut d) = self.compile(g);
                self.scope_fo.pop();
                d.fo.remove(&slot);
                let kind = match f {
                    Formula::Exists(..) => Quant::Exists,
                    Formula::Forall(..) => Quant::Forall,
                    Formula::Count(p, ..) => Quant::Count(*p),
                    _ => unreachable!(),
                };
                let memo = self.memo_for(&d);
                deps = d;
                Node::Quant {
                    kind,
                    slot,
                    body: Box::new(body),
                    memo,
                }
            }
            Formula::ExistsSet(x, g) | Formula::ForallSet(x, g) => {
                self.uses_set_quantifiers = true;
                let slot = self.n_so;
                self.n_so += 1;
                self.scope_so.push((x.clone(), slot));
                let (body, mut d) = self.compile(g);
                self.scope_so.pop();
                d.heavy = true;
                // Set dependencies are tracked coarsely: any free set variable
                // in the body other than the bound one disables memoization.
                d.so = self.body_has_free_sets(g, x);
                let memo = self.memo_for(&d);
                deps = d;
                let kind = if matches!(f, Formula::ExistsSet(..)) {
                    Quant::ExistsSet
                } else {
                    Quant::ForallSet
                };
                Node::Quant {
                    kind,
                    slot,
                    body: Box::new(body),
                    memo,
                }
            }
        };
        (node, deps)
    }

    fn body_has_free_sets(&self, body: &Formula, bound: &str) -> bool {
        let (_, so) = body.free_variables();
        so.iter().any(|s| s != bound)
    }

    /// Quantifier subformulas with inner set quantification and no free set
    /// variables are cached on the values of their free element variables.
    fn memo_for(&mut self, d: &Deps) -> Option<(usize, Vec<usize>)> {
        if d.heavy && !d.so {
            let id = self.memo_tables;
            self.memo_tables += 1;
            Some((id, d.fo.iter().copied().collect()))
        } else {
            None
        }
    }
}

fn merge(into: &mut Deps, d: Deps) {
    into.fo.extend(d.fo);
    into.so |= d.so;
    into.heavy |= d.heavy;
}

struct Ctx<'a> {
    s: &'a Structure,
    rel_map: Vec<usize>,
    const_vals: Vec<usize>,
    fo: Vec<usize>,
    so: Vec<u64>,
    memo: Vec<HashMap<Vec<usize>, bool>>,
    tuple: Vec<usize>,
}

impl Ctx<'_> {
    #[inline]
    fn val(&self, a: Arg) -> usize {
        match a {
            Arg::Slot(s) => self.fo[s],
            Arg::Const(c) => self.const_vals[c],
        }
    }

    fn eval(&mut self, n: &Node) -> bool {
        match n {
            Node::Bool(b) => *b,
            Node::Rel(r, args) => {
                let start = self.tuple.len();
                for &a in args {
                    let v = self.val(a);
                    self.tuple.push(v);
                }
                let res = self.s.holds(self.rel_map[*r], &self.tuple[start..]);
                self.tuple.truncate(start);
                res
            }
            Node::Eq(a, b) => self.val(*a) == self.val(*b),
            Node::In(a, s) => self.so[*s] >> self.val(*a) & 1 == 1,
            Node::Not(g) => !self.eval(g),
            Node::And(gs) => gs.iter().all(|g| self.eval(g)),
            Node::Or(gs) => gs.iter().any(|g| self.eval(g)),
            Node::Implies(a, b) => !self.eval(a) || self.eval(b),
            Node::Iff(a, b) => self.eval(a) == self.eval(b),
            Node::Quant {
                kind,
                slot,
                body,
                memo,
            } => {
                if let Some((id, deps)) = memo {
                    let key: Vec<usize> = deps.iter().map(|&d| self.fo[d]).collect();
                    if let Some(&v) = self.memo[*id].get(&key) {
                        return v;
                    }
                    let v = self.quant(*kind, *slot, body);
                    self.memo[*id].insert(key, v);
                    v
                } else {
                    self.quant(*kind, *slot, body)
                }
            }
        }
    }

    fn quant(&mut self, kind: Quant, slot: usize, body: &Node) -> bool {
        let n = self.s.size();
        match kind {
            Quant::Exists => (0..n).any(|a| {
                self.fo[slot] = a;
                self.eval(body)
            }),
            Quant::Forall => (0..n).all(|a| {
                self.fo[slot] = a;
                self.eval(body)
            }),
            Quant::Count(p) => {
                let mut c = 0u64;
                for a in 0..n {
                    self.fo[slot] = a;
                    if self.eval(body) {
                        c += 1;
                    }
                }
                c % p == 0
            }
            Quant::ExistsSet => (0..1u64 << n).any(|m| {
                self.so[slot] = m;
                self.eval(body)
            }),
            Quant::ForallSet => (0..1u64 << n).all(|m| {
                self.so[slot] = m;
                self.eval(body)
            }),
        }
    }
}

impl Compiled {
    pub fn new(f: &Formula) -> Self {
        let mut c = Compiler {
            rels: Vec::new(),
            consts: Vec::new(),
            free_fo: Vec::new(),
            free_so: Vec::new(),
            scope_fo: Vec::new(),
            scope_so: Vec::new(),
            n_fo: 0,
            n_so: 0,
            memo_tables: 0,
            uses_set_quantifiers: false,
        };
        let (root, _) = c.compile(f);
        Compiled {
            root,
            rels: c.rels,
            consts: c.consts,
            free_fo: c.free_fo,
            free_so: c.free_so,
            n_fo: c.n_fo,
            n_so: c.n_so,
            uses_set_quantifiers: c.uses_set_quantifiers,
            memo_tables: c.memo_tables,
        }
    }

    /// Evaluates on `s` under `a`.
    pub fn eval(&self, s: &Structure, a: &Assignment, guards: &Guards) -> Result<bool> {
        let n = s.size();
        let set_limit = guards.eval_max_set_size.min(63);
        if (self.uses_set_quantifiers || self.n_so > 0) && n > set_limit {
            return Err(Error::guard("eval_max_set_size", set_limit as u128, n as u128));
        }
        let mut rel_map = Vec::with_capacity(self.rels.len());
        for (name, arity) in &self.rels {
            let idx = s.vocab().relation_index(name).ok_or_else(|| {
                Error::VocabularyMismatch(format!("structure lacks relation `{name}`"))
            })?;
            let actual = s.vocab().relations()[idx].arity;
            if actual != *arity {
                return Err(Error::ArityMismatch {
                    name: name.clone(),
                    expected: actual,
                    got: *arity,
                });
            }
            rel_map.push(idx);
        }
        let mut const_vals = Vec::with_capacity(self.consts.len());
        for c in &self.consts {
            let idx = s.vocab().constant_index(c).ok_or_else(|| {
                Error::VocabularyMismatch(format!("structure lacks constant `{c}`"))
            })?;
            const_vals.push(s.constant(idx));
        }
        let mut fo = vec![0; self.n_fo];
        for (name, slot) in &self.free_fo {
            let v = *a
                .elements
                .get(name)
                .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            if v >= n {
                return Err(Error::ParameterOutOfDomain(format!("{name} = {v}")));
            }
            fo[*slot] = v;
        }
        let mut so = vec![0u64; self.n_so];
        for (name, slot) in &self.free_so {
            let set = a
                .sets
                .get(name)
                .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            let mut mask = 0u64;
            for &e in set {
                if e >= n || e >= 64 {
                    return Err(Error::ParameterOutOfDomain(format!("{name} contains {e}")));
                }
                mask |= 1 << e;
            }
            so[*slot] = mask;
        }
        let mut ctx = Ctx {
            s,
            rel_map,
            const_vals,
            fo,
            so,
            memo: vec![HashMap::new(); self.memo_tables],
            tuple: Vec::with_capacity(8),
        };
        Ok(ctx.eval(&self.root))
    }
}

/// Evaluates `f` on `s` under `a` with default guards.
pub fn evaluate(s: &Structure, f: &Formula, a: &Assignment) -> Result<bool> {
    evaluate_with(s, f, a, &Guards::default())
}

pub fn evaluate_with(s: &Structure, f: &Formula, a: &Assignment, guards: &Guards) -> Result<bool> {
    Compiled::new(f).eval(s, a, guards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::build::*;
    use crate::logic::parse_formula_infer;
    use crate::structures::{LinearOrder, Vocabulary};
    use std::sync::Arc;

    fn sentence(text: &str) -> Formula {
        parse_formula_infer(text).unwrap()
    }

    #[test]
    fn basic_semantics() {
        let two = Structure::pure_set(2);
        let f = sentence("(exists x (exists y (not (= x y))))");
        assert!(evaluate(&two, &f, &Assignment::new()).unwrap());
        assert!(!evaluate(&Structure::pure_set(1), &f, &Assignment::new()).unwrap());
        let empty = Structure::pure_set(0);
        assert!(!evaluate(&empty, &sentence("(exists x (= x x))"), &Assignment::new()).unwrap());
        assert!(evaluate(&empty, &sentence("(forall x (not (= x x)))"), &Assignment::new()).unwrap());
    }

    #[test]
    fn counting_quantifier_divisibility() {
        let q2 = sentence("(count 2 x (= x x))");
        let a = Assignment::new();
        assert!(!evaluate(&Structure::pure_set(3), &q2, &a).unwrap());
        assert!(evaluate(&Structure::pure_set(4), &q2, &a).unwrap());
        assert!(evaluate(&Structure::pure_set(0), &q2, &a).unwrap());
        let q1 = sentence("(count 1 x (= x x))");
        assert!((0..5).all(|n| evaluate(&Structure::pure_set(n), &q1, &a).unwrap()));
    }

    #[test]
    fn free_variables_and_sets() {
        let v = Arc::new(Vocabulary::new([("E", 2)], &["c"]).unwrap());
        let mut s = Structure::new(v, 3).unwrap();
        s.insert("E", &[0, 1]).unwrap();
        s.set_constant("c", 1).unwrap();
        let f = and(vec![atom("E", &["x", "y"]), member("y", "Y")]);
        let ok = Assignment::new().with_element("x", 0).with_element("y", 1).with_set("Y", [1]);
        assert!(evaluate(&s, &f, &ok).unwrap());
        let missing = Assignment::new().with_element("x", 0);
        assert!(matches!(evaluate(&s, &f, &missing), Err(Error::UnboundVariable(_))));
        let out = Assignment::new().with_element("x", 7).with_element("y", 1).with_set("Y", [1]);
        assert!(matches!(evaluate(&s, &f, &out), Err(Error::ParameterOutOfDomain(_))));
        let with_const = parse_formula_infer("(E x c)").unwrap();
        // Without a vocabulary `c` parses as a variable.
        assert!(with_const.free_variables().0.contains("c"));
        let typed = crate::logic::parse_formula("(exists x (E x c))", s.vocab()).unwrap();
        assert!(evaluate(&s, &typed, &Assignment::new()).unwrap());
    }

    #[test]
    fn vocabulary_mismatch_and_guard() {
        let f = sentence("(exists x (P x))");
        assert!(matches!(
            evaluate(&Structure::pure_set(2), &f, &Assignment::new()),
            Err(Error::VocabularyMismatch(_))
        ));
        let g = Guards {
            eval_max_set_size: 3,
            ..Guards::default()
        };
        let f = sentence("(existsS X (forall x (in x X)))");
        assert!(evaluate_with(&Structure::pure_set(4), &f, &Assignment::new(), &g)
            .unwrap_err()
            .is_guard());
        assert!(evaluate_with(&Structure::pure_set(3), &f, &Assignment::new(), &g).unwrap());
    }

    #[test]
    fn order_atoms_use_the_expansion() {
        let s = Structure::pure_set(3)
            .with_order(&LinearOrder::new(vec![2, 0, 1]).unwrap())
            .unwrap();
        let least_is = |e: usize| {
            let f = forall("y", or(vec![eq("x", "y"), lt("x", "y")]));
            evaluate(&s, &f, &Assignment::new().with_element("x", e)).unwrap()
        };
        assert!(least_is(2));
        assert!(!least_is(0));
    }
}
