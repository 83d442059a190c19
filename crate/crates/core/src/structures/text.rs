//! Line-based text formats for structures and trees.
//!
//! Structures:
//!
//! ```text
//! structure G
//! domain 3
//! rel E/2: (0,1) (1,2)
//! const c = 0
//! order: 2 0 1
//! end
//! ```
//!
//! `order:` is optional and attaches a linear order. Trees are written as
//! `a(b, c(a))`; a following `order:` line lists every node (preorder
//! numbers) and induces the sibling order by restriction.

use std::sync::Arc;

use super::{LinearOrder, SiblingOrder, Structure, UnrankedTree, Vocabulary};
use super::tree::Shape;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedStructure {
    pub name: String,
    pub structure: Structure,
    pub order: Option<LinearOrder>,
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn parse_usize(tok: &str, line: usize, col: usize) -> Result<usize> {
    tok.trim()
        .parse()
        .map_err(|_| Error::parse("structure", line, col, format!("expected a number, found `{tok}`")))
}

fn parse_order_list(rest: &str, what: &'static str, line: usize) -> Result<LinearOrder> {
    let perm = rest
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(what, line, 1, format!("bad order entry `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    LinearOrder::new(perm)
}

/// Parses every `structure … end` block in `text`.
pub fn parse_structures(text: &str) -> Result<Vec<NamedStructure>> {
    struct Pending {
        name: String,
        domain: Option<usize>,
        rels: Vec<(String, usize, Vec<Vec<usize>>, usize)>,
        consts: Vec<(String, usize, usize)>,
        order: Option<(LinearOrder, usize)>,
        start: usize,
    }
    let mut out = Vec::new();
    let mut cur: Option<Pending> = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let col = raw.find(line).unwrap_or(0) + 1;
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match (&mut cur, head) {
            (None, "structure") => {
                if rest.is_empty() {
                    return Err(Error::parse("structure", ln, col, "missing structure name"));
                }
                cur = Some(Pending {
                    name: rest.to_string(),
                    domain: None,
                    rels: Vec::new(),
                    consts: Vec::new(),
                    order: None,
                    start: ln,
                });
            }
            (None, _) => {
                return Err(Error::parse("structure", ln, col, format!("expected `structure`, found `{head}`")))
            }
            (Some(p), "domain") => {
                if p.domain.is_some() {
                    return Err(Error::parse("structure", ln, col, "duplicate `domain`"));
                }
                p.domain = Some(parse_usize(rest, ln, col + head.len() + 1)?);
            }
            (Some(p), "rel") => {
                let (sig, tuples) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse("structure", ln, col, "expected `rel NAME/ARITY: tuples`"))?;
                let (name, arity) = sig
                    .trim()
                    .split_once('/')
                    .ok_or_else(|| Error::parse("structure", ln, col, "expected NAME/ARITY"))?;
                let arity = parse_usize(arity, ln, col)?;
                let tuples = parse_tuples(tuples, ln, col)?;
                p.rels.push((name.trim().to_string(), arity, tuples, ln));
            }
            (Some(p), "const") => {
                let (name, value) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::parse("structure", ln, col, "expected `const NAME = ELEMENT`"))?;
                p.consts.push((name.trim().to_string(), parse_usize(value, ln, col)?, ln));
            }
            (Some(p), "order:") => {
                p.order = Some((parse_order_list(rest, "structure", ln)?, ln));
            }
            (Some(_), "end") => {
                let p = cur.take().expect("inside block");
                out.push(finish(p.name, p.domain, p.rels, p.consts, p.order, p.start)?);
            }
            (Some(_), other) => {
                return Err(Error::parse("structure", ln, col, format!("unexpected `{other}`")))
            }
        }
    }
    if let Some(p) = cur {
        return Err(Error::parse("structure", p.start, 1, "unterminated block (missing `end`)"));
    }
    fn finish(
        name: String,
        domain: Option<usize>,
        rels: Vec<(String, usize, Vec<Vec<usize>>, usize)>,
        consts: Vec<(String, usize, usize)>,
        order: Option<(LinearOrder, usize)>,
        start: usize,
    ) -> Result<NamedStructure> {
        let size = domain.ok_or_else(|| Error::parse("structure", start, 1, "missing `domain`"))?;
        let const_names: Vec<&str> = consts.iter().map(|(n, _, _)| n.as_str()).collect();
        let vocab = Vocabulary::new(rels.iter().map(|(n, a, _, _)| (n.clone(), *a)), &const_names)?;
        let mut s = Structure::new(Arc::new(vocab), size)?;
        for (r, (name, arity, tuples, ln)) in rels.iter().enumerate() {
            for t in tuples {
                if t.len() != *arity {
                    return Err(Error::parse(
                        "structure",
                        *ln,
                        1,
                        format!("tuple of length {} for `{name}/{arity}`", t.len()),
                    ));
                }
                s.set(r, t, true)
                    .map_err(|e| Error::parse("structure", *ln, 1, e.to_string()))?;
            }
        }
        for (n, v, ln) in &consts {
            s.set_constant(n, *v)
                .map_err(|e| Error::parse("structure", *ln, 1, e.to_string()))?;
        }
        let order = match order {
            Some((o, ln)) if o.len() != size => {
                return Err(Error::parse("structure", ln, 1, "order does not list the whole domain"))
            }
            Some((o, _)) => Some(o),
            None => None,
        };
        Ok(NamedStructure {
            name,
            structure: s,
            order,
        })
    }
    Ok(out)
}

/// Parses a file that must contain exactly one structure.
pub fn parse_structure(text: &str) -> Result<NamedStructure> {
    let mut all = parse_structures(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("one")),
        0 => Err(Error::parse("structure", 1, 1, "no structure block")),
        n => Err(Error::parse("structure", 1, 1, format!("expected one structure, found {n}"))),
    }
}

fn parse_tuples(text: &str, line: usize, col: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if !rest.starts_with('(') {
            return Err(Error::parse("structure", line, col, format!("expected `(` at `{rest}`")));
        }
        let close = rest
            .find(')')
            .ok_or_else(|| Error::parse("structure", line, col, "unclosed tuple"))?;
        let inner = &rest[1..close];
        let t = inner
            .split(',')
            .map(|x| parse_usize(x, line, col))
            .collect::<Result<Vec<_>>>()?;
        out.push(t);
        rest = rest[close + 1..].trim_start();
    }
    Ok(out)
}

/// Renders a structure in the block format (with an optional order line).
pub fn format_structure(name: &str, s: &Structure, order: Option<&LinearOrder>) -> String {
    let mut out = format!("structure {name}\ndomain {}\n", s.size());
    for (r, sym) in s.vocab().relations().iter().enumerate() {
        out.push_str(&format!("rel {}/{}:", sym.name, sym.arity));
        for t in s.relation(r).tuples() {
            let parts: Vec<String> = t.iter().map(|e| e.to_string()).collect();
            out.push_str(&format!(" ({})", parts.join(",")));
        }
        out.push('\n');
    }
    for (c, name) in s.vocab().constants().iter().enumerate() {
        out.push_str(&format!("const {name} = {}\n", s.constant(c)));
    }
    if let Some(o) = order {
        out.push_str(&format!("order: {o}\n"));
    }
    out.push_str("end\n");
    out
}

/// One line, e.g. `n=2 E={(0,1)} P_left={(0)}`.
pub fn format_compact(s: &Structure) -> String {
    let mut out = format!("n={}", s.size());
    for (r, sym) in s.vocab().relations().iter().enumerate() {
        let tuples: Vec<String> = s
            .relation(r)
            .tuples()
            .iter()
            .map(|t| format!("({})", t.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        out.push_str(&format!(" {}={{{}}}", sym.name, tuples.join(",")));
    }
    out
}

/// Parses `a(b, c(a))`. Without an explicit alphabet, the alphabet is the
/// sorted set of labels that occur.
pub fn parse_tree(text: &str, alphabet: Option<Arc<Vec<String>>>) -> Result<UnrankedTree> {
    #[derive(Debug)]
    struct Raw {
        label: String,
        kids: Vec<Raw>,
    }
    struct P<'a> {
        s: &'a [u8],
        pos: usize,
    }
    impl P<'_> {
        fn ws(&mut self) {
            while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
                self.pos += 1;
            }
        }
        fn err(&self, msg: &str) -> Error {
            Error::parse("tree", 1, self.pos + 1, msg)
        }
        fn node(&mut self) -> Result<Raw> {
            self.ws();
            let start = self.pos;
            while self.pos < self.s.len()
                && ((self.s[self.pos] as char).is_ascii_alphanumeric() || self.s[self.pos] == b'_')
            {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected a label"));
            }
            let label = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
            self.ws();
            let mut kids = Vec::new();
            if self.pos < self.s.len() && self.s[self.pos] == b'(' {
                self.pos += 1;
                loop {
                    kids.push(self.node()?);
                    self.ws();
                    match self.s.get(self.pos) {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.err("expected `,` or `)`")),
                    }
                }
            }
            Ok(Raw { label, kids })
        }
    }
    let mut p = P {
        s: text.trim_end().as_bytes(),
        pos: 0,
    };
    let raw = p.node()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input after tree"));
    }
    let alphabet = match alphabet {
        Some(a) => a,
        None => {
            let mut labels = Vec::new();
            fn collect(r: &Raw, out: &mut Vec<String>) {
                out.push(r.label.clone());
                r.kids.iter().for_each(|k| collect(k, out));
            }
            collect(&raw, &mut labels);
            labels.sort();
            labels.dedup();
            Arc::new(labels)
        }
    };
    fn to_shape(r: &Raw, alphabet: &[String]) -> Result<Shape> {
        let label = alphabet
            .iter()
            .position(|a| *a == r.label)
            .ok_or_else(|| Error::UnknownLabel(r.label.clone()))?;
        Ok(Shape {
            label,
            kids: r.kids.iter().map(|k| to_shape(k, alphabet)).collect::<Result<_>>()?,
        })
    }
    let shape = to_shape(&raw, &alphabet)?;
    Ok(UnrankedTree::from_shape(alphabet, &shape))
}

/// A tree file: a tree line, optionally followed by an `order:` line.
/// Multiple trees may be listed, one per line; blank lines and `#`
/// comments are ignored.
pub fn parse_tree_file(
    text: &str,
    alphabet: Option<Arc<Vec<String>>>,
) -> Result<Vec<(UnrankedTree, Option<SiblingOrder>)>> {
    let mut out: Vec<(UnrankedTree, Option<SiblingOrder>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("order:") {
            let (tree, slot) = out
                .last_mut()
                .ok_or_else(|| Error::parse("tree", i + 1, 1, "`order:` before any tree"))?;
            let order = parse_order_list(rest, "tree", i + 1)?;
            *slot = Some(
                SiblingOrder::from_node_order(tree, &order)
                    .map_err(|e| Error::parse("tree", i + 1, 1, e.to_string()))?,
            );
            continue;
        }
        let tree = parse_tree(line, alphabet.clone()).map_err(|e| match e {
            Error::Parse { col, msg, .. } => Error::parse("tree", i + 1, col, msg),
            other => other,
        })?;
        out.push((tree, None));
    }
    Ok(out)
}
