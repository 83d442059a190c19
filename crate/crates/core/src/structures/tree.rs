use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{next_permutation, LinearOrder, RelSym, Structure, Vocabulary, CHILD, PART_PREFIX, SIB};
use crate::config::{factorial, Guards};
use crate::error::{Error, Result};

/// How the `child` relation of a tree encoding is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EdgeSemantics {
    /// Parent to immediate child only.
    #[default]
    Child,
    /// Every proper ancestor to every proper descendant.
    Descendant,
}

/// A finite labelled unranked tree. Nodes are numbered in preorder with the
/// root at 0; the stored child lists carry the left-to-right order of the
/// text the tree was built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnrankedTree {
    alphabet: Arc<Vec<String>>,
    labels: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

/// A linear order on every sibling group: `groups[v]` lists the children of
/// `v` from first to last.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiblingOrder {
    groups: Vec<Vec<usize>>,
}

impl SiblingOrder {
    pub fn group(&self, node: usize) -> &[usize] {
        &self.groups[node]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Builds a sibling order and checks it against `tree`.
    pub fn new(tree: &UnrankedTree, groups: Vec<Vec<usize>>) -> Result<Self> {
        let ord = SiblingOrder { groups };
        tree.check_sibling_order(&ord)?;
        Ok(ord)
    }

    /// Restriction of a linear order on all nodes to each sibling group.
    pub fn from_node_order(tree: &UnrankedTree, order: &LinearOrder) -> Result<Self> {
        if order.len() != tree.size() {
            return Err(Error::InvalidOrder(format!(
                "node order over {} elements for a tree with {} nodes",
                order.len(),
                tree.size()
            )));
        }
        let pos = order.positions();
        let groups = (0..tree.size())
            .map(|v| {
                let mut g = tree.children(v).to_vec();
                g.sort_by_key(|&c| pos[c]);
                g
            })
            .collect();
        Ok(SiblingOrder { groups })
    }
}

/// Nested tree shape used while building.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Shape {
    pub label: usize,
    pub kids: Vec<Shape>,
}

impl UnrankedTree {
    pub(crate) fn from_shape(alphabet: Arc<Vec<String>>, shape: &Shape) -> Self {
        let mut t = UnrankedTree {
            alphabet,
            labels: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
        };
        fn push(t: &mut UnrankedTree, s: &Shape, parent: Option<usize>) -> usize {
            let id = t.labels.len();
            t.labels.push(s.label);
            t.parent.push(parent);
            t.children.push(Vec::new());
            for k in &s.kids {
                let c = push(t, k, Some(id));
                t.children[id].push(c);
            }
            id
        }
        push(&mut t, shape, None);
        t
    }

    pub(crate) fn shape(&self) -> Shape {
        self.shape_at(0, None)
    }

    fn shape_at(&self, v: usize, ord: Option<&SiblingOrder>) -> Shape {
        let kids = match ord {
            Some(o) => o.group(v),
            None => self.children(v),
        };
        Shape {
            label: self.labels[v],
            kids: kids.iter().map(|&c| self.shape_at(c, ord)).collect(),
        }
    }

    /// A single-node tree.
    pub fn leaf(alphabet: Arc<Vec<String>>, label: &str) -> Result<Self> {
        let l = alphabet
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        Ok(Self::from_shape(alphabet, &Shape { label: l, kids: vec![] }))
    }

    /// Builds `label(children…)`; all subtrees must share the alphabet.
    pub fn node(label: &str, kids: &[UnrankedTree], alphabet: Arc<Vec<String>>) -> Result<Self> {
        let l = alphabet
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        for k in kids {
            if k.alphabet != alphabet {
                return Err(Error::AlphabetMismatch("subtree alphabets differ".into()));
            }
        }
        let shape = Shape {
            label: l,
            kids: kids.iter().map(UnrankedTree::shape).collect(),
        };
        Ok(Self::from_shape(alphabet, &shape))
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_arc(&self) -> &Arc<Vec<String>> {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn label_name(&self, v: usize) -> &str {
        &self.alphabet[self.labels[v]]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// The tree-domain word of a node (1-based child indices from the root).
    pub fn address(&self, v: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            let idx = self.children[p].iter().position(|&c| c == cur).expect("child");
            path.push(idx + 1);
            cur = p;
        }
        path.reverse();
        path
    }

    /// `ε` for the root, otherwise dot-separated tree-domain word.
    pub fn address_text(&self, v: usize) -> String {
        let a = self.address(v);
        if a.is_empty() {
            "ε".into()
        } else {
            a.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
        }
    }

    /// The same tree over a larger alphabet containing the current one.
    pub fn with_alphabet(&self, alphabet: Arc<Vec<String>>) -> Result<Self> {
        let mut map = Vec::with_capacity(self.alphabet.len());
        for a in self.alphabet.iter() {
            map.push(
                alphabet
                    .iter()
                    .position(|b| b == a)
                    .ok_or_else(|| Error::AlphabetMismatch(format!("label `{a}` missing")))?,
            );
        }
        Ok(UnrankedTree {
            alphabet,
            labels: self.labels.iter().map(|&l| map[l]).collect(),
            parent: self.parent.clone(),
            children: self.children.clone(),
        })
    }

    fn check_sibling_order(&self, ord: &SiblingOrder) -> Result<()> {
        if ord.groups.len() != self.size() {
            return Err(Error::InvalidOrder("sibling order does not cover every node".into()));
        }
        for v in 0..self.size() {
            let mut a = ord.groups[v].clone();
            let mut b = self.children[v].clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(Error::InvalidOrder(format!(
                    "sibling group of node {} is not a permutation of its children",
                    self.address_text(v)
                )));
            }
        }
        Ok(())
    }

    /// The order in which the children were written.
    pub fn written_order(&self) -> SiblingOrder {
        SiblingOrder {
            groups: self.children.clone(),
        }
    }

    /// The tree with every sibling group rearranged by `ord`, renumbered in
    /// preorder. Also returns the map from old to new node numbers.
    pub fn reordered(&self, ord: &SiblingOrder) -> Result<(UnrankedTree, Vec<usize>)> {
        self.check_sibling_order(ord)?;
        let t = Self::from_shape(self.alphabet.clone(), &self.shape_at(0, Some(ord)));
        let mut map = vec![0; self.size()];
        let mut next = 0;
        fn walk(v: usize, ord: &SiblingOrder, map: &mut [usize], next: &mut usize) {
            map[v] = *next;
            *next += 1;
            for &c in ord.group(v) {
                walk(c, ord, map, next);
            }
        }
        walk(0, ord, &mut map, &mut next);
        Ok((t, map))
    }

    /// Text form using the written child order, e.g. `a(b, c(a))`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_node(0, &mut out);
        out
    }

    fn write_node(&self, v: usize, out: &mut String) {
        out.push_str(self.label_name(v));
        if !self.children[v].is_empty() {
            out.push('(');
            for (i, &c) in self.children[v].iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                self.write_node(c, out);
            }
            out.push(')');
        }
    }

    /// Text of the unordered tree: children sorted by their own canonical text.
    pub fn canonical_text(&self) -> String {
        self.canonical_at(0)
    }

    fn canonical_at(&self, v: usize) -> String {
        let mut kids: Vec<String> = self.children[v].iter().map(|&c| self.canonical_at(c)).collect();
        kids.sort();
        if kids.is_empty() {
            self.label_name(v).to_string()
        } else {
            format!("{}({})", self.label_name(v), kids.join(", "))
        }
    }

    /// The tree with children sorted into canonical order.
    pub fn canonicalized(&self) -> UnrankedTree {
        let texts: Vec<String> = (0..self.size()).map(|v| self.canonical_at(v)).collect();
        let groups = (0..self.size())
            .map(|v| {
                let mut g = self.children[v].clone();
                g.sort_by(|&x, &y| texts[x].cmp(&texts[y]));
                g
            })
            .collect();
        self.reordered(&SiblingOrder { groups }).expect("valid").0
    }

    /// Encodes the tree as a structure over `child`, `P_a` (one per alphabet
    /// letter) and, if a sibling order is supplied, `sib`.
    pub fn to_structure(&self, ord: Option<&SiblingOrder>, edges: EdgeSemantics) -> Result<Structure> {
        if let Some(o) = ord {
            self.check_sibling_order(o)?;
        }
        let vocab = Arc::new(tree_vocabulary(&self.alphabet, ord.is_some())?);
        let mut s = Structure::new(vocab, self.size())?;
        for v in 0..self.size() {
            match edges {
                EdgeSemantics::Child => {
                    for &c in &self.children[v] {
                        s.set(0, &[v, c], true)?;
                    }
                }
                EdgeSemantics::Descendant => {
                    let mut cur = v;
                    while let Some(p) = self.parent[cur] {
                        s.set(0, &[p, v], true)?;
                        cur = p;
                    }
                }
            }
            s.set(1 + self.labels[v], &[v], true)?;
        }
        if let Some(o) = ord {
            let sib = 1 + self.alphabet.len();
            for g in &o.groups {
                for i in 0..g.len() {
                    for j in i + 1..g.len() {
                        s.set(sib, &[g[i], g[j]], true)?;
                    }
                }
            }
        }
        Ok(s)
    }
}

/// Vocabulary of tree encodings: `child`, then `P_a` per letter, then
/// optionally `sib`.
pub fn tree_vocabulary(alphabet: &[String], with_sib: bool) -> Result<Vocabulary> {
    let mut rels = vec![RelSym {
        name: CHILD.into(),
        arity: 2,
    }];
    for a in alphabet {
        rels.push(RelSym {
            name: format!("{PART_PREFIX}{a}"),
            arity: 1,
        });
    }
    if with_sib {
        rels.push(RelSym {
            name: SIB.into(),
            arity: 2,
        });
    }
    Vocabulary::from_parts(rels, Vec::new())
}

impl fmt::Display for UnrankedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Every sibling order of `tree`, lexicographic per node with the last node
/// in preorder varying fastest.
pub fn sibling_orders(tree: &UnrankedTree, guards: &Guards) -> Result<Vec<SiblingOrder>> {
    let mut count: u128 = 1;
    for v in 0..tree.size() {
        count = count.saturating_mul(factorial(tree.children(v).len()));
        if count > guards.order_cap as u128 {
            return Err(Error::guard("order_cap", guards.order_cap, count));
        }
    }
    let mut groups: Vec<Vec<usize>> = (0..tree.size())
        .map(|v| {
            let mut g = tree.children(v).to_vec();
            g.sort_unstable();
            g
        })
        .collect();
    let mut out = Vec::with_capacity(count as usize);
    loop {
        out.push(SiblingOrder {
            groups: groups.clone(),
        });
        let mut advanced = false;
        for v in (0..groups.len()).rev() {
            if next_permutation(&mut groups[v]) {
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    Ok(out)
}

/// All unordered labelled trees with `1..=max_nodes` nodes, one canonical
/// representative each, sorted by size then canonical text.
pub fn enumerate_unordered_trees(alphabet: Arc<Vec<String>>, max_nodes: usize) -> Vec<UnrankedTree> {
    // by_size[n]: canonical shapes with exactly n nodes, sorted.
    let mut by_size: Vec<Vec<Shape>> = vec![Vec::new(); max_nodes + 1];
    // Global index of every shape so forests can be built as multisets.
    let mut all: Vec<(usize, Shape)> = Vec::new();
    for n in 1..=max_nodes {
        let mut forests: Vec<Vec<usize>> = Vec::new();
        build_forests(&all, n - 1, 0, &mut Vec::new(), &mut forests);
        let mut shapes: BTreeMap<String, Shape> = BTreeMap::new();
        for forest in &forests {
            for label in 0..alphabet.len() {
                let kids: Vec<Shape> = forest.iter().map(|&i| all[i].1.clone()).collect();
                let shape = Shape { label, kids };
                let t = UnrankedTree::from_shape(alphabet.clone(), &shape);
                let canon = t.canonicalized();
                shapes.insert(canon.canonical_text(), canon.shape());
            }
        }
        by_size[n] = shapes.into_values().collect();
        for s in &by_size[n] {
            all.push((n, s.clone()));
        }
    }
    all.into_iter()
        .map(|(_, s)| UnrankedTree::from_shape(alphabet.clone(), &s))
        .collect()
}

fn build_forests(
    all: &[(usize, Shape)],
    remaining: usize,
    start: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if remaining == 0 {
        out.push(cur.clone());
        return;
    }
    for i in start..all.len() {
        let sz = all[i].0;
        if sz > remaining {
            continue;
        }
        cur.push(i);
        build_forests(all, remaining - sz, i, cur, out);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::super::text::parse_tree;
    use super::*;

    #[test]
    fn encodes_child_and_labels() {
        let t = parse_tree("a(b, b)", None).unwrap();
        let s = t.to_structure(None, EdgeSemantics::Child).unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.relation(0).tuples(), vec![vec![0, 1], vec![0, 2]]);
        let pa = s.vocab().relation_index("P_a").unwrap();
        let pb = s.vocab().relation_index("P_b").unwrap();
        assert_eq!(s.relation(pa).tuples(), vec![vec![0]]);
        assert_eq!(s.relation(pb).tuples(), vec![vec![1], vec![2]]);

        let t = parse_tree("a", None).unwrap();
        let s = t.to_structure(None, EdgeSemantics::Child).unwrap();
        assert_eq!(s.size(), 1);
        assert!(s.relation(0).is_empty());
    }

    #[test]
    fn sibling_order_encoding() {
        let t = parse_tree("a(b, c)", None).unwrap();
        let s = t.to_structure(Some(&t.written_order()), EdgeSemantics::Child).unwrap();
        let sib = s.vocab().relation_index(SIB).unwrap();
        assert_eq!(s.relation(sib).tuples(), vec![vec![1, 2]]);
    }

    #[test]
    fn descendant_semantics() {
        let t = parse_tree("a(b(c))", None).unwrap();
        let s = t.to_structure(None, EdgeSemantics::Descendant).unwrap();
        assert_eq!(s.relation(0).tuples(), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn sibling_order_counts() {
        let g = Guards::default();
        let t = parse_tree("a(b, b, b)", None).unwrap();
        assert_eq!(sibling_orders(&t, &g).unwrap().len(), 6);
        let t = parse_tree("a(b(a, a), b, a(b, b, b))", None).unwrap();
        assert_eq!(sibling_orders(&t, &g).unwrap().len(), 6 * 2 * 6);
        let small = Guards {
            order_cap: 5,
            ..Guards::default()
        };
        assert!(sibling_orders(&parse_tree("a(b, b, b)", None).unwrap(), &small).is_err());
    }

    #[test]
    fn reordering_and_addresses() {
        let t = parse_tree("a(b, c(a))", None).unwrap();
        assert_eq!(t.address_text(3), "2.1");
        let ord = SiblingOrder::new(&t, vec![vec![2, 1], vec![], vec![3], vec![]]).unwrap();
        let (r, map) = t.reordered(&ord).unwrap();
        assert_eq!(r.to_text(), "a(c(a), b)");
        assert_eq!(map, vec![0, 3, 1, 2]);
        assert!(SiblingOrder::new(&t, vec![vec![1], vec![], vec![3], vec![]]).is_err());
        let node_order = LinearOrder::new(vec![0, 2, 3, 1]).unwrap();
        assert_eq!(SiblingOrder::from_node_order(&t, &node_order).unwrap(), ord);
    }

    #[test]
    fn unordered_tree_counts() {
        // Rooted unordered unlabelled trees: 1, 1, 2, 4, 9.
        let one = Arc::new(vec!["a".to_string()]);
        let counts: Vec<usize> = (1..=5)
            .map(|n| {
                enumerate_unordered_trees(one.clone(), 5)
                    .iter()
                    .filter(|t| t.size() == n)
                    .count()
            })
            .collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9]);
        let two = Arc::new(vec!["a".to_string(), "b".to_string()]);
        // Two labels: 2, 4, 14 trees with 1, 2, 3 nodes.
        let trees = enumerate_unordered_trees(two, 3);
        assert_eq!(trees.len(), 2 + 4 + 14);
    }
}
