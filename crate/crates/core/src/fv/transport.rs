use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{compact, factors, fv_guards, Operation};
use crate::config::Guards;
use crate::error::Result;
use crate::logic::Logic;
use crate::structures::{enumerate_orders, LinearOrder, Structure, Vocabulary};
use crate::types::{ef_equivalent, rank_type, Params, TypeRegistry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportReport {
    pub paths: usize,
    /// Steps that only reorder one factor (the composite keeps its structure).
    pub reorder_steps: usize,
    /// Steps that jump between equivalent ordered factors; each composite
    /// step is checked with the game solver.
    pub jump_steps: usize,
    pub failures: Vec<String>,
}

impl TransportReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Ordered expansions of every factor, and the bipartite graph between
/// factors and the ordered types they realize.
struct FlipGraph {
    reps: Vec<Structure>,
    orders: Vec<Vec<LinearOrder>>,
    /// Per factor: ordered type index per order.
    types: Vec<Vec<usize>>,
    /// Per ordered type: factors realizing it.
    realizers: Vec<Vec<usize>>,
}

impl FlipGraph {
    fn new(reps: Vec<Structure>, k: usize, logic: Logic, guards: &Guards) -> Result<Self> {
        let mut reg = TypeRegistry::new();
        let mut index = HashMap::new();
        let mut orders = Vec::with_capacity(reps.len());
        let mut types = Vec::with_capacity(reps.len());
        let mut realizers: Vec<Vec<usize>> = Vec::new();
        for (i, a) in reps.iter().enumerate() {
            let os = enumerate_orders(a.size(), guards)?;
            let mut ts = Vec::with_capacity(os.len());
            for o in &os {
                let t = rank_type(&mut reg, &a.with_order(o)?, &Params::none(), k, logic, guards)?;
                let next = index.len();
                let ti = *index.entry(t).or_insert(next);
                if ti == realizers.len() {
                    realizers.push(Vec::new());
                }
                if realizers[ti].last() != Some(&i) {
                    realizers[ti].push(i);
                }
                ts.push(ti);
            }
            orders.push(os);
            types.push(ts);
        }
        Ok(FlipGraph {
            reps,
            orders,
            types,
            realizers,
        })
    }

    fn order_with_type(&self, s: usize, t: usize) -> usize {
        self.types[s].iter().position(|&x| x == t).expect("type realized by factor")
    }

    /// Connected component label per factor.
    fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.reps.len()];
        let mut next = 0;
        for start in 0..self.reps.len() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(s) = queue.pop_front() {
                for &t in &self.types[s] {
                    for &r in &self.realizers[t] {
                        if label[r] == usize::MAX {
                            label[r] = next;
                            queue.push_back(r);
                        }
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Shortest chain of ordered expansions from `from` to `to`, as
    /// `(factor, order index)` states. Consecutive states share either the
    /// factor or the ordered type.
    fn chain(&self, from: usize, to: usize) -> Vec<(usize, usize)> {
        let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut visited = vec![false; self.reps.len()];
        visited[from] = true;
        while let Some(s) = queue.pop_front() {
            if s == to {
                break;
            }
            for &t in &self.types[s] {
                for &r in &self.realizers[t] {
                    if !visited[r] {
                        visited[r] = true;
                        prev.insert(r, (s, t));
                        queue.push_back(r);
                    }
                }
            }
        }
        let mut hops = Vec::new();
        let mut cur = to;
        while cur != from {
            let (p, t) = prev[&cur];
            hops.push((p, t, cur));
            cur = p;
        }
        hops.reverse();
        let mut states = vec![(from, 0)];
        for (p, t, r) in hops {
            states.push((p, self.order_with_type(p, t)));
            states.push((r, self.order_with_type(r, t)));
        }
        states.dedup();
        states
    }
}

/// Walks sampled flip chains between factors of the same invariant type,
/// first on the left factor and then on the right, and checks that every
/// step on a factor gives an equivalent step on the composite.
pub fn verify_flip_transport(
    op: Operation,
    vocab: Arc<Vocabulary>,
    k: usize,
    logic: Logic,
    bound: usize,
    samples: usize,
    seed: u64,
    guards: &Guards,
) -> Result<TransportReport> {
    let g = fv_guards(op, k, logic, bound, guards)?;
    let min = match op {
        Operation::Union => 0,
        Operation::Product => 1,
    };
    let graph = FlipGraph::new(factors(&vocab, min, bound, &g)?, k, logic, &g)?;
    let label = graph.components();
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &l) in label.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    let all: Vec<usize> = (0..label.len()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = TransportReport {
        paths: 0,
        reorder_steps: 0,
        jump_steps: 0,
        failures: Vec::new(),
    };
    let composite = |(a, oa): (usize, usize), (b, ob): (usize, usize)| -> Result<Structure> {
        let (sa, sb) = (&graph.reps[a], &graph.reps[b]);
        let o = op.combine_orders(sa, &graph.orders[a][oa], sb, &graph.orders[b][ob])?;
        op.apply(sa, sb)?.with_order(&o)
    };
    for _ in 0..samples {
        let a1 = *all.choose(&mut rng).expect("non-empty universe");
        let a2 = *members[&label[a1]].choose(&mut rng).unwrap();
        let b1 = *all.choose(&mut rng).unwrap();
        let b2 = *members[&label[b1]].choose(&mut rng).unwrap();
        let left = graph.chain(a1, a2);
        let right = graph.chain(b1, b2);
        let b_start = right[0];
        let a_end = *left.last().unwrap();
        let mut steps: Vec<((usize, usize), (usize, usize))> = left.iter().map(|&x| (x, b_start)).collect();
        steps.extend(right.iter().skip(1).map(|&y| (a_end, y)));
        for w in steps.windows(2) {
            let (x, y) = (w[0], w[1]);
            let same_structures = x.0 .0 == y.0 .0 && x.1 .0 == y.1 .0;
            if same_structures {
                report.reorder_steps += 1;
                continue;
            }
            report.jump_steps += 1;
            let (p, q) = (composite(x.0, x.1)?, composite(y.0, y.1)?);
            if !ef_equivalent(&p, &q, k, logic, &g)? {
                report.failures.push(format!(
                    "{} ; {} to {} ; {}",
                    compact(&graph.reps[x.0 .0]),
                    compact(&graph.reps[x.1 .0]),
                    compact(&graph.reps[y.0 .0]),
                    compact(&graph.reps[y.1 .0])
                ));
            }
        }
        report.paths += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graphs() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::new([("E", 2)], &[]).unwrap())
    }

    #[test]
    fn chains_connect_equal_types() {
        let g = Guards::default();
        let graph = FlipGraph::new(factors(&graphs(), 1, 2, &g).unwrap(), 1, Logic::Fo, &g).unwrap();
        let label = graph.components();
        for a in 0..graph.reps.len() {
            for b in 0..graph.reps.len() {
                if label[a] == label[b] {
                    let c = graph.chain(a, b);
                    assert_eq!(c.first().unwrap().0, a);
                    assert_eq!(c.last().unwrap().0, b);
                }
            }
        }
        assert_eq!(graph.chain(0, 0), vec![(0, 0)]);
    }

    #[test]
    fn union_and_product_transport() {
        let g = Guards::default();
        for op in [Operation::Union, Operation::Product] {
            let r = verify_flip_transport(op, graphs(), 1, Logic::Fo, 2, 30, 0, &g).unwrap();
            assert!(r.passed(), "{op}: {:?}", r.failures);
            assert_eq!(r.paths, 30);
            assert!(r.jump_steps > 0);
            let r = verify_flip_transport(op, graphs(), 2, Logic::Fo, 3, 30, 0, &g).unwrap();
            assert!(r.passed(), "{op}: {:?}", r.failures);
        }
    }
}
