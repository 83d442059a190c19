use crate::config::{factorial, Guards};
use crate::error::{Error, Result};

/// A strict linear order on `{0, …, n-1}`, stored as the list of elements in
/// increasing position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearOrder {
    perm: Vec<usize>,
}

impl LinearOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &e in &perm {
            if e >= n || seen[e] {
                return Err(Error::InvalidOrder(format!("{perm:?} is not a permutation")));
            }
            seen[e] = true;
        }
        Ok(LinearOrder { perm })
    }

    pub fn identity(n: usize) -> Self {
        LinearOrder {
            perm: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// Position of every element: `positions()[e]` is the rank of `e`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.perm.len()];
        for (i, &e) in self.perm.iter().enumerate() {
            pos[e] = i;
        }
        pos
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        let pos = self.positions();
        pos[a] < pos[b]
    }
}

impl std::fmt::Display for LinearOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.perm.iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Advances `v` to its lexicographic successor; returns false after the last.
pub fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All `n!` linear orders in lexicographic order of their element lists.
pub fn enumerate_orders(n: usize, guards: &Guards) -> Result<Vec<LinearOrder>> {
    let count = factorial(n);
    if count > guards.order_cap as u128 {
        return Err(Error::guard("order_cap", guards.order_cap, count));
    }
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(count as usize);
    loop {
        out.push(LinearOrder { perm: cur.clone() });
        if !next_permutation(&mut cur) {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_elements_give_six_orders() {
        let orders = enumerate_orders(3, &Guards::default()).unwrap();
        assert_eq!(orders.len(), 6);
        assert_eq!(orders[0].as_slice(), &[0, 1, 2]);
        assert_eq!(orders[5].as_slice(), &[2, 1, 0]);
        assert_eq!(enumerate_orders(0, &Guards::default()).unwrap().len(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Guards {
            order_cap: 5,
            ..Guards::default()
        };
        assert!(enumerate_orders(3, &g).unwrap_err().is_guard());
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(LinearOrder::new(vec![0, 0]).is_err());
        assert!(LinearOrder::new(vec![1, 2]).is_err());
        assert!(LinearOrder::new(vec![2, 0, 1]).unwrap().less(2, 1));
    }
}
