//! Ehrenfeucht-Fraisse games by exhaustive minimax, independent of the type
//! recursion. Used as the reference oracle for [`super::rank_type`].

use std::collections::HashMap;

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::logic::Logic;
use crate::structures::Structure;

struct Game<'a> {
    a: &'a Structure,
    b: &'a Structure,
    logic: Logic,
    memo: HashMap<(usize, Vec<(usize, usize)>, Vec<(u64, u64)>), bool>,
}

impl Game<'_> {
    /// Does the map `pins` (constants first) preserve equality, relations and
    /// set memberships? Only tuples that mention the last pinned element, or
    /// any element when `full` is set, are checked.
    fn partial_iso(&self, pins: &[(usize, usize)], sets: &[(u64, u64)], full: bool) -> bool {
        let m = pins.len();
        let fresh = if full || m == 0 { 0 } else { m - 1 };
        for i in fresh..m {
            for j in 0..m {
                if (pins[i].0 == pins[j].0) != (pins[i].1 == pins[j].1) {
                    return false;
                }
            }
            for &(sa, sb) in sets {
                if (sa >> pins[i].0 & 1) != (sb >> pins[i].1 & 1) {
                    return false;
                }
            }
        }
        let vocab = self.a.vocab();
        let mut idx = Vec::new();
        for (r, sym) in vocab.relations().iter().enumerate() {
            let total = m.pow(sym.arity as u32);
            let mut ta = vec![0; sym.arity];
            let mut tb = vec![0; sym.arity];
            for c in 0..total {
                idx.clear();
                let mut rem = c;
                for _ in 0..sym.arity {
                    idx.push(rem % m);
                    rem /= m;
                }
                if !full && m > 0 && !idx.contains(&(m - 1)) {
                    continue;
                }
                for (p, &i) in idx.iter().enumerate() {
                    ta[p] = pins[i].0;
                    tb[p] = pins[i].1;
                }
                if self.a.holds(r, &ta) != self.b.holds(r, &tb) {
                    return false;
                }
            }
        }
        true
    }

    /// Checks a new set pair against all pinned elements.
    fn sets_agree(&self, pins: &[(usize, usize)], sa: u64, sb: u64) -> bool {
        pins.iter().all(|&(x, y)| (sa >> x & 1) == (sb >> y & 1))
    }

    fn duplicator_wins(&mut self, rounds: usize, pins: &mut Vec<(usize, usize)>, sets: &mut Vec<(u64, u64)>) -> bool {
        if rounds == 0 {
            return true;
        }
        let key = (rounds, pins.clone(), sets.clone());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let (na, nb) = (self.a.size(), self.b.size());
        let mut result = true;
        // Element moves on each side.
        'spoiler: for side in 0..2 {
            let (from, to) = if side == 0 { (na, nb) } else { (nb, na) };
            for x in 0..from {
                let mut answered = false;
                for y in 0..to {
                    let pair = if side == 0 { (x, y) } else { (y, x) };
                    pins.push(pair);
                    let ok = self.partial_iso(pins, sets, false) && self.duplicator_wins(rounds - 1, pins, sets);
                    pins.pop();
                    if ok {
                        answered = true;
                        break;
                    }
                }
                if !answered {
                    result = false;
                    break 'spoiler;
                }
            }
        }
        if result && self.logic == Logic::Mso {
            'sets: for side in 0..2 {
                let (from, to) = if side == 0 { (na, nb) } else { (nb, na) };
                for x in 0..1u64 << from {
                    let mut answered = false;
                    for y in 0..1u64 << to {
                        let pair = if side == 0 { (x, y) } else { (y, x) };
                        if !self.sets_agree(pins, pair.0, pair.1) {
                            continue;
                        }
                        sets.push(pair);
                        let ok = self.duplicator_wins(rounds - 1, pins, sets);
                        sets.pop();
                        if ok {
                            answered = true;
                            break;
                        }
                    }
                    if !answered {
                        result = false;
                        break 'sets;
                    }
                }
            }
        }
        self.memo.insert(key, result);
        result
    }
}

/// Whether the duplicator wins the `k`-round game on `a` and `b`.
pub fn ef_equivalent(a: &Structure, b: &Structure, k: usize, logic: Logic, guards: &Guards) -> Result<bool> {
    if a.vocab() != b.vocab() {
        return Err(Error::VocabularyMismatch(format!("{} vs {}", a.vocab(), b.vocab())));
    }
    let max_size = a.size().max(b.size());
    if max_size > guards.ef_max_size {
        return Err(Error::guard("ef_max_size", guards.ef_max_size as u128, max_size as u128));
    }
    let (limit, name) = match logic {
        Logic::Fo => (guards.ef_fo_max_rank, "ef_fo_max_rank"),
        Logic::Mso => (guards.ef_mso_max_rank, "ef_mso_max_rank"),
    };
    if k > limit {
        return Err(Error::guard(name, limit as u128, k as u128));
    }
    if logic == Logic::Mso && max_size > 63 {
        return Err(Error::guard("ef_max_size", 63u128, max_size as u128));
    }
    let mut game = Game {
        a,
        b,
        logic,
        memo: HashMap::new(),
    };
    let mut pins: Vec<(usize, usize)> = a.constants().iter().copied().zip(b.constants().iter().copied()).collect();
    if !game.partial_iso(&pins, &[], true) {
        return Ok(false);
    }
    Ok(game.duplicator_wins(k, &mut pins, &mut Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{LinearOrder, Vocabulary};
    use std::sync::Arc;

    fn line(n: usize) -> Structure {
        Structure::pure_set(n).with_order(&LinearOrder::identity(n)).unwrap()
    }

    #[test]
    fn orders() {
        let g = Guards::default();
        assert!(ef_equivalent(&line(3), &line(4), 2, Logic::Fo, &g).unwrap());
        assert!(!ef_equivalent(&line(2), &line(3), 2, Logic::Fo, &g).unwrap());
        assert!(!ef_equivalent(&line(3), &line(4), 3, Logic::Fo, &g).unwrap());
        assert!(ef_equivalent(&line(4), &line(4), 3, Logic::Mso, &g).unwrap());
    }

    #[test]
    fn pure_sets() {
        let g = Guards::default();
        let p = Structure::pure_set;
        assert!(ef_equivalent(&p(2), &p(3), 1, Logic::Fo, &g).unwrap());
        assert!(!ef_equivalent(&p(1), &p(2), 2, Logic::Fo, &g).unwrap());
        assert!(ef_equivalent(&p(2), &p(3), 1, Logic::Mso, &g).unwrap());
        assert!(ef_equivalent(&p(2), &p(3), 2, Logic::Mso, &g).unwrap());
        assert!(!ef_equivalent(&p(2), &p(3), 3, Logic::Mso, &g).unwrap());
        assert!(!ef_equivalent(&p(0), &p(1), 1, Logic::Fo, &g).unwrap());
        assert!(ef_equivalent(&p(0), &p(1), 0, Logic::Fo, &g).unwrap());
    }

    #[test]
    fn constants_are_pinned_from_the_start() {
        let g = Guards::default();
        let v = Arc::new(Vocabulary::new([("P", 1)], &["c"]).unwrap());
        let mut a = Structure::new(v.clone(), 2).unwrap();
        a.insert("P", &[0]).unwrap();
        let b = a.clone();
        let mut a2 = a.clone();
        a2.set_constant("c", 1).unwrap();
        assert!(ef_equivalent(&a, &b, 2, Logic::Fo, &g).unwrap());
        assert!(!ef_equivalent(&a, &a2, 0, Logic::Fo, &g).unwrap());
    }

    #[test]
    fn guards() {
        let g = Guards::default();
        assert!(ef_equivalent(&line(7), &line(2), 1, Logic::Fo, &g).unwrap_err().is_guard());
        assert!(ef_equivalent(&line(2), &line(2), 4, Logic::Mso, &g).unwrap_err().is_guard());
    }
}
