use proptest::prelude::*;

use ordinv::commutative::{parikh_vector, unary_semilinear, Dfa};

const LETTERS: [&str; 3] = ["a", "b", "c"];

/// Random complete DFA with `states` states over the first `letters` letters.
fn dfa(states: std::ops::RangeInclusive<usize>, letters: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Dfa> {
    (states, letters).prop_flat_map(|(n, r)| {
        (
            prop::collection::vec(prop::collection::vec(0..n, r), n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(trans, acc)| {
                let accepting: Vec<usize> = (0..n).filter(|&q| acc[q]).collect();
                Dfa::from_table("random", &LETTERS[..r], 0, &accepting, trans).unwrap()
            })
    })
}

fn words(r: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut start = 0;
    for _ in 0..max {
        let end = out.len();
        for i in start..end {
            for a in 0..r {
                let mut w = out[i].clone();
                w.push(a);
                out.push(w);
            }
        }
        start = end;
    }
    out
}

proptest! {
    #[test]
    fn unary_progressions_match_simulation(d in dfa(1..=6, 1..=1)) {
        let ps = unary_semilinear(&d).unwrap();
        for m in 0..=3 * d.state_count() {
            let word = vec![0; m];
            prop_assert_eq!(ps.iter().any(|p| p.contains(m as u64)), d.accepts(&word), "length {}", m);
        }
    }

    #[test]
    fn parikh_vectors_ignore_letter_order(w in prop::collection::vec(0usize..3, 0..12).prop_shuffle(), seed in any::<u64>()) {
        let mut shuffled = w.clone();
        // Rotate and reverse deterministically from the seed.
        shuffled.rotate_left(if w.is_empty() { 0 } else { (seed as usize) % w.len() });
        if seed % 2 == 0 {
            shuffled.reverse();
        }
        prop_assert_eq!(parikh_vector(&w, 3), parikh_vector(&shuffled, 3));
        prop_assert_eq!(parikh_vector(&w, 3).iter().sum::<u64>(), w.len() as u64);
    }

    // With at most three states a shortest non-commutativity witness has at
    // most five letters, so words up to six decide the question.
    #[test]
    fn commutativity_matches_permutation_closure(d in dfa(1..=3, 2..=3)) {
        let r = d.alphabet().len();
        let brute = words(r, 6).iter().all(|w| {
            let mut s = w.clone();
            s.sort_unstable();
            d.accepts(w) == d.accepts(&s)
        });
        prop_assert_eq!(d.is_commutative(), brute);
        prop_assert_eq!(d.minimize().is_commutative(), brute);
    }
}
