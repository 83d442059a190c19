//! Shipped example files and the `corpus verify` battery.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ordinv::commutative::{parikh_decompose, parikh_vector, parse_dfas, semilinear_membership, Dfa};
use ordinv::fv::{build_composition_table, verify_flip_transport, verify_lex_ef_lemma, Operation};
use ordinv::invariance::{check_invariance, query_membership, Verdict};
use ordinv::logic::{evaluate_with, parse_formula_infer, Assignment, Formula, Logic};
use ordinv::structures::text::{parse_structures, parse_tree_file, NamedStructure};
use ordinv::structures::{enumerate_unordered_trees, sibling_orders, EdgeSemantics, Structure, UnrankedTree, Vocabulary};
use ordinv::tree_automata::{
    compare_syntheses, courcelle_check, parse_tree_automata, synthesize_invariant_type_ta, CourcelleVerdict,
    TreeAutomaton,
};
use ordinv::types::{ef_equivalent, rank_type, Params, TypeRegistry};
use ordinv::{Error, Result};

use crate::{Ctx, Report};

pub const FILES: &[(&str, &str)] = &[
    ("ab_star.dfa", include_str!("../corpus/ab_star.dfa")),
    ("contains_b.ta", include_str!("../corpus/contains_b.ta")),
    ("counters.dfa", include_str!("../corpus/counters.dfa")),
    ("even_a_leaves.ta", include_str!("../corpus/even_a_leaves.ta")),
    ("graphs.st", include_str!("../corpus/graphs.st")),
    ("guards.cfg", include_str!("../corpus/guards.cfg")),
    ("guess.ta", include_str!("../corpus/guess.ta")),
    ("has_loop.fo", include_str!("../corpus/has_loop.fo")),
    ("least_in_p.fo", include_str!("../corpus/least_in_p.fo")),
    ("ordered_xy.ta", include_str!("../corpus/ordered_xy.ta")),
    ("parity.dfa", include_str!("../corpus/parity.dfa")),
    ("parity_count.fo", include_str!("../corpus/parity_count.fo")),
    ("phi_even.fo", include_str!("../corpus/phi_even.fo")),
    ("sets.st", include_str!("../corpus/sets.st")),
    ("size_mod_3.ta", include_str!("../corpus/size_mod_3.ta")),
    ("trees.tr", include_str!("../corpus/trees.tr")),
];

fn file(name: &str) -> &'static str {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .expect("corpus file is embedded")
}

pub fn show(name: Option<&str>) -> Result<&'static str> {
    let name = name.ok_or_else(|| Error::InvalidArgument("corpus show needs a file name".into()))?;
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::InvalidArgument(format!("no corpus file `{name}`")))
}

fn formula(name: &str) -> Result<Formula> {
    parse_formula_infer(file(name))
}

fn structures(name: &str) -> Result<Vec<NamedStructure>> {
    parse_structures(file(name))
}

fn dfa(file_name: &str) -> Result<Dfa> {
    Ok(parse_dfas(file(file_name))?.remove(0))
}

fn automaton(file_name: &str) -> Result<TreeAutomaton> {
    Ok(parse_tree_automata(file(file_name))?.remove(0))
}

fn ab() -> Arc<Vec<String>> {
    Arc::new(vec!["a".to_string(), "b".to_string()])
}

/// `None` passes; `Some(detail)` fails.
type Check = fn(&Ctx) -> Result<Option<String>>;

fn fail_if(bad: bool, detail: impl FnOnce() -> String) -> Option<String> {
    bad.then(detail)
}

fn phi_even_parity(ctx: &Ctx) -> Result<Option<String>> {
    let f = formula("phi_even.fo")?;
    for n in 0..=8 {
        if query_membership(&f, &Structure::pure_set(n), &ctx.guards)? != (n % 2 == 0) {
            return Ok(Some(format!("size {n}")));
        }
    }
    Ok(None)
}

fn phi_even_invariant(ctx: &Ctx) -> Result<Option<String>> {
    let v = check_invariance(&formula("phi_even.fo")?, Arc::new(Vocabulary::empty()), 5, &ctx.guards)?;
    Ok(fail_if(v != Verdict::InvariantUpTo(5), || format!("{v:?}")))
}

fn least_in_p_depends_on_order(ctx: &Ctx) -> Result<Option<String>> {
    let vocab = Arc::new(Vocabulary::new([("P", 1)], &[])?);
    let v = check_invariance(&formula("least_in_p.fo")?, vocab, 3, &ctx.guards)?;
    Ok(fail_if(v.is_invariant(), || "no counterexample".into()))
}

fn counting_matches_phi_even(ctx: &Ctx) -> Result<Option<String>> {
    let (c, f) = (formula("parity_count.fo")?, formula("phi_even.fo")?);
    for n in 0..=8 {
        let s = Structure::pure_set(n);
        let counted = evaluate_with(&s, &c, &Assignment::new(), &ctx.guards)?;
        if counted != query_membership(&f, &s, &ctx.guards)? || counted != (n % 2 == 0) {
            return Ok(Some(format!("size {n}")));
        }
    }
    Ok(None)
}

fn types_match_games(ctx: &Ctx) -> Result<Option<String>> {
    for name in ["graphs.st", "sets.st"] {
        let ss = structures(name)?;
        let ordered: Vec<(String, Structure)> = ss
            .iter()
            .map(|n| Ok((n.name.clone(), n.order.as_ref().map_or(Ok(n.structure.clone()), |o| n.structure.with_order(o))?)))
            .collect::<Result<_>>()?;
        for logic in [Logic::Fo, Logic::Mso] {
            for k in 0..=2 {
                let mut reg = TypeRegistry::new();
                let ids = ordered
                    .iter()
                    .map(|(_, s)| rank_type(&mut reg, s, &Params::none(), k, logic, &ctx.guards))
                    .collect::<Result<Vec<_>>>()?;
                for i in 0..ordered.len() {
                    for j in i + 1..ordered.len() {
                        let (a, b) = (&ordered[i].1, &ordered[j].1);
                        if a.vocab() != b.vocab() {
                            continue;
                        }
                        if (ids[i] == ids[j]) != ef_equivalent(a, b, k, logic, &ctx.guards)? {
                            return Ok(Some(format!("{} vs {} {logic} k={k}", ordered[i].0, ordered[j].0)));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

fn has_loop_values(ctx: &Ctx) -> Result<Option<String>> {
    let f = formula("has_loop.fo")?;
    for ns in structures("graphs.st")? {
        let expected = (0..ns.structure.size()).any(|v| ns.structure.holds(0, &[v, v]));
        if evaluate_with(&ns.structure, &f, &Assignment::new(), &ctx.guards)? != expected {
            return Ok(Some(ns.name));
        }
    }
    Ok(None)
}

fn dfa_verdicts(_: &Ctx) -> Result<Option<String>> {
    for (name, expected) in [("parity.dfa", true), ("counters.dfa", true), ("ab_star.dfa", false)] {
        let d = dfa(name)?;
        if d.is_commutative() != expected {
            return Ok(Some(name.to_string()));
        }
    }
    Ok(None)
}

/// Every word of length at most `max` over `r` letters.
fn words(r: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for a in 0..r {
                let mut v: Vec<usize> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn parikh_membership(ctx: &Ctx) -> Result<Option<String>> {
    for name in ["parity.dfa", "counters.dfa"] {
        let d = dfa(name)?;
        let s = parikh_decompose(&d, true, &ctx.guards)?;
        let r = d.alphabet().len();
        for w in words(r, 8) {
            if semilinear_membership(&s, &parikh_vector(&w, r))? != d.accepts(&w) {
                return Ok(Some(format!("{name} word {}", d.word_text(&w))));
            }
        }
    }
    let s = parikh_decompose(&dfa("counters.dfa")?, true, &ctx.guards)?.to_string();
    Ok(fail_if(s != "{(S[0,2], S[1,3])}", || format!("counters gives {s}")))
}

fn parikh_rejects_ab_star(ctx: &Ctx) -> Result<Option<String>> {
    match parikh_decompose(&dfa("ab_star.dfa")?, true, &ctx.guards) {
        Err(Error::NotCommutative(w)) => Ok(fail_if(w != "ab/ba" && w != "ba/ab", || format!("witness {w}"))),
        other => Ok(Some(format!("{other:?}"))),
    }
}

fn ta_verdicts(_: &Ctx) -> Result<Option<String>> {
    for (name, invariant, det) in [
        ("even_a_leaves.ta", true, true),
        ("contains_b.ta", true, true),
        ("size_mod_3.ta", true, true),
        ("ordered_xy.ta", false, true),
        ("guess.ta", true, false),
    ] {
        let a = automaton(name)?;
        if a.is_sibling_invariant() != invariant || a.is_deterministic() != det {
            return Ok(Some(name.to_string()));
        }
    }
    Ok(None)
}

/// Direct acceptance oracles for the invariant corpus automata.
fn oracles() -> Vec<(&'static str, fn(&UnrankedTree) -> bool)> {
    fn even_a_leaves(t: &UnrankedTree) -> bool {
        (0..t.size()).filter(|&v| t.children(v).is_empty() && t.label_name(v) == "a").count() % 2 == 0
    }
    fn contains_b(t: &UnrankedTree) -> bool {
        (0..t.size()).any(|v| t.label_name(v) == "b")
    }
    fn size_mod_3(t: &UnrankedTree) -> bool {
        t.size() % 3 == 0
    }
    vec![
        ("even_a_leaves.ta", even_a_leaves),
        ("contains_b.ta", contains_b),
        ("size_mod_3.ta", size_mod_3),
    ]
}

fn ta_order_independence(ctx: &Ctx) -> Result<Option<String>> {
    for (name, oracle) in oracles() {
        let a = automaton(name)?;
        for t in enumerate_unordered_trees(ab(), 5) {
            let expected = oracle(&t);
            for o in sibling_orders(&t, &ctx.guards)? {
                if a.run(&t, Some(&o))?.accepted != expected {
                    return Ok(Some(format!("{name} on {}", t.to_text())));
                }
            }
        }
    }
    Ok(None)
}

fn counting_equivalence(ctx: &Ctx) -> Result<Option<String>> {
    for (name, _) in oracles() {
        let a = automaton(name)?;
        let c = a.to_counting(&ctx.guards)?;
        for t in enumerate_unordered_trees(ab(), 6) {
            if c.run(&t)? != a.accepts_unordered(&t)? {
                return Ok(Some(format!("{name} on {}", t.to_text())));
            }
        }
    }
    Ok(None)
}

fn random_orders_on_tree_file(ctx: &Ctx) -> Result<Option<String>> {
    let trees = parse_tree_file(file("trees.tr"), Some(ab()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    for (name, oracle) in oracles() {
        let a = automaton(name)?;
        for (t, written) in &trees {
            let expected = oracle(t);
            let all = sibling_orders(t, &ctx.guards)?;
            let sampled = all.choose(&mut rng).expect("at least one order");
            for o in written.iter().chain([sampled]) {
                if a.run(t, Some(o))?.accepted != expected {
                    return Ok(Some(format!("{name} on {}", t.to_text())));
                }
            }
        }
    }
    Ok(None)
}

fn courcelle_parity(ctx: &Ctx) -> Result<Option<String>> {
    let v = courcelle_check(
        &formula("parity_count.fo")?,
        &formula("phi_even.fo")?,
        ab(),
        4,
        EdgeSemantics::Child,
        &ctx.guards,
    )?;
    Ok(fail_if(v != CourcelleVerdict::EquivalentUpTo(4), || format!("{v:?}")))
}

fn synthesis(ctx: &Ctx) -> Result<Option<String>> {
    let small = synthesize_invariant_type_ta(ab(), 1, Logic::Fo, 4, &ctx.guards)?;
    if !small.is_consistent() {
        return Ok(Some(format!("{} conflicts", small.conflicts.len())));
    }
    let large = synthesize_invariant_type_ta(ab(), 1, Logic::Fo, 5, &ctx.guards)?;
    let problems = compare_syntheses(&small, &large);
    Ok(problems.into_iter().next())
}

fn composition_tables(ctx: &Ctx) -> Result<Option<String>> {
    let vocab = Arc::new(Vocabulary::new([("E", 2)], &[])?);
    for op in [Operation::Union, Operation::Product] {
        let t = build_composition_table(op, vocab.clone(), 1, Logic::Fo, 2, &ctx.guards)?;
        if !t.is_functional() {
            return Ok(Some(format!("{op} has {} violations", t.violations().len())));
        }
        let r = t.replay(20, ctx.seed)?;
        if let Some(m) = r.mismatches.into_iter().next() {
            return Ok(Some(format!("{op} replay {m}")));
        }
    }
    Ok(None)
}

fn lex_lemma(ctx: &Ctx) -> Result<Option<String>> {
    let r = verify_lex_ef_lemma(Arc::new(Vocabulary::new([("E", 2)], &[])?), 1, 2, &ctx.guards)?;
    Ok(r.violations.into_iter().next())
}

fn flip_transport(ctx: &Ctx) -> Result<Option<String>> {
    let vocab = Arc::new(Vocabulary::new([("E", 2)], &[])?);
    let r = verify_flip_transport(Operation::Union, vocab, 1, Logic::Fo, 2, 20, ctx.seed, &ctx.guards)?;
    Ok(r.failures.into_iter().next())
}

const BATTERY: &[(&str, Check)] = &[
    ("phi-even-parity", phi_even_parity),
    ("phi-even-invariant", phi_even_invariant),
    ("least-in-p-order-dependent", least_in_p_depends_on_order),
    ("counting-parity", counting_matches_phi_even),
    ("types-vs-games", types_match_games),
    ("has-loop", has_loop_values),
    ("dfa-commutativity", dfa_verdicts),
    ("parikh-membership", parikh_membership),
    ("parikh-rejects-ab-star", parikh_rejects_ab_star),
    ("ta-verdicts", ta_verdicts),
    ("ta-order-independence", ta_order_independence),
    ("counting-automata", counting_equivalence),
    ("tree-file-random-orders", random_orders_on_tree_file),
    ("courcelle-parity", courcelle_parity),
    ("synthesis", synthesis),
    ("composition-tables", composition_tables),
    ("lex-lemma", lex_lemma),
    ("flip-transport", flip_transport),
];

pub fn verify(ctx: &Ctx, out: &mut Report) -> Result<()> {
    let mut failed = 0;
    for (name, check) in BATTERY {
        let outcome = match check(ctx) {
            Ok(None) => None,
            Ok(Some(d)) => Some(d),
            Err(e) => Some(format!("{}: {e}", e.code())),
        };
        match outcome {
            None => out.push(format!("RESULT {name} pass")),
            Some(d) => {
                failed += 1;
                out.push(format!("RESULT {name} FAIL {d}"));
            }
        }
    }
    out.push(format!("RESULT corpus checks={} failed={failed}", BATTERY.len()));
    out.failed = failed > 0;
    Ok(())
}
