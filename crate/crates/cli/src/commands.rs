use std::path::Path;
use std::sync::Arc;

use ordinv::commutative::parikh_decompose;
use ordinv::fv::{build_composition_table, verify_flip_transport, verify_lex_ef_lemma, Operation};
use ordinv::invariance::{check_invariance, check_tree_invariance, Counterexample, FlipPartition, Verdict};
use ordinv::logic::{evaluate_with, Assignment, Formula, Logic};
use ordinv::structures::text::{format_compact, NamedStructure};
use ordinv::structures::{EdgeSemantics, LinearOrder, Structure, Vocabulary, ORDER};
use ordinv::tree_automata::{compare_syntheses, courcelle_check, synthesize_invariant_type_ta, CourcelleVerdict};
use ordinv::types::{ef_equivalent, rank_type, Params, TypeRegistry};
use ordinv::{Error, Result};

use crate::{corpus, input, Command, CorpusAction, Ctx, Report};

/// `name ` when a file holds several items, empty otherwise.
fn tag(name: &str, several: bool) -> String {
    if several {
        format!("{name} ")
    } else {
        String::new()
    }
}

fn commas(o: &LinearOrder) -> String {
    o.as_slice().iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// The structure with its `order:` line attached, if any.
fn ordered(ns: &NamedStructure) -> Result<Structure> {
    match &ns.order {
        Some(o) => ns.structure.with_order(o),
        None => Ok(ns.structure.clone()),
    }
}

pub fn dispatch(cmd: &Command, ctx: &Ctx, out: &mut Report) -> Result<()> {
    match cmd {
        Command::Eval { structure, formula } => eval(structure, formula, ctx, out),
        Command::Type {
            structure,
            logic,
            rank,
            serialize,
        } => type_of(structure, *logic, *rank, *serialize, ctx, out),
        Command::Ef {
            left,
            right,
            logic,
            rank,
        } => ef(left, right, *logic, *rank, ctx, out),
        Command::InvType {
            structure,
            logic,
            rank,
            max_size,
            dump,
        } => inv_type(structure, *logic, *rank, *max_size, *dump, ctx, out),
        Command::CheckInvariance {
            formula,
            max_size,
            vocab,
            trees,
            alphabet,
            edge_semantics,
        } => {
            let f = input::formula(formula, None)?;
            if *trees {
                let alphabet = alphabet
                    .as_deref()
                    .ok_or_else(|| Error::InvalidArgument("--trees needs --alphabet".into()))?;
                check_trees(&f, input::alphabet(alphabet)?, *max_size, (*edge_semantics).into(), ctx, out)
            } else {
                let vocab = match vocab {
                    Some(v) => Vocabulary::parse_compact(v)?,
                    None => Vocabulary::new(f.relations().into_iter().filter(|(n, _)| n != ORDER), &[])?,
                };
                check_orders(&f, Arc::new(vocab), *max_size, ctx, out)
            }
        }
        Command::Commutative { dfa } => {
            let all = input::dfas(dfa)?;
            let several = all.len() > 1;
            for d in &all {
                match d.witness_text() {
                    None => out.push(format!("RESULT {}commutative", tag(d.name(), several))),
                    Some(w) => out.push(format!("RESULT {}not-commutative witness={w}", tag(d.name(), several))),
                }
            }
            Ok(())
        }
        Command::Parikh {
            dfa,
            require_commutative,
        } => {
            let all = input::dfas(dfa)?;
            let several = all.len() > 1;
            for d in &all {
                if !*require_commutative && !d.is_commutative() {
                    out.push(format!(
                        "DIAG {}not closed under permutation; the set describes the closure",
                        tag(d.name(), several)
                    ));
                }
                let s = parikh_decompose(d, *require_commutative, &ctx.guards)?;
                out.push(format!("RESULT {}{s}", tag(d.name(), several)));
            }
            Ok(())
        }
        Command::TaRun { ta, trees, name } => {
            let a = input::pick(input::automata(ta)?, name.as_deref())?;
            let ts = input::trees(trees, Some(Arc::new(a.labels().to_vec())))?;
            for (t, ord) in &ts {
                let r = a.run(t, ord.as_ref())?;
                let mut line = format!("RESULT {} {}", t.to_text(), if r.accepted { "accept" } else { "reject" });
                if let Some(v) = r.failure {
                    line.push_str(&format!(" failure={}", t.address_text(v)));
                }
                out.push(line);
            }
            Ok(())
        }
        Command::TaCheckInvariant { ta } => {
            let all = input::automata(ta)?;
            let several = all.len() > 1;
            for a in &all {
                let det = a.is_deterministic();
                match a.invariance_violation() {
                    None => out.push(format!("RESULT {}sibling-invariant deterministic={det}", tag(a.name(), several))),
                    Some((q, l, w)) => out.push(format!(
                        "RESULT {}not-sibling-invariant deterministic={det} state={} label={} witness={w}",
                        tag(a.name(), several),
                        a.states()[q],
                        a.labels()[l]
                    )),
                }
                if let Some(o) = a.overlap() {
                    out.push(format!(
                        "DIAG {}overlap label={} states={},{}",
                        tag(a.name(), several),
                        a.labels()[o.label],
                        a.states()[o.first],
                        a.states()[o.second]
                    ));
                }
            }
            Ok(())
        }
        Command::TaToCounting { ta, name, trees } => {
            let a = input::pick(input::automata(ta)?, name.as_deref())?;
            let c = a.to_counting(&ctx.guards)?;
            for l in c.to_text().lines() {
                out.push(format!("CTA {l}"));
            }
            if let Some(p) = trees {
                for (t, ord) in input::trees(p, Some(Arc::new(a.labels().to_vec())))? {
                    let ordered = a.run(&t, ord.as_ref())?.accepted;
                    let counting = c.run(&t)?;
                    out.push(format!(
                        "RESULT {} ordered={} counting={} agree={}",
                        t.to_text(),
                        verdict(ordered),
                        verdict(counting),
                        ordered == counting
                    ));
                }
            }
            Ok(())
        }
        Command::TaSynth {
            alphabet,
            logic,
            rank,
            max_nodes,
            compare,
            emit,
        } => synth(alphabet, *logic, *rank, *max_nodes, *compare, *emit, ctx, out),
        Command::CourcelleCheck {
            counting,
            ordered,
            alphabet,
            max_nodes,
            edge_semantics,
        } => {
            let c = input::formula(counting, None)?;
            let o = input::formula(ordered, None)?;
            match courcelle_check(&c, &o, input::alphabet(alphabet)?, *max_nodes, (*edge_semantics).into(), &ctx.guards)? {
                CourcelleVerdict::EquivalentUpTo(n) => out.push(format!("RESULT equivalent-up-to {n}")),
                CourcelleVerdict::Counterexample { tree, counting_value } => {
                    out.push("RESULT not-equivalent");
                    out.push(format!(
                        "COUNTEREXAMPLE tree={} counting={} ordered={}",
                        tree.to_text(),
                        counting_value,
                        !counting_value
                    ));
                }
            }
            Ok(())
        }
        Command::FvTable {
            op,
            vocab,
            logic,
            rank,
            max_size,
            replay,
            transport,
            lex,
        } => fv_table(*op, vocab, *logic, *rank, *max_size, *replay, *transport, *lex, ctx, out),
        Command::Corpus { action, .. } => match action {
            CorpusAction::List => {
                for (name, _) in corpus::FILES {
                    out.push(format!("FILE {name}"));
                }
                Ok(())
            }
            CorpusAction::Verify => corpus::verify(ctx, out),
            CorpusAction::Show => unreachable!("handled before the report starts"),
        },
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "accept"
    } else {
        "reject"
    }
}

fn eval(structure: &Path, formula: &Path, ctx: &Ctx, out: &mut Report) -> Result<()> {
    let all = input::structures(structure)?;
    let several = all.len() > 1;
    for ns in &all {
        let f = input::formula(formula, Some(ns.structure.vocab()))?;
        let s = if f.uses_order() {
            match &ns.order {
                Some(o) => ns.structure.with_order(o)?,
                None => {
                    out.push(format!("DIAG {}order=identity", tag(&ns.name, several)));
                    ns.structure.with_order(&LinearOrder::identity(ns.structure.size()))?
                }
            }
        } else {
            ns.structure.clone()
        };
        let v = evaluate_with(&s, &f, &Assignment::new(), &ctx.guards)?;
        out.push(format!("RESULT {}{v}", tag(&ns.name, several)));
    }
    Ok(())
}

fn type_of(structure: &Path, logic: Logic, k: usize, serialize: bool, ctx: &Ctx, out: &mut Report) -> Result<()> {
    let all = input::structures(structure)?;
    let mut reg = TypeRegistry::new();
    for ns in &all {
        let t = rank_type(&mut reg, &ordered(ns)?, &Params::none(), k, logic, &ctx.guards)?;
        out.push(format!("TYPE {} {} k={k} id={}", ns.name, logic, reg.hash_hex(t)));
        if serialize {
            for l in reg.serialize(t).lines() {
                out.push(format!("SERIAL {} {l}", ns.name));
            }
        }
    }
    Ok(())
}

fn ef(left: &Path, right: &Path, logic: Logic, k: usize, ctx: &Ctx, out: &mut Report) -> Result<()> {
    let a = ordered(&input::structures(left)?[0])?;
    let b = ordered(&input::structures(right)?[0])?;
    let eq = ef_equivalent(&a, &b, k, logic, &ctx.guards)?;
    out.push(format!("RESULT {}", if eq { "equivalent" } else { "distinguishable" }));
    Ok(())
}

fn inv_type(
    structure: &Path,
    logic: Logic,
    k: usize,
    max_size: Option<usize>,
    dump: bool,
    ctx: &Ctx,
    out: &mut Report,
) -> Result<()> {
    let all = input::structures(structure)?;
    let bound = max_size.unwrap_or_else(|| all.iter().map(|n| n.structure.size()).max().unwrap_or(0));
    let p = FlipPartition::build(all[0].structure.vocab_arc().clone(), k, logic, bound, &ctx.guards)?;
    for ns in &all {
        let id = match &ns.order {
            Some(o) => p.invariant_type_under(&ns.structure, o)?,
            None => p.invariant_type_of(&ns.structure)?,
        };
        out.push(format!("RESULT {} inv={} up-to={bound}", ns.name, p.component_name(id)));
    }
    out.push(format!("DIAG components={} ordered-types={}", p.component_count(), p.nodes().len()));
    if p.used_single_expansion() {
        out.push("DIAG single-expansion");
    }
    if dump {
        for l in p.dump().lines() {
            out.push(format!("PARTITION {l}"));
        }
    }
    Ok(())
}

fn check_orders(f: &Formula, vocab: Arc<Vocabulary>, bound: usize, ctx: &Ctx, out: &mut Report) -> Result<()> {
    match check_invariance(f, vocab, bound, &ctx.guards)? {
        Verdict::InvariantUpTo(n) => out.push(format!("RESULT invariant-up-to {n}")),
        Verdict::Counterexample(c) => {
            out.push("RESULT not-invariant");
            if let Counterexample::Orders {
                structure,
                first,
                second,
                first_value,
            } = *c
            {
                out.push(format!(
                    "COUNTEREXAMPLE structure={} order1={} order2={} value1={first_value} value2={}",
                    format_compact(&structure),
                    commas(&first),
                    commas(&second),
                    !first_value
                ));
            }
        }
    }
    Ok(())
}

fn check_trees(
    f: &Formula,
    alphabet: Arc<Vec<String>>,
    bound: usize,
    edges: EdgeSemantics,
    ctx: &Ctx,
    out: &mut Report,
) -> Result<()> {
    match check_tree_invariance(f, alphabet, bound, edges, &ctx.guards)? {
        Verdict::InvariantUpTo(n) => out.push(format!("RESULT invariant-up-to {n}")),
        Verdict::Counterexample(c) => {
            out.push("RESULT not-invariant");
            if let Counterexample::SiblingOrders {
                tree,
                first,
                second,
                first_value,
            } = *c
            {
                out.push(format!(
                    "COUNTEREXAMPLE tree={} order1={} order2={} value1={first_value} value2={}",
                    tree.to_text(),
                    tree.reordered(&first)?.0.to_text(),
                    tree.reordered(&second)?.0.to_text(),
                    !first_value
                ));
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn synth(
    alphabet: &str,
    logic: Logic,
    k: usize,
    bound: usize,
    compare: Option<usize>,
    emit: bool,
    ctx: &Ctx,
    out: &mut Report,
) -> Result<()> {
    let alphabet = input::alphabet(alphabet)?;
    let s = synthesize_invariant_type_ta(alphabet.clone(), k, logic, bound, &ctx.guards)?;
    out.push(format!(
        "RESULT states={} consistent={} trees={} transitions={}",
        s.state_count(),
        s.is_consistent(),
        s.trees.len(),
        s.table.len()
    ));
    out.push(format!(
        "DIAG conflicts={} permutation-checks={} permutation-failures={}",
        s.conflicts.len(),
        s.permutation_checks,
        s.permutation_failures.len()
    ));
    for c in &s.conflicts {
        out.push(format!(
            "DIAG conflict label={} children={:?} t{}={} t{}={}",
            c.label,
            c.children,
            c.first.0,
            c.first.1.to_text(),
            c.second.0,
            c.second.1.to_text()
        ));
    }
    for t in &s.permutation_failures {
        out.push(format!("DIAG permutation-failure tree={}", t.to_text()));
    }
    out.push(format!("DIAG partial beyond bound {bound}"));
    for ((a, kids), (q, w)) in &s.table {
        let kids: Vec<String> = kids.iter().map(|c| format!("t{c}")).collect();
        out.push(format!(
            "TABLE {} [{}] -> t{q} witness={}",
            alphabet[*a],
            kids.join(","),
            s.trees[*w].0.to_text()
        ));
    }
    if emit {
        for l in s.automaton.to_text().lines() {
            out.push(format!("TA {l}"));
        }
    }
    if let Some(m) = compare {
        let large = synthesize_invariant_type_ta(alphabet, k, logic, m, &ctx.guards)?;
        let problems = compare_syntheses(&s, &large);
        out.push(format!("RESULT monotone={} compared-with={m}", problems.is_empty()));
        for p in problems {
            out.push(format!("DIAG {p}"));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fv_table(
    op: Operation,
    vocab: &str,
    logic: Logic,
    k: usize,
    bound: usize,
    replay: usize,
    transport: usize,
    lex: bool,
    ctx: &Ctx,
    out: &mut Report,
) -> Result<()> {
    let vocab = Arc::new(Vocabulary::parse_compact(vocab)?);
    let t = build_composition_table(op, vocab.clone(), k, logic, bound, &ctx.guards)?;
    for l in t.to_text().lines() {
        out.push(format!("TABLE {l}"));
    }
    if t.is_functional() {
        out.push("RESULT functional");
    } else {
        out.push(format!("RESULT not-functional violations={}", t.violations().len()));
    }
    if replay > 0 {
        let r = t.replay(replay, ctx.seed)?;
        out.push(format!("RESULT replay checked={} mismatches={}", r.checked, r.mismatches.len()));
        for m in r.mismatches {
            out.push(format!("DIAG replay-mismatch {m}"));
        }
    }
    if transport > 0 {
        let r = verify_flip_transport(op, vocab.clone(), k, logic, bound, transport, ctx.seed, &ctx.guards)?;
        out.push(format!(
            "RESULT transport paths={} reorder-steps={} jump-steps={} failures={}",
            r.paths,
            r.reorder_steps,
            r.jump_steps,
            r.failures.len()
        ));
        for f in r.failures {
            out.push(format!("DIAG transport-failure {f}"));
        }
    }
    if lex {
        if op != Operation::Product {
            return Err(Error::InvalidArgument("--lex applies to products".into()));
        }
        let r = verify_lex_ef_lemma(vocab, k, bound, &ctx.guards)?;
        out.push(format!(
            "RESULT lex factors={} classes={} products={} violations={}",
            r.factors,
            r.classes,
            r.products,
            r.violations.len()
        ));
        for v in &r.violations {
            out.push(format!("DIAG lex-violation {v}"));
        }
    }
    Ok(())
}
