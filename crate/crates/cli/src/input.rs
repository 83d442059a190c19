use std::path::Path;
use std::sync::Arc;

use ordinv::commutative::{parse_dfas, Dfa};
use ordinv::logic::{parse_formula, parse_formula_infer, Formula};
use ordinv::structures::text::{parse_structures, parse_tree_file, NamedStructure};
use ordinv::structures::{SiblingOrder, UnrankedTree, Vocabulary};
use ordinv::tree_automata::{parse_tree_automata, TreeAutomaton};
use ordinv::{Error, Result};

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Positions in parse errors are relative to the file; prefix its path.
fn located<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { what, line, col, msg } => Error::Parse {
            what,
            line,
            col,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

pub fn structures(path: &Path) -> Result<Vec<NamedStructure>> {
    let v = located(path, parse_structures(&read(path)?))?;
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: no structure blocks", path.display())));
    }
    Ok(v)
}

pub fn formula(path: &Path, vocab: Option<&Vocabulary>) -> Result<Formula> {
    let text = read(path)?;
    located(
        path,
        match vocab {
            Some(v) => parse_formula(&text, v),
            None => parse_formula_infer(&text),
        },
    )
}

pub fn dfas(path: &Path) -> Result<Vec<Dfa>> {
    let v = located(path, parse_dfas(&read(path)?))?;
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: no dfa blocks", path.display())));
    }
    Ok(v)
}

pub fn automata(path: &Path) -> Result<Vec<TreeAutomaton>> {
    let v = located(path, parse_tree_automata(&read(path)?))?;
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: no ta blocks", path.display())));
    }
    Ok(v)
}

pub fn pick(mut all: Vec<TreeAutomaton>, name: Option<&str>) -> Result<TreeAutomaton> {
    match name {
        None => Ok(all.remove(0)),
        Some(n) => all
            .into_iter()
            .find(|a| a.name() == n)
            .ok_or_else(|| Error::InvalidArgument(format!("no automaton named `{n}`"))),
    }
}

pub fn trees(path: &Path, alphabet: Option<Arc<Vec<String>>>) -> Result<Vec<(UnrankedTree, Option<SiblingOrder>)>> {
    let v = located(path, parse_tree_file(&read(path)?, alphabet))?;
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: no trees", path.display())));
    }
    Ok(v)
}

pub fn alphabet(text: &str) -> Result<Arc<Vec<String>>> {
    let mut labels: Vec<String> = text
        .split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    labels.sort();
    labels.dedup();
    if labels.is_empty() {
        return Err(Error::InvalidArgument("empty alphabet".into()));
    }
    Ok(Arc::new(labels))
}
