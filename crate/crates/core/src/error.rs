use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report. Each variant maps to a stable
/// diagnostic code (see [`Error::code`]) used by the command-line reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{what}:{line}:{col}: {msg}")]
    Parse {
        what: &'static str,
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),
    #[error("reserved symbol `{0}` cannot be declared directly")]
    ReservedSymbol(String),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("operation does not support constants")]
    ConstantsPresent,
    #[error("product factor is empty")]
    EmptyFactor,
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("guard `{guard}` exceeded: {actual} > {limit}")]
    GuardExceeded {
        guard: &'static str,
        limit: u128,
        actual: u128,
    },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("parameter out of domain: {0}")]
    ParameterOutOfDomain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("language is not closed under permutation (witness {0})")]
    NotCommutative(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("tree automaton is not sibling-invariant at state `{state}`, label `{label}` (witness {witness})")]
    NotSiblingInvariant {
        state: String,
        label: String,
        witness: String,
    },
    #[error("label `{0}` is outside the automaton alphabet")]
    UnknownLabel(String),
    #[error("no candidate state at node {0}")]
    NoCandidateState(String),
    #[error("several candidate states ({states}) at node {path}")]
    AmbiguousState { path: String, states: String },
    #[error("pair not present in the composition table: {0}")]
    MissingKey(String),
    #[error("structure of size {size} lies outside the partition universe (bound {bound})")]
    OutsideUniverse { size: usize, bound: usize },
    #[error("formula is not invariant: {0}")]
    FormulaNotInvariant(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(what: &'static str, line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            what,
            line,
            col,
            msg: msg.into(),
        }
    }

    pub(crate) fn guard(guard: &'static str, limit: impl Into<u128>, actual: impl Into<u128>) -> Self {
        Error::GuardExceeded {
            guard,
            limit: limit.into(),
            actual: actual.into(),
        }
    }

    /// Stable, machine-readable diagnostic code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse-error",
            Error::UnknownSymbol(_) => "unknown-symbol",
            Error::ArityMismatch { .. } => "arity-mismatch",
            Error::VocabularyMismatch(_) => "vocabulary-mismatch",
            Error::ReservedSymbol(_) => "reserved-symbol",
            Error::DuplicateSymbol(_) => "duplicate-symbol",
            Error::ConstantsPresent => "constants-present",
            Error::EmptyFactor => "empty-factor",
            Error::InvalidStructure(_) => "invalid-structure",
            Error::InvalidOrder(_) => "invalid-order",
            Error::InvalidTree(_) => "invalid-tree",
            Error::GuardExceeded { .. } => "guard-exceeded",
            Error::UnboundVariable(_) => "unbound-variable",
            Error::ParameterOutOfDomain(_) => "parameter-out-of-domain",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NotCommutative(_) => "not-commutative",
            Error::AlphabetMismatch(_) => "alphabet-mismatch",
            Error::NotSiblingInvariant { .. } => "not-sibling-invariant",
            Error::UnknownLabel(_) => "unknown-label",
            Error::NoCandidateState(_) => "no-candidate-state",
            Error::AmbiguousState { .. } => "ambiguous-state",
            Error::MissingKey(_) => "missing-key",
            Error::OutsideUniverse { .. } => "outside-universe",
            Error::FormulaNotInvariant(_) => "formula-not-invariant",
            Error::Unsupported(_) => "unsupported",
            Error::Io(_) => "io-error",
        }
    }

    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct() {
        let s = || String::from("x");
        let all = [
            Error::Parse { what: "x", line: 1, col: 1, msg: s() },
            Error::UnknownSymbol(s()),
            Error::ArityMismatch { name: s(), expected: 1, got: 2 },
            Error::VocabularyMismatch(s()),
            Error::ReservedSymbol(s()),
            Error::DuplicateSymbol(s()),
            Error::ConstantsPresent,
            Error::EmptyFactor,
            Error::InvalidStructure(s()),
            Error::InvalidOrder(s()),
            Error::InvalidTree(s()),
            Error::GuardExceeded { guard: "x", limit: 1, actual: 2 },
            Error::UnboundVariable(s()),
            Error::ParameterOutOfDomain(s()),
            Error::InvalidArgument(s()),
            Error::NotCommutative(s()),
            Error::AlphabetMismatch(s()),
            Error::NotSiblingInvariant { state: s(), label: s(), witness: s() },
            Error::UnknownLabel(s()),
            Error::NoCandidateState(s()),
            Error::AmbiguousState { path: s(), states: s() },
            Error::MissingKey(s()),
            Error::OutsideUniverse { size: 1, bound: 0 },
            Error::FormulaNotInvariant(s()),
            Error::Unsupported(s()),
            Error::Io(s()),
        ];
        let codes: std::collections::HashSet<_> = all.iter().map(Error::code).collect();
        assert_eq!(codes.len(), all.len());
        assert_eq!(all.iter().filter(|e| e.is_guard()).count(), 1);
    }
}
