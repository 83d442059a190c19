//! `ordinv` command-line front end.
//!
//! Every command prints a report: a `COMMAND` echo, a `CONFIG` echo, then
//! lines prefixed `RESULT`, `DIAG`, `COUNTEREXAMPLE` or a command-specific
//! tag. Exit status is 0 when a verdict was computed (negative verdicts
//! included), 1 on input errors or a failed corpus check, 2 when a guard
//! stops the computation.

mod commands;
mod corpus;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ordinv::fv::Operation;
use ordinv::logic::Logic;
use ordinv::{Error, Guards};

#[derive(Parser, Debug)]
#[command(name = "ordinv", version, about = "Order-invariant types, commutative languages and invariant tree automata")]
struct Cli {
    /// Seed for every randomized sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// File of key=value guard overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Single guard override, applied after --config.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Tabular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Edges {
    Child,
    Descendant,
}

impl From<Edges> for ordinv::structures::EdgeSemantics {
    fn from(e: Edges) -> Self {
        match e {
            Edges::Child => ordinv::structures::EdgeSemantics::Child,
            Edges::Descendant => ordinv::structures::EdgeSemantics::Descendant,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CorpusAction {
    List,
    Show,
    Verify,
}

fn parse_logic(s: &str) -> Result<Logic, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_op(s: &str) -> Result<Operation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a sentence on every structure of a file.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: PathBuf,
    },
    /// Rank-k type identifiers of every structure of a file.
    Type {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_parser = parse_logic, default_value = "fo")]
        logic: Logic,
        #[arg(long)]
        rank: usize,
        /// Also print the canonical type tree.
        #[arg(long)]
        serialize: bool,
    },
    /// Decide the k-round game between the first structures of two files.
    Ef {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_parser = parse_logic, default_value = "fo")]
        logic: Logic,
        #[arg(long)]
        rank: usize,
    },
    /// Order-invariant type of every structure of a file.
    InvType {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_parser = parse_logic, default_value = "fo")]
        logic: Logic,
        #[arg(long)]
        rank: usize,
        /// Universe bound; defaults to the largest structure in the file.
        #[arg(long)]
        max_size: Option<usize>,
        /// Print the whole partition.
        #[arg(long)]
        dump: bool,
    },
    /// Exhaustive order-invariance check of a sentence up to a size bound.
    CheckInvariance {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        max_size: usize,
        /// Vocabulary such as `E/2 P/1`; inferred from the formula otherwise.
        #[arg(long)]
        vocab: Option<String>,
        /// Check over sibling-ordered trees instead of linear orders.
        #[arg(long)]
        trees: bool,
        /// Tree labels, comma separated.
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long, value_enum, default_value_t = Edges::Child)]
        edge_semantics: Edges,
    },
    /// Permutation-closure test for every DFA of a file.
    Commutative {
        #[arg(long)]
        dfa: PathBuf,
    },
    /// Letter-count decomposition of every DFA of a file.
    Parikh {
        #[arg(long)]
        dfa: PathBuf,
        #[arg(long)]
        require_commutative: bool,
    },
    /// Run a tree automaton on every tree of a file.
    TaRun {
        #[arg(long)]
        ta: PathBuf,
        #[arg(long)]
        trees: PathBuf,
        /// Automaton name when the file holds several.
        #[arg(long)]
        name: Option<String>,
    },
    /// Sibling-invariance and determinism of every automaton of a file.
    TaCheckInvariant {
        #[arg(long)]
        ta: PathBuf,
    },
    /// Counting automaton of an invariant automaton.
    TaToCounting {
        #[arg(long)]
        ta: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// Also run both automata on these trees.
        #[arg(long)]
        trees: Option<PathBuf>,
    },
    /// Build the automaton computing invariant types of small trees.
    TaSynth {
        #[arg(long)]
        alphabet: String,
        #[arg(long, value_parser = parse_logic, default_value = "fo")]
        logic: Logic,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        max_nodes: usize,
        /// Rebuild at this larger bound and compare transitions.
        #[arg(long)]
        compare: Option<usize>,
        /// Print the automaton text.
        #[arg(long)]
        emit: bool,
    },
    /// Compare a counting sentence with a sibling-ordered sentence on trees.
    CourcelleCheck {
        #[arg(long)]
        counting: PathBuf,
        #[arg(long)]
        ordered: PathBuf,
        #[arg(long)]
        alphabet: String,
        #[arg(long)]
        max_nodes: usize,
        #[arg(long, value_enum, default_value_t = Edges::Child)]
        edge_semantics: Edges,
    },
    /// Composition table of invariant types under union or product.
    FvTable {
        #[arg(long, value_parser = parse_op)]
        op: Operation,
        #[arg(long, default_value = "E/2")]
        vocab: String,
        #[arg(long, value_parser = parse_logic, default_value = "fo")]
        logic: Logic,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        max_size: usize,
        /// Fresh random pairs checked against the table.
        #[arg(long, default_value_t = 20)]
        replay: usize,
        /// Sampled flip chains transported through the operation.
        #[arg(long, default_value_t = 0)]
        transport: usize,
        /// Also check equivalence of lexicographic products (products only).
        #[arg(long)]
        lex: bool,
    },
    /// The shipped example corpus.
    Corpus {
        #[arg(value_enum)]
        action: CorpusAction,
        /// File name for `show`.
        name: Option<String>,
    },
}

/// Accumulated report lines plus whether a check failed.
#[derive(Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub failed: bool,
}

impl Report {
    pub fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }
}

/// Settings shared by every command.
pub struct Ctx {
    pub guards: Guards,
    pub seed: u64,
}

fn guards_from(cli: &Cli) -> Result<Guards, Error> {
    let mut g = match &cli.config {
        Some(p) => Guards::from_config_text(&input::read(p)?)?,
        None => Guards::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected KEY=VALUE, found `{kv}`")))?;
        g.set(k, v)?;
    }
    Ok(g)
}

/// Diagnostic detail for an error: structured fields where the error has
/// them, its message otherwise.
fn diag(e: &Error) -> String {
    match e {
        Error::NotCommutative(w) => format!("DIAG {} witness={w}", e.code()),
        Error::NotSiblingInvariant { state, label, witness } => {
            format!("DIAG {} state={state} label={label} witness={witness}", e.code())
        }
        Error::GuardExceeded { guard, limit, actual } => {
            format!("DIAG {} guard={guard} limit={limit} actual={actual}", e.code())
        }
        _ => format!("DIAG {} {e}", e.code()),
    }
}

fn emit(lines: &[String], format: Format) {
    let mut out = String::new();
    for l in lines {
        match format {
            Format::Plain => out.push_str(l),
            Format::Tabular => out.push_str(&l.split(' ').filter(|w| !w.is_empty()).collect::<Vec<_>>().join("\t")),
        }
        out.push('\n');
    }
    print!("{out}");
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            println!("DIAG usage {first}");
            return ExitCode::from(1);
        }
    };
    if let Command::Corpus {
        action: CorpusAction::Show,
        name,
    } = &cli.command
    {
        return match corpus::show(name.as_deref()) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                println!("{}", diag(&e));
                ExitCode::from(1)
            }
        };
    }
    if let Some(j) = cli.jobs {
        if j == 0 || rayon::ThreadPoolBuilder::new().num_threads(j).build_global().is_err() {
            println!("DIAG invalid-argument bad --jobs value {j}");
            return ExitCode::from(1);
        }
    }

    let mut report = Report::default();
    report.push(format!("COMMAND {}", args[1..].join(" ")));
    let result = guards_from(&cli).and_then(|guards| {
        let mut config = format!("CONFIG seed={}", cli.seed);
        for (k, v) in guards.entries() {
            config.push_str(&format!(" {k}={v}"));
        }
        report.push(config);
        let ctx = Ctx { guards, seed: cli.seed };
        commands::dispatch(&cli.command, &ctx, &mut report)
    });
    let code = match result {
        Ok(()) if report.failed => 1,
        Ok(()) => 0,
        Err(e) => {
            report.push(diag(&e));
            if e.is_guard() {
                2
            } else {
                1
            }
        }
    };
    emit(&report.lines, cli.format);
    ExitCode::from(code)
}
