//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | Eloise wins / command succeeded / every capture row agrees |
//! | 1    | Abelard wins or draw / some capture row disagrees |
//! | 2    | budget exhausted (Unknown) |
//! | 10   | usage or parse error |
//! | 11   | I/O error |
//! | 12   | input rejected (ill-formed formula, bad model, compile error) |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::atm::{capture_experiment, compile_apspace, compile_kexpspace, Atm, CaptureConfig, SpaceBound};
use crate::game::{extract_trace, solve, OpponentPolicy, Outcome, SolveOptions};
use crate::par;
use crate::structure::{encode, parse_structure, ElementOrder, ModelFile};
use crate::syntax::{classify_fragment, parse_clock_term, parse_formula, validate, FormulaAst, Severity, Vocabulary};

pub const EXIT_USAGE: i32 = 10;
pub const EXIT_IO: i32 = 11;
pub const EXIT_INVALID: i32 = 12;

#[derive(Debug, Parser)]
#[command(
    name = "tlogic",
    version,
    about = "Evaluate looping first-order formulas as games and compile machines into them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the game of a formula on a model.
    Eval(EvalArgs),
    /// Report which clocked fragments a formula belongs to.
    Fragment(FragmentArgs),
    /// Print the binary encoding of a model.
    Encode(EncodeArgs),
    /// Compile a machine and compare the formula with direct simulation.
    Capture(CaptureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Text,
    Dot,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Formula text, or `@PATH` to read it from a file.
    #[arg(long)]
    pub formula: String,
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Stop after this many positions.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: Option<u64>,
    /// Emit the winner's play (text) or the explored graph (dot).
    #[arg(long)]
    pub trace: Option<TraceFormat>,
    /// Initial values of free variables, `x=3`.
    #[arg(long = "assign", value_name = "VAR=ELEM")]
    pub assign: Vec<String>,
    /// Seed for the opponent's choices in the trace; first choice if absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Explore first-order subformulas instead of evaluating them directly.
    #[arg(long)]
    pub no_collapse: bool,
    /// Worker threads; the global pool if absent.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FragmentArgs {
    #[arg(long)]
    pub formula: String,
    /// Symbols, e.g. `P/1,R/2,tape T/1`.
    #[arg(long, conflicts_with = "model")]
    pub vocab: Option<String>,
    /// Take the vocabulary from a model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Element order, e.g. `2,0,1`; ascending if absent.
    #[arg(long)]
    pub order: Option<String>,
}

#[derive(Debug, Args)]
pub struct CaptureArgs {
    /// Machine file.
    #[arg(long)]
    pub machine: PathBuf,
    /// Input vocabulary.
    #[arg(long, default_value = "P/1")]
    pub vocab: String,
    /// Inclusive size range `A..B`; empty when `B < A`.
    #[arg(long, default_value = "0..2")]
    pub sizes: String,
    /// Seed for sampling structures.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; the global pool if absent.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Position budget per instance.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: Option<u64>,
    /// Sizes with at most this many structures run exhaustively.
    #[arg(long, default_value_t = 5000)]
    pub exhaustive_limit: u128,
    /// Structures sampled per size above the limit.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Override the machine's space line with `n^(k+1)` tuple cells.
    #[arg(long, conflicts_with = "bound")]
    pub k: Option<u32>,
    /// Override the machine's space line with created cells, e.g. `3*n^1+2`.
    #[arg(long)]
    pub bound: Option<String>,
    /// Write one CSV row per structure here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    fn new(code: i32, error: anyhow::Error) -> Self {
        CliError { code, error }
    }
}

trait Code<T> {
    fn code(self, code: i32) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> Code<T> for Result<T, E> {
    fn code(self, code: i32) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(code, e.into()))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .code(EXIT_IO)
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .code(EXIT_IO)
}

fn formula_text(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => read(Path::new(path)),
        None => Ok(arg.to_string()),
    }
}

fn load_model(path: &Path) -> Result<ModelFile, CliError> {
    let text = read(path)?;
    parse_structure(&text)
        .with_context(|| format!("in model {}", path.display()))
        .code(EXIT_USAGE)
}

fn load_formula(arg: &str, vocab: &Vocabulary) -> Result<FormulaAst, CliError> {
    let text = formula_text(arg)?;
    let ast = parse_formula(&text, vocab).context("in formula").code(EXIT_USAGE)?;
    let errors: Vec<String> = validate(&ast)
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .map(|v| format!("{:?}", v.kind))
        .collect();
    if !errors.is_empty() {
        return Err(CliError::new(
            EXIT_INVALID,
            anyhow!("ill-formed formula: {}", errors.join("; ")),
        ));
    }
    Ok(ast)
}

/// Parses `P/1,R/2,tape T/1`.
pub fn parse_vocab(text: &str) -> anyhow::Result<Vocabulary> {
    let mut v = Vocabulary::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (tape, decl) = match item.strip_prefix("tape ") {
            Some(rest) => (true, rest.trim()),
            None => (false, item),
        };
        let (name, ar) = decl
            .split_once('/')
            .ok_or_else(|| anyhow!("expected NAME/ARITY, got `{item}`"))?;
        let ar: usize = ar.trim().parse().with_context(|| format!("bad arity in `{item}`"))?;
        if tape {
            v.add_tape(name.trim(), ar)?;
        } else {
            v.add_input(name.trim(), ar)?;
        }
    }
    Ok(v)
}

fn parse_sizes(text: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a, b),
        None => (text, text),
    };
    Ok((
        a.trim().parse().with_context(|| format!("bad size `{a}`"))?,
        b.trim().parse().with_context(|| format!("bad size `{b}`"))?,
    ))
}

fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::EloiseWins => 0,
        Outcome::AbelardWins | Outcome::Draw => 1,
        Outcome::Unknown => 2,
    }
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let model = load_model(&a.model)?;
    let ast = load_formula(&a.formula, &model.vocab)?;
    let mut g = Vec::new();
    for item in &a.assign {
        let (x, e) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("expected VAR=ELEM, got `{item}`"))
            .code(EXIT_USAGE)?;
        let e: u32 = e
            .parse()
            .with_context(|| format!("bad element in `{item}`"))
            .code(EXIT_USAGE)?;
        g.push((x.to_string(), e));
    }
    let opts = SolveOptions {
        budget: a.budget,
        collapse_fo: !a.no_collapse,
        ..SolveOptions::default()
    };
    let v = par::with_jobs(a.jobs, || solve(&ast, &model.structure, &g, opts)).code(EXIT_INVALID)?;
    let s = &v.stats;
    let mut report = String::new();
    let _ = writeln!(report, "outcome: {}", v.outcome);
    let _ = writeln!(
        report,
        "positions: {}  expanded: {}  edges: {}  collapsed: {}",
        s.positions, s.expanded, s.edges, s.collapsed
    );
    let artifact = match a.trace {
        None => None,
        Some(TraceFormat::Dot) => Some(v.graph().to_dot(&ast)),
        Some(TraceFormat::Text) => {
            let policy = a.seed.map_or(OpponentPolicy::First, OpponentPolicy::Random);
            match extract_trace(&v, &ast, policy) {
                Ok(t) => Some(t.to_text()),
                Err(e) => {
                    let _ = writeln!(report, "trace: {e}");
                    None
                }
            }
        }
    };
    out.write_all(report.as_bytes()).code(EXIT_IO)?;
    if let Some(text) = artifact {
        match &a.out {
            Some(p) => write_out(p, &text)?,
            None => out.write_all(text.as_bytes()).code(EXIT_IO)?,
        }
    }
    Ok(outcome_code(v.outcome))
}

fn cmd_fragment(a: &FragmentArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let vocab = match (&a.vocab, &a.model) {
        (Some(v), _) => parse_vocab(v).code(EXIT_USAGE)?,
        (None, Some(m)) => load_model(m)?.vocab,
        (None, None) => Vocabulary::new(),
    };
    let ast = load_formula(&a.formula, &vocab)?;
    writeln!(out, "{}", classify_fragment(&ast)).code(EXIT_IO)?;
    Ok(0)
}

fn cmd_encode(a: &EncodeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let m = load_model(&a.model)?.structure;
    let order = match &a.order {
        None => ElementOrder::natural(&m),
        Some(text) => {
            let elems = text
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .context("bad --order")
                .code(EXIT_USAGE)?;
            ElementOrder::new(elems, &m).code(EXIT_INVALID)?
        }
    };
    writeln!(out, "{}", encode(&m, &order)).code(EXIT_IO)?;
    Ok(0)
}

fn cmd_capture(a: &CaptureArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = read(&a.machine)?;
    let atm: Atm = text
        .parse()
        .with_context(|| format!("in machine {}", a.machine.display()))
        .code(EXIT_USAGE)?;
    let input = parse_vocab(&a.vocab).code(EXIT_USAGE)?;
    let (lo, hi) = parse_sizes(&a.sizes).code(EXIT_USAGE)?;
    let space = match (a.k, &a.bound, &atm.space) {
        (Some(k), _, _) => SpaceBound::Poly(k),
        (None, Some(b), _) => SpaceBound::Clock(parse_clock_term(b).context("in --bound").code(EXIT_USAGE)?),
        (None, None, Some(s)) => s.clone(),
        (None, None, None) => {
            return Err(CliError::new(
                EXIT_USAGE,
                anyhow!("the machine has no `space` line; pass --k or --bound"),
            ))
        }
    };
    let compiled = match &space {
        SpaceBound::Poly(k) => compile_apspace(&atm, *k, &input),
        SpaceBound::Clock(t) => compile_kexpspace(&atm, t, &input),
    }
    .code(EXIT_INVALID)?;
    let cfg = CaptureConfig {
        sizes: lo..=hi,
        exhaustive_limit: a.exhaustive_limit,
        samples: a.samples,
        seed: a.seed,
        solve: SolveOptions::default().with_budget(a.budget),
        parallel: par::available(),
    };
    let rows = if hi < lo {
        Vec::new()
    } else {
        par::with_jobs(a.jobs, || capture_experiment(&atm, &compiled, &space, &cfg)).code(EXIT_INVALID)?
    };

    let mut report = String::new();
    let _ = writeln!(report, "machine: {} ({} states)", a.machine.display(), atm.states.len());
    let _ = writeln!(
        report,
        "space: {}  small-model table below n = {}",
        match &space {
            SpaceBound::Poly(k) => format!("n^{}", k + 1),
            SpaceBound::Clock(t) => t.to_string(),
        },
        compiled.n0
    );
    let _ = writeln!(
        report,
        "{:>4} {:>6} {:>8} {:>8} {:>8} {:>8} {:>6}",
        "size", "models", "accept", "eloise", "abelard", "unknown", "agree"
    );
    let mut disagree = 0;
    let mut unknown = 0;
    for n in lo..=hi {
        let rs: Vec<_> = rows.iter().filter(|r| r.size == n).collect();
        let count = |f: &dyn Fn(&&crate::atm::CaptureRow) -> bool| rs.iter().filter(|r| f(r)).count();
        let u = count(&|r| r.outcome == Outcome::Unknown);
        let ok = count(&|r| r.agrees());
        unknown += u;
        disagree += rs.len() - ok - u;
        let _ = writeln!(
            report,
            "{:>4} {:>6} {:>8} {:>8} {:>8} {:>8} {:>6}",
            n,
            rs.len(),
            count(&|r| r.accepted),
            count(&|r| r.outcome == Outcome::EloiseWins),
            count(&|r| matches!(r.outcome, Outcome::AbelardWins | Outcome::Draw)),
            u,
            ok
        );
    }
    let total = rows.len();
    let agreed = rows.iter().filter(|r| r.agrees()).count();
    let _ = writeln!(report, "agreement: {agreed}/{total}");
    out.write_all(report.as_bytes()).code(EXIT_IO)?;
    if let Some(p) = &a.out {
        let mut csv = String::from("size,encoding,machine,game,positions,agree\n");
        for r in &rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                r.size,
                r.encoding,
                if r.accepted { "accept" } else { "reject" },
                r.outcome,
                r.positions,
                r.agrees()
            );
        }
        write_out(p, &csv)?;
    }
    Ok(if disagree > 0 {
        1
    } else if unknown > 0 {
        2
    } else {
        0
    })
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Fragment(a) => cmd_fragment(a, out),
        Command::Encode(a) => cmd_encode(a, out),
        Command::Capture(a) => cmd_capture(a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Help and version go to `out` with code 0.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {:#}", e.error);
            e.code
        }
    }
}
