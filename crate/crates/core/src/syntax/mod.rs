//! Concrete grammar, abstract syntax, clock terms and fragment checks.

mod ast;
mod clock;
mod fragment;
pub(crate) mod lexer;
mod parser;
mod render;
mod vocab;

pub use ast::{BuildError, Formula, FormulaAst, LabelId, NodeId, NodeKind, VarId};
pub use clock::{ClockError, ClockTerm, PolyTerm, DEFAULT_MAX_CLOCK_BITS};
pub use fragment::{classify_fragment, is_valid, validate, FragmentReport, Severity, Violation, ViolationKind};
pub use lexer::Loc;
pub use parser::{parse_clock_term, parse_formula, parse_formula_tree, ParseError, ParseErrorKind};
pub use render::{render, render_at};
pub use vocab::{is_identifier, SymId, Symbol, SymbolKind, VocabError, Vocabulary};

/// Evaluates `t` at domain size `n`.
pub fn eval_clock_term(t: &ClockTerm, n: u64) -> num_bigint::BigUint {
    t.eval(n)
}
