use std::collections::HashSet;

use thiserror::Error;

use super::machine::{Atm, AtmError};
use crate::syntax::{is_identifier, Vocabulary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("generated name `{0}` clashes with the input vocabulary")]
    NameClash(String),
    #[error("generated name `{0}` is not a valid identifier")]
    BadName(String),
    #[error("input vocabulary must not contain tape symbols")]
    TapeInInput,
    #[error(transparent)]
    Machine(#[from] AtmError),
    #[error("the encoding does not fit the available space at size {size}; the small-model table must cover sizes below {needed} (it covers below {n0})")]
    SmallTableTooShort { size: usize, needed: usize, n0: usize },
    #[error("small-model encoding `{0}` does not decode over the input vocabulary")]
    BadSmallEncoding(String),
    #[error("internal: {0}")]
    Internal(String),
}

/// Where the tape lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellScheme {
    /// Cells are `arity`-tuples of input elements, ordered lexicographically
    /// by the element successor.
    Tuples { arity: usize },
    /// Cells are elements created during play, marked by `new_mark` and
    /// linked by `cell_succ`.
    NewElements,
}

/// Label names used by the compiled formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub succ: String,
    pub enc: String,
    pub run: String,
    pub build: String,
    pub next: String,
}

/// Names and arities of everything a compiled formula adds on top of the
/// input vocabulary.
#[derive(Debug, Clone)]
pub struct CompilationLayout {
    pub scheme: CellScheme,
    /// Input symbols followed by the tape predicates below.
    pub vocab: Vocabulary,
    /// Successor on input elements.
    pub elem_succ: String,
    /// Strict order on input elements.
    pub elem_order: String,
    /// Marks created cells (new-element scheme only).
    pub new_mark: Option<String>,
    /// Successor on created cells (new-element scheme only).
    pub cell_succ: Option<String>,
    pub bit0: String,
    pub bit1: String,
    /// One predicate per extra tape symbol, in machine order.
    pub extra: Vec<String>,
    pub head: String,
    /// One predicate per machine state.
    pub head_state: Vec<String>,
    /// Maps each element to its cell in the unary size prefix.
    pub zpre: String,
    /// One map per input relation from tuples to cells.
    pub zrel: Vec<String>,
    pub labels: Labels,
}

impl CompilationLayout {
    /// Layout for tapes made of `(k+1)`-tuples of input elements.
    pub fn apspace(atm: &Atm, input: &Vocabulary, k: u32) -> Result<Self, CompileError> {
        let a = k as usize + 1;
        let names = Names {
            elem_succ: "S",
            elem_order: "S'",
            bit0: "X0",
            bit1: "X1",
            new_mark: None,
            cell_succ: None,
        };
        Self::build(atm, input, CellScheme::Tuples { arity: a }, names)
    }

    /// Layout for tapes made of elements created with `Ix`.
    pub fn kexpspace(atm: &Atm, input: &Vocabulary) -> Result<Self, CompileError> {
        let names = Names {
            elem_succ: "S'",
            elem_order: "O'",
            bit0: "P0",
            bit1: "P1",
            new_mark: Some("N"),
            cell_succ: Some("S"),
        };
        Self::build(atm, input, CellScheme::NewElements, names)
    }

    fn build(atm: &Atm, input: &Vocabulary, scheme: CellScheme, n: Names) -> Result<Self, CompileError> {
        if input.tapes().next().is_some() {
            return Err(CompileError::TapeInInput);
        }
        let a = match scheme {
            CellScheme::Tuples { arity } => arity,
            CellScheme::NewElements => 1,
        };
        let mut vocab = input.clone();
        let mut seen: HashSet<String> = input.iter().map(|(_, s)| s.name.clone()).collect();
        let mut add = |name: &str, arity: usize| -> Result<String, CompileError> {
            if !is_identifier(name) {
                return Err(CompileError::BadName(name.into()));
            }
            if !seen.insert(name.to_string()) {
                return Err(CompileError::NameClash(name.into()));
            }
            vocab
                .add_tape(name, arity)
                .map_err(|e| CompileError::Internal(e.to_string()))?;
            Ok(name.to_string())
        };
        let new_mark = n.new_mark.map(|m| add(m, 1)).transpose()?;
        let cell_succ = n.cell_succ.map(|s| add(s, 2)).transpose()?;
        let elem_succ = add(n.elem_succ, 2)?;
        let elem_order = add(n.elem_order, 2)?;
        let bit0 = add(n.bit0, a)?;
        let bit1 = add(n.bit1, a)?;
        let extra = atm.symbols[3..]
            .iter()
            .map(|s| add(&format!("X_{s}"), a))
            .collect::<Result<Vec<_>, _>>()?;
        let head = add("Y", a)?;
        let head_state = atm
            .states
            .iter()
            .map(|(q, _)| add(&format!("Y_{q}"), a))
            .collect::<Result<Vec<_>, _>>()?;
        let zpre = add("Zpre", 1 + a)?;
        let zrel = input
            .inputs()
            .map(|(_, s)| (s.name.clone(), s.arity))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(name, ar)| add(&format!("Z_{name}"), ar + a))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = Labels {
            succ: "C_succ".into(),
            enc: "C_enc".into(),
            run: "C_loop".into(),
            build: "C_build".into(),
            next: "C_next".into(),
        };
        for l in [&labels.succ, &labels.enc, &labels.run, &labels.build, &labels.next] {
            if seen.contains(l.as_str()) {
                return Err(CompileError::NameClash(l.clone()));
            }
        }
        Ok(CompilationLayout {
            scheme,
            vocab,
            elem_succ,
            elem_order,
            new_mark,
            cell_succ,
            bit0,
            bit1,
            extra,
            head,
            head_state,
            zpre,
            zrel,
            labels,
        })
    }

    /// Number of element variables that name one cell.
    pub fn cell_arity(&self) -> usize {
        match self.scheme {
            CellScheme::Tuples { arity } => arity,
            CellScheme::NewElements => 1,
        }
    }

    /// The input part of [`Self::vocab`].
    pub fn input(&self) -> Vocabulary {
        self.vocab.input_part()
    }

    /// Predicate holding symbol `a` on a cell; `None` for the blank.
    pub fn symbol_pred(&self, a: usize) -> Option<&str> {
        match a {
            0 => Some(&self.bit0),
            1 => Some(&self.bit1),
            2 => None,
            _ => Some(&self.extra[a - 3]),
        }
    }
}

struct Names {
    elem_succ: &'static str,
    elem_order: &'static str,
    bit0: &'static str,
    bit1: &'static str,
    new_mark: Option<&'static str>,
    cell_succ: Option<&'static str>,
}
