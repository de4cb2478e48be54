use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Index of a symbol inside a [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(pub u32);

impl SymId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    /// Part of the input models' signature.
    Input,
    /// Auxiliary relation, empty at the start of every play.
    Tape,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
    pub kind: SymbolKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VocabError {
    #[error("symbol `{0}` declared twice")]
    Duplicate(String),
    #[error("`{0}` is not a valid symbol name")]
    BadName(String),
}

/// Relation symbols available to formulas. The canonical order of the
/// input-relation symbols is their declaration order.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymId>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Vocabulary {}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary of input relations from `(name, arity)` pairs.
    pub fn from_inputs<'a>(inputs: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self, VocabError> {
        let mut v = Self::new();
        for (name, arity) in inputs {
            v.add_input(name, arity)?;
        }
        Ok(v)
    }

    pub fn add_input(&mut self, name: &str, arity: usize) -> Result<SymId, VocabError> {
        self.add(name, arity, SymbolKind::Input)
    }

    pub fn add_tape(&mut self, name: &str, arity: usize) -> Result<SymId, VocabError> {
        self.add(name, arity, SymbolKind::Tape)
    }

    pub fn add(&mut self, name: &str, arity: usize, kind: SymbolKind) -> Result<SymId, VocabError> {
        if !is_identifier(name) || crate::syntax::lexer::is_keyword(name) {
            return Err(VocabError::BadName(name.to_string()));
        }
        if self.by_name.contains_key(name) {
            return Err(VocabError::Duplicate(name.to_string()));
        }
        let id = SymId(self.symbols.len() as u32);
        self.symbols.push(Symbol {
            name: name.to_string(),
            arity,
            kind,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<SymId> {
        self.by_name.get(name).copied()
    }

    pub fn symbol(&self, id: SymId) -> &Symbol {
        &self.symbols[id.index()]
    }

    pub fn name(&self, id: SymId) -> &str {
        &self.symbols[id.index()].name
    }

    pub fn arity(&self, id: SymId) -> usize {
        self.symbols[id.index()].arity
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymId, &Symbol)> {
        self.symbols.iter().enumerate().map(|(i, s)| (SymId(i as u32), s))
    }

    /// Input relations in canonical order.
    pub fn inputs(&self) -> impl Iterator<Item = (SymId, &Symbol)> {
        self.iter().filter(|(_, s)| s.kind == SymbolKind::Input)
    }

    pub fn tapes(&self) -> impl Iterator<Item = (SymId, &Symbol)> {
        self.iter().filter(|(_, s)| s.kind == SymbolKind::Tape)
    }

    /// The input part of this vocabulary, tape predicates dropped.
    pub fn input_part(&self) -> Vocabulary {
        let mut v = Vocabulary::new();
        for (_, s) in self.inputs() {
            v.add_input(&s.name, s.arity).expect("names already unique");
        }
        v
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (_, s) in self.iter() {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            if s.kind == SymbolKind::Tape {
                write!(f, "tape ")?;
            }
            write!(f, "{}/{}", s.name, s.arity)?;
        }
        Ok(())
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_across_kinds() {
        let mut v = Vocabulary::new();
        v.add_input("R", 2).unwrap();
        assert_eq!(v.add_tape("R", 1), Err(VocabError::Duplicate("R".into())));
    }

    #[test]
    fn canonical_order_is_declaration_order_of_inputs() {
        let mut v = Vocabulary::new();
        v.add_input("Q", 1).unwrap();
        v.add_tape("X", 3).unwrap();
        v.add_input("E", 2).unwrap();
        let names: Vec<_> = v.inputs().map(|(_, s)| s.name.as_str()).collect();
        assert_eq!(names, ["Q", "E"]);
        assert_eq!(v.input_part().len(), 2);
    }

    #[test]
    fn keywords_rejected() {
        let mut v = Vocabulary::new();
        assert!(v.add_input("exists", 1).is_err());
        assert!(v.add_input("1x", 1).is_err());
    }
}
