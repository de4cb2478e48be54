//! Recursive-descent parser for the formula text grammar.
//!
//! ```text
//! formula := conj { "|" conj }
//! conj    := unary { "&" unary }
//! unary   := "~" unary
//!          | ("exists" | "forall") VAR "." formula
//!          | "Ix" VAR [clock] "." formula
//!          | "Dx" VAR "." formula
//!          | ("ins" | "del") SYM "(" [VAR {"," VAR}] ")" "." formula
//!          | "loop" LABEL [clock] "." formula
//!          | atom
//! atom    := "top" | "bot" | "(" formula ")"
//!          | SYM "(" [VAR {"," VAR}] ")"
//!          | VAR ("=" | "!=") VAR
//!          | IDENT                       -- nullary SYM if declared, else loop atom
//! clock   := "[" ( [NUM "*"] "exp" "(" NUM "," poly ")" ["+" NUM] | poly ) "]"
//! poly    := mono { "+" mono }
//! mono    := NUM ["*" "n" ["^" NUM]] | "n" ["^" NUM]
//! ```
//!
//! Binder bodies extend as far to the right as possible. `x != y` is sugar
//! for `~x = y`. `#` starts a line comment.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use super::ast::{Formula, FormulaAst};
use super::clock::{ClockTerm, PolyTerm};
use super::lexer::{is_keyword, tokenize, Loc, Tok};
use super::vocab::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(String),
    Syntax {
        expected: String,
        found: String,
    },
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    UndeclaredSymbol(String),
    DuplicateLabel(String),
    BadClock(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lexical(m) => write!(f, "{m}"),
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::ArityMismatch {
                symbol,
                expected,
                found,
            } => write!(
                f,
                "`{symbol}` has arity {expected} but is applied to {found} variable(s)"
            ),
            ParseErrorKind::UndeclaredSymbol(s) => write!(f, "undeclared relation symbol `{s}`"),
            ParseErrorKind::DuplicateLabel(l) => write!(f, "label `{l}` defined more than once"),
            ParseErrorKind::BadClock(m) => write!(f, "invalid clock term: {m}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{loc}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub loc: Loc,
}

/// Parses `text` as a formula over `vocab`.
pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<FormulaAst, ParseError> {
    let formula = parse_formula_tree(text, vocab)?;
    FormulaAst::build(vocab, &formula).map_err(|e| ParseError {
        kind: ParseErrorKind::UndeclaredSymbol(e.to_string()),
        loc: Loc { line: 1, col: 1 },
    })
}

/// Parses into the owned tree without flattening.
pub fn parse_formula_tree(text: &str, vocab: &Vocabulary) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vocab,
        labels: HashSet::new(),
    };
    let f = p.formula()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(f)
}

/// Parses a standalone clock term such as `3*n^1 + 2` or `1*exp(1,1*n^1)+0`.
pub fn parse_clock_term(text: &str) -> Result<ClockTerm, ParseError> {
    let toks = tokenize(text)?;
    let vocab = Vocabulary::new();
    let mut p = Parser {
        toks,
        pos: 0,
        vocab: &vocab,
        labels: HashSet::new(),
    };
    let t = p.clock_expr()?;
    p.expect(&Tok::Eof, "end of clock term")?;
    Ok(t)
}

struct Parser<'a> {
    toks: Vec<(Tok, Loc)>,
    pos: usize,
    vocab: &'a Vocabulary,
    labels: HashSet<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Syntax {
                expected: expected.to_string(),
                found: self.peek().to_string(),
            },
            loc: self.loc(),
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn name(&mut self, what: &str) -> Result<(String, Loc), ParseError> {
        let loc = self.loc();
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok((s, loc))
            }
            _ => Err(self.err(what)),
        }
    }

    fn num(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Tok::Num(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => Err(self.err("a number")),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conj()?;
        while self.peek() == &Tok::Or {
            self.bump();
            f = f.or(self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.peek() == &Tok::And {
            self.bump();
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn symbol_app(&mut self) -> Result<(String, Vec<String>), ParseError> {
        let (sym, loc) = self.name("a relation symbol")?;
        self.expect(&Tok::LParen, "`(`")?;
        let vars = self.var_list()?;
        self.check_symbol(&sym, vars.len(), loc)?;
        Ok((sym, vars))
    }

    fn var_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut vars = Vec::new();
        if self.peek() != &Tok::RParen {
            vars.push(self.name("a variable")?.0);
            while self.peek() == &Tok::Comma {
                self.bump();
                vars.push(self.name("a variable")?.0);
            }
        }
        self.expect(&Tok::RParen, "`)`")?;
        Ok(vars)
    }

    fn check_symbol(&self, sym: &str, found: usize, loc: Loc) -> Result<(), ParseError> {
        let id = self.vocab.lookup(sym).ok_or(ParseError {
            kind: ParseErrorKind::UndeclaredSymbol(sym.to_string()),
            loc,
        })?;
        let expected = self.vocab.arity(id);
        if expected != found {
            return Err(ParseError {
                kind: ParseErrorKind::ArityMismatch {
                    symbol: sym.to_string(),
                    expected,
                    found,
                },
                loc,
            });
        }
        Ok(())
    }

    fn opt_clock(&mut self) -> Result<Option<ClockTerm>, ParseError> {
        if self.peek() != &Tok::LBracket {
            return Ok(None);
        }
        self.bump();
        let t = self.clock_expr()?;
        self.expect(&Tok::RBracket, "`]`")?;
        Ok(Some(t))
    }

    fn binder_dot(&mut self) -> Result<Formula, ParseError> {
        self.expect(&Tok::Dot, "`.`")?;
        self.formula()
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let Tok::Ident(kw) = self.peek().clone() else {
            if self.peek() == &Tok::Not {
                self.bump();
                return Ok(self.unary()?.negate());
            }
            return self.atom();
        };
        match kw.as_str() {
            "exists" | "forall" => {
                self.bump();
                let (v, _) = self.name("a variable")?;
                let body = self.binder_dot()?;
                Ok(if kw == "exists" {
                    Formula::exists(&v, body)
                } else {
                    Formula::forall(&v, body)
                })
            }
            "Ix" => {
                self.bump();
                let (v, _) = self.name("a variable")?;
                let clock = self.opt_clock()?;
                Ok(Formula::insert_elem(&v, clock, self.binder_dot()?))
            }
            "Dx" => {
                self.bump();
                let (v, _) = self.name("a variable")?;
                Ok(Formula::delete_elem(&v, self.binder_dot()?))
            }
            "ins" | "del" => {
                self.bump();
                let (sym, vars) = self.symbol_app()?;
                let body = self.binder_dot()?;
                Ok(if kw == "ins" {
                    Formula::InsertTuple(sym, vars, Box::new(body))
                } else {
                    Formula::DeleteTuple(sym, vars, Box::new(body))
                })
            }
            "loop" => {
                self.bump();
                let (l, loc) = self.name("a label name")?;
                if !self.labels.insert(l.clone()) {
                    return Err(ParseError {
                        kind: ParseErrorKind::DuplicateLabel(l),
                        loc,
                    });
                }
                let clock = self.opt_clock()?;
                Ok(Formula::label(&l, clock, self.binder_dot()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "top" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "bot" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                if self.peek2() == &Tok::LParen {
                    let (sym, vars) = self.symbol_app()?;
                    return Ok(Formula::Rel(sym, vars));
                }
                let loc = self.loc();
                self.bump();
                match self.peek() {
                    Tok::Eq | Tok::Neq => {
                        let neg = self.bump() == Tok::Neq;
                        let (w, _) = self.name("a variable")?;
                        let f = Formula::eq(&s, &w);
                        Ok(if neg { f.negate() } else { f })
                    }
                    _ if self.vocab.lookup(&s).is_some() => {
                        self.check_symbol(&s, 0, loc)?;
                        Ok(Formula::Rel(s, vec![]))
                    }
                    _ => Ok(Formula::Loop(s)),
                }
            }
            _ => Err(self.err("a formula")),
        }
    }

    fn clock_expr(&mut self) -> Result<ClockTerm, ParseError> {
        let start = self.pos;
        let mut coeff = 1;
        if matches!(self.peek(), Tok::Num(_)) && self.peek2() == &Tok::Star {
            let c = self.num()?;
            self.bump();
            if self.is_kw("exp") {
                coeff = c;
            } else {
                // a monomial, not a tower coefficient
                self.pos = start;
            }
        }
        if !self.is_kw("exp") {
            return Ok(ClockTerm::poly(self.poly()?));
        }
        self.bump();
        self.expect(&Tok::LParen, "`(`")?;
        let height = self.num()?;
        let height = u32::try_from(height).map_err(|_| self.clock_err("tower height too large"))?;
        self.expect(&Tok::Comma, "`,`")?;
        let poly = self.poly()?;
        self.expect(&Tok::RParen, "`)`")?;
        let mut offset = 0;
        if self.peek() == &Tok::Plus {
            self.bump();
            offset = self.num()?;
        }
        Ok(ClockTerm::tower(coeff, height, poly, offset))
    }

    fn clock_err(&self, msg: &str) -> ParseError {
        ParseError {
            kind: ParseErrorKind::BadClock(msg.to_string()),
            loc: self.loc(),
        }
    }

    fn poly(&mut self) -> Result<PolyTerm, ParseError> {
        let loc = self.loc();
        let mut monos = vec![self.mono()?];
        while self.peek() == &Tok::Plus {
            self.bump();
            monos.push(self.mono()?);
        }
        PolyTerm::new(monos).map_err(|e| ParseError {
            kind: ParseErrorKind::BadClock(e.to_string()),
            loc,
        })
    }

    fn mono(&mut self) -> Result<(u64, u32), ParseError> {
        let coeff = if matches!(self.peek(), Tok::Num(_)) {
            let c = self.num()?;
            if self.peek() != &Tok::Star {
                return Ok((c, 0));
            }
            self.bump();
            c
        } else {
            1
        };
        if !self.is_kw("n") {
            return Err(self.err("`n`"));
        }
        self.bump();
        let mut exp = 1;
        if self.peek() == &Tok::Caret {
            self.bump();
            exp = u32::try_from(self.num()?).map_err(|_| self.clock_err("exponent too large"))?;
        }
        Ok((coeff, exp))
    }
}
