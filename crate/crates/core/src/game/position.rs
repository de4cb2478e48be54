use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::structure::{Elem, GameState, Structure, StructureError};
use crate::syntax::{ClockError, FormulaAst, LabelId, NodeId, SymId, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Eloise,
    Abelard,
}

impl Player {
    pub fn opponent(self) -> Self {
        match self {
            Player::Eloise => Player::Abelard,
            Player::Abelard => Player::Eloise,
        }
    }

    /// The player in the verifier role under `positive`.
    pub fn verifier(positive: bool) -> Self {
        if positive {
            Player::Eloise
        } else {
            Player::Abelard
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Eloise => "Eloise",
            Player::Abelard => "Abelard",
        })
    }
}

/// Who moves at a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Player(Player),
    Forced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminalStatus {
    Nonterminal,
    VerifierWins,
    FalsifierWins,
    NeitherWins,
}

/// Game value from the verifier's point of view, ordered by preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Lose,
    Draw,
    Win,
}

impl Value {
    pub fn flip(self) -> Self {
        match self {
            Value::Lose => Value::Win,
            Value::Draw => Value::Draw,
            Value::Win => Value::Lose,
        }
    }

    /// Winning player, given which player is the verifier.
    pub fn winner(self, positive: bool) -> Option<Player> {
        match self {
            Value::Win => Some(Player::verifier(positive)),
            Value::Lose => Some(Player::verifier(positive).opponent()),
            Value::Draw => None,
        }
    }
}

impl TerminalStatus {
    pub fn value(self) -> Option<Value> {
        match self {
            TerminalStatus::Nonterminal => None,
            TerminalStatus::VerifierWins => Some(Value::Win),
            TerminalStatus::FalsifierWins => Some(Value::Lose),
            TerminalStatus::NeitherWins => Some(Value::Draw),
        }
    }
}

/// A full game position. `clocks` is indexed by the AST's clock slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position {
    pub state: GameState,
    pub clocks: Vec<BigUint>,
    /// `true` when Eloise holds the verifier role.
    pub positive: bool,
    pub node: NodeId,
}

impl Position {
    pub fn verifier(&self) -> Player {
        Player::verifier(self.positive)
    }
}

/// The choice made to leave a position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Move {
    Negate,
    Left,
    Right,
    Choose(VarId, Elem),
    NewElem(VarId, Elem),
    DeleteElem(VarId, Elem),
    InsertTuple(SymId, Vec<Elem>),
    DeleteTuple(SymId, Vec<Elem>),
    Enter(Option<LabelId>),
    Jump(LabelId),
}

impl Move {
    /// Human-readable form using the names in `ast`.
    pub fn describe(&self, ast: &FormulaAst) -> String {
        let tuple = |t: &[Elem]| t.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Move::Negate => "negate".into(),
            Move::Left => "left".into(),
            Move::Right => "right".into(),
            Move::Choose(v, e) => format!("pick {}={e}", ast.var_name(*v)),
            Move::NewElem(v, e) => format!("new {}={e}", ast.var_name(*v)),
            Move::DeleteElem(v, e) => format!("drop {}={e}", ast.var_name(*v)),
            Move::InsertTuple(s, t) => format!("ins {}({})", ast.vocab().name(*s), tuple(t)),
            Move::DeleteTuple(s, t) => format!("del {}({})", ast.vocab().name(*s), tuple(t)),
            Move::Enter(Some(l)) => format!("enter {}", ast.label_name(*l)),
            Move::Enter(None) => "enter".into(),
            Move::Jump(l) => format!("jump {}", ast.label_name(*l)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetupError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("variable `{0}` does not occur in the formula")]
    UnknownVariable(String),
    #[error("clock of node {node}: {source}")]
    Clock { node: u32, source: ClockError },
}

/// Start of the game on `m` under `g`: root node, role `+`, tapes empty and
/// clocks set to their terms evaluated at `|M|`.
pub fn initial_position(
    ast: &FormulaAst,
    m: &Structure,
    g: &[(String, Elem)],
    max_clock_bits: u64,
) -> Result<Position, SetupError> {
    let mut state = GameState::new(m, ast.vocab(), ast.vars().len())?;
    for (name, e) in g {
        let v = ast
            .var_id(name)
            .ok_or_else(|| SetupError::UnknownVariable(name.clone()))?;
        if !m.contains(*e) {
            return Err(StructureError::NotInDomain(*e).into());
        }
        state.assign(v, *e);
    }
    state.canonicalize();
    let n = m.size() as u64;
    let clocks = ast
        .clocked_nodes()
        .iter()
        .map(|id| {
            let t = ast.node(*id).clock().expect("clocked");
            t.eval_capped(n, max_clock_bits)
                .map_err(|source| SetupError::Clock { node: id.0, source })
        })
        .collect::<Result<_, _>>()?;
    Ok(Position {
        state,
        clocks,
        positive: true,
        node: ast.root(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, Vocabulary, DEFAULT_MAX_CLOCK_BITS};

    fn vocab() -> Vocabulary {
        Vocabulary::from_inputs([("P", 1), ("R", 2)]).unwrap()
    }

    #[test]
    fn clocks_start_at_term_values() {
        let ast = parse_formula("loop L[1*n^1+0] . L", &vocab()).unwrap();
        let m = Structure::empty(&vocab(), 4);
        let p = initial_position(&ast, &m, &[], DEFAULT_MAX_CLOCK_BITS).unwrap();
        assert_eq!(p.clocks, vec![BigUint::from(4u32)]);
        assert!(p.positive);
        assert_eq!(p.node, NodeId(0));

        let ast = parse_formula("Ix v[1*exp(1,n^1)+0] . top", &vocab()).unwrap();
        let m = Structure::empty(&vocab(), 2);
        let p = initial_position(&ast, &m, &[], DEFAULT_MAX_CLOCK_BITS).unwrap();
        assert_eq!(p.clocks, vec![BigUint::from(4u32)]);
    }

    #[test]
    fn assignment_checked() {
        let ast = parse_formula("P(x)", &vocab()).unwrap();
        let m = Structure::empty(&vocab(), 2);
        let p = initial_position(&ast, &m, &[("x".into(), 1)], 64).unwrap();
        assert_eq!(p.state.value(VarId(0)), Some(1));
        assert!(initial_position(&ast, &m, &[("y".into(), 1)], 64).is_err());
        assert!(initial_position(&ast, &m, &[("x".into(), 5)], 64).is_err());
    }

    #[test]
    fn oversized_clock_rejected() {
        let ast = parse_formula("loop L[1*exp(3,n^1)+0] . L", &vocab()).unwrap();
        let m = Structure::empty(&vocab(), 5);
        assert!(matches!(
            initial_position(&ast, &m, &[], 1 << 10),
            Err(SetupError::Clock { .. })
        ));
    }
}
