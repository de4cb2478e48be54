use super::position::Value;
use crate::structure::{Elem, GameState};
use crate::syntax::{FormulaAst, NodeId, NodeKind, VarId};

/// Minimax value of the finite game on a pure first-order subformula, for
/// whoever is verifier at `node`. Undefined variables give `Draw`;
/// quantifiers over an empty domain give `Lose`.
pub fn fo_value(ast: &FormulaAst, node: NodeId, state: &GameState) -> Value {
    debug_assert!(ast.is_pure_fo(node));
    let mut env = Env {
        ast,
        state,
        assignment: state.assignment().to_vec(),
        buf: Vec::new(),
    };
    env.value(node)
}

struct Env<'a> {
    ast: &'a FormulaAst,
    state: &'a GameState,
    assignment: Vec<Option<Elem>>,
    buf: Vec<Elem>,
}

impl Env<'_> {
    fn value(&mut self, node: NodeId) -> Value {
        match self.ast.node(node) {
            NodeKind::True => Value::Win,
            NodeKind::False => Value::Lose,
            NodeKind::Eq(a, b) => match (self.assignment[a.index()], self.assignment[b.index()]) {
                (Some(x), Some(y)) => bool_value(x == y),
                _ => Value::Draw,
            },
            NodeKind::Rel(s, vs) => {
                self.buf.clear();
                for v in vs {
                    match self.assignment[v.index()] {
                        Some(e) => self.buf.push(e),
                        None => return Value::Draw,
                    }
                }
                bool_value(self.state.holds(*s, &self.buf))
            }
            NodeKind::Not(c) => self.value(*c).flip(),
            NodeKind::Or(l, r) => {
                let a = self.value(*l);
                if a == Value::Win {
                    return a;
                }
                a.max(self.value(*r))
            }
            NodeKind::And(l, r) => {
                let a = self.value(*l);
                if a == Value::Lose {
                    return a;
                }
                a.min(self.value(*r))
            }
            NodeKind::Exists(v, c) => self.quantify(*v, *c, Value::Win),
            NodeKind::Forall(v, c) => self.quantify(*v, *c, Value::Lose),
            other => unreachable!("not first-order: {}", other.tag()),
        }
    }

    /// Best value over all witnesses for the player preferring `best`.
    fn quantify(&mut self, v: VarId, body: NodeId, best: Value) -> Value {
        if self.state.size() == 0 {
            return Value::Lose;
        }
        let saved = self.assignment[v.index()];
        let mut acc: Option<Value> = None;
        for &e in self.state.domain() {
            self.assignment[v.index()] = Some(e);
            let x = self.value(body);
            acc = Some(match (acc, best) {
                (None, _) => x,
                (Some(a), Value::Win) => a.max(x),
                (Some(a), _) => a.min(x),
            });
            if x == best {
                break;
            }
        }
        self.assignment[v.index()] = saved;
        acc.expect("nonempty domain")
    }
}

fn bool_value(b: bool) -> Value {
    if b {
        Value::Win
    } else {
        Value::Lose
    }
}
