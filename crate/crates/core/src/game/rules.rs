use num_traits::Zero;

use super::position::{Move, Owner, Player, Position, TerminalStatus};
use crate::structure::Elem;
use crate::syntax::{FormulaAst, NodeId, NodeKind, SymId, VarId};

fn clock_exhausted(ast: &FormulaAst, p: &Position) -> bool {
    ast.clock_slot(p.node).is_some_and(|s| p.clocks[s].is_zero())
}

/// Whether the play ends at `p`, and who wins if so.
pub fn terminal_status(p: &Position, ast: &FormulaAst) -> TerminalStatus {
    use TerminalStatus::*;
    if clock_exhausted(ast, p) {
        return NeitherWins;
    }
    let s = &p.state;
    let win = |b: bool| if b { VerifierWins } else { FalsifierWins };
    match ast.node(p.node) {
        NodeKind::True => VerifierWins,
        NodeKind::False => FalsifierWins,
        NodeKind::Eq(a, b) => match (s.value(*a), s.value(*b)) {
            (Some(x), Some(y)) => win(x == y),
            _ => NeitherWins,
        },
        NodeKind::Rel(sym, vs) => match vs.iter().map(|v| s.value(*v)).collect::<Option<Vec<_>>>() {
            Some(t) => win(s.holds(*sym, &t)),
            None => NeitherWins,
        },
        NodeKind::Loop(l) if ast.label_target(*l).is_none() => NeitherWins,
        NodeKind::Exists(..) | NodeKind::Forall(..) if s.size() == 0 => FalsifierWins,
        NodeKind::InsertTuple(_, vs, _) | NodeKind::DeleteTuple(_, vs, _) if !vs.is_empty() && s.size() == 0 => {
            FalsifierWins
        }
        NodeKind::DeleteElem(v, _) if s.value(*v).is_none() => NeitherWins,
        _ => Nonterminal,
    }
}

fn owner(verifier_moves: bool, positive: bool) -> Owner {
    let verifier = Player::verifier(positive);
    Owner::Player(if verifier_moves { verifier } else { verifier.opponent() })
}

fn step(p: &Position, node: NodeId) -> Position {
    Position {
        state: p.state.clone(),
        clocks: p.clocks.clone(),
        positive: p.positive,
        node,
    }
}

fn tick(ast: &FormulaAst, p: &Position, q: &mut Position) {
    if let Some(s) = ast.clock_slot(p.node) {
        q.clocks[s] -= 1u32;
    }
}

/// Distinct variables of `vs` in order of first occurrence.
fn distinct(vs: &[VarId]) -> Vec<VarId> {
    let mut out: Vec<VarId> = Vec::with_capacity(vs.len());
    for v in vs {
        if !out.contains(v) {
            out.push(*v);
        }
    }
    out
}

/// Every assignment of domain elements to `k` slots, lexicographic.
fn tuples(domain: &[Elem], k: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::with_capacity(k)];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                domain.iter().map(move |e| {
                    let mut t = t.clone();
                    t.push(*e);
                    t
                })
            })
            .collect();
    }
    out
}

fn tuple_moves(p: &Position, sym: SymId, vs: &[VarId], body: NodeId, insert: bool) -> Vec<(Move, Position)> {
    let vars = distinct(vs);
    tuples(p.state.domain(), vars.len())
        .into_iter()
        .map(|choice| {
            let mut q = step(p, body);
            for (v, e) in vars.iter().zip(&choice) {
                q.state.assign(*v, *e);
            }
            let t: Vec<Elem> = vs
                .iter()
                .map(|v| choice[vars.iter().position(|w| w == v).expect("listed")])
                .collect();
            let mv = if insert {
                q.state.insert_raw(sym, &t);
                Move::InsertTuple(sym, t)
            } else {
                q.state.delete_raw(sym, &t);
                Move::DeleteTuple(sym, t)
            };
            (mv, q)
        })
        .collect()
}

/// Who moves at a nonterminal `p`, and every successor with the move
/// leading to it. Successor states are canonicalized.
pub fn successors(p: &Position, ast: &FormulaAst) -> (Owner, Vec<(Move, Position)>) {
    debug_assert_eq!(terminal_status(p, ast), TerminalStatus::Nonterminal);
    let pos = p.positive;
    match ast.node(p.node) {
        NodeKind::Not(c) => {
            let mut q = step(p, *c);
            q.positive = !pos;
            (Owner::Forced, vec![(Move::Negate, q)])
        }
        NodeKind::Or(l, r) | NodeKind::And(l, r) => {
            let is_or = matches!(ast.node(p.node), NodeKind::Or(..));
            (
                owner(is_or, pos),
                vec![(Move::Left, step(p, *l)), (Move::Right, step(p, *r))],
            )
        }
        NodeKind::Exists(v, c) | NodeKind::Forall(v, c) => {
            let is_exists = matches!(ast.node(p.node), NodeKind::Exists(..));
            let succ = p
                .state
                .domain()
                .iter()
                .map(|e| {
                    let mut q = step(p, *c);
                    q.state.assign(*v, *e);
                    (Move::Choose(*v, *e), q)
                })
                .collect();
            (owner(is_exists, pos), succ)
        }
        NodeKind::InsertElem(v, _, c) => {
            let mut q = step(p, *c);
            tick(ast, p, &mut q);
            let e = q.state.add_element();
            q.state.assign(*v, e);
            q.state.canonicalize();
            let e = q.state.value(*v).expect("just bound");
            (owner(true, pos), vec![(Move::NewElem(*v, e), q)])
        }
        NodeKind::DeleteElem(v, c) => {
            let e = p.state.value(*v).expect("terminal_status checks definedness");
            let mut q = step(p, *c);
            q.state.remove_element(e);
            q.state.canonicalize();
            (Owner::Forced, vec![(Move::DeleteElem(*v, e), q)])
        }
        NodeKind::InsertTuple(s, vs, c) => (owner(true, pos), tuple_moves(p, *s, vs, *c, true)),
        NodeKind::DeleteTuple(s, vs, c) => (owner(true, pos), tuple_moves(p, *s, vs, *c, false)),
        NodeKind::Label(l, _, c) => {
            let mut q = step(p, *c);
            tick(ast, p, &mut q);
            (Owner::Forced, vec![(Move::Enter(Some(*l)), q)])
        }
        NodeKind::Loop(l) => {
            let target = ast.label_target(*l).expect("terminal_status checks resolution");
            (Owner::Forced, vec![(Move::Jump(*l), step(p, target))])
        }
        other => unreachable!("{} is always terminal", other.tag()),
    }
}
