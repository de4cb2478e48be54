use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::graph::NodeStatus;
use super::position::{Move, Owner, Player, Position};
use super::rules::{successors, terminal_status};
use super::solver::{immediate, Verdict};
use crate::syntax::{FormulaAst, NodeId};

/// How the losing side picks among its moves when a trace is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpponentPolicy {
    First,
    Last,
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub node: NodeId,
    pub tag: String,
    pub positive: bool,
    pub clocks: Vec<BigUint>,
    pub size: usize,
    /// The move leaving this position; `None` on the final position.
    pub mv: Option<String>,
}

/// One complete play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub winner: Option<Player>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("no winning strategy to follow")]
    NoStrategy,
    #[error("play left the explored graph at position {0}")]
    Unexplored(u32),
    #[error("play revisited position {0}")]
    Cycle(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn step_of(ast: &FormulaAst, p: &Position, mv: Option<String>) -> TraceStep {
    TraceStep {
        node: p.node,
        tag: ast.node(p.node).tag().to_string(),
        positive: p.positive,
        clocks: p.clocks.clone(),
        size: p.state.size(),
        mv,
    }
}

struct Picker {
    last: bool,
    rng: Option<ChaCha8Rng>,
}

impl Picker {
    fn new(policy: OpponentPolicy) -> Self {
        Picker {
            last: policy == OpponentPolicy::Last,
            rng: match policy {
                OpponentPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
                _ => None,
            },
        }
    }

    fn pick<T>(&mut self, items: &[T]) -> usize {
        match &mut self.rng {
            Some(r) if items.len() > 1 => r.gen_range(0..items.len()),
            _ if self.last => items.len().saturating_sub(1),
            _ => 0,
        }
    }
}

fn find_move(ast: &FormulaAst, p: &Position, to: &Position) -> Option<Move> {
    let (_, moves) = successors(p, ast);
    moves.into_iter().find(|(_, q)| q == to).map(|(m, _)| m)
}

/// Plays the winner's strategy against `policy` from the root.
pub fn extract_trace(verdict: &Verdict, ast: &FormulaAst, policy: OpponentPolicy) -> Result<Trace, TraceError> {
    let strategy = verdict.strategy().ok_or(TraceError::NoStrategy)?;
    let winner = strategy.winner();
    let g = verdict.graph();
    let mut picker = Picker::new(policy);
    let mut steps = Vec::new();
    let mut seen = vec![false; g.len()];
    let mut id = g.root();
    loop {
        if std::mem::replace(&mut seen[id as usize], true) {
            return Err(TraceError::Cycle(id));
        }
        let p = g.position(id);
        let node = g.node(id);
        match node.status {
            NodeStatus::Terminal(v) => {
                steps.push(step_of(ast, p, None));
                return Ok(Trace {
                    steps,
                    winner: v.winner(p.positive),
                });
            }
            NodeStatus::Collapsed(_) => {
                return play_first_order(ast, p.clone(), winner, &mut picker, steps);
            }
            NodeStatus::Unexpanded => return Err(TraceError::Unexplored(id)),
            NodeStatus::Expanded(owner) => {
                let next = if owner == Owner::Player(winner) {
                    node.choice.ok_or(TraceError::Unexplored(id))?
                } else {
                    node.succ[picker.pick(&node.succ)]
                };
                let mv = find_move(ast, p, g.position(next)).ok_or(TraceError::Unexplored(next))?;
                steps.push(step_of(ast, p, Some(mv.describe(ast))));
                id = next;
            }
        }
    }
}

/// Continues a play inside a first-order subformula, the winner choosing
/// moves that keep their evaluated win.
fn play_first_order(
    ast: &FormulaAst,
    mut p: Position,
    winner: Player,
    picker: &mut Picker,
    mut steps: Vec<TraceStep>,
) -> Result<Trace, TraceError> {
    loop {
        if let Some(v) = terminal_status(&p, ast).value() {
            steps.push(step_of(ast, &p, None));
            return Ok(Trace {
                steps,
                winner: v.winner(p.positive),
            });
        }
        let (owner, moves) = successors(&p, ast);
        let k = if owner == Owner::Player(winner) {
            moves
                .iter()
                .position(|(_, q)| immediate(ast, q, true).and_then(|(v, _)| v.winner(q.positive)) == Some(winner))
                .unwrap_or(0)
        } else {
            picker.pick(&moves)
        };
        let (mv, q) = moves.into_iter().nth(k).expect("nonempty");
        steps.push(step_of(ast, &p, Some(mv.describe(ast))));
        p = q;
    }
}

impl Trace {
    /// Number of steps whose move added a domain element.
    pub fn insertions(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.mv.as_deref().is_some_and(|m| m.starts_with("new ")))
            .count()
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.steps.iter().map(|s| s.node).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self, TraceError> {
        text.parse()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            let clocks: Vec<String> = s.clocks.iter().map(|c| c.to_string()).collect();
            writeln!(
                f,
                "step {i} node={} tag={} role={} clocks=[{}] size={} move={}",
                s.node.0,
                s.tag,
                if s.positive { '+' } else { '-' },
                clocks.join(","),
                s.size,
                s.mv.as_deref().unwrap_or("-"),
            )?;
        }
        let w = match self.winner {
            Some(p) => p.to_string(),
            None => "neither".to_string(),
        };
        writeln!(f, "result {w}")
    }
}

impl FromStr for Trace {
    type Err = TraceError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut steps = Vec::new();
        let mut winner = None;
        let mut done = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: &str| TraceError::Parse {
                line,
                msg: msg.to_string(),
            };
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(w) = l.strip_prefix("result ") {
                winner = match w.trim() {
                    "Eloise" => Some(Player::Eloise),
                    "Abelard" => Some(Player::Abelard),
                    "neither" => None,
                    _ => return Err(err("unknown result")),
                };
                done = true;
                continue;
            }
            let rest = l
                .strip_prefix("step ")
                .ok_or_else(|| err("expected `step` or `result`"))?;
            let (head, mv) = rest.split_once(" move=").ok_or_else(|| err("missing move"))?;
            let mut fields = head.split_whitespace();
            fields.next().ok_or_else(|| err("missing step index"))?;
            let mut get = |key: &str| {
                fields
                    .next()
                    .and_then(|f| f.strip_prefix(key))
                    .and_then(|f| f.strip_prefix('='))
                    .ok_or_else(|| err(&format!("missing `{key}`")))
            };
            let node = get("node")?.parse().map_err(|_| err("bad node"))?;
            let tag = get("tag")?.to_string();
            let positive = match get("role")? {
                "+" => true,
                "-" => false,
                _ => return Err(err("bad role")),
            };
            let clocks = get("clocks")?
                .strip_prefix('[')
                .and_then(|c| c.strip_suffix(']'))
                .ok_or_else(|| err("bad clocks"))?;
            let clocks = if clocks.is_empty() {
                Vec::new()
            } else {
                clocks
                    .split(',')
                    .map(|c| c.parse::<BigUint>().map_err(|_| err("bad clock value")))
                    .collect::<Result<_, _>>()?
            };
            let size = get("size")?.parse().map_err(|_| err("bad size"))?;
            steps.push(TraceStep {
                node: NodeId(node),
                tag,
                positive,
                clocks,
                size,
                mv: if mv == "-" { None } else { Some(mv.to_string()) },
            });
        }
        if !done {
            return Err(TraceError::Parse {
                line: text.lines().count(),
                msg: "missing result line".into(),
            });
        }
        Ok(Trace { steps, winner })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("no winning strategy to check")]
    NoStrategy,
    #[error("position {0} is not won by the declared winner")]
    Lost(u32),
    #[error("a move from position {0} leads outside the explored graph")]
    Unexplored(u32),
    #[error("position {0} is prescribed a move that is not legal")]
    IllegalChoice(u32),
    #[error("a play consistent with the strategy revisits position {0}")]
    Cycle(u32),
}

/// Replays the winner's strategy against every reply of the opponent, with
/// moves regenerated from the rules, and checks that every play is finite and
/// won.
pub fn verify_strategy(verdict: &Verdict, ast: &FormulaAst) -> Result<(), StrategyError> {
    let winner = verdict.winner().ok_or(StrategyError::NoStrategy)?;
    let g = verdict.graph();
    // 0 = unseen, 1 = on the current path, 2 = verified
    let mut state = vec![0u8; g.len()];
    let mut stack: Vec<(u32, Vec<u32>, usize)> = Vec::new();

    let open = |id: u32| -> Result<Option<Vec<u32>>, StrategyError> {
        let p = g.position(id);
        let node = g.node(id);
        match node.status {
            NodeStatus::Terminal(v) | NodeStatus::Collapsed(v) => {
                if v.winner(p.positive) == Some(winner) {
                    Ok(None)
                } else {
                    Err(StrategyError::Lost(id))
                }
            }
            NodeStatus::Unexpanded => Err(StrategyError::Unexplored(id)),
            NodeStatus::Expanded(_) => {
                let (owner, moves) = successors(p, ast);
                if owner == Owner::Player(winner) {
                    let c = node.choice.ok_or(StrategyError::Lost(id))?;
                    if !moves.iter().any(|(_, q)| q == g.position(c)) {
                        return Err(StrategyError::IllegalChoice(id));
                    }
                    Ok(Some(vec![c]))
                } else {
                    moves
                        .iter()
                        .map(|(_, q)| g.id_of(q).ok_or(StrategyError::Unexplored(id)))
                        .collect::<Result<Vec<_>, _>>()
                        .map(Some)
                }
            }
        }
    };

    let root = g.root();
    match open(root)? {
        None => return Ok(()),
        Some(children) => {
            state[root as usize] = 1;
            stack.push((root, children, 0));
        }
    }
    while let Some((id, children, k)) = stack.last_mut() {
        if *k == children.len() {
            state[*id as usize] = 2;
            stack.pop();
            continue;
        }
        let c = children[*k];
        *k += 1;
        match state[c as usize] {
            2 => {}
            1 => return Err(StrategyError::Cycle(c)),
            _ => match open(c)? {
                None => state[c as usize] = 2,
                Some(next) => {
                    state[c as usize] = 1;
                    stack.push((c, next, 0));
                }
            },
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{solve, SolveOptions};
    use crate::structure::Structure;
    use crate::syntax::{parse_formula, SymId, Vocabulary};

    fn vocab() -> Vocabulary {
        Vocabulary::from_inputs([("P", 1), ("R", 2)]).unwrap()
    }

    const REACH: &str = "loop L . (P(x) | exists y . (R(x,y) & exists x . (y = x & L)))";

    fn reach_model() -> Structure {
        let mut m = Structure::empty(&vocab(), 3);
        m.insert(SymId(1), &[0, 1]).unwrap();
        m.insert(SymId(1), &[1, 2]).unwrap();
        m.insert(SymId(0), &[2]).unwrap();
        m
    }

    #[test]
    fn top_trace_has_one_step() {
        let ast = parse_formula("top", &vocab()).unwrap();
        let v = solve(&ast, &reach_model(), &[], SolveOptions::default()).unwrap();
        let t = extract_trace(&v, &ast, OpponentPolicy::First).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.winner, Some(Player::Eloise));
    }

    #[test]
    fn reachability_trace_walks_the_path() {
        let ast = parse_formula(REACH, &vocab()).unwrap();
        let g = [("x".to_string(), 0)];
        for opts in [SolveOptions::default(), SolveOptions::exhaustive()] {
            let v = solve(&ast, &reach_model(), &g, opts).unwrap();
            verify_strategy(&v, &ast).unwrap();
            let t = extract_trace(&v, &ast, OpponentPolicy::Random(3)).unwrap();
            assert_eq!(t.winner, Some(Player::Eloise));
            let picks: Vec<&str> = t
                .steps
                .iter()
                .filter_map(|s| s.mv.as_deref())
                .filter(|m| m.starts_with("pick y="))
                .collect();
            assert!(["pick y=1", "pick y=2"].starts_with(&picks), "{t}");
            let last = &t.steps.last().unwrap().tag;
            assert!(last == "rel" || last == "eq", "{t}");
            assert_eq!(Trace::from_text(&t.to_text()).unwrap(), t);
        }
    }

    #[test]
    fn abelard_strategy_verifies() {
        let ast = parse_formula("forall x . exists y . R(x,y)", &vocab()).unwrap();
        let v = solve(&ast, &reach_model(), &[], SolveOptions::exhaustive()).unwrap();
        assert_eq!(v.winner(), Some(Player::Abelard));
        verify_strategy(&v, &ast).unwrap();
        let t = extract_trace(&v, &ast, OpponentPolicy::First).unwrap();
        assert_eq!(t.winner, Some(Player::Abelard));
    }

    #[test]
    fn first_and_last_policies_pick_the_ends() {
        let ast = parse_formula("forall x . exists y . R(x,y)", &vocab()).unwrap();
        for opts in [SolveOptions::default(), SolveOptions::exhaustive()] {
            let v = solve(&ast, &reach_model(), &[], opts).unwrap();
            for (policy, want) in [(OpponentPolicy::First, "pick y=0"), (OpponentPolicy::Last, "pick y=2")] {
                let t = extract_trace(&v, &ast, policy).unwrap();
                assert_eq!(t.steps[1].mv.as_deref(), Some(want), "{t}");
            }
        }
    }

    #[test]
    fn draw_has_no_trace() {
        let ast = parse_formula("loop L . L", &vocab()).unwrap();
        let v = solve(&ast, &reach_model(), &[], SolveOptions::default()).unwrap();
        assert_eq!(
            extract_trace(&v, &ast, OpponentPolicy::First),
            Err(TraceError::NoStrategy)
        );
        assert_eq!(verify_strategy(&v, &ast), Err(StrategyError::NoStrategy));
    }

    #[test]
    fn malformed_trace_text() {
        assert!(Trace::from_text("step 0 node=0").is_err());
        assert!(Trace::from_text("").is_err());
        assert!(Trace::from_text("result Eloise\n").unwrap().steps.is_empty());
    }
}
