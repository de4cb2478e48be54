use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use super::eval::fo_value;
use super::graph::{GameGraph, GraphNode, NodeStatus};
use super::position::{initial_position, Owner, Player, Position, SetupError, Value};
use super::rules::{successors, terminal_status};
use crate::par;
use crate::structure::{Elem, Structure};
use crate::syntax::{FormulaAst, DEFAULT_MAX_CLOCK_BITS};

/// Positions expanded per batch. Fixed so that results do not depend on the
/// number of threads.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Stop once this many positions have been discovered.
    pub budget: Option<u64>,
    /// Evaluate first-order subformulas directly instead of exploring them.
    pub collapse_fo: bool,
    /// At a choice whose successor is an immediate win for the mover, keep
    /// only that successor.
    pub prune: bool,
    /// Stop when the root is classified and skip positions whose value can no
    /// longer matter.
    pub early_exit: bool,
    pub max_clock_bits: u64,
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            budget: None,
            collapse_fo: true,
            prune: true,
            early_exit: true,
            max_clock_bits: DEFAULT_MAX_CLOCK_BITS,
            parallel: par::available(),
        }
    }
}

impl SolveOptions {
    /// Plain exploration of the whole reachable game graph.
    pub fn exhaustive() -> Self {
        Self {
            collapse_fo: false,
            prune: false,
            early_exit: false,
            ..Self::default()
        }
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Self {
        self.budget = budget;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    EloiseWins,
    AbelardWins,
    Draw,
    Unknown,
}

impl Outcome {
    /// The outcome of the negated formula.
    pub fn swap(self) -> Self {
        match self {
            Outcome::EloiseWins => Outcome::AbelardWins,
            Outcome::AbelardWins => Outcome::EloiseWins,
            o => o,
        }
    }

    pub fn is_definite(self) -> bool {
        self != Outcome::Unknown
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::EloiseWins => "EloiseWins",
            Outcome::AbelardWins => "AbelardWins",
            Outcome::Draw => "Draw",
            Outcome::Unknown => "Unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub positions: usize,
    pub expanded: usize,
    pub edges: usize,
    pub terminal_eloise: usize,
    pub terminal_abelard: usize,
    pub terminal_neither: usize,
    pub collapsed: usize,
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "positions={} expanded={} edges={} terminals(eloise={}, abelard={}, neither={}) collapsed={}",
            self.positions,
            self.expanded,
            self.edges,
            self.terminal_eloise,
            self.terminal_abelard,
            self.terminal_neither,
            self.collapsed
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Setup(#[from] SetupError),
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: Stats,
    graph: GameGraph,
}

impl Verdict {
    pub fn graph(&self) -> &GameGraph {
        &self.graph
    }

    pub fn winner(&self) -> Option<Player> {
        match self.outcome {
            Outcome::EloiseWins => Some(Player::Eloise),
            Outcome::AbelardWins => Some(Player::Abelard),
            _ => None,
        }
    }

    /// The winner's positional strategy, present iff the outcome is definite
    /// and not a draw.
    pub fn strategy(&self) -> Option<Strategy<'_>> {
        self.winner().map(|winner| Strategy {
            graph: &self.graph,
            winner,
        })
    }
}

/// Positional strategy of the winner over the explored positions.
#[derive(Debug, Clone, Copy)]
pub struct Strategy<'a> {
    graph: &'a GameGraph,
    winner: Player,
}

impl<'a> Strategy<'a> {
    pub fn winner(&self) -> Player {
        self.winner
    }

    pub fn graph(&self) -> &'a GameGraph {
        self.graph
    }

    /// The winner's move at `p`, if `p` is one of the winner's winning
    /// decision points.
    pub fn choose(&self, p: &Position) -> Option<&'a Position> {
        let id = self.graph.id_of(p)?;
        let n = self.graph.node(id);
        if n.winner != Some(self.winner) {
            return None;
        }
        n.choice.map(|c| self.graph.position(c))
    }

    /// Number of positions where the strategy prescribes a move.
    pub fn len(&self) -> usize {
        self.graph
            .nodes
            .iter()
            .filter(|n| n.winner == Some(self.winner) && n.choice.is_some())
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Truth of `M, g ⊨ φ`: Eloise has a winning strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

/// Value of a position without exploring it, if one is available.
pub(crate) fn immediate(ast: &FormulaAst, p: &Position, collapse_fo: bool) -> Option<(Value, bool)> {
    match terminal_status(p, ast).value() {
        Some(v) => Some((v, false)),
        None if collapse_fo && ast.is_pure_fo(p.node) => Some((fo_value(ast, p.node, &p.state), true)),
        None => None,
    }
}

struct Expansion {
    owner: Owner,
    succ: Vec<(Position, Option<(Value, bool)>)>,
}

fn expand(ast: &FormulaAst, p: &Position, opts: &SolveOptions) -> Expansion {
    let (owner, moves) = successors(p, ast);
    let mut succ: Vec<_> = moves
        .into_iter()
        .map(|(_, q)| {
            let imm = immediate(ast, &q, opts.collapse_fo);
            (q, imm)
        })
        .collect();
    if opts.prune {
        if let Owner::Player(pl) = owner {
            let win = succ
                .iter()
                .position(|(q, imm)| imm.and_then(|(v, _)| v.winner(q.positive)) == Some(pl));
            if let Some(k) = win {
                let keep = succ.swap_remove(k);
                succ = vec![keep];
            }
        }
    }
    Expansion { owner, succ }
}

struct Solver<'a> {
    ast: &'a FormulaAst,
    opts: SolveOptions,
    graph: GameGraph,
    preds: Vec<Vec<u32>>,
    // successors not yet won by Eloise / Abelard
    open_e: Vec<u32>,
    open_a: Vec<u32>,
    queued: Vec<bool>,
    queue: VecDeque<u32>,
    worklist: Vec<u32>,
    stats: Stats,
}

impl<'a> Solver<'a> {
    fn new(ast: &'a FormulaAst, opts: SolveOptions) -> Self {
        Self {
            ast,
            opts,
            graph: GameGraph::default(),
            preds: Vec::new(),
            open_e: Vec::new(),
            open_a: Vec::new(),
            queued: Vec::new(),
            queue: VecDeque::new(),
            worklist: Vec::new(),
            stats: Stats::default(),
        }
    }

    /// Adds `p` if new; returns its id.
    fn intern(&mut self, p: Position, imm: Option<(Value, bool)>) -> u32 {
        if let Some(id) = self.graph.id_of(&p) {
            let id_us = id as usize;
            if self.graph.nodes[id_us].status == NodeStatus::Unexpanded && !self.queued[id_us] {
                self.queued[id_us] = true;
                self.queue.push_back(id);
            }
            return id;
        }
        let positive = p.positive;
        let (id, _) = self.graph.positions.insert_full(p);
        let id = id as u32;
        let status = match imm {
            Some((v, true)) => NodeStatus::Collapsed(v),
            Some((v, false)) => NodeStatus::Terminal(v),
            None => NodeStatus::Unexpanded,
        };
        self.graph.nodes.push(GraphNode {
            status,
            succ: Vec::new(),
            winner: None,
            choice: None,
        });
        self.preds.push(Vec::new());
        self.open_e.push(0);
        self.open_a.push(0);
        self.queued.push(imm.is_none());
        match imm {
            None => self.queue.push_back(id),
            Some((v, collapsed)) => {
                if collapsed {
                    self.stats.collapsed += 1;
                }
                match v.winner(positive) {
                    Some(Player::Eloise) => self.stats.terminal_eloise += 1,
                    Some(Player::Abelard) => self.stats.terminal_abelard += 1,
                    None => self.stats.terminal_neither += 1,
                }
                if let Some(w) = v.winner(positive) {
                    self.classify(id, w, None);
                }
            }
        }
        id
    }

    fn classify(&mut self, id: u32, w: Player, choice: Option<u32>) {
        let n = &mut self.graph.nodes[id as usize];
        debug_assert!(n.winner.is_none());
        n.winner = Some(w);
        n.choice = choice;
        self.worklist.push(id);
        self.drain();
    }

    /// Successor `j` of expanded node `i` is won by `w`.
    fn edge_won(&mut self, i: u32, j: u32, w: Player) {
        let iu = i as usize;
        if self.graph.nodes[iu].winner.is_some() {
            return;
        }
        let NodeStatus::Expanded(owner) = self.graph.nodes[iu].status else {
            unreachable!("only expanded nodes have successors")
        };
        let decide = |n: &mut GraphNode, choice| {
            n.winner = Some(w);
            n.choice = choice;
        };
        if owner == Owner::Player(w) {
            decide(&mut self.graph.nodes[iu], Some(j));
            self.worklist.push(i);
            return;
        }
        let open = match w {
            Player::Eloise => &mut self.open_e[iu],
            Player::Abelard => &mut self.open_a[iu],
        };
        *open -= 1;
        if *open == 0 {
            decide(&mut self.graph.nodes[iu], None);
            self.worklist.push(i);
        }
    }

    fn drain(&mut self) {
        while let Some(j) = self.worklist.pop() {
            let w = self.graph.nodes[j as usize].winner.expect("classified");
            for k in 0..self.preds[j as usize].len() {
                let i = self.preds[j as usize][k];
                self.edge_won(i, j, w);
            }
        }
    }

    fn integrate(&mut self, i: u32, exp: Expansion) {
        let mut succ: Vec<u32> = Vec::with_capacity(exp.succ.len());
        for (q, imm) in exp.succ {
            let j = self.intern(q, imm);
            if !succ.contains(&j) {
                succ.push(j);
            }
        }
        debug_assert!(!succ.is_empty(), "nonterminal position without moves");
        let iu = i as usize;
        self.stats.expanded += 1;
        self.stats.edges += succ.len();
        self.open_e[iu] = succ.len() as u32;
        self.open_a[iu] = succ.len() as u32;
        for &j in &succ {
            self.preds[j as usize].push(i);
        }
        self.graph.nodes[iu].status = NodeStatus::Expanded(exp.owner);
        self.graph.nodes[iu].succ = succ.clone();
        for j in succ {
            if let Some(w) = self.graph.nodes[j as usize].winner {
                self.edge_won(i, j, w);
                self.drain();
            }
        }
    }

    /// Whether expanding `id` can still affect the root.
    fn relevant(&self, id: u32) -> bool {
        id == 0
            || self.preds[id as usize]
                .iter()
                .any(|i| self.graph.nodes[*i as usize].winner.is_none())
    }

    fn run(&mut self, root: Position) -> Outcome {
        let imm = immediate(self.ast, &root, self.opts.collapse_fo);
        self.intern(root, imm);
        let budget = self.opts.budget.unwrap_or(u64::MAX) as usize;
        let mut out_of_budget = false;
        'outer: loop {
            if self.opts.early_exit && self.graph.nodes[0].winner.is_some() {
                break;
            }
            let mut chunk = Vec::with_capacity(CHUNK);
            while chunk.len() < CHUNK {
                let Some(id) = self.queue.pop_front() else { break };
                self.queued[id as usize] = false;
                if self.graph.nodes[id as usize].status != NodeStatus::Unexpanded {
                    continue;
                }
                if self.opts.early_exit && !self.relevant(id) {
                    continue;
                }
                chunk.push(id);
            }
            if chunk.is_empty() {
                break;
            }
            let ast = self.ast;
            let opts = self.opts;
            let positions = &self.graph.positions;
            let expansions = par::map(&chunk, opts.parallel, |id| expand(ast, &positions[*id as usize], &opts));
            for (k, (id, exp)) in chunk.iter().zip(expansions).enumerate() {
                if self.graph.len() >= budget {
                    // put the rest back so the caller can tell work remains
                    for id in &chunk[k..] {
                        self.queued[*id as usize] = true;
                        self.queue.push_front(*id);
                    }
                    out_of_budget = true;
                    break 'outer;
                }
                self.integrate(*id, exp);
            }
        }
        self.stats.positions = self.graph.len();
        match self.graph.nodes[0].winner {
            Some(Player::Eloise) => Outcome::EloiseWins,
            Some(Player::Abelard) => Outcome::AbelardWins,
            None if out_of_budget => Outcome::Unknown,
            None => Outcome::Draw,
        }
    }
}

/// Solves the game from an arbitrary position.
pub fn solve_position(ast: &FormulaAst, root: Position, opts: SolveOptions) -> Result<Verdict, SolveError> {
    if opts.budget == Some(0) {
        return Err(SolveError::ZeroBudget);
    }
    let mut s = Solver::new(ast, opts);
    let outcome = s.run(root);
    Ok(Verdict {
        outcome,
        stats: s.stats,
        graph: s.graph,
    })
}

/// Solves the semantic game for `φ` on `M` under `g`.
pub fn solve(ast: &FormulaAst, m: &Structure, g: &[(String, Elem)], opts: SolveOptions) -> Result<Verdict, SolveError> {
    if opts.budget == Some(0) {
        return Err(SolveError::ZeroBudget);
    }
    let root = initial_position(ast, m, g, opts.max_clock_bits)?;
    solve_position(ast, root, opts)
}

pub fn check_truth(
    ast: &FormulaAst,
    m: &Structure,
    g: &[(String, Elem)],
    budget: Option<u64>,
) -> Result<Truth, SolveError> {
    let v = solve(ast, m, g, SolveOptions::default().with_budget(budget))?;
    Ok(match v.outcome {
        Outcome::EloiseWins => Truth::True,
        Outcome::Unknown => Truth::Unknown,
        _ => Truth::False,
    })
}
