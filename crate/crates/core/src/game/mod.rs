//! The semantic game: positions, move rules with clock bookkeeping, an
//! attractor solver over the explored position graph, and strategy traces.

mod eval;
mod graph;
mod position;
mod rules;
mod solver;
mod trace;

pub use eval::fo_value;
pub use graph::{GameGraph, GraphNode, NodeStatus};
pub use position::{initial_position, Move, Owner, Player, Position, SetupError, TerminalStatus, Value};
pub use rules::{successors, terminal_status};
pub use solver::{
    check_truth, solve, solve_position, Outcome, SolveError, SolveOptions, Stats, Strategy, Truth, Verdict,
};
pub use trace::{extract_trace, verify_strategy, OpponentPolicy, StrategyError, Trace, TraceError, TraceStep};
