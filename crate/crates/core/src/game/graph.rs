use std::fmt::Write;
use std::hash::BuildHasherDefault;

use indexmap::IndexSet;
use rustc_hash::FxHasher;

use super::position::{Owner, Player, Position, Value};
use crate::syntax::FormulaAst;

pub(crate) type PositionSet = IndexSet<Position, BuildHasherDefault<FxHasher>>;

/// How far a position was processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    /// Discovered, successors never generated.
    Unexpanded,
    /// Successors generated (possibly pruned to one winning edge).
    Expanded(Owner),
    /// The play ends here with the given value for the verifier.
    Terminal(Value),
    /// A first-order subformula, replaced by its evaluated game value.
    Collapsed(Value),
}

#[derive(Debug, Clone)]
pub struct GraphNode {
    pub status: NodeStatus,
    pub succ: Vec<u32>,
    pub winner: Option<Player>,
    /// For a node won by its owner: the successor the winner plays.
    pub choice: Option<u32>,
}

/// The explored part of the game: positions in discovery order (root first)
/// with their edges and classification.
#[derive(Debug, Clone, Default)]
pub struct GameGraph {
    pub(crate) positions: PositionSet,
    pub(crate) nodes: Vec<GraphNode>,
}

impl GameGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn position(&self, id: u32) -> &Position {
        &self.positions[id as usize]
    }

    pub fn node(&self, id: u32) -> &GraphNode {
        &self.nodes[id as usize]
    }

    pub fn id_of(&self, p: &Position) -> Option<u32> {
        self.positions.get_index_of(p).map(|i| i as u32)
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.succ.iter().map(move |j| (i as u32, *j)))
    }

    /// Whether the explored edges contain no cycle.
    pub fn is_acyclic(&self) -> bool {
        // 0 = unseen, 1 = on stack, 2 = done
        let mut color = vec![0u8; self.len()];
        for start in 0..self.len() {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = 1;
            while let Some((v, k)) = stack.pop() {
                match self.nodes[v].succ.get(k) {
                    Some(&w) => {
                        stack.push((v, k + 1));
                        match color[w as usize] {
                            0 => {
                                color[w as usize] = 1;
                                stack.push((w as usize, 0));
                            }
                            1 => return false,
                            _ => {}
                        }
                    }
                    None => color[v] = 2,
                }
            }
        }
        true
    }

    /// Counts of (Eloise-won, Abelard-won, unclassified) positions.
    pub fn partition(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for n in &self.nodes {
            match n.winner {
                Some(Player::Eloise) => c.0 += 1,
                Some(Player::Abelard) => c.1 += 1,
                None => c.2 += 1,
            }
        }
        c
    }

    /// Graphviz rendering; strategy edges are bold.
    pub fn to_dot(&self, ast: &FormulaAst) -> String {
        let mut out = String::from("digraph game {\n  node [shape=box, fontname=monospace];\n");
        for (i, (p, n)) in self.positions.iter().zip(&self.nodes).enumerate() {
            let color = match n.winner {
                Some(Player::Eloise) => "palegreen",
                Some(Player::Abelard) => "lightpink",
                None => "lightgrey",
            };
            let shape = match n.status {
                NodeStatus::Expanded(Owner::Player(Player::Eloise)) => "box",
                NodeStatus::Expanded(Owner::Player(Player::Abelard)) => "diamond",
                NodeStatus::Expanded(Owner::Forced) => "ellipse",
                NodeStatus::Unexpanded => "box",
                NodeStatus::Terminal(_) | NodeStatus::Collapsed(_) => "doubleoctagon",
            };
            let style = if n.status == NodeStatus::Unexpanded {
                "\"dashed,filled\""
            } else {
                "filled"
            };
            let _ = writeln!(
                out,
                "  p{i} [label=\"#{i} n{} {} {}{} |M|={}\", shape={shape}, style={style}, fillcolor={color}];",
                p.node.0,
                ast.node(p.node).tag(),
                if p.positive { "+" } else { "-" },
                if p.clocks.is_empty() {
                    String::new()
                } else {
                    format!(" {:?}", p.clocks.iter().map(|c| c.to_string()).collect::<Vec<_>>()).replace('"', "")
                },
                p.state.size(),
            );
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for j in &n.succ {
                let bold = if n.choice == Some(*j) { " [style=bold]" } else { "" };
                let _ = writeln!(out, "  p{i} -> p{j}{bold};");
            }
        }
        out.push_str("}\n");
        out
    }
}
