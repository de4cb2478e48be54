use std::collections::BTreeMap;
use std::fmt;
use std::hash::BuildHasherDefault;

use indexmap::IndexSet;
use rustc_hash::FxHasher;
use thiserror::Error;

use crate::syntax::{is_identifier, parse_clock_term, ClockTerm};

pub const BLANK: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    Existential,
    Universal,
    Accept,
    Reject,
}

impl StateKind {
    pub fn is_halting(self) -> bool {
        matches!(self, StateKind::Accept | StateKind::Reject)
    }

    fn name(self) -> &'static str {
        match self {
            StateKind::Existential => "existential",
            StateKind::Universal => "universal",
            StateKind::Accept => "accept",
            StateKind::Reject => "reject",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    pub write: usize,
    pub dir: Dir,
    pub next: usize,
}

/// Space the machine promises on inputs from size-`n` structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceBound {
    /// At most `n^(k+1)` cells.
    Poly(u32),
    /// At most `t(n)` cells.
    Clock(ClockTerm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmallAccept {
    All,
    None,
    /// Encodings (under any order) of the accepted small structures.
    List(Vec<String>),
}

/// Verdicts for structures with fewer than `n0` elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallModels {
    pub n0: usize,
    pub accept: SmallAccept,
}

/// An alternating Turing machine over input alphabet `{0,1}`. Symbols 0, 1
/// and 2 are `0`, `1` and the blank `_`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atm {
    pub states: Vec<(String, StateKind)>,
    pub symbols: Vec<String>,
    pub start: usize,
    pub delta: BTreeMap<(usize, usize), Vec<Transition>>,
    pub space: Option<SpaceBound>,
    pub small: Option<SmallModels>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtmError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("halting state `{0}` has outgoing transitions")]
    HaltingHasTransitions(String),
    #[error("no transition for state `{0}` on symbol `{1}`")]
    MissingTransition(String, String),
    #[error("head moved off the tape at cell {0}")]
    HeadOutOfBounds(i64),
    #[error("input of length {len} does not fit in {cells} cells")]
    InputTooLong { len: usize, cells: usize },
    #[error("input symbol `{0}` is not 0 or 1")]
    BadInput(char),
}

impl Atm {
    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|(n, _)| n == name)
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }

    pub fn kind(&self, q: usize) -> StateKind {
        self.states[q].1
    }

    /// Checks the structural invariants: halting states have no moves and
    /// every other state has a move on every symbol.
    pub fn validate(&self) -> Result<(), AtmError> {
        for (q, (name, kind)) in self.states.iter().enumerate() {
            for a in 0..self.symbols.len() {
                let has = self.delta.get(&(q, a)).is_some_and(|t| !t.is_empty());
                if kind.is_halting() && has {
                    return Err(AtmError::HaltingHasTransitions(name.clone()));
                }
                if !kind.is_halting() && !has {
                    return Err(AtmError::MissingTransition(name.clone(), self.symbols[a].clone()));
                }
            }
        }
        Ok(())
    }

    /// The two-state parity machine: scans right, accepts at the first blank
    /// iff it has seen an even number of 1s.
    pub fn even_ones() -> Self {
        EVEN_ONES.parse().expect("built-in machine parses")
    }

    /// A machine whose start state accepts (or rejects) immediately.
    pub fn trivial(accept: bool) -> Self {
        let kind = if accept { "accept" } else { "reject" };
        format!("state s {kind}\nstart s\n")
            .parse()
            .expect("built-in machine parses")
    }
}

pub const EVEN_ONES: &str = "\
# accepts iff the input has an even number of 1s
state even existential
state odd existential
state acc accept
state rej reject
start even
space k=1
delta (even,0) -> (0,R,even)
delta (even,1) -> (1,R,odd)
delta (odd,0) -> (0,R,odd)
delta (odd,1) -> (1,R,even)
delta (even,_) -> (_,L,acc)
delta (odd,_) -> (_,L,rej)
small n0=3 accept=[0,101,11000,11011]
";

fn parse_pair(s: &str) -> Option<(&str, &str)> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.trim(), b.trim()))
}

impl std::str::FromStr for Atm {
    type Err = AtmError;

    /// Line format:
    ///
    /// ```text
    /// state NAME existential|universal|accept|reject
    /// start NAME
    /// symbols 0 1 _ EXTRA...          (optional)
    /// space k=K | space clock=TERM    (optional)
    /// delta (q,A) -> (B,L|R,q')
    /// small n0=N accept=[e1,e2,...]|all|none   (optional)
    /// ```
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut states: Vec<(String, StateKind)> = Vec::new();
        let mut symbols: Vec<String> = vec!["0".into(), "1".into(), "_".into()];
        let mut start_name: Option<(String, usize)> = None;
        let mut space = None;
        let mut small = None;
        let mut deltas: Vec<(usize, String, String, String, Dir, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| AtmError::Parse { line, msg };
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            let rest = rest.trim();
            match kw {
                "state" => {
                    let mut it = rest.split_whitespace();
                    let (Some(name), Some(kind), None) = (it.next(), it.next(), it.next()) else {
                        return Err(err("expected `state NAME KIND`".into()));
                    };
                    if !is_identifier(name) {
                        return Err(err(format!("bad state name `{name}`")));
                    }
                    if states.iter().any(|(n, _)| n == name) {
                        return Err(err(format!("duplicate state `{name}`")));
                    }
                    let kind = match kind {
                        "existential" => StateKind::Existential,
                        "universal" => StateKind::Universal,
                        "accept" => StateKind::Accept,
                        "reject" => StateKind::Reject,
                        k => return Err(err(format!("unknown state kind `{k}`"))),
                    };
                    states.push((name.to_string(), kind));
                }
                "start" => start_name = Some((rest.to_string(), line)),
                "symbols" => {
                    let syms: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                    if syms.len() < 3 || syms[0] != "0" || syms[1] != "1" || syms[2] != "_" {
                        return Err(err("symbols must begin with `0 1 _`".into()));
                    }
                    for s in &syms[3..] {
                        if !s.chars().all(|c| c.is_ascii_alphanumeric()) {
                            return Err(err(format!("bad symbol `{s}`")));
                        }
                    }
                    symbols = syms;
                }
                "space" => {
                    space = Some(if let Some(k) = rest.strip_prefix("k=") {
                        SpaceBound::Poly(k.trim().parse().map_err(|_| err(format!("bad exponent `{k}`")))?)
                    } else if let Some(t) = rest.strip_prefix("clock=") {
                        SpaceBound::Clock(parse_clock_term(t).map_err(|e| err(e.to_string()))?)
                    } else {
                        return Err(err("expected `space k=K` or `space clock=TERM`".into()));
                    });
                }
                "delta" => {
                    let (lhs, rhs) = rest
                        .split_once("->")
                        .ok_or_else(|| err("expected `(q,A) -> (B,D,q')`".into()))?;
                    let (q, a) = parse_pair(lhs).ok_or_else(|| err("bad left-hand side".into()))?;
                    let inner = rhs
                        .trim()
                        .strip_prefix('(')
                        .and_then(|r| r.strip_suffix(')'))
                        .ok_or_else(|| err("bad right-hand side".into()))?;
                    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
                    let [b, d, q2] = parts[..] else {
                        return Err(err("right-hand side needs three parts".into()));
                    };
                    let dir = match d {
                        "L" => Dir::Left,
                        "R" => Dir::Right,
                        _ => return Err(err(format!("bad direction `{d}`"))),
                    };
                    deltas.push((line, q.into(), a.into(), b.into(), dir, q2.into()));
                }
                "small" => {
                    let mut n0 = None;
                    let mut accept = None;
                    for part in rest.split_whitespace() {
                        if let Some(v) = part.strip_prefix("n0=") {
                            n0 = Some(v.parse().map_err(|_| err(format!("bad n0 `{v}`")))?);
                        } else if let Some(v) = part.strip_prefix("accept=") {
                            accept = Some(match v {
                                "all" => SmallAccept::All,
                                "none" => SmallAccept::None,
                                _ => {
                                    let inner = v
                                        .strip_prefix('[')
                                        .and_then(|v| v.strip_suffix(']'))
                                        .ok_or_else(|| err("expected `[...]`, `all` or `none`".into()))?;
                                    let list: Vec<String> = inner
                                        .split(',')
                                        .map(str::trim)
                                        .filter(|s| !s.is_empty())
                                        .map(str::to_string)
                                        .collect();
                                    if list.iter().any(|e| e.chars().any(|c| c != '0' && c != '1')) {
                                        return Err(err("encodings must be 0/1 strings".into()));
                                    }
                                    SmallAccept::List(list)
                                }
                            });
                        } else {
                            return Err(err(format!("unexpected `{part}`")));
                        }
                    }
                    small = Some(SmallModels {
                        n0: n0.ok_or_else(|| err("missing n0".into()))?,
                        accept: accept.ok_or_else(|| err("missing accept".into()))?,
                    });
                }
                other => return Err(err(format!("unknown keyword `{other}`"))),
            }
        }
        let (start, line) = start_name.ok_or(AtmError::Parse {
            line: 0,
            msg: "missing `start`".into(),
        })?;
        let start = states.iter().position(|(n, _)| *n == start).ok_or(AtmError::Parse {
            line,
            msg: format!("unknown start state `{start}`"),
        })?;
        let mut delta: BTreeMap<(usize, usize), Vec<Transition>> = BTreeMap::new();
        for (line, q, a, b, dir, q2) in deltas {
            let err = |msg: String| AtmError::Parse { line, msg };
            let st = |n: &str| {
                states
                    .iter()
                    .position(|(s, _)| s == n)
                    .ok_or_else(|| err(format!("unknown state `{n}`")))
            };
            let sy = |n: &str| {
                symbols
                    .iter()
                    .position(|s| s == n)
                    .ok_or_else(|| err(format!("unknown symbol `{n}`")))
            };
            let t = Transition {
                write: sy(&b)?,
                dir,
                next: st(&q2)?,
            };
            delta.entry((st(&q)?, sy(&a)?)).or_default().push(t);
        }
        let atm = Atm {
            states,
            symbols,
            start,
            delta,
            space,
            small,
        };
        atm.validate()?;
        Ok(atm)
    }
}

impl fmt::Display for Atm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, kind) in &self.states {
            writeln!(f, "state {name} {}", kind.name())?;
        }
        writeln!(f, "start {}", self.states[self.start].0)?;
        if self.symbols.len() > 3 {
            writeln!(f, "symbols {}", self.symbols.join(" "))?;
        }
        match &self.space {
            Some(SpaceBound::Poly(k)) => writeln!(f, "space k={k}")?,
            Some(SpaceBound::Clock(t)) => writeln!(f, "space clock={t}")?,
            None => {}
        }
        for ((q, a), ts) in &self.delta {
            for t in ts {
                writeln!(
                    f,
                    "delta ({},{}) -> ({},{},{})",
                    self.states[*q].0,
                    self.symbols[*a],
                    self.symbols[t.write],
                    if t.dir == Dir::Left { "L" } else { "R" },
                    self.states[t.next].0
                )?;
            }
        }
        if let Some(s) = &self.small {
            let acc = match &s.accept {
                SmallAccept::All => "all".to_string(),
                SmallAccept::None => "none".to_string(),
                SmallAccept::List(l) => format!("[{}]", l.join(",")),
            };
            writeln!(f, "small n0={} accept={acc}", s.n0)?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    state: usize,
    head: usize,
    tape: Vec<u8>,
}

/// Alternating acceptance of `input` on a tape of `cells` cells: the least
/// set of configurations closed under "accepting", "existential with an
/// accepted successor" and "universal with all successors accepted".
pub fn simulate(atm: &Atm, input: &str, cells: usize) -> Result<bool, AtmError> {
    if input.len() > cells {
        return Err(AtmError::InputTooLong {
            len: input.len(),
            cells,
        });
    }
    let mut tape = vec![BLANK as u8; cells.max(1)];
    for (i, c) in input.chars().enumerate() {
        tape[i] = match c {
            '0' => 0,
            '1' => 1,
            other => return Err(AtmError::BadInput(other)),
        };
    }
    let mut configs: IndexSet<Config, BuildHasherDefault<FxHasher>> = IndexSet::default();
    configs.insert(Config {
        state: atm.start,
        head: 0,
        tape,
    });
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < configs.len() {
        let c = configs[i].clone();
        let mut out = Vec::new();
        if !atm.kind(c.state).is_halting() {
            let read = c.tape[c.head] as usize;
            for t in atm.delta.get(&(c.state, read)).map(Vec::as_slice).unwrap_or(&[]) {
                let head = match t.dir {
                    Dir::Left => c.head as i64 - 1,
                    Dir::Right => c.head as i64 + 1,
                };
                if head < 0 || head >= cells as i64 {
                    return Err(AtmError::HeadOutOfBounds(head));
                }
                let mut tape = c.tape.clone();
                tape[c.head] = t.write as u8;
                let (j, _) = configs.insert_full(Config {
                    state: t.next,
                    head: head as usize,
                    tape,
                });
                out.push(j);
            }
        }
        succ.push(out);
        i += 1;
    }
    let n = configs.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, s) in succ.iter().enumerate() {
        for j in s {
            preds[*j].push(i);
        }
    }
    let mut open: Vec<usize> = succ.iter().map(Vec::len).collect();
    let mut accepted = vec![false; n];
    let mut work: Vec<usize> = (0..n)
        .filter(|i| atm.kind(configs[*i].state) == StateKind::Accept)
        .collect();
    for &i in &work {
        accepted[i] = true;
    }
    while let Some(j) = work.pop() {
        for &i in &preds[j] {
            if accepted[i] {
                continue;
            }
            let join = match atm.kind(configs[i].state) {
                StateKind::Existential => true,
                StateKind::Universal => {
                    open[i] -= 1;
                    open[i] == 0
                }
                _ => false,
            };
            if join {
                accepted[i] = true;
                work.push(i);
            }
        }
    }
    Ok(accepted[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_ones_hand_runs() {
        let m = Atm::even_ones();
        assert!(simulate(&m, "11011", 6).unwrap());
        assert!(!simulate(&m, "11001", 6).unwrap());
        assert!(!simulate(&m, "10", 3).unwrap());
        assert!(simulate(&m, "0", 2).unwrap());
        assert_eq!(simulate(&m, "", 1), Err(AtmError::HeadOutOfBounds(-1)));
    }

    #[test]
    fn needs_a_blank_cell() {
        let m = Atm::even_ones();
        assert_eq!(simulate(&m, "10", 2), Err(AtmError::HeadOutOfBounds(2)));
        assert!(simulate(&m, "101", 2).is_err());
    }

    #[test]
    fn trivial_machines() {
        assert!(simulate(&Atm::trivial(true), "0110", 4).unwrap());
        assert!(!simulate(&Atm::trivial(false), "0110", 4).unwrap());
    }

    #[test]
    fn universal_branching() {
        // universal start: both branches must accept
        let text = "state s universal\nstate a accept\nstate r reject\nstart s\n\
                    delta (s,0) -> (0,R,a)\ndelta (s,0) -> (0,R,r)\n\
                    delta (s,1) -> (1,R,a)\ndelta (s,_) -> (_,R,a)\n";
        let m: Atm = text.parse().unwrap();
        assert!(!simulate(&m, "0", 2).unwrap());
        assert!(simulate(&m, "1", 2).unwrap());
        let e: Atm = text.replace("universal", "existential").parse().unwrap();
        assert!(simulate(&e, "0", 2).unwrap());
    }

    #[test]
    fn cycles_reject() {
        let text = "state s existential\nstate t existential\nstart s\n\
                    delta (s,0) -> (0,R,t)\ndelta (s,1) -> (1,R,t)\ndelta (s,_) -> (_,R,t)\n\
                    delta (t,0) -> (0,L,s)\ndelta (t,1) -> (1,L,s)\ndelta (t,_) -> (_,L,s)\n";
        let m: Atm = text.parse().unwrap();
        assert!(!simulate(&m, "01", 3).unwrap());
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let m = Atm::even_ones();
        assert_eq!(m.to_string().parse::<Atm>().unwrap(), m);
        assert_eq!(m.small.as_ref().unwrap().n0, 3);
        assert_eq!(m.space, Some(SpaceBound::Poly(1)));
        assert!(matches!(
            "state s existential\nstart s\n".parse::<Atm>(),
            Err(AtmError::MissingTransition(..))
        ));
        assert!(matches!(
            "state s accept\nstart s\ndelta (s,0) -> (0,R,s)\n".parse::<Atm>(),
            Err(AtmError::HaltingHasTransitions(_))
        ));
        assert!(matches!("start q\n".parse::<Atm>(), Err(AtmError::Parse { .. })));
        assert!(matches!(
            "state s accept\nstart s\nbogus\n".parse::<Atm>(),
            Err(AtmError::Parse { line: 3, .. })
        ));
    }
}
