#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tlogic::structure::{Elem, Structure};
use tlogic::syntax::{ClockTerm, Formula, PolyTerm, SymbolKind, Vocabulary};

pub const REACH: &str = "loop L . (P(x) | exists y . (R(x,y) & exists x . (y = x & L)))";
pub const REACH_DX: &str = "loop L . (P(x) | exists y . (R(x,y) & x != y & Dx x . exists x . (y = x & L)))";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `{P/1, R/2}`.
pub fn pr() -> Vocabulary {
    Vocabulary::from_inputs([("P", 1), ("R", 2)]).unwrap()
}

/// `{P/1, R/2, B/0}` plus tapes `T/1` and `U/0`.
pub fn pr_tapes() -> Vocabulary {
    let mut v = Vocabulary::from_inputs([("P", 1), ("R", 2), ("B", 0)]).unwrap();
    v.add("T", 1, SymbolKind::Tape).unwrap();
    v.add("U", 0, SymbolKind::Tape).unwrap();
    v
}

/// Digraph on `0..n` with edge `(i,j)` iff bit `i*n+j` of `edges` is set.
pub fn digraph(n: usize, edges: u64, p: &[Elem]) -> Structure {
    let v = pr();
    let mut m = Structure::empty(&v, n);
    let (ps, rs) = (v.lookup("P").unwrap(), v.lookup("R").unwrap());
    for i in 0..n {
        for j in 0..n {
            if edges >> (i * n + j) & 1 == 1 {
                m.insert(rs, &[i as Elem, j as Elem]).unwrap();
            }
        }
    }
    for e in p {
        m.insert(ps, &[*e]).unwrap();
    }
    m
}

/// Whether some element in `P` is reachable from `from` along `R`.
pub fn bfs_reaches(m: &Structure, from: Elem) -> bool {
    let p = m.relation_by_name("P").unwrap();
    let r = m.relation_by_name("R").unwrap();
    let mut seen = vec![from];
    let mut queue = VecDeque::from([from]);
    while let Some(a) = queue.pop_front() {
        if p.contains(&[a]) {
            return true;
        }
        for t in r.iter() {
            if t[0] == a && !seen.contains(&t[1]) {
                seen.push(t[1]);
                queue.push_back(t[1]);
            }
        }
    }
    false
}

/// Textbook satisfaction for first-order formulas, except that on the empty
/// model every quantified subformula is false (the verifier cannot pick a
/// witness and loses, whichever quantifier it is). An unassigned variable is
/// a test bug.
pub fn tarski(f: &Formula, m: &Structure, env: &mut HashMap<String, Elem>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Rel(s, xs) => {
            let t: Vec<Elem> = xs.iter().map(|x| env[x]).collect();
            m.relation_by_name(s).unwrap().contains(&t)
        }
        Formula::Eq(a, b) => env[a] == env[b],
        Formula::Not(g) => !tarski(g, m, env),
        Formula::And(a, b) => tarski(a, m, env) && tarski(b, m, env),
        Formula::Or(a, b) => tarski(a, m, env) || tarski(b, m, env),
        Formula::Exists(..) | Formula::Forall(..) if m.size() == 0 => false,
        Formula::Exists(x, g) | Formula::Forall(x, g) => {
            let want = matches!(f, Formula::Exists(..));
            let saved = env.get(x).copied();
            let mut hit = !want;
            for &e in m.domain() {
                env.insert(x.clone(), e);
                if tarski(g, m, env) == want {
                    hit = want;
                    break;
                }
            }
            match saved {
                Some(e) => env.insert(x.clone(), e),
                None => env.remove(x),
            };
            hit
        }
        other => panic!("not first-order: {other:?}"),
    }
}

const VARS: [&str; 3] = ["x", "y", "z"];

/// A first-order sentence over `{P/1, R/2}` of connective depth at most
/// `depth`; atoms only mention bound variables.
pub fn fo_sentence(r: &mut impl Rng, depth: usize) -> Formula {
    fo(r, depth, &mut Vec::new())
}

fn fo(r: &mut impl Rng, depth: usize, bound: &mut Vec<&'static str>) -> Formula {
    if depth == 0 || r.gen_bool(0.2) {
        if bound.is_empty() {
            return if r.gen_bool(0.5) { Formula::True } else { Formula::False };
        }
        let (a, b) = (bound[r.gen_range(0..bound.len())], bound[r.gen_range(0..bound.len())]);
        return match r.gen_range(0..3) {
            0 => Formula::rel("P", &[a]),
            1 => Formula::rel("R", &[a, b]),
            _ => Formula::eq(a, b),
        };
    }
    match r.gen_range(0..5) {
        0 => fo(r, depth - 1, bound).negate(),
        1 => fo(r, depth - 1, bound).and(fo(r, depth - 1, bound)),
        2 => fo(r, depth - 1, bound).or(fo(r, depth - 1, bound)),
        k => {
            let x = VARS[r.gen_range(0..VARS.len())];
            bound.push(x);
            let body = fo(r, depth - 1, bound);
            bound.pop();
            if k == 3 {
                Formula::exists(x, body)
            } else {
                Formula::forall(x, body)
            }
        }
    }
}

pub fn clock_term(r: &mut impl Rng) -> ClockTerm {
    let terms = r.gen_range(1..=3);
    let mut exps: Vec<u32> = (0..=4).collect();
    while exps.len() > terms {
        exps.remove(r.gen_range(0..exps.len()));
    }
    exps.reverse();
    let poly = PolyTerm::new(exps.into_iter().map(|e| (r.gen_range(0..6), e)).collect()).unwrap();
    if r.gen_bool(0.5) {
        ClockTerm::poly(poly)
    } else {
        ClockTerm::tower(r.gen_range(0..4), r.gen_range(0..3), poly, r.gen_range(0..4))
    }
}

/// Generator for arbitrary formulas over [`pr_tapes`]. Labels get fresh
/// names; loop atoms may name any label, including missing ones.
pub struct AnyGen {
    labels: usize,
    /// Probability that a label or element insertion carries a clock.
    pub clock_p: f64,
    /// Clock terms used when [`Self::small_clocks`] is set: constants and `n`.
    pub small_clocks: bool,
    /// Loop atoms only name enclosing labels.
    pub scoped_loops: bool,
    open: Vec<String>,
}

impl AnyGen {
    pub fn new() -> Self {
        AnyGen {
            labels: 0,
            clock_p: 0.5,
            small_clocks: false,
            scoped_loops: false,
            open: Vec::new(),
        }
    }

    /// Every label and insertion clocked with a value at most 3 or `n`, loop
    /// atoms scoped: games stay small and always end.
    pub fn clocked() -> Self {
        AnyGen {
            clock_p: 1.0,
            small_clocks: true,
            scoped_loops: true,
            ..Self::new()
        }
    }

    fn clock(&mut self, r: &mut impl Rng) -> Option<ClockTerm> {
        if !r.gen_bool(self.clock_p) {
            return None;
        }
        Some(if self.small_clocks {
            if r.gen_bool(0.7) {
                ClockTerm::constant(r.gen_range(0..=3))
            } else {
                ClockTerm::poly(PolyTerm::new(vec![(1, 1)]).unwrap())
            }
        } else {
            clock_term(r)
        })
    }

    fn var(r: &mut impl Rng) -> &'static str {
        VARS[r.gen_range(0..2)]
    }

    pub fn formula(&mut self, r: &mut impl Rng, depth: usize) -> Formula {
        if depth == 0 || r.gen_bool(0.15) {
            return match r.gen_range(0..7) {
                0 => Formula::True,
                1 => Formula::False,
                2 => Formula::rel("P", &[Self::var(r)]),
                3 => Formula::rel("R", &[Self::var(r), Self::var(r)]),
                4 => Formula::rel(if r.gen_bool(0.5) { "U" } else { "B" }, &[] as &[&str]),
                5 => Formula::eq(Self::var(r), Self::var(r)),
                _ => {
                    if self.scoped_loops {
                        match self.open.len() {
                            0 => Formula::rel("T", &[Self::var(r)]),
                            k => Formula::looping(&self.open[r.gen_range(0..k)].clone()),
                        }
                    } else {
                        Formula::looping(&format!("L{}", r.gen_range(0..self.labels + 1)))
                    }
                }
            };
        }
        let d = depth - 1;
        match r.gen_range(0..12) {
            0 => self.formula(r, d).negate(),
            1 => self.formula(r, d).and(self.formula(r, d)),
            2 => self.formula(r, d).or(self.formula(r, d)),
            3 => Formula::exists(Self::var(r), self.formula(r, d)),
            4 => Formula::forall(Self::var(r), self.formula(r, d)),
            5 => {
                let c = self.clock(r);
                Formula::insert_elem(Self::var(r), c, self.formula(r, d))
            }
            6 => Formula::delete_elem(Self::var(r), self.formula(r, d)),
            7 => Formula::insert("T", &[Self::var(r)], self.formula(r, d)),
            8 => Formula::delete("T", &[Self::var(r)], self.formula(r, d)),
            9 => Formula::insert("U", &[] as &[&str], self.formula(r, d)),
            10 => Formula::delete("R", &[Self::var(r), Self::var(r)], self.formula(r, d)),
            _ => {
                let name = format!("L{}", self.labels);
                self.labels += 1;
                let c = self.clock(r);
                self.open.push(name.clone());
                let body = self.formula(r, d);
                self.open.pop();
                Formula::label(&name, c, body)
            }
        }
    }
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<Elem>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, (n - 1) as Elem);
            out.push(q);
        }
    }
    out
}
