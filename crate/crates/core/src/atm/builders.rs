//! Formula generators for the machine compilers.
//!
//! Every builder loop inserts one tuple per round and is immediately
//! followed by a first-order guard that Abelard may check, so the only
//! moves that survive are the ones extending a correct partial
//! construction. The closing check (`chi_*`) re-verifies the whole object.

use std::cell::Cell;

use super::layout::{CellScheme, CompilationLayout};
use super::machine::{Atm, Dir, StateKind};
use crate::syntax::Formula;

type F = Formula;

#[derive(Clone, Copy)]
enum Dom {
    /// Every element.
    Raw,
    /// Input elements.
    Elem,
    /// Cells, `cell_arity` variables each.
    Cell,
}

/// Formula helpers over a layout. Bound variables are `t0, t1, ...` by
/// nesting depth, so siblings reuse names and nothing is captured.
pub(crate) struct Fo<'a> {
    pub(crate) l: &'a CompilationLayout,
    depth: Cell<usize>,
}

fn vars(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

impl<'a> Fo<'a> {
    pub(crate) fn new(l: &'a CompilationLayout) -> Self {
        Fo { l, depth: Cell::new(0) }
    }

    fn a(&self) -> usize {
        self.l.cell_arity()
    }

    fn bind(&self, exists: bool, dom: Dom, units: usize, body: impl FnOnce(&[String]) -> F) -> F {
        let k = match dom {
            Dom::Cell => units * self.a(),
            _ => units,
        };
        let d = self.depth.get();
        let vs: Vec<String> = (d..d + k).map(|i| format!("t{i}")).collect();
        self.depth.set(d + k);
        let b = body(&vs);
        self.depth.set(d);
        let guard = match dom {
            Dom::Raw => F::True,
            Dom::Elem => self.elems(&vs),
            Dom::Cell => F::conj(vs.chunks(self.a()).map(|c| self.is_cell(c)).filter(|g| *g != F::True)),
        };
        let b = match (guard, exists) {
            (F::True, _) => b,
            (g, true) => g.and(b),
            (g, false) => g.implies(b),
        };
        if exists {
            F::exists_all(&vs, b)
        } else {
            F::forall_all(&vs, b)
        }
    }

    fn ex(&self, dom: Dom, units: usize, body: impl FnOnce(&[String]) -> F) -> F {
        self.bind(true, dom, units, body)
    }

    fn all(&self, dom: Dom, units: usize, body: impl FnOnce(&[String]) -> F) -> F {
        self.bind(false, dom, units, body)
    }

    fn rel2(name: &str, x: &str, y: &str) -> F {
        F::rel(name, &[x, y])
    }

    fn cat(xs: &[&[String]]) -> Vec<String> {
        xs.iter().flat_map(|x| x.iter().cloned()).collect()
    }

    pub(crate) fn is_elem(&self, x: &str) -> F {
        match &self.l.new_mark {
            Some(n) => F::rel(n, &[x]).negate(),
            None => F::True,
        }
    }

    fn elems(&self, xs: &[String]) -> F {
        F::conj(xs.iter().map(|x| self.is_elem(x)).filter(|g| *g != F::True))
    }

    pub(crate) fn is_cell(&self, c: &[String]) -> F {
        match &self.l.new_mark {
            Some(n) => F::rel(n, &c[..1]),
            None => F::True,
        }
    }

    fn first_elem(&self, x: &str) -> F {
        self.ex(Dom::Raw, 1, |z| Self::rel2(&self.l.elem_succ, &z[0], x))
            .negate()
    }

    fn last_elem(&self, x: &str) -> F {
        self.ex(Dom::Raw, 1, |z| Self::rel2(&self.l.elem_succ, x, &z[0]))
            .negate()
    }

    fn tuple_first(&self, t: &[String]) -> F {
        F::conj(t.iter().map(|x| self.first_elem(x)))
    }

    fn tuple_last(&self, t: &[String]) -> F {
        F::conj(t.iter().map(|x| self.last_elem(x)))
    }

    /// Lexicographic successor on equally long tuples of input elements.
    fn tuple_succ(&self, t: &[String], s: &[String]) -> F {
        F::disj((0..t.len()).map(|i| {
            let mut parts: Vec<F> = (0..i).map(|j| F::eq(&t[j], &s[j])).collect();
            parts.push(Self::rel2(&self.l.elem_succ, &t[i], &s[i]));
            for j in i + 1..t.len() {
                parts.push(self.last_elem(&t[j]));
                parts.push(self.first_elem(&s[j]));
            }
            F::conj(parts)
        }))
    }

    pub(crate) fn cell_first(&self, c: &[String]) -> F {
        match (&self.l.scheme, &self.l.cell_succ) {
            (CellScheme::NewElements, Some(s)) => self
                .is_cell(c)
                .and(self.ex(Dom::Raw, 1, |z| Self::rel2(s, &z[0], &c[0])).negate()),
            _ => self.tuple_first(c),
        }
    }

    pub(crate) fn cell_succ(&self, c: &[String], d: &[String]) -> F {
        match (&self.l.scheme, &self.l.cell_succ) {
            (CellScheme::NewElements, Some(s)) => Self::rel2(s, &c[0], &d[0]),
            _ => self.tuple_succ(c, d),
        }
    }

    fn pred(name: &str, args: &[&[String]]) -> F {
        F::rel(name, &Self::cat(args))
    }

    fn has_bit(&self, c: &[String]) -> F {
        F::rel(&self.l.bit0, c).or(F::rel(&self.l.bit1, c))
    }

    fn same_cells(c: &[String], d: &[String]) -> F {
        F::eq_all(c, d)
    }

    // ---- the order builder ----

    /// `elem_order` is a strict linear order on input elements and
    /// `elem_succ` is its successor relation.
    pub(crate) fn chi_succ(&self) -> F {
        let (s, o) = (&self.l.elem_succ, &self.l.elem_order);
        let irreflexive = self.all(Dom::Elem, 1, |x| Self::rel2(o, &x[0], &x[0]).negate());
        let transitive = self.all(Dom::Elem, 3, |v| {
            Self::rel2(o, &v[0], &v[1])
                .and(Self::rel2(o, &v[1], &v[2]))
                .implies(Self::rel2(o, &v[0], &v[2]))
        });
        let total = self.all(Dom::Elem, 2, |v| {
            F::disj([
                F::eq(&v[0], &v[1]),
                Self::rel2(o, &v[0], &v[1]),
                Self::rel2(o, &v[1], &v[0]),
            ])
        });
        let successor = self.all(Dom::Elem, 2, |v| {
            let covers = Self::rel2(o, &v[0], &v[1]).and(
                self.ex(Dom::Elem, 1, |z| {
                    Self::rel2(o, &v[0], &z[0]).and(Self::rel2(o, &z[0], &v[1]))
                })
                .negate(),
            );
            Self::rel2(s, &v[0], &v[1]).iff(covers)
        });
        F::conj([irreflexive, transitive, total, successor])
    }

    /// One round of the order builder: extend the successor chain by a
    /// fresh element, or add an order pair implied by the chain.
    pub(crate) fn alpha_succ(&self) -> F {
        let (s, o) = (&self.l.elem_succ, &self.l.elem_order);
        let (u, v) = ("u1", "v1");
        let again = F::looping(&self.l.labels.succ);
        let fresh = F::conj([
            self.ex(Dom::Raw, 1, |z| Self::rel2(o, &z[0], v)).negate(),
            self.ex(Dom::Raw, 1, |z| Self::rel2(o, v, &z[0])).negate(),
            self.ex(Dom::Raw, 1, |z| Self::rel2(s, v, &z[0])).negate(),
            self.all(Dom::Raw, 1, |z| Self::rel2(s, &z[0], v).implies(F::eq(&z[0], u))),
        ]);
        let at_end = self.all(Dom::Raw, 1, |z| Self::rel2(s, u, &z[0]).implies(F::eq(&z[0], v)));
        let attached = self
            .ex(Dom::Raw, 1, |z| Self::rel2(s, &z[0], u))
            .or(self.all(Dom::Raw, 2, |w| {
                Self::rel2(s, &w[0], &w[1]).implies(F::eq(&w[0], u).and(F::eq(&w[1], v)))
            }));
        let closed = self.all(Dom::Raw, 2, |w| {
            let implied = Self::rel2(s, &w[0], &w[1]).or(self.ex(Dom::Raw, 1, |z| {
                Self::rel2(o, &w[0], &z[0]).and(Self::rel2(s, &z[0], &w[1]))
            }));
            F::neq(&w[1], v).implies(Self::rel2(o, &w[0], &w[1]).iff(implied))
        });
        let ok_s = F::conj([
            self.elems(&[u.into(), v.into()]),
            F::neq(u, v),
            fresh,
            at_end,
            attached,
            closed,
        ]);
        // order pairs into the chain end, nearest first
        let ok_o = F::conj([
            self.ex(Dom::Raw, 1, |z| Self::rel2(s, v, &z[0])).negate(),
            Self::rel2(s, u, v).or(self.ex(Dom::Raw, 1, |z| Self::rel2(s, u, &z[0]).and(Self::rel2(o, &z[0], v)))),
            self.ex(Dom::Raw, 1, |z| Self::rel2(s, &z[0], u).and(Self::rel2(o, &z[0], v)))
                .negate(),
        ]);
        F::insert(s, &[u, v], ok_s.and(again.clone())).or(F::insert(o, &[u, v], ok_o.and(again)))
    }

    /// `loop C_succ . ((~chi_succ & alpha_succ) | (chi_succ & then))`
    pub(crate) fn order_phase(&self, then: F) -> F {
        let chi = self.chi_succ();
        F::label(
            &self.l.labels.succ,
            None,
            chi.clone().negate().and(self.alpha_succ()).or(chi.and(then)),
        )
    }

    // ---- the encoding builder ----

    fn input_rels(&self) -> Vec<(String, usize)> {
        self.l.vocab.inputs().map(|(_, s)| (s.name.clone(), s.arity)).collect()
    }

    fn no_elems(&self) -> F {
        self.ex(Dom::Elem, 1, |_| F::True).negate()
    }

    /// The cell right after the unary size prefix.
    fn sep(&self, c: &[String]) -> F {
        let after_prefix = self.ex(Dom::Elem, 1, |x| {
            self.last_elem(&x[0]).and(self.ex(Dom::Cell, 1, |d| {
                Self::pred(&self.l.zpre, &[&x[..1], d]).and(self.cell_succ(d, c))
            }))
        });
        self.no_elems().and(self.cell_first(c)).or(after_prefix)
    }

    /// The last cell of segment `i` (0 is the separator, `i > 0` the
    /// `i`-th relation). An empty segment ends where the previous one did.
    fn seg_end(&self, i: usize, c: &[String]) -> F {
        if i == 0 {
            return self.sep(c);
        }
        let (_, ar) = self.input_rels()[i - 1].clone();
        let z = &self.l.zrel[i - 1];
        if ar == 0 {
            return F::rel(z, c);
        }
        let last = self.ex(Dom::Elem, ar, |t| self.tuple_last(t).and(Self::pred(z, &[t, c])));
        last.or(self.no_elems().and(self.seg_end(i - 1, c)))
    }

    /// The first cell of relation segment `i >= 1`.
    fn seg_start(&self, i: usize, c: &[String]) -> F {
        self.ex(Dom::Cell, 1, |d| self.seg_end(i - 1, d).and(self.cell_succ(d, c)))
    }

    fn seg_start_exists(&self, i: usize) -> F {
        self.ex(Dom::Cell, 1, |c| self.seg_start(i, c))
    }

    fn maps_done(&self) -> F {
        let m = self.input_rels().len();
        self.ex(Dom::Cell, 1, |c| self.seg_end(m, c))
    }

    fn bit1(&self, c: &[String]) -> F {
        let mut parts = vec![self.ex(Dom::Elem, 1, |x| Self::pred(&self.l.zpre, &[x, c]))];
        for (i, (r, ar)) in self.input_rels().into_iter().enumerate() {
            let z = &self.l.zrel[i];
            parts.push(self.ex(Dom::Elem, ar, |t| Self::pred(z, &[t, c]).and(F::rel(&r, t))));
        }
        F::disj(parts)
    }

    fn bit0(&self, c: &[String]) -> F {
        let mut parts = vec![self.sep(c)];
        for (i, (r, ar)) in self.input_rels().into_iter().enumerate() {
            let z = &self.l.zrel[i];
            parts.push(self.ex(Dom::Elem, ar, |t| Self::pred(z, &[t, c]).and(F::rel(&r, t).negate())));
        }
        F::disj(parts)
    }

    fn bits_done(&self) -> F {
        self.all(Dom::Raw, self.a(), |c| {
            self.bit0(c).or(self.bit1(c)).implies(self.has_bit(c))
        })
    }

    /// Correctness of one map from `ar`-tuples of elements to cells,
    /// starting at the cells satisfying `start`.
    fn map_ok(&self, z: &str, ar: usize, start: &dyn Fn(&[String]) -> F) -> F {
        let a = self.a();
        let domain = self.all(Dom::Raw, ar + a, |v| {
            let (t, c) = v.split_at(ar);
            Self::pred(z, &[t, c]).implies(self.elems(t).and(self.is_cell(c)))
        });
        let functional = self.all(Dom::Raw, ar + 2 * a, |v| {
            let (t, cd) = v.split_at(ar);
            let (c, d) = cd.split_at(a);
            Self::pred(z, &[t, c])
                .and(Self::pred(z, &[t, d]))
                .implies(Self::same_cells(c, d))
        });
        let total = self.all(Dom::Elem, ar, |t| self.ex(Dom::Cell, 1, |c| Self::pred(z, &[t, c])));
        let first = self.all(Dom::Raw, ar + a, |v| {
            let (t, c) = v.split_at(ar);
            Self::pred(z, &[t, c]).and(self.tuple_first(t)).implies(start(c))
        });
        let step = self.all(Dom::Raw, ar + a, |v| {
            let (t, c) = v.split_at(ar);
            Self::pred(z, &[t, c]).implies(self.all(Dom::Elem, ar, |s| {
                self.tuple_succ(t, s)
                    .implies(self.ex(Dom::Cell, 1, |d| Self::pred(z, &[s, d]).and(self.cell_succ(c, d))))
            }))
        });
        if ar == 0 {
            // a single cell
            return F::conj([domain, functional, total, first]);
        }
        F::conj([domain, functional, total, first, step])
    }

    /// The tape spells the encoding of the input under the built order, the
    /// head is on the first cell in the start state, and the maps are right.
    pub(crate) fn chi_enc(&self, atm: &Atm) -> F {
        let a = self.a();
        let mut parts = vec![self.map_ok(&self.l.zpre, 1, &|c| self.cell_first(c))];
        for (i, (_, ar)) in self.input_rels().into_iter().enumerate() {
            let z = self.l.zrel[i].clone();
            parts.push(self.map_ok(&z, ar, &|c| self.seg_start(i + 1, c)));
        }
        parts.push(self.all(Dom::Raw, a, |c| F::rel(&self.l.bit1, c).iff(self.bit1(c))));
        parts.push(self.all(Dom::Raw, a, |c| F::rel(&self.l.bit0, c).iff(self.bit0(c))));
        for x in &self.l.extra {
            parts.push(self.all(Dom::Raw, a, |c| F::rel(x, c).negate()));
        }
        parts.push(self.all(Dom::Raw, a, |c| F::rel(&self.l.head, c).iff(self.cell_first(c))));
        for (q, y) in self.l.head_state.iter().enumerate() {
            parts.push(self.all(Dom::Raw, a, |c| {
                if q == atm.start {
                    F::rel(y, c).iff(self.cell_first(c))
                } else {
                    F::rel(y, c).negate()
                }
            }));
        }
        F::conj(parts)
    }

    /// One round of the encoding builder. The maps are laid down first, in
    /// order, then the bits cell by cell, then the head.
    pub(crate) fn alpha_enc(&self, atm: &Atm) -> F {
        let a = self.a();
        let again = F::looping(&self.l.labels.enc);
        let c = vars("c", a);
        let unique =
            |z: &str, t: &[String]| self.all(Dom::Raw, a, |d| Self::pred(z, &[t, d]).implies(Self::same_cells(d, &c)));
        let mut moves = Vec::new();
        let rels = self.input_rels();
        let map_empty = |i: usize| {
            let ar = if i == 0 { 1 } else { rels[i - 1].1 };
            let z = if i == 0 { &self.l.zpre } else { &self.l.zrel[i - 1] };
            self.ex(Dom::Raw, ar + a, |v| F::rel(z, v)).negate()
        };
        let no_bits = self.ex(Dom::Raw, a, |d| self.has_bit(d)).negate();
        // nothing of a later stage has been written
        let later_empty = |i: usize| F::conj((i + 1..=rels.len()).map(map_empty).chain([no_bits.clone()]));

        let x = vars("e", 1);
        let pre_ok = F::conj([
            self.is_elem(&x[0]),
            self.is_cell(&c),
            unique(&self.l.zpre, &x),
            self.all(Dom::Raw, 1, |y| {
                Self::rel2(&self.l.elem_succ, &x[0], &y[0])
                    .implies(self.ex(Dom::Raw, a, |d| Self::pred(&self.l.zpre, &[y, d])).negate())
            }),
            later_empty(0),
            self.first_elem(&x[0])
                .and(self.cell_first(&c))
                .or(self.ex(Dom::Elem, 1, |y| {
                    Self::rel2(&self.l.elem_succ, &y[0], &x[0]).and(self.ex(Dom::Cell, 1, |d| {
                        Self::pred(&self.l.zpre, &[y, d]).and(self.cell_succ(d, &c))
                    }))
                })),
        ]);
        moves.push(later_empty(0).and(F::insert(
            &self.l.zpre,
            &Self::cat(&[&x, &c]),
            pre_ok.and(again.clone()),
        )));

        for (i, (_, ar)) in self.input_rels().into_iter().enumerate() {
            let z = &self.l.zrel[i];
            let t = vars("e", ar);
            let placed = if ar == 0 {
                self.seg_start(i + 1, &c)
            } else {
                self.tuple_first(&t)
                    .and(self.seg_start(i + 1, &c))
                    .or(self.ex(Dom::Elem, ar, |s| {
                        self.tuple_succ(s, &t)
                            .and(self.ex(Dom::Cell, 1, |d| Self::pred(z, &[s, d]).and(self.cell_succ(d, &c))))
                    }))
            };
            let frontier = self.all(Dom::Elem, ar, |s| {
                self.tuple_succ(&t, s)
                    .implies(self.ex(Dom::Raw, a, |d| Self::pred(z, &[s, d])).negate())
            });
            let ok = F::conj([
                self.elems(&t),
                self.is_cell(&c),
                unique(z, &t),
                placed,
                frontier,
                later_empty(i + 1),
            ]);
            let active = self.seg_start_exists(i + 1).and(later_empty(i + 1));
            moves.push(active.and(F::insert(z, &Self::cat(&[&t, &c]), ok.and(again.clone()))));
        }

        let in_order = F::conj([
            self.cell_first(&c)
                .or(self.ex(Dom::Cell, 1, |d| self.cell_succ(d, &c).and(self.has_bit(d)))),
            self.all(Dom::Raw, a, |d| self.cell_succ(&c, d).implies(self.has_bit(d).negate())),
            self.ex(Dom::Raw, a, |d| F::rel(&self.l.head, d)).negate(),
        ]);
        for (bit, other, want) in [
            (&self.l.bit1, &self.l.bit0, self.bit1(&c)),
            (&self.l.bit0, &self.l.bit1, self.bit0(&c)),
        ] {
            let ok = F::conj([self.maps_done(), want, F::rel(other, &c).negate(), in_order.clone()]);
            let active = self
                .maps_done()
                .and(self.ex(Dom::Raw, a, |d| F::rel(&self.l.head, d)).negate());
            moves.push(active.and(F::insert(bit, &c, ok.and(again.clone()))));
        }

        let head_ok = F::conj([
            self.bits_done(),
            self.cell_first(&c),
            self.all(Dom::Raw, a, |d| {
                F::rel(&self.l.head, d).implies(Self::same_cells(d, &c))
            }),
        ]);
        moves.push(
            self.bits_done()
                .and(F::insert(&self.l.head, &c, head_ok.and(again.clone()))),
        );
        let yq = &self.l.head_state[atm.start];
        let state_ok = F::rel(&self.l.head, &c).and(self.cell_first(&c));
        let placed = self.ex(Dom::Raw, a, |d| F::rel(&self.l.head, d));
        moves.push(placed.and(F::insert(yq, &c, state_ok.and(again))));
        F::disj(moves)
    }

    /// `loop C_enc . ((~chi_enc & alpha_enc) | (chi_enc & then))`
    pub(crate) fn encoding_phase(&self, atm: &Atm, then: F) -> F {
        let chi = self.chi_enc(atm);
        F::label(
            &self.l.labels.enc,
            None,
            chi.clone().negate().and(self.alpha_enc(atm)).or(chi.and(then)),
        )
    }

    // ---- the computation ----

    fn reads(&self, q: usize, sym: usize, c: &[String]) -> F {
        let mut parts = vec![F::rel(&self.l.head, c), F::rel(&self.l.head_state[q], c)];
        match self.l.symbol_pred(sym) {
            Some(p) => parts.push(F::rel(p, c)),
            None => {
                parts.push(F::rel(&self.l.bit0, c).negate());
                parts.push(F::rel(&self.l.bit1, c).negate());
                parts.extend(self.l.extra.iter().map(|x| F::rel(x, c).negate()));
            }
        }
        F::conj(parts)
    }

    fn after_halt(&self, atm: &Atm, q: usize) -> F {
        match atm.kind(q) {
            StateKind::Accept => F::True,
            StateKind::Reject => F::False,
            _ => F::looping(&self.l.labels.run),
        }
    }

    /// Eloise carries out one transition: rewrite the head cell, move the
    /// state marker to the neighbour, then move the head marker.
    fn step(&self, atm: &Atm, q: usize, read: usize, write: usize, dir: Dir, next: usize) -> F {
        let a = self.a();
        let u = vars("u", a);
        let v = vars("v", a);
        let head = |c: &[String]| F::rel(&self.l.head, c);
        let yq = &self.l.head_state[q];
        let yn = &self.l.head_state[next];
        let adjacent = match dir {
            Dir::Right => self.cell_succ(&u, &v),
            Dir::Left => self.cell_succ(&v, &u),
        };
        let no_head = self.all(Dom::Raw, a, |d| head(d).negate());
        let k3 = F::delete(
            &self.l.head,
            &u,
            no_head.and(F::insert(
                &self.l.head,
                &v,
                F::rel(yn, &v).and(self.after_halt(atm, next)),
            )),
        );
        let k2 = F::delete(yq, &u, head(&u).and(F::insert(yn, &v, adjacent.and(k3))));
        if read == write {
            return k2;
        }
        let k1 = match self.l.symbol_pred(write) {
            Some(p) => F::insert(p, &u, head(&u).and(k2)),
            None => k2,
        };
        match self.l.symbol_pred(read) {
            Some(p) => F::delete(p, &u, head(&u).and(k1)),
            None => k1,
        }
    }

    /// `phi'_{q,A} & (psi_1 | ... | psi_m)` for existential `q`, with `&`
    /// between the steps for universal `q`.
    pub(crate) fn transition_block(&self, atm: &Atm, q: usize, sym: usize) -> F {
        let guard = self.ex(Dom::Cell, 1, |c| self.reads(q, sym, c));
        let steps: Vec<F> = atm
            .delta
            .get(&(q, sym))
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(|t| self.step(atm, q, sym, t.write, t.dir, t.next))
            .collect();
        let body = match atm.kind(q) {
            StateKind::Universal => F::conj(steps),
            _ => F::disj(steps),
        };
        guard.and(body)
    }

    /// `loop C_loop . OR phi_{q,A}`, or the verdict of a halting start state.
    pub(crate) fn run_phase(&self, atm: &Atm) -> F {
        match atm.kind(atm.start) {
            StateKind::Accept => return F::True,
            StateKind::Reject => return F::False,
            _ => {}
        }
        let blocks = atm.delta.keys().map(|&(q, sym)| self.transition_block(atm, q, sym));
        F::label(&self.l.labels.run, None, F::disj(blocks))
    }

    // ---- the cell builder (new-element scheme) ----

    /// `loop C_build . Ix x[t] . ins N(y) . (y = x & (first | link))`: each
    /// round creates a cell and appends it to the `S` chain.
    pub(crate) fn build_phase(&self, bound: crate::syntax::ClockTerm, then: F) -> F {
        let n = self.l.new_mark.as_deref().expect("new-element layout");
        let s = self.l.cell_succ.as_deref().expect("new-element layout");
        let (x, y, z, w) = ("x", "y", "z", "w");
        let labels = &self.l.labels;
        let only = self.all(Dom::Raw, 1, |v| F::rel(n, &v[..1]).implies(F::eq(&v[0], x)));
        let first = only.and(F::label(&labels.next, None, F::looping(&labels.build).or(then)));
        let link_ok = F::conj([
            F::eq(w, x),
            F::rel(n, &[z]),
            F::neq(z, w),
            self.all(Dom::Raw, 1, |v| Self::rel2(s, z, &v[0]).implies(F::eq(&v[0], w))),
            self.all(Dom::Raw, 1, |v| Self::rel2(s, &v[0], w).implies(F::eq(&v[0], z))),
            self.ex(Dom::Raw, 1, |v| Self::rel2(s, w, &v[0])).negate(),
        ]);
        let link = F::insert(s, &[z, w], link_ok.and(F::looping(&labels.next)));
        let body = F::insert(n, &[y], F::eq(y, x).and(first.or(link)));
        F::label(&labels.build, None, F::insert_elem(x, Some(bound), body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atm::layout::CompilationLayout;
    use crate::game::fo_value;
    use crate::game::Value;
    use crate::structure::{GameState, Structure};
    use crate::syntax::{FormulaAst, Vocabulary};

    /// The layout's vocabulary with every symbol as an input, so test
    /// structures can populate tape predicates.
    fn flat(l: &CompilationLayout) -> Vocabulary {
        Vocabulary::from_inputs(l.vocab.iter().map(|(_, s)| (s.name.as_str(), s.arity))).unwrap()
    }

    fn holds(l: &CompilationLayout, f: &F, m: &Structure, g: &[(&str, u32)]) -> bool {
        let v = flat(l);
        let ast = FormulaAst::build(&v, f).unwrap();
        let mut st = GameState::new(m, &v, ast.vars().len()).unwrap();
        for (v, e) in g {
            st.assign(ast.var_id(v).unwrap(), *e);
        }
        fo_value(&ast, ast.root(), &st) == Value::Win
    }

    fn chain(l: &CompilationLayout, n: u32, order: &[u32], drop_pair: Option<(u32, u32)>) -> Structure {
        let v = flat(l);
        let mut m = Structure::empty(&v, n as usize);
        let s = v.lookup(&l.elem_succ).unwrap();
        let o = v.lookup(&l.elem_order).unwrap();
        for w in order.windows(2) {
            m.insert(s, &[w[0], w[1]]).unwrap();
        }
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                if drop_pair != Some((order[i], order[j])) {
                    m.insert(o, &[order[i], order[j]]).unwrap();
                }
            }
        }
        m
    }

    fn layout() -> CompilationLayout {
        let input = Vocabulary::from_inputs([("P", 1)]).unwrap();
        CompilationLayout::apspace(&Atm::even_ones(), &input, 1).unwrap()
    }

    #[test]
    fn chi_succ_on_hand_built_orders() {
        let l = layout();
        let fo = Fo::new(&l);
        let chi = fo.chi_succ();
        assert!(holds(&l, &chi, &chain(&l, 3, &[2, 0, 1], None), &[]));
        assert!(!holds(&l, &chi, &chain(&l, 3, &[2, 0, 1], Some((2, 1))), &[]));
        // successor skips element 1
        let mut m = chain(&l, 3, &[2, 0, 1], None);
        let s = flat(&l).lookup("S").unwrap();
        m.remove(s, &[0, 1]).unwrap();
        m.insert(s, &[2, 1]).unwrap();
        assert!(!holds(&l, &chi, &m, &[]));
        assert!(!holds(&l, &chi, &chain(&l, 3, &[2, 0], None), &[]));
    }

    #[test]
    fn tuple_successor_is_lexicographic() {
        let l = layout();
        let fo = Fo::new(&l);
        let m = chain(&l, 3, &[0, 1, 2], None);
        let c = vars("c", 2);
        let d = vars("d", 2);
        let f = fo.cell_succ(&c, &d);
        let cells: Vec<(u32, u32)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
        for (i, x) in cells.iter().enumerate() {
            for (j, y) in cells.iter().enumerate() {
                let g = [("c1", x.0), ("c2", x.1), ("d1", y.0), ("d2", y.1)];
                assert_eq!(holds(&l, &f, &m, &g), j == i + 1, "{x:?} {y:?}");
            }
        }
    }
}
