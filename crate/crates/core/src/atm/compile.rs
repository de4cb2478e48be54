use num_traits::ToPrimitive;

use super::builders::Fo;
use super::layout::{CompilationLayout, CompileError};
use super::machine::{Atm, SmallAccept, SpaceBound};
use crate::structure::{decode, encoding_len, rank_tuple, ElementOrder, Structure};
use crate::syntax::{ClockTerm, Formula, FormulaAst, Vocabulary};

/// A compiled machine: the formula over the input vocabulary plus tape
/// predicates, and the layout that names them.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub formula: Formula,
    pub ast: FormulaAst,
    pub layout: CompilationLayout,
    /// Sizes below this are answered by the small-model table.
    pub n0: usize,
}

/// How many sizes past `n0` the fit check looks at.
const FIT_HORIZON: usize = 64;

/// Smallest `n0` such that `cells(n)` holds the encoding plus one blank for
/// every checked `n >= n0`.
fn fit_threshold(input: &Vocabulary, cells: impl Fn(usize) -> Option<u128>, from: usize) -> usize {
    let mut n0 = 0;
    for n in 0..from + FIT_HORIZON {
        let need = encoding_len(input, n) as u128 + 1;
        if cells(n).is_some_and(|c| c < need) {
            n0 = n + 1;
        }
    }
    n0
}

fn check_small(atm: &Atm, needed: usize) -> Result<usize, CompileError> {
    let n0 = atm.small.as_ref().map_or(0, |s| s.n0);
    if n0 < needed {
        return Err(CompileError::SmallTableTooShort {
            size: needed - 1,
            needed,
            n0,
        });
    }
    Ok(n0)
}

/// `exists x1..xn` distinct.
fn at_least(n: usize) -> Formula {
    let xs: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
    let mut distinct = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            distinct.push(Formula::neq(&xs[i], &xs[j]));
        }
    }
    Formula::exists_all(&xs, Formula::conj(distinct))
}

/// A sentence true exactly on the structures isomorphic to `m`.
pub fn diagram(m: &Structure) -> Formula {
    let n = m.size();
    let xs: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
    let order = ElementOrder::natural(m);
    let mut parts = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            parts.push(Formula::neq(&xs[i], &xs[j]));
        }
    }
    if n == 0 {
        parts.push(at_least(1).negate());
    } else {
        parts.push(Formula::forall(
            "m_",
            Formula::disj(xs.iter().map(|x| Formula::eq("m_", x))),
        ));
    }
    for (sym, name, rel) in m.iter_relations() {
        let ar = m.vocab().arity(sym);
        let count = (n as u128).pow(ar as u32);
        for j in 0..count {
            let t = rank_tuple(j, ar, &order).expect("rank in range");
            let args: Vec<&str> = t.iter().map(|e| xs[order.rank(*e).unwrap()].as_str()).collect();
            let atom = Formula::rel(name, &args);
            parts.push(if rel.contains(&t) { atom } else { atom.negate() });
        }
    }
    Formula::exists_all(&xs, Formula::conj(parts))
}

/// `(small & table) | (~small & main)`; just `main` when `n0 = 0`.
fn wrap_small(atm: &Atm, input: &Vocabulary, n0: usize, main: Formula) -> Result<Formula, CompileError> {
    if n0 == 0 {
        return Ok(main);
    }
    let small = at_least(n0).negate();
    let table = match atm.small.as_ref().map(|s| &s.accept) {
        Some(SmallAccept::All) => Formula::True,
        Some(SmallAccept::None) | None => Formula::False,
        Some(SmallAccept::List(list)) => {
            let mut ds = Vec::new();
            for e in list {
                let m = decode(input, e).map_err(|_| CompileError::BadSmallEncoding(e.clone()))?;
                if m.size() < n0 {
                    ds.push(diagram(&m));
                }
            }
            Formula::disj(ds)
        }
    };
    Ok(small.clone().and(table).or(small.negate().and(main)))
}

fn finish(formula: Formula, layout: CompilationLayout, n0: usize) -> Result<Compiled, CompileError> {
    let ast = FormulaAst::build(&layout.vocab, &formula).map_err(|e| CompileError::Internal(e.to_string()))?;
    Ok(Compiled {
        formula,
        ast,
        layout,
        n0,
    })
}

/// Compiles a machine working in space `n^(k+1)` into an unclocked formula
/// without `Ix`. The tape is the set of `(k+1)`-tuples of input elements.
///
/// The formula is true on a structure of size `n >= n0` iff the machine
/// accepts its encoding; below `n0` it follows the machine's table.
pub fn compile_apspace(atm: &Atm, k: u32, input: &Vocabulary) -> Result<Compiled, CompileError> {
    atm.validate()?;
    let layout = CompilationLayout::apspace(atm, input, k)?;
    let cells = |n: usize| available_cells(&SpaceBound::Poly(k), n);
    let n0 = check_small(atm, fit_threshold(input, cells, atm.small.as_ref().map_or(0, |s| s.n0)))?;
    let fo = Fo::new(&layout);
    let run = fo.run_phase(atm);
    let main = fo.order_phase(fo.encoding_phase(atm, run));
    let formula = wrap_small(atm, input, n0, main)?;
    finish(formula, layout, n0)
}

/// Compiles a machine working in space `bound(n)` into a formula whose only
/// clock sits on its single `Ix`: the tape is made of created elements.
pub fn compile_kexpspace(atm: &Atm, bound: &ClockTerm, input: &Vocabulary) -> Result<Compiled, CompileError> {
    atm.validate()?;
    let layout = CompilationLayout::kexpspace(atm, input)?;
    let space = SpaceBound::Clock(bound.clone());
    let cells = |n: usize| Some(available_cells(&space, n).unwrap_or(u128::MAX));
    let n0 = check_small(atm, fit_threshold(input, cells, atm.small.as_ref().map_or(0, |s| s.n0)))?;
    let fo = Fo::new(&layout);
    let rest = fo.order_phase(fo.encoding_phase(atm, fo.run_phase(atm)));
    let main = fo.build_phase(bound.clone(), rest);
    let formula = wrap_small(atm, input, n0, main)?;
    finish(formula, layout, n0)
}

/// Cells a machine with this space bound may use at size `n`.
pub fn available_cells(space: &SpaceBound, n: usize) -> Option<u128> {
    match space {
        SpaceBound::Poly(k) => (n as u128).checked_pow(k + 1),
        SpaceBound::Clock(t) => t.eval_capped(n as u64, 120).ok().and_then(|v| v.to_u128()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{check_truth, Truth};
    use crate::structure::enumerate_structures;
    use crate::syntax::{classify_fragment, is_valid};

    fn unary() -> Vocabulary {
        Vocabulary::from_inputs([("P", 1)]).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<u32>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, (n - 1) as u32);
                out.push(q);
            }
        }
        out
    }

    fn isomorphic(a: &Structure, b: &Structure) -> bool {
        a.size() == b.size()
            && permutations(a.size()).iter().any(|p| {
                a.iter_relations()
                    .zip(b.iter_relations())
                    .all(|((_, _, ra), (_, _, rb))| {
                        ra.len() == rb.len()
                            && ra
                                .iter()
                                .all(|t| rb.contains(&t.iter().map(|e| p[*e as usize]).collect::<Vec<_>>()))
                    })
            })
    }

    #[test]
    fn diagrams_pin_down_isomorphism_types() {
        let v = Vocabulary::from_inputs([("P", 1), ("E", 2), ("B", 0)]).unwrap();
        let ms: Vec<Structure> = (0..4)
            .flat_map(|n| enumerate_structures(&v, n).step_by(97).take(12))
            .collect();
        for a in &ms {
            let ast = FormulaAst::build(&v, &diagram(a)).unwrap();
            for b in &ms {
                let truth = check_truth(&ast, b, &[], Some(1_000_000)).unwrap();
                assert_eq!(truth == Truth::True, isomorphic(a, b), "{a}\nvs\n{b}");
            }
        }
    }

    #[test]
    fn fit_threshold_for_pairs() {
        // 2n+2 cells needed, n^2 available
        assert_eq!(fit_threshold(&unary(), |n| Some((n * n) as u128), 0), 3);
        assert_eq!(fit_threshold(&unary(), |n| Some((n * n * n) as u128), 0), 2);
        assert_eq!(fit_threshold(&unary(), |n| Some(3 * n as u128 + 2), 0), 0);
    }

    #[test]
    fn compiled_formulas_are_valid_and_in_fragment() {
        let atm = Atm::even_ones();
        let c = compile_apspace(&atm, 1, &unary()).unwrap();
        assert!(is_valid(&c.ast));
        let r = classify_fragment(&c.ast);
        assert!(r.in_t_minus_ix);
        assert_eq!(c.n0, 3);

        let mut exp = Atm::even_ones();
        exp.small = None;
        let bound: ClockTerm = crate::syntax::parse_clock_term("3*n^1+2").unwrap();
        let c = compile_kexpspace(&exp, &bound, &unary()).unwrap();
        assert!(is_valid(&c.ast));
        let r = classify_fragment(&c.ast);
        assert!(!r.in_t_minus_ix);
        assert_eq!(r.in_t_ix_kexp, Some(0));
        assert_eq!(c.n0, 0);
        assert_eq!(c.ast.clocked_nodes().len(), 1);
    }

    #[test]
    fn missing_small_table_is_an_error() {
        let mut atm = Atm::even_ones();
        atm.small = None;
        assert!(matches!(
            compile_apspace(&atm, 1, &unary()),
            Err(CompileError::SmallTableTooShort { needed: 3, .. })
        ));
    }
}
