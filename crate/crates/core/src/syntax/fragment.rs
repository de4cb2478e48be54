//! Fragment membership and well-formedness checks.

use std::collections::HashMap;
use std::fmt;

use super::ast::{FormulaAst, NodeId, NodeKind};

/// Which clocked/restricted fragments a formula belongs to. The `Option`
/// fields carry the least tower height `k` for which the formula is in the
/// fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FragmentReport {
    /// No element insertion at all.
    pub in_t_minus_ix: bool,
    /// No element insertion, every label clocked by a polynomial.
    pub in_t_pol: bool,
    /// Every label clocked; least admissible tower height.
    pub in_t_kexp: Option<u32>,
    /// Every element insertion clocked; least admissible tower height.
    pub in_t_ix_kexp: Option<u32>,
    /// Every label clocked with any tower height.
    pub in_t_allexp: bool,
}

pub fn classify_fragment(ast: &FormulaAst) -> FragmentReport {
    let mut has_ix = false;
    let mut labels_clocked = true;
    let mut ix_clocked = true;
    let mut label_height = 0;
    let mut ix_height = 0;
    for (_, node) in ast.nodes() {
        match node {
            NodeKind::Label(_, clock, _) => match clock {
                Some(c) => label_height = label_height.max(c.height),
                None => labels_clocked = false,
            },
            NodeKind::InsertElem(_, clock, _) => {
                has_ix = true;
                match clock {
                    Some(c) => ix_height = ix_height.max(c.height),
                    None => ix_clocked = false,
                }
            }
            _ => {}
        }
    }
    FragmentReport {
        in_t_minus_ix: !has_ix,
        in_t_pol: !has_ix && labels_clocked && label_height == 0,
        in_t_kexp: labels_clocked.then_some(label_height),
        in_t_ix_kexp: ix_clocked.then_some(ix_height),
        in_t_allexp: labels_clocked,
    }
}

impl fmt::Display for FragmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = |o: Option<u32>| match o {
            Some(k) => format!("yes (k = {k})"),
            None => "no".to_string(),
        };
        let b = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "{:<16} member", "fragment")?;
        writeln!(f, "{:<16} {}", "T[-Ix]", b(self.in_t_minus_ix))?;
        writeln!(f, "{:<16} {}", "T[Pol]", b(self.in_t_pol))?;
        writeln!(f, "{:<16} {}", "T[kExp]", k(self.in_t_kexp))?;
        writeln!(f, "{:<16} {}", "T[Ix|kExp]", k(self.in_t_ix_kexp))?;
        write!(f, "{:<16} {}", "T[allExp]", b(self.in_t_allexp))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    DuplicateLabel(String),
    /// A loop atom with no label of that name anywhere in the formula.
    UnresolvedLoopAtom(String),
    /// A label name that is also a relation symbol, which makes the bare
    /// atom ambiguous in the concrete syntax.
    LabelShadowsSymbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub severity: Severity,
    pub node: NodeId,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at node {}: ", self.node.0)?;
        match &self.kind {
            ViolationKind::ArityMismatch {
                symbol,
                expected,
                found,
            } => write!(f, "`{symbol}` has arity {expected}, used with {found}"),
            ViolationKind::DuplicateLabel(l) => write!(f, "label `{l}` defined more than once"),
            ViolationKind::UnresolvedLoopAtom(l) => {
                write!(
                    f,
                    "loop atom `{l}` has no matching label (plays reaching it end undecided)"
                )
            }
            ViolationKind::LabelShadowsSymbol(l) => {
                write!(f, "label `{l}` clashes with a relation symbol")
            }
        }
    }
}

/// All invariant violations; unresolved loop atoms are warnings only.
pub fn validate(ast: &FormulaAst) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: HashMap<&str, NodeId> = HashMap::new();
    for (id, node) in ast.nodes() {
        match node {
            NodeKind::Rel(s, vs) | NodeKind::InsertTuple(s, vs, _) | NodeKind::DeleteTuple(s, vs, _) => {
                let expected = ast.vocab().arity(*s);
                if expected != vs.len() {
                    out.push(Violation {
                        severity: Severity::Error,
                        node: id,
                        kind: ViolationKind::ArityMismatch {
                            symbol: ast.vocab().name(*s).to_string(),
                            expected,
                            found: vs.len(),
                        },
                    });
                }
            }
            NodeKind::Label(l, _, _) => {
                let name = ast.label_name(*l);
                if seen.insert(name, id).is_some() {
                    out.push(Violation {
                        severity: Severity::Error,
                        node: id,
                        kind: ViolationKind::DuplicateLabel(name.to_string()),
                    });
                }
                if ast.vocab().lookup(name).is_some() {
                    out.push(Violation {
                        severity: Severity::Error,
                        node: id,
                        kind: ViolationKind::LabelShadowsSymbol(name.to_string()),
                    });
                }
            }
            NodeKind::Loop(l) if ast.label_target(*l).is_none() => out.push(Violation {
                severity: Severity::Warning,
                node: id,
                kind: ViolationKind::UnresolvedLoopAtom(ast.label_name(*l).to_string()),
            }),
            _ => {}
        }
    }
    out
}

/// True when `validate` reports no errors (warnings allowed).
pub fn is_valid(ast: &FormulaAst) -> bool {
    validate(ast).iter().all(|v| v.severity == Severity::Warning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, ClockTerm, Formula, Vocabulary};

    fn vocab() -> Vocabulary {
        Vocabulary::from_inputs([("P", 1), ("R", 2)]).unwrap()
    }

    const REACH: &str = "loop L . (P(x) | exists y . (R(x,y) & exists x . (y = x & L)))";

    #[test]
    fn reachability_is_minus_ix_but_not_pol() {
        let r = classify_fragment(&parse_formula(REACH, &vocab()).unwrap());
        assert!(r.in_t_minus_ix);
        assert!(!r.in_t_pol);
        assert_eq!(r.in_t_kexp, None);
        assert!(!r.in_t_allexp);
    }

    #[test]
    fn polynomial_clock_label() {
        let r = classify_fragment(&parse_formula("loop L[2*n^1+0] . L", &vocab()).unwrap());
        assert!(r.in_t_pol);
        assert_eq!(r.in_t_kexp, Some(0));
        assert!(r.in_t_allexp);
    }

    #[test]
    fn clocked_insertion() {
        let r = classify_fragment(&parse_formula("loop L . Ix v[1*exp(1,n^1)+0] . L", &vocab()).unwrap());
        assert_eq!(r.in_t_ix_kexp, Some(1));
        assert!(!r.in_t_minus_ix);
        assert!(!r.in_t_pol);
        assert_eq!(r.in_t_kexp, None);
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&parse_formula(REACH, &vocab()).unwrap()).is_empty());

        let dup = Formula::label("L", None, Formula::True).and(Formula::label("L", None, Formula::True));
        let ast = crate::syntax::FormulaAst::build(&vocab(), &dup).unwrap();
        let v = validate(&ast);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::DuplicateLabel("L".into()));

        let v = validate(&parse_formula("L", &vocab()).unwrap());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Warning);
        assert!(is_valid(&parse_formula("L", &vocab()).unwrap()));
    }

    #[test]
    fn arity_violation_from_builder() {
        let f = Formula::rel("R", &["x"]);
        let ast = crate::syntax::FormulaAst::build(&vocab(), &f).unwrap();
        assert!(matches!(validate(&ast)[0].kind, ViolationKind::ArityMismatch { .. }));
    }

    #[test]
    fn pol_implies_kexp_zero() {
        let f = Formula::label("A", Some(ClockTerm::constant(4)), Formula::looping("A"));
        let ast = crate::syntax::FormulaAst::build(&vocab(), &f).unwrap();
        let r = classify_fragment(&ast);
        assert!(r.in_t_pol && r.in_t_kexp == Some(0));
    }
}
