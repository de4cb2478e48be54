//! Formula trees.
//!
//! [`Formula`] is an owned tree convenient for construction (the parser and
//! the compilers both produce it). [`FormulaAst`] is the flattened, id-based
//! form the game engine works on: node ids are assigned in pre-order, and
//! variable and label tables are interned in order of first appearance, so
//! two trees with the same shape always flatten to equal arenas.

use std::collections::HashMap;

use thiserror::Error;

use super::clock::ClockTerm;
use super::vocab::{SymId, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u32);

macro_rules! index_impl {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    )*};
}
index_impl!(NodeId, VarId, LabelId);

/// Owned formula tree, names unresolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Rel(String, Vec<String>),
    Eq(String, String),
    Loop(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    InsertElem(String, Option<ClockTerm>, Box<Formula>),
    DeleteElem(String, Box<Formula>),
    InsertTuple(String, Vec<String>, Box<Formula>),
    DeleteTuple(String, Vec<String>, Box<Formula>),
    Label(String, Option<ClockTerm>, Box<Formula>),
}

impl Formula {
    pub fn rel<S: AsRef<str>>(sym: &str, vars: &[S]) -> Self {
        Formula::Rel(sym.into(), vars.iter().map(|v| v.as_ref().to_string()).collect())
    }

    pub fn eq(a: &str, b: &str) -> Self {
        Formula::Eq(a.into(), b.into())
    }

    pub fn neq(a: &str, b: &str) -> Self {
        Formula::eq(a, b).negate()
    }

    pub fn looping(label: &str) -> Self {
        Formula::Loop(label.into())
    }

    pub fn negate(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Self {
        self.negate().or(other)
    }

    pub fn iff(self, other: Formula) -> Self {
        self.clone().implies(other.clone()).and(other.implies(self))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn exists_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Self {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v.as_ref(), acc))
    }

    pub fn forall_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Self {
        vars.iter().rev().fold(body, |acc, v| Formula::forall(v.as_ref(), acc))
    }

    pub fn insert_elem(var: &str, clock: Option<ClockTerm>, body: Formula) -> Self {
        Formula::InsertElem(var.into(), clock, Box::new(body))
    }

    pub fn delete_elem(var: &str, body: Formula) -> Self {
        Formula::DeleteElem(var.into(), Box::new(body))
    }

    pub fn insert<S: AsRef<str>>(sym: &str, vars: &[S], body: Formula) -> Self {
        Formula::InsertTuple(
            sym.into(),
            vars.iter().map(|v| v.as_ref().to_string()).collect(),
            Box::new(body),
        )
    }

    pub fn delete<S: AsRef<str>>(sym: &str, vars: &[S], body: Formula) -> Self {
        Formula::DeleteTuple(
            sym.into(),
            vars.iter().map(|v| v.as_ref().to_string()).collect(),
            Box::new(body),
        )
    }

    pub fn label(name: &str, clock: Option<ClockTerm>, body: Formula) -> Self {
        Formula::Label(name.into(), clock, Box::new(body))
    }

    /// Balanced conjunction; `True` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Self {
        balanced(items.into_iter().collect(), Formula::True, Formula::and)
    }

    /// Balanced disjunction; `False` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Self {
        balanced(items.into_iter().collect(), Formula::False, Formula::or)
    }

    /// Pairwise equality of two equally long variable lists.
    pub fn eq_all<S: AsRef<str>>(xs: &[S], ys: &[S]) -> Self {
        Formula::conj(xs.iter().zip(ys).map(|(x, y)| Formula::eq(x.as_ref(), y.as_ref())))
    }
}

fn balanced(mut items: Vec<Formula>, empty: Formula, join: fn(Formula, Formula) -> Formula) -> Formula {
    match items.len() {
        0 => empty,
        1 => items.pop().unwrap(),
        n => {
            let right = items.split_off(n / 2);
            join(balanced(items, empty.clone(), join), balanced(right, empty, join))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeKind {
    True,
    False,
    Rel(SymId, Vec<VarId>),
    Eq(VarId, VarId),
    Loop(LabelId),
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Exists(VarId, NodeId),
    Forall(VarId, NodeId),
    InsertElem(VarId, Option<ClockTerm>, NodeId),
    DeleteElem(VarId, NodeId),
    InsertTuple(SymId, Vec<VarId>, NodeId),
    DeleteTuple(SymId, Vec<VarId>, NodeId),
    Label(LabelId, Option<ClockTerm>, NodeId),
}

impl NodeKind {
    pub fn clock(&self) -> Option<&ClockTerm> {
        match self {
            NodeKind::InsertElem(_, c, _) | NodeKind::Label(_, c, _) => c.as_ref(),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<NodeId> {
        match *self {
            NodeKind::True | NodeKind::False | NodeKind::Rel(..) | NodeKind::Eq(..) | NodeKind::Loop(..) => vec![],
            NodeKind::And(l, r) | NodeKind::Or(l, r) => vec![l, r],
            NodeKind::Not(c)
            | NodeKind::Exists(_, c)
            | NodeKind::Forall(_, c)
            | NodeKind::InsertElem(_, _, c)
            | NodeKind::DeleteElem(_, c)
            | NodeKind::InsertTuple(_, _, c)
            | NodeKind::DeleteTuple(_, _, c)
            | NodeKind::Label(_, _, c) => vec![c],
        }
    }

    /// Short operator name used in reports and DOT output.
    pub fn tag(&self) -> &'static str {
        match self {
            NodeKind::True => "top",
            NodeKind::False => "bot",
            NodeKind::Rel(..) => "atom",
            NodeKind::Eq(..) => "eq",
            NodeKind::Loop(..) => "loop-atom",
            NodeKind::Not(..) => "not",
            NodeKind::And(..) => "and",
            NodeKind::Or(..) => "or",
            NodeKind::Exists(..) => "exists",
            NodeKind::Forall(..) => "forall",
            NodeKind::InsertElem(..) => "Ix",
            NodeKind::DeleteElem(..) => "Dx",
            NodeKind::InsertTuple(..) => "ins",
            NodeKind::DeleteTuple(..) => "del",
            NodeKind::Label(..) => "label",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("undeclared relation symbol `{0}`")]
    UndeclaredSymbol(String),
}

/// Flattened formula with stable node ids (pre-order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaAst {
    vocab: Vocabulary,
    vars: Vec<String>,
    labels: Vec<String>,
    nodes: Vec<NodeKind>,
    // derived tables
    label_targets: Vec<Option<NodeId>>,
    pure_fo: Vec<bool>,
    clock_slots: Vec<Option<u32>>,
    clocked: Vec<NodeId>,
}

impl FormulaAst {
    /// Flattens `formula` against `vocab`. Only undeclared symbols are fatal;
    /// arity mismatches and duplicate labels are reported by `validate`.
    pub fn build(vocab: &Vocabulary, formula: &Formula) -> Result<Self, BuildError> {
        let mut b = Builder {
            vocab,
            vars: Vec::new(),
            var_ix: HashMap::new(),
            labels: Vec::new(),
            label_ix: HashMap::new(),
            nodes: Vec::new(),
        };
        b.node(formula)?;
        let Builder {
            vars, labels, nodes, ..
        } = b;
        Ok(Self::from_parts(vocab.clone(), vars, labels, nodes))
    }

    fn from_parts(vocab: Vocabulary, vars: Vec<String>, labels: Vec<String>, nodes: Vec<NodeKind>) -> Self {
        let mut label_targets = vec![None; labels.len()];
        let mut clock_slots = vec![None; nodes.len()];
        let mut clocked = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            if let NodeKind::Label(l, _, _) = n {
                // first definition wins when a name is duplicated
                label_targets[l.index()].get_or_insert(NodeId(i as u32));
            }
            if n.clock().is_some() {
                clock_slots[i] = Some(clocked.len() as u32);
                clocked.push(NodeId(i as u32));
            }
        }
        // children always have larger ids, so a reverse sweep sees them first
        let mut pure_fo = vec![false; nodes.len()];
        for i in (0..nodes.len()).rev() {
            pure_fo[i] = match &nodes[i] {
                NodeKind::True | NodeKind::False | NodeKind::Rel(..) | NodeKind::Eq(..) => true,
                NodeKind::Not(c) | NodeKind::Exists(_, c) | NodeKind::Forall(_, c) => pure_fo[c.index()],
                NodeKind::And(l, r) | NodeKind::Or(l, r) => pure_fo[l.index()] && pure_fo[r.index()],
                _ => false,
            };
        }
        Self {
            vocab,
            vars,
            labels,
            nodes,
            label_targets,
            pure_fo,
            clock_slots,
            clocked,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeKind)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i as u32), n))
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.index()]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v == name).map(|i| VarId(i as u32))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_name(&self, l: LabelId) -> &str {
        &self.labels[l.index()]
    }

    /// The Label node a loop atom jumps to, if any.
    pub fn label_target(&self, l: LabelId) -> Option<NodeId> {
        self.label_targets[l.index()]
    }

    /// True when the subtree contains no looping, labels or model updates.
    pub fn is_pure_fo(&self, id: NodeId) -> bool {
        self.pure_fo[id.index()]
    }

    /// Clock slot of a clocked node (dense index into position clock vectors).
    pub fn clock_slot(&self, id: NodeId) -> Option<usize> {
        self.clock_slots[id.index()].map(|s| s as usize)
    }

    /// Clocked nodes in slot order.
    pub fn clocked_nodes(&self) -> &[NodeId] {
        &self.clocked
    }

    /// Rebuilds the owned tree.
    pub fn to_formula(&self) -> Formula {
        self.formula_at(self.root())
    }

    pub fn formula_at(&self, id: NodeId) -> Formula {
        let var = |v: &VarId| self.vars[v.index()].clone();
        let vars = |vs: &[VarId]| vs.iter().map(var).collect::<Vec<_>>();
        let sub = |c: &NodeId| Box::new(self.formula_at(*c));
        match self.node(id) {
            NodeKind::True => Formula::True,
            NodeKind::False => Formula::False,
            NodeKind::Rel(s, vs) => Formula::Rel(self.vocab.name(*s).into(), vars(vs)),
            NodeKind::Eq(a, b) => Formula::Eq(var(a), var(b)),
            NodeKind::Loop(l) => Formula::Loop(self.labels[l.index()].clone()),
            NodeKind::Not(c) => Formula::Not(sub(c)),
            NodeKind::And(l, r) => Formula::And(sub(l), sub(r)),
            NodeKind::Or(l, r) => Formula::Or(sub(l), sub(r)),
            NodeKind::Exists(v, c) => Formula::Exists(var(v), sub(c)),
            NodeKind::Forall(v, c) => Formula::Forall(var(v), sub(c)),
            NodeKind::InsertElem(v, k, c) => Formula::InsertElem(var(v), k.clone(), sub(c)),
            NodeKind::DeleteElem(v, c) => Formula::DeleteElem(var(v), sub(c)),
            NodeKind::InsertTuple(s, vs, c) => Formula::InsertTuple(self.vocab.name(*s).into(), vars(vs), sub(c)),
            NodeKind::DeleteTuple(s, vs, c) => Formula::DeleteTuple(self.vocab.name(*s).into(), vars(vs), sub(c)),
            NodeKind::Label(l, k, c) => Formula::Label(self.labels[l.index()].clone(), k.clone(), sub(c)),
        }
    }

    /// Subtree depth (number of nodes on the longest root path).
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            depth[i] = 1 + self.nodes[i]
                .children()
                .iter()
                .map(|c| depth[c.index()])
                .max()
                .unwrap_or(0);
        }
        depth.first().copied().unwrap_or(0)
    }
}

struct Builder<'a> {
    vocab: &'a Vocabulary,
    vars: Vec<String>,
    var_ix: HashMap<String, VarId>,
    labels: Vec<String>,
    label_ix: HashMap<String, LabelId>,
    nodes: Vec<NodeKind>,
}

impl Builder<'_> {
    fn var(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.var_ix.get(name) {
            return v;
        }
        let v = VarId(self.vars.len() as u32);
        self.vars.push(name.to_string());
        self.var_ix.insert(name.to_string(), v);
        v
    }

    fn label(&mut self, name: &str) -> LabelId {
        if let Some(&l) = self.label_ix.get(name) {
            return l;
        }
        let l = LabelId(self.labels.len() as u32);
        self.labels.push(name.to_string());
        self.label_ix.insert(name.to_string(), l);
        l
    }

    fn sym(&self, name: &str) -> Result<SymId, BuildError> {
        self.vocab
            .lookup(name)
            .ok_or_else(|| BuildError::UndeclaredSymbol(name.to_string()))
    }

    fn node(&mut self, f: &Formula) -> Result<NodeId, BuildError> {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(NodeKind::True);
        let kind = match f {
            Formula::True => NodeKind::True,
            Formula::False => NodeKind::False,
            Formula::Rel(s, vs) => {
                let s = self.sym(s)?;
                NodeKind::Rel(s, vs.iter().map(|v| self.var(v)).collect())
            }
            Formula::Eq(a, b) => {
                let a = self.var(a);
                NodeKind::Eq(a, self.var(b))
            }
            Formula::Loop(l) => NodeKind::Loop(self.label(l)),
            Formula::Not(c) => NodeKind::Not(self.node(c)?),
            Formula::And(l, r) => {
                let l = self.node(l)?;
                NodeKind::And(l, self.node(r)?)
            }
            Formula::Or(l, r) => {
                let l = self.node(l)?;
                NodeKind::Or(l, self.node(r)?)
            }
            Formula::Exists(v, c) => {
                let v = self.var(v);
                NodeKind::Exists(v, self.node(c)?)
            }
            Formula::Forall(v, c) => {
                let v = self.var(v);
                NodeKind::Forall(v, self.node(c)?)
            }
            Formula::InsertElem(v, k, c) => {
                let v = self.var(v);
                NodeKind::InsertElem(v, k.clone(), self.node(c)?)
            }
            Formula::DeleteElem(v, c) => {
                let v = self.var(v);
                NodeKind::DeleteElem(v, self.node(c)?)
            }
            Formula::InsertTuple(s, vs, c) => {
                let s = self.sym(s)?;
                let vs = vs.iter().map(|v| self.var(v)).collect();
                NodeKind::InsertTuple(s, vs, self.node(c)?)
            }
            Formula::DeleteTuple(s, vs, c) => {
                let s = self.sym(s)?;
                let vs = vs.iter().map(|v| self.var(v)).collect();
                NodeKind::DeleteTuple(s, vs, self.node(c)?)
            }
            Formula::Label(l, k, c) => {
                let l = self.label(l);
                NodeKind::Label(l, k.clone(), self.node(c)?)
            }
        };
        self.nodes[id.index()] = kind;
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::from_inputs([("P", 1), ("R", 2)]).unwrap()
    }

    #[test]
    fn preorder_ids_and_tables() {
        let f = Formula::label(
            "L",
            None,
            Formula::rel("P", &["x"]).or(Formula::exists("y", Formula::rel("R", &["x", "y"]))),
        );
        let ast = FormulaAst::build(&vocab(), &f).unwrap();
        assert_eq!(ast.len(), 5);
        assert!(matches!(ast.node(NodeId(0)), NodeKind::Label(..)));
        assert!(matches!(ast.node(NodeId(1)), NodeKind::Or(..)));
        assert!(matches!(ast.node(NodeId(2)), NodeKind::Rel(..)));
        assert!(matches!(ast.node(NodeId(3)), NodeKind::Exists(..)));
        assert_eq!(ast.vars(), ["x", "y"]);
        assert_eq!(ast.label_target(LabelId(0)), Some(NodeId(0)));
        assert!(!ast.is_pure_fo(NodeId(0)));
        assert!(ast.is_pure_fo(NodeId(1)));
        assert_eq!(ast.to_formula(), f);
    }

    #[test]
    fn undeclared_symbol_is_fatal() {
        let f = Formula::rel("Q", &["x"]);
        assert_eq!(
            FormulaAst::build(&vocab(), &f),
            Err(BuildError::UndeclaredSymbol("Q".into()))
        );
    }

    #[test]
    fn unresolved_loop_atom_has_no_target() {
        let ast = FormulaAst::build(&vocab(), &Formula::looping("L")).unwrap();
        assert_eq!(ast.label_target(LabelId(0)), None);
    }

    #[test]
    fn clock_slots_follow_preorder() {
        let f = Formula::label(
            "A",
            Some(ClockTerm::constant(3)),
            Formula::insert_elem("v", Some(ClockTerm::constant(2)), Formula::looping("A")),
        );
        let ast = FormulaAst::build(&vocab(), &f).unwrap();
        assert_eq!(ast.clocked_nodes(), [NodeId(0), NodeId(1)]);
        assert_eq!(ast.clock_slot(NodeId(1)), Some(1));
        assert_eq!(ast.clock_slot(NodeId(2)), None);
    }

    #[test]
    fn balanced_connectives() {
        assert_eq!(Formula::conj(vec![]), Formula::True);
        assert_eq!(Formula::disj(vec![]), Formula::False);
        let c = Formula::conj((0..8).map(|_| Formula::True));
        let ast = FormulaAst::build(&vocab(), &c).unwrap();
        assert_eq!(ast.depth(), 4);
    }
}
