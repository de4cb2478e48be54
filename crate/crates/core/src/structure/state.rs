use super::model::{Structure, StructureError};
use super::relation::{Elem, Relation};
use crate::syntax::{SymId, SymbolKind, VarId, Vocabulary};

/// Model snapshot during a play: domain, every relation of the game
/// vocabulary (inputs and tape predicates alike, indexed by [`SymId`]) and the
/// variable assignment (indexed by [`VarId`]).
///
/// The vocabulary itself is not stored; callers pass the one the state was
/// built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    domain: Vec<Elem>,
    next_id: Elem,
    rels: Vec<Relation>,
    assignment: Vec<Option<Elem>>,
}

impl GameState {
    /// Initial state: `m`'s relations copied by name, tape predicates empty,
    /// every variable unassigned.
    pub fn new(m: &Structure, vocab: &Vocabulary, num_vars: usize) -> Result<Self, StructureError> {
        let mut rels = Vec::with_capacity(vocab.len());
        for (_, s) in vocab.iter() {
            let rel = match s.kind {
                SymbolKind::Tape => Relation::new(s.arity),
                SymbolKind::Input => {
                    let r = m
                        .relation_by_name(&s.name)
                        .ok_or_else(|| StructureError::MissingRelation(s.name.clone()))?;
                    if r.arity() != s.arity {
                        return Err(StructureError::ArityMismatch {
                            symbol: s.name.clone(),
                            expected: s.arity,
                            found: r.arity(),
                        });
                    }
                    r.clone()
                }
            };
            rels.push(rel);
        }
        Ok(Self {
            domain: m.domain().to_vec(),
            next_id: m.domain().last().map_or(0, |e| e + 1),
            rels,
            assignment: vec![None; num_vars],
        })
    }

    pub fn domain(&self) -> &[Elem] {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.domain.binary_search(&e).is_ok()
    }

    pub fn relation(&self, sym: SymId) -> &Relation {
        &self.rels[sym.index()]
    }

    pub fn holds(&self, sym: SymId, t: &[Elem]) -> bool {
        self.rels[sym.index()].contains(t)
    }

    pub fn value(&self, v: VarId) -> Option<Elem> {
        self.assignment[v.index()]
    }

    pub fn assignment(&self) -> &[Option<Elem>] {
        &self.assignment
    }

    pub fn assign(&mut self, v: VarId, e: Elem) {
        debug_assert!(self.contains(e));
        self.assignment[v.index()] = Some(e);
    }

    /// Adds a fresh element, never equal to any id used before in this state's
    /// history, leaving every relation unchanged.
    pub fn add_element(&mut self) -> Elem {
        let e = self.next_id;
        self.next_id += 1;
        self.domain.push(e);
        e
    }

    /// Removes `e` with every tuple mentioning it; variables naming `e`
    /// become undefined.
    pub fn remove_element(&mut self, e: Elem) {
        let Ok(i) = self.domain.binary_search(&e) else {
            debug_assert!(false, "removing absent element {e}");
            return;
        };
        self.domain.remove(i);
        for r in &mut self.rels {
            r.remove_element(e);
        }
        for a in &mut self.assignment {
            if *a == Some(e) {
                *a = None;
            }
        }
    }

    fn check_tuple(&self, vocab: &Vocabulary, sym: SymId, t: &[Elem]) -> Result<(), StructureError> {
        let expected = self.rels[sym.index()].arity();
        if expected != t.len() {
            return Err(StructureError::ArityMismatch {
                symbol: vocab.name(sym).to_string(),
                expected,
                found: t.len(),
            });
        }
        match t.iter().find(|e| !self.contains(**e)) {
            Some(e) => Err(StructureError::NotInDomain(*e)),
            None => Ok(()),
        }
    }

    /// `R := R ∪ {t}`.
    pub fn insert_tuple(&mut self, vocab: &Vocabulary, sym: SymId, t: &[Elem]) -> Result<bool, StructureError> {
        self.check_tuple(vocab, sym, t)?;
        Ok(self.rels[sym.index()].insert(t))
    }

    /// `R := R \ {t}`.
    pub fn delete_tuple(&mut self, vocab: &Vocabulary, sym: SymId, t: &[Elem]) -> Result<bool, StructureError> {
        self.check_tuple(vocab, sym, t)?;
        Ok(self.rels[sym.index()].remove(t))
    }

    /// Unchecked variants for the move generator, which only produces
    /// in-domain tuples of the right arity.
    pub(crate) fn insert_raw(&mut self, sym: SymId, t: &[Elem]) {
        self.rels[sym.index()].insert(t);
    }

    pub(crate) fn delete_raw(&mut self, sym: SymId, t: &[Elem]) {
        self.rels[sym.index()].remove(t);
    }

    /// Renames the domain to `0..n` preserving the relative order of ids.
    /// States reached by histories that differ only in which fresh ids were
    /// allocated become equal.
    pub fn canonicalize(&mut self) {
        let n = self.domain.len() as Elem;
        if self.next_id == n {
            return;
        }
        let domain = std::mem::take(&mut self.domain);
        let rank = |e: Elem| domain.binary_search(&e).expect("in domain") as Elem;
        for r in &mut self.rels {
            r.rename_monotone(rank);
        }
        for a in self.assignment.iter_mut().flatten() {
            *a = rank(*a);
        }
        self.domain = (0..n).collect();
        self.next_id = n;
    }

    pub fn is_canonical(&self) -> bool {
        self.next_id == self.domain.len() as Elem
    }

    /// The current model restricted to the input symbols of `vocab`.
    pub fn input_structure(&self, vocab: &Vocabulary) -> Structure {
        let mut m = Structure::with_domain(vocab, self.domain.clone());
        for (id, s) in vocab.inputs() {
            let local = m.vocab().lookup(&s.name).expect("input symbol");
            for t in self.rels[id.index()].iter() {
                m.insert(local, t).expect("state invariant");
            }
        }
        m
    }

    /// Checks that every tuple and assigned value lies in the domain.
    pub fn audit(&self) -> Result<(), StructureError> {
        if !self.domain.windows(2).all(|w| w[0] < w[1]) {
            return Err(StructureError::BadOrder);
        }
        if self.domain.last().is_some_and(|e| *e >= self.next_id) {
            return Err(StructureError::BadOrder);
        }
        for r in &self.rels {
            if let Some(e) = r.elements().find(|e| !self.contains(*e)) {
                return Err(StructureError::NotInDomain(e));
            }
        }
        if let Some(e) = self.assignment.iter().flatten().find(|e| !self.contains(**e)) {
            return Err(StructureError::NotInDomain(*e));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Vocabulary, GameState) {
        let mut v = Vocabulary::from_inputs([("R", 2)]).unwrap();
        v.add_tape("X", 1).unwrap();
        let mut m = Structure::empty(&v, 2);
        m.insert(SymId(0), &[0, 1]).unwrap();
        let s = GameState::new(&m, &v, 2).unwrap();
        (v, s)
    }

    #[test]
    fn add_is_fresh_and_keeps_relations() {
        let (_, mut s) = setup();
        let before = s.relation(SymId(0)).clone();
        let a = s.add_element();
        let b = s.add_element();
        assert_eq!((a, b), (2, 3));
        assert_eq!(s.domain(), &[0, 1, 2, 3]);
        assert_eq!(s.relation(SymId(0)), &before);
        assert!(s.relation(SymId(1)).is_empty());

        let m = Structure::empty(&Vocabulary::new(), 0);
        let mut e = GameState::new(&m, &Vocabulary::new(), 0).unwrap();
        assert_eq!(e.add_element(), 0);
    }

    #[test]
    fn remove_cascades() {
        let (_, mut s) = setup();
        s.assign(VarId(0), 1);
        s.assign(VarId(1), 1);
        s.remove_element(1);
        assert_eq!(s.domain(), &[0]);
        assert!(s.relation(SymId(0)).is_empty());
        assert_eq!(s.value(VarId(0)), None);
        assert_eq!(s.value(VarId(1)), None);
        let e = s.add_element();
        assert_ne!(e, 1);
        s.audit().unwrap();
    }

    #[test]
    fn tuple_updates_are_set_operations() {
        let (v, mut s) = setup();
        assert!(!s.insert_tuple(&v, SymId(0), &[0, 1]).unwrap());
        assert!(s.delete_tuple(&v, SymId(0), &[0, 1]).unwrap());
        assert!(!s.delete_tuple(&v, SymId(0), &[0, 1]).unwrap());
        assert!(s.insert_tuple(&v, SymId(1), &[1]).unwrap());
        assert!(s.delete_tuple(&v, SymId(1), &[1]).unwrap());
        assert!(s.relation(SymId(1)).is_empty());
        assert!(matches!(
            s.insert_tuple(&v, SymId(0), &[0]),
            Err(StructureError::ArityMismatch { .. })
        ));
        assert!(s.insert_tuple(&v, SymId(0), &[0, 7]).is_err());
    }

    #[test]
    fn canonical_renaming_merges_histories() {
        let (_, mut a) = setup();
        let mut b = a.clone();
        // a: delete 0 then add; b: add then delete 0
        a.remove_element(0);
        let x = a.add_element();
        a.assign(VarId(0), x);
        let y = b.add_element();
        b.assign(VarId(0), y);
        b.remove_element(0);
        a.canonicalize();
        b.canonicalize();
        assert_eq!(a, b);
        assert!(a.is_canonical());
        a.audit().unwrap();
    }

    #[test]
    fn missing_input_relation() {
        let v = Vocabulary::from_inputs([("R", 2)]).unwrap();
        let m = Structure::empty(&Vocabulary::new(), 1);
        assert!(GameState::new(&m, &v, 0).is_err());
    }
}
