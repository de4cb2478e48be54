use std::cmp::Ordering;

/// Opaque domain element id.
pub type Elem = u32;

/// A finite relation stored as a flat, lexicographically sorted run of
/// fixed-width tuples. Nullary relations hold zero or one empty tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    arity: usize,
    len: usize,
    data: Vec<Elem>,
}

impl Relation {
    pub fn new(arity: usize) -> Self {
        Self {
            arity,
            len: 0,
            data: Vec::new(),
        }
    }

    pub fn from_tuples<I, T>(arity: usize, tuples: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[Elem]>,
    {
        let mut r = Self::new(arity);
        for t in tuples {
            r.insert(t.as_ref());
        }
        r
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn tuple(&self, i: usize) -> &[Elem] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Elem]> + '_ {
        (0..self.len).map(move |i| self.tuple(i))
    }

    fn search(&self, t: &[Elem]) -> Result<usize, usize> {
        debug_assert_eq!(t.len(), self.arity);
        let (mut lo, mut hi) = (0, self.len);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.tuple(mid).cmp(t) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Ok(mid),
            }
        }
        Err(lo)
    }

    pub fn contains(&self, t: &[Elem]) -> bool {
        self.search(t).is_ok()
    }

    /// Set union with `{t}`; returns whether the relation grew.
    pub fn insert(&mut self, t: &[Elem]) -> bool {
        match self.search(t) {
            Ok(_) => false,
            Err(i) => {
                let at = i * self.arity;
                self.data.splice(at..at, t.iter().copied());
                self.len += 1;
                true
            }
        }
    }

    /// Set difference with `{t}`; returns whether the relation shrank.
    pub fn remove(&mut self, t: &[Elem]) -> bool {
        match self.search(t) {
            Ok(i) => {
                self.data.drain(i * self.arity..(i + 1) * self.arity);
                self.len -= 1;
                true
            }
            Err(_) => false,
        }
    }

    /// Drops every tuple mentioning `e`.
    pub fn remove_element(&mut self, e: Elem) {
        if self.arity == 0 {
            return;
        }
        let a = self.arity;
        let mut out = Vec::with_capacity(self.data.len());
        for t in self.data.chunks_exact(a) {
            if !t.contains(&e) {
                out.extend_from_slice(t);
            }
        }
        self.len = out.len() / a;
        self.data = out;
    }

    /// Renames elements through an order-preserving map, which keeps the
    /// tuple run sorted.
    pub fn rename_monotone(&mut self, f: impl Fn(Elem) -> Elem) {
        for x in &mut self.data {
            *x = f(*x);
        }
        debug_assert!((1..self.len).all(|i| self.tuple(i - 1) < self.tuple(i)));
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        self.data.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_semantics() {
        let mut r = Relation::new(2);
        assert!(r.insert(&[0, 1]));
        assert!(!r.insert(&[0, 1]));
        assert!(r.insert(&[0, 0]));
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![&[0, 0][..], &[0, 1][..]]);
        assert!(!r.remove(&[1, 1]));
        assert!(r.remove(&[0, 0]));
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn nullary() {
        let mut r = Relation::new(0);
        assert!(!r.contains(&[]));
        assert!(r.insert(&[]));
        assert!(!r.insert(&[]));
        assert_eq!(r.iter().count(), 1);
        r.remove_element(3);
        assert!(r.contains(&[]));
    }

    #[test]
    fn cascade_removal() {
        let mut r = Relation::from_tuples(2, [[0, 1], [1, 2], [2, 2]]);
        r.remove_element(1);
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![&[2, 2][..]]);
    }
}
