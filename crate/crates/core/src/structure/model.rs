use std::fmt;

use thiserror::Error;

use super::relation::{Elem, Relation};
use crate::syntax::{SymId, SymbolKind, Vocabulary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("`{symbol}` has arity {expected}, tuple has {found} components")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("element {0} is not in the domain")]
    NotInDomain(Elem),
    #[error("order does not list every domain element exactly once")]
    BadOrder,
    #[error("rank {rank} out of range for {count} tuples")]
    RankOutOfRange { rank: u128, count: u128 },
    #[error("relation `{0}` is missing from the model")]
    MissingRelation(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("encoding is malformed: {0}")]
    BadEncoding(String),
}

/// A finite relational structure over the input symbols of its vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    vocab: Vocabulary,
    domain: Vec<Elem>,
    rels: Vec<Relation>,
}

impl Structure {
    /// Structure with domain `0..n` and all relations empty. Tape symbols in
    /// `vocab` are dropped.
    pub fn empty(vocab: &Vocabulary, n: usize) -> Self {
        let vocab = vocab.input_part();
        let rels = vocab.iter().map(|(_, s)| Relation::new(s.arity)).collect();
        Self {
            vocab,
            domain: (0..n as Elem).collect(),
            rels,
        }
    }

    /// Structure over an arbitrary set of element ids.
    pub fn with_domain(vocab: &Vocabulary, mut domain: Vec<Elem>) -> Self {
        domain.sort_unstable();
        domain.dedup();
        let mut s = Self::empty(vocab, 0);
        s.domain = domain;
        s
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
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

    pub fn relation_by_name(&self, name: &str) -> Option<&Relation> {
        self.vocab.lookup(name).map(|s| self.relation(s))
    }

    pub fn insert(&mut self, sym: SymId, t: &[Elem]) -> Result<bool, StructureError> {
        self.check_tuple(sym, t)?;
        Ok(self.rels[sym.index()].insert(t))
    }

    pub fn remove(&mut self, sym: SymId, t: &[Elem]) -> Result<bool, StructureError> {
        self.check_tuple(sym, t)?;
        Ok(self.rels[sym.index()].remove(t))
    }

    fn check_tuple(&self, sym: SymId, t: &[Elem]) -> Result<(), StructureError> {
        let expected = self.vocab.arity(sym);
        if expected != t.len() {
            return Err(StructureError::ArityMismatch {
                symbol: self.vocab.name(sym).to_string(),
                expected,
                found: t.len(),
            });
        }
        match t.iter().find(|e| !self.contains(**e)) {
            Some(e) => Err(StructureError::NotInDomain(*e)),
            None => Ok(()),
        }
    }

    pub fn iter_relations(&self) -> impl Iterator<Item = (SymId, &str, &Relation)> {
        self.vocab
            .iter()
            .map(move |(id, s)| (id, s.name.as_str(), &self.rels[id.index()]))
    }
}

/// A linear order listing every domain element once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementOrder {
    order: Vec<Elem>,
    // (element, rank) sorted by element
    ranks: Vec<(Elem, usize)>,
}

impl ElementOrder {
    pub fn new(order: Vec<Elem>, m: &Structure) -> Result<Self, StructureError> {
        let mut ranks: Vec<(Elem, usize)> = order.iter().copied().zip(0..).collect();
        ranks.sort_unstable();
        if ranks.len() != m.size() || ranks.iter().zip(m.domain()).any(|((e, _), d)| e != d) {
            return Err(StructureError::BadOrder);
        }
        Ok(Self { order, ranks })
    }

    /// The order of increasing element ids.
    pub fn natural(m: &Structure) -> Self {
        Self::new(m.domain().to_vec(), m).expect("domain is a valid order")
    }

    pub fn elems(&self) -> &[Elem] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn rank(&self, e: Elem) -> Option<usize> {
        self.ranks
            .binary_search_by_key(&e, |(x, _)| *x)
            .ok()
            .map(|i| self.ranks[i].1)
    }
}

/// Position of `t` in the lexicographic enumeration of `M^|t|` under `o`.
pub fn tuple_rank(t: &[Elem], o: &ElementOrder) -> Result<u128, StructureError> {
    let n = o.len() as u128;
    let mut r: u128 = 0;
    for e in t {
        let k = o.rank(*e).ok_or(StructureError::NotInDomain(*e))?;
        r = r * n + k as u128;
    }
    Ok(r)
}

/// Inverse of [`tuple_rank`].
pub fn rank_tuple(j: u128, arity: usize, o: &ElementOrder) -> Result<Vec<Elem>, StructureError> {
    let n = o.len() as u128;
    let count = n.checked_pow(arity as u32).unwrap_or(u128::MAX);
    if j >= count {
        return Err(StructureError::RankOutOfRange { rank: j, count });
    }
    let mut t = vec![0; arity];
    let mut j = j;
    for slot in t.iter_mut().rev() {
        *slot = o.elems()[(j % n) as usize];
        j /= n;
    }
    Ok(t)
}

/// Number of bits in the encoding of a structure of size `n`.
pub fn encoding_len(vocab: &Vocabulary, n: usize) -> usize {
    n + 1 + vocab.inputs().map(|(_, s)| n.pow(s.arity as u32)).sum::<usize>()
}

/// The binary encoding: `1^n 0` followed by one bit per tuple of each input
/// relation, relations in canonical order, tuples in lexicographic order.
pub fn encode(m: &Structure, o: &ElementOrder) -> String {
    let n = m.size();
    let mut out = String::with_capacity(encoding_len(m.vocab(), n));
    out.extend(std::iter::repeat_n('1', n));
    out.push('0');
    for (_, s) in m.vocab().inputs() {
        let rel = m.relation_by_name(&s.name).expect("own symbol");
        let count = n.pow(s.arity as u32);
        let mut bits = vec![b'0'; count];
        for t in rel.iter() {
            let r = tuple_rank(t, o).expect("tuples lie in the domain") as usize;
            bits[r] = b'1';
        }
        out.push_str(std::str::from_utf8(&bits).expect("ascii"));
    }
    out
}

/// Inverse of [`encode`] under the natural order of `0..n`.
pub fn decode(vocab: &Vocabulary, bits: &str) -> Result<Structure, StructureError> {
    let bad = |m: &str| StructureError::BadEncoding(m.to_string());
    if bits.chars().any(|c| c != '0' && c != '1') {
        return Err(bad("expected only 0 and 1"));
    }
    let n = bits.find('0').ok_or_else(|| bad("missing size terminator"))?;
    if bits.len() != encoding_len(vocab, n) {
        return Err(bad("length does not match the vocabulary"));
    }
    let mut m = Structure::empty(vocab, n);
    let o = ElementOrder::natural(&m);
    let bytes = bits.as_bytes();
    let mut pos = n + 1;
    let syms: Vec<(SymId, usize)> = m.vocab().iter().map(|(id, s)| (id, s.arity)).collect();
    for (id, arity) in syms {
        for j in 0..n.pow(arity as u32) {
            if bytes[pos + j] == b'1' {
                let t = rank_tuple(j as u128, arity, &o)?;
                m.insert(id, &t)?;
            }
        }
        pos += n.pow(arity as u32);
    }
    Ok(m)
}

/// A model file: the structure plus any tape predicates it declares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub structure: Structure,
    /// Input relations followed by declared tape predicates.
    pub vocab: Vocabulary,
}

fn parse_decl(rest: &str, line: usize) -> Result<(String, usize), StructureError> {
    let err = |msg: String| StructureError::Parse { line, msg };
    let (name, arity) = rest
        .split_once('/')
        .ok_or_else(|| err(format!("expected NAME/ARITY, found `{rest}`")))?;
    let arity = arity
        .trim()
        .parse()
        .map_err(|_| err(format!("bad arity `{}`", arity.trim())))?;
    Ok((name.trim().to_string(), arity))
}

fn parse_tuples(body: &str, line: usize) -> Result<Vec<Vec<Elem>>, StructureError> {
    let err = |msg: &str| StructureError::Parse {
        line,
        msg: msg.to_string(),
    };
    let body = body.trim();
    let inner = body
        .strip_prefix('{')
        .and_then(|b| b.strip_suffix('}'))
        .ok_or_else(|| err("expected `{...}`"))?
        .trim();
    let mut out = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let t;
        if let Some(r) = rest.strip_prefix('(') {
            let close = r.find(')').ok_or_else(|| err("unclosed `(`"))?;
            let items = r[..close].trim();
            t = if items.is_empty() {
                Vec::new()
            } else {
                items
                    .split(',')
                    .map(|x| x.trim().parse::<Elem>().map_err(|_| err("bad element")))
                    .collect::<Result<Vec<_>, _>>()?
            };
            rest = r[close + 1..].trim_start();
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            let x = rest[..end].trim().parse::<Elem>().map_err(|_| err("bad element"))?;
            t = vec![x];
            rest = &rest[end..];
        }
        out.push(t);
        rest = match rest.strip_prefix(',') {
            Some(r) => r.trim_start(),
            None if rest.is_empty() => rest,
            None => return Err(err("expected `,` between tuples")),
        };
    }
    Ok(out)
}

/// Parses the line-oriented model format:
///
/// ```text
/// domain 3
/// rel P/1
/// rel R/2
/// tape X/1
/// P = {0, 2}
/// R = {(0,1), (1,2)}
/// ```
///
/// Elements are `0..N`; nullary relations are written `{()}` or `{}`.
pub fn parse_structure(text: &str) -> Result<ModelFile, StructureError> {
    let mut n: Option<usize> = None;
    let mut vocab = Vocabulary::new();
    let mut assigned: Vec<(SymId, Vec<Vec<Elem>>, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let err = |msg: String| StructureError::Parse { line, msg };
        let vocab_err = |e: crate::syntax::VocabError| err(e.to_string());
        if let Some(rest) = l.strip_prefix("domain ") {
            if n.is_some() {
                return Err(err("duplicate `domain` line".into()));
            }
            n = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| err(format!("bad domain size `{}`", rest.trim())))?,
            );
        } else if let Some(rest) = l.strip_prefix("rel ") {
            let (name, arity) = parse_decl(rest, line)?;
            vocab.add_input(&name, arity).map_err(vocab_err)?;
        } else if let Some(rest) = l.strip_prefix("tape ") {
            let (name, arity) = parse_decl(rest, line)?;
            vocab.add_tape(&name, arity).map_err(vocab_err)?;
        } else if let Some((name, body)) = l.split_once('=') {
            let name = name.trim();
            let sym = vocab
                .lookup(name)
                .ok_or_else(|| err(format!("relation `{name}` not declared")))?;
            if vocab.symbol(sym).kind == SymbolKind::Tape {
                return Err(err(format!("tape predicate `{name}` starts empty")));
            }
            assigned.push((sym, parse_tuples(body, line)?, line));
        } else {
            return Err(err(format!("unrecognized line `{l}`")));
        }
    }
    let n = n.ok_or(StructureError::Parse {
        line: 0,
        msg: "missing `domain` line".into(),
    })?;
    let mut m = Structure::empty(&vocab, n);
    for (sym, tuples, line) in assigned {
        let name = vocab.name(sym);
        let local = m.vocab().lookup(name).expect("inputs kept");
        for t in tuples {
            m.insert(local, &t).map_err(|e| StructureError::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
    }
    Ok(ModelFile { structure: m, vocab })
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.domain.iter().zip(0..).any(|(e, i)| *e != i) {
            writeln!(f, "# element ids: {:?}", self.domain)?;
        }
        writeln!(f, "domain {}", self.size())?;
        for (_, s) in self.vocab.iter() {
            writeln!(f, "rel {}/{}", s.name, s.arity)?;
        }
        for (_, name, rel) in self.iter_relations() {
            let tuples: Vec<String> = rel
                .iter()
                .map(|t| {
                    let items: Vec<String> = t.iter().map(|e| e.to_string()).collect();
                    format!("({})", items.join(","))
                })
                .collect();
            writeln!(f, "{name} = {{{}}}", tuples.join(", "))?;
        }
        Ok(())
    }
}
