//! Finite relational structures, the mutations used by game moves, and the
//! binary encoding of a structure under a linear order.

mod enumerate;
mod model;
mod relation;
mod state;

pub use enumerate::{count_structures, enumerate_structures, random_structure, relation_bits};
pub use model::{
    decode, encode, encoding_len, parse_structure, rank_tuple, tuple_rank, ElementOrder, ModelFile, Structure,
    StructureError,
};
pub use relation::{Elem, Relation};
pub use state::GameState;
