use rand::Rng;

use super::model::{decode, encoding_len, Structure};
use crate::syntax::Vocabulary;

/// Number of bits describing the relations of a size-`n` structure, or `None`
/// if it does not fit a `u32`.
pub fn relation_bits(vocab: &Vocabulary, n: usize) -> Option<u32> {
    let bits = encoding_len(vocab, n) - n - 1;
    u32::try_from(bits).ok()
}

/// Number of structures with domain `0..n`, saturating at `u128::MAX`.
pub fn count_structures(vocab: &Vocabulary, n: usize) -> u128 {
    match relation_bits(vocab, n) {
        Some(b) if b < 128 => 1u128 << b,
        _ => u128::MAX,
    }
}

/// Every structure with domain `0..n`, ordered by the integer value of
/// their relation bits.
pub fn enumerate_structures(vocab: &Vocabulary, n: usize) -> impl Iterator<Item = Structure> + '_ {
    let bits = relation_bits(vocab, n).expect("enumeration too large");
    assert!(bits < 64, "enumeration too large");
    (0..1u64 << bits).map(move |mask| {
        let mut s = "1".repeat(n);
        s.push('0');
        s.extend((0..bits).map(|i| if mask >> (bits - 1 - i) & 1 == 1 { '1' } else { '0' }));
        decode(vocab, &s).expect("well-formed by construction")
    })
}

/// A structure with domain `0..n` whose tuples are present independently
/// with probability `density`.
pub fn random_structure<R: Rng + ?Sized>(vocab: &Vocabulary, n: usize, density: f64, rng: &mut R) -> Structure {
    let bits = relation_bits(vocab, n).expect("structure too large");
    let mut s = "1".repeat(n);
    s.push('0');
    s.extend((0..bits).map(|_| if rng.gen_bool(density) { '1' } else { '0' }));
    decode(vocab, &s).expect("well-formed by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{encode, ElementOrder};
    use rand::SeedableRng;
    use std::collections::HashSet;

    #[test]
    fn enumeration_is_complete_and_distinct() {
        let v = Vocabulary::from_inputs([("P", 1), ("R", 2)]).unwrap();
        let all: Vec<_> = enumerate_structures(&v, 2).collect();
        assert_eq!(all.len() as u128, count_structures(&v, 2));
        assert_eq!(all.len(), 64);
        let encs: HashSet<_> = all.iter().map(|m| encode(m, &ElementOrder::natural(m))).collect();
        assert_eq!(encs.len(), 64);
    }

    #[test]
    fn empty_domain_has_nullary_choices_only() {
        let v = Vocabulary::from_inputs([("P", 1), ("Z", 0)]).unwrap();
        assert_eq!(enumerate_structures(&v, 0).count(), 2);
    }

    #[test]
    fn random_is_seeded() {
        let v = Vocabulary::from_inputs([("R", 2)]).unwrap();
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            random_structure(&v, 3, 0.5, &mut a),
            random_structure(&v, 3, 0.5, &mut b)
        );
    }
}
