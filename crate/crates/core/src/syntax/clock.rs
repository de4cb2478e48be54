//! Clock terms: polynomials in the domain size `n`, optionally lifted into a
//! tower of exponentials, `c * exp(k, p) + d`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Default bit-length cap used by the solver when materialising clocks.
pub const DEFAULT_MAX_CLOCK_BITS: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClockError {
    #[error("polynomial must have at least one monomial")]
    EmptyPolynomial,
    #[error("polynomial exponents must be strictly decreasing")]
    ExponentOrder,
    #[error("clock value needs more than {max_bits} bits")]
    TooLarge { max_bits: u64 },
}

/// A polynomial `a_1 n^e_1 + ... + a_m n^e_m` with strictly decreasing
/// exponents. Zero coefficients are kept as written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyTerm {
    monomials: Vec<(u64, u32)>,
}

impl PolyTerm {
    pub fn new(monomials: Vec<(u64, u32)>) -> Result<Self, ClockError> {
        if monomials.is_empty() {
            return Err(ClockError::EmptyPolynomial);
        }
        if monomials.windows(2).any(|w| w[0].1 <= w[1].1) {
            return Err(ClockError::ExponentOrder);
        }
        Ok(Self { monomials })
    }

    pub fn constant(c: u64) -> Self {
        Self {
            monomials: vec![(c, 0)],
        }
    }

    /// `a * n + b`.
    pub fn linear(a: u64, b: u64) -> Self {
        Self {
            monomials: vec![(a, 1), (b, 0)],
        }
    }

    pub fn monomials(&self) -> &[(u64, u32)] {
        &self.monomials
    }

    pub fn eval(&self, n: u64) -> BigUint {
        let n = BigUint::from(n);
        self.monomials
            .iter()
            .fold(BigUint::zero(), |acc, &(c, e)| acc + BigUint::from(c) * n.pow(e))
    }

    /// True when some monomial with a positive exponent has a nonzero coefficient.
    pub fn is_nonconstant(&self) -> bool {
        self.monomials.iter().any(|&(c, e)| c > 0 && e > 0)
    }
}

impl fmt::Display for PolyTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, e)) in self.monomials.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*n^{e}")?;
        }
        Ok(())
    }
}

/// `coeff * tower(height, poly) + offset`, where `tower(0, p) = p` and
/// `tower(k+1, p) = 2^tower(k, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClockTerm {
    pub coeff: u64,
    pub height: u32,
    pub poly: PolyTerm,
    pub offset: u64,
}

impl ClockTerm {
    pub fn poly(poly: PolyTerm) -> Self {
        Self {
            coeff: 1,
            height: 0,
            poly,
            offset: 0,
        }
    }

    pub fn tower(coeff: u64, height: u32, poly: PolyTerm, offset: u64) -> Self {
        Self {
            coeff,
            height,
            poly,
            offset,
        }
    }

    pub fn constant(c: u64) -> Self {
        Self::poly(PolyTerm::constant(c))
    }

    /// Exact value at domain size `n`. Panics if an exponent in the tower
    /// does not fit in memory; use [`ClockTerm::eval_capped`] for untrusted input.
    pub fn eval(&self, n: u64) -> BigUint {
        self.eval_capped(n, u64::MAX)
            .expect("clock value exceeds addressable size")
    }

    pub fn eval_capped(&self, n: u64, max_bits: u64) -> Result<BigUint, ClockError> {
        let too_large = ClockError::TooLarge { max_bits };
        let mut v = self.poly.eval(n);
        for _ in 0..self.height {
            // 2^v has v+1 bits
            let exp = v.to_u64().ok_or(too_large.clone())?;
            if exp >= max_bits || exp > usize::MAX as u64 / 2 {
                return Err(too_large);
            }
            v = BigUint::one() << exp as usize;
        }
        let v = BigUint::from(self.coeff) * v + BigUint::from(self.offset);
        if v.bits() > max_bits {
            return Err(too_large);
        }
        Ok(v)
    }

    pub fn is_plain_poly(&self) -> bool {
        self.coeff == 1 && self.height == 0 && self.offset == 0
    }
}

impl fmt::Display for ClockTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_plain_poly() {
            write!(f, "{}", self.poly)
        } else {
            write!(f, "{}*exp({},{})+{}", self.coeff, self.height, self.poly, self.offset)
        }
    }
}
