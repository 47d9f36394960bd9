//! Elliptic divisibility sequences: `mP = (A_m/B_m², C_m/B_m³)` and the
//! laws the denominators `B_m` satisfy.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{self, Effort};
use crate::curve::{Curve, Point};
use crate::error::{Error, Result};

/// One term of the sequence. `b_m` is normalized positive; signs live in
/// `a_m` and `c_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdsTerm {
    pub m: u64,
    pub a_m: BigInt,
    pub b_m: BigUint,
    pub c_m: BigInt,
}

impl EdsTerm {
    /// Reads `(A, B, C)` off an affine multiple.
    fn from_point(m: u64, p: &Point) -> Result<EdsTerm> {
        let (x, y) = match p {
            Point::Affine { x, y } => (x, y),
            Point::Infinity => {
                return Err(Error::hypothesis(format!("{m}P is the point at infinity")))
            }
        };
        let xden = x.denom().magnitude();
        let b_m = arith::exact_root(xden, 2)
            .ok_or_else(|| Error::fault(format!("x-denominator of {m}P is not a square")))?;
        if *y.denom().magnitude() != b_m.pow(3) {
            return Err(Error::fault(format!("y-denominator of {m}P is not B³")));
        }
        // BigRational keeps denominators positive.
        Ok(EdsTerm { m, a_m: x.numer().clone(), b_m, c_m: y.numer().clone() })
    }
}

fn check_generator(c: &Curve, p: &Point) -> Result<()> {
    if !c.contains(p) {
        return Err(Error::invalid(format!("{p} is not on the curve")));
    }
    if c.is_torsion(p) {
        return Err(Error::hypothesis(format!("{p} is a torsion point")));
    }
    Ok(())
}

/// The single term at index `m`, computed from `m·P` directly.
pub fn term(c: &Curve, p: &Point, m: u64) -> Result<EdsTerm> {
    if m == 0 {
        return Err(Error::invalid("sequence indices start at 1"));
    }
    check_generator(c, p)?;
    EdsTerm::from_point(m, &c.mul(m, p))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub curve: Curve,
    pub generator: Point,
    pub terms: Vec<EdsTerm>,
    last: Point,
}

/// A prime power in the sequence: `B_m = base^exponent`, exponent maximal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerHit {
    pub m: u64,
    pub exponent: u32,
    pub base: BigUint,
}

/// Primitive prime divisors of one term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveDivisors {
    pub m: u64,
    pub primes: BTreeSet<BigUint>,
    /// Product of all primitive prime powers of `B_m`: what remains after
    /// removing every prime shared with an earlier term.
    pub primitive_part: BigUint,
    /// Unsplit piece of `primitive_part`; its prime factors are primitive
    /// too but were not identified. 1 when `complete`.
    pub unfactored: BigUint,
    pub complete: bool,
}

impl PrimitiveDivisors {
    /// Exact, even when factoring did not complete.
    pub fn has_primitive_divisor(&self) -> bool {
        !self.primitive_part.is_one()
    }
}

impl Sequence {
    /// Terms `1..=max_m`, each multiple obtained from the previous one by a
    /// single addition.
    pub fn generate(c: &Curve, p: &Point, max_m: u64) -> Result<Sequence> {
        if max_m == 0 {
            return Err(Error::invalid("need at least one term"));
        }
        check_generator(c, p)?;
        let mut s = Sequence {
            curve: c.clone(),
            generator: p.clone(),
            terms: Vec::with_capacity(max_m as usize),
            last: Point::Infinity,
        };
        s.extend_to(max_m)?;
        Ok(s)
    }

    pub fn len(&self) -> u64 {
        self.terms.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn extend_to(&mut self, max_m: u64) -> Result<()> {
        while self.len() < max_m {
            let next = self.curve.add(&self.last, &self.generator);
            let term = EdsTerm::from_point(self.len() + 1, &next)?;
            self.terms.push(term);
            self.last = next;
        }
        Ok(())
    }

    pub fn get(&self, m: u64) -> Result<&EdsTerm> {
        if m == 0 || m > self.len() {
            return Err(Error::invalid(format!(
                "index {m} outside the generated range 1..={}",
                self.len()
            )));
        }
        Ok(&self.terms[(m - 1) as usize])
    }

    pub fn b(&self, m: u64) -> Result<&BigUint> {
        self.get(m).map(|t| &t.b_m)
    }

    pub fn b_values(&self) -> Vec<BigUint> {
        self.terms.iter().map(|t| t.b_m.clone()).collect()
    }

    /// `gcd(B_m, B_n) == B_gcd(m, n)`.
    pub fn check_strong_divisibility(&self, m: u64, n: u64) -> Result<bool> {
        let g = self.b(m)?.gcd(self.b(n)?);
        Ok(&g == self.b(m.gcd(&n))?)
    }

    /// `v_p(B_{nk}) == v_p(B_n) + v_p(k)`, for `p | B_n`.
    ///
    /// For `p = 2` the law needs `a1` even; odd `a1` is refused.
    pub fn check_valuation_growth(&self, p: &BigUint, n: u64, k: u64) -> Result<bool> {
        if *p == BigUint::from(2u32) && self.curve.a1.is_odd() {
            return Err(Error::hypothesis("valuation growth at 2 needs a1 even"));
        }
        if k == 0 {
            return Err(Error::invalid("multiplier must be positive"));
        }
        let base = arith::valuation_magnitude(self.b(n)?, p)?;
        if base == 0 {
            return Err(Error::hypothesis(format!("{p} does not divide B_{n}")));
        }
        let nk = n
            .checked_mul(k)
            .ok_or_else(|| Error::invalid("index overflow"))?;
        let grown = arith::valuation_magnitude(self.b(nk)?, p)?;
        let vk = arith::valuation_magnitude(&BigUint::from(k), p)?;
        Ok(grown == base + vk)
    }

    /// Primes dividing `B_m` but no earlier term.
    ///
    /// Every prime shared with some `B_j`, `j < m`, is stripped by repeated
    /// gcds, and only the primitive part is factored.
    pub fn primitive_divisors(&self, m: u64, effort: &Effort) -> Result<PrimitiveDivisors> {
        let mut part = self.b(m)?.clone();
        for j in 1..m {
            let earlier = self.b(j)?;
            loop {
                let g = part.gcd(earlier);
                if g.is_one() {
                    break;
                }
                part /= g;
            }
        }
        let (primes, unfactored) = if part.is_one() {
            (BTreeSet::new(), BigUint::one())
        } else {
            let f = arith::factor_magnitude(&part, effort)?;
            (f.factors.into_keys().collect(), f.cofactor)
        };
        Ok(PrimitiveDivisors {
            m,
            primes,
            primitive_part: part,
            complete: unfactored.is_one(),
            unfactored,
        })
    }

    pub fn scan_powers(&self) -> Vec<PowerHit> {
        scan_terms(&self.terms)
    }
}

/// Perfect powers among the given terms; `B = 1` is never reported.
pub fn scan_terms(terms: &[EdsTerm]) -> Vec<PowerHit> {
    terms
        .iter()
        .filter(|t| !t.b_m.is_zero())
        .filter_map(|t| {
            arith::perfect_power(&t.b_m).map(|(base, exponent)| PowerHit { m: t.m, exponent, base })
        })
        .collect()
}
