//! Frey curves attached to solutions of `v² − a·u⁴ = d·w^{4ℓ}`:
//!
//! ```text
//! F : Y² = X(X² + 4u√a·X + 2√a(v + u²√a))   over K = ℚ(√a)
//! ```
//!
//! with closed-form invariants
//! `Δ_F = −2⁹·a·√a·(v + u²√a)²·(v − u²√a)` and `c₄ = 32√a·(5u²√a − 3v)`.
//! Away from the primes dividing `2ad` the model is minimal and semistable,
//! and `ℓ | v_𝔭(Δ_F)`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{self, Effort};
use crate::curve::weierstrass_invariants;
use crate::error::{Error, Result};
use crate::quadfield::{prime_valuation, QuadElement, QuadField, QuadPrime};

/// A solution of `v² − a·u⁴ = d·w^{4ℓ}` satisfying the Frey hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreySolution {
    pub a: BigInt,
    pub d: BigInt,
    pub u: BigInt,
    pub v: BigInt,
    pub w: BigInt,
    /// Not required prime here; primality matters only for the bound.
    pub ell: u32,
}

impl FreySolution {
    pub fn new(a: BigInt, d: BigInt, u: BigInt, v: BigInt, w: BigInt, ell: u32) -> Result<Self> {
        if d.is_zero() || w.is_zero() {
            return Err(Error::hypothesis("d·w^(4l) = 0: both d and w must be nonzero"));
        }
        if !d.is_positive() {
            return Err(Error::hypothesis(format!("d must be positive, got {d}")));
        }
        if u.is_zero() || v.is_zero() {
            return Err(Error::hypothesis("u and v must be nonzero"));
        }
        if ell == 0 {
            return Err(Error::hypothesis("exponent l must be positive"));
        }
        if !a.is_positive() {
            return Err(Error::hypothesis(format!("a must be positive, got {a}")));
        }
        if !arith::is_squarefree(a.magnitude(), &Effort::default())? {
            return Err(Error::hypothesis(format!("a = {a} is not squarefree")));
        }
        let lhs = &v * &v - &a * u.pow(4);
        let rhs = &d * w.pow(4 * ell);
        if lhs != rhs {
            return Err(Error::hypothesis(format!(
                "v² − a·u⁴ = {lhs} differs from d·w^(4l) = {rhs}"
            )));
        }
        let g = u.gcd(&v);
        if !(&a * &d).is_multiple_of(&g) {
            return Err(Error::hypothesis(format!("gcd(u, v) = {g} does not divide a·d")));
        }
        Ok(FreySolution { a, d, u, v, w, ell })
    }
}

/// Prime divisors of `2·a·d`.
pub fn bad_set(a: &BigInt, d: &BigInt, effort: &Effort) -> Result<BTreeSet<BigUint>> {
    let n = BigInt::from(2) * a * d;
    Ok(arith::prime_divisors(&n, effort)?.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Good,
    Multiplicative,
}

impl Reduction {
    pub fn as_str(self) -> &'static str {
        match self {
            Reduction::Good => "good",
            Reduction::Multiplicative => "multiplicative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreyCurve {
    pub solution: FreySolution,
    pub field: QuadField,
    /// Coefficient of X²: `4u√a`.
    pub c2: QuadElement,
    /// Coefficient of X: `2√a(v + u²√a)`.
    pub c0: QuadElement,
    pub delta: QuadElement,
    pub c4: QuadElement,
    pub bad_set: BTreeSet<BigUint>,
}

impl FreyCurve {
    pub fn construct(solution: FreySolution, effort: &Effort) -> Result<FreyCurve> {
        let field = QuadField::new(&solution.a)?;
        let FreySolution { a, u, v, .. } = &solution;
        let u2 = u * u;

        let c2 = field.int(0, BigInt::from(4) * u);
        let c0 = field.int(BigInt::from(2) * a * &u2, BigInt::from(2) * v);

        let plus = field.int(v.clone(), u2.clone());
        let minus = field.int(v.clone(), -&u2);
        let delta = field.int(BigInt::from(-512) * a, 0) * field.sqrt() * plus.clone() * plus * minus;
        let c4 = field.int(0, 32) * field.int(BigInt::from(-3) * v, BigInt::from(5) * &u2);

        if delta.is_zero() {
            return Err(Error::hypothesis("Frey discriminant vanishes"));
        }
        let bad_set = bad_set(&solution.a, &solution.d, effort)?;
        Ok(FreyCurve { solution, field, c2, c0, delta, c4, bad_set })
    }

    /// `[a1, a2, a3, a4, a6]` of the Weierstrass model.
    pub fn coefficients(&self) -> [QuadElement; 5] {
        let z = self.field.zero();
        [z.clone(), self.c2.clone(), z.clone(), self.c0.clone(), z]
    }

    /// `(Δ, c₄)` recomputed from the coefficients by the generic formulas.
    pub fn invariants_oracle(&self) -> (QuadElement, QuadElement) {
        weierstrass_invariants(&self.coefficients())
    }

    /// `v + u²√a`.
    pub fn plus_factor(&self) -> QuadElement {
        let s = &self.solution;
        self.field.int(s.v.clone(), &s.u * &s.u)
    }

    /// `v − u²√a`.
    pub fn minus_factor(&self) -> QuadElement {
        let s = &self.solution;
        self.field.int(s.v.clone(), -(&s.u * &s.u))
    }

    fn check_prime(&self, prime: &QuadPrime) -> Result<()> {
        if prime.a != *self.field.label() {
            return Err(Error::invalid(format!(
                "prime lies in Q(sqrt({})), curve is over Q(sqrt({}))",
                prime.a,
                self.field.label()
            )));
        }
        if self.bad_set.contains(&prime.p) {
            return Err(Error::invalid(format!(
                "{} divides 2ad; reduction there is not analysed",
                prime.p
            )));
        }
        Ok(())
    }

    /// Good or multiplicative reduction at a prime outside the bad set.
    ///
    /// Additive reduction cannot occur there; observing it is a fault.
    pub fn classify_reduction(&self, prime: &QuadPrime) -> Result<Reduction> {
        self.check_prime(prime)?;
        let vd = prime_valuation(&self.delta, prime)?;
        if vd == 0 {
            return Ok(Reduction::Good);
        }
        let vc = if self.c4.is_zero() { None } else { Some(prime_valuation(&self.c4, prime)?) };
        match vc {
            Some(0) => {
                debug_assert!(vd < 12 || vc < Some(4), "non-minimal model outside the bad set");
                Ok(Reduction::Multiplicative)
            }
            _ => Err(Error::fault(format!(
                "additive reduction at a prime over {} outside the bad set",
                prime.p
            ))),
        }
    }

    /// `v_𝔭(Δ_F)` from the factorization `2·v_𝔭(v + u²√a) + v_𝔭(v − u²√a)`,
    /// and whether `ℓ` divides it.
    pub fn exponent_divisibility(&self, prime: &QuadPrime) -> Result<(u64, bool)> {
        self.check_prime(prime)?;
        let val = 2 * prime_valuation(&self.plus_factor(), prime)?
            + prime_valuation(&self.minus_factor(), prime)?;
        Ok((val, val % u64::from(self.solution.ell) == 0))
    }

    pub fn is_rational(&self) -> bool {
        self.field.label().is_one()
    }
}

impl fmt::Display for FreyCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Y^2 = X(X^2 + ({})X + ({}))", self.c2, self.c0)
    }
}
