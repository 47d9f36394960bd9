//! From a term of the sequence on `y² = x(x² + b)` to the quartic equation
//! `v² − a·u⁴ = (b/a)·w^{4ℓ}` that feeds the Frey construction.
//!
//! Substituting `mP = (A/B², C/B³)` gives `C² = A(A² + b·B⁴)`. The two
//! factors share only divisors of `b`, so `A = a·u²` and `A² + b·B⁴ = a·v²`
//! with `a | b` squarefree.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{self, Effort};
use crate::curve::Curve;
use crate::eds::EdsTerm;
use crate::error::{Error, Result};
use crate::frey::FreySolution;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentDatum {
    pub m: u64,
    pub a: BigUint,
    pub u: BigUint,
    pub v: BigUint,
    /// `w^ℓ = B_m`.
    pub w: BigUint,
    pub ell: u32,
    pub b: BigUint,
}

/// Checks `C² = A(A² + b·B⁴)` for a term on `y² = x(x² + b)`.
pub fn satisfies_curve_identity(b: &BigInt, t: &EdsTerm) -> bool {
    let b4 = BigInt::from(t.b_m.pow(4));
    &t.c_m * &t.c_m == &t.a_m * (&t.a_m * &t.a_m + b * b4)
}

/// Decomposes `t` with `B_m = w^ℓ`.
pub fn decompose(c: &Curve, t: &EdsTerm, ell: u32, w: &BigUint, effort: &Effort) -> Result<DescentDatum> {
    let b = c
        .xb_parameter()
        .ok_or_else(|| Error::invalid("descent needs a curve of the form y² = x(x² + b), b > 0"))?;
    if ell == 0 {
        return Err(Error::invalid("exponent must be positive"));
    }
    if w.pow(ell) != t.b_m {
        return Err(Error::invalid(format!("{w}^{ell} is not B_{} = {}", t.m, t.b_m)));
    }
    if t.a_m.is_zero() || t.b_m.is_zero() {
        return Err(Error::hypothesis("A_m·B_m = 0 forces P = (0, 0), a torsion point"));
    }
    if !satisfies_curve_identity(b, t) {
        return Err(Error::invalid(format!("term {} does not lie on the curve", t.m)));
    }
    if t.a_m.is_negative() {
        // Impossible for b > 0 once the identity holds; never fed to the Frey step.
        return Err(Error::hypothesis(format!(
            "A_{} < 0: negative x-coordinates are excluded from the Frey construction",
            t.m
        )));
    }

    let (a, u) = arith::squarefree_split(t.a_m.magnitude(), effort)?;
    let bu = b.magnitude();
    if !bu.is_multiple_of(&a) {
        return Err(Error::fault(format!("squarefree part {a} of A_{} does not divide b", t.m)));
    }
    let au = &a * &u;
    let (v, rem) = t.c_m.magnitude().div_rem(&au);
    if !rem.is_zero() {
        return Err(Error::fault(format!("a·u does not divide C_{}", t.m)));
    }
    let datum = DescentDatum { m: t.m, a, u, v, w: w.clone(), ell, b: bu.clone() };
    datum.verify()?;
    Ok(datum)
}

impl DescentDatum {
    /// `b / a`.
    pub fn d(&self) -> BigUint {
        &self.b / &self.a
    }

    /// Re-checks `v² − a·u⁴ = (b/a)·w^{4ℓ}` and `gcd(u, v) | b`.
    pub fn verify(&self) -> Result<()> {
        if self.a.is_zero() || !self.b.is_multiple_of(&self.a) {
            return Err(Error::fault(format!("a = {} does not divide b = {}", self.a, self.b)));
        }
        let lhs = BigInt::from(&self.v * &self.v) - BigInt::from(&self.a * self.u.pow(4));
        let rhs = BigInt::from(self.d() * self.w.pow(4 * self.ell));
        if lhs != rhs {
            return Err(Error::fault(format!(
                "descent equation fails at m = {}: {lhs} ≠ {rhs}",
                self.m
            )));
        }
        let g = self.u.gcd(&self.v);
        if !self.b.is_multiple_of(&g) {
            return Err(Error::fault(format!("gcd(u, v) = {g} does not divide b")));
        }
        Ok(())
    }

    /// The Frey input `(a, b/a, u, v, w, ℓ)`; note `2ad = 2b`.
    pub fn to_frey(&self) -> Result<FreySolution> {
        self.verify()?;
        FreySolution::new(
            self.a.clone().into(),
            self.d().into(),
            self.u.clone().into(),
            self.v.clone().into(),
            self.w.clone().into(),
            self.ell,
        )
    }

    pub fn is_rational_field(&self) -> bool {
        self.a.is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Point;
    use crate::eds::Sequence;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn setup(max_m: u64) -> (Curve, Sequence) {
        let c = Curve::xb(&BigInt::from(5)).unwrap();
        let s = Sequence::generate(&c, &Point::integral(20, 90), max_m).unwrap();
        (c, s)
    }

    fn plain(c: &Curve, s: &Sequence, m: u64) -> DescentDatum {
        let t = s.get(m).unwrap();
        decompose(c, t, 1, &t.b_m, &Effort::default()).unwrap()
    }

    #[test]
    fn m2_descends_to_rational_field() {
        let (c, s) = setup(3);
        let d = plain(&c, &s, 2);
        assert_eq!((d.a.clone(), d.u.clone(), d.v.clone()), (big(1), big(79), big(6881)));
        assert_eq!(&d.v * &d.v - d.u.pow(4), big(8398080));
        assert_eq!(big(8398080), big(5) * big(36).pow(4));
        let f = d.to_frey().unwrap();
        assert_eq!(
            f,
            FreySolution::new(1.into(), 5.into(), 79.into(), 6881.into(), 36.into(), 1).unwrap()
        );
    }

    #[test]
    fn m1_and_m3() {
        let (c, s) = setup(3);
        let d1 = plain(&c, &s, 1);
        assert_eq!((d1.a.clone(), d1.u.clone(), d1.v.clone()), (big(5), big(2), big(9)));
        assert_eq!(
            d1.to_frey().unwrap(),
            FreySolution::new(5.into(), 1.into(), 2.into(), 9.into(), 1.into(), 1).unwrap()
        );
        let d3 = plain(&c, &s, 3);
        assert_eq!((d3.a.clone(), d3.u.clone()), (big(5), big(11834)));
        let c3: BigUint = "29468421431730".parse().unwrap();
        assert_eq!(d3.v, c3 / big(5 * 11834));
    }

    #[test]
    fn wrong_root_and_bad_shape_rejected() {
        let (c, s) = setup(2);
        let t = s.get(2).unwrap();
        assert!(decompose(&c, t, 2, &big(6), &Effort::default()).is_ok());
        assert!(decompose(&c, t, 2, &big(7), &Effort::default()).is_err());
        let other = Curve::new(0.into(), 1.into(), 0.into(), 5.into(), 0.into()).unwrap();
        assert!(decompose(&other, t, 1, &t.b_m, &Effort::default()).is_err());
    }

    #[test]
    fn degenerate_terms_rejected() {
        let (c, _) = setup(1);
        let zero = EdsTerm { m: 1, a_m: 0.into(), b_m: big(1), c_m: 0.into() };
        assert!(matches!(decompose(&c, &zero, 1, &big(1), &Effort::default()), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn square_power_mode() {
        // B_2 = 36 = 6², so ℓ = 2 is a genuine power descent.
        let (c, s) = setup(2);
        let t = s.get(2).unwrap();
        let d = decompose(&c, t, 2, &big(6), &Effort::default()).unwrap();
        assert_eq!(d.w, big(6));
        let f = d.to_frey().unwrap();
        assert_eq!(f.ell, 2);
        assert_eq!(f.w, BigInt::from(6));
    }
}
