//! Integral Weierstrass curves over ℚ with an exact chord-tangent group law.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Ring operations needed to evaluate the Weierstrass invariant formulas.
///
/// Integer constants only ever appear as multipliers, so `scale` is enough;
/// this lets the same formulas run over ℤ and over ℤ[√a].
pub trait InvariantRing:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn scale(&self, k: i64) -> Self;
}

impl InvariantRing for BigInt {
    fn scale(&self, k: i64) -> Self {
        self * k
    }
}

/// `(Δ, c₄)` of `y² + a1xy + a3y = x³ + a2x² + a4x + a6`.
pub fn weierstrass_invariants<R: InvariantRing>(coeffs: &[R; 5]) -> (R, R) {
    let [a1, a2, a3, a4, a6] = coeffs.clone();
    let sq = |r: &R| r.clone() * r.clone();

    let b2 = sq(&a1) + a2.scale(4);
    let b4 = a4.scale(2) + a1.clone() * a3.clone();
    let b6 = sq(&a3) + a6.scale(4);
    let b8 = sq(&a1) * a6.clone() + (a2.clone() * a6.clone()).scale(4)
        - a1.clone() * a3.clone() * a4.clone()
        + a2.clone() * sq(&a3)
        - sq(&a4);

    let c4 = sq(&b2) - b4.scale(24);
    let disc = (b2.clone() * b4.clone() * b6.clone()).scale(9)
        - sq(&b2) * b8
        - (sq(&b4) * b4.clone()).scale(8)
        - sq(&b6).scale(27);
    (disc, c4)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
    pub discriminant: BigInt,
    pub c4: BigInt,
}

impl Curve {
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Result<Curve> {
        let (discriminant, c4) =
            weierstrass_invariants(&[a1.clone(), a2.clone(), a3.clone(), a4.clone(), a6.clone()]);
        if discriminant.is_zero() {
            return Err(Error::invalid("singular Weierstrass equation (Δ = 0)"));
        }
        Ok(Curve { a1, a2, a3, a4, a6, discriminant, c4 })
    }

    /// The curve `y² = x(x² + b)`, `b ≥ 1`.
    pub fn xb(b: &BigInt) -> Result<Curve> {
        if !b.is_positive() {
            return Err(Error::invalid(format!("b must be a positive integer, got {b}")));
        }
        let z = BigInt::zero;
        Curve::new(z(), z(), z(), b.clone(), z())
    }

    /// `Some(b)` when the curve is `y² = x(x² + b)` with `b > 0`.
    pub fn xb_parameter(&self) -> Option<&BigInt> {
        let shape = self.a1.is_zero()
            && self.a2.is_zero()
            && self.a3.is_zero()
            && self.a6.is_zero()
            && self.a4.is_positive();
        shape.then_some(&self.a4)
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                let q = |n: &BigInt| BigRational::from_integer(n.clone());
                let lhs = y * y + q(&self.a1) * x * y + q(&self.a3) * y;
                let rhs = x * x * x + q(&self.a2) * x * x + q(&self.a4) * x + q(&self.a6);
                lhs == rhs
            }
        }
    }

    /// Builds an affine point, checking it lies on the curve.
    pub fn point(&self, x: BigRational, y: BigRational) -> Result<Point> {
        let p = Point::Affine { x, y };
        if !self.contains(&p) {
            return Err(Error::invalid(format!("{p} is not on the curve")));
        }
        Ok(p)
    }

    pub fn neg(&self, p: &Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => {
                let a1 = BigRational::from_integer(self.a1.clone());
                let a3 = BigRational::from_integer(self.a3.clone());
                Point::Affine { x: x.clone(), y: -y - a1 * x - a3 }
            }
        }
    }

    pub fn add(&self, p: &Point, q: &Point) -> Point {
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q.clone(),
            (_, Point::Infinity) => return p.clone(),
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let r = |n: &BigInt| BigRational::from_integer(n.clone());
        let (a1, a2, a3, a4) = (r(&self.a1), r(&self.a2), r(&self.a3), r(&self.a4));

        let slope = if x1 == x2 {
            let denom = y1 + y2 + &a1 * x2 + &a3;
            if denom.is_zero() {
                // Q = -P, including the doubling of a 2-torsion point.
                return Point::Infinity;
            }
            let three = BigRational::from_integer(BigInt::from(3));
            let two = BigRational::from_integer(BigInt::from(2));
            (three * x1 * x1 + two * &a2 * x1 + &a4 - &a1 * y1) / denom
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &slope * &slope + &a1 * &slope - &a2 - x1 - x2;
        let y3 = -(&slope + &a1) * &x3 - (y1 - &slope * x1) - &a3;
        Point::Affine { x: x3, y: y3 }
    }

    /// `n·P` by double-and-add.
    pub fn mul(&self, n: u64, p: &Point) -> Point {
        let mut acc = Point::Infinity;
        let mut base = p.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.add(&base, &base);
            }
        }
        acc
    }

    /// Torsion test: rational torsion has order at most 12.
    pub fn is_torsion(&self, p: &Point) -> bool {
        let mut acc = p.clone();
        for _ in 0..12 {
            if acc.is_infinity() {
                return true;
            }
            acc = self.add(&acc, p);
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Point {
    Infinity,
    Affine { x: BigRational, y: BigRational },
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn integral(x: i64, y: i64) -> Point {
        Point::Affine {
            x: BigRational::from_integer(x.into()),
            y: BigRational::from_integer(y.into()),
        }
    }

    pub fn x(&self) -> Option<&BigRational> {
        match self {
            Point::Affine { x, .. } => Some(x),
            Point::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&BigRational> {
        match self {
            Point::Affine { y, .. } => Some(y),
            Point::Infinity => None,
        }
    }

    /// True for affine points with integer coordinates.
    pub fn is_integral(&self) -> bool {
        match self {
            Point::Affine { x, y } => x.denom().is_one() && y.denom().is_one(),
            Point::Infinity => false,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => write!(f, "O"),
            Point::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}
