//! Arithmetic in K = ℚ(√a), `a ≥ 1` squarefree.
//!
//! Elements are kept in ℤ[√a]-style coordinates `x + y√a` even when
//! `a ≡ 1 (mod 4)`. Prime valuations are only offered at odd primes not
//! dividing `a`, where ℤ[√a] and the full ring of integers agree locally.
//! For `a = 1` the field is ℚ itself: the `y` part is folded into `x`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, Effort};
use crate::curve::InvariantRing;
use crate::error::{Error, Result};

/// Hard cap on Hensel lifting when computing split-prime valuations.
const MAX_LIFT_PRECISION: u32 = 1 << 16;

/// ℚ(√a) with `a` checked squarefree and positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadField {
    a: BigInt,
}

impl QuadField {
    pub fn new(a: &BigInt) -> Result<QuadField> {
        if !a.is_positive() {
            return Err(Error::invalid(format!("field label must be positive, got {a}")));
        }
        if !arith::is_squarefree(a.magnitude(), &Effort::default())? {
            return Err(Error::invalid(format!("field label {a} is not squarefree")));
        }
        Ok(QuadField { a: a.clone() })
    }

    pub fn label(&self) -> &BigInt {
        &self.a
    }

    pub fn is_rational(&self) -> bool {
        self.a.is_one()
    }

    pub fn element(&self, x: BigRational, y: BigRational) -> QuadElement {
        QuadElement::folded(self.a.clone(), x, y)
    }

    pub fn int(&self, x: impl Into<BigInt>, y: impl Into<BigInt>) -> QuadElement {
        self.element(
            BigRational::from_integer(x.into()),
            BigRational::from_integer(y.into()),
        )
    }

    pub fn zero(&self) -> QuadElement {
        self.int(0, 0)
    }

    /// √a itself.
    pub fn sqrt(&self) -> QuadElement {
        self.int(0, 1)
    }
}

/// `x + y√a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadElement {
    a: BigInt,
    x: BigRational,
    y: BigRational,
}

impl QuadElement {
    fn folded(a: BigInt, x: BigRational, y: BigRational) -> QuadElement {
        if a.is_one() {
            QuadElement { a, x: x + y, y: BigRational::zero() }
        } else {
            QuadElement { a, x, y }
        }
    }

    pub fn label(&self) -> &BigInt {
        &self.a
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }

    pub fn y(&self) -> &BigRational {
        &self.y
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }

    /// `x² − a·y²`. For `a = 1` this is `x²` of the folded coordinate.
    pub fn norm(&self) -> BigRational {
        let a = BigRational::from_integer(self.a.clone());
        &self.x * &self.x - a * &self.y * &self.y
    }

    /// Integer coordinates, when the element is integral.
    pub fn integer_coords(&self) -> Option<(BigInt, BigInt)> {
        self.is_integral().then(|| (self.x.to_integer(), self.y.to_integer()))
    }

    fn same_field(&self, other: &QuadElement) {
        assert_eq!(self.a, other.a, "mixing elements of different quadratic fields");
    }
}

impl Add for QuadElement {
    type Output = QuadElement;
    fn add(self, rhs: QuadElement) -> QuadElement {
        self.same_field(&rhs);
        QuadElement { a: self.a, x: self.x + rhs.x, y: self.y + rhs.y }
    }
}

impl Sub for QuadElement {
    type Output = QuadElement;
    fn sub(self, rhs: QuadElement) -> QuadElement {
        self.same_field(&rhs);
        QuadElement { a: self.a, x: self.x - rhs.x, y: self.y - rhs.y }
    }
}

impl Neg for QuadElement {
    type Output = QuadElement;
    fn neg(self) -> QuadElement {
        QuadElement { a: self.a, x: -self.x, y: -self.y }
    }
}

impl Mul for QuadElement {
    type Output = QuadElement;
    fn mul(self, rhs: QuadElement) -> QuadElement {
        self.same_field(&rhs);
        let a = BigRational::from_integer(self.a.clone());
        let x = &self.x * &rhs.x + a * &self.y * &rhs.y;
        let y = &self.x * &rhs.y + &self.y * &rhs.x;
        QuadElement { a: self.a, x, y }
    }
}

impl InvariantRing for QuadElement {
    fn scale(&self, k: i64) -> Self {
        let k = BigRational::from_integer(k.into());
        QuadElement { a: self.a.clone(), x: &self.x * &k, y: &self.y * &k }
    }
}

impl fmt::Display for QuadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            return write!(f, "{}", self.x);
        }
        let sign = if self.y.is_negative() { '-' } else { '+' };
        write!(f, "{} {} {}*sqrt({})", self.x, sign, self.y.abs(), self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Split => "split",
            SplitKind::Inert => "inert",
            SplitKind::Ramified => "ramified",
        }
    }
}

/// A prime ideal of K above the rational prime `p`.
///
/// For split primes `root` is a square root of `a` modulo `p^precision`;
/// the ideal is the one on which `√a ≡ root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPrime {
    pub a: BigInt,
    pub p: BigUint,
    pub kind: SplitKind,
    pub root: Option<BigUint>,
    pub precision: u32,
    pub residue_norm: BigUint,
}

fn check_label_and_prime(a: &BigInt, p: &BigUint) -> Result<()> {
    if !a.is_positive() {
        return Err(Error::invalid(format!("field label must be positive, got {a}")));
    }
    if !arith::is_probable_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    Ok(())
}

/// How `p` decomposes in ℚ(√a). `a = 1` reports split by convention.
pub fn splitting_type(a: &BigInt, p: &BigUint) -> Result<SplitKind> {
    check_label_and_prime(a, p)?;
    if a.is_one() {
        return Ok(SplitKind::Split);
    }
    let a = a.magnitude();
    if *p == BigUint::from(2u32) {
        let r = (a % 8u32).to_u32().unwrap_or(0);
        return Ok(match r {
            1 => SplitKind::Split,
            5 => SplitKind::Inert,
            _ => SplitKind::Ramified,
        });
    }
    let residue = a % p;
    if residue.is_zero() {
        return Ok(SplitKind::Ramified);
    }
    let euler = residue.modpow(&((p - 1u32) >> 1), p);
    Ok(if euler.is_one() { SplitKind::Split } else { SplitKind::Inert })
}

/// Square root of a quadratic residue `n` modulo an odd prime (Tonelli–Shanks).
pub fn sqrt_mod_prime(n: &BigUint, p: &BigUint) -> Option<BigUint> {
    let n = n % p;
    if n.is_zero() {
        return Some(BigUint::zero());
    }
    let one = BigUint::one();
    let p_minus_one = p - 1u32;
    if n.modpow(&(&p_minus_one >> 1), p) != one {
        return None;
    }
    let s = p_minus_one.trailing_zeros().unwrap_or(0);
    let q = &p_minus_one >> s;
    let mut z = BigUint::from(2u32);
    while z.modpow(&(&p_minus_one >> 1), p) == one {
        z += 1u32;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = n.modpow(&q, p);
    let mut r = n.modpow(&((&q + 1u32) >> 1), p);
    while !t.is_one() {
        let mut i = 0;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = &t2 * &t2 % p;
            i += 1;
        }
        let b = c.modpow(&(BigUint::one() << (m - i - 1)), p);
        r = r * &b % p;
        c = &b * &b % p;
        t = t * &c % p;
        m = i;
    }
    Some(r)
}

fn mod_inverse(x: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let (x, m) = (BigInt::from(x.clone()), BigInt::from(modulus.clone()));
    let e = x.extended_gcd(&m);
    e.gcd.is_one().then(|| e.x.mod_floor(&m).to_biguint().unwrap())
}

/// Lifts `r² ≡ a (mod p^from)` to `r² ≡ a (mod p^to)` for odd `p ∤ a`.
fn hensel_lift(a: &BigUint, p: &BigUint, root: &BigUint, from: u32, to: u32) -> BigUint {
    let mut r = root.clone();
    let mut prec = from.max(1);
    while prec < to {
        prec = (2 * prec).min(to);
        let modulus = p.pow(prec);
        let a_mod = a % &modulus;
        let f = (&r * &r + &modulus - &a_mod) % &modulus;
        let inv = mod_inverse(&((&r << 1) % &modulus), &modulus)
            .expect("2r is a unit at odd unramified primes");
        r = (&r + &modulus - f * inv % &modulus) % &modulus;
    }
    r
}

/// Square root of `a ≡ 1 (mod 8)` modulo `2^prec`, `prec ≥ 3`.
fn two_adic_root(a: &BigUint, prec: u32) -> BigUint {
    let mut r = BigUint::one();
    for k in 3..prec + 1 {
        let next = BigUint::one() << (k + 1);
        if (&r * &r) % &next != a % &next {
            r += BigUint::one() << (k - 1);
        }
    }
    r % (BigUint::one() << prec)
}

/// The prime ideals above `p`, with split roots lifted to `p^precision`.
pub fn primes_above(a: &BigInt, p: &BigUint, precision: u32) -> Result<Vec<QuadPrime>> {
    check_label_and_prime(a, p)?;
    if precision == 0 || precision > MAX_LIFT_PRECISION {
        return Err(Error::budget(format!(
            "lift precision must lie in 1..={MAX_LIFT_PRECISION}, got {precision}"
        )));
    }
    let kind = splitting_type(a, p)?;
    let entry = |kind, root, residue_norm| QuadPrime {
        a: a.clone(),
        p: p.clone(),
        kind,
        root,
        precision,
        residue_norm,
    };
    if a.is_one() {
        return Ok(vec![entry(SplitKind::Split, Some(BigUint::one()), p.clone())]);
    }
    let am = a.magnitude();
    Ok(match kind {
        SplitKind::Inert => vec![entry(kind, None, p * p)],
        SplitKind::Ramified => vec![entry(kind, None, p.clone())],
        SplitKind::Split => {
            let modulus = p.pow(precision);
            let r = if *p == BigUint::from(2u32) {
                two_adic_root(am, precision.max(3)) % &modulus
            } else {
                let r0 = sqrt_mod_prime(am, p).ok_or_else(|| Error::fault("no root at split prime"))?;
                hensel_lift(am, p, &r0, 1, precision)
            };
            let conj = (&modulus - &r) % &modulus;
            let (lo, hi) = if r <= conj { (r, conj) } else { (conj, r) };
            vec![entry(kind, Some(lo), p.clone()), entry(kind, Some(hi), p.clone())]
        }
    })
}

/// `v_p((x + y·root) mod p^t)`, lifting `root` until the answer is below `t`.
fn split_valuation(x: &BigInt, y: &BigInt, a: &BigUint, prime: &QuadPrime) -> Result<u64> {
    let p = &prime.p;
    let mut root = prime.root.clone().ok_or_else(|| Error::fault("split prime without root"))?;
    let mut prec = prime.precision;
    loop {
        let modulus = BigInt::from(p.pow(prec));
        let r = BigInt::from(root.clone());
        let residue = (x + y * r).mod_floor(&modulus);
        if !residue.is_zero() {
            return arith::valuation(&residue, p);
        }
        if prec >= MAX_LIFT_PRECISION {
            return Err(Error::budget(format!("valuation at {p} exceeds lift precision {prec}")));
        }
        let next = (prec * 2).min(MAX_LIFT_PRECISION);
        root = hensel_lift(a, p, &root, prec, next);
        prec = next;
    }
}

/// `v_P(z)` for integral nonzero `z` at an odd prime `P ∤ a`.
pub fn prime_valuation(z: &QuadElement, prime: &QuadPrime) -> Result<u64> {
    if z.a != prime.a {
        return Err(Error::invalid("element and prime belong to different fields"));
    }
    if z.is_zero() {
        return Err(Error::invalid("valuation of zero is infinite"));
    }
    let (x, y) = z
        .integer_coords()
        .ok_or_else(|| Error::invalid(format!("{z} does not have integer coordinates")))?;
    let p = &prime.p;
    if *p == BigUint::from(2u32) || prime.kind == SplitKind::Ramified || (z.a.magnitude() % p).is_zero()
    {
        return Err(Error::invalid(format!(
            "valuations at primes over 2a are not supported (p = {p}, a = {})",
            z.a
        )));
    }
    if z.a.is_one() {
        return arith::valuation(&x, p);
    }
    let norm = z.norm().to_integer();
    let vn = arith::valuation(&norm, p)?;
    match prime.kind {
        SplitKind::Inert => {
            if vn % 2 == 1 {
                return Err(Error::fault(format!("odd norm valuation at inert {p}")));
            }
            Ok(vn / 2)
        }
        SplitKind::Split => {
            let a = z.a.magnitude();
            let v = split_valuation(&x, &y, a, prime)?;
            let root = prime.root.as_ref().expect("split prime has a root");
            let modulus = p.pow(prime.precision);
            let conjugate = QuadPrime {
                root: Some((&modulus - root) % &modulus),
                ..prime.clone()
            };
            let vbar = split_valuation(&x, &y, a, &conjugate)?;
            if v + vbar != vn {
                return Err(Error::fault(format!(
                    "conjugate valuations {v} + {vbar} at {p} disagree with norm valuation {vn}"
                )));
            }
            Ok(v)
        }
        SplitKind::Ramified => unreachable!(),
    }
}
