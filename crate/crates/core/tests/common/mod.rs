#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use eds_frey::arith::Effort;
use eds_frey::curve::{Curve, Point};
use eds_frey::eds::Sequence;
use eds_frey::frey::{FreyCurve, FreySolution};

pub fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn reference_curve() -> (Curve, Point) {
    (Curve::xb(&BigInt::from(5)).unwrap(), Point::integral(20, 90))
}

pub fn reference_sequence(max_m: u64) -> Sequence {
    let (c, p) = reference_curve();
    Sequence::generate(&c, &p, max_m).unwrap()
}

/// First non-torsion point `(n/d², y/d³)` on `y² = x(x² + b)` with
/// `d ≤ max_den`, `|n| ≤ max_num`, scanning `d` then `n` upwards.
pub fn brute_force_generator(b: i64, max_num: i64, max_den: i64) -> Option<(Curve, Point)> {
    let c = Curve::xb(&BigInt::from(b)).ok()?;
    for d in 1..=max_den {
        for n in -max_num..=max_num {
            if n.gcd(&d) != 1 {
                continue;
            }
            let (n, dd) = (BigInt::from(n), BigInt::from(d));
            let rhs = &n * &n * &n + BigInt::from(b) * &n * dd.pow(4);
            if rhs.is_negative() {
                continue;
            }
            let y = rhs.sqrt();
            if &y * &y != rhs || y.is_zero() {
                continue;
            }
            let p = c
                .point(BigRational::new(n, dd.pow(2)), BigRational::new(y, dd.pow(3)))
                .expect("search produced an off-curve point");
            if !c.is_torsion(&p) {
                return Some((c, p));
            }
        }
    }
    None
}

/// The two extra test curves, b = 3 and b = 13 (the latter with a
/// non-integral generator).
pub fn extra_curves() -> Vec<(Curve, Point)> {
    [3, 13].iter().map(|&b| brute_force_generator(b, 60, 4).expect("no generator found")).collect()
}

fn small_primes(limit: u64) -> Vec<u64> {
    (2..limit).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
}

fn is_squarefree_u64(n: u64) -> bool {
    (2..=n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d * d))
}

/// Square root of `a` modulo `q^k` (q odd, q ∤ a) by brute force mod q then
/// Newton steps; `None` if `a` is a non-residue.
fn sqrt_mod_prime_power(a: u64, q: u64, k: u32) -> Option<BigInt> {
    let r0 = (1..q).find(|r| (r * r) % q == a % q)?;
    let modulus = BigInt::from(q).pow(k);
    let a = BigInt::from(a);
    let mut r = BigInt::from(r0);
    for _ in 0..k {
        // r ← r − (r² − a)/(2r)
        let two_r = (BigInt::from(2) * &r).mod_floor(&modulus);
        let inv = mod_inv(&two_r, &modulus)?;
        r = (&r - (&r * &r - &a) * inv).mod_floor(&modulus);
    }
    debug_assert!(((&r * &r - &a).mod_floor(&modulus)).is_zero());
    Some(r)
}

fn mod_inv(x: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = x.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

fn crt(r1: &BigInt, m1: &BigInt, r2: &BigInt, m2: &BigInt) -> BigInt {
    let inv = mod_inv(&m1.mod_floor(m2), m2).unwrap();
    let t = ((r2 - r1) * inv).mod_floor(m2);
    (r1 + m1 * t).mod_floor(&(m1 * m2))
}

/// A random solution of `v² − a·u⁴ = d·w^{4ℓ}` with `d > 0` and
/// `gcd(u, v) | ad`, built by forcing `v ≡ u²√a (mod w^{4ℓ})`.
///
/// `w` is a product of one or two primes in which `a` is a square, so the
/// prime above them divides `v − u²√a`. About one case in five has `a = 1`.
pub fn random_frey_solution(rng: &mut StdRng) -> FreySolution {
    let primes = small_primes(200);
    let effort = Effort::default();
    loop {
        let a: u64 = if rng.gen_ratio(1, 5) {
            1
        } else {
            let c = rng.gen_range(2..=40);
            if !is_squarefree_u64(c) {
                continue;
            }
            c
        };
        let ell: u32 = rng.gen_range(1..=2);
        let u: u64 = rng.gen_range(1..=20);
        let nq = rng.gen_range(1..=2);
        let mut qs = Vec::new();
        for _ in 0..nq {
            let q = primes[rng.gen_range(1..primes.len())];
            if !a.is_multiple_of(q) && !qs.contains(&q) {
                qs.push(q);
            }
        }
        if qs.is_empty() {
            continue;
        }
        let k = 4 * ell;
        let mut root = BigInt::zero();
        let mut modulus = BigInt::one();
        let mut ok = true;
        for &q in &qs {
            match sqrt_mod_prime_power(a, q, k) {
                Some(r) => {
                    let mq = BigInt::from(q).pow(k);
                    root = crt(&root, &modulus, &r, &mq);
                    modulus *= mq;
                }
                None => ok = false,
            }
        }
        if !ok || modulus.bits() > 60 {
            continue;
        }
        let w: BigInt = qs.iter().map(|&q| BigInt::from(q)).product();
        let u = BigInt::from(u);
        let au4 = BigInt::from(a) * u.pow(4);
        let mut v = (&u * &u * &root).mod_floor(&modulus) + &modulus * BigInt::from(rng.gen_range(0..3u32));
        while &v * &v <= au4 {
            v += &modulus;
        }
        let num = &v * &v - &au4;
        assert!(num.is_multiple_of(&modulus));
        let d = num / &modulus;
        let (u, v) = (
            if rng.gen_bool(0.5) { u } else { -u },
            if rng.gen_bool(0.5) { v } else { -v },
        );
        let Ok(sol) = FreySolution::new(a.into(), d, u, v, w, ell) else { continue };
        // Keep only instances whose bad set factors within the default effort.
        if FreyCurve::construct(sol.clone(), &effort).is_ok() {
            return sol;
        }
    }
}

/// Primes below `limit`, as `BigUint`.
pub fn primes_below(limit: u64) -> Vec<BigUint> {
    small_primes(limit).into_iter().map(BigUint::from).collect()
}
