use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use eds_frey::arith;
use eds_frey::quadfield::{primes_above, prime_valuation, splitting_type, QuadField, SplitKind};

const LABELS: [i64; 5] = [1, 2, 5, 7, 10];

fn odd_primes_below(n: u64) -> Vec<u64> {
    (3..n).filter(|&k| arith::is_probable_prime(&BigUint::from(k))).collect()
}

/// Splitting of p in Z[ω] from brute-force root counting of the minimal
/// polynomial of the ring generator modulo p.
fn brute_splitting(a: i64, p: i64) -> SplitKind {
    if a == 1 {
        return SplitKind::Split;
    }
    // ω = (1+√a)/2 when a ≡ 1 (mod 4): x² − x − (a−1)/4; otherwise √a: x² − a.
    let (b, c) = if a.rem_euclid(4) == 1 { (-1, -(a - 1) / 4) } else { (0, -a) };
    let roots = (0..p).filter(|x| (x * x + b * x + c).rem_euclid(p) == 0).count();
    let disc = if a.rem_euclid(4) == 1 { a } else { 4 * a };
    if disc.rem_euclid(p) == 0 {
        SplitKind::Ramified
    } else if roots == 2 {
        SplitKind::Split
    } else {
        assert_eq!(roots, 0);
        SplitKind::Inert
    }
}

#[test]
fn splitting_matches_brute_force() {
    for a in LABELS {
        for p in std::iter::once(2).chain(odd_primes_below(100)) {
            let got = splitting_type(&BigInt::from(a), &BigUint::from(p)).unwrap();
            assert_eq!(got, brute_splitting(a, p as i64), "a = {a}, p = {p}");
        }
    }
}

#[test]
fn residue_norms_match_splitting() {
    for a in LABELS {
        for p in odd_primes_below(100) {
            if a % (p as i64) == 0 {
                continue;
            }
            let ps = primes_above(&BigInt::from(a), &BigUint::from(p), 4).unwrap();
            let kind = splitting_type(&BigInt::from(a), &BigUint::from(p)).unwrap();
            let n: u64 = ps[0].residue_norm.to_u64().unwrap();
            match (a, kind) {
                (1, _) => assert_eq!((ps.len(), n), (1, p)),
                (_, SplitKind::Split) => assert_eq!((ps.len(), n), (2, p)),
                (_, SplitKind::Inert) => assert_eq!((ps.len(), n), (1, p * p)),
                _ => unreachable!(),
            }
        }
    }
}

fn element() -> impl Strategy<Value = (i64, i64)> {
    (-400i64..400, -400i64..400).prop_filter("nonzero", |(x, y)| *x != 0 || *y != 0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn norm_is_multiplicative(ai in 0usize..5, (x1, y1) in element(), (x2, y2) in element()) {
        let k = QuadField::new(&BigInt::from(LABELS[ai])).unwrap();
        let (z1, z2) = (k.int(x1, y1), k.int(x2, y2));
        prop_assert_eq!((z1.clone() * z2.clone()).norm(), z1.norm() * z2.norm());
    }

    #[test]
    fn valuations_add_and_match_norm(
        ai in 1usize..5,
        pi in 0usize..20,
        (x1, y1) in element(),
        (x2, y2) in element(),
    ) {
        let a = BigInt::from(LABELS[ai]);
        let p = odd_primes_below(80)[pi];
        prop_assume!(LABELS[ai] % (p as i64) != 0);
        let k = QuadField::new(&a).unwrap();
        let (z1, z2) = (k.int(x1, y1), k.int(x2, y2));
        prop_assume!(!z1.norm().numer().is_zero() && !z2.norm().numer().is_zero());
        let prod = z1.clone() * z2.clone();
        let ps = primes_above(&a, &BigUint::from(p), 2).unwrap();
        let mut total = 0;
        for pr in &ps {
            let (v1, v2) = (prime_valuation(&z1, pr).unwrap(), prime_valuation(&z2, pr).unwrap());
            prop_assert_eq!(prime_valuation(&prod, pr).unwrap(), v1 + v2);
            total += prime_valuation(&prod, pr).unwrap();
        }
        let vn = arith::valuation(prod.norm().numer(), &BigUint::from(p)).unwrap();
        let f = if ps[0].kind == SplitKind::Inert { 2 } else { 1 };
        prop_assert_eq!(f * total, vn);
    }

    #[test]
    fn rational_field_valuation_is_p_adic(x in 1i64..1_000_000, pi in 0usize..10) {
        let p = odd_primes_below(40)[pi];
        let k = QuadField::new(&BigInt::from(1)).unwrap();
        let pr = &primes_above(&BigInt::from(1), &BigUint::from(p), 1).unwrap()[0];
        let mut expected = 0;
        let mut y = x;
        while y.is_multiple_of(&(p as i64)) {
            y /= p as i64;
            expected += 1;
        }
        prop_assert_eq!(prime_valuation(&k.int(x, 0), pr).unwrap(), expected);
    }
}

use num_traits::Zero;
