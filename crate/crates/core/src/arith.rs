//! Big-integer utilities: factoring under an effort budget, valuations,
//! perfect-power detection and squarefree decomposition.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Limits on how hard [`factorize`] tries before giving up on a cofactor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effort {
    /// Trial division by every prime up to this bound.
    pub trial_bound: u64,
    /// Iteration cap for a single Pollard rho run.
    pub rho_iterations: u64,
    /// Number of rho runs (distinct polynomial constants) per composite.
    pub rho_attempts: u32,
}

/// Largest accepted trial-division bound; the sieve is held in memory.
pub const MAX_TRIAL_BOUND: u64 = 100_000_000;

const DEFAULT_TRIAL_BOUND: u64 = 1_000_000;

impl Default for Effort {
    fn default() -> Self {
        Effort {
            trial_bound: DEFAULT_TRIAL_BOUND,
            rho_iterations: 1 << 20,
            rho_attempts: 3,
        }
    }
}

impl Effort {
    pub fn validate(&self) -> Result<()> {
        if self.trial_bound < 2 || self.trial_bound > MAX_TRIAL_BOUND {
            return Err(Error::invalid(format!(
                "trial bound must lie in [2, {MAX_TRIAL_BOUND}], got {}",
                self.trial_bound
            )));
        }
        Ok(())
    }
}

/// Prime factorization of |n|, possibly with an unsplit composite cofactor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub factors: BTreeMap<BigUint, u32>,
    /// 1 when the factorization is complete; otherwise a composite above
    /// the trial-division bound, coprime to every key of `factors`.
    pub cofactor: BigUint,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }

    /// Reassembles the factored magnitude.
    pub fn value(&self) -> BigUint {
        self.factors
            .iter()
            .fold(self.cofactor.clone(), |acc, (p, &e)| acc * p.pow(e))
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.keys()
    }
}

fn sieve(bound: u64) -> Vec<u32> {
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn default_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(DEFAULT_TRIAL_BOUND))
}

/// Runs `f` on the primes up to `bound`, reusing the cached default sieve.
fn with_primes_up_to<R>(bound: u64, f: impl FnOnce(&[u32]) -> R) -> R {
    if bound <= DEFAULT_TRIAL_BOUND {
        let all = default_primes();
        let end = all.partition_point(|&p| u64::from(p) <= bound);
        f(&all[..end])
    } else {
        f(&sieve(bound))
    }
}

const SMALL_PRIMES: [u32; 46] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199,
];

// The first 13 prime bases are a deterministic test below this bound.
const MR_DETERMINISTIC_LIMIT: &str = "3317044064679887385961981";

fn mr_limit() -> &'static BigUint {
    static LIMIT: OnceLock<BigUint> = OnceLock::new();
    LIMIT.get_or_init(|| MR_DETERMINISTIC_LIMIT.parse().unwrap())
}

/// Miller–Rabin. Deterministic below 3.3·10²⁴; above that, 46 fixed prime
/// bases.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        if *n == BigUint::from(p) {
            return true;
        }
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let bases = if n < mr_limit() {
        &SMALL_PRIMES[..13]
    } else {
        &SMALL_PRIMES[..]
    };
    'witness: for &a in bases {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn abs_diff(a: &BigUint, b: &BigUint) -> BigUint {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// Pollard rho with Brent's cycle detection and batched gcds.
fn rho_brent(n: &BigUint, c: u64, max_iterations: u64) -> Option<BigUint> {
    const BATCH: u64 = 128;
    let step = |x: &BigUint| (x * x + c) % n;
    let mut y = BigUint::from(2u32);
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut r: u64 = 1;
    let mut spent: u64 = 0;

    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = step(&y);
        }
        spent += r;
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let batch = BATCH.min(r - k);
            for _ in 0..batch {
                y = step(&y);
                q = q * abs_diff(&x, &y) % n;
            }
            g = q.gcd(n);
            k += batch;
        }
        spent += k;
        r *= 2;
        if g.is_one() && spent > max_iterations {
            return None;
        }
    }
    if g == *n {
        // The batch overshot; replay it one step at a time.
        g = BigUint::one();
        for _ in 0..=BATCH {
            ys = step(&ys);
            g = abs_diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if g.is_one() || g == *n {
        None
    } else {
        Some(g)
    }
}

/// Splits a composite with rho; tries `rho_attempts` polynomial constants.
fn split_composite(n: &BigUint, effort: &Effort) -> Option<BigUint> {
    (0..u64::from(effort.rho_attempts)).find_map(|i| rho_brent(n, 1 + 2 * i, effort.rho_iterations))
}

/// Factorization of |n| within `effort`.
pub fn factorize(n: &BigInt, effort: &Effort) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::invalid("cannot factor zero"));
    }
    factor_magnitude(n.magnitude(), effort)
}

/// Strips primes up to the trial bound; returns them and what is left.
fn trial_divide(n: &BigUint, effort: &Effort) -> (BTreeMap<BigUint, u32>, BigUint) {
    let mut factors: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut rest = n.clone();
    with_primes_up_to(effort.trial_bound, |primes| {
        for &p in primes {
            let pb = BigUint::from(p);
            if &pb * &pb > rest {
                break;
            }
            let mut e = 0u32;
            while (&rest % p).is_zero() {
                rest /= p;
                e += 1;
            }
            if e > 0 {
                factors.insert(pb, e);
            }
        }
    });
    (factors, rest)
}

/// Factorization of a positive integer within `effort`.
pub fn factor_magnitude(n: &BigUint, effort: &Effort) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::invalid("cannot factor zero"));
    }
    effort.validate()?;
    let (factors, rest) = trial_divide(n, effort);
    Ok(finish_factoring(factors, rest, effort))
}

/// Completes a factorization whose remaining part `rest` has no prime
/// factor up to the trial bound.
fn finish_factoring(mut factors: BTreeMap<BigUint, u32>, rest: BigUint, effort: &Effort) -> Factorization {
    if rest.is_one() {
        return Factorization { factors, cofactor: rest };
    }
    let bound = BigUint::from(effort.trial_bound);
    if rest <= &bound * &bound {
        // No factor up to the bound, so what is left is prime.
        *factors.entry(rest).or_insert(0) += 1;
        return Factorization { factors, cofactor: BigUint::one() };
    }

    let mut stack = vec![rest];
    let mut unsplit = Vec::new();
    while let Some(c) = stack.pop() {
        if c.is_one() {
            continue;
        }
        if is_probable_prime(&c) {
            *factors.entry(c).or_insert(0) += 1;
            continue;
        }
        if let Some((base, exp)) = perfect_power(&c) {
            for _ in 0..exp {
                stack.push(base.clone());
            }
            continue;
        }
        match split_composite(&c, effort) {
            Some(d) => {
                let other = &c / &d;
                stack.push(d);
                stack.push(other);
            }
            None => unsplit.push(c),
        }
    }

    // Keep the cofactor coprime to the recorded primes.
    let mut cofactor: BigUint = unsplit.into_iter().product();
    for (p, e) in factors.iter_mut() {
        while !cofactor.is_one() && (&cofactor % p).is_zero() {
            cofactor /= p;
            *e += 1;
        }
    }
    Factorization { factors, cofactor }
}

/// The prime divisors of |n|, failing if factoring does not complete.
pub fn prime_divisors(n: &BigInt, effort: &Effort) -> Result<Vec<BigUint>> {
    let f = factorize(n, effort)?;
    if !f.is_complete() {
        return Err(Error::budget(format!(
            "could not completely factor {n}; unsplit cofactor {}",
            f.cofactor
        )));
    }
    Ok(f.factors.into_keys().collect())
}

/// Largest `e` with `p^e | n`.
pub fn valuation(n: &BigInt, p: &BigUint) -> Result<u64> {
    valuation_magnitude(n.magnitude(), p)
}

pub fn valuation_magnitude(n: &BigUint, p: &BigUint) -> Result<u64> {
    if n.is_zero() {
        return Err(Error::invalid("valuation of zero is infinite"));
    }
    if p < &BigUint::from(2u32) {
        return Err(Error::invalid(format!("{p} is not a prime")));
    }
    let mut e = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(p);
        if !r.is_zero() {
            return Ok(e);
        }
        rest = q;
        e += 1;
    }
}

/// `w` with `w^exp = n`, if one exists.
pub fn exact_root(n: &BigUint, exp: u32) -> Option<BigUint> {
    if n.is_zero() || exp < 2 {
        return None;
    }
    let r = n.nth_root(exp);
    (r.pow(exp) == *n).then_some(r)
}

/// Returns `(w, l)` with `n = w^l`, `l >= 2` maximal; `None` when `n` is
/// not a perfect power (including `n <= 1`).
pub fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if n <= &BigUint::one() {
        return None;
    }
    let mut base = n.clone();
    let mut exp: u32 = 1;
    // Extract prime exponents one at a time; the base shrinks as we go.
    let mut candidate = 2u32;
    while u64::from(candidate) < base.bits() {
        if is_small_prime(candidate) {
            while let Some(r) = exact_root(&base, candidate) {
                base = r;
                exp *= candidate;
            }
        }
        candidate += 1;
    }
    (exp > 1).then_some((base, exp))
}

fn is_small_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Writes `n = a·u²` with `a` squarefree.
///
/// An unsplit cofactor is accepted when it is itself a perfect square,
/// since it then only contributes to `u`.
pub fn squarefree_split(n: &BigUint, effort: &Effort) -> Result<(BigUint, BigUint)> {
    if n.is_zero() {
        return Err(Error::invalid("squarefree part of zero is undefined"));
    }
    effort.validate()?;
    let (small, rest) = trial_divide(n, effort);
    // Common case for x-numerators: what survives trial division is a square.
    let f = match exact_root(&rest, 2) {
        Some(r) => Factorization { factors: small, cofactor: r.pow(2) },
        None => finish_factoring(small, rest, effort),
    };
    let mut a = BigUint::one();
    let mut u = BigUint::one();
    for (p, &e) in &f.factors {
        if e % 2 == 1 {
            a *= p;
        }
        u *= p.pow(e / 2);
    }
    if !f.is_complete() {
        match exact_root(&f.cofactor, 2) {
            Some(s) => u *= s,
            None => {
                return Err(Error::budget(format!(
                    "squarefree part of {n} needs the factorization of {}",
                    f.cofactor
                )))
            }
        }
    }
    Ok((a, u))
}

/// True when no prime square divides `n` (within the effort budget).
pub fn is_squarefree(n: &BigUint, effort: &Effort) -> Result<bool> {
    let (_, u) = squarefree_split(n, effort)?;
    Ok(u.is_one())
}

/// All positive divisors of a completely factored number, ascending.
pub fn divisors(f: &Factorization) -> Vec<BigUint> {
    let mut out = vec![BigUint::one()];
    for (p, &e) in &f.factors {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for d in &out {
            let mut pk = BigUint::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= p;
            }
        }
        out = next;
    }
    out.sort();
    out
}

pub(crate) fn to_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn fmap(pairs: &[(u64, u32)]) -> BTreeMap<BigUint, u32> {
        pairs.iter().map(|&(p, e)| (big(p), e)).collect()
    }

    #[test]
    fn factors_small_examples() {
        let e = Effort::default();
        let f = factorize(&BigInt::from(36), &e).unwrap();
        assert_eq!(f.factors, fmap(&[(2, 2), (3, 2)]));
        assert!(f.is_complete());

        let f = factorize(&BigInt::from(39139128), &e).unwrap();
        assert_eq!(f.factors, fmap(&[(2, 3), (3, 2), (7, 1), (79, 1), (983, 1)]));

        let f = factorize(&BigInt::from(1), &e).unwrap();
        assert!(f.factors.is_empty());
        assert!(f.is_complete());

        let f = factorize(&BigInt::from(-12), &e).unwrap();
        assert_eq!(f.factors, fmap(&[(2, 2), (3, 1)]));
    }

    #[test]
    fn zero_is_rejected() {
        let e = Effort::default();
        assert!(factorize(&BigInt::zero(), &e).is_err());
        assert!(valuation(&BigInt::zero(), &big(2)).is_err());
        assert!(squarefree_split(&BigUint::zero(), &e).is_err());
    }

    #[test]
    fn rho_splits_past_trial_bound() {
        // B_7 of the b = 5 sequence: two primes beyond any trial bound.
        let p: BigUint = "76185612469".parse().unwrap();
        let q: BigUint = "9334605488291".parse().unwrap();
        let f = factor_magnitude(&(&p * &q), &Effort::default()).unwrap();
        assert!(f.is_complete());
        assert_eq!(f.factors, [(p, 1), (q, 1)].into_iter().collect());
    }

    #[test]
    fn exhausted_budget_leaves_composite_cofactor() {
        let p: BigUint = "1000000000000000003".parse().unwrap();
        let q: BigUint = "1000000000000000009".parse().unwrap();
        assert!(is_probable_prime(&p) && is_probable_prime(&q));
        let effort = Effort { trial_bound: 1000, rho_iterations: 1000, rho_attempts: 1 };
        let n = &p * &q * 12u32;
        let f = factor_magnitude(&n, &effort).unwrap();
        assert!(!f.is_complete());
        assert_eq!(f.cofactor, &p * &q);
        assert_eq!(f.value(), n);
        assert!(squarefree_split(&n, &effort).is_err());
        // A square cofactor still yields an exact split.
        let (a, u) = squarefree_split(&(&p * &p * &q * &q * 12u32), &effort).unwrap();
        assert_eq!(a, big(3));
        assert_eq!(u, &p * &q * 2u32);
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&BigInt::from(36), &big(2)).unwrap(), 2);
        assert_eq!(valuation(&BigInt::from(39139128), &big(2)).unwrap(), 3);
        assert_eq!(valuation(&BigInt::from(19679), &big(2)).unwrap(), 0);
        assert!(valuation(&BigInt::from(5), &big(1)).is_err());
    }

    #[test]
    fn perfect_power_examples() {
        assert_eq!(perfect_power(&big(64)), Some((big(2), 6)));
        assert_eq!(perfect_power(&big(36)), Some((big(6), 2)));
        assert_eq!(perfect_power(&big(19679)), None);
        assert_eq!(perfect_power(&big(1)), None);
        assert_eq!(perfect_power(&big(729)), Some((big(3), 6)));
    }

    #[test]
    fn exact_root_examples() {
        assert_eq!(exact_root(&big(6241), 2), Some(big(79)));
        assert_eq!(exact_root(&big(8), 3), Some(big(2)));
        assert_eq!(exact_root(&big(10), 2), None);
    }

    #[test]
    fn squarefree_examples() {
        let e = Effort::default();
        assert_eq!(squarefree_split(&big(6241), &e).unwrap(), (big(1), big(79)));
        assert_eq!(squarefree_split(&big(20), &e).unwrap(), (big(5), big(2)));
        assert_eq!(
            squarefree_split(&big(700217780), &e).unwrap(),
            (big(5), big(11834))
        );
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        for n in 0u64..5000 {
            let naive = n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_probable_prime(&big(n)), naive, "n = {n}");
        }
        // Carmichael numbers and a strong pseudoprime to several bases.
        for n in [561u64, 1105, 1729, 2465, 3215031751] {
            assert!(!is_probable_prime(&big(n)));
        }
    }

    #[test]
    fn divisors_of_sixty() {
        let f = factor_magnitude(&big(60), &Effort::default()).unwrap();
        let d: Vec<u64> = divisors(&f).iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(d, vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]);
    }
}
