//! The explicit exponent bound.
//!
//! If `B_m = w^ℓ` with `ℓ > max{k, 2b, C, p0, 5}`, the Frey curve of the
//! term is multiplicative at every prime 𝔭 over `p0`, and level lowering
//! forces `ℓ | N(𝔭) + 1 ± a_𝔭(𝔣)` for some eigenform 𝔣 of a level supported
//! on the primes over `2b`. Everything here is computable except `C` (taken
//! as configuration) and the eigenvalues (optional table input; otherwise
//! bounded by the envelope `(√N(𝔭) + 1)²`).

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::arith::{self, Effort};
use crate::curve::{Curve, Point};
use crate::eds::Sequence;
use crate::error::{Error, Result};
use crate::quadfield::{primes_above, splitting_type, SplitKind};

/// Largest index `find_k_p0` will generate by default.
pub const DEFAULT_SEARCH_CAP: u64 = 64;

/// Conductor exponent cap at a prime ideal over `p` with ramification `e`.
pub fn conductor_exponent_cap(p: &BigUint, e: u32) -> u32 {
    if *p == BigUint::from(2u32) {
        2 + 6 * e
    } else if *p == BigUint::from(3u32) {
        2 + 3 * e
    } else {
        2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KP0 {
    pub q: BigUint,
    pub k: u32,
    pub p0: BigUint,
    /// `q^(k − v_q(B_1))`: the term in which `p0` first appears.
    pub index: u64,
    /// Primitive primes of that term outside `T` that were identified.
    pub candidates: BTreeSet<BigUint>,
    /// False when an unsplit cofactor might hide a smaller candidate.
    pub least_certified: bool,
}

/// Smallest `k > v_q(B_1)` for which `B_{q^(k − v_q(B_1))}` has a primitive
/// divisor outside `T`, with `p0` the least such divisor.
pub fn find_k_p0(
    s: &mut Sequence,
    q: &BigUint,
    t: &BTreeSet<BigUint>,
    search_cap: u64,
    effort: &Effort,
) -> Result<KP0> {
    if !arith::is_probable_prime(q) {
        return Err(Error::invalid(format!("q = {q} is not prime")));
    }
    let vq = arith::valuation_magnitude(s.b(1)?, q)?;
    if vq == 0 {
        return Err(Error::hypothesis(format!("q = {q} does not divide B_1 = {}", s.b(1)?)));
    }
    let q64 = arith::to_u64(q).ok_or_else(|| Error::budget(format!("index q = {q} too large")))?;
    let mut progress = Vec::new();
    let mut index: u64 = 1;
    for j in 1u32.. {
        index = match index.checked_mul(q64) {
            Some(i) if i <= search_cap => i,
            _ => {
                return Err(Error::budget(format!(
                    "no primitive divisor outside T up to index cap {search_cap}; tried {}",
                    if progress.is_empty() { "nothing".to_string() } else { progress.join(", ") }
                )))
            }
        };
        s.extend_to(index)?;
        let pd = s.primitive_divisors(index, effort)?;
        let mut outside = pd.primitive_part.clone();
        for p in t {
            while (&outside % p).is_zero() {
                outside /= p;
            }
        }
        if outside.is_one() {
            progress.push(format!("index {index}: none outside T"));
            continue;
        }
        let candidates: BTreeSet<BigUint> = pd.primes.iter().filter(|p| !t.contains(*p)).cloned().collect();
        let Some(p0) = candidates.iter().next().cloned() else {
            return Err(Error::budget(format!(
                "B_{index} has a primitive divisor outside T inside the unsplit cofactor {}",
                pd.unfactored
            )));
        };
        let least_certified = pd.complete || p0 <= BigUint::from(effort.trial_bound);
        let k = u32::try_from(vq).map_err(|_| Error::budget("valuation overflow"))? + j;
        return Ok(KP0 { q: q.clone(), k, p0, index, candidates, least_certified });
    }
    unreachable!()
}

/// `max{k, 2b, C, p0, 5}`.
pub fn threshold(k: u32, b: &BigUint, c_config: &BigUint, p0: &BigUint) -> BigUint {
    [BigUint::from(k), b * 2u32, c_config.clone(), p0.clone(), BigUint::from(5u32)]
        .into_iter()
        .max()
        .unwrap()
}

/// `(√N + 1)² = N + 1 + 2√N` for the residue norm `N` of a prime over `p0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub p0: BigUint,
    pub a: BigInt,
    pub kind: SplitKind,
    pub norm: BigUint,
    /// The envelope itself when `N` is a square.
    pub exact: Option<BigUint>,
    /// Smallest integer ≥ the envelope.
    pub ceiling: BigUint,
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(e) => write!(f, "{e}"),
            None => write!(f, "{} + 2*sqrt({})", &self.norm + 1u32, self.norm),
        }
    }
}

pub fn envelope_bound(p0: &BigUint, a: &BigInt) -> Result<Envelope> {
    let kind = splitting_type(a, p0)?;
    if *p0 == BigUint::from(2u32) || (a.magnitude() % p0).is_zero() {
        return Err(Error::invalid(format!("p0 = {p0} divides 2a = {}", BigInt::from(2) * a)));
    }
    let norm = primes_above(a, p0, 1)?[0].residue_norm.clone();
    let exact = arith::exact_root(&norm, 2).map(|r| (r + 1u32).pow(2));
    let ceiling = match &exact {
        Some(e) => e.clone(),
        None => {
            // ⌈2√N⌉ = ⌈√(4N)⌉, and 4N is not a square here.
            let four_n = &norm * 4u32;
            &norm + 1u32 + four_n.sqrt() + 1u32
        }
    };
    Ok(Envelope { p0: p0.clone(), a: a.clone(), kind, norm, exact, ceiling })
}

/// A rational prime under the level support with its ideals' exponent cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPrime {
    pub p: BigUint,
    /// `None` over ℚ.
    pub kind: Option<SplitKind>,
    pub ramification: u32,
    pub ideals: u32,
    pub cap: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSupport {
    pub a: BigInt,
    pub d: BigInt,
    pub primes: Vec<LevelPrime>,
    /// Number of levels `∏ 𝔭^{f_𝔭}` with `0 ≤ f_𝔭 ≤ cap`.
    pub count: BigUint,
}

pub fn level_support(a: &BigInt, d: &BigInt, effort: &Effort) -> Result<LevelSupport> {
    if !a.is_positive() || !d.is_positive() {
        return Err(Error::invalid("a and d must be positive"));
    }
    let support = arith::prime_divisors(&(BigInt::from(2) * a * d), effort)?;
    let mut primes = Vec::with_capacity(support.len());
    let mut count = BigUint::one();
    for p in support {
        let (kind, e, ideals) = if a.is_one() {
            (None, 1, 1)
        } else {
            let kind = splitting_type(a, &p)?;
            match kind {
                SplitKind::Split => (Some(kind), 1, 2),
                SplitKind::Inert => (Some(kind), 1, 1),
                SplitKind::Ramified => (Some(kind), 2, 1),
            }
        };
        let cap = conductor_exponent_cap(&p, e);
        count *= BigUint::from(cap + 1).pow(ideals);
        primes.push(LevelPrime { p, kind, ramification: e, ideals, cap });
    }
    Ok(LevelSupport { a: a.clone(), d: d.clone(), primes, count })
}

/// One line of an eigenvalue table: `level_tag TAB form_index TAB p TAB a_p`.
///
/// The `p` column holds the residue norm of the prime the eigenvalue is
/// attached to (`p0` for split primes and over ℚ, `p0²` for inert ones).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenRow {
    pub level_tag: String,
    pub form_index: u64,
    pub norm: BigUint,
    pub a_p: BigInt,
}

/// Parses the tab-separated table; blank lines and `#` comments are skipped.
pub fn parse_eigen_table(text: &str) -> Result<Vec<EigenRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let bad = |what: &str| Error::invalid(format!("eigenvalue table line {}: {what}", lineno + 1));
        if fields.len() != 4 {
            return Err(bad("expected 4 tab-separated fields"));
        }
        rows.push(EigenRow {
            level_tag: fields[0].to_string(),
            form_index: fields[1].trim().parse().map_err(|_| bad("form_index is not an integer"))?,
            norm: fields[2].trim().parse().map_err(|_| bad("p is not a positive integer"))?,
            a_p: fields[3].trim().parse().map_err(|_| bad("a_p is not an integer"))?,
        });
    }
    Ok(rows)
}

/// `max |N + 1 ± a_𝔭|` over the rows, rejecting eigenvalues with `|a_𝔭| > 2√N`.
pub fn eigen_bound<'a>(norm: &BigUint, rows: impl IntoIterator<Item = &'a EigenRow>) -> Result<Option<BigUint>> {
    let mut best: Option<BigUint> = None;
    for row in rows {
        let mag = row.a_p.magnitude();
        if mag * mag > norm * 4u32 {
            return Err(Error::invalid(format!(
                "eigenvalue {} of form {}/{} violates |a| <= 2*sqrt({norm})",
                row.a_p, row.level_tag, row.form_index
            )));
        }
        let value = norm + 1u32 + mag;
        if best.as_ref().is_none_or(|b| &value > b) {
            best = Some(value);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateField {
    pub a: BigInt,
    pub d: BigInt,
    pub envelope: Envelope,
    pub level_support: LevelSupport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerReport {
    pub b: BigUint,
    pub generator: Point,
    pub b1: BigUint,
    pub q: BigUint,
    pub t: BTreeSet<BigUint>,
    pub k: u32,
    pub p0: BigUint,
    pub p0_index: u64,
    pub c_config: BigUint,
    pub threshold: BigUint,
    pub candidate_fields: Vec<CandidateField>,
    /// Largest envelope ceiling over the candidate fields.
    pub envelope_max: BigUint,
    /// From eigenvalue data, when the table covers every candidate field.
    pub exact_bound: Option<BigUint>,
    /// Any perfect power `B_m = w^ℓ`, `ℓ` prime, has `ℓ` at most this.
    pub exponent_bound: BigUint,
    pub caveats: Vec<String>,
}

/// Exact eigenvalue bound, or `None` when some candidate field has no row.
pub fn exact_bound_with_eigenvalues(report: &LedgerReport, table: &[EigenRow]) -> Result<Option<BigUint>> {
    let mut overall: Option<BigUint> = None;
    let mut covered = true;
    for field in &report.candidate_fields {
        let norm = &field.envelope.norm;
        match eigen_bound(norm, table.iter().filter(|r| &r.norm == norm))? {
            Some(b) => overall = Some(overall.map_or(b.clone(), |o| o.max(b))),
            None => covered = false,
        }
    }
    Ok(if covered { overall } else { None })
}

/// Squarefree divisors of `n`, ascending.
fn squarefree_divisors(n: &BigUint, effort: &Effort) -> Result<Vec<BigUint>> {
    let primes = arith::prime_divisors(&BigInt::from(n.clone()), effort)?;
    let mut out = vec![BigUint::one()];
    for p in primes {
        let with_p: Vec<BigUint> = out.iter().map(|d| d * &p).collect();
        out.extend(with_p);
    }
    out.sort();
    Ok(out)
}

const CAVEAT_C: &str = "C is a user-supplied stand-in for the effective irreducibility constant; the threshold is only as good as that value";
const CAVEAT_CAPS: &str = "conductor exponent caps over 2 and 3 use the design constants 2+6e and 2+3e";
const CAVEAT_ENVELOPE: &str = "envelope (sqrt(N)+1)^2 bounds |N+1 +- a_p| only for rational eigenvalues; the exact maximum needs Hilbert eigenform data at every level counted in level_support";

pub fn build_report(
    curve: &Curve,
    generator: &Point,
    q: &BigUint,
    c_config: &BigUint,
    search_cap: u64,
    effort: &Effort,
) -> Result<LedgerReport> {
    let b = curve
        .xb_parameter()
        .ok_or_else(|| Error::invalid("the ledger needs a curve y² = x(x² + b) with b > 0"))?
        .magnitude()
        .clone();
    if c_config.is_zero() {
        return Err(Error::invalid("C must be a positive integer"));
    }
    let mut seq = Sequence::generate(curve, generator, 1)?;
    let b1 = seq.b(1)?.clone();
    if b1.is_one() {
        return Err(Error::hypothesis("integral generator: B_1 = 1 has no prime divisor q"));
    }
    let t: BTreeSet<BigUint> =
        arith::prime_divisors(&BigInt::from(&b * 2u32), effort)?.into_iter().collect();

    let kp0 = find_k_p0(&mut seq, q, &t, search_cap, effort)?;
    let thr = threshold(kp0.k, &b, c_config, &kp0.p0);

    let mut candidate_fields = Vec::new();
    for a in squarefree_divisors(&b, effort)? {
        let d = &b / &a;
        let (a, d) = (BigInt::from(a), BigInt::from(d));
        candidate_fields.push(CandidateField {
            envelope: envelope_bound(&kp0.p0, &a)?,
            level_support: level_support(&a, &d, effort)?,
            a,
            d,
        });
    }
    let envelope_max = candidate_fields
        .iter()
        .map(|f| f.envelope.ceiling.clone())
        .max()
        .unwrap_or_default();

    let mut caveats = vec![CAVEAT_C.to_string(), CAVEAT_CAPS.to_string(), CAVEAT_ENVELOPE.to_string()];
    if !kp0.least_certified {
        caveats.push(format!(
            "p0 = {} is the least primitive divisor found; B_{} was not completely factored",
            kp0.p0, kp0.index
        ));
    }

    let report = LedgerReport {
        exponent_bound: (&thr).max(&envelope_max).clone(),
        b,
        generator: generator.clone(),
        b1,
        q: q.clone(),
        t,
        k: kp0.k,
        p0: kp0.p0.clone(),
        p0_index: kp0.index,
        c_config: c_config.clone(),
        threshold: thr,
        candidate_fields,
        envelope_max,
        exact_bound: None,
        caveats,
    };
    cross_check(&report, &seq)?;
    Ok(report)
}

impl LedgerReport {
    /// Folds an eigenvalue table into the report.
    pub fn apply_eigenvalues(&mut self, table: &[EigenRow]) -> Result<()> {
        self.exact_bound = exact_bound_with_eigenvalues(self, table)?;
        match &self.exact_bound {
            Some(e) => {
                self.exponent_bound = (&self.threshold).max(e).clone();
                self.caveats.retain(|c| c != CAVEAT_ENVELOPE);
                self.caveats.push(
                    "exact bound uses only the supplied eigenvalue rows; forms missing from the table are not accounted for"
                        .to_string(),
                );
            }
            None => self.caveats.push(
                "eigenvalue table does not cover every candidate field; envelope bound used".to_string(),
            ),
        }
        Ok(())
    }
}

/// Re-derives every numeric field of the report from its defining operation.
fn cross_check(r: &LedgerReport, seq: &Sequence) -> Result<()> {
    let fault = |what: &str| Err(Error::fault(format!("ledger cross-check failed: {what}")));
    if r.threshold != threshold(r.k, &r.b, &r.c_config, &r.p0) {
        return fault("threshold");
    }
    if r.t.contains(&r.p0) {
        return fault("p0 lies in T");
    }
    if !(seq.b(r.p0_index)? % &r.p0).is_zero() {
        return fault("p0 does not divide its term");
    }
    for j in 1..r.p0_index {
        if (seq.b(j)? % &r.p0).is_zero() {
            return fault("p0 is not primitive");
        }
    }
    let vq = arith::valuation_magnitude(&r.b1, &r.q)?;
    if r.q.pow(r.k - vq as u32) != BigUint::from(r.p0_index) {
        return fault("index is not q^(k - v_q(B_1))");
    }
    for f in &r.candidate_fields {
        if f.level_support.primes.iter().any(|lp| !r.t.contains(&lp.p)) {
            return fault("level support outside T");
        }
        if BigInt::from(r.b.clone()) != &f.a * &f.d {
            return fault("a·d differs from b");
        }
    }
    Ok(())
}
