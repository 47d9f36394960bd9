//! Command-line front end. `run` is the whole program minus process exit,
//! so tests can drive it directly.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::arith::{self, Effort};
use crate::curve::{Curve, Point};
use crate::descent;
use crate::eds::Sequence;
use crate::error::{Error, Result};
use crate::frey::{FreyCurve, FreySolution};
use crate::ledger::{self, LedgerReport, DEFAULT_SEARCH_CAP};
use crate::quadfield::{primes_above, QuadElement};

#[derive(Parser, Debug)]
#[command(name = "eds-frey", version, about = "Elliptic divisibility sequences on y^2 = x(x^2 + b) and their Frey curves")]
struct Cli {
    /// Human-readable table instead of JSON.
    #[arg(long, global = true)]
    table: bool,
    /// Trial-division bound used before Pollard rho.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    trial_bound: u64,
    /// Iteration cap per Pollard rho attempt.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    rho_iterations: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CurveArgs {
    /// Curve parameter b > 0.
    #[arg(long, allow_hyphen_values = true)]
    b: BigInt,
    /// Generator as X,Y; coordinates may be fractions num/den.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Terms (m, A_m, B_m, C_m) for m = 1..max-m.
    Gen {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        max_m: u64,
    },
    /// Perfect powers among B_1..B_max-m.
    Scan {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        max_m: u64,
    },
    /// Squarefree descent of the m-th term, B_m = w^ell.
    Descend {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 1)]
        ell: u32,
    },
    /// Frey curve of v^2 - a u^4 = d w^(4 ell).
    Frey {
        #[arg(long, allow_hyphen_values = true)]
        a: BigInt,
        #[arg(long, allow_hyphen_values = true)]
        d: BigInt,
        #[arg(long, allow_hyphen_values = true)]
        u: BigInt,
        #[arg(long, allow_hyphen_values = true)]
        v: BigInt,
        #[arg(long, allow_hyphen_values = true)]
        w: BigInt,
        #[arg(long)]
        ell: u32,
        /// Classify reduction at the primes above this rational prime.
        #[arg(long)]
        prime: Option<BigUint>,
    },
    /// Explicit exponent bound for perfect powers in the sequence.
    Ledger {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        q: BigUint,
        #[arg(long)]
        c_config: BigUint,
        /// Tab-separated eigenvalue table: level_tag, form_index, p, a_p.
        #[arg(long)]
        eigen_table: Option<std::path::PathBuf>,
        /// Largest sequence index searched for p0.
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        search_cap: u64,
    },
}

/// Runs one invocation; returns the exit status and everything to print.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (code, e.to_string());
        }
    };
    let table = cli.table;
    match execute(cli) {
        Ok(out) => (0, out),
        Err(e) => {
            let out = if table {
                format!("error: {e}\n")
            } else {
                let kind = match &e {
                    Error::InvalidInput(_) => "invalid_input",
                    Error::Hypothesis(_) => "hypothesis",
                    Error::Budget(_) => "budget",
                    Error::Fault(_) => "fault",
                };
                let msg = e.to_string();
                pretty(&json!({ "error": { "kind": kind, "message": msg } }))
            };
            (e.exit_code(), out)
        }
    }
}

fn execute(cli: Cli) -> Result<String> {
    let effort = Effort { trial_bound: cli.trial_bound, rho_iterations: cli.rho_iterations, ..Effort::default() };
    effort.validate()?;
    let table = cli.table;
    match cli.command {
        Command::Gen { curve, max_m } => {
            let (c, p) = curve_and_point(&curve)?;
            let s = Sequence::generate(&c, &p, positive(max_m, "max-m")?)?;
            Ok(if table { gen_table(&s) } else { pretty(&gen_json(&s)) })
        }
        Command::Scan { curve, max_m } => {
            let (c, p) = curve_and_point(&curve)?;
            let s = Sequence::generate(&c, &p, positive(max_m, "max-m")?)?;
            let hits = s.scan_powers();
            if table {
                let mut out = format!("perfect powers among B_1..B_{max_m}: {}\n", hits.len());
                for h in &hits {
                    let _ = writeln!(out, "m={}\tB_m={}^{}", h.m, h.base, h.exponent);
                }
                Ok(out)
            } else {
                let hits: Vec<Value> = hits
                    .iter()
                    .map(|h| json!({ "m": h.m, "exponent": h.exponent, "base": h.base.to_string() }))
                    .collect();
                Ok(pretty(&json!({
                    "command": "scan",
                    "b": curve.b.to_string(),
                    "generator": p.to_string(),
                    "max_m": max_m,
                    "hits": hits,
                })))
            }
        }
        Command::Descend { curve, m, ell } => {
            let (c, p) = curve_and_point(&curve)?;
            let s = Sequence::generate(&c, &p, positive(m, "m")?)?;
            let t = s.get(m)?;
            if ell == 0 {
                return Err(Error::invalid("ell must be positive"));
            }
            let w = if ell == 1 { Some(t.b_m.clone()) } else { arith::exact_root(&t.b_m, ell) };
            let w = w
                .ok_or_else(|| Error::invalid(format!("B_{m} = {} is not a perfect {ell}-th power", t.b_m)))?;
            let datum = descent::decompose(&c, t, ell, &w, &effort)?;
            let sol = datum.to_frey()?;
            if table {
                Ok(format!(
                    "m\t{}\nB_m\t{}\nw^ell\t{}^{}\na\t{}\nd\t{}\nu\t{}\nv\t{}\n",
                    datum.m, t.b_m, datum.w, datum.ell, datum.a, datum.d(), datum.u, datum.v
                ))
            } else {
                Ok(pretty(&json!({
                    "command": "descend",
                    "b": curve.b.to_string(),
                    "generator": p.to_string(),
                    "term": { "m": t.m, "A": t.a_m.to_string(), "B": t.b_m.to_string(), "C": t.c_m.to_string() },
                    "datum": {
                        "a": datum.a.to_string(),
                        "u": datum.u.to_string(),
                        "v": datum.v.to_string(),
                        "w": datum.w.to_string(),
                        "ell": datum.ell,
                    },
                    "frey_solution": solution_json(&sol),
                })))
            }
        }
        Command::Frey { a, d, u, v, w, ell, prime } => {
            let sol = FreySolution::new(a, d, u, v, w, ell)?;
            let fc = FreyCurve::construct(sol, &effort)?;
            let mut reductions = Vec::new();
            if let Some(p) = &prime {
                if !arith::is_probable_prime(p) {
                    return Err(Error::invalid(format!("{p} is not prime")));
                }
                for pr in primes_above(fc.field.label(), p, 1)? {
                    let red = fc.classify_reduction(&pr)?;
                    let (val, div) = fc.exponent_divisibility(&pr)?;
                    reductions.push((pr, red, val, div));
                }
            }
            if table {
                let mut out = format!("curve\t{fc}\ndelta\t{}\nc4\t{}\nbad set\t{}\n", fc.delta, fc.c4, join(&fc.bad_set));
                for (pr, red, val, div) in &reductions {
                    let _ = writeln!(
                        out,
                        "prime {} ({}{})\t{}\tv(delta)={val}\tell|v: {div}",
                        pr.p,
                        pr.kind.as_str(),
                        pr.root.as_ref().map(|r| format!(", root {r}")).unwrap_or_default(),
                        red.as_str()
                    );
                }
                Ok(out)
            } else {
                let reds: Vec<Value> = reductions
                    .iter()
                    .map(|(pr, red, val, div)| {
                        json!({
                            "p": pr.p.to_string(),
                            "splitting": pr.kind.as_str(),
                            "root": pr.root.as_ref().map(|r| r.to_string()),
                            "residue_norm": pr.residue_norm.to_string(),
                            "reduction": red.as_str(),
                            "delta_valuation": val,
                            "ell_divides_valuation": div,
                        })
                    })
                    .collect();
                let (oracle_delta, oracle_c4) = fc.invariants_oracle();
                Ok(pretty(&json!({
                    "command": "frey",
                    "solution": solution_json(&fc.solution),
                    "field": fc.field.label().to_string(),
                    "curve": fc.to_string(),
                    "c2": element_json(&fc.c2),
                    "c0": element_json(&fc.c0),
                    "delta": element_json(&fc.delta),
                    "c4": element_json(&fc.c4),
                    "invariants_agree": oracle_delta == fc.delta && oracle_c4 == fc.c4,
                    "bad_set": strings(&fc.bad_set),
                    "reductions": reds,
                })))
            }
        }
        Command::Ledger { curve, q, c_config, eigen_table, search_cap } => {
            let (c, p) = curve_and_point(&curve)?;
            let mut report = ledger::build_report(&c, &p, &q, &c_config, search_cap, &effort)?;
            if let Some(path) = eigen_table {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
                report.apply_eigenvalues(&ledger::parse_eigen_table(&text)?)?;
            }
            Ok(if table { ledger_table(&report) } else { pretty(&ledger_json(&report)) })
        }
    }
}

fn positive(n: u64, name: &str) -> Result<u64> {
    if n == 0 {
        Err(Error::invalid(format!("--{name} must be at least 1")))
    } else {
        Ok(n)
    }
}

/// Parses `n` or `n/d`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::invalid(format!("cannot parse rational '{s}'"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den == BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Parses `X,Y`.
pub fn parse_point(s: &str) -> Result<(BigRational, BigRational)> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| Error::invalid(format!("point '{s}' must be X,Y")))?;
    Ok((parse_rational(x)?, parse_rational(y)?))
}

fn curve_and_point(args: &CurveArgs) -> Result<(Curve, Point)> {
    let c = Curve::xb(&args.b)?;
    let (x, y) = parse_point(&args.point)?;
    let p = c.point(x, y)?;
    Ok((c, p))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn strings<'a, T: ToString + 'a>(xs: impl IntoIterator<Item = &'a T>) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

fn join<'a, T: ToString + 'a>(xs: impl IntoIterator<Item = &'a T>) -> String {
    strings(xs).join(", ")
}

fn rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn element_json(z: &QuadElement) -> Value {
    json!({ "x": rational(z.x()), "y": rational(z.y()), "display": z.to_string() })
}

fn solution_json(s: &FreySolution) -> Value {
    json!({
        "a": s.a.to_string(),
        "d": s.d.to_string(),
        "u": s.u.to_string(),
        "v": s.v.to_string(),
        "w": s.w.to_string(),
        "ell": s.ell,
    })
}

fn gen_json(s: &Sequence) -> Value {
    let terms: Vec<Value> = s
        .terms
        .iter()
        .map(|t| json!({ "m": t.m, "A": t.a_m.to_string(), "B": t.b_m.to_string(), "C": t.c_m.to_string() }))
        .collect();
    json!({
        "command": "gen",
        "b": s.curve.xb_parameter().map(|b| b.to_string()),
        "generator": s.generator.to_string(),
        "terms": terms,
    })
}

fn gen_table(s: &Sequence) -> String {
    let mut out = String::from("m\tA_m\tB_m\tC_m\n");
    for t in &s.terms {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", t.m, t.a_m, t.b_m, t.c_m);
    }
    out
}

fn ledger_json(r: &LedgerReport) -> Value {
    let fields: Vec<Value> = r
        .candidate_fields
        .iter()
        .map(|f| {
            let primes: Vec<Value> = f
                .level_support
                .primes
                .iter()
                .map(|lp| {
                    json!({
                        "p": lp.p.to_string(),
                        "splitting": lp.kind.map(|k| k.as_str()),
                        "ramification": lp.ramification,
                        "ideals": lp.ideals,
                        "exponent_cap": lp.cap,
                    })
                })
                .collect();
            json!({
                "a": f.a.to_string(),
                "d": f.d.to_string(),
                "envelope": {
                    "p0_splitting": f.envelope.kind.as_str(),
                    "residue_norm": f.envelope.norm.to_string(),
                    "value": f.envelope.to_string(),
                    "exact": f.envelope.exact.as_ref().map(|e| e.to_string()),
                    "ceiling": f.envelope.ceiling.to_string(),
                },
                "level_support": { "primes": primes, "count": f.level_support.count.to_string() },
            })
        })
        .collect();
    json!({
        "command": "ledger",
        "b": r.b.to_string(),
        "generator": r.generator.to_string(),
        "B_1": r.b1.to_string(),
        "q": r.q.to_string(),
        "T": strings(&r.t),
        "k": r.k,
        "p0": r.p0.to_string(),
        "p0_index": r.p0_index,
        "c_config": r.c_config.to_string(),
        "threshold": r.threshold.to_string(),
        "candidate_fields": fields,
        "envelope_max": r.envelope_max.to_string(),
        "exact_bound": r.exact_bound.as_ref().map(|e| e.to_string()),
        "exponent_bound": r.exponent_bound.to_string(),
        "caveats": r.caveats,
    })
}

fn ledger_table(r: &LedgerReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "b\t{}\ngenerator\t{}\nB_1\t{}\nq\t{}\nT\t{{{}}}", r.b, r.generator, r.b1, r.q, join(&r.t));
    let _ = writeln!(out, "k\t{}\np0\t{} (first in B_{})\nC\t{}\nthreshold\t{}", r.k, r.p0, r.p0_index, r.c_config, r.threshold);
    for f in &r.candidate_fields {
        let _ = writeln!(
            out,
            "field a={} d={}\tp0 {}\tN={}\tenvelope {} (<= {})\tlevels {}",
            f.a,
            f.d,
            f.envelope.kind.as_str(),
            f.envelope.norm,
            f.envelope,
            f.envelope.ceiling,
            f.level_support.count
        );
    }
    if let Some(e) = &r.exact_bound {
        let _ = writeln!(out, "exact eigenvalue bound\t{e}");
    }
    let _ = writeln!(out, "exponent bound\t{}", r.exponent_bound);
    for c in &r.caveats {
        let _ = writeln!(out, "caveat: {c}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("6241/1296").unwrap(), BigRational::new(6241.into(), 1296.into()));
        assert_eq!(parse_rational("-3").unwrap(), BigRational::from_integer((-3).into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_point("20").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, _) = run(["eds-frey", "gen", "--b", "5"]);
        assert_eq!(code, 2);
        let (code, _) = run(["eds-frey", "--help"]);
        assert_eq!(code, 0);
    }
}
