//! Front end for the `gcdiv` binary.
//!
//! Exit codes: 0 success or divisible, 2 input error, 3 verified
//! non-divisible (or a witness exists), 4 theorem violation.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_traits::Num;
use serde_json::{json, Value};

use gcdiv::explore::{self, CensusReport, ViolationMode};
use gcdiv::matrices::{ExactMatrix, PowerGcdSystem};
use gcdiv::setalg::{
    closure, condition_report, greatest_type_divisors, hasse_covers, is_boolean_lattice, Clause,
    ConditionReport, GcdClosedSet, GtdMap, IntSet,
};
use gcdiv::theorem::{self, Witness};
use gcdiv::{Error, Nat, ReproBundle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_DIVISIBLE: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gcdiv", version, about = "Divisibility of power LCM matrices by power GCD matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Greatest-type divisors, condition report and predicted verdict.
    Check(SetArgs),
    /// Exact quotient integrality, checked against the prediction.
    Verify(SetArgs),
    /// Brute-force and constructive non-integrality witnesses.
    Witness(SetArgs),
    /// Exhaustive verdicts over gcd-closed subsets of a divisor universe.
    Census(CensusArgs),
    /// Hasse diagram of the divisibility order as DOT.
    Hasse(SetArgs),
    /// The matrices, alpha weights and determinant.
    Matrix(SetArgs),
}

#[derive(Debug, Args)]
pub struct SetArgs {
    /// Comma-separated integers, a file of integers, or a generator such as
    /// `gen:boolean:3`, `gen:chain:5`, `gen:lcm:4`, `gen:gtd:4`, `gen:random:8`.
    pub set: String,
    #[arg(short, long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub exponent: u32,
    /// Replace a non-gcd-closed input by its gcd-closure.
    #[arg(long)]
    pub close: bool,
    #[arg(long, conflicts_with = "dot")]
    pub json: bool,
    /// DOT output (hasse only; it is the default there).
    #[arg(long)]
    pub dot: bool,
    /// Seed for `gen:` set sources.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include (S^e), [S^e], the inverse and the quotient in the report.
    #[arg(long)]
    pub dump_matrices: bool,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[arg(long)]
    pub universe: String,
    #[arg(long, default_value_t = 6)]
    pub nmax: usize,
    /// Exponents, comma-separated.
    #[arg(short, long, default_value = "1", value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..))]
    pub exponent: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub json: bool,
}

/// Parses `argv` and runs the command, writing reports to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return if code == 0 { EXIT_OK } else { EXIT_INPUT };
        }
    };
    match dispatch(&cli.command, out, err) {
        Ok(code) => code,
        Err(Error::TheoremViolation(bundle)) => report_violation(&bundle, err),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> gcdiv::Result<i32> {
    match cmd {
        Command::Check(a) => cmd_check(a, out, err),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Witness(a) => cmd_witness(a, out, err),
        Command::Census(a) => cmd_census(a, out, err),
        Command::Hasse(a) => cmd_hasse(a, out, err),
        Command::Matrix(a) => cmd_matrix(a, out, err),
    }
}

fn report_violation(bundle: &ReproBundle, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "THEOREM VIOLATION: {}", bundle.message);
    let _ = writeln!(err, "  set: {{{}}}  e = {}", bundle.set.join(","), bundle.exponent);
    let _ = writeln!(err, "  {}", bundle.detail);
    match write_bundle(bundle) {
        Ok(path) => {
            let _ = writeln!(err, "  reproduction bundle: {}", path.display());
        }
        Err(e) => {
            let _ = writeln!(err, "  could not write bundle ({e}); contents:\n{}", bundle.to_json());
        }
    }
    EXIT_VIOLATION
}

fn write_bundle(bundle: &ReproBundle) -> std::io::Result<PathBuf> {
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    let path = std::env::temp_dir().join(format!(
        "gcdiv-violation-{}-{nanos}.json",
        std::process::id()
    ));
    std::fs::write(&path, bundle.to_json())?;
    Ok(path)
}

fn write_json(out: &mut dyn Write, v: &Value) -> gcdiv::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json")).map_err(io_err)
}

fn io_err(e: std::io::Error) -> Error {
    Error::domain(format!("write failed: {e}"))
}

macro_rules! say {
    ($dst:expr, $($arg:tt)*) => {
        writeln!($dst, $($arg)*).map_err(io_err)?
    };
}

// ---------------------------------------------------------------- input

/// Parses a set source into a sorted, deduplicated set of positive
/// integers. Returns the set and whether canonicalization changed it.
pub fn parse_set_source(src: &str, seed: u64) -> gcdiv::Result<(IntSet, bool)> {
    if let Some(spec) = src.strip_prefix("gen:") {
        let set = generate(spec, seed)?;
        return Ok((set.as_int_set().clone(), false));
    }
    let text = if looks_inline(src) {
        src.to_string()
    } else {
        std::fs::read_to_string(src)
            .map_err(|e| Error::domain(format!("cannot read set file {src:?}: {e}")))?
    };
    let raw = parse_numbers(&text)?;
    let set = IntSet::new(raw.iter().cloned())?;
    let changed = set.elems() != raw.as_slice();
    Ok((set, changed))
}

fn looks_inline(src: &str) -> bool {
    !src.trim().is_empty()
        && src
            .chars()
            .all(|c| c.is_ascii_digit() || c == ',' || c.is_whitespace())
}

fn parse_numbers(text: &str) -> gcdiv::Result<Vec<Nat>> {
    let items: Vec<&str> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if items.is_empty() {
        return Err(Error::domain("empty set"));
    }
    items
        .iter()
        .map(|t| {
            BigUint::from_str_radix(t, 10)
                .map_err(|_| Error::domain(format!("not a positive integer: {t:?}")))
        })
        .collect()
}

fn generate(spec: &str, seed: u64) -> gcdiv::Result<GcdClosedSet> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::domain(format!("generator needs a size: gen:{spec}")))?;
    let n: usize = arg
        .parse()
        .map_err(|_| Error::domain(format!("bad generator size {arg:?}")))?;
    match kind {
        "chain" => explore::gen_divisor_chain(n, seed),
        "boolean" => explore::gen_boolean_set(n, seed),
        "lcm" => explore::gen_c_violating(n, ViolationMode::LcmDeficient, seed),
        "gtd" => explore::gen_c_violating(n, ViolationMode::GtdMembership, seed),
        "random" => explore::gen_random_gcd_closed(n, 100_000, seed),
        _ => Err(Error::domain(format!("unknown generator {kind:?}"))),
    }
}

/// Parses, canonicalizes and (with `--close`) closes the set, reporting
/// each adjustment on `err`.
fn load_set(a: &SetArgs, err: &mut dyn Write) -> gcdiv::Result<GcdClosedSet> {
    let (set, changed) = parse_set_source(&a.set, a.seed)?;
    if changed {
        say!(err, "warning: input canonicalized to {set}");
    }
    match GcdClosedSet::new(set.clone()) {
        Ok(s) => Ok(s),
        Err(Error::NotGcdClosed { .. }) if a.close => {
            let closed = closure(&set)?;
            let added: Vec<String> = closed
                .elems()
                .iter()
                .filter(|x| !set.contains(x))
                .map(ToString::to_string)
                .collect();
            say!(err, "closure added: {}", added.join(","));
            Ok(closed)
        }
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------- json

fn strings(xs: &[Nat]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

fn gtd_json(set: &GcdClosedSet, gtd: &GtdMap) -> Value {
    let map: serde_json::Map<String, Value> = (0..set.len())
        .map(|i| (set.elems()[i].to_string(), strings(&gtd.values(set, i))))
        .collect();
    Value::Object(map)
}

fn clause_name(c: Clause) -> &'static str {
    match c {
        Clause::Lcm => "lcm",
        Clause::GcdMembership => "gcd_membership",
    }
}

fn violations_json(report: &ConditionReport) -> Value {
    Value::Array(
        report
            .violations()
            .filter_map(|c| {
                c.violation.as_ref().map(|v| {
                    json!({
                        "element": c.value.to_string(),
                        "y": v.y.to_string(),
                        "z": v.z.to_string(),
                        "clause": clause_name(v.clause),
                        "conditionM": c.satisfies_m,
                    })
                })
            })
            .collect(),
    )
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "k": (w.k + 1).to_string(),
        "m": (w.m + 1).to_string(),
        "x_k": w.x_k.to_string(),
        "x_m": w.x_m.to_string(),
        "g_num": w.g.numer().to_string(),
        "g_den": w.g.denom().to_string(),
        "case": w.construction.to_string(),
        "inUnitInterval": w.in_unit_interval,
    })
}

fn matrix_json(m: &ExactMatrix) -> Value {
    serde_json::to_value(m.to_string_rows()).expect("json")
}

fn base_report(
    set: &GcdClosedSet,
    e: u32,
    gtd: &GtdMap,
    report: &ConditionReport,
    verified: Option<bool>,
    witness: Option<&Witness>,
) -> serde_json::Map<String, Value> {
    let v = json!({
        "set": strings(set.elems()),
        "exponent": e.to_string(),
        "gtd": gtd_json(set, gtd),
        "conditionC": report.satisfies_c,
        "conditionM": report.satisfies_m,
        "predicted": report.satisfies_c,
        "verified": verified,
        "witness": witness.map(witness_json),
        "violations": violations_json(report),
    });
    match v {
        Value::Object(m) => m,
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------- human

fn print_gtd(out: &mut dyn Write, set: &GcdClosedSet, gtd: &GtdMap) -> gcdiv::Result<()> {
    say!(out, "greatest-type divisors:");
    for i in 0..set.len() {
        let vs: Vec<String> = gtd.values(set, i).iter().map(ToString::to_string).collect();
        say!(out, "  {}: {{{}}}", set.elems()[i], vs.join(","));
    }
    Ok(())
}

fn print_conditions(out: &mut dyn Write, report: &ConditionReport) -> gcdiv::Result<()> {
    for c in &report.elements {
        let status = if c.satisfies_c { "C holds" } else if c.satisfies_m { "M holds, C fails" } else { "C and M fail" };
        match &c.violation {
            Some(v) => say!(out, "  {}: {status}; pair ({},{}) fails the {} clause", c.value, v.y, v.z, clause_name(v.clause)),
            None => say!(out, "  {}: {status}", c.value),
        }
    }
    say!(
        out,
        "condition C: {}; predicted: {}",
        if report.satisfies_c { "satisfied" } else { "violated" },
        if report.satisfies_c { "divides" } else { "does not divide" }
    );
    Ok(())
}

fn print_matrix(out: &mut dyn Write, name: &str, m: &ExactMatrix) -> gcdiv::Result<()> {
    say!(out, "{name}:");
    for row in m.to_string_rows() {
        say!(out, "  [{}]", row.join(", "));
    }
    Ok(())
}

// ---------------------------------------------------------------- commands

fn cmd_check(a: &SetArgs, out: &mut dyn Write, err: &mut dyn Write) -> gcdiv::Result<i32> {
    let set = load_set(a, err)?;
    let gtd = greatest_type_divisors(&set);
    let report = condition_report(&set, &gtd);
    if a.json {
        let m = base_report(&set, a.exponent, &gtd, &report, None, None);
        write_json(out, &Value::Object(m))?;
    } else {
        say!(out, "set: {set}");
        print_gtd(out, &set, &gtd)?;
        print_conditions(out, &report)?;
    }
    Ok(if report.satisfies_c { EXIT_OK } else { EXIT_NOT_DIVISIBLE })
}

fn cmd_verify(a: &SetArgs, out: &mut dyn Write, err: &mut dyn Write) -> gcdiv::Result<i32> {
    let set = load_set(a, err)?;
    let v = theorem::verdict(&set, a.exponent)?;
    let sys = if a.dump_matrices {
        Some(PowerGcdSystem::new(set.clone(), a.exponent)?)
    } else {
        None
    };
    if a.json {
        let mut m = base_report(
            &set,
            a.exponent,
            &v.gtd,
            &v.condition_report,
            Some(v.verified_divides),
            v.witness.as_ref(),
        );
        if let Some(sys) = &sys {
            m.insert(
                "matrices".into(),
                json!({
                    "gcd": matrix_json(&sys.gcd_matrix()),
                    "lcm": matrix_json(&sys.lcm_matrix()),
                    "inverse": matrix_json(&sys.inverse()),
                    "quotient": matrix_json(&sys.quotient()),
                }),
            );
        }
        write_json(out, &Value::Object(m))?;
    } else {
        say!(out, "set: {set}  e = {}", a.exponent);
        if let Some(sys) = &sys {
            print_matrix(out, "(S^e)", &sys.gcd_matrix())?;
            print_matrix(out, "[S^e]", &sys.lcm_matrix())?;
            print_matrix(out, "(S^e)^-1", &sys.inverse())?;
            print_matrix(out, "quotient", &sys.quotient())?;
        }
        say!(
            out,
            "predicted: {}; verified: {}",
            verb(v.predicted_divides),
            verb(v.verified_divides)
        );
        if let Some(w) = &v.witness {
            say!(out, "witness: {w}");
        }
    }
    Ok(if v.verified_divides { EXIT_OK } else { EXIT_NOT_DIVISIBLE })
}

fn verb(d: bool) -> &'static str {
    if d {
        "divides"
    } else {
        "does not divide"
    }
}

fn cmd_witness(a: &SetArgs, out: &mut dyn Write, err: &mut dyn Write) -> gcdiv::Result<i32> {
    let set = load_set(a, err)?;
    let v = theorem::verdict(&set, a.exponent)?;
    let sys = PowerGcdSystem::new(set.clone(), a.exponent)?;
    let constructive = match v
        .condition_report
        .violations()
        .find(|c| v.gtd.degree(c.index) >= 4)
    {
        Some(c) => theorem::constructive_witness(&sys, c.index)?,
        None => None,
    };
    if a.json {
        let mut m = base_report(
            &set,
            a.exponent,
            &v.gtd,
            &v.condition_report,
            Some(v.verified_divides),
            v.witness.as_ref(),
        );
        m.insert("constructive".into(), constructive.as_ref().map(witness_json).into());
        write_json(out, &Value::Object(m))?;
    } else {
        match &v.witness {
            None => say!(out, "set satisfies condition C; all g integral; no witness exists"),
            Some(w) => {
                say!(out, "brute: {w}");
                if let Some(c) = &constructive {
                    say!(
                        out,
                        "{}: x_k={}, x_m={}, g={}, in (0,1): {}",
                        c.construction,
                        c.x_k,
                        c.x_m,
                        c.g,
                        c.in_unit_interval
                    );
                }
            }
        }
    }
    Ok(if v.witness.is_some() { EXIT_NOT_DIVISIBLE } else { EXIT_OK })
}

/// DOT text for the Hasse diagram: nodes in ascending order, edges `a -> b`
/// whenever `b` covers `a`, and a `boolean` attribute on every element
/// with at least two greatest-type divisors.
pub fn hasse_dot(set: &GcdClosedSet) -> String {
    let gtd = greatest_type_divisors(set);
    let mut s = String::from("digraph hasse {\n  rankdir=BT;\n");
    for (i, x) in set.elems().iter().enumerate() {
        if gtd.degree(i) >= 2 {
            let b = match is_boolean_lattice(set, &gtd, x) {
                Ok(b) => b.to_string(),
                Err(_) => "unknown".to_string(),
            };
            s += &format!("  n{x} [label=\"{x}\", boolean=\"{b}\"];\n");
        } else {
            s += &format!("  n{x} [label=\"{x}\"];\n");
        }
    }
    for (a, b) in hasse_covers(set, &gtd) {
        s += &format!("  n{a} -> n{b};\n");
    }
    s += "}\n";
    s
}

fn cmd_hasse(a: &SetArgs, out: &mut dyn Write, err: &mut dyn Write) -> gcdiv::Result<i32> {
    let set = load_set(a, err)?;
    if a.json {
        let gtd = greatest_type_divisors(&set);
        let edges: Vec<Value> = hasse_covers(&set, &gtd)
            .into_iter()
            .map(|(x, y)| json!([x.to_string(), y.to_string()]))
            .collect();
        write_json(out, &json!({ "nodes": strings(set.elems()), "edges": edges }))?;
    } else {
        write!(out, "{}", hasse_dot(&set)).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn cmd_matrix(a: &SetArgs, out: &mut dyn Write, err: &mut dyn Write) -> gcdiv::Result<i32> {
    let set = load_set(a, err)?;
    let sys = PowerGcdSystem::new(set.clone(), a.exponent)?;
    let alpha: Vec<String> = sys.alpha().values().iter().map(ToString::to_string).collect();
    if a.json {
        write_json(
            out,
            &json!({
                "set": strings(set.elems()),
                "exponent": a.exponent.to_string(),
                "alpha": alpha,
                "determinant": sys.determinant().to_string(),
                "gcd": matrix_json(&sys.gcd_matrix()),
                "lcm": matrix_json(&sys.lcm_matrix()),
                "inverse": matrix_json(&sys.inverse()),
                "quotient": matrix_json(&sys.quotient()),
            }),
        )?;
    } else {
        say!(out, "set: {set}  e = {}", a.exponent);
        say!(out, "alpha: [{}]", alpha.join(", "));
        say!(out, "det (S^e) = {}", sys.determinant());
        print_matrix(out, "(S^e)", &sys.gcd_matrix())?;
        print_matrix(out, "[S^e]", &sys.lcm_matrix())?;
        print_matrix(out, "(S^e)^-1", &sys.inverse())?;
        print_matrix(out, "quotient", &sys.quotient())?;
    }
    Ok(EXIT_OK)
}

/// JSON form of a census report; cells are listed in key order.
pub fn census_json(r: &CensusReport) -> Value {
    let cells: Vec<Value> = r
        .cells
        .iter()
        .map(|(k, c)| {
            json!({
                "exponent": k.exponent.to_string(),
                "n": k.n.to_string(),
                "maxDegree": k.max_degree.to_string(),
                "total": c.total.to_string(),
                "satisfyingC": c.satisfying_c.to_string(),
                "divisible": c.divisible.to_string(),
                "mismatches": c.mismatches.to_string(),
                "witnessMismatches": c.witness_mismatches.to_string(),
            })
        })
        .collect();
    json!({
        "universe": r.universe.to_string(),
        "sizeRange": [r.size_range.0.to_string(), r.size_range.1.to_string()],
        "exponents": r.exponents.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "totalSets": r.total_sets().to_string(),
        "mismatches": r.mismatches().to_string(),
        "witnessMismatches": r.witness_mismatches().to_string(),
        "degreeBoundViolations": r.degree_bound_violations,
        "mismatchedSets": r.mismatched_sets,
        "clean": r.is_clean(),
        "cells": cells,
    })
}

fn cmd_census(a: &CensusArgs, out: &mut dyn Write, _err: &mut dyn Write) -> gcdiv::Result<i32> {
    let universe = BigUint::from_str_radix(a.universe.trim(), 10)
        .map_err(|_| Error::domain(format!("bad universe {:?}", a.universe)))?;
    let report = explore::run_census_unchecked(&universe, a.nmax, &a.exponent, a.jobs)?;
    if a.json {
        write_json(out, &census_json(&report))?;
    } else {
        say!(out, "universe {}  n <= {}  e in {:?}", report.universe, a.nmax, report.exponents);
        say!(out, "{:>3} {:>3} {:>4} {:>8} {:>8} {:>9} {:>10}", "e", "n", "deg", "total", "C", "divisible", "mismatches");
        for (k, c) in &report.cells {
            say!(
                out,
                "{:>3} {:>3} {:>4} {:>8} {:>8} {:>9} {:>10}",
                k.exponent, k.n, k.max_degree, c.total, c.satisfying_c, c.divisible, c.mismatches
            );
        }
        say!(
            out,
            "total sets: {}  mismatches: {}  witness mismatches: {}  bound violations: {}",
            report.total_sets(),
            report.mismatches(),
            report.witness_mismatches(),
            report.degree_bound_violations.len()
        );
    }
    if report.is_clean() {
        return Ok(EXIT_OK);
    }
    let first = report
        .mismatched_sets
        .first()
        .or(report.degree_bound_violations.first())
        .cloned()
        .unwrap_or_default();
    Err(Error::TheoremViolation(Box::new(ReproBundle {
        message: "census found sets contradicting the criterion".to_string(),
        set: Vec::new(),
        exponent: report
            .exponents
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
        detail: format!("first offending set: {first}"),
        quotient: None,
    })))
}

/// Canonical re-serialization of a JSON report.
pub fn canonical_json(text: &str) -> serde_json::Result<String> {
    let v: Value = serde_json::from_str(text)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}
