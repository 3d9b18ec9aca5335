//! Set generators, exhaustive enumeration over divisor universes, and the
//! census that runs the verdict engine over them.

use std::collections::BTreeMap;
use std::thread;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, nat, Nat};
use crate::error::{Error, ReproBundle, Result};
use crate::matrices::PowerGcdSystem;
use crate::setalg::{
    closure, condition_report, greatest_type_divisors, Clause, GcdClosedSet, IntSet,
};
use crate::theorem::find_witness_brute;

pub const UNIVERSE_DIVISOR_CAP: usize = 24;
pub const ENUMERATION_SIZE_CAP: usize = 10;

const SMALL_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];
const RETRIES: usize = 64;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick_primes(r: &mut ChaCha8Rng, l: usize) -> Vec<u64> {
    let mut ps: Vec<u64> = SMALL_PRIMES.choose_multiple(r, l).copied().collect();
    ps.sort_unstable();
    ps
}

/// `x_1 | x_2 | … | x_n`, starting from a small seed value and multiplying
/// by 2, 3 or 5 at each step.
pub fn gen_divisor_chain(length: usize, seed: u64) -> Result<GcdClosedSet> {
    if length == 0 {
        return Err(Error::domain("chain length must be at least 1"));
    }
    let mut r = rng(seed);
    let mut x = nat(r.gen_range(1..=6));
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        out.push(x.clone());
        x *= [2u64, 3, 5][r.gen_range(0..3)];
    }
    GcdClosedSet::new(IntSet::new(out)?)
}

/// All divisors of a product of `l` distinct seeded primes.
pub fn gen_boolean_set(l: usize, seed: u64) -> Result<GcdClosedSet> {
    if !(2..=SMALL_PRIMES.len()).contains(&l) {
        return Err(Error::domain(format!("l = {l} outside 2..={}", SMALL_PRIMES.len())));
    }
    let ps = pick_primes(&mut rng(seed), l);
    boolean_set_from_primes(&ps)
}

fn boolean_set_from_primes(ps: &[u64]) -> Result<GcdClosedSet> {
    let x: Nat = ps.iter().map(|&p| nat(p)).product();
    GcdClosedSet::new(IntSet::new(divisors(&x)?)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationMode {
    /// Some pair of greatest-type divisors of the top has lcm below it.
    LcmDeficient,
    /// Pairwise lcms all equal the top, but some pairwise gcd is not a
    /// greatest-type divisor.
    GtdMembership,
}

/// A gcd-closed set whose maximum has `l` greatest-type divisors and
/// violates condition C through the clause selected by `mode`. The
/// postcondition is checked; failure after the retry budget is a
/// generation error.
pub fn gen_c_violating(l: usize, mode: ViolationMode, seed: u64) -> Result<GcdClosedSet> {
    if !(2..=5).contains(&l) {
        return Err(Error::domain(format!("l = {l} outside 2..=5")));
    }
    let mut r = rng(seed);
    for _ in 0..RETRIES {
        let ps = pick_primes(&mut r, l);
        let candidate = match mode {
            ViolationMode::LcmDeficient => {
                let extra = SMALL_PRIMES[r.gen_range(0..SMALL_PRIMES.len())];
                make_lcm_deficient_set(&ps, extra)?
            }
            ViolationMode::GtdMembership => {
                let mut ps = ps;
                ps.shuffle(&mut r);
                make_case2_set(&ps)?
            }
        };
        if violates_as_intended(&candidate, l, mode) {
            return Ok(candidate);
        }
    }
    Err(Error::Generation(format!(
        "no {mode:?} set with {l} greatest-type divisors after {RETRIES} attempts"
    )))
}

/// `{1, p_1, …, p_l, p_1⋯p_l·r}`.
pub fn make_lcm_deficient_set(ps: &[u64], r: u64) -> Result<GcdClosedSet> {
    let top: Nat = ps.iter().map(|&p| nat(p)).product::<Nat>() * r;
    let mut items = vec![nat(1), top];
    items.extend(ps.iter().map(|&p| nat(p)));
    GcdClosedSet::new(IntSet::new(items)?)
}

/// With `x = p_1²·p_2⋯p_l`: `y_1 = x/p_1²`, `y_i = x/p_i` for `i ≥ 2`, and
/// `u = p_1·p_3⋯p_l` inserted strictly between `(y_1,y_2)` and `y_2`;
/// returns the gcd-closure. Needs `l ≥ 2` distinct primes.
pub fn make_case2_set(ps: &[u64]) -> Result<GcdClosedSet> {
    if ps.len() < 2 {
        return Err(Error::domain("need at least two primes"));
    }
    let p: Vec<Nat> = ps.iter().map(|&p| nat(p)).collect();
    let x: Nat = &p[0] * p.iter().product::<Nat>();
    let mut gens = vec![x.clone(), &x / (&p[0] * &p[0])];
    gens.extend(p[1..].iter().map(|q| &x / q));
    gens.push(p[0].clone() * p[2..].iter().product::<Nat>());
    closure(&IntSet::new(gens)?)
}

fn violates_as_intended(set: &GcdClosedSet, l: usize, mode: ViolationMode) -> bool {
    let gtd = greatest_type_divisors(set);
    let top = set.len() - 1;
    if gtd.max_degree() != l || gtd.degree(top) != l {
        return false;
    }
    let report = condition_report(set, &gtd);
    let Some(elem) = report.elements.iter().find(|c| c.index == top) else {
        return false;
    };
    let want = match mode {
        ViolationMode::LcmDeficient => Clause::Lcm,
        ViolationMode::GtdMembership => Clause::GcdMembership,
    };
    !elem.satisfies_c && elem.violation.as_ref().map(|v| v.clause) == Some(want)
}

/// A random gcd-closed set with at most `n_max` elements, each at most
/// `bound`. Candidates are divisors of a random smooth base or raw random
/// integers; a candidate is kept when the closure stays within `n_max`.
pub fn gen_random_gcd_closed(n_max: usize, bound: u64, seed: u64) -> Result<GcdClosedSet> {
    if n_max == 0 || bound == 0 {
        return Err(Error::domain("n_max and bound must be positive"));
    }
    let mut r = rng(seed);
    let target = r.gen_range(1..=n_max);
    let pool = smooth_pool(&mut r, bound)?;
    let mut current: Vec<Nat> = Vec::new();
    let mut closed = None;
    for _ in 0..8 * n_max {
        let cand = if r.gen_bool(0.7) && !pool.is_empty() {
            pool[r.gen_range(0..pool.len())].clone()
        } else {
            nat(r.gen_range(1..=bound))
        };
        let mut trial = current.clone();
        trial.push(cand);
        let c = closure(&IntSet::new(trial.clone())?)?;
        if c.len() <= n_max {
            current = trial;
            let len = c.len();
            closed = Some(c);
            if len >= target {
                break;
            }
        }
    }
    match closed {
        Some(c) => Ok(c),
        None => GcdClosedSet::new(IntSet::new([nat(r.gen_range(1..=bound))])?),
    }
}

/// Divisors of a random product of small primes not exceeding `bound`.
fn smooth_pool(r: &mut ChaCha8Rng, bound: u64) -> Result<Vec<Nat>> {
    let mut base = 1u64;
    for _ in 0..12 {
        let p = SMALL_PRIMES[r.gen_range(0..6)];
        if base * p <= bound {
            base *= p;
        }
    }
    divisors(&nat(base))
}

fn universe_divisors(universe: &Nat, n_max: usize) -> Result<Vec<Nat>> {
    let mut ds = divisors(universe)?;
    if ds.len() > UNIVERSE_DIVISOR_CAP {
        return Err(Error::Size {
            what: "universe divisor count",
            got: ds.len(),
            limit: UNIVERSE_DIVISOR_CAP,
        });
    }
    if n_max > ENUMERATION_SIZE_CAP {
        return Err(Error::Size {
            what: "n_max",
            got: n_max,
            limit: ENUMERATION_SIZE_CAP,
        });
    }
    ds.sort_unstable_by(|a, b| b.cmp(a));
    Ok(ds)
}

/// Every gcd-closed subset of `divisors(universe)` with `1 ≤ |S| ≤ n_max`,
/// each exactly once. Order: depth-first over the divisors in descending
/// order, including before excluding.
pub fn enumerate_gcd_closed(universe: &Nat, n_max: usize) -> Result<Vec<GcdClosedSet>> {
    let ds = universe_divisors(universe, n_max)?;
    let d = ds.len();
    let idx: BTreeMap<&Nat, usize> = ds.iter().enumerate().map(|(i, x)| (x, i)).collect();
    // gcd_idx[i][j]: position of gcd(ds[i], ds[j]); always ≥ max(i, j).
    let gcd_idx: Vec<Vec<usize>> = (0..d)
        .map(|i| (0..d).map(|j| idx[&gcd(&ds[i], &ds[j])]).collect())
        .collect();

    struct Walk<'a> {
        ds: &'a [Nat],
        gcd_idx: &'a [Vec<usize>],
        n_max: usize,
        out: Vec<GcdClosedSet>,
    }
    impl Walk<'_> {
        fn go(&mut self, pos: usize, chosen: &mut Vec<usize>, required: u32) {
            // Required bits all lie at positions ≥ pos, disjoint from `chosen`.
            if required.count_ones() as usize + chosen.len() > self.n_max {
                return;
            }
            if pos == self.ds.len() {
                if !chosen.is_empty() {
                    let items = chosen.iter().map(|&i| self.ds[i].clone());
                    let set = IntSet::new(items).expect("positive divisors");
                    self.out.push(GcdClosedSet::new(set).expect("closed by construction"));
                }
                return;
            }
            if chosen.len() < self.n_max {
                let mut req = required & !(1 << pos);
                for &j in chosen.iter() {
                    let g = self.gcd_idx[pos][j];
                    if g != pos {
                        req |= 1 << g;
                    }
                }
                chosen.push(pos);
                self.go(pos + 1, chosen, req);
                chosen.pop();
            }
            if required & (1 << pos) == 0 {
                self.go(pos + 1, chosen, required);
            }
        }
    }
    let mut walk = Walk {
        ds: &ds,
        gcd_idx: &gcd_idx,
        n_max,
        out: Vec::new(),
    };
    walk.go(0, &mut Vec::with_capacity(n_max), 0);
    Ok(walk.out)
}

/// One census cell: all enumerated sets with the given size and maximum
/// greatest-type-divisor degree, at one exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CensusCell {
    pub total: u64,
    pub satisfying_c: u64,
    pub divisible: u64,
    pub mismatches: u64,
    /// Sets where a brute-force witness exists iff the quotient is
    /// integral (must stay 0).
    pub witness_mismatches: u64,
}

impl CensusCell {
    fn merge(&mut self, other: &CensusCell) {
        self.total += other.total;
        self.satisfying_c += other.satisfying_c;
        self.divisible += other.divisible;
        self.mismatches += other.mismatches;
        self.witness_mismatches += other.witness_mismatches;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub exponent: u32,
    pub n: usize,
    pub max_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusReport {
    pub universe: Nat,
    pub size_range: (usize, usize),
    pub exponents: Vec<u32>,
    pub cells: BTreeMap<CellKey, CensusCell>,
    /// Sets with max degree `m ≥ 4`, `n < C(m,2)+m+2`, and a divisible
    /// quotient, as `"{…} e=…"`.
    pub degree_bound_violations: Vec<String>,
    /// Prediction/verification disagreements, as `"{…} e=…"`.
    pub mismatched_sets: Vec<String>,
}

impl CensusReport {
    pub fn total_sets(&self) -> u64 {
        self.cells.values().map(|c| c.total).sum()
    }

    pub fn mismatches(&self) -> u64 {
        self.cells.values().map(|c| c.mismatches).sum()
    }

    pub fn witness_mismatches(&self) -> u64 {
        self.cells.values().map(|c| c.witness_mismatches).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.mismatches() == 0
            && self.witness_mismatches() == 0
            && self.degree_bound_violations.is_empty()
    }

    /// Cells where the degree bound forbids divisibility.
    pub fn degree_bound_cells(&self) -> impl Iterator<Item = (&CellKey, &CensusCell)> {
        self.cells
            .iter()
            .filter(|(k, _)| degree_bound_applies(k.n, k.max_degree))
    }
}

/// `m ≥ 4` and `n < C(m,2) + m + 2`.
pub fn degree_bound_applies(n: usize, m: usize) -> bool {
    m >= 4 && n < m * (m - 1) / 2 + m + 2
}

struct Partial {
    cells: BTreeMap<CellKey, CensusCell>,
    bound_hits: Vec<(usize, String)>,
    mismatched: Vec<(usize, String, ReproBundle)>,
}

fn census_shard(sets: &[(usize, GcdClosedSet)], exponents: &[u32]) -> Result<Partial> {
    let mut part = Partial {
        cells: BTreeMap::new(),
        bound_hits: Vec::new(),
        mismatched: Vec::new(),
    };
    for (pos, set) in sets {
        for &e in exponents {
            let sys = PowerGcdSystem::new(set.clone(), e)?;
            let predicted = condition_report(set, sys.gtd()).satisfies_c;
            let quotient = sys.quotient();
            let verified = quotient.is_integral();
            let witness = find_witness_brute(&sys);
            let key = CellKey {
                exponent: e,
                n: set.len(),
                max_degree: sys.gtd().max_degree(),
            };
            let cell = part.cells.entry(key).or_default();
            cell.total += 1;
            cell.satisfying_c += u64::from(predicted);
            cell.divisible += u64::from(verified);
            let label = format!("{set} e={e}");
            if predicted != verified {
                cell.mismatches += 1;
                part.mismatched.push((
                    *pos,
                    label.clone(),
                    ReproBundle {
                        message: "census: prediction and quotient disagree".to_string(),
                        set: set.to_strings(),
                        exponent: e.to_string(),
                        detail: format!("predicted {predicted}, verified {verified}"),
                        quotient: Some(quotient.to_string_rows()),
                    },
                ));
            }
            if witness.is_some() == verified {
                cell.witness_mismatches += 1;
            }
            if verified && degree_bound_applies(key.n, key.max_degree) {
                part.bound_hits.push((*pos, label));
            }
        }
    }
    Ok(part)
}

/// Runs prediction, exact verification and the brute witness scan on every
/// enumerated set and exponent, sharded over `jobs` threads. The report is
/// independent of `jobs`. Any mismatch or bound violation is returned as a
/// theorem violation carrying the first offending set.
pub fn run_census(universe: &Nat, n_max: usize, exponents: &[u32], jobs: usize) -> Result<CensusReport> {
    let report = census_report(universe, n_max, exponents, jobs)?;
    if let Some(first) = report.first_bundle.clone() {
        return Err(Error::TheoremViolation(Box::new(first)));
    }
    Ok(report.report)
}

/// Like [`run_census`] but returns the report even when it is not clean.
pub fn run_census_unchecked(
    universe: &Nat,
    n_max: usize,
    exponents: &[u32],
    jobs: usize,
) -> Result<CensusReport> {
    Ok(census_report(universe, n_max, exponents, jobs)?.report)
}

struct Checked {
    report: CensusReport,
    first_bundle: Option<ReproBundle>,
}

fn census_report(universe: &Nat, n_max: usize, exponents: &[u32], jobs: usize) -> Result<Checked> {
    if exponents.is_empty() || exponents.contains(&0) {
        return Err(Error::domain("exponents must be a nonempty list of positive integers"));
    }
    let sets: Vec<(usize, GcdClosedSet)> =
        enumerate_gcd_closed(universe, n_max)?.into_iter().enumerate().collect();
    let jobs = jobs.clamp(1, 64);
    let chunk = sets.len().div_ceil(jobs).max(1);
    let partials: Vec<Result<Partial>> = thread::scope(|s| {
        let handles: Vec<_> = sets
            .chunks(chunk)
            .map(|shard| s.spawn(move || census_shard(shard, exponents)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("census shard panicked"))
            .collect()
    });

    let mut cells: BTreeMap<CellKey, CensusCell> = BTreeMap::new();
    let mut bound_hits = Vec::new();
    let mut mismatched = Vec::new();
    for p in partials {
        let p = p?;
        for (k, c) in &p.cells {
            cells.entry(*k).or_default().merge(c);
        }
        bound_hits.extend(p.bound_hits);
        mismatched.extend(p.mismatched);
    }
    bound_hits.sort();
    mismatched.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut first_bundle = mismatched.first().map(|m| m.2.clone());
    let mut exps = exponents.to_vec();
    exps.sort_unstable();
    exps.dedup();
    let report = CensusReport {
        universe: universe.clone(),
        size_range: (1, n_max),
        exponents: exps,
        cells,
        degree_bound_violations: bound_hits.into_iter().map(|c| c.1).collect(),
        mismatched_sets: mismatched.into_iter().map(|m| m.1).collect(),
    };
    if first_bundle.is_none() && !report.is_clean() {
        let detail = report
            .degree_bound_violations
            .first()
            .cloned()
            .unwrap_or_else(|| "witness scan disagrees with the quotient".to_string());
        first_bundle = Some(ReproBundle {
            message: "census is not clean".to_string(),
            set: Vec::new(),
            exponent: String::new(),
            detail,
            quotient: None,
        });
    }
    Ok(Checked { report, first_bundle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setalg::{is_boolean_lattice, is_gcd_closed};
    use crate::theorem::predict_divides;

    fn vals(s: &GcdClosedSet) -> Vec<u64> {
        s.elems().iter().map(|x| x.to_string().parse().unwrap()).collect()
    }

    /// Brute filter over all nonempty subsets.
    fn brute_count(universe: u64, n_max: usize) -> usize {
        let ds = divisors(&nat(universe)).unwrap();
        (1u32..1 << ds.len())
            .filter(|m| (m.count_ones() as usize) <= n_max)
            .filter(|m| {
                let items = (0..ds.len()).filter(|i| m >> i & 1 == 1).map(|i| ds[i].clone());
                is_gcd_closed(&IntSet::new(items).unwrap())
            })
            .count()
    }

    #[test]
    fn chains() {
        assert_eq!(gen_divisor_chain(1, 3).unwrap().len(), 1);
        for seed in 0..20 {
            let c = gen_divisor_chain(6, seed).unwrap();
            let v = vals(&c);
            assert!(v.windows(2).all(|w| w[0] < w[1] && w[1] % w[0] == 0));
            assert_eq!(greatest_type_divisors(&c).max_degree(), 1);
            assert!(predict_divides(&c));
        }
        assert_eq!(gen_divisor_chain(4, 9).unwrap(), gen_divisor_chain(4, 9).unwrap());
    }

    #[test]
    fn boolean_sets() {
        assert_eq!(vals(&boolean_set_from_primes(&[2, 3]).unwrap()), vec![1, 2, 3, 6]);
        assert_eq!(vals(&boolean_set_from_primes(&[2, 3, 5]).unwrap()), vec![1, 2, 3, 5, 6, 10, 15, 30]);
        for l in 2..=5 {
            let s = gen_boolean_set(l, 11).unwrap();
            assert_eq!(s.len(), 1 << l);
            let gtd = greatest_type_divisors(&s);
            assert_eq!(gtd.max_degree(), l);
            assert!(is_boolean_lattice(&s, &gtd, s.max()).unwrap());
            assert!(predict_divides(&s));
        }
    }

    #[test]
    fn c_violating_sets() {
        let s = make_lcm_deficient_set(&[2, 3, 5, 7], 2).unwrap();
        assert_eq!(vals(&s), vec![1, 2, 3, 5, 7, 420]);
        assert_eq!(vals(&make_lcm_deficient_set(&[2, 3], 2).unwrap()), vec![1, 2, 3, 12]);
        for l in 2..=5 {
            for mode in [ViolationMode::LcmDeficient, ViolationMode::GtdMembership] {
                for seed in 0..5 {
                    let s = gen_c_violating(l, mode, seed).unwrap();
                    assert!(violates_as_intended(&s, l, mode));
                    assert!(!predict_divides(&s));
                }
            }
        }
        assert!(gen_c_violating(1, ViolationMode::LcmDeficient, 0).is_err());
    }

    #[test]
    fn random_sets_respect_bounds() {
        for seed in 0..50 {
            let s = gen_random_gcd_closed(10, 100_000, seed).unwrap();
            assert!(s.len() <= 10 && !s.is_empty());
            assert!(*s.max() <= nat(100_000));
            assert!(is_gcd_closed(s.as_int_set()));
        }
    }

    #[test]
    fn enumeration_examples() {
        let all = enumerate_gcd_closed(&nat(4), 3).unwrap();
        assert_eq!(all.len(), 7);
        let s6: Vec<Vec<u64>> = enumerate_gcd_closed(&nat(6), 4).unwrap().iter().map(vals).collect();
        assert!(s6.contains(&vec![1, 2, 3, 6]));
        assert!(!s6.contains(&vec![2, 3, 6]));
        assert_eq!(enumerate_gcd_closed(&nat(13), 5).unwrap().len(), 3);
        assert!(enumerate_gcd_closed(&nat(720720), 3).is_err());
        assert!(enumerate_gcd_closed(&nat(12), 11).is_err());
    }

    #[test]
    fn enumeration_matches_brute_filter() {
        for (u, n) in [(12, 6), (30, 8), (36, 5), (60, 4), (210, 3)] {
            let got = enumerate_gcd_closed(&nat(u), n).unwrap();
            assert_eq!(got.len(), brute_count(u, n), "universe {u}");
            let mut seen: Vec<Vec<u64>> = got.iter().map(vals).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), got.len());
        }
    }

    #[test]
    fn census_examples() {
        let r = run_census(&nat(12), 6, &[1], 2).unwrap();
        assert_eq!(r.mismatches(), 0);
        assert_eq!(r.total_sets(), brute_count(12, 6) as u64);

        let r = run_census(&nat(4), 3, &[1], 1).unwrap();
        assert_eq!(r.total_sets(), 7);

        let r = run_census(&nat(30), 8, &[1, 2], 3).unwrap();
        for e in [1, 2] {
            let key = CellKey { exponent: e, n: 8, max_degree: 3 };
            assert_eq!(r.cells[&key].divisible, r.cells[&key].total);
        }
    }

    #[test]
    fn census_is_shard_independent() {
        let a = run_census(&nat(36), 5, &[1, 2], 1).unwrap();
        let b = run_census(&nat(36), 5, &[2, 1], 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degree_bound() {
        assert!(degree_bound_applies(11, 4));
        assert!(!degree_bound_applies(12, 4));
        assert!(degree_bound_applies(16, 5));
        assert!(!degree_bound_applies(5, 3));
        let r = run_census(&nat(210), 6, &[1], 4).unwrap();
        let cells: Vec<_> = r.degree_bound_cells().collect();
        assert!(!cells.is_empty());
        assert!(cells.iter().all(|(_, c)| c.divisible == 0));
    }
}
