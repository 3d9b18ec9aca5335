//! The verdict engine.
//!
//! `(S^e) | [S^e]` holds iff every element with two or more greatest-type
//! divisors satisfies condition C (vacuously true when the maximum degree
//! is 1). [`predict_divides`] evaluates that criterion, [`verify_divides`]
//! checks it against the exact quotient, and the witness functions produce
//! a non-integral `g(k,m)` whenever the criterion fails.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divides, gcd, gcd_of, lcm, sign, Int, Nat, Ratio};
use crate::error::{Error, ReproBundle, Result};
use crate::matrices::{ExactMatrix, PowerGcdSystem};
use crate::setalg::{
    condition_report, greatest_type_divisors, subset_gcd_table, ConditionReport, GcdClosedSet,
    GtdMap, SUBSET_TABLE_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    BruteScan,
    Case1,
    Case2,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::BruteScan => "brute_scan",
            Construction::Case1 => "case1",
            Construction::Case2 => "case2",
        })
    }
}

/// A non-integral `g(k,m)`. `k` and `m` are 0-based indices into the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub k: usize,
    pub m: usize,
    pub x_k: Nat,
    pub x_m: Nat,
    pub g: Ratio,
    pub construction: Construction,
    pub in_unit_interval: bool,
}

impl Witness {
    fn new(set: &GcdClosedSet, k: usize, m: usize, g: Ratio, construction: Construction) -> Self {
        let in_unit_interval = g.is_positive() && g < Ratio::one();
        Witness {
            k,
            m,
            x_k: set.elems()[k].clone(),
            x_m: set.elems()[m].clone(),
            g,
            construction,
            in_unit_interval,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "g({},{}) = {} [x_k={}, x_m={}, {}]",
            self.k + 1,
            self.m + 1,
            self.g,
            self.x_k,
            self.x_m,
            self.construction
        )
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub set: GcdClosedSet,
    pub exponent: u32,
    pub max_gtd_degree: usize,
    pub gtd: GtdMap,
    pub predicted_divides: bool,
    pub verified_divides: bool,
    /// First non-integral `g(k,m)` in scan order; `None` when divisible.
    pub witness: Option<Witness>,
    pub condition_report: ConditionReport,
}

fn violation(set: &GcdClosedSet, e: u32, message: String, detail: String) -> Error {
    Error::TheoremViolation(Box::new(ReproBundle {
        message,
        set: set.to_strings(),
        exponent: e.to_string(),
        detail,
        quotient: None,
    }))
}

/// Structural prediction: condition C on every element of degree ≥ 2.
pub fn predict_divides(set: &GcdClosedSet) -> bool {
    let gtd = greatest_type_divisors(set);
    condition_report(set, &gtd).satisfies_c
}

/// Exact check that `[S^e](S^e)^{-1}` is integral, asserted against the
/// structural prediction. Disagreement is a [`Error::TheoremViolation`]
/// carrying the full quotient.
pub fn verify_divides(set: &GcdClosedSet, e: u32) -> Result<bool> {
    let sys = PowerGcdSystem::new(set.clone(), e)?;
    let report = condition_report(set, sys.gtd());
    let quotient = sys.quotient();
    check_agreement(&sys, report.satisfies_c, &quotient)
}

fn check_agreement(sys: &PowerGcdSystem, predicted: bool, quotient: &ExactMatrix) -> Result<bool> {
    let verified = quotient.is_integral();
    if verified != predicted {
        let detail = match quotient.first_non_integral() {
            Some((i, j)) => format!("quotient entry ({},{}) = {}", i + 1, j + 1, quotient[(i, j)]),
            None => "quotient is integral".to_string(),
        };
        return Err(Error::TheoremViolation(Box::new(ReproBundle {
            message: format!(
                "condition C predicts {} but the exact quotient says {}",
                verb(predicted),
                verb(verified)
            ),
            set: sys.set().to_strings(),
            exponent: sys.exponent().to_string(),
            detail,
            quotient: Some(quotient.to_string_rows()),
        })));
    }
    Ok(verified)
}

fn verb(divides: bool) -> &'static str {
    if divides {
        "divides"
    } else {
        "does not divide"
    }
}

/// Prediction, verification and a brute-force witness in one pass.
pub fn verdict(set: &GcdClosedSet, e: u32) -> Result<Verdict> {
    let sys = PowerGcdSystem::new(set.clone(), e)?;
    let report = condition_report(set, sys.gtd());
    let quotient = sys.quotient();
    let verified = check_agreement(&sys, report.satisfies_c, &quotient)?;
    let witness = if verified {
        None
    } else {
        Some(find_witness_brute(&sys).ok_or_else(|| {
            violation(
                set,
                e,
                "condition C fails but every g(k,m) is an integer".to_string(),
                String::new(),
            )
        })?)
    };
    Ok(Verdict {
        set: set.clone(),
        exponent: e,
        max_gtd_degree: sys.gtd().max_degree(),
        gtd: sys.gtd().clone(),
        predicted_divides: report.satisfies_c,
        verified_divides: verified,
        witness,
        condition_report: report,
    })
}

/// First `(k,m)` with `g(k,m) ∉ Z`, scanning `m` ascending then `k`
/// ascending.
pub fn find_witness_brute(sys: &PowerGcdSystem) -> Option<Witness> {
    let n = sys.set().len();
    (0..n).find_map(|m| {
        (0..n).find_map(|k| {
            let g = sys.g(k, m);
            (!g.is_integer())
                .then(|| Witness::new(sys.set(), k, m, g, Construction::BruteScan))
        })
    })
}

/// Which constructive witness applies to a condition-C violation at `x_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessCase {
    /// Some pair of greatest-type divisors has lcm below `x_m`.
    LcmDeficient,
    /// All pairwise lcms equal `x_m`, but some pairwise gcd is not a
    /// greatest-type divisor of both.
    GcdMembership,
}

/// `None` when `x_m` has fewer than two greatest-type divisors or
/// satisfies condition C.
pub fn witness_case(set: &GcdClosedSet, gtd: &GtdMap, m: usize) -> Option<WitnessCase> {
    let ys = gtd.of(m);
    if ys.len() < 2 {
        return None;
    }
    if lcm_deficient_partners(set, gtd, m).iter().any(|p| !p.is_empty()) {
        return Some(WitnessCase::LcmDeficient);
    }
    gcd_membership_pair(set, gtd, m).map(|_| WitnessCase::GcdMembership)
}

/// `Y_L(i)` as positions into `G_S(x_m)`.
fn lcm_deficient_partners(set: &GcdClosedSet, gtd: &GtdMap, m: usize) -> Vec<Vec<usize>> {
    let x = set.elems();
    let ys = gtd.of(m);
    (0..ys.len())
        .map(|i| {
            (0..ys.len())
                .filter(|&j| j != i && lcm(&x[ys[i]], &x[ys[j]]).expect("positive") < x[m])
                .collect()
        })
        .collect()
}

/// Positions `(p, q)` into `G_S(x_m)` with `(y_p, y_q) ∉ G_S(y_q)`, first
/// in pair order.
fn gcd_membership_pair(set: &GcdClosedSet, gtd: &GtdMap, m: usize) -> Option<(usize, usize)> {
    let x = set.elems();
    let ys = gtd.of(m);
    for a in 0..ys.len() {
        for b in a + 1..ys.len() {
            let d = gcd(&x[ys[a]], &x[ys[b]]);
            let di = set.index_of(&d).expect("gcd-closed");
            if !gtd.contains(ys[b], di) {
                return Some((a, b));
            }
            if !gtd.contains(ys[a], di) {
                return Some((b, a));
            }
        }
    }
    None
}

fn require_degree_four(sys: &PowerGcdSystem, m: usize) -> Result<()> {
    let l = sys.gtd().degree(m);
    if l < 4 {
        return Err(Error::domain(format!(
            "x_m = {} has {l} greatest-type divisors, the construction needs at least 4",
            sys.set().elems()[m]
        )));
    }
    if l > SUBSET_TABLE_CAP {
        return Err(Error::Size {
            what: "greatest-type divisors",
            got: l,
            limit: SUBSET_TABLE_CAP,
        });
    }
    Ok(())
}

fn finish_constructed(
    sys: &PowerGcdSystem,
    k: usize,
    m: usize,
    construction: Construction,
) -> Result<Witness> {
    let g = sys.g(k, m);
    let w = Witness::new(sys.set(), k, m, g, construction);
    if !w.in_unit_interval {
        return Err(violation(
            sys.set(),
            sys.exponent(),
            format!("{construction} witness outside (0,1)"),
            w.to_string(),
        ));
    }
    Ok(w)
}

/// Lexicographically ordered `size`-subsets of `items`.
fn combinations(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < size - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, size, 0, &mut Vec::with_capacity(size), &mut out);
    out
}

/// Witness for an element whose greatest-type divisors include a pair with
/// lcm below `x_m`.
///
/// Orders `G_S(x_m)` so that `y_1` has the fewest lcm-deficient partners
/// (`a` of them, smallest index on ties) followed by those partners; with
/// `A` the first `a` positions, finds the least `b` such that every
/// `b`-subset `I ⊆ A` has `gcd(Y_{I ∪ (L∖A)}) = gcd(Y_L)`, takes the
/// lexicographically first `(b−1)`-subset `I_0` whose gcd is larger, and
/// returns `x_k = gcd(Y_{I_0 ∪ (L∖A)})`.
pub fn construct_witness_case1(sys: &PowerGcdSystem, m: usize) -> Result<Witness> {
    require_degree_four(sys, m)?;
    let set = sys.set();
    let x = set.elems();
    let ys = sys.gtd().of(m);
    let partners = lcm_deficient_partners(set, sys.gtd(), m);
    let (first, a) = partners
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_empty())
        .map(|(i, p)| (i, p.len()))
        .min_by_key(|&(i, len)| (len, i))
        .ok_or_else(|| Error::domain("no pair of greatest-type divisors has lcm below x_m"))?;

    let mut order = vec![first];
    order.extend(&partners[first]);
    let rest_positions: Vec<usize> = (0..ys.len()).filter(|p| !order.contains(p)).collect();
    order.extend(rest_positions);
    let value = |pos: usize| &x[ys[order[pos]]];
    let a_positions: Vec<usize> = (0..a).collect();
    let rest: Vec<&Nat> = (a..ys.len()).map(value).collect();
    let gcd_with_rest = |subset: &[usize]| -> Nat {
        gcd_of(subset.iter().map(|&p| value(p)).chain(rest.iter().copied())).expect("nonempty")
    };
    let g_all = gcd_of(ys.iter().map(|&j| &x[j]))?;

    let b = (1..=a)
        .find(|&b| combinations(&a_positions, b).iter().all(|i| gcd_with_rest(i) == g_all))
        .ok_or_else(|| {
            violation(
                set,
                sys.exponent(),
                "no size b makes every subset gcd collapse to gcd(Y_L)".to_string(),
                format!("x_m = {}", x[m]),
            )
        })?;
    let i0 = combinations(&a_positions, b - 1)
        .into_iter()
        .find(|i| gcd_with_rest(i) > g_all)
        .ok_or_else(|| {
            violation(
                set,
                sys.exponent(),
                format!("no subset of size b-1 = {} exceeds gcd(Y_L)", b - 1),
                format!("x_m = {}", x[m]),
            )
        })?;
    let x_k = gcd_with_rest(&i0);
    let k = set.index_of(&x_k).expect("gcd-closed");
    finish_constructed(sys, k, m, Construction::Case1)
}

/// Witness for an element whose greatest-type divisors pairwise have lcm
/// `x_m` but where some `(y_1, y_2) ∉ G_S(y_2)`.
///
/// `x_c` is the least element strictly between `(y_1, y_2)` and `y_2` in
/// the divisibility order, and `x_k = (x_c, gcd(Y_{L∖{1,2}}))`.
pub fn construct_witness_case2(sys: &PowerGcdSystem, m: usize) -> Result<Witness> {
    require_degree_four(sys, m)?;
    let set = sys.set();
    let x = set.elems();
    let ys = sys.gtd().of(m);
    if lcm_deficient_partners(set, sys.gtd(), m)
        .iter()
        .any(|p| !p.is_empty())
    {
        return Err(Error::domain("a pair of greatest-type divisors has lcm below x_m"));
    }
    let (p1, p2) = gcd_membership_pair(set, sys.gtd(), m)
        .ok_or_else(|| Error::domain("x_m satisfies condition C"))?;
    let (y1, y2) = (&x[ys[p1]], &x[ys[p2]]);
    let d = gcd(y1, y2);
    let x_c = x
        .iter()
        .filter(|u| *u != &d && *u != y2 && divides(&d, u) && divides(u, y2))
        .min()
        .ok_or_else(|| {
            violation(
                set,
                sys.exponent(),
                "no element strictly between (y_1,y_2) and y_2".to_string(),
                format!("y_1 = {y1}, y_2 = {y2}"),
            )
        })?;
    let others = gcd_of(
        (0..ys.len())
            .filter(|&p| p != p1 && p != p2)
            .map(|p| &x[ys[p]]),
    )?;
    let x_d = gcd(x_c, &others);
    let k = set.index_of(&x_d).expect("gcd-closed");
    finish_constructed(sys, k, m, Construction::Case2)
}

/// Dispatches to the constructor matching [`witness_case`]. `None` when
/// `x_m` satisfies condition C or has fewer than four greatest-type
/// divisors.
pub fn constructive_witness(sys: &PowerGcdSystem, m: usize) -> Result<Option<Witness>> {
    if sys.gtd().degree(m) < 4 {
        return Ok(None);
    }
    match witness_case(sys.set(), sys.gtd(), m) {
        None => Ok(None),
        Some(WitnessCase::LcmDeficient) => construct_witness_case1(sys, m).map(Some),
        Some(WitnessCase::GcdMembership) => construct_witness_case2(sys, m).map(Some),
    }
}

/// `x^e + Σ_{∅≠I⊆K} (−1)^{|I|} gcd(Y_I)^e` for a multiset `Y` of proper
/// divisors of `x`. Always positive; a non-positive value is reported as a
/// theorem violation.
pub fn alternating_sum(x: &Nat, ys: &[Nat], e: u32) -> Result<Int> {
    if e == 0 {
        return Err(Error::domain("exponent must be at least 1"));
    }
    if let Some(y) = ys.iter().find(|y| !divides(y, x) || *y >= x || y.is_zero()) {
        return Err(Error::domain(format!("{y} is not a proper divisor of {x}")));
    }
    let table = subset_gcd_table(ys)?;
    let mut acc = Int::from(x.pow(e));
    for (mask, g) in table.iter() {
        acc += Int::from(g.pow(e)) * sign(mask.count_ones());
    }
    if !acc.is_positive() {
        let ys_str: Vec<String> = ys.iter().map(ToString::to_string).collect();
        return Err(Error::TheoremViolation(Box::new(ReproBundle {
            message: "alternating gcd sum is not positive".to_string(),
            set: ys_str,
            exponent: e.to_string(),
            detail: format!("x = {x}, sum = {acc}"),
            quotient: None,
        })));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::nat;

    fn set(v: &[u64]) -> GcdClosedSet {
        GcdClosedSet::from_u64s(v).unwrap()
    }

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::new(Int::from(n), Int::from(d))
    }

    #[test]
    fn predictions() {
        assert!(predict_divides(&set(&[1, 2, 4, 8])));
        assert!(predict_divides(&set(&[1, 2, 3, 6])));
        assert!(!predict_divides(&set(&[1, 2, 4, 6, 8, 24])));
        assert!(!predict_divides(&set(&[1, 2, 3, 12])));
    }

    #[test]
    fn verifications() {
        assert!(verify_divides(&set(&[1, 2]), 1).unwrap());
        for e in 1..=2 {
            assert!(!verify_divides(&set(&[1, 2, 3, 12]), e).unwrap());
        }
        let d210: Vec<u64> = vec![1, 2, 3, 5, 6, 7, 10, 14, 15, 21, 30, 35, 42, 70, 105, 210];
        assert!(verify_divides(&set(&d210), 1).unwrap());
        assert!(!verify_divides(&set(&[1, 2, 4, 6, 8, 24]), 1).unwrap());
    }

    #[test]
    fn brute_witnesses() {
        let sys = PowerGcdSystem::new(set(&[1, 2, 3, 6]), 1).unwrap();
        assert!(find_witness_brute(&sys).is_none());

        let sys = PowerGcdSystem::new(set(&[1, 2, 3, 12]), 1).unwrap();
        let w = find_witness_brute(&sys).unwrap();
        assert_eq!((w.k, w.m, w.g.clone()), (1, 3, r(3, 4)));
        assert_eq!(w.construction, Construction::BruteScan);

        let sys = PowerGcdSystem::new(set(&[1, 2, 3, 5, 7, 420]), 1).unwrap();
        let w = find_witness_brute(&sys).unwrap();
        assert_eq!(w.x_m, nat(420));
        assert!(!sys.g(4, 5).is_integer());
    }

    #[test]
    fn case1_on_four_primes() {
        let sys = PowerGcdSystem::new(set(&[1, 2, 3, 5, 7, 420]), 1).unwrap();
        assert_eq!(witness_case(sys.set(), sys.gtd(), 5), Some(WitnessCase::LcmDeficient));
        let w = construct_witness_case1(&sys, 5).unwrap();
        assert_eq!(w.x_k, nat(7));
        assert_eq!(w.g, r(26, 29));
        assert!(w.in_unit_interval);
        assert_eq!(w.construction, Construction::Case1);
        assert!(construct_witness_case2(&sys, 5).is_err());
    }

    #[test]
    fn constructors_reject_condition_c_elements() {
        let mut s: Vec<u64> = vec![30, 42, 70, 105, 210];
        s.extend([1, 2, 3, 5, 6, 7, 10, 14, 15, 21, 35]);
        let sys = PowerGcdSystem::new(set(&s), 1).unwrap();
        let top = sys.set().len() - 1;
        assert_eq!(witness_case(sys.set(), sys.gtd(), top), None);
        assert!(matches!(construct_witness_case1(&sys, top), Err(Error::Domain(_))));
        assert!(matches!(construct_witness_case2(&sys, top), Err(Error::Domain(_))));
        assert!(constructive_witness(&sys, top).unwrap().is_none());

        let sys = PowerGcdSystem::new(set(&[1, 2, 3, 12]), 1).unwrap();
        assert!(matches!(construct_witness_case1(&sys, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn case2_on_engineered_set() {
        // x = 4·3·5·7, y_1 = 105, y_2 = 4·5·7 = 140, (y_1,y_2) = 35 and
        // u = 70 sits strictly between 35 and 140.
        let gens = crate::setalg::IntSet::from_u64s(&[420, 105, 140, 84, 60, 70]).unwrap();
        let s = crate::setalg::closure(&gens).unwrap();
        let sys = PowerGcdSystem::new(s, 1).unwrap();
        let top = sys.set().len() - 1;
        assert_eq!(sys.gtd().degree(top), 4);
        assert_eq!(witness_case(sys.set(), sys.gtd(), top), Some(WitnessCase::GcdMembership));
        for e in 1..=3 {
            let sys = PowerGcdSystem::new(sys.set().clone(), e).unwrap();
            let w = construct_witness_case2(&sys, top).unwrap();
            assert!(w.in_unit_interval);
            assert_eq!(w.g, sys.g(w.k, w.m));
        }
        assert!(construct_witness_case1(&sys, top).is_err());
    }

    #[test]
    fn alternating_sum_examples() {
        assert_eq!(alternating_sum(&nat(6), &[], 2).unwrap(), Int::from(36));
        assert_eq!(alternating_sum(&nat(6), &[nat(2), nat(3)], 1).unwrap(), Int::from(2));
        assert_eq!(alternating_sum(&nat(6), &[nat(2), nat(2)], 1).unwrap(), Int::from(4));
        assert!(alternating_sum(&nat(6), &[nat(6)], 1).is_err());
        assert!(alternating_sum(&nat(6), &[nat(4)], 1).is_err());
    }

    #[test]
    fn verdict_fields() {
        let v = verdict(&set(&[1, 2, 3, 12]), 1).unwrap();
        assert!(!v.predicted_divides && !v.verified_divides);
        assert_eq!(v.max_gtd_degree, 2);
        assert_eq!(v.witness.unwrap().g, r(3, 4));

        let v = verdict(&set(&[1, 2, 3, 6]), 3).unwrap();
        assert!(v.predicted_divides && v.verified_divides);
        assert!(v.witness.is_none());
    }
}
