//! Finite sets of positive integers under divisibility: gcd-closure,
//! greatest-type divisors, conditions C and M, and the lattice shape
//! around an element.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divides, gcd, gcd_of, lcm, lcm_of, Nat, Ratio};
use crate::error::{Error, Result};

/// Largest generator list a subset table accepts.
pub const SUBSET_TABLE_CAP: usize = 20;
/// Largest input to [`duality_check`].
pub const DUALITY_CAP: usize = 12;

/// Strictly increasing list of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntSet(Vec<Nat>);

impl IntSet {
    /// Sorts and deduplicates. Rejects zero.
    pub fn new<I: IntoIterator<Item = Nat>>(items: I) -> Result<Self> {
        let mut v: Vec<Nat> = items.into_iter().collect();
        if v.iter().any(Zero::is_zero) {
            return Err(Error::domain("set elements must be positive"));
        }
        v.sort();
        v.dedup();
        Ok(IntSet(v))
    }

    pub fn from_u64s(items: &[u64]) -> Result<Self> {
        Self::new(items.iter().map(|&v| Nat::from(v)))
    }

    pub fn elems(&self) -> &[Nat] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &Nat) -> bool {
        self.0.binary_search(x).is_ok()
    }

    pub fn index_of(&self, x: &Nat) -> Option<usize> {
        self.0.binary_search(x).ok()
    }

    pub fn into_vec(self) -> Vec<Nat> {
        self.0
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// A nonempty [`IntSet`] containing the gcd of every pair of its elements.
///
/// Indices into the set follow ascending order, so `x_1 < x_2 < … < x_n`
/// corresponds to indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GcdClosedSet(IntSet);

impl GcdClosedSet {
    /// Fails with [`Error::NotGcdClosed`] listing what the closure would add.
    pub fn new(set: IntSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::domain("empty set"));
        }
        if !is_gcd_closed(&set) {
            let closed = closure(&set)?;
            let missing = closed
                .elems()
                .iter()
                .filter(|x| !set.contains(x))
                .map(ToString::to_string)
                .collect();
            return Err(Error::NotGcdClosed { missing });
        }
        Ok(GcdClosedSet(set))
    }

    pub fn from_u64s(items: &[u64]) -> Result<Self> {
        Self::new(IntSet::from_u64s(items)?)
    }

    pub fn as_int_set(&self) -> &IntSet {
        &self.0
    }

    pub fn elems(&self) -> &[Nat] {
        self.0.elems()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &Nat) -> bool {
        self.0.contains(x)
    }

    pub fn index_of(&self, x: &Nat) -> Option<usize> {
        self.0.index_of(x)
    }

    pub fn min(&self) -> &Nat {
        &self.elems()[0]
    }

    pub fn max(&self) -> &Nat {
        self.elems().last().expect("nonempty")
    }

    /// Elements as decimal strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.elems().iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for GcdClosedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn is_gcd_closed(set: &IntSet) -> bool {
    let e = set.elems();
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            if !set.contains(&gcd(&e[i], &e[j])) {
                return false;
            }
        }
    }
    true
}

/// The smallest gcd-closed superset `⟨A⟩`: all gcds of nonempty subsets.
pub fn closure(set: &IntSet) -> Result<GcdClosedSet> {
    if set.is_empty() {
        return Err(Error::domain("closure of an empty set"));
    }
    // Every subset gcd is reached by repeatedly folding one more generator
    // into an already-known gcd.
    let mut all: BTreeSet<Nat> = set.elems().iter().cloned().collect();
    let mut frontier: Vec<Nat> = all.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for y in set.elems() {
                let g = gcd(f, y);
                if all.insert(g.clone()) {
                    next.push(g);
                }
            }
        }
        frontier = next;
    }
    Ok(GcdClosedSet(IntSet(all.into_iter().collect())))
}

/// Greatest-type divisors of every element: the elements it covers in the
/// divisibility order of the set. Stored as ascending indices into the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtdMap {
    per: Vec<Vec<usize>>,
    max_degree: usize,
}

impl GtdMap {
    pub fn of(&self, i: usize) -> &[usize] {
        &self.per[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.per[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.per.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per.is_empty()
    }

    /// Values `G_S(x_i)`, ascending.
    pub fn values(&self, set: &GcdClosedSet, i: usize) -> Vec<Nat> {
        self.per[i].iter().map(|&j| set.elems()[j].clone()).collect()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.per[i].binary_search(&j).is_ok()
    }
}

pub fn greatest_type_divisors(set: &GcdClosedSet) -> GtdMap {
    let e = set.elems();
    let n = e.len();
    let mut per = Vec::with_capacity(n);
    for i in 0..n {
        let below: Vec<usize> = (0..i).filter(|&j| divides(&e[j], &e[i])).collect();
        let maximal: Vec<usize> = below
            .iter()
            .copied()
            .filter(|&j| !below.iter().any(|&k| k != j && divides(&e[j], &e[k])))
            .collect();
        per.push(maximal);
    }
    let max_degree = per.iter().map(Vec::len).max().unwrap_or(0);
    GtdMap { per, max_degree }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `[y,z] ≠ x`.
    Lcm,
    /// `(y,z) ∉ G_S(y) ∩ G_S(z)`.
    GcdMembership,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub y: Nat,
    pub z: Nat,
    pub clause: Clause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementCondition {
    pub index: usize,
    pub value: Nat,
    pub satisfies_c: bool,
    pub satisfies_m: bool,
    /// First failing pair in index order; lcm failures take precedence.
    pub violation: Option<Violation>,
}

/// Per-element conditions C and M for every element with at least two
/// greatest-type divisors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub elements: Vec<ElementCondition>,
    pub satisfies_c: bool,
    pub satisfies_m: bool,
}

impl ConditionReport {
    pub fn violations(&self) -> impl Iterator<Item = &ElementCondition> {
        self.elements.iter().filter(|c| !c.satisfies_c)
    }
}

pub fn condition_report(set: &GcdClosedSet, gtd: &GtdMap) -> ConditionReport {
    let e = set.elems();
    let mut elements = Vec::new();
    for i in 0..e.len() {
        let g = gtd.of(i);
        if g.len() < 2 {
            continue;
        }
        let mut lcm_fail = None;
        let mut member_fail = None;
        for (a, &y) in g.iter().enumerate() {
            for &z in &g[a + 1..] {
                let l = lcm(&e[y], &e[z]).expect("positive");
                if l != e[i] {
                    lcm_fail.get_or_insert((y, z));
                }
                let d = gcd(&e[y], &e[z]);
                let di = set.index_of(&d).expect("gcd-closed");
                if !(gtd.contains(y, di) && gtd.contains(z, di)) {
                    member_fail.get_or_insert((y, z));
                }
            }
        }
        let satisfies_m = lcm_fail.is_none();
        let satisfies_c = satisfies_m && member_fail.is_none();
        let violation = lcm_fail
            .map(|p| (p, Clause::Lcm))
            .or(member_fail.map(|p| (p, Clause::GcdMembership)))
            .map(|((y, z), clause)| Violation {
                y: e[y].clone(),
                z: e[z].clone(),
                clause,
            });
        elements.push(ElementCondition {
            index: i,
            value: e[i].clone(),
            satisfies_c,
            satisfies_m,
            violation,
        });
    }
    let satisfies_c = elements.iter().all(|c| c.satisfies_c);
    let satisfies_m = elements.iter().all(|c| c.satisfies_m);
    ConditionReport {
        elements,
        satisfies_c,
        satisfies_m,
    }
}

/// The sets `A_S(a,b)`, `B_S(a,b)` and `C_S(a,b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxSets {
    pub a_set: Vec<Nat>,
    pub b_set: Vec<Nat>,
    pub c_set: Vec<Nat>,
}

pub fn aux_sets(set: &GcdClosedSet, gtd: &GtdMap, a: &Nat, b: &Nat) -> Result<AuxSets> {
    let bi = set
        .index_of(b)
        .ok_or_else(|| Error::domain(format!("{b} is not in the set")))?;
    if !set.contains(a) || !divides(a, b) || a >= b {
        return Err(Error::domain(format!(
            "need a, b in the set with a | b and a < b (a={a}, b={b})"
        )));
    }
    let a_set: Vec<Nat> = set
        .elems()
        .iter()
        .filter(|u| *u != a && divides(a, u) && divides(u, b))
        .cloned()
        .collect();
    let gb = gtd.values(set, bi);
    let b_set = a_set
        .iter()
        .filter(|u| gb.contains(u))
        .cloned()
        .collect();
    let mut c_set = a_set.clone();
    c_set.push(a.clone());
    c_set.sort();
    Ok(AuxSets {
        a_set,
        b_set,
        c_set,
    })
}

/// `gcd(Y_I)` for every nonempty index subset `I`, keyed by bitmask
/// (bit `t` set ⇔ `y_t ∈ I`).
#[derive(Clone, Debug)]
pub struct SubsetGcdTable {
    len: usize,
    table: Vec<Nat>,
}

impl SubsetGcdTable {
    /// Number of generators.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Panics on the empty mask.
    pub fn get(&self, mask: u32) -> &Nat {
        assert!(mask != 0, "gcd of the empty subset is undefined");
        &self.table[mask as usize]
    }

    /// `(mask, gcd)` over all nonempty subsets in increasing mask order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &Nat)> {
        self.table
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, g)| (m as u32, g))
    }

    pub fn all_distinct(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.table.len());
        self.iter().all(|(_, g)| seen.insert(g))
    }
}

pub fn subset_gcd_table(ys: &[Nat]) -> Result<SubsetGcdTable> {
    if ys.len() > SUBSET_TABLE_CAP {
        return Err(Error::Size {
            what: "subset table generators",
            got: ys.len(),
            limit: SUBSET_TABLE_CAP,
        });
    }
    let size = 1usize << ys.len();
    let mut table = vec![Nat::zero(); size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        table[mask] = if rest == 0 {
            ys[low].clone()
        } else {
            gcd(&table[rest], &ys[low])
        };
    }
    Ok(SubsetGcdTable {
        len: ys.len(),
        table,
    })
}

/// Whether `⟨G_S(x)⟩ ∪ {x}` is order-isomorphic to the Boolean lattice on
/// `|G_S(x)|` atoms. Only the order is compared; joins are not required to
/// lie in the set.
pub fn is_boolean_lattice(set: &GcdClosedSet, gtd: &GtdMap, x: &Nat) -> Result<bool> {
    let i = set
        .index_of(x)
        .ok_or_else(|| Error::domain(format!("{x} is not in the set")))?;
    let l = gtd.degree(i);
    if l < 2 {
        return Err(Error::domain(format!(
            "{x} has {l} greatest-type divisors, need at least 2"
        )));
    }
    let table = subset_gcd_table(&gtd.values(set, i))?;
    if !table.all_distinct() {
        return Ok(false);
    }
    // With distinct subset gcds, gcd(Y_I) | gcd(Y_J) forces J ⊆ I, since
    // otherwise gcd(Y_{I∪J}) = gcd(Y_I). The explicit scan is kept for
    // small l.
    if l <= 10 {
        let full = (1u32 << l) - 1;
        for i_mask in 1..=full {
            for j_mask in 1..=full {
                let subset = j_mask & !i_mask == 0;
                if divides(table.get(i_mask), table.get(j_mask)) != subset {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Evaluates `Π_{∅≠B⊆A} lcm(B)^{(−1)^{|B|−1}}` exactly and compares it with
/// `gcd(A)`.
pub fn duality_check(set: &IntSet) -> Result<bool> {
    let a = set.elems();
    if a.is_empty() {
        return Err(Error::domain("duality check on an empty set"));
    }
    if a.len() > DUALITY_CAP {
        return Err(Error::Size {
            what: "duality check input",
            got: a.len(),
            limit: DUALITY_CAP,
        });
    }
    let mut num = Nat::one();
    let mut den = Nat::one();
    for mask in 1u32..(1 << a.len()) {
        let members: Vec<&Nat> = (0..a.len())
            .filter(|t| mask >> t & 1 == 1)
            .map(|t| &a[t])
            .collect();
        let l = lcm_of(members)?;
        if mask.count_ones() % 2 == 1 {
            num *= l;
        } else {
            den *= l;
        }
    }
    let product = Ratio::new(num.into(), den.into());
    Ok(product == Ratio::from_integer(gcd_of(a)?.into()))
}

/// Cover pairs `(a, b)` of the divisibility order, sorted.
pub fn hasse_covers(set: &GcdClosedSet, gtd: &GtdMap) -> Vec<(Nat, Nat)> {
    let e = set.elems();
    let mut covers: Vec<(usize, usize)> = (0..e.len())
        .flat_map(|b| gtd.of(b).iter().map(move |&a| (a, b)))
        .collect();
    covers.sort();
    covers
        .into_iter()
        .map(|(a, b)| (e[a].clone(), e[b].clone()))
        .collect()
}
