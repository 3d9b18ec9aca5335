//! Exact power GCD/LCM matrices on gcd-closed sets and the machinery of the
//! closed-form inverse: the diagonal weights `α_{e,S}`, the Möbius-weighted
//! coefficients `c_{ij}`, and the rationals `g(k,m)`.
//!
//! Every quantity with two known formulas has both implemented here; the
//! tests and the acceptance suite check them against each other.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{divides, divisors, divisors_with_mobius, gcd, sign, xi_mu, Int, Nat, Ratio};
use crate::error::{Error, Result};
use crate::setalg::{greatest_type_divisors, subset_gcd_table, GcdClosedSet, GtdMap};

/// Dense square matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    n: usize,
    entries: Vec<Ratio>,
}

impl ExactMatrix {
    pub fn zeros(n: usize) -> Self {
        ExactMatrix {
            n,
            entries: vec![Ratio::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                Ratio::one()
            } else {
                Ratio::zero()
            }
        })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Ratio>(n: usize, mut f: F) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        ExactMatrix { n, entries }
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self::from_fn(n, |i, j| Ratio::from_integer(Int::from(rows[i][j])))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// True iff every entry has denominator 1.
    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(Ratio::is_integer)
    }

    /// First non-integral entry in row-major order.
    pub fn first_non_integral(&self) -> Option<(usize, usize)> {
        self.entries
            .iter()
            .position(|r| !r.is_integer())
            .map(|p| (p / self.n, p % self.n))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Ratio]> {
        self.entries.chunks(self.n.max(1))
    }

    /// Entries as decimal strings (`"3/4"` for non-integers), row-major.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        self.rows()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for ExactMatrix {
    type Output = Ratio;
    fn index(&self, (i, j): (usize, usize)) -> &Ratio {
        &self.entries[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Ratio {
        &mut self.entries[i * self.n + j]
    }
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        ExactMatrix::from_fn(n, |i, j| {
            let mut acc = Ratio::zero();
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let b = &rhs[(k, j)];
                if !b.is_zero() {
                    acc += a * b;
                }
            }
            acc
        })
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = self.to_string_rows();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for row in &cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "[ {} ]", line.join("  "))?;
        }
        Ok(())
    }
}

/// `α_{e,S}(x_i)` for every element, in set order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaVector {
    exponent: u32,
    values: Vec<Int>,
}

impl AlphaVector {
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn values(&self) -> &[Int] {
        &self.values
    }

    pub fn get(&self, i: usize) -> &Int {
        &self.values[i]
    }

    pub fn all_positive(&self) -> bool {
        self.values.iter().all(Signed::is_positive)
    }
}

/// The coefficients `c_{ij}`; zero unless `x_i | x_j`, independent of `e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefMatrix {
    n: usize,
    c: Vec<i64>,
}

impl CoefMatrix {
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.c[i * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn add(&mut self, i: usize, j: usize, v: i64) {
        self.c[i * self.n + j] += v;
    }
}

fn check_exponent(e: u32) -> Result<()> {
    if e == 0 {
        return Err(Error::domain("exponent must be at least 1"));
    }
    Ok(())
}

fn int_pow(x: &Nat, e: u32) -> Int {
    Int::from(x.pow(e))
}

fn ratio_of(x: Nat) -> Ratio {
    Ratio::from_integer(Int::from(x))
}

/// `((x_i, x_j)^e)`.
pub fn power_gcd_matrix(set: &GcdClosedSet, e: u32) -> ExactMatrix {
    let x = set.elems();
    ExactMatrix::from_fn(x.len(), |i, j| ratio_of(gcd(&x[i], &x[j]).pow(e)))
}

/// `([x_i, x_j]^e)`.
pub fn power_lcm_matrix(set: &GcdClosedSet, e: u32) -> ExactMatrix {
    let x = set.elems();
    ExactMatrix::from_fn(x.len(), |i, j| ratio_of(x[i].lcm(&x[j]).pow(e)))
}

/// `α_{e,S}(x) = Σ (ξ_e ∗ μ)(d)` over divisors `d` of `x` that divide no
/// smaller element of `S`.
pub fn alpha_by_definition(set: &GcdClosedSet, e: u32) -> Result<AlphaVector> {
    check_exponent(e)?;
    let x = set.elems();
    let mut values = Vec::with_capacity(x.len());
    for (i, xi) in x.iter().enumerate() {
        let mut acc = Nat::zero();
        for d in divisors(xi)? {
            if x[..i].iter().any(|y| divides(&d, y)) {
                continue;
            }
            acc += xi_mu(e, &d)?;
        }
        values.push(Int::from(acc));
    }
    Ok(AlphaVector {
        exponent: e,
        values,
    })
}

/// `α_{e,S}(x) = x^e + Σ_{∅≠I⊆L} (−1)^{|I|} gcd(Y_I)^e` with `Y_L = G_S(x)`.
pub fn alpha_by_gtd(set: &GcdClosedSet, e: u32, gtd: &GtdMap) -> Result<AlphaVector> {
    check_exponent(e)?;
    let x = set.elems();
    let mut values = Vec::with_capacity(x.len());
    for (i, xi) in x.iter().enumerate() {
        let table = subset_gcd_table(&gtd.values(set, i))?;
        let mut acc = int_pow(xi, e);
        for (mask, g) in table.iter() {
            acc += int_pow(g, e) * sign(mask.count_ones());
        }
        values.push(acc);
    }
    Ok(AlphaVector {
        exponent: e,
        values,
    })
}

/// `c_{ij} = Σ μ(d)` over `d` with `d·x_i | x_j` and `d·x_i` dividing no
/// `x_t < x_j` in `S`.
pub fn c_by_definition(set: &GcdClosedSet) -> Result<CoefMatrix> {
    let x = set.elems();
    let n = x.len();
    let mut c = CoefMatrix {
        n,
        c: vec![0; n * n],
    };
    for j in 0..n {
        for i in 0..=j {
            if !divides(&x[i], &x[j]) {
                continue;
            }
            let q = &x[j] / &x[i];
            let mut acc = 0i64;
            for (d, mu) in divisors_with_mobius(&q)? {
                if mu == 0 {
                    continue;
                }
                let dx = &d * &x[i];
                if x[..j].iter().any(|t| divides(&dx, t)) {
                    continue;
                }
                acc += mu as i64;
            }
            c.add(i, j, acc);
        }
    }
    Ok(c)
}

/// `c_{rm} = [x_r = x_m] + Σ (−1)^{|I|}` over nonempty `I ⊆ L` with
/// `gcd(Y_I) = x_r`, where `Y_L = G_S(x_m)`.
pub fn c_by_gtd(set: &GcdClosedSet, gtd: &GtdMap) -> Result<CoefMatrix> {
    let n = set.len();
    let mut c = CoefMatrix {
        n,
        c: vec![0; n * n],
    };
    for m in 0..n {
        c.add(m, m, 1);
        let table = subset_gcd_table(&gtd.values(set, m))?;
        for (mask, g) in table.iter() {
            let r = set.index_of(g).expect("gcd-closed");
            c.add(r, m, sign(mask.count_ones()));
        }
    }
    Ok(c)
}

/// Closed-form inverse `W = (w_{ij})` of `(S^e)`:
/// `w_{ij} = Σ_{x_i|x_k, x_j|x_k} c_{ik} c_{jk} / α_{e,S}(x_k)`.
pub fn inverse_power_gcd(c: &CoefMatrix, alpha: &AlphaVector) -> ExactMatrix {
    let n = c.dim();
    assert_eq!(n, alpha.values().len(), "dimension mismatch");
    let mut w = ExactMatrix::zeros(n);
    for k in 0..n {
        let col: Vec<(usize, i64)> = (0..n)
            .map(|i| (i, c.get(i, k)))
            .filter(|&(_, v)| v != 0)
            .collect();
        for &(i, ci) in &col {
            for &(j, cj) in &col {
                w[(i, j)] += Ratio::new(Int::from(ci * cj), alpha.get(k).clone());
            }
        }
    }
    w
}

/// `E` with `e_{ij} = 1` iff `x_j | x_i` and `Δ = diag(α)`, so that
/// `(S^e) = E Δ Eᵀ`. `E` is unit lower triangular.
pub fn gcd_factorization(set: &GcdClosedSet, alpha: &AlphaVector) -> (ExactMatrix, ExactMatrix) {
    let x = set.elems();
    let n = x.len();
    let e = ExactMatrix::from_fn(n, |i, j| {
        if divides(&x[j], &x[i]) {
            Ratio::one()
        } else {
            Ratio::zero()
        }
    });
    let delta = ExactMatrix::from_fn(n, |i, j| {
        if i == j {
            Ratio::from_integer(alpha.get(i).clone())
        } else {
            Ratio::zero()
        }
    });
    (e, delta)
}

/// `det (S^e) = Π α_{e,S}(x)`.
pub fn determinant_via_alpha(alpha: &AlphaVector) -> Int {
    alpha.values().iter().product()
}

/// Scales every row to integers; returns the integer rows and the per-row
/// scale factors.
fn integer_rows(m: &ExactMatrix) -> (Vec<Vec<Int>>, Vec<Int>) {
    let mut rows = Vec::with_capacity(m.dim());
    let mut scales = Vec::with_capacity(m.dim());
    for row in m.rows() {
        let scale = row
            .iter()
            .fold(Int::one(), |acc, r| acc.lcm(r.denom()));
        rows.push(
            row.iter()
                .map(|r| r.numer() * (&scale / r.denom()))
                .collect(),
        );
        scales.push(scale);
    }
    (rows, scales)
}

/// Determinant by Bareiss fraction-free elimination.
pub fn determinant_direct(m: &ExactMatrix) -> Ratio {
    let n = m.dim();
    if n == 0 {
        return Ratio::one();
    }
    let (mut a, scales) = integer_rows(m);
    let mut prev = Int::one();
    let mut negate = false;
    for k in 0..n {
        let Some(p) = (k..n).find(|&p| !a[p][k].is_zero()) else {
            return Ratio::zero();
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                debug_assert!((&v % &prev).is_zero());
                a[i][j] = v / &prev;
            }
            a[i][k] = Int::zero();
        }
        prev = a[k][k].clone();
    }
    let det = if negate { -prev } else { prev };
    let scale: Int = scales.iter().product();
    Ratio::new(det, scale)
}

/// Inverse by fraction-free Gauss–Jordan elimination on `[A | I]`.
/// Returns `None` for a singular matrix.
///
/// Independent of the closed form: serves as its oracle.
pub fn inverse_by_elimination(m: &ExactMatrix) -> Option<ExactMatrix> {
    let n = m.dim();
    let (rows, scales) = integer_rows(m);
    let mut a: Vec<Vec<Int>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.extend((0..n).map(|j| if i == j { Int::one() } else { Int::zero() }));
            r
        })
        .collect();
    let mut prev = Int::one();
    for k in 0..n {
        let p = (k..n).find(|&p| !a[p][k].is_zero())?;
        a.swap(p, k);
        for i in 0..n {
            if i == k {
                continue;
            }
            let factor = a[i][k].clone();
            for j in 0..2 * n {
                let v = &a[k][k] * &a[i][j] - &factor * &a[k][j];
                debug_assert!((&v % &prev).is_zero());
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    // Left block is now prev·I; the right block is prev·B⁻¹ with B the
    // row-scaled matrix, and A⁻¹ = B⁻¹·diag(scales).
    Some(ExactMatrix::from_fn(n, |i, j| {
        Ratio::new(&a[i][n + j] * &scales[j], prev.clone())
    }))
}

/// `Σ_{x_r | x_m} c_{rm} [x_k, x_r]^e`.
pub fn g_numerator_direct(set: &GcdClosedSet, e: u32, k: usize, m: usize, c: &CoefMatrix) -> Int {
    let x = set.elems();
    let mut acc = Int::zero();
    for r in 0..=m {
        let crm = c.get(r, m);
        if crm != 0 {
            acc += int_pow(&x[k].lcm(&x[r]), e) * crm;
        }
    }
    acc
}

/// `[x_k, x_m]^e + Σ_{∅≠I⊆L} (−1)^{|I|} [x_k, gcd(Y_I)]^e` with
/// `Y_L = G_S(x_m)`.
pub fn g_numerator_gtd(
    set: &GcdClosedSet,
    e: u32,
    k: usize,
    m: usize,
    gtd: &GtdMap,
) -> Result<Int> {
    let x = set.elems();
    let table = subset_gcd_table(&gtd.values(set, m))?;
    let mut acc = int_pow(&x[k].lcm(&x[m]), e);
    for (mask, g) in table.iter() {
        acc += int_pow(&x[k].lcm(g), e) * sign(mask.count_ones());
    }
    Ok(acc)
}

/// `g(k,m) = (1/α_{e,S}(x_m)) Σ_{x_r|x_m} c_{rm} [x_k, x_r]^e`.
pub fn g_value(
    set: &GcdClosedSet,
    k: usize,
    m: usize,
    c: &CoefMatrix,
    alpha: &AlphaVector,
) -> Ratio {
    let num = g_numerator_direct(set, alpha.exponent(), k, m, c);
    Ratio::new(num, alpha.get(m).clone())
}

/// `[S^e]·W`.
pub fn quotient_right(lcm_matrix: &ExactMatrix, inverse: &ExactMatrix) -> ExactMatrix {
    lcm_matrix * inverse
}

/// `W·[S^e]`; the transpose of [`quotient_right`] since both factors are
/// symmetric.
pub fn quotient_left(lcm_matrix: &ExactMatrix, inverse: &ExactMatrix) -> ExactMatrix {
    inverse * lcm_matrix
}

/// Entry `(i,j)` of `[S^e](S^e)^{-1}` as `Σ_{x_j|x_k} c_{jk} g(i,k)`.
pub fn quotient_entry_by_decomposition(
    set: &GcdClosedSet,
    i: usize,
    j: usize,
    c: &CoefMatrix,
    alpha: &AlphaVector,
) -> Ratio {
    let mut acc = Ratio::zero();
    for k in j..set.len() {
        let cjk = c.get(j, k);
        if cjk != 0 {
            acc += g_value(set, i, k, c, alpha) * Ratio::from_integer(Int::from(cjk));
        }
    }
    acc
}

/// Everything derived from a gcd-closed set and an exponent, computed once.
#[derive(Clone, Debug)]
pub struct PowerGcdSystem {
    set: GcdClosedSet,
    exponent: u32,
    gtd: GtdMap,
    c: CoefMatrix,
    alpha: AlphaVector,
}

impl PowerGcdSystem {
    /// Uses the greatest-type-divisor formulas for `α` and `c`.
    pub fn new(set: GcdClosedSet, e: u32) -> Result<Self> {
        check_exponent(e)?;
        let gtd = greatest_type_divisors(&set);
        let c = c_by_gtd(&set, &gtd)?;
        let alpha = alpha_by_gtd(&set, e, &gtd)?;
        Ok(PowerGcdSystem {
            set,
            exponent: e,
            gtd,
            c,
            alpha,
        })
    }

    pub fn set(&self) -> &GcdClosedSet {
        &self.set
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn gtd(&self) -> &GtdMap {
        &self.gtd
    }

    pub fn coefficients(&self) -> &CoefMatrix {
        &self.c
    }

    pub fn alpha(&self) -> &AlphaVector {
        &self.alpha
    }

    pub fn gcd_matrix(&self) -> ExactMatrix {
        power_gcd_matrix(&self.set, self.exponent)
    }

    pub fn lcm_matrix(&self) -> ExactMatrix {
        power_lcm_matrix(&self.set, self.exponent)
    }

    pub fn inverse(&self) -> ExactMatrix {
        inverse_power_gcd(&self.c, &self.alpha)
    }

    pub fn quotient(&self) -> ExactMatrix {
        quotient_right(&self.lcm_matrix(), &self.inverse())
    }

    pub fn g(&self, k: usize, m: usize) -> Ratio {
        g_value(&self.set, k, m, &self.c, &self.alpha)
    }

    /// `g(k,m)` with the numerator cross-checked against the
    /// greatest-type-divisor form.
    pub fn g_checked(&self, k: usize, m: usize) -> Result<Ratio> {
        let direct = g_numerator_direct(&self.set, self.exponent, k, m, &self.c);
        let via_gtd = g_numerator_gtd(&self.set, self.exponent, k, m, &self.gtd)?;
        if direct != via_gtd {
            return Err(Error::domain(format!(
                "g({k},{m}) numerators disagree: {direct} vs {via_gtd}"
            )));
        }
        Ok(Ratio::new(direct, self.alpha.get(m).clone()))
    }

    pub fn determinant(&self) -> Int {
        determinant_via_alpha(&self.alpha)
    }
}
