//! Arbitrary-precision integer helpers: gcd/lcm folds, factorization,
//! divisors, the Möbius function and the Jordan-type totient `(ξ_e ∗ μ)`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Non-negative arbitrary-precision integer.
pub type Nat = BigUint;
/// Signed arbitrary-precision integer.
pub type Int = BigInt;
/// Exact rational, always in lowest terms with a positive denominator.
pub type Ratio = BigRational;

pub fn nat(v: u64) -> Nat {
    Nat::from(v)
}

/// `gcd(0, b) = b`.
pub fn gcd(a: &Nat, b: &Nat) -> Nat {
    a.gcd(b)
}

pub fn lcm(a: &Nat, b: &Nat) -> Result<Nat> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::domain("lcm with a zero argument"));
    }
    Ok(a.lcm(b))
}

/// Gcd of a nonempty multiset.
pub fn gcd_of<'a, I>(items: I) -> Result<Nat>
where
    I: IntoIterator<Item = &'a Nat>,
{
    let mut it = items.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::domain("gcd of an empty collection"))?;
    Ok(it.fold(first.clone(), |acc, x| acc.gcd(x)))
}

/// Lcm of a nonempty multiset of positive integers.
pub fn lcm_of<'a, I>(items: I) -> Result<Nat>
where
    I: IntoIterator<Item = &'a Nat>,
{
    let mut it = items.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::domain("lcm of an empty collection"))?;
    let mut acc = first.clone();
    if acc.is_zero() {
        return Err(Error::domain("lcm with a zero argument"));
    }
    for x in it {
        acc = lcm(&acc, x)?;
    }
    Ok(acc)
}

pub fn divides(a: &Nat, b: &Nat) -> bool {
    if a.is_zero() {
        return b.is_zero();
    }
    (b % a).is_zero()
}

const SMALL_PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const TRIAL_LIMIT: u64 = 1 << 14;

/// Miller–Rabin with the first twelve prime bases; deterministic below
/// 3.3·10^24 and probabilistic beyond.
pub fn is_probable_prime(n: &Nat) -> bool {
    let two = nat(2);
    if *n < two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = Nat::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = Nat::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho. `n` must be composite and odd.
fn pollard_rho(n: &Nat) -> Nat {
    let one = Nat::one();
    let mut c = Nat::one();
    loop {
        let f = |x: &Nat| (x * x + &c) % n;
        let mut y = nat(2);
        let mut g = Nat::one();
        let mut r: u64 = 1;
        let mut q = Nat::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        const BATCH: u64 = 64;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1u32;
    }
}

/// `n = root^k` with the largest such `k ≥ 2`, if any.
fn perfect_power(n: &Nat) -> Option<(Nat, u32)> {
    let bits = n.bits() as u32;
    (2..=bits).rev().find_map(|k| {
        let root = n.nth_root(k);
        (root > Nat::one() && root.pow(k) == *n).then_some((root, k))
    })
}

fn split_into(n: Nat, out: &mut Vec<Nat>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        out.push(n);
        return;
    }
    // rho needs ~sqrt(p) steps to find p, hopeless on p^k with large p
    if let Some((root, k)) = perfect_power(&n) {
        for _ in 0..k {
            split_into(root.clone(), out);
        }
        return;
    }
    let d = pollard_rho(&n);
    let rest = &n / &d;
    split_into(d, out);
    split_into(rest, out);
}

/// Prime factorization as ascending `(prime, exponent)` pairs.
/// `factorize(1)` is empty.
pub fn factorize(n: &Nat) -> Result<Vec<(Nat, u32)>> {
    if n.is_zero() {
        return Err(Error::domain("factorization of zero"));
    }
    let mut n = n.clone();
    let mut factors: Vec<(Nat, u32)> = Vec::new();
    let mut p: u64 = 2;
    while p <= TRIAL_LIMIT {
        let pp = nat(p);
        if &pp * &pp > n {
            break;
        }
        let mut k = 0;
        while (&n % &pp).is_zero() {
            n /= &pp;
            k += 1;
        }
        if k > 0 {
            factors.push((pp, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        let mut big = Vec::new();
        split_into(n, &mut big);
        big.sort();
        for q in big {
            match factors.last_mut() {
                Some((last, k)) if *last == q => *k += 1,
                _ => factors.push((q, 1)),
            }
        }
    }
    Ok(factors)
}

/// All divisors of `n` paired with their Möbius value, in ascending order.
pub fn divisors_with_mobius(n: &Nat) -> Result<Vec<(Nat, i8)>> {
    let factors = factorize(n)?;
    let mut out: Vec<(Nat, i8)> = vec![(Nat::one(), 1)];
    for (p, k) in &factors {
        let mut next = Vec::with_capacity(out.len() * (*k as usize + 1));
        for (d, mu) in &out {
            let mut pw = d.clone();
            for j in 0..=*k {
                let m = match j {
                    0 => *mu,
                    1 => -*mu,
                    _ => 0,
                };
                next.push((pw.clone(), m));
                pw *= p;
            }
        }
        out = next;
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Positive divisors of `n`, ascending.
pub fn divisors(n: &Nat) -> Result<Vec<Nat>> {
    Ok(divisors_with_mobius(n)?.into_iter().map(|(d, _)| d).collect())
}

pub fn mobius(n: &Nat) -> Result<i8> {
    let factors = factorize(n)?;
    if factors.iter().any(|(_, k)| *k > 1) {
        return Ok(0);
    }
    Ok(if factors.len() % 2 == 0 { 1 } else { -1 })
}

/// Euler's totient.
pub fn totient(n: &Nat) -> Result<Nat> {
    xi_mu(1, n)
}

/// `(ξ_e ∗ μ)(d) = Σ_{t|d} t^e μ(d/t)`, computed multiplicatively as
/// `Π (p^{ek} − p^{e(k−1)})`.
pub fn xi_mu(e: u32, d: &Nat) -> Result<Nat> {
    if e == 0 {
        return Err(Error::domain("exponent must be at least 1"));
    }
    let mut acc = Nat::one();
    for (p, k) in factorize(d)? {
        let lower = p.pow(e * (k - 1));
        let upper = &lower * p.pow(e);
        acc *= upper - lower;
    }
    Ok(acc)
}

/// Reference evaluation of `(ξ_e ∗ μ)(d)` by the divisor sum.
pub fn xi_mu_divisor_sum(e: u32, d: &Nat) -> Result<Int> {
    if e == 0 {
        return Err(Error::domain("exponent must be at least 1"));
    }
    let mut acc = Int::zero();
    for t in divisors(d)? {
        let mu = mobius(&(d / &t))?;
        if mu != 0 {
            acc += Int::from(t.pow(e)) * Int::from(mu);
        }
    }
    Ok(acc)
}

/// `(-1)^k`.
pub(crate) fn sign(k: u32) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn n(v: u64) -> Nat {
        nat(v)
    }

    #[test]
    fn gcd_lcm_small() {
        assert_eq!(gcd(&n(4), &n(6)), n(2));
        assert_eq!(lcm(&n(4), &n(6)).unwrap(), n(12));
        assert_eq!(gcd(&n(9), &n(9)), n(9));
        assert_eq!(lcm(&n(9), &n(9)).unwrap(), n(9));
        let g = gcd(&n(30), &n(42));
        assert_eq!(g, n(6));
        let l = lcm(&n(30), &n(42)).unwrap();
        assert_eq!(&g * &l, n(30 * 42));
        assert_eq!(l, n(210));
        assert_eq!(gcd(&n(0), &n(7)), n(7));
        assert!(lcm(&n(0), &n(7)).is_err());
    }

    #[test]
    fn folds() {
        assert_eq!(gcd_of(&[n(6), n(10), n(15)]).unwrap(), n(1));
        assert_eq!(gcd_of(&[n(5)]).unwrap(), n(5));
        assert_eq!(lcm_of(&[n(5)]).unwrap(), n(5));
        assert_eq!(gcd_of(&[n(2), n(2), n(6)]).unwrap(), n(2));
        assert_eq!(lcm_of(&[n(4), n(6), n(10)]).unwrap(), n(60));
        assert!(gcd_of(&[]).is_err());
        assert!(lcm_of(&[]).is_err());
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(&n(1)).unwrap(), vec![n(1)]);
        let d12: Vec<u64> = divisors(&n(12))
            .unwrap()
            .iter()
            .map(|d| d.to_u64().unwrap())
            .collect();
        assert_eq!(d12, vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(&n(210)).unwrap().len(), 16);
        assert!(divisors(&n(0)).is_err());
    }

    #[test]
    fn mobius_values() {
        assert_eq!(mobius(&n(1)).unwrap(), 1);
        assert_eq!(mobius(&n(4)).unwrap(), 0);
        assert_eq!(mobius(&n(30)).unwrap(), -1);
        assert_eq!(mobius(&n(6)).unwrap(), 1);
        assert!(mobius(&n(0)).is_err());
    }

    #[test]
    fn xi_mu_values() {
        for e in 1..4 {
            assert_eq!(xi_mu(e, &n(1)).unwrap(), n(1));
        }
        assert_eq!(xi_mu(1, &n(6)).unwrap(), n(2));
        assert_eq!(xi_mu(2, &n(4)).unwrap(), n(12));
        assert_eq!(xi_mu_divisor_sum(2, &n(4)).unwrap(), Int::from(12));
    }

    #[test]
    fn factorization_of_large_semiprime() {
        // 1000003 * 998244353, both prime
        let p = n(1_000_003);
        let q = n(998_244_353);
        let f = factorize(&(&p * &q)).unwrap();
        assert_eq!(f, vec![(p, 1), (q, 1)]);
        let big = n(2).pow(61) - 1u32;
        assert!(is_probable_prime(&big));
        let sq = &big * &big * n(12);
        assert_eq!(
            factorize(&sq).unwrap(),
            vec![(n(2), 2), (n(3), 1), (big, 2)]
        );
    }

    #[test]
    fn closed_form_matches_divisor_sum_and_inverts() {
        for e in 1..=3u32 {
            for v in 1..=1000u64 {
                let x = n(v);
                let closed = xi_mu(e, &x).unwrap();
                assert_eq!(Int::from(closed), xi_mu_divisor_sum(e, &x).unwrap());
                let total: Nat = divisors(&x)
                    .unwrap()
                    .iter()
                    .map(|d| xi_mu(e, d).unwrap())
                    .sum();
                assert_eq!(total, x.pow(e), "n={v} e={e}");
            }
        }
    }

    #[test]
    fn mobius_sum_over_quotient() {
        for y in 1..=500u64 {
            for x in divisors(&n(y)).unwrap() {
                let q = &n(y) / &x;
                let s: i64 = divisors(&q)
                    .unwrap()
                    .iter()
                    .map(|d| mobius(d).unwrap() as i64)
                    .sum();
                assert_eq!(s, if x == n(y) { 1 } else { 0 });
            }
        }
    }
}
