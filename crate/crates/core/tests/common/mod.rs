//! Machine-integer reference implementations, written directly from the
//! definitions and independent of the library code paths.
#![allow(dead_code)]

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Euler's phi by counting.
pub fn phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

pub fn mobius(mut n: u64) -> i64 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// `(ξ_e ∗ μ)(d) = Σ_{q|d} q^e μ(d/q)`.
pub fn jordan(e: u32, d: u64) -> i128 {
    divisors(d)
        .into_iter()
        .map(|q| (q as i128).pow(e) * mobius(d / q) as i128)
        .sum()
}

/// `α_{e,S}(x_i)`: sum over divisors of `x_i` dividing no smaller element.
pub fn alpha(set: &[u64], e: u32) -> Vec<i128> {
    (0..set.len())
        .map(|i| {
            divisors(set[i])
                .into_iter()
                .filter(|d| set[..i].iter().all(|t| t % d != 0))
                .map(|d| jordan(e, d))
                .sum()
        })
        .collect()
}

/// `c_{ij} = Σ μ(d)` over `d` with `d·x_i | x_j` and `d·x_i` dividing no
/// `x_t` with `t < j`.
pub fn coefficients(set: &[u64]) -> Vec<Vec<i64>> {
    let n = set.len();
    let mut c = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if !set[j].is_multiple_of(set[i]) {
                continue;
            }
            c[i][j] = divisors(set[j] / set[i])
                .into_iter()
                .filter(|d| set[..j].iter().all(|t| t % (d * set[i]) != 0))
                .map(mobius)
                .sum();
        }
    }
    c
}

/// `g(k,m)` as a reduced fraction with positive denominator.
pub fn g(set: &[u64], e: u32, k: usize, m: usize) -> (i128, i128) {
    let a = alpha(set, e);
    let c = coefficients(set);
    let num: i128 = (0..set.len())
        .filter(|&r| set[m].is_multiple_of(set[r]))
        .map(|r| c[r][m] as i128 * (lcm(set[k], set[r]) as i128).pow(e))
        .sum();
    reduce(num, a[m])
}

pub fn reduce(n: i128, d: i128) -> (i128, i128) {
    let mut a = n.unsigned_abs();
    let mut b = d.unsigned_abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    let g = a.max(1) as i128;
    let s = if d < 0 { -1 } else { 1 };
    (s * n / g, s * d / g)
}

/// `x^e + Σ_{∅≠I} (−1)^{|I|} gcd(Y_I)^e` by explicit subset enumeration.
pub fn alternating_sum(x: u64, ys: &[u64], e: u32) -> i128 {
    let mut acc = (x as i128).pow(e);
    for mask in 1u32..(1 << ys.len()) {
        let g = (0..ys.len())
            .filter(|t| mask >> t & 1 == 1)
            .fold(0, |g, t| gcd(g, ys[t]));
        let term = (g as i128).pow(e);
        acc += if mask.count_ones() % 2 == 1 { -term } else { term };
    }
    acc
}

/// Every gcd-closed subset of the divisors of `u` with at most `n_max`
/// elements, by filtering all subsets.
pub fn gcd_closed_subsets(u: u64, n_max: usize) -> Vec<Vec<u64>> {
    let ds = divisors(u);
    (1u32..1 << ds.len())
        .filter(|m| m.count_ones() as usize <= n_max)
        .map(|m| (0..ds.len()).filter(|i| m >> i & 1 == 1).map(|i| ds[i]).collect::<Vec<_>>())
        .filter(|s| s.iter().all(|&a| s.iter().all(|&b| s.contains(&gcd(a, b)))))
        .collect()
}
