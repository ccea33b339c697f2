//! Exact special values: Bernoulli numbers, Barnes G at integers, binomials.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `B_n` by the Akiyama-Tanigawa recurrence, with `B_1 = +1/2`.
pub fn bernoulli(n: usize) -> BigRational {
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * BigRational::from_integer(BigInt::from(j));
        }
    }
    a.swap_remove(0)
}

/// `B_{2j}` rendered as `f64`, for `j = 0..=jmax`.
pub fn even_bernoulli_f64(jmax: usize) -> Vec<f64> {
    (0..=jmax)
        .map(|j| bernoulli(2 * j).to_f64().expect("finite"))
        .collect()
}

/// `G(n) = prod_{j=1}^{n-2} j!` for `n >= 1`.
pub fn barnes_g(n: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::domain("Barnes G is evaluated at positive integers only"));
    }
    let mut g = BigUint::one();
    let mut fact = BigUint::one();
    for j in 1..n.saturating_sub(1) {
        fact *= j;
        g *= &fact;
    }
    Ok(g)
}

/// `G(m+1)^2 / G(2m+1)`, the random-matrix moment factor.
pub fn barnes_ratio(m: u32) -> f64 {
    let num = barnes_g(m + 1).expect("m + 1 >= 1");
    let den = barnes_g(2 * m + 1).expect("2m + 1 >= 1");
    let r = BigRational::new(BigInt::from(&num * &num), BigInt::from(den));
    r.to_f64().expect("finite")
}

/// `binom(n, k)` as `f64` (exact below 2^53).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

/// `k! / prod_i l_i!`.
pub fn multinomial(parts: &[u32]) -> f64 {
    let mut total = 0u64;
    let mut r = 1.0;
    for &l in parts {
        for i in 1..=l as u64 {
            total += 1;
            r = r * total as f64 / i as f64;
        }
    }
    r.round()
}
