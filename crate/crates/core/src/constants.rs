//! Euler-product and closed-form constants, each with a truncation cutoff and
//! tail estimate.
//!
//! Products are accumulated as sums of logarithms of local factors, in
//! ascending prime order. Local factors are `1 + O(p^{-2})` for the
//! absolutely convergent products; there the tail is bounded by
//! `A sum_{p > P} p^{-2}` with `A = max p^2 |log f_p|` over `(P/2, P]`.
//! The conditionally convergent ones (exponents like `lambda - |d(p)|^2`
//! that only vanish on average over residue classes) get an empirical bound:
//! twice the spread of the partial log-product over `(P/2, P]`.

use crate::arith::primes::{prime_divisors, primes_up_to, totient};
use crate::arith::special::{barnes_ratio, binomial, EULER_GAMMA};
use crate::arith::{d_ell_local_class, ExponentTuple};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::lfun::dirichlet_l;
use num_complex::Complex64;
use num_integer::Integer;
use once_cell::sync::Lazy;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

pub const DEFAULT_CUTOFF: u64 = 100_000;
pub const ACCEPTANCE_CUTOFF: u64 = 1_000_000;
/// Degree to which local power series are expanded.
const LOCAL_DEGREE: usize = 160;
/// Tolerance on `L(1, chi)` used by [`d_chi_nu`].
const L_ONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantResult {
    pub value: f64,
    pub tail_bound: f64,
    pub cutoff: u64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `log prod_{p <= P} f_p` and a bound on `|log prod_{p > P} f_p|` plus
/// accumulated local truncation errors.
fn log_euler_product<F>(cutoff: u64, conditional: bool, mut log_local: F) -> (f64, f64)
where
    F: FnMut(u64) -> (f64, f64),
{
    let mut acc = CompensatedSum::default();
    let mut local_err = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut a_max: f64 = 0.0;
    for p in primes_up_to(cutoff) {
        let (lf, err) = log_local(p);
        acc.add(lf);
        local_err += err;
        if 2 * p > cutoff {
            let v = acc.value();
            lo = lo.min(v);
            hi = hi.max(v);
            a_max = a_max.max((p as f64).powi(2) * lf.abs());
        }
    }
    let total = acc.value();
    let pf = cutoff.max(2) as f64;
    let tail = if conditional {
        2.0 * (hi - lo).max(0.0)
    } else {
        // sum_{p > P} p^{-2} < 1.5 / (P log P) comfortably for P >= 2
        1.5 * a_max / (pf * pf.ln())
    };
    let rounding = 1e-15 * (1.0 + total.abs());
    (total, tail + local_err + rounding)
}

fn finish(log_value: f64, log_bound: f64, factor: f64, cutoff: u64) -> ConstantResult {
    let value = log_value.exp() * factor;
    ConstantResult {
        value,
        tail_bound: value.abs() * log_bound.exp_m1(),
        cutoff,
    }
}

/// `sum_{m >= 1} a_m x^m` for the squared local coefficients `a_m`, with a
/// geometric bound for the omitted terms (via `a_m <= d_k(p^m)^2`).
fn local_sum_minus_one(squares: &[f64], x: f64, k: u32) -> (f64, f64) {
    let k = k.max(1) as f64;
    let mut acc = 0.0;
    let mut xm = 1.0;
    for m in 1..squares.len() {
        xm *= x;
        acc += squares[m] * xm;
        let j = (m + 1) as f64;
        let bound_next = binomial(m as u64 + k as u64, k as u64 - 1).powi(2) * xm * x;
        let ratio = ((j + k) / (j + 1.0)).powi(2) * x;
        if ratio < 0.5 && bound_next <= 1e-16 * x * (1.0 + acc) {
            return (acc, bound_next / (1.0 - ratio));
        }
    }
    let m = squares.len() as u64;
    let bound_next = binomial(m + k as u64 - 1, k as u64 - 1).powi(2) * xm * x;
    (acc, bound_next * 2.0)
}

/// `|d_l(p^m)|^2`, `m <= LOCAL_DEGREE`, cached per unit class of `p`.
struct SquareTable<'a> {
    ell: &'a ExponentTuple,
    by_class: HashMap<u64, Vec<f64>>,
}

impl<'a> SquareTable<'a> {
    fn new(ell: &'a ExponentTuple) -> Self {
        SquareTable {
            ell,
            by_class: HashMap::new(),
        }
    }

    fn get(&mut self, p: u64) -> Option<&[f64]> {
        let q = self.ell.modulus();
        if q > 1 && q % p == 0 {
            return None;
        }
        Some(self.get_class(p % q))
    }

    /// True when `|d_l(p)|^2 = lambda` for every unit class.
    fn kappa_constant(&mut self) -> bool {
        let q = self.ell.modulus();
        let lam = self.ell.lambda() as f64;
        let units: Vec<u64> = (1..=q).filter(|c| c.gcd(&q) == 1).collect();
        units.into_iter().all(|c| (self.get_class(c % q)[1] - lam).abs() < 1e-9)
    }

    fn get_class(&mut self, c: u64) -> &[f64] {
        let ell = self.ell;
        self.by_class
            .entry(c)
            .or_insert_with(|| {
                d_ell_local_class(ell, c, LOCAL_DEGREE)
                    .to_complex()
                    .iter()
                    .map(|z| z.norm_sqr())
                    .collect()
            })
            .as_slice()
    }
}

/// `b(l) = prod_{p not | q} (1 - 1/p)^{|d_l(p)|^2} sum_m |d_l(p^m)|^2 / p^m`.
pub fn b_ell(ell: &ExponentTuple, cutoff: u64) -> ConstantResult {
    let k = ell.weight();
    let mut table = SquareTable::new(ell);
    let (lv, lb) = log_euler_product(cutoff, false, |p| match table.get(p) {
        None => (0.0, 0.0),
        Some(sq) => {
            let x = 1.0 / p as f64;
            let (s1, tail) = local_sum_minus_one(sq, x, k);
            (sq[1] * (-x).ln_1p() + s1.ln_1p(), tail / (1.0 + s1))
        }
    });
    finish(lv, lb, 1.0, cutoff)
}

/// `F_X(l) = (e^gamma log X)^lambda prod_p (1 - 1/p)^{lambda - |d_l(p)|^2}`.
pub fn f_x(ell: &ExponentTuple, x: f64, cutoff: u64) -> Result<ConstantResult> {
    if !(x >= 2.0) {
        return Err(Error::domain(format!("X must be at least 2, got {x}")));
    }
    let lam = ell.lambda() as f64;
    let mut table = SquareTable::new(ell);
    let conditional = !table.kappa_constant();
    let (lv, lb) = log_euler_product(cutoff, conditional, |p| {
        let kap = table.get(p).map_or(0.0, |sq| sq[1]);
        ((lam - kap) * (-1.0 / p as f64).ln_1p(), 0.0)
    });
    let mertens = (EULER_GAMMA.exp() * x.ln()).powf(lam);
    Ok(finish(lv, lb, mertens, cutoff))
}

/// `c_l(q) = prod_p (1 - 1/p)^lambda sum_m |d_l(p^m)|^2 / p^m
///           * prod_chi G(l_chi + 1)^2 / G(2 l_chi + 1)`.
pub fn c_ell_q(ell: &ExponentTuple, cutoff: u64) -> ConstantResult {
    let lam = ell.lambda() as f64;
    let k = ell.weight();
    let mut table = SquareTable::new(ell);
    let conditional = !table.kappa_constant();
    let (lv, lb) = log_euler_product(cutoff, conditional, |p| {
        let x = 1.0 / p as f64;
        let base = lam * (-x).ln_1p();
        match table.get(p) {
            None => (base, 0.0),
            Some(sq) => {
                let (s1, tail) = local_sum_minus_one(sq, x, k);
                (base + s1.ln_1p(), tail / (1.0 + s1))
            }
        }
    });
    let g: f64 = ell.exponents().iter().map(|&l| barnes_ratio(l)).product();
    finish(lv, lb, g, cutoff)
}

static CK_CACHE: Lazy<Mutex<HashMap<(u32, u64), ConstantResult>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// `c_k = c_l(1)` for `l = k delta`, cached.
pub fn c_k(k: u32, cutoff: u64) -> ConstantResult {
    if let Some(r) = CK_CACHE.lock().expect("cache").get(&(k, cutoff)) {
        return *r;
    }
    let g = crate::characters::character_group(1).expect("modulus 1");
    let ell = ExponentTuple::delta(&g, 0, k).expect("index 0 exists");
    let r = c_ell_q(&ell, cutoff);
    CK_CACHE.lock().expect("cache").insert((k, cutoff), r);
    r
}

/// `sum_m binom(m+k-1, k-1)^2 p^{-m}`.
fn divisor_square_sum(k: u32, p: u64) -> f64 {
    let squares: Vec<f64> = (0..=LOCAL_DEGREE as u64)
        .map(|m| binomial(m + k as u64 - 1, k as u64 - 1).powi(2))
        .collect();
    let (s1, _) = local_sum_minus_one(&squares, 1.0 / p as f64, k);
    1.0 + s1
}

/// `c_k(a/q) = c_k q^k / phi(q)^{2k-1} prod_{p | q} {sum_m binom(m+k-1,k-1)^2 p^{-m}}^{-1}`.
pub fn c_k_alpha(k: u32, a: u64, q: u64, cutoff: u64) -> Result<ConstantResult> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if q == 0 || a == 0 || a > q || a.gcd(&q) != 1 {
        return Err(Error::domain(format!(
            "alpha = {a}/{q} must satisfy 1 <= a <= q and gcd(a, q) = 1"
        )));
    }
    let ck = c_k(k, cutoff);
    let phi = totient(q) as f64;
    let mut factor = (q as f64).powi(k as i32) / phi.powi(2 * k as i32 - 1);
    for p in prime_divisors(q) {
        factor /= divisor_square_sum(k, p);
    }
    Ok(ConstantResult {
        value: ck.value * factor,
        tail_bound: ck.tail_bound * factor,
        cutoff,
    })
}

/// `C(chi) = (1/2 pi^2) (phi(q)/q)^2 prod_{p | q} (1 - 2/(p+1))`.
pub fn c_chi_fourth(chi: &DirichletCharacter) -> f64 {
    let q = chi.modulus();
    let ratio = totient(q) as f64 / q as f64;
    let local: f64 = prime_divisors(q)
        .into_iter()
        .map(|p| 1.0 - 2.0 / (p as f64 + 1.0))
        .product();
    ratio * ratio * local / (2.0 * PI * PI)
}

/// `D(chi, nu) = (6/pi^2) |L(1, chi nu-bar)|^2 (phi(q)/q) prod_{p | q} (1 - 1/(p+1))`.
///
/// `cutoff` is carried through for reporting; `L(1, .)` is evaluated
/// directly to tolerance 1e-10.
pub fn d_chi_nu(chi: &DirichletCharacter, nu: &DirichletCharacter, cutoff: u64) -> Result<ConstantResult> {
    let psi = chi.mul(&nu.conj())?;
    if psi.is_principal() {
        return Err(Error::domain("D(chi, nu) needs distinct characters"));
    }
    let q = chi.modulus();
    let l = dirichlet_l(Complex64::new(1.0, 0.0), &psi, L_ONE_TOL)?;
    let ratio = totient(q) as f64 / q as f64;
    let local: f64 = prime_divisors(q)
        .into_iter()
        .map(|p| 1.0 - 1.0 / (p as f64 + 1.0))
        .product();
    let scale = 6.0 / (PI * PI) * ratio * local;
    let m = l.value.norm();
    let e = l.abs_error_bound;
    Ok(ConstantResult {
        value: scale * m * m,
        tail_bound: scale * (2.0 * m * e + e * e),
        cutoff,
    })
}

/// `prod_{p <= X, p = c mod q} (1 - 1/p)^{-kappa}`.
pub fn mertens_ap(q: u64, c: u64, kappa: f64, x: f64) -> Result<f64> {
    check_class(q, c)?;
    let logsum: f64 = primes_up_to(x.max(1.0).floor() as u64)
        .into_iter()
        .filter(|p| p % q == c % q)
        .map(|p| (-1.0 / p as f64).ln_1p())
        .sum();
    Ok((-kappa * logsum).exp())
}

/// `H^q_c(kappa) = {e^gamma log X prod_p (1 - 1/p)^{1 - [p = c mod q] phi(q)}}^{kappa/phi(q)}`.
pub fn h_qc(q: u64, c: u64, kappa: f64, x: f64, cutoff: u64) -> Result<ConstantResult> {
    check_class(q, c)?;
    if !(x >= 2.0) {
        return Err(Error::domain(format!("X must be at least 2, got {x}")));
    }
    let phi = totient(q) as f64;
    let (lv, lb) = log_euler_product(cutoff, phi > 1.0, |p| {
        let delta = if p % q == c % q { 1.0 } else { 0.0 };
        ((1.0 - delta * phi) * (-1.0 / p as f64).ln_1p(), 0.0)
    });
    let e = kappa / phi;
    let base = EULER_GAMMA.exp() * x.ln();
    Ok(finish(e * lv, e.abs() * lb, base.powf(e), cutoff))
}

fn check_class(q: u64, c: u64) -> Result<()> {
    if q == 0 || c.gcd(&q) != 1 {
        return Err(Error::domain(format!("residue {c} is not a unit mod {q}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    /// `sum_m d_2(p^m)^2 z^m = (1 + z)/(1 - z)^3`
    D2Square,
    /// `(1 + z)/((1 - w z)(1 - w-bar z)) = (1 - z) sum_m |sum_{j<=m} w^j|^2 z^m`
    Omega,
}

/// Power series quotient `a / b` through degree `m`, with `b_0 = 1`.
fn series_divide(a: &[Complex64], b: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
    for n in 0..=m {
        let mut v = a.get(n).copied().unwrap_or_default();
        for j in 1..=n.min(b.len() - 1) {
            v -= b[j] * c[n - j];
        }
        c[n] = v;
    }
    c
}

/// Both sides of one of the two power-series identities, coefficients
/// `0..=m`: the left by series division, the right by direct summation.
pub fn series_identity_coeffs(kind: SeriesKind, omega: Complex64, m: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if m > 512 {
        return Err(Error::domain("series length is capped at 512"));
    }
    let one = Complex64::new(1.0, 0.0);
    match kind {
        SeriesKind::D2Square => {
            let left = series_divide(&[one, one], &[one, -3.0 * one, 3.0 * one, -one], m);
            let right = (0..=m).map(|n| Complex64::new(((n + 1) * (n + 1)) as f64, 0.0)).collect();
            Ok((left, right))
        }
        SeriesKind::Omega => {
            if (omega.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::domain("omega must have modulus one"));
            }
            let den = [one, -(omega + omega.conj()), omega * omega.conj()];
            let left = series_divide(&[one, one], &den, m);
            let mut partial = Complex64::new(0.0, 0.0);
            let mut w = one;
            let mut prev = 0.0;
            let mut right = Vec::with_capacity(m + 1);
            for _ in 0..=m {
                partial += w;
                w *= omega;
                let a = partial.norm_sqr();
                right.push(Complex64::new(a - prev, 0.0));
                prev = a;
            }
            Ok((left, right))
        }
    }
}

/// `sum_{|j| <= m} w^j`, the common expansion of both sides of the omega identity.
pub fn symmetric_power_sums(omega: Complex64, m: usize) -> Vec<Complex64> {
    (0..=m as i64)
        .map(|n| (-n..=n).map(|j| omega.powi(j as i32)).sum())
        .collect()
}
