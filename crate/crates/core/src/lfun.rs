//! Hurwitz zeta, Riemann zeta and Dirichlet L-functions by Euler-Maclaurin.
//!
//! `zeta(s, a) = sum_{n<N} (n+a)^{-s} + (N+a)^{1-s}/(s-1) + (N+a)^{-s}/2
//!             + sum_{j=1}^{J} B_{2j}/(2j)! (s)_{2j-1} (N+a)^{-s-2j+1} + R`
//! with `(s)_m` the rising factorial. The remainder satisfies
//! `|R| <= |T_{J+1}| |s+2J+1| / (sigma+2J+1)`, where `T_{J+1}` is the first
//! omitted correction; that quantity plus a rounding allowance is reported as
//! the error bound.

use crate::arith::special::even_bernoulli_f64;
use crate::arith::ExponentTuple;
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use num_complex::Complex64;
use once_cell::sync::Lazy;
use serde::Serialize;

/// Number of Bernoulli corrections kept (through `B_24`).
pub const EM_CORRECTIONS: usize = 12;
/// Extra direct-sum terms beyond `|t|/2`.
pub const EM_BASE_TERMS: usize = 32;
/// How many times the cutoff may double before giving up on a tolerance.
const MAX_DOUBLINGS: u32 = 3;

/// `B_{2j} / (2j)!` for `j = 0..=J+1`.
static EM_COEFFS: Lazy<Vec<f64>> = Lazy::new(|| {
    let b = even_bernoulli_f64(EM_CORRECTIONS + 1);
    let mut fact = 1.0f64;
    let mut out = Vec::with_capacity(b.len());
    for (j, bj) in b.iter().enumerate() {
        if j > 0 {
            fact *= (2 * j - 1) as f64 * (2 * j) as f64;
        }
        out.push(bj / fact);
    }
    out
});

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub sigma: f64,
    pub t: f64,
}

impl CriticalPoint {
    pub fn new(sigma: f64, t: f64) -> CriticalPoint {
        CriticalPoint { sigma, t }
    }

    pub fn on_line(t: f64) -> CriticalPoint {
        CriticalPoint { sigma: 0.5, t }
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub abs_error_bound: f64,
    pub terms_used: usize,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Default direct-sum length for imaginary part `t`.
pub fn default_cutoff(t: f64) -> usize {
    (t.abs() / 2.0).ceil() as usize + EM_BASE_TERMS
}

/// Tail of the Euler-Maclaurin formula at `a = N + alpha`. With
/// `finite_part` the pole term `a^{1-s}/(s-1)` is replaced by its constant
/// term at `s = 1`, namely `-log a`.
fn em_tail(s: Complex64, a: f64, finite_part: bool) -> (Complex64, f64) {
    let ln_a = a.ln();
    let a_neg_s = (-s * ln_a).exp();
    let mut total = if finite_part {
        Complex64::new(-ln_a, 0.0)
    } else {
        a_neg_s * a / (s - 1.0)
    };
    total += a_neg_s * 0.5;
    // factor_j = (s)_{2j-1} a^{-s-2j+1}
    let inv_a2 = 1.0 / (a * a);
    let mut factor = s * a_neg_s / a;
    let coeffs = &*EM_COEFFS;
    for j in 1..=EM_CORRECTIONS {
        total += factor * coeffs[j];
        let m = (2 * j) as f64;
        factor = factor * (s + (m - 1.0)) * (s + m) * inv_a2;
    }
    let j1 = EM_CORRECTIONS + 1;
    let next = (factor * coeffs[j1]).norm();
    let m = (2 * j1 - 1) as f64;
    let bound = next * (s + m).norm() / (s.re + m);
    (total, bound)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("shift alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    Ok(())
}

/// One Euler-Maclaurin evaluation with `n` direct terms.
fn hurwitz_fixed(s: Complex64, alpha: f64, n: usize, finite_part: bool) -> (Complex64, f64) {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for k in 0..n {
        let x = k as f64 + alpha;
        let ln_x = x.ln();
        let amp = (-s.re * ln_x).exp();
        let (sn, cs) = (-s.im * ln_x).sin_cos();
        sum += Complex64::new(amp * cs, amp * sn);
        abs_sum += amp;
    }
    let (tail, bound) = em_tail(s, n as f64 + alpha, finite_part);
    let rounding = 8.0 * f64::EPSILON * (abs_sum + tail.norm());
    (sum + tail, bound + rounding)
}

fn hurwitz_with_tol(s: Complex64, alpha: f64, tol: f64, finite_part: bool) -> Result<EvalResult> {
    let mut n = default_cutoff(s.im);
    // Keep the Euler-Maclaurin remainder formula in its valid range.
    if s.re + 2.0 * EM_CORRECTIONS as f64 + 1.0 <= 0.0 {
        return Err(Error::domain("real part too negative for Euler-Maclaurin"));
    }
    let mut last = 0.0;
    for _ in 0..=MAX_DOUBLINGS {
        let (value, bound) = hurwitz_fixed(s, alpha, n, finite_part);
        if bound <= tol {
            return Ok(EvalResult {
                value,
                abs_error_bound: bound,
                terms_used: n,
            });
        }
        last = bound;
        n *= 2;
    }
    Err(Error::Precision {
        t: s.im,
        requested: tol,
        achieved: last,
    })
}

/// `zeta(s, alpha)` for `0 < alpha <= 1`.
pub fn hurwitz_zeta(s: Complex64, alpha: f64, tol: f64) -> Result<EvalResult> {
    check_alpha(alpha)?;
    check_tol(tol)?;
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole);
    }
    hurwitz_with_tol(s, alpha, tol, false)
}

/// `zeta(s)`.
pub fn riemann_zeta(s: Complex64, tol: f64) -> Result<EvalResult> {
    hurwitz_zeta(s, 1.0, tol)
}

/// `L(s, chi) = q^{-s} sum_{a=1}^{q} chi(a) zeta(s, a/q)`.
///
/// At `s = 1` a nonprincipal character is handled through the finite parts
/// of the Hurwitz values, since the poles cancel against `sum chi(a) = 0`.
pub fn dirichlet_l(s: Complex64, chi: &DirichletCharacter, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    let at_pole = s == Complex64::new(1.0, 0.0);
    if at_pole && chi.is_principal() {
        return Err(Error::Pole);
    }
    let q = chi.modulus();
    let units: Vec<u64> = (1..=q).filter(|&a| chi.value_index(a).is_some()).collect();
    let per_term_tol = tol / units.len() as f64;
    let mut value = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    let mut terms = 0;
    for a in units {
        let r = hurwitz_with_tol(s, a as f64 / q as f64, per_term_tol, at_pole)?;
        value += chi.value(a) * r.value;
        bound += r.abs_error_bound;
        terms += r.terms_used;
    }
    let scale = (-s * (q as f64).ln()).exp();
    Ok(EvalResult {
        value: value * scale,
        abs_error_bound: bound * scale.norm(),
        terms_used: terms,
    })
}

/// `L^l(s) = prod_chi L(s, chi)^{l_chi}`.
pub fn l_product(s: Complex64, ell: &ExponentTuple, tol: f64) -> Result<EvalResult> {
    let mut value = Complex64::new(1.0, 0.0);
    // Track prod (|L| + e) so the bound covers every factor's error.
    let mut upper = 1.0;
    let mut terms = 0;
    let k = ell.weight().max(1) as f64;
    for (chi, l) in ell.support() {
        let r = dirichlet_l(s, chi, tol / k)?;
        value *= r.value.powu(l);
        upper *= (r.value.norm() + r.abs_error_bound).powi(l as i32);
        terms += r.terms_used;
    }
    Ok(EvalResult {
        value,
        abs_error_bound: (upper - value.norm()).max(0.0),
        terms_used: terms,
    })
}

/// Fast repeated evaluation of `zeta(sigma + it, alpha)` with fixed `sigma`
/// and `alpha`, caching `log(n + alpha)` and `(n + alpha)^{-sigma}`.
#[derive(Debug, Clone)]
pub struct HurwitzEvaluator {
    alpha: f64,
    sigma: f64,
    logs: Vec<f64>,
    amps: Vec<f64>,
}

impl HurwitzEvaluator {
    /// Prepares tables sufficient for `|t| <= t_max` at the default cutoff.
    pub fn new(alpha: f64, sigma: f64, t_max: f64) -> Result<HurwitzEvaluator> {
        check_alpha(alpha)?;
        let n = default_cutoff(t_max);
        let logs: Vec<f64> = (0..n).map(|k| (k as f64 + alpha).ln()).collect();
        let amps = logs.iter().map(|l| (-sigma * l).exp()).collect();
        Ok(HurwitzEvaluator {
            alpha,
            sigma,
            logs,
            amps,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `zeta(sigma + it, alpha)` and its error bound at the default cutoff.
    pub fn eval(&self, t: f64) -> (Complex64, f64) {
        let n = default_cutoff(t);
        let s = Complex64::new(self.sigma, t);
        if n > self.logs.len() {
            return hurwitz_fixed(s, self.alpha, n, false);
        }
        let mut re = 0.0;
        let mut im = 0.0;
        let mut abs_sum = 0.0;
        for (l, a) in self.logs[..n].iter().zip(&self.amps[..n]) {
            let (sn, cs) = (t * l).sin_cos();
            re += a * cs;
            im -= a * sn;
            abs_sum += a;
        }
        let (tail, bound) = em_tail(s, n as f64 + self.alpha, false);
        let rounding = 8.0 * f64::EPSILON * (abs_sum + tail.norm());
        (Complex64::new(re, im) + tail, bound + rounding)
    }
}

/// Evaluates `L(sigma + it, chi)` for every character of one modulus from a
/// shared set of Hurwitz values.
#[derive(Debug, Clone)]
pub struct LFamilyEvaluator {
    q: u64,
    sigma: f64,
    units: Vec<u64>,
    hurwitz: Vec<HurwitzEvaluator>,
}

impl LFamilyEvaluator {
    pub fn new(q: u64, sigma: f64, t_max: f64) -> Result<LFamilyEvaluator> {
        let units: Vec<u64> = (1..=q).filter(|&a| num_integer::gcd(a, q) == 1).collect();
        let hurwitz = units
            .iter()
            .map(|&a| HurwitzEvaluator::new(a as f64 / q as f64, sigma, t_max))
            .collect::<Result<Vec<_>>>()?;
        Ok(LFamilyEvaluator {
            q,
            sigma,
            units,
            hurwitz,
        })
    }

    pub fn units(&self) -> &[u64] {
        &self.units
    }

    /// `zeta(s, a/q)` for each unit `a` (ascending), with summed error bound.
    pub fn hurwitz_values(&self, t: f64) -> (Vec<Complex64>, f64) {
        let mut bound = 0.0;
        let vals = self
            .hurwitz
            .iter()
            .map(|h| {
                let (v, b) = h.eval(t);
                bound += b;
                v
            })
            .collect();
        (vals, bound)
    }

    /// `L(s, chi)` from precomputed Hurwitz values at the same `t`.
    pub fn l_from_hurwitz(&self, t: f64, chi: &DirichletCharacter, hz: &[Complex64]) -> Complex64 {
        debug_assert_eq!(chi.modulus(), self.q);
        let s = Complex64::new(self.sigma, t);
        let sum: Complex64 = self
            .units
            .iter()
            .zip(hz)
            .map(|(&a, z)| chi.value(a) * z)
            .sum();
        sum * (-s * (self.q as f64).ln()).exp()
    }

    /// Scale applied to a summed Hurwitz error bound to bound an L-value.
    pub fn bound_scale(&self) -> f64 {
        (self.q as f64).powf(-self.sigma)
    }
}
