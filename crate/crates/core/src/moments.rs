//! Mean values over `[T, 2T]` on the critical line.
//!
//! Every quantity here is a composite Gauss-Legendre integral. Panels are
//! evaluated in parallel and summed pairwise in index order, so the result
//! does not depend on the number of worker threads.

use crate::arith::primes::{prime_divisors, totient};
use crate::arith::special::EULER_GAMMA;
use crate::arith::{beta_local, beta_minus_one, ExponentTuple, MultCoeffTable};
use crate::characters::{character_group, DirichletCharacter};
use crate::error::{Error, Result};
use crate::hybrid::HybridFactors;
use crate::lfun::{HurwitzEvaluator, LFamilyEvaluator};
use crate::quadrature::{gauss_legendre, GaussLegendre};
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

/// Smallest admissible `T`.
pub const MIN_T: f64 = 10.0;
/// A panel containing a singular node is split at most this many times.
const MAX_PANEL_SPLITS: u32 = 6;
/// Largest `theta` accepted by [`twisted_main_term`].
pub const MAX_THETA: f64 = 0.125;
/// Truncation of the local sums in [`p_coeff_oracle`].
const ORACLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    pub refine_tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            panel_width: 0.125,
            nodes_per_panel: 7,
            refine_tol: 1e-3,
            max_refinements: 4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.panel_width > 0.0 && self.panel_width.is_finite()) {
            return Err(Error::domain("panel width must be positive"));
        }
        if self.nodes_per_panel == 0 || self.nodes_per_panel > 64 {
            return Err(Error::domain("nodes per panel must be in 1..=64"));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::domain("refinement tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    /// `int_T^{2T}` of the integrand.
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub quad_error_est: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub node_count: usize,
    pub refinements: usize,
    /// False when refinement stopped at `max_refinements` or nodes were dropped.
    pub converged: bool,
    pub discarded_nodes: usize,
    pub wall_time: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MomentEstimate {
    /// `(1/T) int_T^{2T}`.
    pub fn mean(&self) -> f64 {
        self.value / self.t
    }
}

/// Integrals of several real integrands sharing one set of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub t: f64,
    pub node_count: usize,
    pub refinements: usize,
    pub converged: bool,
    pub discarded_nodes: usize,
    pub wall_time: f64,
}

impl VectorEstimate {
    pub fn component(&self, i: usize) -> MomentEstimate {
        MomentEstimate {
            value: self.values[i],
            quad_error_est: self.errors[i],
            t: self.t,
            node_count: self.node_count,
            refinements: self.refinements,
            converged: self.converged,
            discarded_nodes: self.discarded_nodes,
            wall_time: self.wall_time,
            warnings: Vec::new(),
        }
    }
}

/// Sum in a fixed binary-tree order.
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[derive(Debug, Clone)]
struct PanelResult {
    sums: Vec<f64>,
    nodes: usize,
    discarded: usize,
}

fn integrate_panel<F>(rule: &GaussLegendre, lo: f64, hi: f64, dim: usize, f: &F, depth: u32) -> Result<PanelResult>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut out = PanelResult {
        sums: vec![0.0; dim],
        nodes: 0,
        discarded: 0,
    };
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        out.nodes += 1;
        match f(mid + half * x) {
            Ok(v) => {
                for (s, vi) in out.sums.iter_mut().zip(&v) {
                    *s += w * half * vi;
                }
            }
            Err(Error::Singular { .. }) if depth < MAX_PANEL_SPLITS => {
                let a = integrate_panel(rule, lo, mid, dim, f, depth + 1)?;
                let b = integrate_panel(rule, mid, hi, dim, f, depth + 1)?;
                return Ok(PanelResult {
                    sums: a.sums.iter().zip(&b.sums).map(|(x, y)| x + y).collect(),
                    nodes: out.nodes + a.nodes + b.nodes,
                    discarded: a.discarded + b.discarded + 1,
                });
            }
            Err(Error::Singular { .. }) => out.discarded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn integrate_level<F>(a: f64, b: f64, panels: usize, dim: usize, nodes: usize, f: &F) -> Result<(Vec<f64>, usize, usize)>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let rule = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    let results: Vec<PanelResult> = (0..panels)
        .into_par_iter()
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { a + (i + 1) as f64 * h };
            integrate_panel(&rule, lo, hi, dim, f, 0)
        })
        .collect::<Result<_>>()?;
    let mut column = vec![0.0; panels];
    let mut sums = Vec::with_capacity(dim);
    for d in 0..dim {
        for (c, r) in column.iter_mut().zip(&results) {
            *c = r.sums[d];
        }
        sums.push(pairwise_sum(&column));
    }
    let node_count = results.iter().map(|r| r.nodes).sum();
    let discarded = results.iter().map(|r| r.discarded).sum();
    Ok((sums, node_count, discarded))
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= MIN_T && t.is_finite()) {
        return Err(Error::domain(format!("T must be at least {MIN_T}, got {t}")));
    }
    Ok(())
}

/// `int_T^{2T}` of each component of `f`, halving the panel width until two
/// successive levels agree to `refine_tol` relative to the largest component.
pub fn integrate_components<F>(t: f64, dim: usize, spec: &QuadratureSpec, f: F) -> Result<VectorEstimate>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    check_t(t)?;
    spec.validate()?;
    let start = Instant::now();
    let (a, b) = (t, 2.0 * t);
    let mut panels = ((b - a) / spec.panel_width).ceil().max(1.0) as usize;
    let (mut prev, mut nodes, mut discarded) = integrate_level(a, b, panels, dim, spec.nodes_per_panel, &f)?;
    let mut errors = vec![f64::INFINITY; dim];
    let mut converged = false;
    let mut refinements = 0;
    while refinements < spec.max_refinements {
        panels *= 2;
        refinements += 1;
        let (cur, n, d) = integrate_level(a, b, panels, dim, spec.nodes_per_panel, &f)?;
        nodes += n;
        discarded = d;
        errors = cur.iter().zip(&prev).map(|(x, y)| (x - y).abs()).collect();
        prev = cur;
        let scale = prev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = errors.iter().fold(0.0f64, |m, v| m.max(*v));
        if diff <= spec.refine_tol * scale {
            converged = true;
            break;
        }
    }
    Ok(VectorEstimate {
        values: prev,
        errors,
        t,
        node_count: nodes,
        refinements,
        converged: converged && discarded == 0,
        discarded_nodes: discarded,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// `int_T^{2T} |f(t)|^2 dt` for a critical-line evaluator `f`.
pub fn mean_square<F>(f: F, t: f64, spec: &QuadratureSpec) -> Result<MomentEstimate>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let v = integrate_components(t, 1, spec, |x| Ok(vec![f(x)?.norm_sqr()]))?;
    Ok(v.component(0))
}

/// Checks `1 <= a <= q`, `gcd(a, q) = 1`.
pub fn check_rational(a: u64, q: u64) -> Result<()> {
    if q == 0 || a == 0 || a > q || a.gcd(&q) != 1 {
        return Err(Error::domain(format!(
            "alpha = {a}/{q} must satisfy 1 <= a <= q and gcd(a, q) = 1"
        )));
    }
    Ok(())
}

fn check_k(k: u32, max: u32) -> Result<()> {
    if k > max {
        return Err(Error::domain(format!("k must be at most {max}, got {k}")));
    }
    Ok(())
}

/// `M_k(T; a/q) = int_T^{2T} |zeta(1/2 + it, a/q)|^{2k} dt`.
pub fn hurwitz_moment(k: u32, a: u64, q: u64, t: f64, spec: &QuadratureSpec) -> Result<MomentEstimate> {
    check_k(k, 3)?;
    check_rational(a, q)?;
    check_t(t)?;
    let h = HurwitzEvaluator::new(a as f64 / q as f64, 0.5, 2.0 * t)?;
    let v = integrate_components(t, 1, spec, |x| Ok(vec![h.eval(x).0.norm_sqr().powi(k as i32)]))?;
    Ok(v.component(0))
}

/// All `L(1/2 + it, chi)` of one modulus, in group index order.
struct LValues {
    family: LFamilyEvaluator,
    chars: Vec<DirichletCharacter>,
}

impl LValues {
    fn new(q: u64, t: f64) -> Result<LValues> {
        let g = character_group(q)?;
        Ok(LValues {
            family: LFamilyEvaluator::new(q, 0.5, 2.0 * t)?,
            chars: g.characters().to_vec(),
        })
    }

    fn at(&self, t: f64) -> Vec<Complex64> {
        let (hz, _) = self.family.hurwitz_values(t);
        self.chars
            .iter()
            .map(|c| self.family.l_from_hurwitz(t, c, &hz))
            .collect()
    }

    /// `L(1/2 + it, chi)` for one character.
    fn single(&self, t: f64, chi: &DirichletCharacter) -> Complex64 {
        let (hz, _) = self.family.hurwitz_values(t);
        self.family.l_from_hurwitz(t, chi, &hz)
    }
}

fn tuple_power(ell: &ExponentTuple, values: &[Complex64]) -> Complex64 {
    ell.exponents()
        .iter()
        .zip(values)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, v)| v.powu(e))
        .product()
}

/// `M_k(T; chi) = int_T^{2T} |L(1/2 + it, chi)|^{2k} dt`.
pub fn l_moment(k: u32, chi: &DirichletCharacter, t: f64, spec: &QuadratureSpec) -> Result<MomentEstimate> {
    check_k(k, 3)?;
    check_t(t)?;
    let lv = LValues::new(chi.modulus(), t)?;
    let v = integrate_components(t, 1, spec, |x| Ok(vec![lv.single(x, chi).norm_sqr().powi(k as i32)]))?;
    Ok(v.component(0))
}

/// `int_T^{2T} |prod_chi L(1/2 + it, chi)^{l_chi}|^2 dt`.
pub fn product_mean_square(ell: &ExponentTuple, t: f64, spec: &QuadratureSpec) -> Result<MomentEstimate> {
    check_t(t)?;
    let lv = LValues::new(ell.modulus(), t)?;
    let v = integrate_components(t, 1, spec, |x| Ok(vec![tuple_power(ell, &lv.at(x)).norm_sqr()]))?;
    Ok(v.component(0))
}

fn regime_warning(x: f64, t: f64) -> Vec<String> {
    let bound = (2.0 * t).ln().powi(2);
    if x > bound {
        vec![format!(
            "X = {x} exceeds (log 2T)^2 = {bound:.1}; the asymptotic regime X << (log T)^(2-eps) is not met"
        )]
    } else {
        Vec::new()
    }
}

fn support_factors(ell: &ExponentTuple, x: f64) -> Result<Vec<(HybridFactors, u32)>> {
    ell.support()
        .map(|(chi, l)| Ok((HybridFactors::new(chi, x)?, l)))
        .collect()
}

fn s_half(t: f64) -> Complex64 {
    Complex64::new(0.5, t)
}

/// `int_T^{2T} |P*_X^l(1/2 + it)|^2 dt`.
pub fn p_mean_square(ell: &ExponentTuple, x: f64, t: f64, spec: &QuadratureSpec) -> Result<MomentEstimate> {
    check_t(t)?;
    check_short_range(ell.modulus(), x)?;
    let factors = support_factors(ell, x)?;
    let v = integrate_components(t, 1, spec, |y| {
        let mut prod = Complex64::new(1.0, 0.0);
        for (h, l) in &factors {
            prod *= h.p_star(s_half(y))?.powu(*l);
        }
        Ok(vec![prod.norm_sqr()])
    })?;
    let mut est = v.component(0);
    est.warnings = regime_warning(x, t);
    Ok(est)
}

fn check_short_range(q: u64, x: f64) -> Result<()> {
    if !(x > (q * q) as f64) {
        return Err(Error::domain(format!("X must exceed q^2 = {}, got X = {x}", q * q)));
    }
    Ok(())
}

/// `sum_{n in S_q(X)} |beta_l(n)|^2 / n`, as the product over `p <= X` of
/// the local sums `sum_m |beta_l(p^m)|^2 p^{-m}`.
pub fn p_coeff_oracle(ell: &ExponentTuple, x: f64) -> Result<f64> {
    check_short_range(ell.modulus(), x)?;
    let q = ell.modulus();
    let mut total = 1.0;
    for p in crate::arith::primes::primes_up_to(x.floor() as u64) {
        if q % p == 0 {
            continue;
        }
        let mut deg = 64;
        let local = loop {
            let coeffs = beta_local(ell, x, p, deg).to_complex();
            let pf = p as f64;
            let terms: Vec<f64> = coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| c.norm_sqr() * pf.powi(-(m as i32)))
                .collect();
            let sum: f64 = terms.iter().sum();
            let last = terms[deg - 4..].iter().fold(0.0f64, |a, b| a.max(*b));
            if last <= ORACLE_TOL * sum || deg >= 1024 {
                break sum;
            }
            deg *= 2;
        };
        total *= local;
    }
    Ok(total)
}

/// `int_T^{2T} |Z_X(1/2 + it, chi)|^2 dt` with `Z_X = L / P_X`.
pub fn z_mean_square(chi: &DirichletCharacter, x: f64, t: f64, spec: &QuadratureSpec) -> Result<MomentEstimate> {
    check_t(t)?;
    let h = HybridFactors::new(chi, x)?;
    let lv = LValues::new(chi.modulus(), t)?;
    let v = integrate_components(t, 1, spec, |y| {
        let z = h.z_from_l(s_half(y), lv.single(y, chi))?;
        Ok(vec![z.norm_sqr()])
    })?;
    let mut est = v.component(0);
    est.warnings = regime_warning(x, t);
    Ok(est)
}

/// Which Euler product stands in for `P` in [`splitting_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitVariant {
    /// `P*_X`, the short product.
    ShortProduct,
    /// `P_X`, so that `P Z = L` pointwise.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingRatio {
    pub ratio: f64,
    pub l_mean: f64,
    pub p_mean: f64,
    pub z_mean: f64,
    pub estimate: MomentEstimate,
    pub variant: SplitVariant,
}

/// Mean square of `L^l` over the product of the mean squares of `P^l` and
/// `Z^l = prod (L / P_X)^{l_chi}`.
pub fn splitting_ratio(
    ell: &ExponentTuple,
    x: f64,
    t: f64,
    spec: &QuadratureSpec,
    variant: SplitVariant,
) -> Result<SplittingRatio> {
    check_t(t)?;
    if variant == SplitVariant::ShortProduct {
        check_short_range(ell.modulus(), x)?;
    }
    let factors = support_factors(ell, x)?;
    let lv = LValues::new(ell.modulus(), t)?;
    let v = integrate_components(t, 3, spec, |y| {
        let s = s_half(y);
        let vals = lv.at(y);
        let one = Complex64::new(1.0, 0.0);
        let (mut l, mut p, mut z) = (one, one, one);
        for (h, e) in &factors {
            let lc = vals[h.character().index()];
            let pc = match variant {
                SplitVariant::ShortProduct => h.p_star(s)?,
                SplitVariant::Exact => h.px(s),
            };
            l *= lc.powu(*e);
            p *= pc.powu(*e);
            z *= h.z_from_l(s, lc)?.powu(*e);
        }
        Ok(vec![l.norm_sqr(), p.norm_sqr(), z.norm_sqr()])
    })?;
    let (l_mean, p_mean, z_mean) = (v.values[0] / t, v.values[1] / t, v.values[2] / t);
    let mut estimate = v.component(0);
    estimate.value = l_mean / (p_mean * z_mean);
    estimate.quad_error_est = estimate.value
        * (v.errors[0] / v.values[0] + v.errors[1] / v.values[1] + v.errors[2] / v.values[2]);
    estimate.warnings = regime_warning(x, t);
    Ok(SplittingRatio {
        ratio: estimate.value,
        l_mean,
        p_mean,
        z_mean,
        estimate,
        variant,
    })
}

/// `C = 2 gamma - 1 + 2 log 2`.
pub fn twisted_constant() -> f64 {
    2.0 * EULER_GAMMA - 1.0 + 2.0 * 2f64.ln()
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= MAX_THETA) {
        return Err(Error::domain(format!("theta must lie in (0, {MAX_THETA}], got {theta}")));
    }
    Ok(())
}

/// `M'(T; chi, b) = (phi(q)/q) sum_{m, n <= T^theta, (mn, q) = 1}
/// b(m) conj(b(n)) / [m, n] * (log(q T (m, n)^2 / (2 pi m n)) + C + sum_{p | q} log p / (p - 1))`.
pub fn twisted_main_term<B>(t: f64, chi: &DirichletCharacter, b: B, theta: f64) -> Result<f64>
where
    B: Fn(u64) -> Complex64,
{
    check_t(t)?;
    check_theta(theta)?;
    let q = chi.modulus();
    let n_max = t.powf(theta).floor() as u64;
    let local: f64 = prime_divisors(q)
        .into_iter()
        .map(|p| (p as f64).ln() / (p as f64 - 1.0))
        .sum();
    let shift = (q as f64 * t / (2.0 * PI)).ln() + twisted_constant() + local;
    let support: Vec<(u64, Complex64)> = (1..=n_max)
        .filter(|n| n.gcd(&q) == 1)
        .map(|n| (n, b(n)))
        .filter(|(_, c)| c.norm() > 0.0)
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for &(m, bm) in &support {
        for &(n, bn) in &support {
            let g = m.gcd(&n) as f64;
            let lcm = m as f64 / g * n as f64;
            let w = shift + (g * g / (m as f64 * n as f64)).ln();
            total += bm * bn.conj() * (w / lcm);
        }
    }
    Ok(totient(q) as f64 / q as f64 * total.re)
}

/// `alpha_{-1}(n)`, `n <= limit`: the coefficients of `Q_X(s)` for the
/// character mod 1.
pub fn alpha_minus_one(x: f64, limit: u64) -> Result<MultCoeffTable> {
    let g = character_group(1)?;
    beta_minus_one(g.principal(), x, limit)
}

/// `int_T^{2T} |L(1/2 + it, chi) B_theta(1/2 + it, chi)|^2 dt` with
/// `B_theta(s, chi) = sum_{n <= T^theta} chi(n) b(n) n^{-s}`.
pub fn twisted_mean_square<B>(
    t: f64,
    chi: &DirichletCharacter,
    b: B,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<MomentEstimate>
where
    B: Fn(u64) -> Complex64,
{
    check_t(t)?;
    check_theta(theta)?;
    let n_max = t.powf(theta).floor() as u64;
    let terms: Vec<(f64, Complex64)> = (1..=n_max)
        .map(|n| ((n as f64).ln(), chi.value(n) * b(n)))
        .filter(|(_, c)| c.norm() > 0.0)
        .collect();
    let lv = LValues::new(chi.modulus(), t)?;
    let v = integrate_components(t, 1, spec, |y| {
        let s = s_half(y);
        let poly: Complex64 = terms.iter().map(|&(ln, c)| c * (-s * ln).exp()).sum();
        Ok(vec![(lv.single(y, chi) * poly).norm_sqr()])
    })?;
    Ok(v.component(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalPrediction {
    /// Primary plus secondary diagonal terms.
    pub value: f64,
    pub primary_diagonal: f64,
    pub secondary_diagonal: f64,
    pub major_off_diagonal: Option<f64>,
    pub minor_off_diagonal: Option<f64>,
    /// All four term types: `M_k(T; alpha)` up to quadrature error.
    pub full: Option<f64>,
    pub estimate: MomentEstimate,
}

/// `(q^k / phi(q)^{2k}) sum_{|l| = k} binom(k, l)^2 int_T^{2T} |L^l|^2`, with
/// the split into primary and secondary diagonal terms, and with `full` the
/// off-diagonal terms `binom(k,l1) binom(k,l2) prod chi(a)^{l2 - l1} L^{l1} conj(L^{l2})`.
pub fn diagonal_prediction(
    k: u32,
    a: u64,
    q: u64,
    t: f64,
    spec: &QuadratureSpec,
    full: bool,
) -> Result<DiagonalPrediction> {
    if !(1..=2).contains(&k) {
        return Err(Error::domain(format!("k must be 1 or 2, got {k}")));
    }
    if k == 2 && q > 8 {
        return Err(Error::domain(format!("k = 2 needs q <= 8, got {q}")));
    }
    check_rational(a, q)?;
    check_t(t)?;
    let g = character_group(q)?;
    let tuples = ExponentTuple::all_with_weight(&g, k);
    let phases: Vec<Complex64> = g.characters().iter().map(|c| c.value(a).conj()).collect();
    // binom(k, l) prod conj(chi(a))^{l_chi}
    let weights: Vec<Complex64> = tuples
        .iter()
        .map(|ell| tuple_power(ell, &phases) * ell.multinomial())
        .collect();
    let concentrated: Vec<bool> = tuples.iter().map(|e| e.is_concentrated()).collect();
    let lv = LValues::new(q, t)?;
    let dim = if full { 4 } else { 2 };
    let v = integrate_components(t, dim, spec, |y| {
        let vals = lv.at(y);
        let mut primary = 0.0;
        let mut secondary = 0.0;
        let mut conc_sum = Complex64::new(0.0, 0.0);
        let mut all_sum = Complex64::new(0.0, 0.0);
        for ((ell, w), &c) in tuples.iter().zip(&weights).zip(&concentrated) {
            let u = w * tuple_power(ell, &vals);
            if c {
                primary += u.norm_sqr();
                conc_sum += u;
            } else {
                secondary += u.norm_sqr();
            }
            all_sum += u;
        }
        let mut out = vec![primary, secondary];
        if full {
            let major = conc_sum.norm_sqr() - primary;
            let minor = all_sum.norm_sqr() - primary - secondary - major;
            out.push(major);
            out.push(minor);
        }
        Ok(out)
    })?;
    let scale = (q as f64).powi(k as i32) / (totient(q) as f64).powi(2 * k as i32);
    let vals: Vec<f64> = v.values.iter().map(|x| x * scale).collect();
    let mut estimate = v.component(0);
    estimate.value = vals[0] + vals[1];
    estimate.quad_error_est = scale * (v.errors[0] + v.errors[1]);
    Ok(DiagonalPrediction {
        value: vals[0] + vals[1],
        primary_diagonal: vals[0],
        secondary_diagonal: vals[1],
        major_off_diagonal: full.then(|| vals[2]),
        minor_off_diagonal: full.then(|| vals[3]),
        full: full.then(|| vals.iter().sum()),
        estimate,
    })
}

/// Least-squares `B` in `M_1(T; alpha) = T log T + B T` from `(T, M_1)` pairs.
pub fn fit_rane_constant(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("no samples to fit"));
    }
    let num: f64 = samples.iter().map(|&(t, m)| t * (m - t * t.ln())).sum();
    let den: f64 = samples.iter().map(|&(t, _)| t * t).sum();
    Ok(num / den)
}

/// Fourth-moment constant `c_2(a/q)` in closed form.
pub fn fourth_moment_constant(q: u64) -> f64 {
    let local: f64 = prime_divisors(q)
        .into_iter()
        .map(|p| 1.0 - 1.0 / (p as f64 + 1.0))
        .product();
    local / (2.0 * PI * PI * q as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> QuadratureSpec {
        QuadratureSpec {
            panel_width: 0.5,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn constant_integrand() {
        let e = mean_square(|_| Ok(Complex64::new(1.0, 0.0)), 123.0, &QuadratureSpec::default()).unwrap();
        assert!((e.value - 123.0).abs() < 1e-12);
        assert!(e.converged);
        let e = mean_square(|t| Ok(Complex64::from_polar(1.0, 7.3 * t)), 50.0, &coarse()).unwrap();
        assert!((e.value - 50.0).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_polynomial_mean_value() {
        let n_max = 50u64;
        let a: Vec<f64> = (1..=n_max).map(|n| 1.0 + (n % 3) as f64).collect();
        let t = 5000.0;
        let f = |y: f64| {
            Ok((1..=n_max)
                .map(|n| {
                    let ln = (n as f64).ln();
                    a[n as usize - 1] * Complex64::from_polar((-0.5 * ln).exp(), -y * ln)
                })
                .sum())
        };
        let e = mean_square(f, t, &coarse()).unwrap();
        // exact: sum a_m a_n (mn)^{-1/2} int_T^{2T} (n/m)^{it} dt
        let mut exact = 0.0;
        for m in 1..=n_max {
            for n in 1..=n_max {
                let c = a[m as usize - 1] * a[n as usize - 1] / ((m * n) as f64).sqrt();
                if m == n {
                    exact += c * t;
                } else {
                    let r = (n as f64 / m as f64).ln();
                    exact += c * ((2.0 * t * r).sin() - (t * r).sin()) / r;
                }
            }
        }
        assert!((e.value / exact - 1.0).abs() < 1e-8);
        let diag: f64 = a.iter().enumerate().map(|(i, x)| x * x / (i + 1) as f64).sum();
        assert!((e.value / (t * diag) - 1.0).abs() < 0.02);
    }

    #[test]
    fn scaling_is_exact() {
        let f = |y: f64| Ok(Complex64::new(y.sin(), 1.0 + y.cos()));
        let a = mean_square(f, 40.0, &coarse()).unwrap();
        let b = mean_square(|y| Ok(f(y)? * 2.0), 40.0, &coarse()).unwrap();
        assert_eq!(b.value, 4.0 * a.value);
    }

    #[test]
    fn singular_nodes_are_dropped_and_flagged() {
        let f = |y: f64| {
            if (y - 20.0).abs() < 0.05 {
                Err(Error::Singular { t: y, magnitude: 0.0 })
            } else {
                Ok(Complex64::new(1.0, 0.0))
            }
        };
        let e = mean_square(f, 10.0, &QuadratureSpec::default()).unwrap();
        assert!((e.value - 10.0).abs() < 0.11);
        assert!(e.discarded_nodes > 0);
        assert!(!e.converged);
    }

    #[test]
    fn domain_checks() {
        let s = QuadratureSpec::default();
        assert!(hurwitz_moment(1, 2, 4, 100.0, &s).is_err());
        assert!(hurwitz_moment(4, 1, 3, 100.0, &s).is_err());
        assert!(hurwitz_moment(1, 1, 3, 5.0, &s).is_err());
        let g = character_group(3).unwrap();
        assert!(twisted_main_term(100.0, g.principal(), |_| Complex64::new(1.0, 0.0), 0.2).is_err());
        assert!(diagonal_prediction(2, 1, 9, 100.0, &s, false).is_err());
    }

    #[test]
    fn twisted_main_term_single_coefficient() {
        let g = character_group(3).unwrap();
        let chi = &g.characters()[1];
        let t = 3000.0;
        let one = |n: u64| Complex64::new(if n == 1 { 1.0 } else { 0.0 }, 0.0);
        let m = twisted_main_term(t, chi, one, 0.125).unwrap();
        let expect = 2.0 / 3.0 * ((3.0 * t / (2.0 * PI)).ln() + twisted_constant() + 3f64.ln() / 2.0);
        assert!((m - expect).abs() < 1e-12);
    }

    #[test]
    fn twisted_main_term_is_hermitian_form() {
        let g = character_group(1).unwrap();
        let b = |n: u64| Complex64::from_polar(1.0 / n as f64, n as f64);
        let m = twisted_main_term(1e6, g.principal(), b, 0.125).unwrap();
        assert!(m > 0.0);
    }

    #[test]
    fn oracle_trivial_tuple() {
        let g = character_group(3).unwrap();
        assert_eq!(p_coeff_oracle(&ExponentTuple::zero(&g), 12.0).unwrap(), 1.0);
        assert!(p_coeff_oracle(&ExponentTuple::zero(&g), 9.0).is_err());
    }

    #[test]
    fn oracle_matches_direct_sum() {
        let g = character_group(3).unwrap();
        let ell = ExponentTuple::from_pairs(&g, &[(0, 1), (1, 1)]).unwrap();
        let limit = 2_000_000u64;
        let table = crate::arith::beta_ell(&ell, 12.0, limit).unwrap();
        let direct: f64 = crate::arith::smooth_numbers(3, 12.0, limit)
            .into_iter()
            .map(|n| table.value(n).norm_sqr() / n as f64)
            .sum();
        let oracle = p_coeff_oracle(&ell, 12.0).unwrap();
        assert!((direct / oracle - 1.0).abs() < 1e-3, "{direct} vs {oracle}");
        assert!(direct <= oracle);
    }

    #[test]
    fn rane_fit_recovers_constant() {
        let s: Vec<(f64, f64)> = [100.0, 200.0, 400.0f64]
            .iter()
            .map(|&t| (t, t * t.ln() + 0.7 * t))
            .collect();
        assert!((fit_rane_constant(&s).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
    }
}
