//! The hybrid Euler-Hadamard factors `P_X`, `P*_X`, `Q_X`, `Z_X`, the
//! smoothing weight `u`, the cosine integral and the kernel `phi(m, theta)`.
//!
//! `Z_X` is taken to be `L / P_X`. The zero-sum form would need the zeros
//! of `L(s, chi*)`, and the two agree to far better than the statistical
//! error of any moment computed here.

use crate::arith::primes::{primes_up_to, prime_divisors};
use crate::arith::special::EULER_GAMMA;
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::lfun::dirichlet_l;
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use serde::Serialize;

/// Below this modulus `P_X` is treated as zero.
pub const SINGULAR_THRESHOLD: f64 = 1e-14;
/// `phi` at `theta = 0` is evaluated at this `|theta|` instead.
pub const THETA_FLOOR: f64 = 1e-8;
/// Order of the rule used for the `u`-weighted integral in `phi`.
pub const PHI_NODES: usize = 64;

fn bump_raw(v: f64) -> f64 {
    if v <= 0.0 || v >= 1.0 {
        0.0
    } else {
        (-1.0 / (v * (1.0 - v))).exp()
    }
}

/// Normalizing constant of `exp(-1/(v(1-v)))` on `(0, 1)`.
static BUMP_MASS: Lazy<f64> = Lazy::new(|| gauss_legendre(32).integrate_composite(0.0, 1.0, 64, bump_raw));

/// The mass-one bump `f(v) = exp(-1/(v(1-v))) / Z` on `[0, 1]`.
pub fn bump(v: f64) -> f64 {
    bump_raw(v) / *BUMP_MASS
}

pub fn bump_mass() -> f64 {
    *BUMP_MASS
}

/// Smoothing parameters: the cutoff `X`; the bump is fixed (see [`bump`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingSpec {
    pub x: f64,
}

impl SmoothingSpec {
    pub fn new(x: f64) -> Result<SmoothingSpec> {
        if !(x >= 2.0) {
            return Err(Error::domain(format!("X must be at least 2, got {x}")));
        }
        Ok(SmoothingSpec { x })
    }

    /// Support `[e^{1-1/X}, e]` of `u`.
    pub fn support(&self) -> (f64, f64) {
        ((1.0 - 1.0 / self.x).exp(), std::f64::consts::E)
    }
}

/// `u(y) = X f(X log(y/e) + 1) / y`.
pub fn u_weight(y: f64, spec: &SmoothingSpec) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let v = spec.x * (y.ln() - 1.0) + 1.0;
    spec.x * bump(v) / y
}

/// Cosine integral `Ci(x) = -int_x^inf cos(w)/w dw` for `x > 0`.
///
/// Power series up to 8; beyond that the continued fraction for `E_1(ix)`,
/// since `Ci(x) = -Re E_1(ix)`.
pub fn ci(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("Ci needs x > 0, got {x}")));
    }
    if x <= 8.0 {
        let x2 = x * x;
        let mut term = 1.0; // (-x^2)^k / (2k)!
        let mut sum = 0.0;
        for k in 1..200 {
            let kk = (2 * k) as f64;
            term *= -x2 / ((kk - 1.0) * kk);
            let add = term / kk;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) && k > 3 {
                break;
            }
        }
        Ok(EULER_GAMMA + x.ln() + sum)
    } else {
        Ok(-e1_imaginary(x).re)
    }
}

/// `E_1(ix)` for `x > 2` by modified Lentz evaluation of the continued fraction.
fn e1_imaginary(x: f64) -> Complex64 {
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..1000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    Complex64::from_polar(1.0, -x) * h
}

/// `I(theta) = int u(y) Ci(|theta| log y log X) dy`, via `y = e^{1+(v-1)/X}`.
pub fn phi_exponent(theta: f64, spec: &SmoothingSpec) -> f64 {
    let th = theta.abs().max(THETA_FLOOR);
    let lx = spec.x.ln();
    let rule = gauss_legendre(PHI_NODES);
    rule.integrate(0.0, 1.0, |v| {
        let f = bump(v);
        if f == 0.0 {
            return 0.0;
        }
        let ln_y = 1.0 + (v - 1.0) / spec.x;
        f * ci(th * ln_y * lx).expect("positive argument")
    })
}

/// `phi(m, theta) = exp(2 m I(theta))`.
pub fn phi(m: u32, theta: f64, spec: &SmoothingSpec) -> f64 {
    if m == 0 {
        return 1.0;
    }
    (2.0 * m as f64 * phi_exponent(theta, spec)).exp()
}

/// Which band of the short products a prime falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    /// `p <= sqrt(X)`
    Low,
    /// `sqrt(X) < p <= X`
    High,
}

/// Precomputed data for `P_X`, `P*_X` and `Q_X` of one character and cutoff.
#[derive(Debug, Clone)]
pub struct HybridFactors {
    chi: DirichletCharacter,
    x: f64,
    /// `(log n, chi*(n) / k)` for prime powers `n = p^k <= X`.
    px_terms: Vec<(f64, Complex64)>,
    /// `(log p, chi*(p))` for `p | q`.
    px_prefactor: Vec<(f64, Complex64)>,
    /// `(log p, chi(p), band)` for `p <= X`, `p` not dividing `q`.
    short_primes: Vec<(f64, Complex64, Band)>,
}

impl HybridFactors {
    pub fn new(chi: &DirichletCharacter, x: f64) -> Result<HybridFactors> {
        if !(x >= 2.0) {
            return Err(Error::domain(format!("X must be at least 2, got {x}")));
        }
        let q = chi.modulus();
        let prim = chi.induce_primitive();
        let primes = primes_up_to(x.floor() as u64);
        let mut px_terms = Vec::new();
        for &p in &primes {
            let w = prim.value(p);
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut pk = p;
            let mut k = 1u32;
            let mut wk = w;
            while pk as f64 <= x {
                px_terms.push(((pk as f64).ln(), wk / k as f64));
                wk *= w;
                k += 1;
                match pk.checked_mul(p) {
                    Some(v) => pk = v,
                    None => break,
                }
            }
        }
        let px_prefactor = prime_divisors(q)
            .into_iter()
            .map(|p| ((p as f64).ln(), prim.value(p)))
            .filter(|(_, w)| *w != Complex64::new(0.0, 0.0))
            .collect();
        let short_primes = primes
            .iter()
            .filter(|&&p| q % p != 0)
            .map(|&p| {
                let band = if (p as f64) * (p as f64) <= x { Band::Low } else { Band::High };
                ((p as f64).ln(), chi.value(p), band)
            })
            .collect();
        Ok(HybridFactors {
            chi: chi.clone(),
            x,
            px_terms,
            px_prefactor,
            short_primes,
        })
    }

    pub fn character(&self) -> &DirichletCharacter {
        &self.chi
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    fn check_short_range(&self) -> Result<()> {
        let q = self.chi.modulus();
        if self.x <= (q * q) as f64 {
            return Err(Error::domain(format!(
                "X must exceed q^2 = {}, got X = {}",
                q * q,
                self.x
            )));
        }
        Ok(())
    }

    /// `P_X(s, chi)`.
    pub fn px(&self, s: Complex64) -> Complex64 {
        let mut pref = Complex64::new(1.0, 0.0);
        for &(lp, w) in &self.px_prefactor {
            pref *= Complex64::new(1.0, 0.0) - w * (-s * lp).exp();
        }
        let sum: Complex64 = self
            .px_terms
            .iter()
            .map(|&(ln, c)| c * (-s * ln).exp())
            .sum();
        pref * sum.exp()
    }

    /// `P*_X(s, chi)`.
    pub fn p_star(&self, s: Complex64) -> Result<Complex64> {
        self.check_short_range()?;
        let one = Complex64::new(1.0, 0.0);
        let mut prod = one;
        for &(lp, w, band) in &self.short_primes {
            let z = w * (-s * lp).exp();
            let mut f = one - z;
            if band == Band::High {
                f *= one + z * z * 0.5;
            }
            prod *= f;
        }
        Ok(prod.inv())
    }

    /// `Q_X(s, chi)`.
    pub fn q(&self, s: Complex64) -> Result<Complex64> {
        self.check_short_range()?;
        let one = Complex64::new(1.0, 0.0);
        let mut prod = one;
        for &(lp, w, band) in &self.short_primes {
            let z = w * (-s * lp).exp();
            prod *= match band {
                Band::Low => one - z,
                Band::High => one - z + z * z * 0.5,
            };
        }
        Ok(prod)
    }

    /// `Z_X = L / P_X` given the value of `L(s, chi)`.
    pub fn z_from_l(&self, s: Complex64, l: Complex64) -> Result<Complex64> {
        let p = self.px(s);
        if p.norm() < SINGULAR_THRESHOLD {
            return Err(Error::Singular {
                t: s.im,
                magnitude: p.norm(),
            });
        }
        Ok(l / p)
    }
}

pub fn p_x(s: Complex64, chi: &DirichletCharacter, x: f64) -> Result<Complex64> {
    Ok(HybridFactors::new(chi, x)?.px(s))
}

pub fn p_star_x(s: Complex64, chi: &DirichletCharacter, x: f64) -> Result<Complex64> {
    HybridFactors::new(chi, x)?.p_star(s)
}

pub fn q_x(s: Complex64, chi: &DirichletCharacter, x: f64) -> Result<Complex64> {
    HybridFactors::new(chi, x)?.q(s)
}

/// `Z_X(s, chi) = L(s, chi) / P_X(s, chi)`.
pub fn z_x(s: Complex64, chi: &DirichletCharacter, x: f64, tol: f64) -> Result<Complex64> {
    let h = HybridFactors::new(chi, x)?;
    let l = dirichlet_l(s, chi, tol)?;
    h.z_from_l(s, l.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character_group;
    use crate::lfun::riemann_zeta;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn bump_mass_value() {
        assert!((bump_mass() - 0.007_029_858_406_609).abs() < 1e-12);
    }

    #[test]
    fn u_has_mass_one() {
        for x in [5.0, 20.0, 100.0] {
            let spec = SmoothingSpec::new(x).unwrap();
            let (lo, hi) = spec.support();
            let rule = gauss_legendre(32);
            let mass = rule.integrate_composite(lo, hi, 64, |y| u_weight(y, &spec));
            assert!((mass - 1.0).abs() < 1e-8, "X={x} mass={mass}");
            assert_eq!(u_weight(lo * 0.999, &spec), 0.0);
            assert_eq!(u_weight(hi * 1.001, &spec), 0.0);
        }
    }

    /// `Ci(1)` from `-int_1^A cos w/w dw` by Gauss-Legendre plus the tail
    /// `-int_A^inf = sin A / A - int_A^inf sin w / w^2 dw`, integrated by
    /// parts twice more.
    #[test]
    fn ci_one_against_quadrature() {
        let a = 200.0 * PI;
        let rule = gauss_legendre(20);
        let head = -rule.integrate_composite(1.0, a, 4000, |w| w.cos() / w);
        let tail = a.sin() / a - a.cos() / (a * a) - 2.0 * a.sin() / a.powi(3);
        let oracle = head + tail;
        assert!((oracle - 0.337_403_922_900_968_1).abs() < 1e-9);
        assert!((ci(1.0).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn ci_branches_agree_and_decay() {
        // continuity across the switch point
        let below = ci(8.0).unwrap();
        let above = -e1_imaginary(8.0).re;
        assert!((below - above).abs() < 1e-12);
        assert!((ci(10.0).unwrap() + 0.045_456_433_004_455_37).abs() < 1e-12);
        assert!(ci(1e6).unwrap().abs() < 2e-6);
        assert!(ci(0.0).is_err());
    }

    #[test]
    fn phi_properties() {
        let spec = SmoothingSpec::new(12.0).unwrap();
        for th in [0.01, 0.5, 2.0, 40.0] {
            assert_eq!(phi(0, th, &spec), 1.0);
            let p1 = phi(1, th, &spec);
            for m in 1..4u32 {
                let lhs = phi(m + 1, th, &spec);
                assert!((lhs / p1.powi(m as i32 + 1) - 1.0).abs() < 1e-12);
            }
        }
        assert!((phi(1, 1e5, &spec) - 1.0).abs() < 1e-4);
        assert_eq!(phi(1, 0.0, &spec), phi(1, THETA_FLOOR, &spec));
        assert!(phi(1, 0.0, &spec).is_finite());
    }

    #[test]
    fn px_converges_to_zeta_right_of_line() {
        let g = character_group(1).unwrap();
        let p = p_x(Complex64::new(2.0, 0.0), g.principal(), 1e6).unwrap();
        assert!((p.re - PI * PI / 6.0).abs() < 1e-4);
        let ps = p_star_x(Complex64::new(2.0, 0.0), g.principal(), 1e4).unwrap();
        assert!((ps.re - PI * PI / 6.0).abs() < 1e-3);
    }

    #[test]
    fn px_principal_local_factors() {
        let g = character_group(6).unwrap();
        let g1 = character_group(1).unwrap();
        let s = Complex64::new(0.5, 17.0);
        let lhs = p_x(s, g.principal(), 50.0).unwrap();
        let base = p_x(s, g1.principal(), 50.0).unwrap();
        let local: Complex64 = [2.0f64, 3.0]
            .iter()
            .map(|p| 1.0 - (-s * p.ln()).exp())
            .product();
        assert!((lhs - base * local).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn px_boundary_at_two() {
        let g = character_group(1).unwrap();
        let s = Complex64::new(0.5, 3.0);
        let p = p_x(s, g.principal(), 2.0).unwrap();
        let expect = ((-s * 2f64.ln()).exp() / 2f64.ln() * 2f64.ln()).exp();
        assert!((p - expect).norm() < 1e-14);
        assert!(p_x(s, g.principal(), 1.99).is_err());
    }

    #[test]
    fn short_product_ranges() {
        let g = character_group(3).unwrap();
        let s = Complex64::new(0.5, 10.0);
        assert!(p_star_x(s, &g.characters()[1], 9.0).is_err());
        // X < 4: no prime is <= sqrt(X), so both 2 and 3 get the quadratic factor
        let g1 = character_group(1).unwrap();
        let quad = |p: f64| {
            let z = (-s * p.ln()).exp();
            1.0 - z + z * z * 0.5
        };
        let q3 = q_x(s, g1.principal(), 3.0).unwrap();
        assert!((q3 - quad(2.0) * quad(3.0)).norm() < 1e-14);
        // X = 5: 2 is below sqrt(5) and keeps the linear factor
        let q5 = q_x(s, g1.principal(), 5.0).unwrap();
        let lin2 = 1.0 - (-s * 2f64.ln()).exp();
        assert!((q5 - lin2 * quad(3.0) * quad(5.0)).norm() < 1e-14);
    }

    #[test]
    fn px_qx_near_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let q = rng.random_range(1..=5u64);
            let g = character_group(q).unwrap();
            let chi = &g.characters()[rng.random_range(0..g.len())];
            let x: f64 = rng.random_range(30.0..1000.0);
            let t: f64 = rng.random_range(100.0..1000.0);
            let s = Complex64::new(0.5, t);
            let h = HybridFactors::new(chi, x).unwrap();
            let dev = (h.px(s) * h.q(s).unwrap() - 1.0).norm();
            assert!(dev <= 5.0 / x.ln(), "q={q} X={x} t={t} dev={dev}");
        }
    }

    #[test]
    fn z_times_p_is_l() {
        let g = character_group(3).unwrap();
        let chi = &g.characters()[1];
        let s = Complex64::new(0.5, 123.0);
        let z = z_x(s, chi, 12.0, 1e-12).unwrap();
        let l = dirichlet_l(s, chi, 1e-12).unwrap();
        let p = p_x(s, chi, 12.0).unwrap();
        assert!((z * p - l.value).norm() <= 1e-12 + l.abs_error_bound);
        let g1 = character_group(1).unwrap();
        let z1 = z_x(s, g1.principal(), 12.0, 1e-12).unwrap();
        let zeta = riemann_zeta(s, 1e-12).unwrap().value;
        assert!((z1 * p_x(s, g1.principal(), 12.0).unwrap() - zeta).norm() < 1e-10);
    }
}
