//! Self-checks run by the `verify` command.

use crate::arith::primes::{primes_up_to, totient};
use crate::arith::special::{barnes_g, bernoulli};
use crate::arith::{d_ell, d_ell_table, d_k, smooth_numbers, ExponentTuple};
use crate::characters::character_group;
use crate::constants::{
    c_chi_fourth, c_ell_q, c_k, c_k_alpha, d_chi_nu, f_x, h_qc, series_identity_coeffs, SeriesKind,
};
use crate::error::Result;
use crate::lfun::{dirichlet_l, hurwitz_zeta};
use crate::moments::{
    diagonal_prediction, fourth_moment_constant, hurwitz_moment, l_moment, p_coeff_oracle, p_mean_square,
    product_mean_square, QuadratureSpec,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

/// Truncation used by the constant checks; the acceptance tests use 10^6.
const VERIFY_CUTOFF: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Arith,
    Characters,
    Identities,
    Constants,
    MomentsFast,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Arith => "arith",
            Suite::Characters => "characters",
            Suite::Identities => "identities",
            Suite::Constants => "constants",
            Suite::MomentsFast => "moments-fast",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: &'static str,
    pub check: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = (&'static str, fn() -> Result<(bool, String)>);

fn run(suite: &'static str, checks: &[Check]) -> Vec<CheckReport> {
    checks
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let (passed, detail) = match f() {
                Ok(r) => r,
                Err(e) => (false, e.to_string()),
            };
            CheckReport {
                suite,
                check: name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

pub fn run_suite(suite: Suite) -> Vec<CheckReport> {
    match suite {
        Suite::Arith => run("arith", ARITH),
        Suite::Characters => run("characters", CHARACTERS),
        Suite::Identities => run("identities", IDENTITIES),
        Suite::Constants => run("constants", CONSTANTS),
        Suite::MomentsFast => run("moments-fast", MOMENTS_FAST),
        Suite::All => [
            Suite::Arith,
            Suite::Characters,
            Suite::Identities,
            Suite::Constants,
            Suite::MomentsFast,
        ]
        .into_iter()
        .flat_map(run_suite)
        .collect(),
    }
}

const ARITH: &[Check] = &[
    ("prime-counts", || {
        let a = primes_up_to(1000).len();
        let b = primes_up_to(1_000_000).len();
        Ok((a == 168 && b == 78_498, format!("pi(10^3) = {a}, pi(10^6) = {b}")))
    }),
    ("divisor-function", || {
        let ok = (1..=1000u64).all(|n| d_k(2, n) == (1..=n).filter(|d| n % d == 0).count() as u64)
            && d_k(3, 12) == 18;
        Ok((ok, "d_2 against divisor counts, d_3(12) = 18".into()))
    }),
    ("d-ell-table", || {
        let g = character_group(5)?;
        let ell = ExponentTuple::from_pairs(&g, &[(1, 2), (2, 1)])?;
        let table = d_ell_table(&ell, 600)?;
        let worst = (1..=600u64)
            .map(|n| (table.value(n) - d_ell(&ell, n)).norm())
            .fold(0.0f64, f64::max);
        Ok((worst < 1e-9, format!("max table deviation {worst:.2e}")))
    }),
    ("smooth-numbers", || {
        let fast = smooth_numbers(3, 12.0, 5000);
        let brute: Vec<u64> = (1..=5000u64)
            .filter(|n| n.gcd(&3) == 1 && crate::arith::primes::factorize(*n).iter().all(|(p, _)| *p <= 12))
            .collect();
        Ok((fast == brute, format!("{} integers", fast.len())))
    }),
    ("barnes-g", || {
        let want = [1u64, 1, 1, 2, 12, 288, 34_560];
        let ok = (1..=7u32).all(|n| barnes_g(n).map(|g| g == want[n as usize - 1].into()).unwrap_or(false));
        Ok((ok, "G(1..7)".into()))
    }),
    ("bernoulli", || {
        let b = bernoulli(12);
        let want = BigRational::new(BigInt::from(-691), BigInt::from(2730));
        Ok((b == want, format!("B_12 = {b}")))
    }),
];

const CHARACTERS: &[Check] = &[
    ("orthogonality", || {
        let mut worst = 0.0f64;
        for q in 1..=30u64 {
            let g = character_group(q)?;
            let units = g.units();
            for a in g.characters() {
                for b in g.characters() {
                    let s: Complex64 = units.iter().map(|&u| a.value(u) * b.value(u).conj()).sum();
                    let want = if a.index() == b.index() { units.len() as f64 } else { 0.0 };
                    worst = worst.max((s - want).norm());
                }
            }
        }
        Ok((worst < 1e-9, format!("max deviation {worst:.2e}, q <= 30")))
    }),
    ("conductors", || {
        for q in 1..=60u64 {
            let g = character_group(q)?;
            for chi in g.characters() {
                let brute = (1..=q)
                    .filter(|d| q % d == 0)
                    .find(|&d| {
                        (1..=q)
                            .filter(|a| a.gcd(&q) == 1 && a % d == 1 % d)
                            .all(|a| (chi.value(a) - 1.0).norm() < 1e-9)
                    })
                    .unwrap_or(q);
                if brute != chi.conductor() {
                    return Ok((false, format!("q = {q}, index {}", chi.index())));
                }
            }
        }
        Ok((true, "brute force, q <= 60".into()))
    }),
    ("group-orders", || {
        let ok = (1..=100u64).all(|q| character_group(q).map(|g| g.len() as u64 == totient(q)).unwrap_or(false));
        Ok((ok, "phi(q) characters for q <= 100".into()))
    }),
];

const IDENTITIES: &[Check] = &[
    ("decomposition", || {
        let mut worst = 0.0f64;
        for q in [3u64, 4, 5] {
            let g = character_group(q)?;
            for a in g.units() {
                for t in [10.0, 37.5, 99.0] {
                    let s = Complex64::new(0.5, t);
                    let h = hurwitz_zeta(s, a as f64 / q as f64, 1e-12)?.value;
                    let mut sum = Complex64::new(0.0, 0.0);
                    for chi in g.characters() {
                        sum += chi.value(a).conj() * dirichlet_l(s, chi, 1e-12)?.value;
                    }
                    let rhs = sum * (s * (q as f64).ln()).exp() / totient(q) as f64;
                    worst = worst.max((h - rhs).norm());
                }
            }
        }
        Ok((worst < 1e-9, format!("max deviation {worst:.2e}")))
    }),
    ("series-d2-square", || {
        let (l, r) = series_identity_coeffs(SeriesKind::D2Square, Complex64::new(1.0, 0.0), 64)?;
        let worst = l.iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(0.0f64, f64::max);
        Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
    }),
    ("series-omega", || {
        let mut worst = 0.0f64;
        for j in 0..16 {
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 16.0);
            let (l, r) = series_identity_coeffs(SeriesKind::Omega, w, 64)?;
            worst = l.iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(worst, f64::max);
        }
        Ok((worst < 1e-12, format!("16th roots of unity, max deviation {worst:.2e}")))
    }),
    ("mertens-product", || {
        let g = character_group(5)?;
        let mut worst = 0.0f64;
        for ell in ExponentTuple::all_with_weight(&g, 2) {
            let f = f_x(&ell, 100.0, 20_000)?;
            let mut prod = 1.0;
            for c in g.units() {
                prod *= h_qc(5, c, crate::arith::kappa(&ell, c)?, 100.0, 20_000)?.value;
            }
            worst = worst.max((f.value / prod - 1.0).abs());
        }
        Ok((worst < 1e-9, format!("q = 5, max relative deviation {worst:.2e}")))
    }),
];

const CONSTANTS: &[Check] = &[
    ("fourth-moment-constant", || {
        for q in [3u64, 4, 5, 8] {
            let g = character_group(q)?;
            for chi in g.characters() {
                let r = c_ell_q(&ExponentTuple::delta(&g, chi.index(), 2)?, VERIFY_CUTOFF);
                if (r.value - c_chi_fourth(chi)).abs() > 10.0 * r.tail_bound {
                    return Ok((false, format!("q = {q}, index {}", chi.index())));
                }
            }
        }
        Ok((true, "C = C' for q in {3, 4, 5, 8}".into()))
    }),
    ("pair-constant", || {
        for q in [4u64, 5] {
            let g = character_group(q)?;
            for a in g.characters() {
                for b in g.characters() {
                    if a.index() == b.index() {
                        continue;
                    }
                    let d = d_chi_nu(a, b, VERIFY_CUTOFF)?;
                    let c = c_ell_q(&ExponentTuple::from_pairs(&g, &[(a.index(), 1), (b.index(), 1)])?, VERIFY_CUTOFF);
                    if (c.value - d.value).abs() > 10.0 * (c.tail_bound + d.tail_bound) {
                        return Ok((false, format!("q = {q}, pair ({}, {})", a.index(), b.index())));
                    }
                }
            }
        }
        Ok((true, "D = D' for q in {4, 5}".into()))
    }),
    ("c1-alpha", || {
        let mut worst = 0.0f64;
        for q in 1..=50u64 {
            for a in (1..=q).filter(|a| a.gcd(&q) == 1) {
                worst = worst.max((c_k_alpha(1, a, q, VERIFY_CUTOFF)?.value - 1.0).abs());
            }
        }
        Ok((worst < 1e-12, format!("max |c_1(a/q) - 1| = {worst:.2e}")))
    }),
    ("c2-alpha", || {
        let c2 = c_k(2, VERIFY_CUTOFF);
        let mut worst = 0.0f64;
        for q in 1..=100u64 {
            let v = c_k_alpha(2, 1, q, VERIFY_CUTOFF)?.value;
            let closed = c2.value * fourth_moment_constant(q) * 2.0 * PI * PI;
            worst = worst.max((v - closed).abs() / closed);
        }
        let exact = 1.0 / (2.0 * PI * PI);
        let ok = worst < 1e-12 && (c2.value - exact).abs() <= c2.tail_bound;
        Ok((ok, format!("c_2 = {:.12}, closed form deviation {worst:.2e}", c2.value)))
    }),
];

fn fast_spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

const MOMENTS_FAST: &[Check] = &[
    ("euler-product-moment", || {
        let g = character_group(3)?;
        let mut worst = 0.0f64;
        for ell in ExponentTuple::all_with_weight(&g, 2) {
            let m = p_mean_square(&ell, 12.0, 2000.0, &fast_spec())?;
            let o = p_coeff_oracle(&ell, 12.0)?;
            worst = worst.max((m.mean() / o - 1.0).abs());
        }
        Ok((worst < 0.05, format!("q = 3, X = 12, T = 2000: max relative gap {worst:.3}")))
    }),
    ("zeta-second-moment", || {
        let g = character_group(1)?;
        let t = 2000.0;
        let m = product_mean_square(&ExponentTuple::delta(&g, 0, 1)?, t, &fast_spec())?;
        let r = m.value / (t * t.ln());
        Ok(((0.8..=1.2).contains(&r), format!("T = 2000: value / (T log T) = {r:.4}")))
    }),
    ("l-second-moment", || {
        let g = character_group(3)?;
        let t = 1000.0;
        let m = l_moment(1, &g.characters()[1], t, &fast_spec())?;
        let r = m.value / (t * 2.0 / 3.0 * t.ln());
        Ok(((0.7..=1.5).contains(&r), format!("q = 3, T = 1000: ratio {r:.4}")))
    }),
    ("full-expansion", || {
        let t = 200.0;
        let mut worst = 0.0f64;
        for (k, q) in [(1u32, 3u64), (1, 4), (2, 3)] {
            let d = diagonal_prediction(k, 1, q, t, &fast_spec(), true)?;
            let m = hurwitz_moment(k, 1, q, t, &fast_spec())?;
            let full = d.full.unwrap_or(f64::NAN);
            worst = worst.max((full / m.value - 1.0).abs());
        }
        Ok((worst < 1e-6, format!("T = 200: max relative gap {worst:.2e}")))
    }),
    ("modulus-one-diagonal", || {
        let d = diagonal_prediction(1, 1, 1, 100.0, &fast_spec(), false)?;
        let m = hurwitz_moment(1, 1, 1, 100.0, &fast_spec())?;
        let gap = (d.value - m.value).abs();
        Ok((gap <= 1e-9 * m.value, format!("gap {gap:.2e}")))
    }),
];
