//! Circular unitary ensemble sampling and the random-matrix model for the
//! `Z_X` factor.

use crate::arith::special::{barnes_ratio, EULER_GAMMA};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::hybrid::{phi, SmoothingSpec};
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub const MAX_MATRIX_SIZE: usize = 100;
pub const MAX_SAMPLES: usize = 1_000_000;
pub const MAX_M: u32 = 3;
/// Attempts per sample before giving up on the eigen-solver.
const MAX_RESAMPLES: usize = 8;

/// `log(q* T / 2 pi)`, the density of zeros of `L(s, chi)` at height `T`.
pub fn density(chi: &DirichletCharacter, t: f64) -> Result<f64> {
    let q = chi.conductor() as f64;
    if !(t > 2.0 * PI / q) {
        return Err(Error::domain(format!("T must exceed 2 pi / q* = {}", 2.0 * PI / q)));
    }
    Ok((q * t / (2.0 * PI)).ln())
}

/// `N = floor(density)`.
pub fn matrix_size(chi: &DirichletCharacter, t: f64) -> Result<usize> {
    Ok(density(chi, t)?.floor() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CueSample {
    pub n: usize,
    /// Eigenangles in `(-pi, pi]`, ascending.
    pub eigenangles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    /// Draws rejected because the eigen-solver did not converge.
    pub resampled: usize,
}

/// One attempt: Haar unitary by QR of a complex Ginibre matrix with the
/// diagonal of `R` made positive, then eigenvalues from a Schur form.
fn try_sample<R: Rng>(n: usize, rng: &mut R) -> Option<Vec<f64>> {
    let z = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm == 0.0 {
            return None;
        }
        let phase = d / norm;
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let schur = Schur::try_new(q, 1e-14, 10_000)?;
    let eig = schur.eigenvalues()?;
    let mut angles: Vec<f64> = eig.iter().map(|e| e.arg()).collect();
    for a in angles.iter_mut() {
        if *a <= -PI {
            *a += 2.0 * PI;
        }
    }
    angles.sort_by(f64::total_cmp);
    Some(angles)
}

/// Eigenangles of an `N x N` Haar-random unitary, with the number of
/// rejected attempts.
pub fn sample_cue_counted<R: Rng>(n: usize, rng: &mut R) -> Result<(CueSample, usize)> {
    if n == 0 || n > MAX_MATRIX_SIZE {
        return Err(Error::domain(format!("matrix size must be in 1..={MAX_MATRIX_SIZE}")));
    }
    for attempt in 0..MAX_RESAMPLES {
        if let Some(eigenangles) = try_sample(n, rng) {
            return Ok((CueSample { n, eigenangles }, attempt));
        }
    }
    Err(Error::domain("eigen-solver failed repeatedly"))
}

pub fn sample_cue<R: Rng>(n: usize, rng: &mut R) -> Result<CueSample> {
    Ok(sample_cue_counted(n, rng)?.0)
}

/// The generator for sample `index` under `seed`: one ChaCha stream per index.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sum, mean and standard error in a fixed binary-tree order.
fn mean_and_error(values: &[f64]) -> (f64, f64) {
    fn tree(xs: &[f64]) -> f64 {
        match xs.len() {
            0 => 0.0,
            n if n <= 8 => xs.iter().sum(),
            n => tree(&xs[..n / 2]) + tree(&xs[n / 2..]),
        }
    }
    let n = values.len() as f64;
    let mean = tree(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = tree(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo average of `prod_n phi(m, theta_n)` over CUE(N).
pub fn model_moment(m: u32, n: usize, x: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    if m > MAX_M {
        return Err(Error::domain(format!("m must be at most {MAX_M}")));
    }
    if samples == 0 || samples > MAX_SAMPLES {
        return Err(Error::domain(format!("samples must be in 1..={MAX_SAMPLES}")));
    }
    let spec = SmoothingSpec::new(x)?;
    let draws: Vec<(f64, usize)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let (s, rejected) = sample_cue_counted(n, &mut rng)?;
            let v = s.eigenangles.iter().map(|&th| phi(m, th, &spec)).product();
            Ok((v, rejected))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let (mean, std_error) = mean_and_error(&values);
    Ok(McEstimate {
        mean,
        std_error,
        samples,
        seed,
        resampled: draws.iter().map(|d| d.1).sum(),
    })
}

/// `G(m+1)^2 / G(2m+1) (N / (e^gamma log X))^{m^2}`.
pub fn model_prediction(m: u32, n: usize, x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::domain("X must exceed 1"));
    }
    let e = m * m;
    let n_pow = (n as u128).checked_pow(e).ok_or_else(|| Error::domain("N^(m^2) overflows"))? as f64;
    let scale = EULER_GAMMA.exp() * x.ln();
    Ok(barnes_ratio(m) * n_pow * scale.powi(-(e as i32)))
}

/// `X` with `e^gamma log X = target`.
pub fn x_for_scale(target: f64) -> f64 {
    (target / EULER_GAMMA.exp()).exp()
}

/// Kolmogorov-Smirnov statistic and asymptotic p-value of `data` against
/// the uniform distribution on `[lo, hi]`.
pub fn ks_uniform(data: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let mut xs: Vec<f64> = data.iter().map(|x| (x - lo) / (hi - lo)).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0f64, f64::max);
    let sn = n.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

/// `Q(lambda) = 2 sum_{j >= 1} (-1)^{j-1} exp(-2 j^2 lambda^2)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Gaps between circularly consecutive eigenangles.
pub fn spacings(sample: &CueSample) -> Vec<f64> {
    let a = &sample.eigenangles;
    let n = a.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                a[i + 1] - a[i]
            } else {
                a[0] + 2.0 * PI - a[n - 1]
            }
        })
        .collect()
}
