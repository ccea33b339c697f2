//! Power series whose coefficients live in the group ring of `Z/E`.
//!
//! A coefficient `sum_j c_j [j]` stands for `sum_j c_j e(j/E)`. Character
//! values at a prime are single basis elements, so expanding local Euler
//! factors only ever adds exponents mod `E` and multiplies small integers or
//! dyadic rationals. Those are exact in `f64` until they exceed 2^53, which
//! the series used here never approach.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Cyclo {
    order: u64,
    /// Sorted by exponent, no zero coefficients.
    terms: Vec<(u64, f64)>,
}

impl Cyclo {
    pub fn zero(order: u64) -> Cyclo {
        Cyclo {
            order,
            terms: Vec::new(),
        }
    }

    pub fn monomial(order: u64, exp: u64, coeff: f64) -> Cyclo {
        let mut c = Cyclo::zero(order);
        if coeff != 0.0 {
            c.terms.push((exp % order, coeff));
        }
        c
    }

    pub fn one(order: u64) -> Cyclo {
        Cyclo::monomial(order, 0, 1.0)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(u64, f64)] {
        &self.terms
    }

    fn normalize(mut raw: Vec<(u64, f64)>) -> Vec<(u64, f64)> {
        raw.sort_by_key(|t| t.0);
        let mut out: Vec<(u64, f64)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        out
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        debug_assert_eq!(self.order, other.order);
        let mut raw = self.terms.clone();
        raw.extend_from_slice(&other.terms);
        Cyclo {
            order: self.order,
            terms: Cyclo::normalize(raw),
        }
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        debug_assert_eq!(self.order, other.order);
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, x) in &self.terms {
            for &(b, y) in &other.terms {
                raw.push(((a + b) % self.order, x * y));
            }
        }
        Cyclo {
            order: self.order,
            terms: Cyclo::normalize(raw),
        }
    }

    pub fn scale(&self, k: f64) -> Cyclo {
        Cyclo {
            order: self.order,
            terms: Cyclo::normalize(self.terms.iter().map(|&(e, c)| (e, c * k)).collect()),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|&(e, c)| {
                let w = crate::characters::Phase::new(e, self.order).to_complex();
                w * c
            })
            .sum()
    }

    /// Sum of absolute coefficients, an upper bound for the modulus.
    pub fn l1(&self) -> f64 {
        self.terms.iter().map(|t| t.1.abs()).sum()
    }
}

/// Truncated power series `sum_{m <= M} a_m x^m` with group-ring coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CycloSeries {
    order: u64,
    coeffs: Vec<Cyclo>,
}

impl CycloSeries {
    pub fn one(order: u64, max_deg: usize) -> CycloSeries {
        let mut coeffs = vec![Cyclo::zero(order); max_deg + 1];
        coeffs[0] = Cyclo::one(order);
        CycloSeries { order, coeffs }
    }

    pub fn from_coeffs(order: u64, coeffs: Vec<Cyclo>) -> CycloSeries {
        CycloSeries { order, coeffs }
    }

    pub fn max_deg(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, m: usize) -> &Cyclo {
        &self.coeffs[m]
    }

    pub fn coeffs(&self) -> &[Cyclo] {
        &self.coeffs
    }

    pub fn mul(&self, other: &CycloSeries) -> CycloSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![Cyclo::zero(self.order); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        CycloSeries {
            order: self.order,
            coeffs: out,
        }
    }

    /// `(1 - w x^d)^{-l}` with `w = e(exp/E)`: coefficient of `x^{dj}` is
    /// `binom(j+l-1, j) (c w)^j` where `c` is the scalar `coeff`.
    pub fn inverse_power(order: u64, exp: u64, coeff: f64, d: usize, l: u32, max_deg: usize) -> CycloSeries {
        let mut coeffs = vec![Cyclo::zero(order); max_deg + 1];
        let mut binom = 1.0f64;
        let mut scalar = 1.0f64;
        let mut j = 0usize;
        while j * d <= max_deg {
            coeffs[j * d] = Cyclo::monomial(order, ((exp as u128 * j as u128) % order as u128) as u64, binom * scalar);
            if l == 0 {
                break;
            }
            binom = binom * (j as f64 + l as f64) / (j as f64 + 1.0);
            scalar *= coeff;
            j += 1;
        }
        CycloSeries { order, coeffs }
    }

    /// Polynomial `sum_i c_i x^i` (coefficients given as group-ring elements).
    pub fn polynomial(order: u64, poly: Vec<Cyclo>, max_deg: usize) -> CycloSeries {
        let mut coeffs = vec![Cyclo::zero(order); max_deg + 1];
        for (i, c) in poly.into_iter().enumerate().take(max_deg + 1) {
            coeffs[i] = c;
        }
        CycloSeries { order, coeffs }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(Cyclo::to_complex).collect()
    }
}
