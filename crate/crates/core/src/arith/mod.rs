//! Multiplicative coefficient families attached to products of L-functions.
//!
//! Everything is assembled from local data at prime powers. The local factor
//! at `p` is expanded as a power series with exact group-ring coefficients
//! (see [`cyclo`]) and rendered to complex numbers at the end.

pub mod cyclo;
pub mod primes;
pub mod special;

use crate::characters::{CharacterGroup, DirichletCharacter};
use crate::error::{Error, Result};
use cyclo::{Cyclo, CycloSeries};
use num_complex::Complex64;
use num_integer::Integer;
use primes::{factorize, primes_up_to, smallest_prime_factors};
use std::collections::HashMap;
use std::fmt;

pub use special::{barnes_g, barnes_ratio, bernoulli, binomial, multinomial, EULER_GAMMA};

/// Largest table size built eagerly; beyond this, values come from factorization.
pub const MAX_TABLE: u64 = 10_000_000;

/// A tuple of nonnegative integers indexed by the characters of one group.
#[derive(Clone)]
pub struct ExponentTuple {
    group: CharacterGroup,
    exps: Vec<u32>,
}

impl fmt::Debug for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExponentTuple(q={}, {})", self.group.modulus(), self.label())
    }
}

impl PartialEq for ExponentTuple {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus() == other.group.modulus() && self.exps == other.exps
    }
}

impl ExponentTuple {
    pub fn new(group: &CharacterGroup, exps: Vec<u32>) -> Result<ExponentTuple> {
        if exps.len() != group.len() {
            return Err(Error::domain(format!(
                "exponent tuple has {} entries but there are {} characters mod {}",
                exps.len(),
                group.len(),
                group.modulus()
            )));
        }
        Ok(ExponentTuple {
            group: group.clone(),
            exps,
        })
    }

    pub fn zero(group: &CharacterGroup) -> ExponentTuple {
        ExponentTuple {
            group: group.clone(),
            exps: vec![0; group.len()],
        }
    }

    /// `k * delta^chi`.
    pub fn delta(group: &CharacterGroup, index: usize, k: u32) -> Result<ExponentTuple> {
        group.character(index)?;
        let mut t = ExponentTuple::zero(group);
        t.exps[index] = k;
        Ok(t)
    }

    pub fn from_pairs(group: &CharacterGroup, pairs: &[(usize, u32)]) -> Result<ExponentTuple> {
        let mut t = ExponentTuple::zero(group);
        for &(i, e) in pairs {
            group.character(i)?;
            t.exps[i] += e;
        }
        Ok(t)
    }

    /// Parses `"i:e,i:e,..."`; an index without `:e` counts once.
    pub fn parse(group: &CharacterGroup, text: &str) -> Result<ExponentTuple> {
        let mut pairs = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (i, e) = match part.split_once(':') {
                Some((i, e)) => (i.trim(), e.trim()),
                None => (part, "1"),
            };
            let i: usize = i
                .parse()
                .map_err(|_| Error::Usage(format!("--ell: bad character index {i:?}")))?;
            let e: u32 = e
                .parse()
                .map_err(|_| Error::Usage(format!("--ell: bad exponent {e:?}")))?;
            pairs.push((i, e));
        }
        ExponentTuple::from_pairs(group, &pairs)
    }

    /// All tuples with `|l| = k`, in lexicographic order of the exponent vector
    /// (descending), so `k delta^{chi_0}` comes first.
    pub fn all_with_weight(group: &CharacterGroup, k: u32) -> Vec<ExponentTuple> {
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if pos + 1 == cur.len() {
                cur[pos] = left;
                out.push(cur.clone());
                return;
            }
            for e in (0..=left).rev() {
                cur[pos] = e;
                rec(pos + 1, left - e, cur, out);
            }
            cur[pos] = 0;
        }
        let mut out = Vec::new();
        let mut cur = vec![0; group.len()];
        rec(0, k, &mut cur, &mut out);
        out.into_iter()
            .map(|exps| ExponentTuple {
                group: group.clone(),
                exps,
            })
            .collect()
    }

    pub fn group(&self) -> &CharacterGroup {
        &self.group
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn get(&self, index: usize) -> u32 {
        self.exps[index]
    }

    /// `|l|`.
    pub fn weight(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// `lambda(l) = sum l_chi^2`.
    pub fn lambda(&self) -> u32 {
        self.exps.iter().map(|e| e * e).sum()
    }

    /// Characters with nonzero exponent, with that exponent.
    pub fn support(&self) -> impl Iterator<Item = (&DirichletCharacter, u32)> + '_ {
        self.group
            .characters()
            .iter()
            .zip(&self.exps)
            .filter(|(_, &e)| e > 0)
            .map(|(c, &e)| (c, e))
    }

    /// True when all the weight sits on one character.
    pub fn is_concentrated(&self) -> bool {
        self.exps.iter().filter(|&&e| e > 0).count() <= 1
    }

    /// Multinomial coefficient `|l|! / prod l_chi!`.
    pub fn multinomial(&self) -> f64 {
        multinomial(&self.exps)
    }

    /// Compact label `i:e,...` listing the support.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, e)| format!("{i}:{e}"))
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(",")
        }
    }
}

fn render(series: &CycloSeries) -> Vec<Complex64> {
    series.to_complex()
}

/// Local factor `prod_chi (1 - chi(p) x)^{-l_chi}` through degree `max_deg`.
pub fn d_ell_local(ell: &ExponentTuple, p: u64, max_deg: usize) -> CycloSeries {
    if ell.modulus() % p == 0 {
        return CycloSeries::one(ell.group.exponent(), max_deg);
    }
    d_ell_local_class(ell, p % ell.modulus(), max_deg)
}

/// The same local factor for any prime in the unit class `c` mod `q`.
pub fn d_ell_local_class(ell: &ExponentTuple, c: u64, max_deg: usize) -> CycloSeries {
    let e = ell.group.exponent();
    let mut s = CycloSeries::one(e, max_deg);
    for (chi, l) in ell.support() {
        let idx = chi.value_index(c).expect("class must be a unit");
        s = s.mul(&CycloSeries::inverse_power(e, idx, 1.0, 1, l, max_deg));
    }
    s
}

/// `d_l(p^m)`.
pub fn d_ell_prime_power(ell: &ExponentTuple, p: u64, m: u32) -> Complex64 {
    d_ell_local(ell, p, m as usize).coeff(m as usize).to_complex()
}

/// `d_l(n)` via the factorization of `n`.
pub fn d_ell(ell: &ExponentTuple, n: u64) -> Complex64 {
    assert!(n >= 1);
    factorize(n)
        .into_iter()
        .map(|(p, m)| d_ell_prime_power(ell, p, m))
        .product()
}

/// The divisor function `d_k(n)`.
pub fn d_k(k: u32, n: u64) -> u64 {
    assert!(n >= 1);
    if k == 0 {
        return u64::from(n == 1);
    }
    factorize(n)
        .into_iter()
        .map(|(_, a)| binomial(a as u64 + k as u64 - 1, k as u64 - 1) as u64)
        .product()
}

/// `r_chi = sum_nu l_nu l_{nu chi}`.
pub fn r_chi(ell: &ExponentTuple, chi: &DirichletCharacter) -> Result<u64> {
    if chi.modulus() != ell.modulus() {
        return Err(Error::ModulusMismatch(chi.modulus(), ell.modulus()));
    }
    let chars = ell.group.characters();
    let mut r = 0u64;
    for (nu, &l) in chars.iter().zip(&ell.exps) {
        if l == 0 {
            continue;
        }
        let prod = nu.mul(chi)?;
        r += l as u64 * ell.exps[prod.index()] as u64;
    }
    Ok(r)
}

/// `kappa(c) = sum_chi r_chi chi(c)`, real; equal to `|d_l(p)|^2` for `p = c mod q`.
pub fn kappa(ell: &ExponentTuple, c: u64) -> Result<f64> {
    let q = ell.modulus();
    if c.gcd(&q) != 1 {
        return Err(Error::domain(format!("kappa needs gcd(c, q) = 1, got c={c}, q={q}")));
    }
    // Summed in the group ring so the imaginary parts cancel exactly.
    let e = ell.group.exponent();
    let mut acc = Cyclo::zero(e);
    for chi in ell.group.characters() {
        let r = r_chi(ell, chi)?;
        if r > 0 {
            acc = acc.add(&Cyclo::monomial(e, chi.value_index(c).unwrap(), r as f64));
        }
    }
    Ok(acc.to_complex().re)
}

/// Which Euler factors of the short product apply at a prime.
fn short_product_band(p: u64, x: f64) -> u8 {
    let pf = p as f64;
    if pf > x {
        0
    } else if pf * pf <= x {
        1
    } else {
        2
    }
}

/// Local factor of the short product `P*_X^l` at `p` through `max_deg`.
pub fn beta_local(ell: &ExponentTuple, x: f64, p: u64, max_deg: usize) -> CycloSeries {
    let e = ell.group.exponent();
    let band = short_product_band(p, x);
    if band == 0 || ell.modulus() % p == 0 {
        return CycloSeries::one(e, max_deg);
    }
    let mut s = d_ell_local(ell, p, max_deg);
    if band == 2 {
        for (chi, l) in ell.support() {
            let idx = chi.value_index(p).unwrap();
            s = s.mul(&CycloSeries::inverse_power(e, 2 * idx, -0.5, 2, l, max_deg));
        }
    }
    s
}

/// Local factor of `Q_X(s, chi)` at `p`: its coefficients are `beta_{-1}(p^m)`.
pub fn beta_minus_one_local(chi: &DirichletCharacter, x: f64, p: u64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let band = short_product_band(p, x);
    let w = chi.value(p);
    match band {
        0 => vec![one],
        _ if w == zero => vec![one],
        1 => vec![one, -w],
        _ => vec![one, -w, w * w * 0.5],
    }
}

fn check_short_product_range(q: u64, x: f64) -> Result<()> {
    if x <= (q * q) as f64 {
        return Err(Error::domain(format!("X must exceed q^2 = {}, got X = {x}", q * q)));
    }
    Ok(())
}

/// Values of a multiplicative function on `1..=N`.
#[derive(Debug, Clone)]
pub struct MultCoeffTable {
    limit: u64,
    values: Vec<Complex64>,
}

impl MultCoeffTable {
    /// Builds the table from local data. `local(p, a)` receives the largest
    /// exponent `a` with `p^a <= N` and returns values at `p^0, ..., p^a`.
    pub fn from_local<F>(limit: u64, mut local: F) -> Result<MultCoeffTable>
    where
        F: FnMut(u64, u32) -> Vec<Complex64>,
    {
        if limit > MAX_TABLE {
            return Err(Error::domain(format!("table limit {limit} exceeds {MAX_TABLE}")));
        }
        let n = limit as usize;
        let mut values = vec![Complex64::new(0.0, 0.0); n + 1];
        if n >= 1 {
            values[1] = Complex64::new(1.0, 0.0);
        }
        let spf = smallest_prime_factors(n);
        for p in primes_up_to(limit) {
            let mut a = 0u32;
            let mut pa = 1u64;
            while pa <= limit / p {
                pa *= p;
                a += 1;
            }
            let loc = local(p, a);
            let mut pk = 1u64;
            for k in 1..=a {
                pk *= p;
                values[pk as usize] = loc.get(k as usize).copied().unwrap_or_default();
            }
        }
        for m in 2..=n {
            let p = spf[m] as usize;
            let mut rest = m;
            let mut pk = 1usize;
            while rest % p == 0 {
                rest /= p;
                pk *= p;
            }
            if rest != 1 {
                values[m] = values[pk] * values[rest];
            }
        }
        Ok(MultCoeffTable { limit, values })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn value(&self, n: u64) -> Complex64 {
        self.values[n as usize]
    }

    /// Values indexed by `n`; entry 0 is unused.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Local data depends on the prime only through its residue class (and band),
/// so cache per class.
fn cached_local<F>(ell: &ExponentTuple, mut build: F) -> impl FnMut(u64, u32) -> Vec<Complex64>
where
    F: FnMut(u64, usize) -> CycloSeries,
{
    let q = ell.modulus();
    let mut cache: HashMap<(u64, u32), Vec<Complex64>> = HashMap::new();
    move |p, a| {
        let key = (p % q, a);
        if q % p == 0 {
            return render(&build(p, a as usize));
        }
        cache
            .entry(key)
            .or_insert_with(|| render(&build(p, a as usize)))
            .clone()
    }
}

/// `d_l(n)` for `n <= N`.
pub fn d_ell_table(ell: &ExponentTuple, limit: u64) -> Result<MultCoeffTable> {
    let local = cached_local(ell, |p, m| d_ell_local(ell, p, m));
    MultCoeffTable::from_local(limit, local)
}

/// Coefficients `beta_l(n)`, `n <= N`, of the short Euler product `P*_X^l`.
pub fn beta_ell(ell: &ExponentTuple, x: f64, limit: u64) -> Result<MultCoeffTable> {
    check_short_product_range(ell.modulus(), x)?;
    let q = ell.modulus();
    let mut cache: HashMap<(u64, u8, u32), Vec<Complex64>> = HashMap::new();
    MultCoeffTable::from_local(limit, |p, a| {
        let key = (p % q, short_product_band(p, x), a);
        cache
            .entry(key)
            .or_insert_with(|| render(&beta_local(ell, x, p, a as usize)))
            .clone()
    })
}

/// Coefficients `beta_{-1}(n)` of `Q_X(s, chi)`; with `chi` the character
/// mod 1 these are the `alpha_{-1}(n)`.
pub fn beta_minus_one(chi: &DirichletCharacter, x: f64, limit: u64) -> Result<MultCoeffTable> {
    check_short_product_range(chi.modulus(), x)?;
    MultCoeffTable::from_local(limit, |p, _| beta_minus_one_local(chi, x, p))
}

/// `Lambda(n)`.
pub fn mangoldt(n: u64) -> f64 {
    match primes::prime_power(n) {
        Some((p, _)) => (p as f64).ln(),
        None => 0.0,
    }
}

/// `X`-smooth integers coprime to `q` in `[1, N]`, ascending.
pub fn smooth_numbers(q: u64, x: f64, limit: u64) -> Vec<u64> {
    let bound = if x >= 2.0 { x.floor() as u64 } else { 1 };
    let ps: Vec<u64> = primes_up_to(bound.min(limit.max(1)))
        .into_iter()
        .filter(|p| q % p != 0)
        .collect();
    let mut out = Vec::new();
    fn rec(start: usize, n: u64, ps: &[u64], limit: u64, out: &mut Vec<u64>) {
        out.push(n);
        for (i, &p) in ps.iter().enumerate().skip(start) {
            if n > limit / p {
                break;
            }
            rec(i, n * p, ps, limit, out);
        }
    }
    if limit >= 1 {
        rec(0, 1, &ps, limit, &mut out);
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character_group;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn lambda_and_weight() {
        let g = character_group(5).unwrap();
        let t = ExponentTuple::from_pairs(&g, &[(0, 2), (3, 1)]).unwrap();
        assert_eq!(t.weight(), 3);
        assert_eq!(t.lambda(), 5);
        assert!(!t.is_concentrated());
        assert_eq!(t.multinomial(), 3.0);
        assert_eq!(t.label(), "0:2,3:1");
        assert_eq!(ExponentTuple::parse(&g, "0:2, 3").unwrap(), t);
        assert!(ExponentTuple::parse(&g, "9:1").is_err());
        assert!(ExponentTuple::parse(&g, "x:1").is_err());
    }

    #[test]
    fn lambda_bound_exhaustive() {
        for q in 1..=8 {
            let g = character_group(q).unwrap();
            for k in 0..=3 {
                for t in ExponentTuple::all_with_weight(&g, k) {
                    assert!(t.lambda() <= k * k);
                    assert_eq!(t.lambda() == k * k, t.is_concentrated());
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        let g = character_group(5).unwrap();
        // compositions of 2 into 4 parts: C(5, 3) = 10
        let all = ExponentTuple::all_with_weight(&g, 2);
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], ExponentTuple::delta(&g, 0, 2).unwrap());
        let total: f64 = all.iter().map(|t| t.multinomial()).sum();
        assert_eq!(total, 16.0); // 4^2
    }

    #[test]
    fn d_ell_examples() {
        let g1 = character_group(1).unwrap();
        let two = ExponentTuple::delta(&g1, 0, 2).unwrap();
        for p in [2u64, 3, 101] {
            for m in 0..8 {
                assert_eq!(d_ell_prime_power(&two, p, m), c(m as f64 + 1.0));
            }
        }
        assert_eq!(d_k(2, 12), 6);
        assert_eq!(d_k(3, 1), 1);
        assert_eq!(d_k(3, 4), 6);

        let g = character_group(7).unwrap();
        let chi = &g.characters()[2];
        let nu = &g.characters()[5];
        let pair = ExponentTuple::from_pairs(&g, &[(2, 1), (5, 1)]).unwrap();
        for p in [2u64, 3, 5, 11, 13] {
            let expect = chi.value(p) + nu.value(p);
            assert!((d_ell_prime_power(&pair, p, 1) - expect).norm() < 1e-14);
        }
        let k3 = ExponentTuple::delta(&g, 2, 3).unwrap();
        for n in 1..300u64 {
            let expect = chi.value(n) * d_k(3, n) as f64;
            assert!((d_ell(&k3, n) - expect).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn d_ell_bounded_by_divisor_function() {
        let g = character_group(5).unwrap();
        let t = ExponentTuple::from_pairs(&g, &[(1, 1), (2, 1), (3, 1)]).unwrap();
        let table = d_ell_table(&t, 10_000).unwrap();
        for n in 1..=10_000u64 {
            assert!(table.value(n).norm() <= d_k(3, n) as f64 + 1e-9);
        }
    }

    #[test]
    fn table_matches_on_demand() {
        let g = character_group(12).unwrap();
        let t = ExponentTuple::from_pairs(&g, &[(1, 2), (3, 1)]).unwrap();
        let table = d_ell_table(&t, 2000).unwrap();
        for n in 1..=2000u64 {
            assert!((table.value(n) - d_ell(&t, n)).norm() < 1e-12);
        }
    }

    #[test]
    fn kappa_identities() {
        for q in [3u64, 4, 5, 8, 12] {
            let g = character_group(q).unwrap();
            let t = ExponentTuple::from_pairs(&g, &[(0, 1), (g.len() - 1, 2)]).unwrap();
            let lam = t.lambda() as u64;
            assert_eq!(r_chi(&t, g.principal()).unwrap(), lam);
            let total: f64 = g.units().iter().map(|&a| kappa(&t, a).unwrap()).sum();
            assert!((total - (lam * g.len() as u64) as f64).abs() < 1e-9);
            for chi in g.characters() {
                assert_eq!(r_chi(&t, chi).unwrap(), r_chi(&t, &chi.conj()).unwrap());
            }
            for p in primes_up_to(2000) {
                if q % p == 0 {
                    continue;
                }
                let d = d_ell_prime_power(&t, p, 1).norm_sqr();
                assert!((kappa(&t, p % q).unwrap() - d).abs() < 1e-10);
            }
        }
        let g = character_group(6).unwrap();
        let t = ExponentTuple::delta(&g, 1, 1).unwrap();
        assert!(matches!(kappa(&t, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_properties() {
        let g = character_group(3).unwrap();
        let t = ExponentTuple::from_pairs(&g, &[(0, 1), (1, 1)]).unwrap();
        let x = 50.0;
        let beta = beta_ell(&t, x, 20_000).unwrap();
        let d = d_ell_table(&t, 20_000).unwrap();
        assert_eq!(beta.value(1), c(1.0));
        let smooth_sqrt: std::collections::HashSet<u64> =
            smooth_numbers(3, x.sqrt(), 20_000).into_iter().collect();
        let smooth: std::collections::HashSet<u64> = smooth_numbers(3, x, 20_000).into_iter().collect();
        for n in 1..=20_000u64 {
            let b = beta.value(n);
            if !smooth.contains(&n) {
                assert_eq!(b, c(0.0), "n={n}");
            }
            if smooth_sqrt.contains(&n) {
                assert!((b - d.value(n)).norm() < 1e-12);
            }
            assert!(b.norm() <= d_k(4, n) as f64 + 1e-9);
        }
        for p in primes_up_to(50) {
            if p != 3 {
                assert!((beta.value(p) - d.value(p)).norm() < 1e-12);
            }
        }
        // p = 11 > sqrt(50): beta(p^2) = d(p^2) - (chi0^2 + chi1^2)(p)/2
        let p = 11u64;
        let corr = (g.characters()[0].value(p).powi(2) + g.characters()[1].value(p).powi(2)) * 0.5;
        assert!((beta.value(p * p) - (d.value(p * p) - corr)).norm() < 1e-12);
        assert!(matches!(beta_ell(&t, 9.0, 100), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_minus_one_values() {
        let g = character_group(3).unwrap();
        let chi = &g.characters()[1];
        let x = 12.0;
        let b = beta_minus_one(chi, x, 5000).unwrap();
        for p in [2u64, 5, 7, 11] {
            assert_eq!(b.value(p), -chi.value(p));
        }
        assert_eq!(b.value(4), c(0.0)); // 2 <= sqrt(12): factor is linear
        assert_eq!(b.value(25), chi.value(25) * 0.5);
        assert_eq!(b.value(13), c(0.0));
        assert_eq!(b.value(3), c(0.0));
    }

    #[test]
    fn multiplicativity_random_pairs() {
        use rand::{Rng, SeedableRng};
        let g = character_group(8).unwrap();
        let t = ExponentTuple::from_pairs(&g, &[(1, 1), (2, 2)]).unwrap();
        let table = d_ell_table(&t, 100_000).unwrap();
        let beta = beta_ell(&t, 80.0, 100_000).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 1000 {
            let m = rng.random_range(1..300u64);
            let n = rng.random_range(1..300u64);
            if m.gcd(&n) != 1 {
                continue;
            }
            checked += 1;
            for tab in [&table, &beta] {
                let lhs = tab.value(m * n);
                let rhs = tab.value(m) * tab.value(n);
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn mangoldt_and_smooth() {
        assert!((mangoldt(8) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(mangoldt(6), 0.0);
        assert_eq!(mangoldt(1), 0.0);
        let s = smooth_numbers(3, 5.0, 30);
        let brute: Vec<u64> = (1..=30u64)
            .filter(|n| n % 3 != 0 && factorize(*n).iter().all(|&(p, _)| p <= 5))
            .collect();
        assert_eq!(s, brute);
        assert_eq!(&s[..9], &[1, 2, 4, 5, 8, 10, 16, 20, 25]);
    }
}
