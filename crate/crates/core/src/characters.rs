//! Dirichlet characters modulo `q` with exact root-of-unity values.
//!
//! The unit group `(Z/qZ)*` is split by CRT into cyclic factors, one per
//! generator. A character is the tuple of exponents `j_i` with
//! `chi(g_i) = e(j_i / ord_i)`, so every value is a rational phase and all
//! group arithmetic is integer arithmetic. Floating point only appears when a
//! value is rendered with [`Phase::to_complex`].
//!
//! Characters are indexed in mixed-radix order of their exponent tuples
//! (first generator most significant), which puts the principal character at
//! index 0 and makes `--chi I` stable across runs.

use crate::arith::primes::{factorize, pow_mod, totient};
use crate::error::{Error, Result};
use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub const MAX_MODULUS: u64 = 1_000_000;

/// A root of unity `e^{2 pi i num/den}` stored as a reduced fraction in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Phase {
    num: u64,
    den: u64,
}

impl Phase {
    pub const ONE: Phase = Phase { num: 0, den: 1 };

    pub fn new(num: u64, den: u64) -> Phase {
        assert!(den > 0);
        let num = num % den;
        let g = num.gcd(&den);
        Phase {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn add(self, other: Phase) -> Phase {
        let den = self.den.lcm(&other.den);
        Phase::new(self.num * (den / self.den) + other.num * (den / other.den), den)
    }

    pub fn neg(self) -> Phase {
        Phase::new(self.den - self.num, self.den)
    }

    pub fn scale(self, k: u64) -> Phase {
        Phase::new(((self.num as u128 * k as u128) % self.den as u128) as u64, self.den)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Renders the phase; the eight points on the axes and diagonals are exact.
    pub fn to_complex(self) -> Complex64 {
        match (self.num, self.den) {
            (0, _) => Complex64::new(1.0, 0.0),
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            (3, 4) => Complex64::new(0.0, -1.0),
            _ => {
                let (s, c) = (std::f64::consts::TAU * self.as_f64()).sin_cos();
                Complex64::new(c, s)
            }
        }
    }
}

/// One cyclic factor of the unit group: a generator lifted to residue mod `q`.
#[derive(Debug, Clone, Serialize)]
pub struct Generator {
    pub residue: u64,
    pub order: u64,
    pub prime: u64,
    pub prime_power: u64,
    #[serde(skip)]
    kind: GeneratorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GeneratorKind {
    /// Primitive root modulo an odd prime power.
    OddCyclic,
    /// `-1` modulo `2^e`, `e >= 2`.
    MinusOne,
    /// `5` modulo `2^e`, `e >= 3`.
    Five,
}

#[derive(Debug)]
struct GroupData {
    modulus: u64,
    generators: Vec<Generator>,
    /// Mixed-radix strides, last generator has stride 1.
    strides: Vec<u64>,
    /// Exponent of the group: lcm of the generator orders.
    exponent: u64,
    /// residue -> mixed-radix discrete log, `u32::MAX` for non-units.
    dlog: Vec<u32>,
}

impl GroupData {
    fn dlog_digits(&self, a: u64) -> Option<Vec<u64>> {
        let idx = self.dlog[(a % self.modulus) as usize];
        if idx == u32::MAX {
            return None;
        }
        let mut rest = idx as u64;
        Some(
            self.generators
                .iter()
                .zip(&self.strides)
                .map(|(g, &stride)| {
                    let d = rest / stride;
                    rest %= stride;
                    debug_assert!(d < g.order);
                    d
                })
                .collect(),
        )
    }
}

/// All `phi(q)` Dirichlet characters modulo `q`.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    data: Arc<GroupData>,
    characters: Arc<Vec<DirichletCharacter>>,
}

/// A Dirichlet character modulo `q`, immutable and cheap to clone.
#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<GroupData>,
    exponents: Vec<u64>,
    index: usize,
    conductor: u64,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("modulus", &self.modulus())
            .field("index", &self.index)
            .field("exponents", &self.exponents)
            .field("conductor", &self.conductor)
            .finish()
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

fn primitive_root_odd_prime_power(p: u64, e: u32) -> u64 {
    let phi_p = p - 1;
    let factors: Vec<u64> = factorize(phi_p).into_iter().map(|(r, _)| r).collect();
    let g = (2..p)
        .find(|&g| factors.iter().all(|&r| pow_mod(g, phi_p / r, p) != 1))
        .expect("odd prime has a primitive root");
    if e >= 2 && pow_mod(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u64
}

/// The residue mod `q` that is `g` mod `pe` and `1` mod `q/pe`.
fn crt_lift(g: u64, pe: u64, q: u64) -> u64 {
    let rest = q / pe;
    if rest == 1 {
        return g % q;
    }
    let inv = mod_inverse(rest % pe, pe);
    let k = ((g + pe - 1) % pe) as u128 * inv as u128 % pe as u128;
    (1 + rest as u128 * k) as u64 % q
}

/// Builds the character group modulo `q`.
pub fn character_group(q: u64) -> Result<CharacterGroup> {
    if q == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    if q > MAX_MODULUS {
        return Err(Error::domain(format!("modulus {q} exceeds {MAX_MODULUS}")));
    }
    let mut generators = Vec::new();
    for (p, e) in factorize(q) {
        let pe = p.pow(e);
        if p == 2 {
            if e >= 2 {
                generators.push(Generator {
                    residue: crt_lift(pe - 1, pe, q),
                    order: 2,
                    prime: 2,
                    prime_power: pe,
                    kind: GeneratorKind::MinusOne,
                });
            }
            if e >= 3 {
                generators.push(Generator {
                    residue: crt_lift(5, pe, q),
                    order: pe / 4,
                    prime: 2,
                    prime_power: pe,
                    kind: GeneratorKind::Five,
                });
            }
        } else {
            let g = primitive_root_odd_prime_power(p, e);
            generators.push(Generator {
                residue: crt_lift(g, pe, q),
                order: pe / p * (p - 1),
                prime: p,
                prime_power: pe,
                kind: GeneratorKind::OddCyclic,
            });
        }
    }

    let mut strides = vec![1u64; generators.len()];
    for i in (0..generators.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * generators[i + 1].order;
    }
    let exponent = generators.iter().fold(1u64, |acc, g| acc.lcm(&g.order));

    // Enumerate elements in mixed-radix order.
    let mut elems = vec![1 % q];
    for g in &generators {
        let mut next = Vec::with_capacity(elems.len() * g.order as usize);
        for &x in &elems {
            let mut y = x;
            for _ in 0..g.order {
                next.push(y);
                y = (y as u128 * g.residue as u128 % q as u128) as u64;
            }
        }
        elems = next;
    }
    debug_assert_eq!(elems.len() as u64, totient(q));
    let mut dlog = vec![u32::MAX; q as usize];
    for (idx, &x) in elems.iter().enumerate() {
        dlog[x as usize] = idx as u32;
    }

    let data = Arc::new(GroupData {
        modulus: q,
        generators,
        strides,
        exponent,
        dlog,
    });

    let n = elems.len();
    let characters: Vec<DirichletCharacter> = (0..n)
        .map(|index| {
            let mut rest = index as u64;
            let exponents: Vec<u64> = data
                .strides
                .iter()
                .map(|&s| {
                    let d = rest / s;
                    rest %= s;
                    d
                })
                .collect();
            DirichletCharacter::from_parts(data.clone(), exponents)
        })
        .collect();

    Ok(CharacterGroup {
        data,
        characters: Arc::new(characters),
    })
}

impl CharacterGroup {
    pub fn modulus(&self) -> u64 {
        self.data.modulus
    }

    /// Number of characters, `phi(q)`.
    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.data.generators
    }

    /// Exponent of the unit group; every value is a power of `e(1/exponent)`.
    pub fn exponent(&self) -> u64 {
        self.data.exponent
    }

    pub fn principal_index(&self) -> usize {
        0
    }

    pub fn principal(&self) -> &DirichletCharacter {
        &self.characters[0]
    }

    pub fn characters(&self) -> &[DirichletCharacter] {
        &self.characters
    }

    pub fn character(&self, index: usize) -> Result<&DirichletCharacter> {
        self.characters.get(index).ok_or_else(|| {
            Error::domain(format!(
                "character index {index} out of range for modulus {} ({} characters)",
                self.modulus(),
                self.len()
            ))
        })
    }

    /// Residues in `1..=q` coprime to `q` (for `q = 1` this is `[1]`).
    pub fn units(&self) -> Vec<u64> {
        let q = self.modulus();
        (1..=q).filter(|&a| a.gcd(&q) == 1).collect()
    }
}

impl DirichletCharacter {
    fn from_parts(group: Arc<GroupData>, exponents: Vec<u64>) -> Self {
        let index = exponents
            .iter()
            .zip(&group.strides)
            .map(|(j, s)| (j * s) as usize)
            .sum();
        let conductor = local_conductor(&group, &exponents);
        DirichletCharacter {
            group,
            exponents,
            index,
            conductor,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    /// Position in the owning group's deterministic ordering.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Generator exponents `j_i` with `chi(g_i) = e(j_i / ord_i)`.
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&j| j == 0)
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus()
    }

    /// Order of the character in the dual group.
    pub fn order(&self) -> u64 {
        self.exponents
            .iter()
            .zip(&self.group.generators)
            .fold(1u64, |acc, (&j, g)| acc.lcm(&(g.order / j.gcd(&g.order))))
    }

    /// `chi(a)` as an exact phase, or `None` when `gcd(a, q) > 1`.
    pub fn value_exponent(&self, a: u64) -> Option<Phase> {
        self.value_index(a)
            .map(|num| Phase::new(num, self.group.exponent))
    }

    /// `chi(a) = e(j / E)` with `E` the group exponent; returns `j`.
    pub fn value_index(&self, a: u64) -> Option<u64> {
        let digits = self.group.dlog_digits(a)?;
        let lam = self.group.exponent;
        let mut num = 0u128;
        for ((&j, &d), g) in self.exponents.iter().zip(&digits).zip(&self.group.generators) {
            num += j as u128 * d as u128 * (lam / g.order) as u128;
        }
        Some((num % lam as u128) as u64)
    }

    pub fn group_exponent(&self) -> u64 {
        self.group.exponent
    }

    /// `chi(a)` rendered as a complex number (zero off the units).
    pub fn value(&self, a: u64) -> Complex64 {
        self.value_exponent(a)
            .map(Phase::to_complex)
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// True when `chi(-1) = 1`.
    pub fn is_even(&self) -> bool {
        let q = self.modulus();
        self.value_exponent(q - 1 + if q == 1 { 1 } else { 0 })
            .map(|p| p.is_one())
            .unwrap_or(true)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &DirichletCharacter) -> Result<DirichletCharacter> {
        if self.modulus() != other.modulus() {
            return Err(Error::ModulusMismatch(self.modulus(), other.modulus()));
        }
        let exps = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .zip(&self.group.generators)
            .map(|((a, b), g)| (a + b) % g.order)
            .collect();
        Ok(DirichletCharacter::from_parts(self.group.clone(), exps))
    }

    pub fn conj(&self) -> DirichletCharacter {
        let exps = self
            .exponents
            .iter()
            .zip(&self.group.generators)
            .map(|(&a, g)| (g.order - a) % g.order)
            .collect();
        DirichletCharacter::from_parts(self.group.clone(), exps)
    }

    /// The primitive character modulo the conductor that induces `self`.
    pub fn induce_primitive(&self) -> DirichletCharacter {
        if self.is_primitive() {
            return self.clone();
        }
        let q = self.modulus();
        let qs = self.conductor;
        let target = character_group(qs).expect("conductor divides a valid modulus");
        let exps = target
            .data
            .generators
            .iter()
            .map(|g| {
                // Lift the generator to a unit mod q in the same class mod q*.
                let a = (0..)
                    .map(|k| g.residue + k * qs)
                    .find(|a| a.gcd(&q) == 1)
                    .expect("CRT lift exists");
                let ph = self.value_exponent(a).expect("unit");
                let scaled = ph.num() as u128 * g.order as u128;
                debug_assert_eq!(scaled % ph.den() as u128, 0);
                (scaled / ph.den() as u128) as u64 % g.order
            })
            .collect();
        DirichletCharacter::from_parts(target.data.clone(), exps)
    }
}

/// Conductor from the local exponent data of each prime-power component.
fn local_conductor(group: &GroupData, exps: &[u64]) -> u64 {
    let mut cond = 1u64;
    let mut i = 0;
    let gens = &group.generators;
    while i < gens.len() {
        let g = &gens[i];
        let p = g.prime;
        let pe = g.prime_power;
        match g.kind {
            GeneratorKind::OddCyclic => {
                let j = exps[i];
                if j != 0 {
                    // chi is trivial on 1 + p^f Z exactly when j (p-1) p^{f-1} = 0 mod ord(g).
                    let mut pf = p;
                    while (j as u128 * (p - 1) as u128 * (pf / p) as u128) % g.order as u128 != 0 {
                        pf *= p;
                    }
                    cond *= pf;
                }
                i += 1;
            }
            GeneratorKind::MinusOne => {
                let j1 = exps[i];
                let (j2, ord2, step) = match gens.get(i + 1) {
                    Some(h) if h.kind == GeneratorKind::Five => (exps[i + 1], h.order, 2),
                    _ => (0, 1, 1),
                };
                if j1 != 0 || j2 != 0 {
                    // U_f for f >= 2 is generated by 5^{2^{f-2}}.
                    let mut f = 2u64;
                    while (j2 as u128 * (1u128 << (f - 2))) % ord2 as u128 != 0 {
                        f += 1;
                    }
                    debug_assert!(1 << f <= pe);
                    cond *= 1 << f;
                }
                i += step;
            }
            GeneratorKind::Five => unreachable!("5 always follows -1"),
        }
    }
    cond
}
