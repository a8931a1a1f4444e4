//! Exact arithmetic in F_q, q = p^m, with the canonical additive character.
//!
//! Elements are stored by their canonical index `idx = c_0 + c_1 p + ... + c_{m-1} p^{m-1}`
//! where `c_i` are the coefficients of the element in the polynomial basis
//! `1, t, ..., t^{m-1}` modulo the field's irreducible modulus. Element 0 has
//! index 0 and element 1 has index 1.
//!
//! The additive character is `chi(a) = exp(2 pi i Tr(a) / p)` with the absolute
//! trace `Tr(a) = a + a^p + ... + a^{p^{m-1}}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u32 = 1 << 20;

/// Fields up to this order get full q x q addition and multiplication tables.
const TABLE_LIMIT: u32 = 256;

const NO_ROOT: u32 = u32::MAX;

/// An element of F_q, identified by its canonical index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Canonical index in `[0, q)`.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Wraps an index without range checking; callers guarantee `idx < q`.
    #[inline]
    pub(crate) fn from_index_unchecked(idx: u32) -> Self {
        FieldElement(idx)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// F_q with precomputed tables. Immutable after construction.
#[derive(Clone)]
pub struct Field {
    p: u32,
    m: u32,
    q: u32,
    /// Monic modulus, constant term first, length m+1. Empty when m = 1.
    modulus: Vec<u32>,
    add_table: Option<Vec<u32>>,
    mul_table: Option<Vec<u32>>,
    /// exp[i] = g^i for a primitive element g, stored twice over for wrap-free lookups.
    exp: Vec<u32>,
    log: Vec<u32>,
    /// Absolute trace of every element; empty for prime fields (trace is the identity).
    trace: Vec<u32>,
    /// roots[k] = exp(2 pi i k / p).
    roots: Vec<Complex64>,
    /// One square root per square (the smallest index), NO_ROOT otherwise.
    sqrt_root: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.spec())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for Field {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors, ascending.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits q into (p, m) with q = p^m.
pub fn prime_power(q: u64) -> Result<(u32, u32)> {
    if q < 2 {
        return Err(Error::NotPrimePower(q));
    }
    let p = prime_factors(q)[0];
    let mut rest = q;
    let mut m = 0u32;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    if rest != 1 {
        return Err(Error::NotPrimePower(q));
    }
    Ok((p as u32, m))
}

// Polynomials over Z_p as coefficient vectors, constant term first.

fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    // den is monic.
    let mut r: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    let dd = den.len() - 1;
    let p64 = p as u64;
    while r.len() > dd {
        let lead = *r.last().unwrap() % p64;
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (i, &c) in den.iter().enumerate() {
                let sub = lead * c as u64 % p64;
                r[shift + i] = (r[shift + i] + p64 - sub) % p64;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| (c % p64) as u32).collect()
}

fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let m = modulus.len() - 1;
    let p64 = p as u64;
    let mut prod = vec![0u64; 2 * m - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    let mut r = poly_rem(&prod, modulus, p);
    r.resize(m, 0);
    r
}

fn format_poly(coeffs: &[u32]) -> String {
    coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// True when the monic polynomial of degree m >= 2 has no monic factor of degree <= m/2.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = modulus.len() - 1;
    if m <= 1 {
        return true;
    }
    for k in 1..=m / 2 {
        let count = (p as u64).pow(k as u32);
        let mut g = vec![0u32; k + 1];
        g[k] = 1;
        for n in 0..count {
            let mut v = n;
            for c in g.iter_mut().take(k) {
                *c = (v % p as u64) as u32;
                v /= p as u64;
            }
            if poly_rem(modulus, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The lexicographically smallest monic irreducible of degree m, comparing coefficient
/// tuples read from the constant term up.
fn canonical_modulus(p: u32, m: u32) -> Vec<u32> {
    let m = m as usize;
    let count = (p as u64).pow(m as u32);
    let mut f = vec![0u32; m + 1];
    f[m] = 1;
    for n in 0..count {
        // c_0 is the most significant digit of n.
        let mut v = n;
        for i in (0..m).rev() {
            f[i] = (v % p as u64) as u32;
            v /= p as u64;
        }
        if is_irreducible(&f, p) {
            return f.clone();
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    /// Builds F_{p^m}. With `modulus = None` the canonical modulus is chosen.
    pub fn new(p: u32, m: u32, modulus: Option<&[u32]>) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("extension degree m must be >= 1".into()));
        }
        let q = (p as u64).checked_pow(m).unwrap_or(u64::MAX);
        if q > MAX_FIELD_ORDER as u64 {
            return Err(Error::FieldTooLarge { q, max: MAX_FIELD_ORDER as u64 });
        }
        let q = q as u32;
        let modulus = if m == 1 {
            match modulus {
                None => Vec::new(),
                Some([]) => Vec::new(),
                Some(f) if f.len() == 2 && f[1] == 1 && f[0] < p => Vec::new(),
                Some(f) => {
                    return Err(Error::InvalidModulus(format!(
                        "degree-1 field takes no modulus, got [{}]",
                        format_poly(f)
                    )))
                }
            }
        } else {
            match modulus {
                None => canonical_modulus(p, m),
                Some(f) => {
                    if f.len() != m as usize + 1 {
                        return Err(Error::InvalidModulus(format!(
                            "expected {} coefficients, got {}",
                            m + 1,
                            f.len()
                        )));
                    }
                    if f.iter().any(|&c| c >= p) {
                        return Err(Error::InvalidModulus(format!(
                            "coefficients must lie in [0, {p})"
                        )));
                    }
                    if f[m as usize] != 1 {
                        return Err(Error::InvalidModulus("modulus must be monic".into()));
                    }
                    if !is_irreducible(f, p) {
                        return Err(Error::ReducibleModulus(format_poly(f)));
                    }
                    f.to_vec()
                }
            }
        };

        let mut field = Field {
            p,
            m,
            q,
            modulus,
            add_table: None,
            mul_table: None,
            exp: Vec::new(),
            log: Vec::new(),
            trace: Vec::new(),
            roots: (0..p)
                .map(|k| {
                    let (s, c) = (2.0 * PI * k as f64 / p as f64).sin_cos();
                    Complex64::new(c, s)
                })
                .collect(),
            sqrt_root: Vec::new(),
        };
        field.build_log_tables();
        if q <= TABLE_LIMIT {
            field.build_small_tables();
        }
        field.build_trace_table();
        field.build_sqrt_table();
        Ok(field)
    }

    /// F_p.
    pub fn prime(p: u32) -> Result<Field> {
        Field::new(p, 1, None)
    }

    /// F_q with the canonical modulus, for any prime power q.
    pub fn of_order(q: u64) -> Result<Field> {
        let (p, m) = prime_power(q)?;
        Field::new(p, m, None)
    }

    /// Parses `"p"`, `"q"`, `"p^m"` or `"p^m/c0,c1,...,cm"`.
    pub fn from_spec(spec: &str) -> Result<Field> {
        spec.parse()
    }

    fn coeffs_of(&self, idx: u32) -> Vec<u32> {
        let mut v = idx;
        (0..self.m)
            .map(|_| {
                let c = v % self.p;
                v /= self.p;
                c
            })
            .collect()
    }

    fn index_of(&self, coeffs: &[u32]) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            return (a as u64 * b as u64 % self.p as u64) as u32;
        }
        let r = poly_mulmod(&self.coeffs_of(a), &self.coeffs_of(b), &self.modulus, self.p);
        self.index_of(&r)
    }

    fn slow_pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn build_log_tables(&mut self) {
        let order = (self.q - 1) as u64;
        let factors = prime_factors(order);
        let g = (1..self.q)
            .find(|&g| factors.iter().all(|&r| self.slow_pow(g, order / r) != 1))
            .expect("multiplicative group is cyclic");
        let n = (self.q - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1u32;
        for i in 0..n {
            exp[i] = x;
            exp[i + n] = x;
            log[x as usize] = i as u32;
            x = self.slow_mul(x, g);
        }
        self.exp = exp;
        self.log = log;
    }

    fn build_small_tables(&mut self) {
        let q = self.q as usize;
        let mut add = vec![0u32; q * q];
        let mut mul = vec![0u32; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = self.add_digits(a as u32, b as u32);
                mul[a * q + b] = self.mul_log(a as u32, b as u32);
            }
        }
        self.add_table = Some(add);
        self.mul_table = Some(mul);
    }

    fn build_trace_table(&mut self) {
        if self.m == 1 {
            return;
        }
        // Tr is Z_p-linear: tabulate it on the basis t^i, then extend.
        let basis: Vec<u32> = (0..self.m)
            .map(|i| {
                let t_i = self.p.pow(i);
                let mut acc = 0u32;
                let mut x = t_i;
                for _ in 0..self.m {
                    acc = self.add_digits(acc, x);
                    x = self.pow_log(x, self.p as u64);
                }
                debug_assert!(acc < self.p, "trace lands in the prime subfield");
                acc
            })
            .collect();
        let p = self.p as u64;
        self.trace = (0..self.q)
            .map(|idx| {
                let mut v = idx;
                let mut acc = 0u64;
                for &b in &basis {
                    acc += (v % self.p) as u64 * b as u64;
                    v /= self.p;
                }
                (acc % p) as u32
            })
            .collect();
    }

    fn build_sqrt_table(&mut self) {
        let mut table = vec![NO_ROOT; self.q as usize];
        for x in 0..self.q {
            let s = self.mul_log(x, x) as usize;
            if table[s] == NO_ROOT {
                table[s] = x;
            }
        }
        self.sqrt_root = table;
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut scale = 1u32;
        for _ in 0..self.m {
            let s = (a % self.p + b % self.p) % self.p;
            out += s * scale;
            scale *= self.p;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    fn neg_digits(&self, a: u32) -> u32 {
        if self.m == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        if self.p == 2 {
            return a;
        }
        let mut a = a;
        let mut out = 0u32;
        let mut scale = 1u32;
        for _ in 0..self.m {
            let c = a % self.p;
            out += ((self.p - c) % self.p) * scale;
            scale *= self.p;
            a /= self.p;
        }
        out
    }

    fn mul_log(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.m == 1 {
            return (a as u64 * b as u64 % self.p as u64) as u32;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    fn pow_log(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.q - 1) as u64;
        self.exp[((self.log[a as usize] as u64 % n) * (e % n) % n) as usize]
    }

    /// Characteristic.
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Extension degree.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Order.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Monic modulus, constant term first (empty for prime fields).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Canonical spec string: `"p"` for prime fields, otherwise `"p^m/c0,...,cm"`.
    pub fn spec(&self) -> String {
        if self.m == 1 {
            self.p.to_string()
        } else {
            format!("{}^{}/{}", self.p, self.m, format_poly(&self.modulus))
        }
    }

    pub fn element(&self, idx: u32) -> Result<FieldElement> {
        if idx >= self.q {
            return Err(Error::IndexOutOfRange { index: idx as u64, size: self.q as u64 });
        }
        Ok(FieldElement(idx))
    }

    /// Reduces an integer into F_q by its canonical index (mod q).
    pub fn from_int(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.q as i64) as u32)
    }

    /// Image of an integer under Z -> F_p -> F_q.
    pub fn from_prime_int(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        self.coeffs_of(a.0)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement> {
        if coeffs.len() != self.m as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidParameter(format!(
                "need {} coefficients in [0, {})",
                self.m, self.p
            )));
        }
        Ok(FieldElement(self.index_of(coeffs)))
    }

    /// The generator t of the polynomial basis (equal to 1... only when m = 1).
    pub fn basis_generator(&self) -> FieldElement {
        if self.m == 1 {
            FieldElement::ONE
        } else {
            FieldElement(self.p)
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> {
        (1..self.q).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.add_table {
            Some(t) => FieldElement(t[(a.0 * self.q + b.0) as usize]),
            None => FieldElement(self.add_digits(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg_digits(a.0))
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.mul_table {
            Some(t) => FieldElement(t[(a.0 * self.q + b.0) as usize]),
            None => FieldElement(self.mul_log(a.0, b.0)),
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let n = self.q - 1;
        Ok(FieldElement(self.exp[((n - self.log[a.0 as usize]) % n) as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^e with 0^0 = 1.
    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        FieldElement(self.pow_log(a.0, e))
    }

    /// Absolute trace, returned as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u32 {
        if self.m == 1 {
            a.0
        } else {
            self.trace[a.0 as usize]
        }
    }

    /// The canonical additive character exp(2 pi i Tr(a)/p).
    #[inline]
    pub fn chi(&self, a: FieldElement) -> Complex64 {
        self.roots[self.trace(a) as usize]
    }

    /// The twisted character a -> chi(c a).
    #[inline]
    pub fn chi_twisted(&self, c: FieldElement, a: FieldElement) -> Complex64 {
        self.chi(self.mul(c, a))
    }

    /// exp(2 pi i k / p) for k in [0, p).
    pub fn root_of_unity(&self, k: u32) -> Complex64 {
        self.roots[(k % self.p) as usize]
    }

    /// All x with x^2 = a, ascending.
    pub fn sqrt(&self, a: FieldElement) -> Vec<FieldElement> {
        let r = self.sqrt_root[a.0 as usize];
        if r == NO_ROOT {
            return Vec::new();
        }
        let r = FieldElement(r);
        let s = self.neg(r);
        if s == r {
            vec![r]
        } else {
            let mut v = vec![r, s];
            v.sort();
            v
        }
    }

    pub fn is_square(&self, a: FieldElement) -> bool {
        self.sqrt_root[a.0 as usize] != NO_ROOT
    }

    /// Whether -1 is a square in F_q.
    pub fn minus_one_is_square(&self) -> bool {
        self.is_square(self.neg(FieldElement::ONE))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElement) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let n = (self.q - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        Ok(n / gcd(n, l))
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Field> {
        let bad = || Error::InvalidParameter(format!("bad field spec {s:?}"));
        let s = s.trim();
        let (head, tail) = match s.split_once('/') {
            Some((h, t)) => (h.trim(), Some(t.trim())),
            None => (s, None),
        };
        let (p, m) = match head.split_once('^') {
            Some((p, m)) => {
                let p: u32 = p.trim().parse().map_err(|_| bad())?;
                let m: u32 = m.trim().parse().map_err(|_| bad())?;
                (p, m)
            }
            None => {
                let q: u64 = head.parse().map_err(|_| bad())?;
                if tail.is_some() && !is_prime(q) {
                    return Err(bad());
                }
                prime_power(q)?
            }
        };
        match tail {
            None => Field::new(p, m, None),
            Some(t) => {
                let coeffs = t
                    .split(',')
                    .map(|c| c.trim().parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Field::new(p, m, Some(&coeffs))
            }
        }
    }
}
