//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a function of
//! `(x, xd, lam, mu)` about a base point, keeping monomials
//! `x^j xd^k lam^a mu^b` with `j + k <= 3` and `a + b <= 2`. Everything
//! outside that box is dropped, so the coefficient table is exactly the
//! quotient-ring image of the full Taylor series and products, quotients
//! and elementary functions are exact up to the truncation.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use super::expr::Var;

pub const STATE_ORDER: usize = 3;
pub const PARAM_ORDER: usize = 2;

const N_STATE: usize = 10;
const N_PARAM: usize = 6;
pub const LEN: usize = N_STATE * N_PARAM;

/// Highest total degree a nilpotent jet can carry; `v^6 == 0`.
const MAX_TOTAL: usize = STATE_ORDER + PARAM_ORDER;

const STATE_MONOMIALS: [(u8, u8); N_STATE] =
    [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];
const PARAM_MONOMIALS: [(u8, u8); N_PARAM] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

fn state_index(j: usize, k: usize) -> Option<usize> {
    STATE_MONOMIALS.iter().position(|&(a, b)| a as usize == j && b as usize == k)
}

fn param_index(a: usize, b: usize) -> Option<usize> {
    PARAM_MONOMIALS.iter().position(|&(c, d)| c as usize == a && d as usize == b)
}

/// Flat index of monomial `x^j xd^k lam^a mu^b`, if it is retained.
pub fn index(j: usize, k: usize, a: usize, b: usize) -> Option<usize> {
    Some(state_index(j, k)? * N_PARAM + param_index(a, b)?)
}

/// Multi-index `(j, k, a, b)` stored at flat index `i`.
pub fn multi_index(i: usize) -> (usize, usize, usize, usize) {
    let (j, k) = STATE_MONOMIALS[i / N_PARAM];
    let (a, b) = PARAM_MONOMIALS[i % N_PARAM];
    (j as usize, k as usize, a as usize, b as usize)
}

/// All `(left, right, out)` index triples whose product monomial is retained.
fn product_table() -> &'static [(u8, u8, u8)] {
    static TABLE: OnceLock<Vec<(u8, u8, u8)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::new();
        for l in 0..LEN {
            let (j1, k1, a1, b1) = multi_index(l);
            for r in 0..LEN {
                let (j2, k2, a2, b2) = multi_index(r);
                if let Some(o) = index(j1 + j2, k1 + k2, a1 + a2, b1 + b2) {
                    t.push((l as u8, r as u8, o as u8));
                }
            }
        }
        t
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
}

impl Default for Jet {
    fn default() -> Self {
        Jet { c: [0.0; LEN] }
    }
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        let mut j = Jet::default();
        j.c[0] = v;
        j
    }

    /// The independent variable `v` expanded about `at`.
    pub fn variable(v: Var, at: f64) -> Jet {
        let mut j = Jet::constant(at);
        let i = match v {
            Var::X => index(1, 0, 0, 0),
            Var::Xd => index(0, 1, 0, 0),
            Var::Lam => index(0, 0, 1, 0),
            Var::Mu => index(0, 0, 0, 1),
        };
        j.c[i.expect("first-order monomials are retained")] = 1.0;
        j
    }

    pub fn from_coeffs(c: [f64; LEN]) -> Jet {
        Jet { c }
    }

    pub fn coeffs(&self) -> &[f64; LEN] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `x^j xd^k lam^a mu^b`, i.e. the partial
    /// derivative divided by `j! k! a! b!`. Zero outside the retained box.
    pub fn coeff(&self, j: usize, k: usize, a: usize, b: usize) -> f64 {
        index(j, k, a, b).map_or(0.0, |i| self.c[i])
    }

    pub fn set_coeff(&mut self, j: usize, k: usize, a: usize, b: usize, v: f64) {
        if let Some(i) = index(j, k, a, b) {
            self.c[i] = v;
        }
    }

    /// Partial derivative `d^(j+k+a+b) / dx^j dxd^k dlam^a dmu^b` at the base point.
    pub fn derivative(&self, j: usize, k: usize, a: usize, b: usize) -> f64 {
        let fact = |n: usize| (1..=n).product::<usize>() as f64;
        self.coeff(j, k, a, b) * fact(j) * fact(k) * fact(a) * fact(b)
    }

    /// Keep only the pure-parameter part (`j = k = 0`).
    pub fn param_part(&self) -> Jet {
        let mut out = Jet::default();
        out.c[..N_PARAM].copy_from_slice(&self.c[..N_PARAM]);
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `g(self)` from the derivatives `g^(n)(self.value())`, `n = 0..=5`.
    fn compose(&self, derivs: [f64; MAX_TOTAL + 1]) -> Jet {
        let mut v = self.clone();
        v.c[0] = 0.0;
        let mut fact = [1.0; MAX_TOTAL + 1];
        for n in 1..=MAX_TOTAL {
            fact[n] = fact[n - 1] * n as f64;
        }
        let mut acc = Jet::constant(derivs[MAX_TOTAL] / fact[MAX_TOTAL]);
        for n in (0..MAX_TOTAL).rev() {
            acc = &acc * &v;
            acc.c[0] += derivs[n] / fact[n];
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        self.compose([self.value().exp(); MAX_TOTAL + 1])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c, s, c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s, c, -s])
    }

    /// `None` unless the constant term is positive.
    pub fn ln(&self) -> Option<Jet> {
        let u = self.value();
        if u <= 0.0 || !u.is_finite() {
            return None;
        }
        let mut d = [0.0; MAX_TOTAL + 1];
        d[0] = u.ln();
        let mut p = 1.0 / u;
        for (n, dn) in d.iter_mut().enumerate().skip(1) {
            *dn = p;
            p *= -(n as f64) / u;
        }
        Some(self.compose(d))
    }

    /// `None` unless the constant term is positive (the derivative blows up at 0).
    pub fn sqrt(&self) -> Option<Jet> {
        self.powf(0.5)
    }

    /// Real power with a constant exponent. Requires a positive base.
    pub fn powf(&self, e: f64) -> Option<Jet> {
        let u = self.value();
        if u <= 0.0 || !u.is_finite() {
            return None;
        }
        let mut d = [0.0; MAX_TOTAL + 1];
        let mut falling = 1.0;
        for (n, dn) in d.iter_mut().enumerate() {
            *dn = falling * u.powf(e - n as f64);
            falling *= e - n as f64;
        }
        Some(self.compose(d))
    }

    pub fn powi(&self, n: i32) -> Option<Jet> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut acc = Jet::constant(1.0);
        let mut sq = base;
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = &acc * &sq;
            }
            m >>= 1;
            if m > 0 {
                sq = &sq * &sq;
            }
        }
        Some(acc)
    }

    /// `self ^ other`. Integer constant exponents use repeated products and
    /// accept any base; everything else goes through `exp(other * ln(self))`.
    pub fn pow(&self, other: &Jet) -> Option<Jet> {
        let is_constant = other.c[1..].iter().all(|&v| v == 0.0);
        let e = other.value();
        if is_constant {
            if e.fract() == 0.0 && e.abs() <= 64.0 {
                return self.powi(e as i32);
            }
            return self.powf(e);
        }
        Some((other * &self.ln()?).exp())
    }

    /// `None` when the constant term is zero.
    pub fn recip(&self) -> Option<Jet> {
        let u = self.value();
        if u == 0.0 || !u.is_finite() {
            return None;
        }
        let mut d = [0.0; MAX_TOTAL + 1];
        let mut p = 1.0 / u;
        for (n, dn) in d.iter_mut().enumerate() {
            *dn = p;
            p *= -((n + 1) as f64) / u;
        }
        Some(self.compose(d))
    }

    pub fn checked_div(&self, other: &Jet) -> Option<Jet> {
        Some(self * &other.recip()?)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out.c.iter_mut().zip(rhs.c.iter()).for_each(|(a, b)| *a += b);
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out.c.iter_mut().zip(rhs.c.iter()).for_each(|(a, b)| *a -= b);
        out
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let mut out = Jet::default();
        for &(l, r, o) in product_table() {
            out.c[o as usize] += self.c[l as usize] * rhs.c[r as usize];
        }
        out
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.c.iter_mut().for_each(|v| *v = -*v);
        self
    }
}
