//! Complex polynomials in four formal variables, truncated at total degree 3.

use num_complex::Complex64;

pub const DEGREE: usize = 3;
const SIDE: usize = DEGREE + 1;
const LEN: usize = SIDE * SIDE * SIDE * SIDE;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly4 {
    c: Vec<Complex64>,
}

fn index(e: [usize; 4]) -> usize {
    e[0] + SIDE * (e[1] + SIDE * (e[2] + SIDE * e[3]))
}

fn exponents(i: usize) -> [usize; 4] {
    [i % SIDE, (i / SIDE) % SIDE, (i / (SIDE * SIDE)) % SIDE, i / (SIDE * SIDE * SIDE)]
}

impl Poly4 {
    pub fn zero() -> Poly4 {
        Poly4 { c: vec![Complex64::new(0.0, 0.0); LEN] }
    }

    pub fn constant(v: Complex64) -> Poly4 {
        let mut p = Poly4::zero();
        p.c[0] = v;
        p
    }

    /// `Σ coeffs[i] x_i`.
    pub fn linear(coeffs: [Complex64; 4]) -> Poly4 {
        let mut p = Poly4::zero();
        for (i, v) in coeffs.into_iter().enumerate() {
            let mut e = [0; 4];
            e[i] = 1;
            p.c[index(e)] = v;
        }
        p
    }

    /// Coefficient of `x1^e0 x2^e1 x3^e2 x4^e3`; zero beyond the truncation.
    pub fn coeff(&self, e: [usize; 4]) -> Complex64 {
        if e.iter().sum::<usize>() > DEGREE {
            return Complex64::new(0.0, 0.0);
        }
        self.c[index(e)]
    }

    pub fn add(&self, other: &Poly4) -> Poly4 {
        Poly4 { c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Poly4 {
        Poly4 { c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, other: &Poly4) -> Poly4 {
        let mut out = Poly4::zero();
        for (i, a) in self.c.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let ei = exponents(i);
            let di: usize = ei.iter().sum();
            for (j, b) in other.c.iter().enumerate() {
                let ej = exponents(j);
                if di + ej.iter().sum::<usize>() > DEGREE || b.norm_sqr() == 0.0 {
                    continue;
                }
                let e = [ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2], ei[3] + ej[3]];
                out.c[index(e)] += a * b;
            }
        }
        out
    }

    pub fn powi(&self, n: usize) -> Poly4 {
        (0..n).fold(Poly4::constant(Complex64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }
}
