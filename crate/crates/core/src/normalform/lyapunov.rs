//! First Lyapunov coefficient `K₁`, by closed form and by the general
//! B-coefficient formula.

use num_complex::Complex64;

use super::poly::Poly4;
use super::NormalFormError;
use crate::modelkit::TaylorTable;

/// Which `ψ₁(0)` the general formula is normalized with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K1Normalization {
    /// `1/((1 - ατ) + iω)`: the convention the closed form is written in.
    ClosedForm,
    /// `1/((1 - ατ) + iωτ)`: the adjoint normalization used by the σ coefficients.
    DelayScaled,
}

impl K1Normalization {
    pub fn psi(self, alpha: f64, omega: f64, tau: f64) -> Complex64 {
        let im = match self {
            K1Normalization::ClosedForm => omega,
            K1Normalization::DelayScaled => omega * tau,
        };
        Complex64::new(1.0 - alpha * tau, im).inv()
    }
}

fn check_nondegenerate(alpha: f64, beta: f64) -> Result<(), NormalFormError> {
    if alpha + beta == 0.0 {
        return Err(NormalFormError::NonDegeneracyViolated("alpha + beta"));
    }
    if 4.0 * alpha - 5.0 * beta == 0.0 {
        return Err(NormalFormError::NonDegeneracyViolated("4 alpha - 5 beta"));
    }
    if beta == 0.0 {
        return Err(NormalFormError::NonDegeneracyViolated("beta"));
    }
    Ok(())
}

/// Closed-form `K₁` for `x' = αx + βx(t-τ) + F`, valid on the Hopf curve.
pub fn lyapunov_k1_closed(alpha: f64, beta: f64, omega: f64, tau: f64, f: &TaylorTable) -> Result<f64, NormalFormError> {
    check_nondegenerate(alpha, beta)?;
    let (a, b, t) = (alpha, beta, tau);
    let (f30, f21, f12, f03) = (f.get(3, 0), f.get(2, 1), f.get(1, 2), f.get(0, 3));
    let (f20, f11, f02) = (f.get(2, 0), f.get(1, 1), f.get(0, 2));
    let d = (a + b) * (4.0 * a - 5.0 * b);
    let (a2, a3, a4, a5) = (a * a, a * a * a, a.powi(4), a.powi(5));
    let (b2, b3, b4, b5) = (b * b, b * b * b, b.powi(4), b.powi(5));

    let bracket = 3.0 * (1.0 - a * t) * f30
        + ((3.0 * a2 * t - a2 + b2 - 3.0 * a) / b) * f21
        - ((2.0 * a3 * t + a * b2 * t - 2.0 * a3 + 2.0 * a * b2 - 2.0 * a2 - b2) / b2) * f12
        + 3.0 * ((a2 * t - a2 + b2 - a) / b) * f03
        + 2.0 * ((6.0 * a2 * t - 9.0 * a * b * t - 2.0 * a2 + 2.0 * b2 - 6.0 * a + 9.0 * b) / d) * f20 * f20
        - ((18.0 * a3 * t - 33.0 * a2 * b * t + 9.0 * a * b2 * t - 10.0 * a3 + 7.0 * a2 * b + 10.0 * a * b2
            - 7.0 * b3
            - 18.0 * a2
            + 33.0 * a * b
            - 9.0 * b2)
            / (d * b))
            * f20
            * f11
        - 2.0
            * (((a - b) * (6.0 * a2 * t - 9.0 * a * b * t - 6.0 * a2 + a * b + 7.0 * b2 - 6.0 * a + 9.0 * b))
                / (d * b))
            * f20
            * f02
        + (((a - b)
            * (4.0 * a3 * t - 10.0 * a2 * b * t + a * b2 * t - 4.0 * a3 + 2.0 * a2 * b + 3.0 * a * b2
                - 3.0 * b3
                - 4.0 * a2
                + 10.0 * a * b
                - b2))
            / (b2 * d))
            * f11
            * f11
        + ((8.0 * t * a5 + 8.0 * a4 * b * t - 32.0 * a3 * b2 * t + 19.0 * a2 * b3 * t - 9.0 * a * b4 * t
            - 8.0 * a5
            - 8.0 * a4 * b
            + 36.0 * a3 * b2)
            / (b3 * d)
            + (a2 * b3 - 28.0 * a * b4 + 7.0 * b5 - 8.0 * a4 - 8.0 * a3 * b + 32.0 * a2 * b2 - 19.0 * a * b3
                + 9.0 * b4)
                / (b3 * d))
            * f11
            * f02
        - 2.0
            * ((4.0 * a4 * t + 4.0 * a3 * b * t - 13.0 * a2 * b2 * t + 2.0 * a * b3 * t - 4.0 * a4 - 4.0 * a3 * b
                + 15.0 * a2 * b2
                + 4.0 * a * b3)
                / (b2 * d)
                + (-11.0 * b4 - 4.0 * a3 - 4.0 * a2 * b + 13.0 * a * b2 - 2.0 * b3) / (b2 * d))
            * f02
            * f02;
    let k1 = bracket / ((1.0 - a * t).powi(2) + omega * omega);
    if !k1.is_finite() {
        return Err(NormalFormError::SingularDenominator("(1 - alpha tau)^2 + omega^2"));
    }
    Ok(k1)
}

/// The B coefficients `B(i,j,k,l)`: coefficient of `x1^i x2^j x3^k x4^l` after
/// substituting `x = x1 + x2 + x3 + x4` and `xd = x1 E + x2 conj(E) + x3 + x4 E²`,
/// `E = e^{-iωτ}`, into the nonlinear Taylor polynomial.
pub fn b_coefficients(omega: f64, tau: f64, f: &TaylorTable) -> Poly4 {
    let one = Complex64::new(1.0, 0.0);
    let e = Complex64::from_polar(1.0, -omega * tau);
    let x = Poly4::linear([one; 4]);
    let xd = Poly4::linear([e, e.conj(), one, e * e]);
    let xs: Vec<Poly4> = (0..=3).map(|n| x.powi(n)).collect();
    let xds: Vec<Poly4> = (0..=3).map(|n| xd.powi(n)).collect();
    TaylorTable::MONOMIALS.iter().fold(Poly4::zero(), |acc, &(j, k)| {
        acc.add(&xs[j].mul(&xds[k]).scale(Complex64::new(f.get(j, k), 0.0)))
    })
}

/// `K₁ = Re[ψ (B2100 - B1100 B1010 / L₀(1) + B2000 B0101 / (2iω - L₀(e^{2iωθ})))]`.
pub fn lyapunov_k1_general(
    alpha: f64,
    beta: f64,
    omega: f64,
    tau: f64,
    f: &TaylorTable,
    normalization: K1Normalization,
) -> Result<f64, NormalFormError> {
    let l0_one = alpha + beta;
    if l0_one == 0.0 {
        return Err(NormalFormError::NonDegeneracyViolated("alpha + beta"));
    }
    let l0_two = Complex64::new(0.0, 2.0 * omega) - (alpha + beta * Complex64::from_polar(1.0, -2.0 * omega * tau));
    if l0_two.norm() == 0.0 {
        return Err(NormalFormError::NonDegeneracyViolated("2 i omega - alpha - beta e^(-2 i omega tau)"));
    }
    let b = b_coefficients(omega, tau, f);
    let psi = normalization.psi(alpha, omega, tau);
    let inner = b.coeff([2, 1, 0, 0]) - b.coeff([1, 1, 0, 0]) * b.coeff([1, 0, 1, 0]) / l0_one
        + b.coeff([2, 0, 0, 0]) * b.coeff([0, 1, 0, 1]) / l0_two;
    Ok((psi * inner).re)
}
