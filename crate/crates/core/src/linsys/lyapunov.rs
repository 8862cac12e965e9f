//! Envelopes for `z_k = ||A^k||_2^2` from a discrete Lyapunov certificate.
//!
//! If `P > 0` and `P - A^T P A > 0` then `||A||_P^2 < 1` and
//! `z_k <= (lambda_max(P) / lambda_min(P)) ||A||_P^(2k)`, which is the constant
//! affine envelope `t -> slope * t` with ratio `||A||_P^2`.

use serde::{Deserialize, Serialize};

use super::matrix::{cholesky, lower_inverse, sym_eig_bounds, Matrix};
use crate::algebra::Affine;
use crate::envelope::ConstantEnvelope;
use crate::error::{PeakError, Result};
use crate::source::TermSource;

/// Whether `P > 0` and `P - A^T P A > 0`, both decided by Cholesky.
pub fn is_lyapunov(a: &Matrix, p: &Matrix) -> bool {
    if a.same_dim(p).is_err() || !p.is_symmetric(1e-10) {
        return false;
    }
    let decrease = p.sub(&(&(&a.transpose() * p) * a)).symmetrized();
    cholesky(p).is_ok() && cholesky(&decrease).is_ok()
}

/// `||A||_P^2`, the largest generalized eigenvalue of `A^T P A` relative to `P`.
pub fn op_norm_sq(a: &Matrix, p: &Matrix) -> Result<f64> {
    a.same_dim(p)?;
    let l_inv = lower_inverse(&cholesky(p)?);
    let gram = &(&a.transpose() * p) * a;
    let whitened = &(&l_inv * &gram) * &l_inv.transpose();
    Ok(sym_eig_bounds(&whitened.symmetrized())?.1)
}

/// `||A^k||_2^2`, with `A^k` formed by binary exponentiation.
pub fn spectral_norm_sq_power(a: &Matrix, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let power = a.pow(k);
    let gram = (&power.transpose() * &power).symmetrized();
    sym_eig_bounds(&gram).expect("Gram matrices are symmetric").1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCertificate {
    pub p: Vec<f64>,
    pub dim: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `||A||_P^2`.
    pub beta: f64,
    /// `lambda_max / lambda_min`.
    pub slope: f64,
}

impl LyapunovCertificate {
    pub fn new(a: &Matrix, p: &Matrix) -> Result<Self> {
        a.same_dim(p)?;
        if !is_lyapunov(a, p) {
            return Err(PeakError::NotLyapunov);
        }
        let (lambda_min, lambda_max) = sym_eig_bounds(&p.symmetrized())?;
        let beta = op_norm_sq(a, p)?;
        if !(beta > 0.0 && beta < 1.0) {
            return Err(PeakError::NotLyapunov);
        }
        Ok(Self {
            p: p.as_slice().to_vec(),
            dim: p.dim(),
            lambda_min,
            lambda_max,
            beta,
            slope: lambda_max / lambda_min,
        })
    }

    pub fn envelope(&self) -> Result<ConstantEnvelope<Affine>> {
        ConstantEnvelope::new(Affine::new(self.slope, 0.0)?, self.beta)
    }
}

pub fn envelope_from_certificate(a: &Matrix, p: &Matrix) -> Result<ConstantEnvelope<Affine>> {
    LyapunovCertificate::new(a, p)?.envelope()
}

/// `lambda I + U` where `U` has a single 1 in the top-right corner.
pub fn a_lambda(lambda: f64, d: usize) -> Result<Matrix> {
    if !(lambda.abs() < 1.0) {
        return Err(PeakError::InvalidParameter(format!(
            "lambda must satisfy |lambda| < 1, got {lambda}"
        )));
    }
    if d < 2 {
        return Err(PeakError::InvalidParameter(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    let mut a = Matrix::identity(d).scale(lambda);
    a[(0, d - 1)] = 1.0;
    Ok(a)
}

/// `(1 - lambda^2)^-2`; the last diagonal entry of a valid `P_q` must exceed it.
pub fn q_threshold(lambda: f64) -> f64 {
    (1.0 - lambda * lambda).powi(-2)
}

pub fn default_q(lambda: f64) -> f64 {
    2.0 * q_threshold(lambda)
}

/// `Diag(1, ..., 1, q)`, with `q` defaulting to twice the threshold.
pub fn p_q(lambda: f64, d: usize, q: Option<f64>) -> Result<Matrix> {
    if d < 2 {
        return Err(PeakError::InvalidParameter(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    let threshold = q_threshold(lambda);
    let q = q.unwrap_or(2.0 * threshold);
    if !(q > threshold) {
        return Err(PeakError::QTooSmall { q, threshold });
    }
    let mut diag = vec![1.0; d];
    diag[d - 1] = q;
    Ok(Matrix::diag(&diag))
}

/// `||A_lambda^k||_2^2 = lambda^(2k-2) (lambda^2 + k^2/2 + k sqrt(4 lambda^2 + k^2)/2)`.
pub fn a_lambda_norm_sq(lambda: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    let l2 = lambda * lambda;
    l2.powf(kf - 1.0) * (l2 + 0.5 * kf * kf + 0.5 * kf * (4.0 * l2 + kf * kf).sqrt())
}

/// `||A_lambda||_{P_q}^2 = (1 + 2 q lambda^2 + sqrt(1 + 4 lambda^2 q)) / (2q)`.
pub fn a_lambda_beta(lambda: f64, q: f64) -> f64 {
    let l2 = lambda * lambda;
    (1.0 + 2.0 * q * l2 + (1.0 + 4.0 * l2 * q).sqrt()) / (2.0 * q)
}

/// `k -> ||A^k||_2^2` computed from the matrix.
#[derive(Debug, Clone)]
pub struct PowerNormSource {
    pub a: Matrix,
}

impl TermSource for PowerNormSource {
    fn term(&self, k: u64) -> f64 {
        spectral_norm_sq_power(&self.a, k)
    }

    fn describe(&self) -> String {
        format!("squared spectral norm of powers of a {0}x{0} matrix", self.a.dim())
    }
}

/// `k -> ||A_lambda^k||_2^2` from the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ALambdaNormSource {
    pub lambda: f64,
}

impl TermSource for ALambdaNormSource {
    fn term(&self, k: u64) -> f64 {
        a_lambda_norm_sq(self.lambda, k)
    }

    fn describe(&self) -> String {
        format!("closed-form squared norm of A_lambda powers, lambda={}", self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::Envelope;
    use crate::peak::{eval_f, truncation_from};

    #[test]
    fn lyapunov_examples() {
        let half = Matrix::identity(2).scale(0.5);
        assert!(is_lyapunov(&half, &Matrix::identity(2)));
        assert!(!is_lyapunov(&Matrix::identity(2), &Matrix::identity(2)));
        let a = a_lambda(0.5, 2).unwrap();
        assert!(is_lyapunov(&a, &p_q(0.5, 2, None).unwrap()));
    }

    #[test]
    fn op_norm_examples() {
        let half = Matrix::identity(2).scale(0.5);
        assert!((op_norm_sq(&half, &Matrix::identity(2)).unwrap() - 0.25).abs() < 1e-15);
        let rot = Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        assert!((op_norm_sq(&rot, &Matrix::identity(2)).unwrap() - 1.0).abs() < 1e-15);

        let q = 32.0 / 9.0;
        let a = a_lambda(0.5, 2).unwrap();
        let p = p_q(0.5, 2, Some(q)).unwrap();
        let numeric = op_norm_sq(&a, &p).unwrap();
        assert!((numeric - a_lambda_beta(0.5, q)).abs() < 1e-12);
        assert!((numeric - 0.690_78).abs() < 1e-5);
    }

    #[test]
    fn power_norm_examples() {
        let a = a_lambda(0.5, 2).unwrap();
        assert_eq!(spectral_norm_sq_power(&a, 0), 1.0);
        let z1 = spectral_norm_sq_power(&a, 1);
        assert!((z1 - (0.75 + 0.5 * 2f64.sqrt())).abs() < 1e-14);
        let a9 = a_lambda(0.9, 2).unwrap();
        assert!((spectral_norm_sq_power(&a9, 9) - 15.3082).abs() < 1e-3);
    }

    #[test]
    fn a_lambda_structure() {
        let a0 = a_lambda(0.0, 2).unwrap();
        assert_eq!(a0, Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap());
        let lambda = 0.3;
        let a = a_lambda(lambda, 3).unwrap();
        let sq = &a * &a;
        let mut expected = Matrix::identity(3).scale(lambda * lambda);
        expected[(0, 2)] = 2.0 * lambda;
        for (x, y) in sq.as_slice().iter().zip(expected.as_slice()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(a_lambda(1.0, 2).is_err());
        assert!(a_lambda(0.5, 1).is_err());
    }

    #[test]
    fn p_q_examples() {
        assert_eq!(p_q(0.0, 3, None).unwrap(), Matrix::diag(&[1.0, 1.0, 2.0]));
        let p = p_q(0.5, 2, None).unwrap();
        assert!((p[(1, 1)] - 2.0 / 0.5625).abs() < 1e-12);
        let t = q_threshold(0.5);
        assert!(matches!(
            p_q(0.5, 2, Some(t)),
            Err(PeakError::QTooSmall { .. })
        ));
    }

    #[test]
    fn certificate_envelopes() {
        let half = Matrix::identity(2).scale(0.5);
        let env = envelope_from_certificate(&half, &Matrix::identity(2)).unwrap();
        assert!((env.func.slope - 1.0).abs() < 1e-15);
        assert!((env.beta - 0.25).abs() < 1e-15);
        let src = PowerNormSource { a: half };
        for k in 0..10 {
            let f = eval_f(k, &src, &env).unwrap().finite().unwrap();
            assert!((f - k as f64).abs() < 1e-9);
        }

        let a = a_lambda(0.5, 2).unwrap();
        let env = envelope_from_certificate(&a, &p_q(0.5, 2, None).unwrap()).unwrap();
        let src = PowerNormSource { a: a.clone() };
        let f = eval_f(1, &src, &env).unwrap().finite().unwrap();
        assert!((f - 2.41).abs() < 0.01, "f={f}");
        assert_eq!(truncation_from(1, &src, &env).unwrap(), Some(2));
        assert_eq!(env.floor(0), 0.0);

        let low = Matrix::diag(&[1.0, 1.2]);
        assert_eq!(envelope_from_certificate(&a, &low).unwrap_err(), PeakError::NotLyapunov);
    }

    #[test]
    fn closed_form_matches_matrix() {
        for &lambda in &[0.1, 0.5, 0.9] {
            let a = a_lambda(lambda, 2).unwrap();
            for k in 0..=50 {
                let exact = a_lambda_norm_sq(lambda, k);
                let numeric = spectral_norm_sq_power(&a, k);
                assert!((numeric - exact).abs() <= 1e-9 * exact, "lambda={lambda} k={k}");
            }
        }
    }
}
