use std::sync::Arc;

use super::basis::{Basis2D, Mode};
use super::field::GridField;
use crate::error::{Error, Result};

/// A self-adjoint operator diagonal in the cosine basis, stored by eigenvalue per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    basis: Basis2D,
    eigenvalues: Arc<[f64]>,
}

impl SpectralOperator {
    pub fn from_eigenvalues(basis: &Basis2D, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != basis.mode_count() {
            return Err(Error::invalid(
                "eigenvalues",
                format!("expected {} values, got {}", basis.mode_count(), eigenvalues.len()),
            ));
        }
        if let Some(i) = eigenvalues.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("eigenvalues", format!("non-finite value at mode {:?}", basis.mode_at(i))));
        }
        Ok(SpectralOperator { basis: basis.clone(), eigenvalues: eigenvalues.into() })
    }

    pub fn from_fn(basis: &Basis2D, f: impl Fn(Mode) -> f64) -> Result<Self> {
        Self::from_eigenvalues(basis, basis.modes().map(f).collect())
    }

    pub fn identity(basis: &Basis2D) -> Self {
        SpectralOperator { basis: basis.clone(), eigenvalues: vec![1.0; basis.mode_count()].into() }
    }

    /// `(−Δ)⁻¹` with homogeneous Neumann conditions on mean-zero functions.
    pub fn neumann_laplacian_inverse(basis: &Basis2D) -> Self {
        let ev: Vec<f64> = basis.modes().map(|m| 1.0 / basis.laplacian_eigenvalue(m)).collect();
        SpectralOperator { basis: basis.clone(), eigenvalues: ev.into() }
    }

    /// `(−Δ + shift·I)^exponent`; with `shift = 1/10` and `exponent = −(2s+1)` this is the
    /// covariance the truth is drawn from.
    pub fn shifted_laplacian_power(basis: &Basis2D, shift: f64, exponent: f64) -> Result<Self> {
        Self::from_fn(basis, |m| basis.laplacian_eigenvalue(m) + shift)?.power(exponent)
    }

    pub fn basis(&self) -> &Basis2D {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, mode: Mode) -> Option<f64> {
        self.basis.index_of(mode).map(|i| self.eigenvalues[i])
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn is_positive(&self) -> bool {
        self.eigenvalues.iter().all(|&v| v > 0.0)
    }

    /// Raise every eigenvalue to `exponent`.
    pub fn power(&self, exponent: f64) -> Result<Self> {
        if exponent == 0.0 {
            return Ok(Self::identity(&self.basis));
        }
        let integral = exponent.fract() == 0.0;
        let mut out = Vec::with_capacity(self.eigenvalues.len());
        for (i, &v) in self.eigenvalues.iter().enumerate() {
            if v <= 0.0 && (exponent < 0.0 || !integral) {
                return Err(Error::NonPositiveEigenvalue { mode: i, value: v, exponent });
            }
            out.push(if exponent == 1.0 { v } else { v.powf(exponent) });
        }
        Ok(SpectralOperator { basis: self.basis.clone(), eigenvalues: out.into() })
    }

    pub fn inverse(&self) -> Result<Self> {
        self.power(-1.0)
    }

    pub fn compose(&self, other: &SpectralOperator) -> Result<Self> {
        self.basis.ensure_same(&other.basis, "compose")?;
        let ev: Vec<f64> = self.eigenvalues.iter().zip(other.eigenvalues.iter()).map(|(a, b)| a * b).collect();
        Ok(SpectralOperator { basis: self.basis.clone(), eigenvalues: ev.into() })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let ev: Vec<f64> = self.eigenvalues.iter().map(|v| v * factor).collect();
        SpectralOperator { basis: self.basis.clone(), eigenvalues: ev.into() }
    }

    /// Coefficient-wise multiplication; the result keeps the representation of `x`.
    pub fn apply(&self, x: &GridField) -> Result<GridField> {
        self.basis.ensure_same(x.basis(), "apply")?;
        Ok(x.map_coefficients(|i, c| self.eigenvalues[i] * c))
    }
}

/// Extreme per-mode ratios `κ / λ^{a/2}` between the singular values of `A` and the
/// eigenvalues of `Σ₀`. Both equal one when `‖Ax‖ = ‖Σ₀^{a/2} x‖` exactly.
pub fn link_condition_check(a_op: &SpectralOperator, sigma0: &SpectralOperator, a: f64) -> Result<(f64, f64)> {
    a_op.basis.ensure_same(&sigma0.basis, "link_condition_check")?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&kappa, &lambda) in a_op.eigenvalues.iter().zip(sigma0.eigenvalues.iter()) {
        let r = kappa.abs() / lambda.powf(0.5 * a);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}
