//! Problems that are diagonal in a known basis, described by the singular values `κ` of
//! `A` and the eigenvalues `λ` of `Σ₀` per mode.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::SpectralOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalModel {
    kappa: Arc<[f64]>,
    lambda: Arc<[f64]>,
}

impl DiagonalModel {
    pub fn new(kappa: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if kappa.len() != lambda.len() {
            return Err(Error::invalid("model", format!("{} singular values but {} prior eigenvalues", kappa.len(), lambda.len())));
        }
        if kappa.is_empty() {
            return Err(Error::invalid("model", "no modes"));
        }
        if kappa.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(Error::invalid("kappa", "singular values must be finite and non-negative"));
        }
        if lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::invalid("lambda", "prior eigenvalues must be finite and positive"));
        }
        Ok(DiagonalModel { kappa: kappa.into(), lambda: lambda.into() })
    }

    /// `(A, Σ₀)` sharing a cosine basis.
    pub fn from_operators(forward: &SpectralOperator, prior: &SpectralOperator) -> Result<Self> {
        forward.basis().ensure_same(prior.basis(), "from_operators")?;
        Self::new(forward.eigenvalues().iter().map(|v| v.abs()).collect(), prior.eigenvalues().to_vec())
    }

    /// Sequence model with `λᵢ = i^{−1−2ε}` and `κᵢ = i^{−p}`, `i = 1..=modes`.
    pub fn power_law(modes: usize, epsilon: f64, p: f64) -> Result<Self> {
        if !(epsilon > 0.0 && p > 0.0) {
            return Err(Error::invalid("model", "need epsilon > 0 and p > 0"));
        }
        let idx = (1..=modes).map(|i| i as f64);
        Self::new(idx.clone().map(|i| i.powf(-p)).collect(), idx.map(|i| i.powf(-1.0 - 2.0 * epsilon)).collect())
    }

    pub fn scalar(kappa: f64, lambda: f64) -> Result<Self> {
        Self::new(vec![kappa], vec![lambda])
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn prior_trace(&self) -> f64 {
        self.lambda.iter().sum()
    }

    /// Spectrum of `B₀*B₀ = Σ₀^{1/2} A*A Σ₀^{1/2}`, i.e. `λκ²` per mode.
    pub fn b0_spectrum(&self) -> Vec<f64> {
        self.kappa.iter().zip(self.lambda.iter()).map(|(k, l)| l * k * k).collect()
    }
}
