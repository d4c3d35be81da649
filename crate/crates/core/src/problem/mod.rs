//! Experiment setup: truth sampling, synthetic observations and noise calibration.
//!
//! Data are never generated on the inversion grid. The truth is sampled on a fine grid
//! (`fine_n = 2·coarse_n`), `A u†` is formed there, white noise is added per fine node and
//! the result is restricted to the coarse grid by cubic-spline interpolation.

mod data;
mod spec;
mod spline;
mod truth;

pub use data::{average_observations, calibrate_gamma, gamma_for_level, generate_data, DataStream};
pub use spec::{AlphaRule, DataModel, NoiseSpec, ProblemSpec, SpecWarning, DEFAULT_LENGTH_SCALE};
pub use spline::{restrict_to_coarse, restriction_noise_gain};
pub use truth::{sample_truth, TruthSample};

use crate::diagonal::DiagonalModel;
use crate::error::Result;
use crate::spectral::{Basis2D, SpectralOperator};

/// Correlation shift in the truth covariance `(−Δ + shift·I)^{−(2s+1)}`.
pub const TRUTH_SHIFT: f64 = 0.1;

/// A validated [`ProblemSpec`] together with the operators it implies.
#[derive(Debug, Clone)]
pub struct Problem {
    spec: ProblemSpec,
    coarse: Basis2D,
    fine: Basis2D,
    forward_coarse: SpectralOperator,
    prior_coarse: SpectralOperator,
    forward_fine: SpectralOperator,
    truth_cov_fine: SpectralOperator,
    model: DiagonalModel,
    noise_gain: f64,
}

/// One truth together with its observation stream.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub index: u64,
    pub truth: TruthSample,
    pub stream: DataStream,
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let coarse = Basis2D::with_length(spec.coarse_n, spec.length_scale)?;
        let fine = Basis2D::with_length(spec.fine_n, spec.length_scale)?;
        let forward_coarse = SpectralOperator::neumann_laplacian_inverse(&coarse);
        // Σ₀ = A^{2/a} so that κ = λ^{a/2} exactly; a = 1 gives Σ₀ = A².
        let prior_coarse = forward_coarse.power(2.0 / spec.a)?;
        let forward_fine = SpectralOperator::neumann_laplacian_inverse(&fine);
        let truth_cov_fine = SpectralOperator::shifted_laplacian_power(&fine, TRUTH_SHIFT, -(2.0 * spec.s + 1.0))?;
        let model = DiagonalModel::from_operators(&forward_coarse, &prior_coarse)?;
        let noise_gain = restriction_noise_gain(spec.coarse_n)?;
        Ok(Problem { spec, coarse, fine, forward_coarse, prior_coarse, forward_fine, truth_cov_fine, model, noise_gain })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn coarse_basis(&self) -> &Basis2D {
        &self.coarse
    }

    pub fn fine_basis(&self) -> &Basis2D {
        &self.fine
    }

    /// `A` on the inversion grid.
    pub fn forward(&self) -> &SpectralOperator {
        &self.forward_coarse
    }

    /// `Σ₀` on the inversion grid.
    pub fn prior(&self) -> &SpectralOperator {
        &self.prior_coarse
    }

    pub fn forward_fine(&self) -> &SpectralOperator {
        &self.forward_fine
    }

    pub fn truth_covariance(&self) -> &SpectralOperator {
        &self.truth_cov_fine
    }

    /// Per-mode `(κ, λ)` of the inversion-grid pair `(A, Σ₀)`.
    pub fn model(&self) -> &DiagonalModel {
        &self.model
    }

    /// RMS gain of the fine-to-coarse restriction on white noise.
    pub fn noise_gain(&self) -> f64 {
        self.noise_gain
    }

    /// Truth and data for replicate `index`, with γ resolved from the noise spec.
    pub fn replicate(&self, index: u64) -> Result<Replicate> {
        let truth = sample_truth(self, index)?;
        let gamma = match self.spec.noise {
            NoiseSpec::Gamma(g) => g,
            NoiseSpec::Relative(rho) => calibrate_gamma(&truth, &self.forward_fine, rho)?,
        };
        let stream = generate_data(self, &truth, gamma)?;
        Ok(Replicate { index, truth, stream })
    }
}
