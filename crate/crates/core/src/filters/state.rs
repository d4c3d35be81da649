use serde::{Deserialize, Serialize};

use super::schedule::AlphaSchedule;
use crate::diagonal::DiagonalModel;
use crate::error::{Error, Result};
use crate::spectral::{Basis2D, GridField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Kalman,
    #[serde(rename = "3dvar", alias = "threedvar")]
    ThreeDVar,
    Variant,
}

impl FilterKind {
    pub fn label(self) -> &'static str {
        match self {
            FilterKind::Kalman => "kalman",
            FilterKind::ThreeDVar => "3dvar",
            FilterKind::Variant => "variant",
        }
    }
}

/// Which filter to start and with which regularization.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterConfig {
    Kalman { alpha: f64 },
    ThreeDVar { alpha: f64 },
    Variant { schedule: AlphaSchedule },
}

impl FilterConfig {
    pub fn kind(&self) -> FilterKind {
        match self {
            FilterConfig::Kalman { .. } => FilterKind::Kalman,
            FilterConfig::ThreeDVar { .. } => FilterKind::ThreeDVar,
            FilterConfig::Variant { .. } => FilterKind::Variant,
        }
    }

    pub fn start(&self, model: &DiagonalModel, m0: Vec<f64>, gamma: f64) -> Result<FilterState> {
        match self {
            FilterConfig::Kalman { alpha } => FilterState::kalman(model, *alpha, gamma, m0),
            FilterConfig::ThreeDVar { alpha } => FilterState::threedvar(model, *alpha, gamma, m0),
            FilterConfig::Variant { schedule } => FilterState::variant(model, schedule.clone(), gamma, m0),
        }
    }
}

/// Mean and covariance spectrum of one filter after `step` updates.
///
/// The state owns a (cheaply cloned) copy of the model it runs on, so `step` is a pure
/// function of the state and one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    kind: FilterKind,
    model: DiagonalModel,
    mean: Vec<f64>,
    cov: Vec<f64>,
    step: usize,
    gamma: f64,
    alpha: f64,
    schedule: Option<AlphaSchedule>,
    sigma: f64,
    // 3DVAR gain, fixed for the whole run
    gain: Vec<f64>,
}

impl FilterState {
    /// Kalman filter with `C₀ = (γ²/α) Σ₀`.
    pub fn kalman(model: &DiagonalModel, alpha: f64, gamma: f64, m0: Vec<f64>) -> Result<Self> {
        check_common(model, alpha, gamma, &m0)?;
        let scale = gamma * gamma / alpha;
        let cov = model.lambda().iter().map(|l| scale * l).collect();
        Self::build(FilterKind::Kalman, model, m0, cov, gamma, alpha, None, Vec::new())
    }

    /// 3DVAR with covariance frozen at `(γ²/α) Σ₀`.
    pub fn threedvar(model: &DiagonalModel, alpha: f64, gamma: f64, m0: Vec<f64>) -> Result<Self> {
        check_common(model, alpha, gamma, &m0)?;
        let gain = super::threedvar_gain(model, alpha)?;
        // the reported covariance 𝒞 = (γ²/α)(I − 𝒦A)Σ₀
        let cov = model
            .kappa()
            .iter()
            .zip(model.lambda())
            .map(|(&k, &l)| gamma * gamma * l / (l * k * k + alpha))
            .collect();
        Self::build(FilterKind::ThreeDVar, model, m0, cov, gamma, alpha, None, gain)
    }

    /// Variant 3DVAR driven by `schedule`. Before the first step the covariance is `(γ²/α₁) Σ₀`.
    pub fn variant(model: &DiagonalModel, schedule: AlphaSchedule, gamma: f64, m0: Vec<f64>) -> Result<Self> {
        let alpha1 = schedule.alpha(1)?;
        check_common(model, alpha1, gamma, &m0)?;
        let scale = gamma * gamma / alpha1;
        let cov = model.lambda().iter().map(|l| scale * l).collect();
        Self::build(FilterKind::Variant, model, m0, cov, gamma, alpha1, Some(schedule), Vec::new())
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        kind: FilterKind,
        model: &DiagonalModel,
        mean: Vec<f64>,
        cov: Vec<f64>,
        gamma: f64,
        alpha: f64,
        schedule: Option<AlphaSchedule>,
        gain: Vec<f64>,
    ) -> Result<Self> {
        let s = FilterState { kind, model: model.clone(), mean, cov, step: 0, gamma, alpha, schedule, sigma: 0.0, gain };
        s.check_finite()?;
        Ok(s)
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn model(&self) -> &DiagonalModel {
        &self.model
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov_spectrum(&self) -> &[f64] {
        &self.cov
    }

    /// Number of updates applied so far.
    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// α in use at the latest step (α₁ before any step for the variant).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `σₙ = Σ_{j≤n} 1/αⱼ` (variant only; zero otherwise).
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn schedule(&self) -> Option<&AlphaSchedule> {
        self.schedule.as_ref()
    }

    pub fn cov_trace(&self) -> f64 {
        self.cov.iter().sum()
    }

    pub fn mean_field(&self, basis: &Basis2D) -> Result<GridField> {
        GridField::from_spectral(basis, self.mean.clone())
    }

    /// `‖mean − target‖` in coefficient space.
    pub fn error(&self, target: &[f64]) -> Result<f64> {
        if target.len() != self.mean.len() {
            return Err(Error::BasisMismatch(format!("target has {} modes, state {}", target.len(), self.mean.len())));
        }
        Ok(self.mean.iter().zip(target).map(|(m, t)| (m - t) * (m - t)).sum::<f64>().sqrt())
    }

    /// Apply one update with observation coefficients `y`.
    pub fn advance(&mut self, y: &[f64]) -> Result<()> {
        if y.len() != self.mean.len() {
            return Err(Error::BasisMismatch(format!("observation has {} modes, state {}", y.len(), self.mean.len())));
        }
        let n = self.step + 1;
        let kappa = self.model.kappa();
        let lambda = self.model.lambda();
        match self.kind {
            FilterKind::Kalman => {
                let g2 = self.gamma * self.gamma;
                for i in 0..y.len() {
                    let (c, k) = (self.cov[i], kappa[i]);
                    let denom = c * k * k + g2;
                    self.mean[i] += c * k / denom * (y[i] - k * self.mean[i]);
                    // (1 − kκ)c written without the cancellation
                    self.cov[i] = c * g2 / denom;
                }
            }
            FilterKind::ThreeDVar => {
                for i in 0..y.len() {
                    self.mean[i] += self.gain[i] * (y[i] - kappa[i] * self.mean[i]);
                }
            }
            FilterKind::Variant => {
                let schedule = self.schedule.as_ref().expect("variant state carries a schedule");
                let alpha_n = schedule.alpha(n)?;
                schedule.check_step(n, alpha_n, self.sigma)?;
                let g2 = self.gamma * self.gamma;
                for i in 0..y.len() {
                    let (k, l) = (kappa[i], lambda[i]);
                    let denom = l * k * k + alpha_n;
                    self.mean[i] += l * k / denom * (y[i] - k * self.mean[i]);
                    self.cov[i] = g2 * l / denom;
                }
                self.alpha = alpha_n;
                self.sigma += 1.0 / alpha_n;
            }
        }
        self.step = n;
        self.check_finite()
    }

    /// Like [`advance`](Self::advance) but takes any field on the model's basis.
    pub fn advance_field(&mut self, y: &GridField) -> Result<()> {
        self.advance(&y.coefficients())
    }

    /// Pure form of [`advance`](Self::advance).
    pub fn step(&self, y: &[f64]) -> Result<Self> {
        let mut next = self.clone();
        next.advance(y)?;
        Ok(next)
    }

    fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.mean.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical { step: self.step, detail: format!("non-finite mean at mode {i}") });
        }
        if let Some(i) = self.cov.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Numerical {
                step: self.step,
                detail: format!("covariance {} at mode {i} is not positive", self.cov[i]),
            });
        }
        Ok(())
    }
}

fn check_common(model: &DiagonalModel, alpha: f64, gamma: f64, m0: &[f64]) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", format!("filters need gamma > 0 (use a tiny value for noiseless runs), got {gamma}")));
    }
    if m0.len() != model.len() {
        return Err(Error::BasisMismatch(format!("initial mean has {} modes, model {}", m0.len(), model.len())));
    }
    Ok(())
}
