use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataModel {
    /// Fresh i.i.d. noise at every step: `yₙ = A u† + ηₙ`.
    Dm1,
    /// One noisy observation reused at every step.
    Dm2,
}

impl DataModel {
    pub fn label(self) -> &'static str {
        match self {
            DataModel::Dm1 => "dm1",
            DataModel::Dm2 => "dm2",
        }
    }
}

/// Observation noise: either an explicit per-component std γ or a level ρ relative to `‖A u†‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    Gamma(f64),
    Relative(f64),
}

/// How the regularization parameter α is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AlphaRule {
    /// `α = N^{s/(s+a+1)}` for DM1 and `α = 1` for DM2.
    Balanced,
    Fixed { alpha: f64 },
    /// `αₙ = α qⁿ⁻¹` for the variant filter.
    VariantGeometric { alpha: f64, q: f64 },
}

/// Complete description of one PDE experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// Cells per side of the inversion grid.
    pub coarse_n: usize,
    /// Cells per side of the data-generation grid; must be `2·coarse_n`.
    pub fine_n: usize,
    /// Side length of the square domain; enters only the Laplacian eigenvalues.
    pub length_scale: f64,
    /// Regularity of the truth, which is drawn from `N(0, (−Δ + I/10)^{−(2s+1)})`.
    pub s: f64,
    /// Link exponent: `Σ₀ = A^{2/a}`.
    pub a: f64,
    pub data_model: DataModel,
    pub noise: NoiseSpec,
    /// Iteration budget `N`; `None` lets DM2 derive it from γ.
    pub iterations: Option<usize>,
    pub alpha_rule: AlphaRule,
    pub seed: u64,
}

/// Domain length used by the experiments: with it the spectrum of `B₀*B₀` on a 60² grid
/// spans roughly `[1e-9, 1e6]`, so that iteration counts between 1 and a few thousand
/// resolve different parts of the spectrum.
pub const DEFAULT_LENGTH_SCALE: f64 = 20.0;

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec {
            coarse_n: 60,
            fine_n: 120,
            length_scale: DEFAULT_LENGTH_SCALE,
            s: 1.0,
            a: 1.0,
            data_model: DataModel::Dm2,
            noise: NoiseSpec::Relative(0.05),
            iterations: None,
            alpha_rule: AlphaRule::Balanced,
            seed: 2016,
        }
    }
}

/// Non-fatal findings of [`ProblemSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum SpecWarning {
    /// `s > a + 2`: outside the regularity range covered by the convergence theory.
    RegularityBeyondTheory { s: f64, a: f64 },
}

impl std::fmt::Display for SpecWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecWarning::RegularityBeyondTheory { s, a } => {
                write!(f, "s = {s} exceeds a + 2 = {}; rate predictions may not hold", a + 2.0)
            }
        }
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<Vec<SpecWarning>> {
        if self.coarse_n < 2 {
            return Err(Error::invalid("coarse_n", "must be at least 2"));
        }
        if self.fine_n <= self.coarse_n {
            return Err(Error::invalid("fine_n", "data must be generated on a finer grid than the inversion grid"));
        }
        if self.fine_n != 2 * self.coarse_n {
            return Err(Error::invalid("fine_n", format!("must equal 2·coarse_n = {}", 2 * self.coarse_n)));
        }
        if !(self.length_scale.is_finite() && self.length_scale > 0.0) {
            return Err(Error::invalid("length_scale", "must be positive"));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::invalid("s", "must be positive"));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::invalid("a", "must be positive"));
        }
        match self.noise {
            NoiseSpec::Gamma(g) if !(g.is_finite() && g >= 0.0) => {
                return Err(Error::invalid("gamma", "must be non-negative"));
            }
            NoiseSpec::Relative(r) if !(0.0..1.0).contains(&r) => {
                return Err(Error::invalid("noise_level", "must lie in [0, 1)"));
            }
            _ => {}
        }
        if self.iterations == Some(0) {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        match self.alpha_rule {
            AlphaRule::Fixed { alpha } if !(alpha.is_finite() && alpha > 0.0) => {
                return Err(Error::invalid("alpha", "must be positive"));
            }
            AlphaRule::VariantGeometric { alpha, q } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(Error::invalid("alpha", "must be positive"));
                }
                if !(q > 0.0 && q < 1.0) {
                    return Err(Error::invalid("q", "geometric schedules need 0 < q < 1"));
                }
            }
            _ => {}
        }
        let mut warnings = Vec::new();
        if self.s > self.a + 2.0 {
            warnings.push(SpecWarning::RegularityBeyondTheory { s: self.s, a: self.a });
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert_eq!(ProblemSpec::default().validate().unwrap(), vec![]);
    }

    #[test]
    fn inverse_crime_guard() {
        let spec = ProblemSpec { fine_n: 60, ..ProblemSpec::default() };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn high_regularity_warns() {
        let spec = ProblemSpec { s: 4.0, ..ProblemSpec::default() };
        assert_eq!(spec.validate().unwrap(), vec![SpecWarning::RegularityBeyondTheory { s: 4.0, a: 1.0 }]);
    }

    #[test]
    fn geometric_schedule_needs_q_below_one() {
        let spec = ProblemSpec {
            alpha_rule: AlphaRule::VariantGeometric { alpha: 1.0, q: 1.0 },
            ..ProblemSpec::default()
        };
        assert!(spec.validate().is_err());
    }
}
