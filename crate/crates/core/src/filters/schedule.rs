use crate::error::{Error, Result};

/// Regularization sequence `α₁, α₂, …` for the variant filter.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSchedule {
    Constant(f64),
    /// `αₙ = α qⁿ⁻¹`; admissible with `c̃ = 1/q`.
    Geometric { alpha: f64, q: f64 },
    /// Explicit values, checked step by step against `1/αₙ ≤ c̃ σₙ₋₁`.
    Custom { alphas: Vec<f64>, c_tilde: f64 },
}

impl AlphaSchedule {
    pub fn constant(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(AlphaSchedule::Constant(alpha))
    }

    pub fn geometric(alpha: f64, q: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid("q", format!("geometric schedules need 0 < q < 1, got {q}")));
        }
        Ok(AlphaSchedule::Geometric { alpha, q })
    }

    pub fn custom(alphas: Vec<f64>, c_tilde: f64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::invalid("alphas", "empty schedule"));
        }
        for &a in &alphas {
            check_alpha(a)?;
        }
        if c_tilde.is_nan() || c_tilde <= 0.0 {
            return Err(Error::invalid("c_tilde", "must be positive"));
        }
        Ok(AlphaSchedule::Custom { alphas, c_tilde })
    }

    /// `αₙ` for `n ≥ 1`.
    pub fn alpha(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::invalid("n", "schedule indices start at 1"));
        }
        match self {
            AlphaSchedule::Constant(a) => Ok(*a),
            AlphaSchedule::Geometric { alpha, q } => Ok(alpha * q.powi(n as i32 - 1)),
            AlphaSchedule::Custom { alphas, .. } => alphas
                .get(n - 1)
                .copied()
                .ok_or_else(|| Error::invalid("n", format!("schedule has only {} entries", alphas.len()))),
        }
    }

    /// Admissibility constant `c̃`, if the schedule carries one.
    pub fn c_tilde(&self) -> Option<f64> {
        match self {
            AlphaSchedule::Constant(_) => None,
            AlphaSchedule::Geometric { q, .. } => Some(1.0 / q),
            AlphaSchedule::Custom { c_tilde, .. } => Some(*c_tilde),
        }
    }

    /// `σₙ = Σ_{j≤n} 1/αⱼ`.
    pub fn sigma(&self, n: usize) -> Result<f64> {
        match self {
            AlphaSchedule::Constant(a) => Ok(n as f64 / a),
            AlphaSchedule::Geometric { alpha, q } => Ok((1.0 - q.powi(n as i32)) / (alpha * q.powi(n as i32 - 1) * (1.0 - q))),
            AlphaSchedule::Custom { .. } => (1..=n).map(|j| self.alpha(j).map(|a| 1.0 / a)).sum(),
        }
    }

    /// Check `1/αₙ ≤ c̃ σₙ₋₁` given the running sum `σₙ₋₁`.
    pub(crate) fn check_step(&self, n: usize, alpha_n: f64, sigma_prev: f64) -> Result<()> {
        let AlphaSchedule::Custom { c_tilde, .. } = self else { return Ok(()) };
        if n >= 2 && 1.0 / alpha_n > c_tilde * sigma_prev {
            return Err(Error::InadmissibleSchedule { step: n, inv_alpha: 1.0 / alpha_n, bound: c_tilde * sigma_prev });
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("alpha", format!("must be positive and finite, got {alpha}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sigma() {
        let s = AlphaSchedule::geometric(1.0, 0.5).unwrap();
        assert_eq!(s.alpha(3).unwrap(), 0.25);
        assert!((s.sigma(3).unwrap() - 7.0).abs() < 1e-14);
        assert!(AlphaSchedule::geometric(1.0, 1.0).is_err());
        assert!(AlphaSchedule::geometric(1.0, 0.0).is_err());
    }

    #[test]
    fn geometric_is_admissible_with_inverse_q() {
        for &(alpha, q) in &[(1.0, 0.5), (3.0, 0.9), (0.2, 0.05)] {
            let s = AlphaSchedule::geometric(alpha, q).unwrap();
            for n in 2..60 {
                let lhs = 1.0 / s.alpha(n).unwrap();
                let bound = s.sigma(n - 1).unwrap() / q;
                assert!(lhs <= bound * (1.0 + 1e-12), "n={n}");
            }
        }
    }

    #[test]
    fn custom_checked_per_step() {
        let s = AlphaSchedule::custom(vec![1.0, 1.0, 0.01], 2.0).unwrap();
        assert!(s.check_step(2, 1.0, 1.0).is_ok());
        assert!(matches!(s.check_step(3, 0.01, 2.0), Err(Error::InadmissibleSchedule { step: 3, .. })));
        assert!(s.alpha(4).is_err());
        assert!((s.sigma(3).unwrap() - 102.0).abs() < 1e-12);
    }
}
