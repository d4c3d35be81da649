use crate::diagonal::DiagonalModel;
use crate::error::{Error, Result};

/// Kalman gain per mode, `k = cκ/(cκ² + γ²)`.
pub fn kalman_gain(cov: &[f64], kappa: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", format!("the Kalman gain needs gamma > 0, got {gamma}")));
    }
    if cov.len() != kappa.len() {
        return Err(Error::BasisMismatch(format!("{} covariance entries vs {} singular values", cov.len(), kappa.len())));
    }
    let g2 = gamma * gamma;
    Ok(cov.iter().zip(kappa).map(|(&c, &k)| c * k / (c * k * k + g2)).collect())
}

/// `Cₙ = (α/(γ²λ) + nκ²/γ²)⁻¹` per mode.
pub fn kalman_cov_closed_form(model: &DiagonalModel, alpha: f64, gamma: f64, n: usize) -> Vec<f64> {
    let g2 = gamma * gamma;
    let n = n as f64;
    model
        .kappa()
        .iter()
        .zip(model.lambda())
        .map(|(&k, &l)| g2 * l / (alpha + n * l * k * k))
        .collect()
}

/// `Π_{j≤n}(1 − kⱼκ) = α/(α + nλκ²)`, the n-step Kalman contraction of the mean error.
pub fn product_operator_spectrum(model: &DiagonalModel, alpha: f64, n: usize) -> Vec<f64> {
    let n = n as f64;
    model
        .kappa()
        .iter()
        .zip(model.lambda())
        .map(|(&k, &l)| alpha / (alpha + n * l * k * k))
        .collect()
}

/// 3DVAR gain `𝓀 = λκ/(λκ² + α)`; independent of γ and of the step.
pub fn threedvar_gain(model: &DiagonalModel, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    Ok(model
        .kappa()
        .iter()
        .zip(model.lambda())
        .map(|(&k, &l)| l * k / (l * k * k + alpha))
        .collect())
}

/// `sup |1 − 𝓀κ|` over modes, i.e. `‖I − 𝒦A‖`.
pub fn contraction_norm(gain: &[f64], kappa: &[f64]) -> f64 {
    gain.iter().zip(kappa).map(|(g, k)| (1.0 - g * k).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterFunctions {
    /// `r_{1,α/n}(λ) = α/(α + nλ)`
    pub r_one: f64,
    /// `r_{n,α}(λ) = (α/(α + λ))ⁿ`
    pub r_n: f64,
    /// `q_{n,α}(λ) = (1 − r_{n,α}(λ))/λ`
    pub q_n: f64,
}

/// Scalar filter functions at a single spectral value λ.
///
/// Also checks `λᵗ r_{1,α/n}(λ) ≤ (α/n)ᵗ` on a grid of `t ∈ [0, 1]` and reports a violation
/// as a numerical error.
pub fn spectral_filter_functions(lambda: f64, alpha: f64, n: usize) -> Result<FilterFunctions> {
    if !(lambda > 0.0 && alpha > 0.0 && n >= 1) {
        return Err(Error::invalid("spectral_filter_functions", "need lambda > 0, alpha > 0, n >= 1"));
    }
    let nf = n as f64;
    let r_one = alpha / (alpha + nf * lambda);
    let log_ratio = (lambda / alpha).ln_1p();
    let r_n = (-nf * log_ratio).exp();
    // expm1 keeps q accurate when nλ/α is tiny
    let q_n = -(-nf * log_ratio).exp_m1() / lambda;
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        let lhs = lambda.powf(t) * r_one;
        let rhs = (alpha / nf).powf(t);
        if lhs > rhs * (1.0 + 1e-12) {
            return Err(Error::Numerical { step: n, detail: format!("interpolation bound fails at t={t}: {lhs} > {rhs}") });
        }
    }
    Ok(FilterFunctions { r_one, r_n, q_n })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn unit() -> DiagonalModel {
        DiagonalModel::scalar(1.0, 1.0).unwrap()
    }

    #[test]
    fn kalman_gain_examples() {
        assert_eq!(kalman_gain(&[1.0], &[1.0], 1.0).unwrap(), vec![0.5]);
        assert_eq!(kalman_gain(&[0.0], &[1.0], 1.0).unwrap(), vec![0.0]);
        assert!((kalman_gain(&[0.5], &[1.0], 1.0).unwrap()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(kalman_gain(&[1.0], &[1.0], 0.0).is_err());
        assert!(kalman_gain(&[1.0, 2.0], &[1.0], 1.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let m = DiagonalModel::new(vec![2.0, 0.5], vec![3.0, 0.25]).unwrap();
        let c0 = kalman_cov_closed_form(&m, 4.0, 0.5, 0);
        assert!((c0[0] - 0.25 / 4.0 * 3.0).abs() < 1e-15);
        assert!((c0[1] - 0.25 / 4.0 * 0.25).abs() < 1e-15);
        assert!((kalman_cov_closed_form(&unit(), 1.0, 1.0, 3)[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn product_examples() {
        assert!((product_operator_spectrum(&unit(), 1.0, 3)[0] - 0.25).abs() < 1e-15);
        // three explicit Kalman steps with c₀ = 1
        let mut c: f64 = 1.0;
        let mut prod = 1.0;
        for _ in 0..3 {
            let k = c / (c + 1.0);
            prod *= 1.0 - k;
            c *= 1.0 - k;
        }
        assert!((prod - 0.25).abs() < 1e-15);
        let flat = DiagonalModel::scalar(0.0, 1.0).unwrap();
        assert_eq!(product_operator_spectrum(&flat, 1.0, 50)[0], 1.0);
        assert!(product_operator_spectrum(&unit(), 1e12, 5)[0] > 1.0 - 1e-11);
    }

    #[test]
    fn threedvar_gain_examples() {
        assert_eq!(threedvar_gain(&unit(), 1.0).unwrap(), vec![0.5]);
        let m = DiagonalModel::scalar(4.0, 1.0).unwrap();
        assert!((threedvar_gain(&m, 1e-14).unwrap()[0] - 0.25).abs() < 1e-14);
        assert!(threedvar_gain(&unit(), 0.0).is_err());

        // equals the Kalman gain evaluated at the frozen covariance (γ²/α)Σ₀
        let m = DiagonalModel::power_law(50, 0.3, 1.2).unwrap();
        for (alpha, gamma) in [(0.5, 0.01), (3.0, 2.0)] {
            let cov = kalman_cov_closed_form(&m, alpha, gamma, 0);
            let k = kalman_gain(&cov, m.kappa(), gamma).unwrap();
            for (a, b) in k.iter().zip(threedvar_gain(&m, alpha).unwrap()) {
                assert!((a - b).abs() <= 1e-13 * b.abs());
            }
        }
    }

    #[test]
    fn contraction_examples() {
        let m = DiagonalModel::new(vec![1.0, 0.5], vec![1.0, 1.0]).unwrap();
        let g = threedvar_gain(&m, 1.0).unwrap();
        assert!(contraction_norm(&g, m.kappa()) < 1.0);
        assert_eq!(contraction_norm(&[0.0, 0.0], m.kappa()), 1.0);
    }

    #[test]
    fn filter_function_examples() {
        let f = spectral_filter_functions(1.0, 1.0, 1).unwrap();
        assert_eq!((f.r_one, f.r_n, f.q_n), (0.5, 0.5, 0.5));
        assert!(spectral_filter_functions(0.0, 1.0, 1).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let lambda = 10f64.powf(rng.random_range(-8.0..3.0));
            let alpha = 10f64.powf(rng.random_range(-3.0..3.0));
            let n = rng.random_range(1..500usize);
            let f = spectral_filter_functions(lambda, alpha, n).unwrap();
            assert!((f.q_n * lambda + f.r_n - 1.0).abs() < 1e-12);
            assert!(f.q_n <= n as f64 / alpha * (1.0 + 1e-12));
        }
    }
}
