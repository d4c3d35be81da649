use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::FilterKind;
use crate::problem::DataModel;

/// Smoothness description of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// Link condition with exponent `a`, source condition with regularity `s`.
    Assumption1 { s: f64, a: f64 },
    /// Sequence model `λᵢ ≍ i^{−1−2ε}`, `κᵢ ≍ i^{−p}`, truth in a Sobolev ball of order `β`.
    Assumption2 { beta: f64, epsilon: f64, p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub regime: Regime,
    pub data_model: DataModel,
}

impl RateParams {
    pub fn assumption1(s: f64, a: f64, data_model: DataModel) -> Self {
        RateParams { regime: Regime::Assumption1 { s, a }, data_model }
    }

    pub fn assumption2(beta: f64, epsilon: f64, p: f64, data_model: DataModel) -> Self {
        RateParams { regime: Regime::Assumption2 { beta, epsilon, p }, data_model }
    }

    /// Errors on impossible values; returns `true` when `s > a + 2`, which is allowed
    /// but outside the range the rates are proven for.
    pub fn validate(&self) -> Result<bool> {
        match self.regime {
            Regime::Assumption1 { s, a } => {
                if !(s >= 0.0 && a > 0.0) {
                    return Err(Error::invalid("regime", format!("need s >= 0 and a > 0, got s={s}, a={a}")));
                }
                Ok(s > a + 2.0)
            }
            Regime::Assumption2 { beta, epsilon, p } => {
                if !(beta > 0.0 && epsilon > 0.0 && p > 0.0) {
                    return Err(Error::invalid("regime", "need beta, epsilon, p > 0"));
                }
                Ok(false)
            }
        }
    }

    /// `(s, a)` seen through the identification `a = 2p/(1+2ε)`, `s = 2β/(1+2ε)`.
    pub fn as_assumption1(&self) -> (f64, f64) {
        match self.regime {
            Regime::Assumption1 { s, a } => (s, a),
            Regime::Assumption2 { beta, epsilon, p } => (2.0 * beta / (1.0 + 2.0 * epsilon), 2.0 * p / (1.0 + 2.0 * epsilon)),
        }
    }
}

/// α for a run stopped at `n = budget`.
pub fn select_alpha(params: &RateParams, filter: FilterKind, budget: usize) -> Result<f64> {
    params.validate()?;
    if budget == 0 {
        return Err(Error::invalid("N", "budget must be at least 1"));
    }
    if filter == FilterKind::Variant {
        return Err(Error::Unsupported("the variant filter takes an explicit schedule, not a single alpha".into()));
    }
    if params.data_model == DataModel::Dm2 {
        return Ok(1.0);
    }
    let n = budget as f64;
    let exponent = match (params.regime, filter) {
        (Regime::Assumption1 { s, a }, _) => s / (s + a + 1.0),
        (Regime::Assumption2 { beta, epsilon, p }, FilterKind::Kalman) => 2.0 * (beta - epsilon) / (1.0 + 2.0 * beta + 2.0 * p),
        (Regime::Assumption2 { beta, epsilon, p }, _) => 2.0 * beta / (1.0 + 2.0 * epsilon + 2.0 * beta + 2.0 * p),
    };
    Ok(n.powf(exponent))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingRule {
    pub n: usize,
    /// Set when γ is so large that the rule gives `N ≤ 1`.
    pub warning: Option<String>,
}

/// Stopping index for fixed data: `N = round(γ^{−2(a+1)/(a+s+1)})`.
pub fn stopping_n_dm2(gamma: f64, s: f64, a: f64) -> Result<StoppingRule> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
    }
    if !(s >= 0.0 && a > 0.0) {
        return Err(Error::invalid("regime", "need s >= 0 and a > 0"));
    }
    let raw = gamma.powf(-2.0 * (a + 1.0) / (a + s + 1.0)).round();
    let n = raw.max(1.0) as usize;
    let warning = (n <= 1).then(|| format!("gamma = {gamma} is too large for early stopping; using N = {n}"));
    Ok(StoppingRule { n, warning })
}

/// Exponent `e` in an MSE bound `∝ N^e`, with log factors reported separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedRate {
    pub exponent: f64,
    pub log_factor: bool,
    /// Competing value where the stated rate and its derivation disagree.
    pub alternative: Option<f64>,
}

pub fn predicted_exponent(params: &RateParams, filter: FilterKind) -> Result<PredictedRate> {
    params.validate()?;
    use DataModel::*;
    use FilterKind::*;
    let rate = |exponent, log_factor| PredictedRate { exponent, log_factor, alternative: None };
    Ok(match (filter, params.data_model, params.regime) {
        (Kalman, Dm1, Regime::Assumption1 { s, a }) => rate(-s / (s + a + 1.0), false),
        (Kalman, Dm1, Regime::Assumption2 { beta, p, .. }) => rate(-2.0 * beta / (1.0 + 2.0 * beta + 2.0 * p), false),
        (Kalman, Dm2, Regime::Assumption1 { s, a }) => rate(-s / (a + 1.0), false),
        (Kalman, Dm2, Regime::Assumption2 { beta, epsilon, p }) => rate(-2.0 * beta / (1.0 + 2.0 * epsilon + 2.0 * p), false),
        (ThreeDVar, Dm1, Regime::Assumption1 { s, a }) => rate(-s / (s + a + 1.0), true),
        (ThreeDVar, Dm1, Regime::Assumption2 { beta, epsilon, p }) => {
            let d = 1.0 + 2.0 * epsilon + 2.0 * beta + 2.0 * p;
            PredictedRate { exponent: -2.0 * beta / d, log_factor: true, alternative: Some(-2.0 * p / d) }
        }
        (ThreeDVar, Dm2, Regime::Assumption1 { s, a }) => rate(-s / (a + 1.0), false),
        (ThreeDVar, Dm2, Regime::Assumption2 { .. }) => {
            return Err(Error::Unsupported("no rate is available for 3DVAR with fixed data under the sequence model".into()))
        }
        (Variant, ..) => return Err(Error::Unsupported("the variant filter has no convergence rate".into())),
    })
}

/// Bias and variance bound shapes at step `n`, multiplied by the constant `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub bias: f64,
    pub variance: f64,
}

/// Bound shapes with the unknown constant set to `c`. For 3DVAR the `ln n` factor is
/// floored at one so the shape is not zero at `n = 1`.
pub fn theoretical_bounds(
    params: &RateParams,
    filter: FilterKind,
    n: usize,
    alpha: f64,
    gamma: f64,
    trace_sigma0: f64,
    c: f64,
) -> Result<Bounds> {
    params.validate()?;
    if n == 0 || alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::invalid("theoretical_bounds", "need n >= 1 and alpha > 0"));
    }
    use DataModel::*;
    use FilterKind::*;
    let nf = n as f64;
    let g2 = gamma * gamma;
    let ln = nf.ln().max(1.0);
    let bias = match params.regime {
        Regime::Assumption1 { s, a } => (alpha / nf).powf(s / (a + 1.0)),
        Regime::Assumption2 { beta, epsilon, p } => (alpha / nf).powf(2.0 * beta / (1.0 + 2.0 * epsilon + 2.0 * p)),
    };
    let variance = match (filter, params.data_model, params.regime) {
        (Kalman, Dm1, Regime::Assumption1 { .. }) => g2 / alpha * trace_sigma0,
        (Kalman, Dm1, Regime::Assumption2 { epsilon, p, .. }) => {
            let d = 1.0 + 2.0 * epsilon + 2.0 * p;
            g2 * nf.powf(-2.0 * epsilon / d) * alpha.powf(-(1.0 + 2.0 * p) / d)
        }
        (Kalman, Dm2, Regime::Assumption1 { .. }) | (ThreeDVar, Dm2, Regime::Assumption1 { .. }) => nf * g2 / alpha * trace_sigma0,
        (Kalman, Dm2, Regime::Assumption2 { epsilon, p, .. }) => g2 * (nf / alpha).powf((1.0 + 2.0 * p) / (1.0 + 2.0 * epsilon + 2.0 * p)),
        (ThreeDVar, Dm1, Regime::Assumption1 { .. }) => g2 * ln / alpha * trace_sigma0,
        (ThreeDVar, Dm1, Regime::Assumption2 { epsilon, p, .. }) => {
            let shape = g2 * alpha.powf(-(1.0 + 2.0 * p) / (1.0 + 2.0 * epsilon + 2.0 * p));
            shape.min(g2 * ln / alpha)
        }
        (ThreeDVar, Dm2, Regime::Assumption2 { .. }) | (Variant, ..) => {
            return Err(Error::Unsupported(format!("no bounds for {} with this data model and regime", filter.label())))
        }
    };
    Ok(Bounds { bias: c * bias, variance: c * variance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        let p = RateParams::assumption1(1.0, 1.0, DataModel::Dm1);
        let a = select_alpha(&p, FilterKind::Kalman, 3000).unwrap();
        assert!((a - 3000f64.cbrt()).abs() < 1e-12);
        assert!((a - 14.422).abs() < 1e-3);
        let p2 = RateParams::assumption1(2.5, 0.5, DataModel::Dm2);
        assert_eq!(select_alpha(&p2, FilterKind::ThreeDVar, 77).unwrap(), 1.0);
        let p3 = RateParams::assumption2(0.7, 0.7, 1.0, DataModel::Dm1);
        for n in [1, 10, 12345] {
            assert_eq!(select_alpha(&p3, FilterKind::Kalman, n).unwrap(), 1.0);
        }
        assert!(select_alpha(&p, FilterKind::Variant, 10).is_err());
    }

    #[test]
    fn stopping_examples() {
        assert_eq!(stopping_n_dm2(0.1, 1.0, 1.0).unwrap().n, 22);
        for n in [10usize, 100, 1000] {
            let (s, a) = (1.0, 1.0);
            let gamma = (n as f64).powf(-(a + s + 1.0) / (2.0 * (a + 1.0)));
            assert_eq!(stopping_n_dm2(gamma, s, a).unwrap().n, n);
        }
        let r = stopping_n_dm2(2.0, 1.0, 1.0).unwrap();
        assert_eq!(r.n, 1);
        assert!(r.warning.is_some());
        assert!(stopping_n_dm2(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn exponent_examples() {
        let e = predicted_exponent(&RateParams::assumption1(1.0, 1.0, DataModel::Dm1), FilterKind::Kalman).unwrap();
        assert!((e.exponent + 1.0 / 3.0).abs() < 1e-15 && !e.log_factor);
        let e = predicted_exponent(&RateParams::assumption1(2.0, 1.0, DataModel::Dm2), FilterKind::Kalman).unwrap();
        assert_eq!(e.exponent, -1.0);
        assert!(!e.log_factor);
        let e = predicted_exponent(&RateParams::assumption2(1.0, 0.5, 1.0, DataModel::Dm1), FilterKind::Kalman).unwrap();
        assert!((e.exponent + 0.4).abs() < 1e-15);
        let e = predicted_exponent(&RateParams::assumption2(1.0, 0.5, 2.0, DataModel::Dm1), FilterKind::ThreeDVar).unwrap();
        assert!(e.log_factor);
        assert!((e.exponent + 2.0 / 8.0).abs() < 1e-15);
        assert!((e.alternative.unwrap() + 4.0 / 8.0).abs() < 1e-15);
        assert!(predicted_exponent(&RateParams::assumption1(1.0, 1.0, DataModel::Dm1), FilterKind::Variant).is_err());
    }

    #[test]
    fn cross_regime_identification() {
        let p = RateParams::assumption2(1.0, 0.5, 1.0, DataModel::Dm1);
        assert_eq!(p.as_assumption1(), (1.0, 1.0));
        // same exponent through either regime for DM2
        let e2 = predicted_exponent(&RateParams { data_model: DataModel::Dm2, ..p }, FilterKind::Kalman).unwrap();
        let e1 = predicted_exponent(&RateParams::assumption1(1.0, 1.0, DataModel::Dm2), FilterKind::Kalman).unwrap();
        assert!((e1.exponent - e2.exponent).abs() < 1e-15);
    }

    #[test]
    fn bounds_examples() {
        let p = RateParams::assumption1(1.0, 1.0, DataModel::Dm1);
        let b = theoretical_bounds(&p, FilterKind::Kalman, 5, 2.0, 1.0, 3.0, 1.0).unwrap();
        assert_eq!(b.variance, 1.5);
        let b2 = theoretical_bounds(&RateParams { data_model: DataModel::Dm2, ..p }, FilterKind::Kalman, 5, 2.0, 1.0, 3.0, 1.0).unwrap();
        assert_eq!(b2.variance, 7.5);
        assert!(theoretical_bounds(&p, FilterKind::Variant, 5, 2.0, 1.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn validate_flags_high_regularity() {
        assert!(RateParams::assumption1(4.0, 1.0, DataModel::Dm1).validate().unwrap());
        assert!(!RateParams::assumption1(3.0, 1.0, DataModel::Dm1).validate().unwrap());
        assert!(RateParams::assumption1(-1.0, 1.0, DataModel::Dm1).validate().is_err());
    }
}
