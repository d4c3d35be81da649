use serde::{Deserialize, Serialize};

use super::{filter_gamma, fit_records, records_for, transpose, RateStudy};
use crate::analysis::{predicted_exponent, run_paired, select_alpha, DecompositionRecord, PairedRun, RateParams};
use crate::diagonal::DiagonalModel;
use crate::error::{Error, Result};
use crate::filters::{AlphaSchedule, FilterConfig, FilterKind};
use crate::par::{try_map_indexed, Execution};
use crate::problem::DataModel;
use crate::rng::{standard_normals, Purpose};

/// Sequence model `λᵢ = i^{−1−2ε}`, `κᵢ = i^{−p}` with the deterministic truth
/// `uᵢ = i^{−β−1/2}`, observed with fresh noise of std γ at every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimaxSpec {
    pub beta: f64,
    pub epsilon: f64,
    pub p: f64,
    pub modes: usize,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for MinimaxSpec {
    fn default() -> Self {
        MinimaxSpec { beta: 1.0, epsilon: 0.5, p: 1.0, modes: 1000, gamma: 1.0, seed: 2016 }
    }
}

impl MinimaxSpec {
    pub fn model(&self) -> Result<DiagonalModel> {
        DiagonalModel::power_law(self.modes, self.epsilon, self.p)
    }

    pub fn truth(&self) -> Vec<f64> {
        (1..=self.modes).map(|i| (i as f64).powf(-self.beta - 0.5)).collect()
    }

    pub fn params(&self) -> RateParams {
        RateParams::assumption2(self.beta, self.epsilon, self.p, DataModel::Dm1)
    }

    fn paired(&self, runs: &[PairedRun], replicate: usize) -> Result<Vec<crate::analysis::PairedTrace>> {
        let model = self.model()?;
        let truth = self.truth();
        let clean: Vec<f64> = truth.iter().zip(model.kappa()).map(|(u, k)| u * k).collect();
        let m0 = vec![0.0; self.modes];
        run_paired(runs, &model, &m0, &truth, &clean, |n| {
            Ok(standard_normals(self.seed, Purpose::Noise, replicate as u64, n as u64, self.modes))
        })
    }
}

/// Kalman filter with repeated observations on the sequence model, α chosen per budget
/// for the minimax rate.
pub fn diagonal_minimax(spec: &MinimaxSpec, n_list: &[usize], replicates: usize, exec: Execution) -> Result<RateStudy> {
    diagonal_rate(spec, FilterKind::Kalman, n_list, replicates, exec)
}

/// Rate study on the sequence model for Kalman or 3DVAR with the α rule of each filter.
/// For 3DVAR the prediction carries the competing exponent in `predicted.alternative`.
pub fn diagonal_rate(spec: &MinimaxSpec, filter: FilterKind, n_list: &[usize], replicates: usize, exec: Execution) -> Result<RateStudy> {
    if replicates < 2 {
        return Err(Error::invalid("replicates", "need at least 2"));
    }
    let params = spec.params();
    let predicted = predicted_exponent(&params, filter)?;
    let runs = n_list
        .iter()
        .map(|&n| {
            let alpha = select_alpha(&params, filter, n)?;
            let config = if filter == FilterKind::Kalman { FilterConfig::Kalman { alpha } } else { FilterConfig::ThreeDVar { alpha } };
            Ok(PairedRun { config, stop: n, data_gamma: spec.gamma, filter_gamma: filter_gamma(spec.gamma), record_all: false })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_rep = try_map_indexed(exec, replicates, |r| spec.paired(&runs, r))?;
    let mut records = Vec::with_capacity(n_list.len());
    for traces in transpose(per_rep) {
        records.extend(records_for(&traces)?);
    }
    Ok(RateStudy {
        label: format!("{}_dm1_beta{}_eps{}_p{}", filter.label(), spec.beta, spec.epsilon, spec.p),
        filter,
        fit: fit_records(&records)?,
        records,
        predicted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupResult {
    /// One record per step `0..=n_max`.
    pub records: Vec<DecompositionRecord>,
    /// Step `n ≥ 1` with the smallest MSE.
    pub argmin: usize,
    /// MSE at `n_max` over the smallest MSE.
    pub ratio: f64,
}

/// Variant filter with `αₙ = α qⁿ⁻¹` and repeated observations on the sequence model.
pub fn variant_blowup(spec: &MinimaxSpec, alpha: f64, q: f64, n_max: usize, replicates: usize, exec: Execution) -> Result<BlowupResult> {
    if n_max == 0 {
        return Err(Error::invalid("n_max", "must be positive"));
    }
    let run = PairedRun {
        config: FilterConfig::Variant { schedule: AlphaSchedule::geometric(alpha, q)? },
        stop: n_max,
        data_gamma: spec.gamma,
        filter_gamma: filter_gamma(spec.gamma),
        record_all: true,
    };
    let traces = try_map_indexed(exec, replicates, |r| Ok(spec.paired(std::slice::from_ref(&run), r)?.remove(0)))?;
    let records = records_for(&traces)?;
    let (argmin, min) = records
        .iter()
        .skip(1)
        .fold((0, f64::INFINITY), |acc, r| if r.mse < acc.1 { (r.n, r.mse) } else { acc });
    let ratio = records[n_max].mse / min;
    Ok(BlowupResult { records, argmin, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threedvar_study_reports_both_exponents() {
        let spec = MinimaxSpec { beta: 1.5, modes: 200, ..MinimaxSpec::default() };
        let st = diagonal_rate(&spec, FilterKind::ThreeDVar, &[16, 32, 64, 128], 4, Execution::Sequential).unwrap();
        assert_eq!(st.records.len(), 4);
        assert_eq!(st.label, "3dvar_dm1_beta1.5_eps0.5_p1");
        // 2β/(1+2ε+2β+2p) = 3/7 against 2p/(…) = 2/7
        assert!((st.predicted.exponent + 3.0 / 7.0).abs() < 1e-12);
        assert!((st.predicted.alternative.unwrap() + 2.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn minimax_is_the_kalman_rate_study() {
        let spec = MinimaxSpec { modes: 100, ..MinimaxSpec::default() };
        let a = diagonal_minimax(&spec, &[8, 16, 32, 64], 3, Execution::Sequential).unwrap();
        let b = diagonal_rate(&spec, FilterKind::Kalman, &[8, 16, 32, 64], 3, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn variant_filter_has_no_rate() {
        let spec = MinimaxSpec { modes: 10, ..MinimaxSpec::default() };
        assert!(diagonal_rate(&spec, FilterKind::Variant, &[8, 16, 32, 64], 3, Execution::Sequential).is_err());
    }
}
