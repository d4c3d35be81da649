use serde::Serialize;

use crate::diagonal::DiagonalModel;
use crate::error::{Error, Result};
use crate::filters::{FilterConfig, FilterState};

/// Aggregated error split at step `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionRecord {
    pub n: usize,
    /// Mean of `‖mₙ − 𝒫u†‖` over replicates.
    pub error: f64,
    /// Mean of `‖m⁰ₙ − 𝒫u†‖²`, where `m⁰` is the noiseless companion run.
    pub bias_sq: f64,
    /// Mean of `‖mₙ − m⁰ₙ‖²`.
    pub variance: f64,
    /// Mean of `‖mₙ − 𝒫u†‖²`.
    pub mse: f64,
    /// Standard error of `mse`.
    pub stderr: f64,
}

/// Squared distances of a single replicate at the recorded steps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairedTrace {
    pub steps: Vec<usize>,
    pub err_sq: Vec<f64>,
    pub bias_sq: Vec<f64>,
    pub var: Vec<f64>,
}

impl PairedTrace {
    fn push(&mut self, n: usize, noisy: &FilterState, clean: &FilterState, target: &[f64]) {
        let (mut e, mut b, mut v) = (0.0, 0.0, 0.0);
        for ((m, m0), t) in noisy.mean().iter().zip(clean.mean()).zip(target) {
            e += (m - t) * (m - t);
            b += (m0 - t) * (m0 - t);
            v += (m - m0) * (m - m0);
        }
        self.steps.push(n);
        self.err_sq.push(e);
        self.bias_sq.push(b);
        self.var.push(v);
    }
}

/// One filter to be run against `clean + data_gamma · ξₙ`, stopped at `stop`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRun {
    pub config: FilterConfig,
    pub stop: usize,
    /// Scale applied to the unit noise in the data.
    pub data_gamma: f64,
    /// γ assumed by the filter. Must be positive.
    pub filter_gamma: f64,
    /// Record every step `0..=stop` rather than only `stop`.
    pub record_all: bool,
}

/// Run several filters over a shared stream of unit noise `ξ₁, ξ₂, …`, each paired with a
/// companion fed the noise-free data `clean`.
///
/// `unit_noise(n)` is called once per step up to the largest `stop`; all runs that are still
/// active at step `n` see the same `ξₙ`.
pub fn run_paired(
    runs: &[PairedRun],
    model: &DiagonalModel,
    m0: &[f64],
    target: &[f64],
    clean: &[f64],
    mut unit_noise: impl FnMut(usize) -> Result<Vec<f64>>,
) -> Result<Vec<PairedTrace>> {
    if target.len() != model.len() || clean.len() != model.len() {
        return Err(Error::BasisMismatch("target or clean data do not match the model".into()));
    }
    let mut noisy = Vec::with_capacity(runs.len());
    let mut quiet = Vec::with_capacity(runs.len());
    let mut traces = vec![PairedTrace::default(); runs.len()];
    for (r, trace) in runs.iter().zip(traces.iter_mut()) {
        let a = r.config.start(model, m0.to_vec(), r.filter_gamma)?;
        let b = a.clone();
        if r.record_all || r.stop == 0 {
            trace.push(0, &a, &b, target);
        }
        noisy.push(a);
        quiet.push(b);
    }
    let n_max = runs.iter().map(|r| r.stop).max().unwrap_or(0);
    let mut y = vec![0.0; model.len()];
    for n in 1..=n_max {
        let xi = unit_noise(n)?;
        if xi.len() != model.len() {
            return Err(Error::BasisMismatch(format!("noise has {} modes, model {}", xi.len(), model.len())));
        }
        for (i, r) in runs.iter().enumerate() {
            if n > r.stop {
                continue;
            }
            for ((yk, c), x) in y.iter_mut().zip(clean).zip(&xi) {
                *yk = c + r.data_gamma * x;
            }
            noisy[i].advance(&y)?;
            quiet[i].advance(clean)?;
            if r.record_all || n == r.stop {
                traces[i].push(n, &noisy[i], &quiet[i], target);
            }
        }
    }
    Ok(traces)
}

/// Average replicate traces recorded at identical steps into one record per step.
pub fn aggregate(traces: &[PairedTrace]) -> Result<Vec<DecompositionRecord>> {
    let m = traces.len();
    if m < 2 {
        return Err(Error::invalid("replicates", format!("need at least 2, got {m}")));
    }
    let steps = &traces[0].steps;
    if traces.iter().any(|t| &t.steps != steps) {
        return Err(Error::invalid("replicates", "traces were recorded at different steps"));
    }
    let mf = m as f64;
    let out = steps
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            // summed in replicate order, so the result does not depend on scheduling
            let mse = traces.iter().map(|t| t.err_sq[k]).sum::<f64>() / mf;
            let spread = traces.iter().map(|t| (t.err_sq[k] - mse).powi(2)).sum::<f64>() / (mf - 1.0);
            DecompositionRecord {
                n,
                error: traces.iter().map(|t| t.err_sq[k].sqrt()).sum::<f64>() / mf,
                bias_sq: traces.iter().map(|t| t.bias_sq[k]).sum::<f64>() / mf,
                variance: traces.iter().map(|t| t.var[k]).sum::<f64>() / mf,
                mse,
                stderr: (spread / mf).sqrt(),
            }
        })
        .collect();
    Ok(out)
}
