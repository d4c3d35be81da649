//! End-to-end studies built from the pieces in [`problem`](crate::problem),
//! [`filters`](crate::filters) and [`analysis`](crate::analysis).
//!
//! Every study is deterministic in its seed. Replicates run through [`par`](crate::par)
//! and are reduced in index order, so sequential and parallel execution agree bit for bit.

mod oracle;
mod pde;
mod sequence;

pub use oracle::{kalman_oracle, oracle_suite, transform_oracle, OracleCheck};
pub use pde::{
    clt_averaging, compactness, rate_study, resolve_run, semiconvergence, trajectory, CltResult, RunSetup,
    SemiconvergenceLevel, TrajectoryResult,
};
pub use sequence::{diagonal_minimax, diagonal_rate, variant_blowup, BlowupResult, MinimaxSpec};

use serde::Serialize;

use crate::analysis::{aggregate, fit_slope, DecompositionRecord, PairedTrace, PredictedRate, SlopeFit};
use crate::error::Result;
use crate::filters::FilterKind;

/// γ handed to the filters when the data are noise-free; the Kalman gain is undefined at zero.
pub const NOISELESS_GAMMA: f64 = 1e-12;

pub(crate) fn filter_gamma(gamma: f64) -> f64 {
    if gamma > 0.0 {
        gamma
    } else {
        NOISELESS_GAMMA
    }
}

/// Records at `n = N` for each budget, the fitted slope and the predicted exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateStudy {
    pub label: String,
    pub filter: FilterKind,
    pub records: Vec<DecompositionRecord>,
    pub fit: SlopeFit,
    #[serde(skip)]
    pub predicted: PredictedRate,
}

impl RateStudy {
    pub fn predicted_exponent(&self) -> f64 {
        self.predicted.exponent
    }
}

/// Records from a single trace: no Monte-Carlo spread, so `stderr` is zero.
pub(crate) fn single_records(trace: &PairedTrace) -> Vec<DecompositionRecord> {
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(k, &n)| DecompositionRecord {
            n,
            error: trace.err_sq[k].sqrt(),
            bias_sq: trace.bias_sq[k],
            variance: trace.var[k],
            mse: trace.err_sq[k],
            stderr: 0.0,
        })
        .collect()
}

pub(crate) fn records_for(traces: &[PairedTrace]) -> Result<Vec<DecompositionRecord>> {
    if traces.len() == 1 {
        Ok(single_records(&traces[0]))
    } else {
        aggregate(traces)
    }
}

/// Turn `per_replicate[r][k]` (replicate r, run k) into one aggregated study per run.
pub(crate) fn transpose(per_replicate: Vec<Vec<PairedTrace>>) -> Vec<Vec<PairedTrace>> {
    let runs = per_replicate.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<PairedTrace>> = (0..runs).map(|_| Vec::with_capacity(per_replicate.len())).collect();
    for rep in per_replicate {
        for (k, t) in rep.into_iter().enumerate() {
            out[k].push(t);
        }
    }
    out
}

pub(crate) fn fit_records(records: &[DecompositionRecord]) -> Result<SlopeFit> {
    fit_slope(&records.iter().map(|r| (r.n, r.mse)).collect::<Vec<_>>())
}
