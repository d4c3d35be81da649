//! Parameter rules, predicted rates, bias/variance bookkeeping over replicates and
//! log-log slope fits.

mod mse;
mod params;
mod slope;

pub use mse::{aggregate, run_paired, DecompositionRecord, PairedRun, PairedTrace};
pub use params::{
    predicted_exponent, select_alpha, stopping_n_dm2, theoretical_bounds, Bounds, PredictedRate, RateParams, Regime,
    StoppingRule,
};
pub use slope::{fit_slope, SlopeFit};
