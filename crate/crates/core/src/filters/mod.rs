//! Kalman, 3DVAR and variant-3DVAR iterations acting per mode on a [`DiagonalModel`],
//! together with the closed forms used to check them.
//!
//! Covariances are stored as spectra; nothing here ever builds a dense matrix.
//!
//! [`DiagonalModel`]: crate::diagonal::DiagonalModel

mod closed_form;
mod schedule;
mod state;

pub use closed_form::{
    contraction_norm, kalman_cov_closed_form, kalman_gain, product_operator_spectrum, spectral_filter_functions,
    threedvar_gain, FilterFunctions,
};
pub use schedule::AlphaSchedule;
pub use state::{FilterConfig, FilterKind, FilterState};
