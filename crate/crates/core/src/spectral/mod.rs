//! Operator calculus on the 2D Neumann cosine basis.
//!
//! Fields live on an `n × n` cell-centred grid over the square `[0, L]²` and are
//! interconvertible with their coefficients on the modes `cos(jπx/L) cos(kπy/L)`,
//! `(j, k) ≠ (0, 0)`. The transform pair is the orthonormal DCT-II, so the Euclidean
//! norm of the nodal values of a mean-zero field equals the ℓ² norm of its coefficients.
//! The constant mode is not part of the representation: every field is mean-zero.
//!
//! Operators commuting with the Laplacian are stored by their eigenvalue per mode.

mod basis;
mod field;
mod operator;

pub use basis::{Basis2D, Mode};
pub use field::{GridField, Representation};
pub use operator::{link_condition_check, SpectralOperator};
