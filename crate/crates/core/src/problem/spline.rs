//! Fine-to-coarse restriction by tensor-product cubic splines.
//!
//! Each grid line is interpolated with a cubic spline whose data are extended by even
//! reflection about the boundary faces, which is the symmetry of the Neumann cosine basis.
//! On a cell-centred grid with `fine_n = 2·coarse_n`, coarse node `i` sits halfway between
//! fine nodes `2i` and `2i + 1`, so only midpoint evaluations are needed.

use crate::error::{Error, Result};
use crate::spectral::{Basis2D, GridField};

/// Second derivatives (in index units) of the even-reflected cubic spline through `f`.
///
/// Solves `M[i−1] + 4M[i] + M[i+1] = 6(f[i−1] − 2f[i] + f[i+1])` with the ghost values
/// `f[−1] = f[0]`, `f[m] = f[m−1]` and, by symmetry, `M[−1] = M[0]`, `M[m] = M[m−1]`.
fn reflected_second_derivatives(f: &[f64], m_out: &mut [f64], scratch: &mut [f64]) {
    let m = f.len();
    let rhs = |i: usize| {
        let left = if i == 0 { f[0] } else { f[i - 1] };
        let right = if i + 1 == m { f[m - 1] } else { f[i + 1] };
        6.0 * (left - 2.0 * f[i] + right)
    };
    let diag = |i: usize| if i == 0 || i + 1 == m { 5.0 } else { 4.0 };
    if m == 1 {
        m_out[0] = 0.0;
        return;
    }
    // Thomas algorithm with unit off-diagonals.
    let c = scratch;
    let mut beta = diag(0);
    c[0] = 1.0 / beta;
    m_out[0] = rhs(0) / beta;
    for i in 1..m {
        beta = diag(i) - c[i - 1];
        c[i] = 1.0 / beta;
        m_out[i] = (rhs(i) - m_out[i - 1]) / beta;
    }
    for i in (0..m - 1).rev() {
        m_out[i] -= c[i] * m_out[i + 1];
    }
}

/// Midpoint values of the reflected spline between samples `2i` and `2i + 1`.
fn restrict_line(f: &[f64], out: &mut [f64], m2: &mut [f64], scratch: &mut [f64]) {
    reflected_second_derivatives(f, m2, scratch);
    for (i, o) in out.iter_mut().enumerate() {
        let (a, b) = (2 * i, 2 * i + 1);
        *o = 0.5 * (f[a] + f[b]) - (m2[a] + m2[b]) / 16.0;
    }
}

/// Root-mean-square std per coarse mode of [`restrict_to_coarse`] applied to unit white
/// noise on the fine nodes. With `R₁` the 1D restriction matrix and `P` the mean removal,
/// this is `√(tr(P R Rᵀ P) / (n² − 1))` for `R = R₁ ⊗ R₁`.
pub fn restriction_noise_gain(coarse_n: usize) -> Result<f64> {
    if coarse_n < 2 {
        return Err(Error::invalid("coarse_n", "must be at least 2"));
    }
    let nf = 2 * coarse_n;
    let mut m2 = vec![0.0; nf];
    let mut scratch = vec![0.0; nf];
    let mut e = vec![0.0; nf];
    let mut col = vec![0.0; coarse_n];
    let (mut frob, mut col_sums) = (0.0, 0.0);
    for j in 0..nf {
        e.fill(0.0);
        e[j] = 1.0;
        restrict_line(&e, &mut col, &mut m2, &mut scratch);
        frob += col.iter().map(|v| v * v).sum::<f64>();
        col_sums += col.iter().sum::<f64>().powi(2);
    }
    let n2 = (coarse_n * coarse_n) as f64;
    Ok(((frob * frob - col_sums * col_sums / n2) / (n2 - 1.0)).sqrt())
}

/// Interpolate a fine-grid field at the coarse nodes, then remove the mean.
pub fn restrict_to_coarse(fine: &GridField, coarse: &Basis2D) -> Result<GridField> {
    let nf = fine.basis().grid_size();
    let nc = coarse.grid_size();
    if nf != 2 * nc {
        return Err(Error::invalid("grid", format!("restriction needs fine_n = 2·coarse_n, got {nf} and {nc}")));
    }
    if fine.basis().length() != coarse.length() {
        return Err(Error::BasisMismatch(format!("restriction between {} and {}", fine.basis(), coarse)));
    }
    let values = fine.nodal_values();
    let mut m2 = vec![0.0; nf];
    let mut scratch = vec![0.0; nf];

    // First axis (slow index): for each fine column l, restrict the line over i.
    let mut half = vec![0.0; nc * nf];
    let mut line = vec![0.0; nf];
    let mut out = vec![0.0; nc];
    for l in 0..nf {
        for i in 0..nf {
            line[i] = values[i * nf + l];
        }
        restrict_line(&line, &mut out, &mut m2, &mut scratch);
        for (i, &v) in out.iter().enumerate() {
            half[i * nf + l] = v;
        }
    }
    // Second axis: contiguous rows.
    let mut coarse_vals = vec![0.0; nc * nc];
    for i in 0..nc {
        restrict_line(&half[i * nf..(i + 1) * nf], &mut coarse_vals[i * nc..(i + 1) * nc], &mut m2, &mut scratch);
    }
    let mut field = GridField::from_nodal(coarse, coarse_vals)?;
    field.remove_mean();
    Ok(field)
}
