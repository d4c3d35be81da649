use rand::Rng;
use serde::Serialize;

use super::pde::compactness;
use crate::diagonal::DiagonalModel;
use crate::error::Result;
use crate::filters::{kalman_cov_closed_form, product_operator_spectrum, spectral_filter_functions, FilterState};
use crate::par::{try_map_indexed, Execution};
use crate::problem::DEFAULT_LENGTH_SCALE;
use crate::rng::{standard_normals, stream, Purpose};
use crate::spectral::{Basis2D, GridField, SpectralOperator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> OracleCheck {
    OracleCheck { name, passed: worst <= tol, detail: format!("max relative deviation {worst:.3e} (tolerance {tol:.0e})") }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Random diagonal problem number `i`: up to 1000 modes and up to 200 steps.
fn random_problem(seed: u64, i: u64) -> Result<(DiagonalModel, f64, f64, usize)> {
    let mut rng = stream(seed, Purpose::Oracle, i, 0);
    let k = rng.random_range(1..=1000usize);
    let kappa = (0..k).map(|_| 10f64.powf(rng.random_range(-3.0..1.0))).collect();
    let lambda = (0..k).map(|_| 10f64.powf(rng.random_range(-4.0..1.0))).collect();
    let alpha = 10f64.powf(rng.random_range(-2.0..2.0));
    let gamma = 10f64.powf(rng.random_range(-3.0..0.0));
    let n = rng.random_range(0..=200usize);
    Ok((DiagonalModel::new(kappa, lambda)?, alpha, gamma, n))
}

/// Worst relative deviation between the iterated Kalman filter and the closed forms for
/// its covariance and its homogeneous contraction, over `count` random problems.
pub fn kalman_oracle(count: usize, seed: u64, exec: Execution) -> Result<f64> {
    let worst = try_map_indexed(exec, count, |i| {
        let (model, alpha, gamma, n) = random_problem(seed, i as u64)?;
        // noise-free data of the zero truth: the mean is the product of contractions
        let mut state = FilterState::kalman(&model, alpha, gamma, vec![1.0; model.len()])?;
        let zero = vec![0.0; model.len()];
        for _ in 0..n {
            state.advance(&zero)?;
        }
        let cov = kalman_cov_closed_form(&model, alpha, gamma, n);
        let prod = product_operator_spectrum(&model, alpha, n.max(1));
        let mut w: f64 = 0.0;
        for k in 0..model.len() {
            w = w.max(rel(state.cov_spectrum()[k], cov[k]));
            if n > 0 {
                w = w.max(rel(state.mean()[k], prod[k]));
            }
        }
        Ok(w)
    })?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Worst deviation in Parseval, round trip, power composition and the link equality
/// `‖Ax‖ = ‖Σ₀^{1/2}x‖` over `count` random fields.
pub fn transform_oracle(count: usize, seed: u64, exec: Execution) -> Result<f64> {
    let basis = Basis2D::with_length(16, DEFAULT_LENGTH_SCALE)?;
    let a = SpectralOperator::neumann_laplacian_inverse(&basis);
    let sigma0 = a.power(2.0)?;
    let half = sigma0.power(0.5)?;
    let a_third = a.power(1.0 / 3.0)?;
    let worst = try_map_indexed(exec, count, |i| {
        let z = standard_normals(seed, Purpose::Oracle, i as u64, 1, basis.node_count());
        let mut x = GridField::from_nodal(&basis, z)?;
        // the constant mode is not part of the basis
        x.remove_mean();
        let spec = x.to_spectral();
        let back = spec.to_nodal();
        let mut w = rel(spec.norm(), x.norm());
        w = w.max(back.add_scaled(-1.0, &x)?.norm() / x.norm());
        let ax = a.apply(&spec)?;
        w = w.max(rel(half.apply(&spec)?.norm(), ax.norm()));
        let thrice = a_third.apply(&a_third.apply(&a_third.apply(&spec)?)?)?;
        w = w.max(thrice.add_scaled(-1.0, &ax)?.norm() / ax.norm());
        Ok(w)
    })?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// The fast self-checks run by `invfilter oracle`.
pub fn oracle_suite(exec: Execution) -> Result<Vec<OracleCheck>> {
    let mut out = Vec::new();
    out.push(check("kalman_closed_form", kalman_oracle(100, 1, exec)?, 1e-10));
    out.push(check("transform_invariants", transform_oracle(1000, 2, exec)?, 1e-12));

    let unit = DiagonalModel::scalar(1.0, 1.0)?;
    let mut s = FilterState::kalman(&unit, 1.0, 1.0, vec![0.0])?;
    s.advance(&[1.0])?;
    let mut w = rel(s.mean()[0], 0.5).max(rel(s.cov_spectrum()[0], 0.5));
    s.advance(&[1.0])?;
    w = w.max(rel(s.mean()[0], 2.0 / 3.0)).max(rel(s.cov_spectrum()[0], 1.0 / 3.0));
    out.push(check("scalar_kalman", w, 1e-15));

    let mut t = FilterState::threedvar(&unit, 1.0, 1.0, vec![0.0])?;
    let mut w: f64 = 0.0;
    for n in 1..=20 {
        t.advance(&[1.0])?;
        w = w.max(rel(t.mean()[0], 1.0 - 0.5f64.powi(n)));
    }
    out.push(check("scalar_3dvar", w, 1e-15));

    let mut rng = stream(3, Purpose::Oracle, 0, 0);
    let mut w: f64 = 0.0;
    for _ in 0..10_000 {
        let lambda = 10f64.powf(rng.random_range(-6.0..2.0));
        let alpha = 10f64.powf(rng.random_range(-2.0..2.0));
        let n = rng.random_range(1..1000usize);
        let f = spectral_filter_functions(lambda, alpha, n)?;
        w = w.max((f.q_n * lambda + f.r_n - 1.0).abs());
        w = w.max((f.q_n * alpha / n as f64 - 1.0).max(0.0));
    }
    out.push(check("filter_functions", w, 1e-12));

    let c = compactness(&[16, 32, 64], DEFAULT_LENGTH_SCALE, 1.0)?;
    let ok = c.windows(2).all(|p| p[0].1 < p[1].1) && c.iter().all(|p| p.1 < 1.0);
    out.push(OracleCheck {
        name: "compactness",
        passed: ok,
        detail: c.iter().map(|(n, v)| format!("n={n}: {v:.15}")).collect::<Vec<_>>().join(", "),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in oracle_suite(Execution::default()).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
