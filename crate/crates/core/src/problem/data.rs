use super::{restrict_to_coarse, DataModel, Problem, TruthSample};
use crate::error::{Error, Result};
use crate::rng::{standard_normals, Purpose};
use crate::spectral::{Basis2D, GridField, SpectralOperator};

/// `γ = ρ‖A u†‖ / √dim`, so that a noise vector with `dim` i.i.d. `N(0, γ²)` components has
/// norm close to `ρ‖A u†‖`.
pub fn gamma_for_level(clean_norm: f64, dim: usize, rho: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid("noise_level", format!("must lie in [0, 1), got {rho}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    if clean_norm == 0.0 {
        return Err(Error::invalid("truth", "noise-free data are zero; a relative noise level is undefined"));
    }
    Ok(rho * clean_norm / (dim as f64).sqrt())
}

/// Calibrate γ against the noise-free data `𝒫(A u†)` on the inversion grid, `dim = coarse_n² − 1`.
pub fn calibrate_gamma(truth: &TruthSample, forward_fine: &SpectralOperator, rho: f64) -> Result<f64> {
    let coarse = truth.coarse_projection.basis();
    let clean = restrict_to_coarse(&forward_fine.apply(&truth.fine_field)?, coarse)?;
    gamma_for_level(clean.norm(), coarse.mode_count(), rho)
}

/// Observations `y₁, y₂, …` on the inversion grid.
///
/// DM1 draws fresh noise for each index from a stream addressed by `(seed, replicate, index)`;
/// DM2 draws once and returns the same field for every index.
#[derive(Debug, Clone)]
pub struct DataStream {
    model: DataModel,
    gamma: f64,
    seed: u64,
    replicate: u64,
    fine: Basis2D,
    // per-node std on the fine grid for unit noise on the inversion grid
    fine_scale: f64,
    clean: GridField,
    fixed: Option<GridField>,
}

/// Build the observation stream for `truth`: `A u†` is formed on the fine grid, white noise is
/// added per fine node and the sum is restricted to the inversion grid.
///
/// `γ` is the noise std as seen on the inversion grid. Restriction averages neighbouring
/// nodes and so shrinks white noise; the fine-grid std is `γ/g` with `g` from
/// [`restriction_noise_gain`](super::restriction_noise_gain), which makes the restricted noise
/// have mean per-coefficient variance exactly `γ²`. This keeps the realized relative noise
/// equal to the level used by [`calibrate_gamma`].
pub fn generate_data(problem: &Problem, truth: &TruthSample, gamma: f64) -> Result<DataStream> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::invalid("gamma", format!("must be non-negative, got {gamma}")));
    }
    let forward = problem.forward_fine();
    forward.basis().ensure_same(truth.fine_field.basis(), "generate_data")?;
    let clean = restrict_to_coarse(&forward.apply(&truth.fine_field)?, problem.coarse_basis())?.to_spectral();
    let mut stream = DataStream {
        model: problem.spec().data_model,
        gamma,
        seed: problem.spec().seed,
        replicate: truth.replicate,
        fine: problem.fine_basis().clone(),
        fine_scale: 1.0 / problem.noise_gain(),
        clean,
        fixed: None,
    };
    if stream.model == DataModel::Dm2 {
        stream.fixed = Some(stream.noisy(0)?);
    }
    Ok(stream)
}

impl DataStream {
    pub fn model(&self) -> DataModel {
        self.model
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Noise-free data `𝒫(A u†)` in spectral form.
    pub fn clean(&self) -> &GridField {
        &self.clean
    }

    /// Observation `yₙ` (spectral form). Indices start at 1.
    pub fn observation(&self, n: usize) -> Result<GridField> {
        if n == 0 {
            return Err(Error::invalid("n", "observation indices start at 1"));
        }
        match &self.fixed {
            Some(y) => Ok(y.clone()),
            None => self.noisy(n as u64),
        }
    }

    /// Restricted noise realization number `index` (spectral form).
    pub fn noise(&self, index: u64) -> Result<GridField> {
        Ok(self.unit_noise(index)?.scaled(self.gamma))
    }

    /// Noise realization `index` as it would be for `γ = 1`. Every realization of a replicate
    /// is this field times γ, which lets studies over γ share draws.
    pub fn unit_noise(&self, index: u64) -> Result<GridField> {
        let mut z = standard_normals(self.seed, Purpose::Noise, self.replicate, index, self.fine.node_count());
        z.iter_mut().for_each(|v| *v *= self.fine_scale);
        let fine = GridField::from_nodal(&self.fine, z)?;
        Ok(restrict_to_coarse(&fine, self.clean.basis())?.to_spectral())
    }

    /// Index of the noise realization used by observation `n`.
    pub fn noise_index(&self, n: usize) -> u64 {
        match self.model {
            DataModel::Dm1 => n as u64,
            DataModel::Dm2 => 0,
        }
    }

    fn noisy(&self, index: u64) -> Result<GridField> {
        if self.gamma == 0.0 {
            return Ok(self.clean.clone());
        }
        self.clean.add_scaled(1.0, &self.noise(index)?)
    }
}

/// Running average `ȳ = (1/n) Σ_{j≤n} yⱼ` of a DM1 stream and the predicted std scale `1/√n`.
pub fn average_observations(stream: &DataStream, n: usize) -> Result<(GridField, f64)> {
    if stream.model != DataModel::Dm1 {
        return Err(Error::WrongDataModel { expected: "dm1" });
    }
    if n == 0 {
        return Err(Error::invalid("n", "must average at least one observation"));
    }
    let mut acc = stream.observation(1)?;
    for j in 2..=n {
        acc = acc.add_scaled(1.0, &stream.observation(j)?)?;
    }
    Ok((acc.scaled(1.0 / n as f64), 1.0 / (n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{sample_truth, NoiseSpec, ProblemSpec};

    fn problem(model: DataModel) -> Problem {
        Problem::new(ProblemSpec {
            coarse_n: 8,
            fine_n: 16,
            data_model: model,
            noise: NoiseSpec::Gamma(0.1),
            ..ProblemSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn gamma_formula() {
        assert_eq!(gamma_for_level(1.0, 100, 0.05).unwrap(), 0.005);
        assert_eq!(gamma_for_level(3.0, 100, 0.0).unwrap(), 0.0);
        assert!(gamma_for_level(0.0, 100, 0.05).is_err());
        assert!(gamma_for_level(1.0, 100, 1.0).is_err());
    }

    #[test]
    fn noiseless_dm2_is_restricted_clean_data() {
        let p = problem(DataModel::Dm2);
        let t = sample_truth(&p, 0).unwrap();
        let s = generate_data(&p, &t, 0.0).unwrap();
        let want = restrict_to_coarse(&p.forward_fine().apply(&t.fine_field).unwrap(), p.coarse_basis()).unwrap();
        assert_eq!(s.observation(1).unwrap(), want.to_spectral());
    }

    #[test]
    fn dm2_repeats_one_observation() {
        let p = problem(DataModel::Dm2);
        let r = p.replicate(0).unwrap();
        assert_eq!(r.stream.observation(1).unwrap(), r.stream.observation(7).unwrap());
        assert_ne!(r.stream.observation(1).unwrap(), *r.stream.clean());
    }

    #[test]
    fn dm1_is_reproducible_and_fresh() {
        let p = problem(DataModel::Dm1);
        let r = p.replicate(0).unwrap();
        let again = p.replicate(0).unwrap();
        assert_eq!(r.stream.observation(3).unwrap(), again.stream.observation(3).unwrap());
        assert_ne!(r.stream.observation(1).unwrap(), r.stream.observation(2).unwrap());
    }

    fn mean_coefficient_variance(fields: &[GridField]) -> f64 {
        let total: f64 = fields.iter().map(|f| f.norm().powi(2)).sum();
        total / (fields.len() * fields[0].basis().mode_count()) as f64
    }

    #[test]
    fn averaged_noise_std_is_gamma_over_sqrt_n() {
        let p = Problem::new(ProblemSpec {
            coarse_n: 16,
            fine_n: 32,
            data_model: DataModel::Dm1,
            noise: NoiseSpec::Gamma(0.1),
            ..ProblemSpec::default()
        })
        .unwrap();
        let mut diffs = Vec::new();
        for r in 0..40 {
            let rep = p.replicate(r).unwrap();
            let (avg, scale) = average_observations(&rep.stream, 16).unwrap();
            assert_eq!(scale, 0.25);
            diffs.push(avg.add_scaled(-1.0, rep.stream.clean()).unwrap());
        }
        let std = mean_coefficient_variance(&diffs).sqrt();
        assert!((std / 0.025 - 1.0).abs() < 0.05, "std {std}");
    }

    #[test]
    fn restricted_noise_has_rms_gamma() {
        let p = problem(DataModel::Dm1);
        let r = p.replicate(0).unwrap();
        let noise: Vec<GridField> = (1..=400).map(|i| r.stream.noise(i).unwrap()).collect();
        let rms = mean_coefficient_variance(&noise).sqrt();
        assert!((rms / 0.1 - 1.0).abs() < 0.02, "{rms}");
    }

    #[test]
    fn relative_level_is_realized() {
        let p = Problem::new(ProblemSpec {
            coarse_n: 24,
            fine_n: 48,
            data_model: DataModel::Dm1,
            noise: NoiseSpec::Relative(0.05),
            ..ProblemSpec::default()
        })
        .unwrap();
        let r = p.replicate(0).unwrap();
        let clean = r.stream.clean().norm();
        let mean: f64 = (1..=50).map(|i| r.stream.noise(i).unwrap().norm()).sum::<f64>() / 50.0;
        assert!((mean / clean / 0.05 - 1.0).abs() < 0.02, "{}", mean / clean);
    }

    #[test]
    fn averaging_requires_dm1() {
        let p = problem(DataModel::Dm2);
        let r = p.replicate(0).unwrap();
        assert_eq!(average_observations(&r.stream, 2).unwrap_err(), Error::WrongDataModel { expected: "dm1" });
    }

    #[test]
    fn average_of_one_is_first_observation() {
        let p = problem(DataModel::Dm1);
        let r = p.replicate(0).unwrap();
        let (ybar, scale) = average_observations(&r.stream, 1).unwrap();
        assert_eq!(ybar, r.stream.observation(1).unwrap());
        assert_eq!(scale, 1.0);
    }
}
