use serde::Serialize;

use super::{filter_gamma, fit_records, records_for, transpose, RateStudy};
use crate::analysis::{fit_slope, predicted_exponent, run_paired, select_alpha, stopping_n_dm2, DecompositionRecord, PairedRun, PairedTrace, RateParams, SlopeFit};
use crate::diagonal::DiagonalModel;
use crate::error::{Error, Result};
use crate::filters::{contraction_norm, threedvar_gain, AlphaSchedule, FilterConfig, FilterKind};
use crate::par::{try_map_indexed, Execution};
use crate::problem::{average_observations, AlphaRule, DataModel, DataStream, NoiseSpec, Problem, ProblemSpec, Replicate};
use crate::spectral::{Basis2D, SpectralOperator};

/// Iteration budget for repeated observations when the problem leaves it open.
pub const DEFAULT_DM1_ITERATIONS: usize = 25;

/// Resolved stopping index and filter for one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub gamma: f64,
    pub stop: usize,
    pub config: FilterConfig,
}

pub fn resolve_run(problem: &Problem, filter: FilterKind, gamma: f64) -> Result<RunSetup> {
    let spec = problem.spec();
    let params = RateParams::assumption1(spec.s, spec.a, spec.data_model);
    let stop = match (spec.iterations, spec.data_model) {
        (Some(n), _) => n,
        (None, DataModel::Dm1) => DEFAULT_DM1_ITERATIONS,
        (None, DataModel::Dm2) if gamma > 0.0 => stopping_n_dm2(gamma, spec.s, spec.a)?.n,
        (None, DataModel::Dm2) => {
            return Err(Error::invalid("iterations", "noise-free fixed data need an explicit iteration budget"))
        }
    };
    let config = match (filter, spec.alpha_rule) {
        (FilterKind::Variant, AlphaRule::VariantGeometric { alpha, q }) => {
            FilterConfig::Variant { schedule: AlphaSchedule::geometric(alpha, q)? }
        }
        (FilterKind::Variant, AlphaRule::Fixed { alpha }) => FilterConfig::Variant { schedule: AlphaSchedule::constant(alpha)? },
        (FilterKind::Variant, AlphaRule::Balanced) => {
            return Err(Error::Unsupported("the variant filter needs alpha_rule = variant_geometric or fixed".into()))
        }
        (_, AlphaRule::VariantGeometric { .. }) => {
            return Err(Error::Unsupported(format!("a geometric schedule only applies to the variant filter, not {}", filter.label())))
        }
        (kind, rule) => {
            let alpha = match rule {
                AlphaRule::Fixed { alpha } => alpha,
                _ => select_alpha(&params, kind, stop)?,
            };
            if kind == FilterKind::Kalman {
                FilterConfig::Kalman { alpha }
            } else {
                FilterConfig::ThreeDVar { alpha }
            }
        }
    };
    Ok(RunSetup { gamma, stop, config })
}

/// Unit-noise coefficients for observation `n`; fixed-data streams draw once.
fn noise_source(stream: &DataStream) -> impl FnMut(usize) -> Result<Vec<f64>> + '_ {
    let mut cached: Option<Vec<f64>> = None;
    move |n| {
        if stream.model() == DataModel::Dm2 {
            if cached.is_none() {
                cached = Some(stream.unit_noise(0)?.into_coefficients());
            }
            return Ok(cached.clone().expect("filled above"));
        }
        Ok(stream.unit_noise(stream.noise_index(n))?.into_coefficients())
    }
}

/// Filters started from `m₀ = 0` on one truth and its data stream.
fn run_replicate(problem: &Problem, rep: &Replicate, runs: &[PairedRun]) -> Result<Vec<PairedTrace>> {
    let m0 = vec![0.0; problem.model().len()];
    run_paired(
        runs,
        problem.model(),
        &m0,
        &rep.truth.coarse_projection.coefficients(),
        &rep.stream.clean().coefficients(),
        noise_source(&rep.stream),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    /// One record per step `0..=n_max`.
    pub records: Vec<DecompositionRecord>,
    pub setups: Vec<RunSetup>,
}

/// Error trajectory of `filter` on `replicates` independent truths, recorded up to the larger
/// of `horizon` and the largest stopping index.
pub fn trajectory(problem: &Problem, filter: FilterKind, replicates: usize, horizon: usize, exec: Execution) -> Result<TrajectoryResult> {
    if replicates == 0 {
        return Err(Error::invalid("replicates", "need at least one"));
    }
    let reps = try_map_indexed(exec, replicates, |r| problem.replicate(r as u64))?;
    let setups = reps.iter().map(|rep| resolve_run(problem, filter, rep.stream.gamma())).collect::<Result<Vec<_>>>()?;
    let n_max = setups.iter().map(|s| s.stop).max().unwrap_or(0).max(horizon);
    let traces = try_map_indexed(exec, replicates, |r| {
        let rep = &reps[r];
        let setup = &setups[r];
        let run = PairedRun {
            config: setup.config.clone(),
            stop: n_max,
            data_gamma: setup.gamma,
            filter_gamma: filter_gamma(setup.gamma),
            record_all: true,
        };
        Ok(run_replicate(problem, rep, &[run])?.remove(0))
    })?;
    Ok(TrajectoryResult { records: records_for(&traces)?, setups })
}

/// Convergence-rate study over budgets `n_list`.
///
/// Repeated observations keep the problem's γ and use the α rule for each budget. Fixed data
/// follow the rate protocol: `α = 1` and `γ = N^{−(a+s+1)/(2(a+1))}` for budget `N`, with the
/// same unit noise scaled for every budget.
pub fn rate_study(spec: &ProblemSpec, filters: &[FilterKind], n_list: &[usize], replicates: usize, exec: Execution) -> Result<Vec<RateStudy>> {
    if replicates < 2 {
        return Err(Error::invalid("replicates", "a rate study needs at least 2"));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::invalid("n_list", "budgets must be positive"));
    }
    let problem = Problem::new(spec.clone())?;
    let params = RateParams::assumption1(spec.s, spec.a, spec.data_model);
    let mut runs_template = Vec::new();
    for &kind in filters {
        for &n in n_list {
            let alpha = select_alpha(&params, kind, n)?;
            let config = match kind {
                FilterKind::Kalman => FilterConfig::Kalman { alpha },
                FilterKind::ThreeDVar => FilterConfig::ThreeDVar { alpha },
                FilterKind::Variant => return Err(Error::Unsupported("rate studies cover kalman and 3dvar only".into())),
            };
            let dm2_gamma = (n as f64).powf(-(spec.a + spec.s + 1.0) / (2.0 * (spec.a + 1.0)));
            runs_template.push((config, n, dm2_gamma));
        }
    }
    let per_rep = try_map_indexed(exec, replicates, |r| {
        let rep = problem.replicate(r as u64)?;
        let runs: Vec<PairedRun> = runs_template
            .iter()
            .map(|(config, n, dm2_gamma)| {
                let g = if spec.data_model == DataModel::Dm2 { *dm2_gamma } else { rep.stream.gamma() };
                PairedRun { config: config.clone(), stop: *n, data_gamma: g, filter_gamma: filter_gamma(g), record_all: false }
            })
            .collect();
        run_replicate(&problem, &rep, &runs)
    })?;
    let per_run = transpose(per_rep);
    let mut out = Vec::new();
    for (fi, &kind) in filters.iter().enumerate() {
        let mut records = Vec::with_capacity(n_list.len());
        for traces in &per_run[fi * n_list.len()..(fi + 1) * n_list.len()] {
            records.extend(records_for(traces)?);
        }
        let fit = fit_records(&records)?;
        out.push(RateStudy {
            label: format!("{}_{}_s{}_a{}", kind.label(), spec.data_model.label(), spec.s, spec.a),
            filter: kind,
            records,
            fit,
            predicted: predicted_exponent(&params, kind)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiconvergenceLevel {
    pub noise_level: f64,
    pub gamma: f64,
    /// Stopping index from the fixed-data rule.
    pub stop: usize,
    /// Step `n ≥ 1` with the smallest error.
    pub argmin: usize,
    pub min_error: f64,
    /// `‖mₙ − 𝒫u†‖` for `n = 0..=horizon'`, where `horizon' = max(horizon, 2·stop)`.
    pub errors: Vec<f64>,
}

impl SemiconvergenceLevel {
    pub fn error_at(&self, n: usize) -> Option<f64> {
        self.errors.get(n).copied()
    }
}

/// Fixed-data error trajectories of replicate 0 for several relative noise levels.
pub fn semiconvergence(base: &ProblemSpec, levels: &[f64], filter: FilterKind, horizon: usize, exec: Execution) -> Result<Vec<SemiconvergenceLevel>> {
    try_map_indexed(exec, levels.len(), |i| {
        let spec = ProblemSpec { data_model: DataModel::Dm2, noise: NoiseSpec::Relative(levels[i]), iterations: None, ..base.clone() };
        let problem = Problem::new(spec)?;
        let rep = problem.replicate(0)?;
        let setup = resolve_run(&problem, filter, rep.stream.gamma())?;
        let run = PairedRun {
            config: setup.config.clone(),
            stop: horizon.max(2 * setup.stop),
            data_gamma: setup.gamma,
            filter_gamma: filter_gamma(setup.gamma),
            record_all: true,
        };
        let trace = run_replicate(&problem, &rep, &[run])?.remove(0);
        let errors: Vec<f64> = trace.err_sq.iter().map(|e| e.sqrt()).collect();
        let (argmin, min_error) = errors
            .iter()
            .enumerate()
            .skip(1)
            .fold((0, f64::INFINITY), |acc, (n, &e)| if e < acc.1 { (n, e) } else { acc });
        Ok(SemiconvergenceLevel { noise_level: levels[i], gamma: setup.gamma, stop: setup.stop, argmin, min_error, errors })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltResult {
    /// `(n, per-coefficient variance of ȳₙ)`.
    pub points: Vec<(usize, f64)>,
    pub fit: SlopeFit,
}

/// Variance of averaged repeated observations around the clean data, per coefficient.
pub fn clt_averaging(spec: &ProblemSpec, ns: &[usize], replicates: usize, exec: Execution) -> Result<CltResult> {
    if spec.data_model != DataModel::Dm1 {
        return Err(Error::WrongDataModel { expected: "dm1" });
    }
    let problem = Problem::new(spec.clone())?;
    let per_rep = try_map_indexed(exec, replicates, |r| {
        let rep = problem.replicate(r as u64)?;
        ns.iter()
            .map(|&n| {
                let (avg, _) = average_observations(&rep.stream, n)?;
                Ok(avg.add_scaled(-1.0, rep.stream.clean())?.norm().powi(2))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let dim = problem.coarse_basis().mode_count() as f64;
    let points: Vec<(usize, f64)> = ns
        .iter()
        .enumerate()
        .map(|(k, &n)| (n, per_rep.iter().map(|v| v[k]).sum::<f64>() / (replicates as f64 * dim)))
        .collect();
    let fit = fit_slope(&points)?;
    Ok(CltResult { points, fit })
}

/// `‖I − 𝒦A‖` for the 3DVAR gain with `A = (−Δ)⁻¹`, `Σ₀ = A²` on each grid size.
pub fn compactness(sizes: &[usize], length: f64, alpha: f64) -> Result<Vec<(usize, f64)>> {
    sizes
        .iter()
        .map(|&n| {
            let basis = Basis2D::with_length(n, length)?;
            let a = SpectralOperator::neumann_laplacian_inverse(&basis);
            let model = DiagonalModel::from_operators(&a, &a.power(2.0)?)?;
            Ok((n, contraction_norm(&threedvar_gain(&model, alpha)?, model.kappa())))
        })
        .collect()
}
