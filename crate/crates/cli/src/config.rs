//! Run configuration: a flat TOML file in which every key is optional.
//!
//! Missing keys take the default of the selected experiment, so an empty file runs the
//! fixed-data semiconvergence trajectory at 5% noise on the 60²/120² grids. Keys that do not
//! apply to the selected experiment are rejected rather than silently ignored.

use std::path::PathBuf;

use invfilter_core::experiments::MinimaxSpec;
use invfilter_core::filters::{AlphaSchedule, FilterKind};
use invfilter_core::problem::{AlphaRule, DataModel, NoiseSpec, ProblemSpec, DEFAULT_LENGTH_SCALE};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Error trajectory for one problem, recorded at every step.
    #[default]
    SingleRun,
    /// Convergence rates with fresh noise at every step.
    RateStudyDm1,
    /// Convergence rates with one fixed observation and `γ` tied to `N`.
    RateStudyDm2,
    /// Rates on the diagonal sequence model, Kalman by default.
    DiagonalMinimax,
    /// Variant filter with a geometric schedule and repeated observations.
    VariantBlowup,
    OracleSuite,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::SingleRun => "single_run",
            Experiment::RateStudyDm1 => "rate_study_dm1",
            Experiment::RateStudyDm2 => "rate_study_dm2",
            Experiment::DiagonalMinimax => "diagonal_minimax",
            Experiment::VariantBlowup => "variant_blowup",
            Experiment::OracleSuite => "oracle_suite",
        }
    }

    /// Keys that may appear alongside `experiment`, `output` and `seed`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::SingleRun => &[
                "coarse_n", "fine_n", "length_scale", "s", "a", "data_model", "noise_level", "gamma", "iterations",
                "alpha_rule", "alpha", "q", "filters", "horizon", "replicates",
            ],
            Experiment::RateStudyDm1 => {
                &["coarse_n", "fine_n", "length_scale", "s", "a", "noise_level", "gamma", "filters", "n_list", "replicates"]
            }
            Experiment::RateStudyDm2 => &["coarse_n", "fine_n", "length_scale", "s", "a", "filters", "n_list", "replicates"],
            Experiment::DiagonalMinimax => &["beta", "epsilon", "p", "modes", "gamma", "filters", "n_list", "replicates"],
            Experiment::VariantBlowup => &["beta", "epsilon", "p", "modes", "gamma", "alpha", "q", "horizon", "replicates"],
            Experiment::OracleSuite => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRuleKind {
    Balanced,
    Fixed,
    VariantGeometric,
}

/// Contents of a config file. The same schema is embedded, fully resolved, in the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    /// Directory for the CSV files and the manifest.
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,

    // PDE problem
    pub coarse_n: Option<usize>,
    pub fine_n: Option<usize>,
    pub length_scale: Option<f64>,
    pub s: Option<f64>,
    pub a: Option<f64>,
    pub data_model: Option<DataModel>,
    /// Noise relative to the noise-free data; exclusive with `gamma`.
    pub noise_level: Option<f64>,
    /// Per-component noise std.
    pub gamma: Option<f64>,
    pub iterations: Option<usize>,
    pub alpha_rule: Option<AlphaRuleKind>,
    pub alpha: Option<f64>,
    pub q: Option<f64>,
    pub filters: Option<Vec<FilterKind>>,
    /// Last step recorded by trajectories.
    pub horizon: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub replicates: Option<usize>,

    // sequence model
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub p: Option<f64>,
    pub modes: Option<usize>,
}

pub const DEFAULT_OUTPUT: &str = "invfilter-out";
pub const DEFAULT_SEED: u64 = 2016;

/// What to execute, with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Single { spec: ProblemSpec, filters: Vec<FilterKind>, replicates: usize, horizon: usize },
    Rate { spec: ProblemSpec, filters: Vec<FilterKind>, n_list: Vec<usize>, replicates: usize },
    Minimax { spec: MinimaxSpec, filters: Vec<FilterKind>, n_list: Vec<usize>, replicates: usize },
    Blowup { spec: MinimaxSpec, alpha: f64, q: f64, horizon: usize, replicates: usize },
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub experiment: Experiment,
    pub output: PathBuf,
    pub seed: u64,
    pub plan: Plan,
    pub warnings: Vec<String>,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| config_error(e.to_string()))
}

fn present_keys(cfg: &RunConfig) -> Vec<String> {
    toml::Table::try_from(cfg).map(|t| t.keys().cloned().collect()).unwrap_or_default()
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_error(format!("`{name}` must be positive, got {v}")))
    }
}

fn budgets(n_list: Option<&Vec<usize>>, default: Vec<usize>) -> Result<Vec<usize>, CliError> {
    let n = n_list.cloned().unwrap_or(default);
    if n.len() < 4 {
        return Err(config_error("`n_list` needs at least 4 budgets for a slope fit"));
    }
    if n.contains(&0) {
        return Err(config_error("`n_list` entries must be positive"));
    }
    if n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_error("`n_list` must be strictly increasing"));
    }
    Ok(n)
}

fn replicates(v: Option<usize>, default: usize, min: usize) -> Result<usize, CliError> {
    let m = v.unwrap_or(default);
    if m < min {
        return Err(config_error(format!("`replicates` must be at least {min}, got {m}")));
    }
    Ok(m)
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let experiment = self.experiment.unwrap_or_default();
        let allowed = experiment.keys();
        let stray: Vec<String> = present_keys(self)
            .into_iter()
            .filter(|k| !matches!(k.as_str(), "experiment" | "output" | "seed") && !allowed.contains(&k.as_str()))
            .collect();
        if !stray.is_empty() {
            return Err(config_error(format!("keys not used by {}: {}", experiment.label(), stray.join(", "))));
        }
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        let output = self.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
        let mut warnings = Vec::new();
        let plan = match experiment {
            Experiment::SingleRun => self.single(seed, &mut warnings)?,
            Experiment::RateStudyDm1 | Experiment::RateStudyDm2 => self.rate(experiment, seed, &mut warnings)?,
            Experiment::DiagonalMinimax => Plan::Minimax {
                spec: self.sequence(seed, 1.0, 1000)?,
                filters: self.rate_filters(&[FilterKind::Kalman])?,
                n_list: budgets(self.n_list.as_ref(), (4..=12).map(|k| 1usize << k).collect())?,
                replicates: replicates(self.replicates, 50, 2)?,
            },
            Experiment::VariantBlowup => {
                let alpha = positive("alpha", self.alpha.unwrap_or(1.0))?;
                let q = self.q.unwrap_or(0.5);
                AlphaSchedule::geometric(alpha, q).map_err(CliError::from)?;
                let horizon = self.horizon.unwrap_or(40);
                if horizon == 0 {
                    return Err(config_error("`horizon` must be positive"));
                }
                Plan::Blowup {
                    spec: self.sequence(seed, 0.01, 100)?,
                    alpha,
                    q,
                    horizon,
                    replicates: replicates(self.replicates, 1000, 1)?,
                }
            }
            Experiment::OracleSuite => Plan::Oracle,
        };
        Ok(Resolved { experiment, output, seed, plan, warnings })
    }

    fn grid(&self, seed: u64) -> Result<ProblemSpec, CliError> {
        let coarse_n = self.coarse_n.unwrap_or(60);
        Ok(ProblemSpec {
            coarse_n,
            fine_n: self.fine_n.unwrap_or(2 * coarse_n),
            length_scale: self.length_scale.unwrap_or(DEFAULT_LENGTH_SCALE),
            s: self.s.unwrap_or(1.0),
            a: self.a.unwrap_or(1.0),
            seed,
            ..ProblemSpec::default()
        })
    }

    fn noise(&self, default: NoiseSpec) -> Result<NoiseSpec, CliError> {
        match (self.gamma, self.noise_level) {
            (Some(_), Some(_)) => Err(config_error("set either `gamma` or `noise_level`, not both")),
            (Some(g), None) => Ok(NoiseSpec::Gamma(g)),
            (None, Some(r)) => Ok(NoiseSpec::Relative(r)),
            (None, None) => Ok(default),
        }
    }

    fn alpha_rule(&self) -> Result<AlphaRule, CliError> {
        let kind = self.alpha_rule.unwrap_or(match (self.alpha, self.q) {
            (_, Some(_)) => AlphaRuleKind::VariantGeometric,
            (Some(_), None) => AlphaRuleKind::Fixed,
            (None, None) => AlphaRuleKind::Balanced,
        });
        match kind {
            AlphaRuleKind::Balanced if self.alpha.is_some() || self.q.is_some() => {
                Err(config_error("alpha_rule = \"balanced\" chooses α itself; remove `alpha` and `q`"))
            }
            AlphaRuleKind::Balanced => Ok(AlphaRule::Balanced),
            AlphaRuleKind::Fixed if self.q.is_some() => Err(config_error("`q` only applies to alpha_rule = \"variant_geometric\"")),
            AlphaRuleKind::Fixed => {
                let alpha = self.alpha.ok_or_else(|| config_error("alpha_rule = \"fixed\" needs `alpha`"))?;
                Ok(AlphaRule::Fixed { alpha: positive("alpha", alpha)? })
            }
            AlphaRuleKind::VariantGeometric => {
                let alpha = self.alpha.unwrap_or(1.0);
                let q = self.q.ok_or_else(|| config_error("alpha_rule = \"variant_geometric\" needs `q`"))?;
                AlphaSchedule::geometric(alpha, q).map_err(CliError::from)?;
                Ok(AlphaRule::VariantGeometric { alpha, q })
            }
        }
    }

    fn filters(&self, default: &[FilterKind]) -> Result<Vec<FilterKind>, CliError> {
        let f = self.filters.clone().unwrap_or_else(|| default.to_vec());
        if f.is_empty() {
            return Err(config_error("`filters` must not be empty"));
        }
        if (1..f.len()).any(|i| f[..i].contains(&f[i])) {
            return Err(config_error("`filters` lists a filter twice"));
        }
        Ok(f)
    }

    fn rate_filters(&self, default: &[FilterKind]) -> Result<Vec<FilterKind>, CliError> {
        let filters = self.filters(default)?;
        if filters.contains(&FilterKind::Variant) {
            return Err(config_error("rate studies cover kalman and 3dvar only"));
        }
        Ok(filters)
    }

    fn single(&self, seed: u64, warnings: &mut Vec<String>) -> Result<Plan, CliError> {
        let alpha_rule = self.alpha_rule()?;
        let spec = ProblemSpec {
            data_model: self.data_model.unwrap_or(DataModel::Dm2),
            noise: self.noise(NoiseSpec::Relative(0.05))?,
            iterations: self.iterations,
            alpha_rule,
            ..self.grid(seed)?
        };
        check_spec(&spec, warnings)?;
        let default_filters: &[FilterKind] = match alpha_rule {
            AlphaRule::VariantGeometric { .. } => &[FilterKind::Variant],
            _ => &[FilterKind::Kalman, FilterKind::ThreeDVar],
        };
        let filters = self.filters(default_filters)?;
        for &f in &filters {
            match (f, alpha_rule) {
                (FilterKind::Variant, AlphaRule::Balanced) => {
                    return Err(config_error("the variant filter needs alpha_rule = \"fixed\" or \"variant_geometric\""))
                }
                (FilterKind::Kalman | FilterKind::ThreeDVar, AlphaRule::VariantGeometric { .. }) => {
                    return Err(config_error(format!("a geometric schedule only applies to the variant filter, not {}", f.label())))
                }
                _ => {}
            }
        }
        if spec.data_model == DataModel::Dm2 && spec.noise == NoiseSpec::Gamma(0.0) && spec.iterations.is_none() {
            return Err(config_error("noise-free fixed data need an explicit `iterations`"));
        }
        Ok(Plan::Single { spec, filters, replicates: replicates(self.replicates, 1, 1)?, horizon: self.horizon.unwrap_or(30) })
    }

    fn rate(&self, experiment: Experiment, seed: u64, warnings: &mut Vec<String>) -> Result<Plan, CliError> {
        let grid = self.grid(seed)?;
        let spec = if experiment == Experiment::RateStudyDm1 {
            // γ = 5e-4 on the 60² grid, scaled with the grid so the noise norm per mode count stays put
            let gamma = 5e-4 * grid.coarse_n as f64 / 60.0;
            ProblemSpec { data_model: DataModel::Dm1, noise: self.noise(NoiseSpec::Gamma(gamma))?, ..grid }
        } else {
            // the protocol ties γ to each budget; this noise setting only seeds the stream
            ProblemSpec { data_model: DataModel::Dm2, noise: NoiseSpec::Gamma(1.0), ..grid }
        };
        check_spec(&spec, warnings)?;
        Ok(Plan::Rate {
            spec,
            filters: self.rate_filters(&[FilterKind::Kalman, FilterKind::ThreeDVar])?,
            n_list: budgets(self.n_list.as_ref(), (1..=30).map(|k| 100 * k).collect())?,
            replicates: replicates(self.replicates, 20, 2)?,
        })
    }

    fn sequence(&self, seed: u64, gamma: f64, modes: usize) -> Result<MinimaxSpec, CliError> {
        let spec = MinimaxSpec {
            beta: positive("beta", self.beta.unwrap_or(1.0))?,
            epsilon: self.epsilon.unwrap_or(0.5),
            p: positive("p", self.p.unwrap_or(1.0))?,
            modes: self.modes.unwrap_or(modes),
            gamma: self.gamma.unwrap_or(gamma),
            seed,
        };
        if spec.modes == 0 {
            return Err(config_error("`modes` must be positive"));
        }
        if !(spec.gamma.is_finite() && spec.gamma >= 0.0) {
            return Err(config_error("`gamma` must be non-negative"));
        }
        spec.model().map_err(CliError::from)?;
        Ok(spec)
    }
}

fn check_spec(spec: &ProblemSpec, warnings: &mut Vec<String>) -> Result<(), CliError> {
    for w in spec.validate().map_err(CliError::from)? {
        warnings.push(w.to_string());
    }
    Ok(())
}

impl Resolved {
    /// The config with every applicable key set; parsing it back resolves to the same plan.
    pub fn to_config(&self) -> RunConfig {
        let mut c = RunConfig {
            experiment: Some(self.experiment),
            output: Some(self.output.clone()),
            seed: Some(self.seed),
            ..RunConfig::default()
        };
        match &self.plan {
            Plan::Single { spec, filters, replicates, horizon } => {
                set_grid(&mut c, spec);
                c.data_model = Some(spec.data_model);
                set_noise(&mut c, spec.noise);
                c.iterations = spec.iterations;
                match spec.alpha_rule {
                    AlphaRule::Balanced => c.alpha_rule = Some(AlphaRuleKind::Balanced),
                    AlphaRule::Fixed { alpha } => {
                        c.alpha_rule = Some(AlphaRuleKind::Fixed);
                        c.alpha = Some(alpha);
                    }
                    AlphaRule::VariantGeometric { alpha, q } => {
                        c.alpha_rule = Some(AlphaRuleKind::VariantGeometric);
                        c.alpha = Some(alpha);
                        c.q = Some(q);
                    }
                }
                c.filters = Some(filters.clone());
                c.replicates = Some(*replicates);
                c.horizon = Some(*horizon);
            }
            Plan::Rate { spec, filters, n_list, replicates } => {
                set_grid(&mut c, spec);
                if self.experiment == Experiment::RateStudyDm1 {
                    set_noise(&mut c, spec.noise);
                }
                c.filters = Some(filters.clone());
                c.n_list = Some(n_list.clone());
                c.replicates = Some(*replicates);
            }
            Plan::Minimax { spec, filters, n_list, replicates } => {
                set_sequence(&mut c, spec);
                c.filters = Some(filters.clone());
                c.n_list = Some(n_list.clone());
                c.replicates = Some(*replicates);
            }
            Plan::Blowup { spec, alpha, q, horizon, replicates } => {
                set_sequence(&mut c, spec);
                c.alpha = Some(*alpha);
                c.q = Some(*q);
                c.horizon = Some(*horizon);
                c.replicates = Some(*replicates);
            }
            Plan::Oracle => {}
        }
        c
    }
}

fn set_grid(c: &mut RunConfig, spec: &ProblemSpec) {
    c.coarse_n = Some(spec.coarse_n);
    c.fine_n = Some(spec.fine_n);
    c.length_scale = Some(spec.length_scale);
    c.s = Some(spec.s);
    c.a = Some(spec.a);
}

fn set_noise(c: &mut RunConfig, noise: NoiseSpec) {
    match noise {
        NoiseSpec::Gamma(g) => c.gamma = Some(g),
        NoiseSpec::Relative(r) => c.noise_level = Some(r),
    }
}

fn set_sequence(c: &mut RunConfig, spec: &MinimaxSpec) {
    c.beta = Some(spec.beta);
    c.epsilon = Some(spec.epsilon);
    c.p = Some(spec.p);
    c.modes = Some(spec.modes);
    c.gamma = Some(spec.gamma);
}
