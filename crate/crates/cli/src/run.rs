//! Execute a resolved plan and collect its tables.

use std::collections::BTreeMap;
use std::time::Instant;

use invfilter_core::experiments::{diagonal_rate, oracle_suite, rate_study, trajectory, variant_blowup, RateStudy};
use invfilter_core::par::Execution;
use invfilter_core::problem::{NoiseSpec, Problem};

use crate::config::{Plan, Resolved};
use crate::output::{slopes_table, text_table, trajectory_table, SlopeRow, Table};
use crate::CliError;

#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
    pub parts_s: BTreeMap<String, f64>,
    /// Set when an oracle check failed; the tables are still written.
    pub numerical_failure: Option<String>,
}

/// `trajectory.csv` for the first study, `trajectory_<label>.csv` for the others.
fn trajectory_name(i: usize, label: &str) -> String {
    if i == 0 {
        "trajectory.csv".into()
    } else {
        format!("trajectory_{label}.csv")
    }
}

/// One row per study, plus a `<label>_alt` row when two exponents compete for the rate.
fn slope_rows(st: &RateStudy) -> Vec<SlopeRow> {
    let row = |param_set: String, predicted_exponent: f64| SlopeRow {
        param_set,
        predicted_exponent,
        fitted_slope: st.fit.slope,
        residual: st.fit.residual,
    };
    let mut rows = vec![row(st.label.clone(), st.predicted_exponent())];
    if let Some(alt) = st.predicted.alternative {
        rows.push(row(format!("{}_alt", st.label), alt));
    }
    rows
}

fn study_summary(st: &RateStudy) -> String {
    let alt = st.predicted.alternative.map(|a| format!(", alternative {a:.4}")).unwrap_or_default();
    format!("{}: slope {:.4} (predicted {:.4}{alt})", st.label, st.fit.slope, st.predicted_exponent())
}

fn timed<T>(parts: &mut BTreeMap<String, f64>, label: &str, f: impl FnOnce() -> T) -> T {
    let t0 = Instant::now();
    let out = f();
    parts.insert(label.to_string(), t0.elapsed().as_secs_f64());
    out
}

pub fn execute(resolved: &Resolved, exec: Execution) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let mut slopes = Vec::new();
    match &resolved.plan {
        Plan::Single { spec, filters, replicates, horizon } => {
            let problem = Problem::new(spec.clone())?;
            for (i, &kind) in filters.iter().enumerate() {
                let t = timed(&mut out.parts_s, kind.label(), || trajectory(&problem, kind, *replicates, *horizon, exec))?;
                let stops: Vec<String> = t.setups.iter().map(|s| s.stop.to_string()).collect();
                let (argmin, min) = t
                    .records
                    .iter()
                    .skip(1)
                    .fold((0, f64::INFINITY), |acc, r| if r.error < acc.1 { (r.n, r.error) } else { acc });
                let gamma = match spec.noise {
                    NoiseSpec::Gamma(g) => format!("{g:.4e}"),
                    NoiseSpec::Relative(_) => format!("{:.4e}", t.setups[0].gamma),
                };
                out.summary.push(format!(
                    "{}: gamma {gamma}, stop N = {}, smallest error {min:.6e} at n = {argmin}",
                    kind.label(),
                    stops.join("/")
                ));
                out.tables.push(trajectory_table(trajectory_name(i, kind.label()), &t.records)?);
            }
        }
        Plan::Rate { spec, filters, n_list, replicates } => {
            let studies = timed(&mut out.parts_s, "rate_study", || rate_study(spec, filters, n_list, *replicates, exec))?;
            for (i, st) in studies.iter().enumerate() {
                out.summary.push(study_summary(st));
                out.tables.push(trajectory_table(trajectory_name(i, st.filter.label()), &st.records)?);
                slopes.extend(slope_rows(st));
            }
        }
        Plan::Minimax { spec, filters, n_list, replicates } => {
            for (i, &kind) in filters.iter().enumerate() {
                let st = timed(&mut out.parts_s, kind.label(), || diagonal_rate(spec, kind, n_list, *replicates, exec))?;
                out.summary.push(study_summary(&st));
                out.tables.push(trajectory_table(trajectory_name(i, kind.label()), &st.records)?);
                slopes.extend(slope_rows(&st));
            }
        }
        Plan::Blowup { spec, alpha, q, horizon, replicates } => {
            let r = timed(&mut out.parts_s, "variant_blowup", || variant_blowup(spec, *alpha, *q, *horizon, *replicates, exec))?;
            out.summary.push(format!("variant: smallest mse at n = {}, mse({horizon}) / min = {:.4e}", r.argmin, r.ratio));
            out.tables.push(trajectory_table("trajectory.csv", &r.records)?);
        }
        Plan::Oracle => {
            let checks = timed(&mut out.parts_s, "oracle_suite", || oracle_suite(exec))?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            for c in &checks {
                out.summary.push(format!("{:<22} {}  {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail));
            }
            if !failed.is_empty() {
                out.numerical_failure = Some(format!("oracle checks failed: {}", failed.join(", ")));
            }
            let rows = checks.iter().map(|c| vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()]).collect();
            out.tables.push(text_table("oracle.csv", &["check", "passed", "detail"], rows)?);
            out.tables.push(trajectory_table("trajectory.csv", &[])?);
        }
    }
    out.tables.push(slopes_table(&slopes)?);
    Ok(out)
}
