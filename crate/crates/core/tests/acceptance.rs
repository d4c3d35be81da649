//! Acceptance criteria, one line each. Runs without the libtest harness so the lines are
//! always printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use invfilter_core::diagonal::DiagonalModel;
use invfilter_core::experiments::{
    clt_averaging, compactness, diagonal_minimax, rate_study, semiconvergence, trajectory, variant_blowup, MinimaxSpec,
};
use invfilter_core::filters::{FilterKind, FilterState};
use invfilter_core::par::Execution;
use invfilter_core::problem::{DataModel, NoiseSpec, Problem, ProblemSpec};
use invfilter_core::rng::{standard_normals, stream, Purpose};
use invfilter_core::spectral::{Basis2D, GridField, SpectralOperator};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

const EXEC: Execution = Execution::Parallel;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

// Kalman covariance against (α/(γ²λ) + nκ²/γ²)⁻¹ and the mean contraction against α/(α + nλκ²).
fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let mut rng = stream(77, Purpose::Oracle, i, 0);
        let k = rng.random_range(1..=1000usize);
        let kappa: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-3.0..1.0))).collect();
        let lambda: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-4.0..1.0))).collect();
        let alpha = 10f64.powf(rng.random_range(-2.0..2.0));
        let gamma = 10f64.powf(rng.random_range(-3.0..0.0));
        let n = rng.random_range(1..=200usize);
        let model = DiagonalModel::new(kappa.clone(), lambda.clone()).unwrap();
        let mut s = FilterState::kalman(&model, alpha, gamma, vec![1.0; k]).unwrap();
        let zero = vec![0.0; k];
        for _ in 0..n {
            s.advance(&zero).unwrap();
        }
        let nf = n as f64;
        for j in 0..k {
            let c = 1.0 / (alpha / (gamma * gamma * lambda[j]) + nf * kappa[j] * kappa[j] / (gamma * gamma));
            let r = alpha / (alpha + nf * lambda[j] * kappa[j] * kappa[j]);
            worst = worst.max(rel(s.cov_spectrum()[j], c)).max(rel(s.mean()[j], r));
        }
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e} over 100 problems"))
}

fn transform_invariants() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, &(n, length)) in [(8usize, 1.0), (16, 20.0), (24, 3.5)].iter().cycle().take(1000).enumerate() {
        let b = Basis2D::with_length(n, length).unwrap();
        let mut x = GridField::from_nodal(&b, standard_normals(5, Purpose::Oracle, i as u64, 0, b.node_count())).unwrap();
        x.remove_mean();
        let c = x.to_spectral();
        worst = worst.max(rel(c.norm(), x.norm()));
        worst = worst.max(c.to_nodal().add_scaled(-1.0, &x).unwrap().norm() / x.norm());
        let a = SpectralOperator::neumann_laplacian_inverse(&b);
        let s0 = a.power(2.0).unwrap();
        let ax = a.apply(&c).unwrap();
        worst = worst.max(rel(s0.power(0.5).unwrap().apply(&c).unwrap().norm(), ax.norm()));
        let p = 0.75;
        for (m, v) in b.modes().zip(a.power(p).unwrap().eigenvalues()) {
            let mu = PI * PI * ((m.j * m.j + m.k * m.k) as f64) / (length * length);
            worst = worst.max(rel(*v, mu.powf(-p)));
        }
    }
    outcome(worst <= 1e-12, format!("max relative error {worst:.2e} over 1000 fields"))
}

fn minimax_rate() -> Outcome {
    let n_list: Vec<usize> = (0..9).map(|k| 16 << k).collect();
    let study = diagonal_minimax(&MinimaxSpec::default(), &n_list, 50, EXEC).unwrap();
    let slope = study.fit.slope;
    outcome((slope + 0.4).abs() <= 0.08, format!("slope {slope:.4} vs -0.4"))
}

fn small_spec(s: f64, model: DataModel) -> ProblemSpec {
    ProblemSpec {
        coarse_n: 32,
        fine_n: 64,
        s,
        data_model: model,
        noise: NoiseSpec::Gamma(5e-4 * 32.0 / 60.0),
        ..ProblemSpec::default()
    }
}

fn budgets() -> Vec<usize> {
    (1..=10).map(|k| 100 * k).collect()
}

fn pde_dm1_rates() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [1.0, 2.0, 3.0] {
        let studies = rate_study(&small_spec(s, DataModel::Dm1), &[FilterKind::Kalman, FilterKind::ThreeDVar], &budgets(), 10, EXEC).unwrap();
        for st in studies {
            let want = -s / (s + 2.0);
            ok &= (st.fit.slope - want).abs() <= 0.10;
            parts.push(format!("s={s} {}: {:.3} (want {want:.3})", st.filter.label(), st.fit.slope));
        }
    }
    outcome(ok, parts.join("; "))
}

fn pde_dm2_rates() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [1.0, 2.0] {
        let studies = rate_study(&small_spec(s, DataModel::Dm2), &[FilterKind::Kalman, FilterKind::ThreeDVar], &budgets(), 10, EXEC).unwrap();
        for st in studies {
            let want = -s / 2.0;
            ok &= (st.fit.slope - want).abs() <= 0.10;
            parts.push(format!("s={s} {}: {:.3} (want {want:.3})", st.filter.label(), st.fit.slope));
        }
    }
    outcome(ok, parts.join("; "))
}

fn dm2_semiconvergence() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [FilterKind::Kalman, FilterKind::ThreeDVar] {
        for lvl in semiconvergence(&ProblemSpec::default(), &[0.01, 0.025, 0.05], kind, 30, EXEC).unwrap() {
            let lo = lvl.stop.div_ceil(2);
            let hi = 2 * lvl.stop;
            let e30 = lvl.error_at(30).unwrap();
            let pass = (lo..=hi).contains(&lvl.argmin) && e30 > lvl.min_error;
            ok &= pass;
            parts.push(format!("{} {}%: N={} argmin={}", kind.label(), lvl.noise_level * 100.0, lvl.stop, lvl.argmin));
        }
    }
    outcome(ok, parts.join("; "))
}

fn variant_blowup_check() -> Outcome {
    let spec = MinimaxSpec { modes: 100, gamma: 0.01, ..MinimaxSpec::default() };
    let r = variant_blowup(&spec, 1.0, 0.5, 40, 1000, EXEC).unwrap();
    outcome(r.ratio >= 10.0, format!("mse(40)/min = {:.3e} (min at n={})", r.ratio, r.argmin))
}

fn compactness_check() -> Outcome {
    let c = compactness(&[16, 32, 64], invfilter_core::problem::DEFAULT_LENGTH_SCALE, 1.0).unwrap();
    let ok = c.windows(2).all(|w| w[0].1 < w[1].1) && c.iter().all(|v| v.1 < 1.0);
    outcome(ok, c.iter().map(|(n, v)| format!("{n}: 1-{:.3e}", 1.0 - v)).collect::<Vec<_>>().join(", "))
}

fn clt_check() -> Outcome {
    let spec = ProblemSpec { coarse_n: 16, fine_n: 32, data_model: DataModel::Dm1, noise: NoiseSpec::Gamma(1.0), ..ProblemSpec::default() };
    let r = clt_averaging(&spec, &[1, 4, 16, 64], 1000, EXEC).unwrap();
    outcome((r.fit.slope + 1.0).abs() <= 0.05, format!("slope {:.4} vs -1", r.fit.slope))
}

fn dm1_stability() -> Outcome {
    let spec = ProblemSpec { data_model: DataModel::Dm1, noise: NoiseSpec::Relative(0.05), iterations: Some(25), ..ProblemSpec::default() };
    let t = trajectory(&Problem::new(spec).unwrap(), FilterKind::Kalman, 10, 30, EXEC).unwrap();
    let worst = t.records.windows(2).map(|w| w[1].error / w[0].error - 1.0).fold(f64::NEG_INFINITY, f64::max);
    outcome(worst <= 0.01, format!("largest step-to-step increase {:.3}% over n=0..{}", worst * 100.0, t.records.len() - 1))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(10)),
        ("transform/operator invariants", transform_invariants, Duration::from_secs(10)),
        ("minimax rate", minimax_rate, Duration::from_secs(120)),
        ("PDE DM1 rates", pde_dm1_rates, Duration::from_secs(600)),
        ("PDE DM2 rates", pde_dm2_rates, Duration::from_secs(600)),
        ("DM2 semiconvergence", dm2_semiconvergence, Duration::from_secs(300)),
        ("variant blow-up", variant_blowup_check, Duration::from_secs(60)),
        ("compactness diagnostic", compactness_check, Duration::from_secs(60)),
        ("CLT averaging", clt_check, Duration::from_secs(60)),
        ("DM1 stability", dm1_stability, Duration::from_secs(120)),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failures = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let t0 = Instant::now();
        let o = f();
        let dt = t0.elapsed();
        let passed = o.passed && dt <= *budget;
        failures += usize::from(!passed);
        println!(
            "criterion {:>2} {:<30} {}  [{:.1}s] {}",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            o.detail
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
