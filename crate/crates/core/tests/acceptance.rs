//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;

use renyi_tail::estimators::{h_minimizer, hill};
use renyi_tail::experiments::{
    self, execute, replicate_range, Coverage, Experiment, ExperimentConfig, ExperimentKind,
    HillPlot, ReportTable, Runner, Theorem1Ks, VarianceCurve,
};
use renyi_tail::large_deviations::{exact_hill_tail, gamma_family_rates, rate_function};
use renyi_tail::likelihood::{family_log_likelihood, ml_fit, permuted_density, DensityModel, ModelFamily};
use renyi_tail::quadrature::integrate_quadrant;
use renyi_tail::renyi::{cross_moment_recursion, moments_at, psi_n, simulate};
use renyi_tail::stats::{ks_two_sample, ks_two_sample_critical_value};
use renyi_tail::{DistributionSpec, SeedSpec, StreamRng};

struct Fail(String);

impl From<String> for Fail {
    fn from(s: String) -> Self {
        Fail(s)
    }
}

impl From<renyi_tail::Error> for Fail {
    fn from(e: renyi_tail::Error) -> Self {
        Fail(format!("error: {e}"))
    }
}

type Outcome = Result<String, Fail>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(Fail(detail))
    }
}

fn default_laws() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::Uniform { gamma: 0.5 },
        DistributionSpec::Bernoulli { gamma: 0.5 },
        DistributionSpec::Exponential { gamma: 0.5 },
    ]
}

fn cell(t: &ReportTable, row: usize, col: usize) -> f64 {
    t.rows[row][col].as_f64().expect("numeric cell")
}

fn h_minimum() -> Outcome {
    let (s0, h0) = h_minimizer();
    check(
        (s0 - 0.797).abs() <= 0.001 && (h0 - 1.544).abs() <= 0.001,
        format!("s0 = {s0:.6}, h(s0) = {h0:.6}"),
    )
}

fn variance_curve() -> Outcome {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::VarianceCurve);
    cfg.specs = default_laws();
    cfg.n = 1000;
    cfg.reps = 1000;
    cfg.s_grid = vec![0.5, 0.797, 0.95];
    let t = execute(&VarianceCurve::new(cfg)?, &Runner::default())?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, row) in t.rows.iter().enumerate() {
        let h = cell(&t, i, 1);
        let ratios: Vec<f64> = (2..row.len()).map(|c| cell(&t, i, c) / h).collect();
        worst = ratios.iter().fold(worst, |w, r| w.max((r - 1.0).abs()));
        parts.push(format!(
            "s={}: {}",
            cell(&t, i, 0),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join("/")
        ));
    }
    check(
        worst <= 0.10,
        format!("variance/h(s) {}; max deviation {worst:.3}", parts.join(", ")),
    )
}

fn coverage() -> Outcome {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Coverage);
    cfg.specs = default_laws();
    cfg.n = 2000;
    cfg.k_grid = vec![2000];
    cfg.reps = 2000;
    cfg.eps = 0.1;
    let t = execute(&Coverage::new(cfg.clone())?, &Runner::default())?;
    let covs: Vec<f64> = (0..cfg.specs.len()).map(|i| cell(&t, 0, 1 + 2 * i)).collect();
    check(
        covs.iter().all(|c| (0.88..=0.92).contains(c)),
        format!("spacing-variance coverage unif/bern/exp = {covs:.4?}"),
    )
}

fn pareto_equivalence() -> Outcome {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::HillPlot);
    cfg.specs = vec![
        DistributionSpec::StrictPareto { gamma: 0.5, c: 1.0 },
        DistributionSpec::Exponential { gamma: 0.5 },
    ];
    cfg.n = 2000;
    cfg.reps = 500;
    let e = HillPlot::new(cfg.clone())?;
    let reps = replicate_range(&e, 0..cfg.reps, &Runner::default())?;
    let last = |law: usize| -> Vec<f64> { reps.iter().map(|r| r.paths[law][cfg.n - 1]).collect() };
    let (iid, model3) = (last(0), last(1));
    let d = ks_two_sample(&iid, &model3);
    let crit = ks_two_sample_critical_value(0.01, iid.len(), model3.len());
    check(d < crit, format!("two-sample KS D = {d:.4} vs 1% critical {crit:.4}"))
}

fn moment_convergence() -> Outcome {
    let unif = DistributionSpec::Uniform { gamma: 0.5 };
    let m = moments_at(&unif, 2, 10_000)?;
    let c = cross_moment_recursion(&unif, 10_000)?;
    let c2 = c[0];
    let closed = (1.0 / 3.0) / 4.0 + 0.25 / 2.0;
    check(
        (m[1] - 0.5).abs() <= 0.01
            && (c[c.len() - 1] - 0.25).abs() <= 0.01
            && (c2 - closed).abs() <= 1e-12,
        format!(
            "m2 = {:.6}, C = {:.6} at n = 1e4; C2 = {c2:.15} (closed form {closed:.15})",
            m[1],
            c[c.len() - 1]
        ),
    )
}

fn theorem1() -> Outcome {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Theorem1Ks);
    cfg.specs = vec![DistributionSpec::Uniform { gamma: 0.5 }];
    cfg.n_grid = vec![2000];
    cfg.reps = 100_000;
    let t = execute(&Theorem1Ks::new(cfg)?, &Runner::default())?;
    let ks = cell(&t, 0, 2);
    let psi = psi_n(&DistributionSpec::Uniform { gamma: 0.5 }, 2000, 1.0)?;
    let limit = Complex64::new(1.0, 0.0) / Complex64::new(1.0, -0.5);
    let gap = (psi - limit).norm();
    check(
        ks < 0.01 && gap <= 0.01,
        format!("KS = {ks:.5}; |psi_2000(1) - 1/(1 - 0.5i)| = {gap:.2e}"),
    )
}

fn large_deviations() -> Outcome {
    let exp1 = DistributionSpec::Exponential { gamma: 1.0 };
    let tail = exact_hill_tail(&exp1, 200, 2.0)? / 200.0;
    let target = -(1.0 - 2f64.ln());
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0, 3.0, 5.0] {
        for c in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let spec = DistributionSpec::Gamma { r, gamma: 1.0 };
            let (upper, lower) = gamma_family_rates(r, c)?;
            let up = rate_function(&spec, 1.0 + c)?.to_f64();
            let lo = rate_function(&spec, 1.0 - c)?.to_f64();
            worst = worst.max((up + upper).abs()).max((lo + lower).abs());
        }
    }
    check(
        (tail - target).abs() <= 0.02 && worst <= 1e-8,
        format!(
            "(1/200) log P = {tail:.5} vs {target:.5}; max rate error on 5x5 grid {worst:.1e}"
        ),
    )
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn likelihood() -> Outcome {
    let mut rng = StreamRng::new(SeedSpec::new(808, 0));
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let (spec, family) = if i % 2 == 0 {
            (DistributionSpec::Exponential { gamma: 0.5 }, ModelFamily::Exponential)
        } else {
            (DistributionSpec::Gamma { r: 2.0, gamma: 0.5 }, ModelFamily::GammaFixedR(2.0))
        };
        let n = 100 + 20 * i;
        let k = n / 2 + i;
        let (_, h) = simulate(&spec, n, 1.0, &mut rng)?;
        let hill_k = hill(&h, k)?;
        let fit = ml_fit(family, &h, k)?;
        let ll = |g: f64| family_log_likelihood(family, g, &h, k).map(|v| v.to_f64()).unwrap_or(f64::NEG_INFINITY);
        let argmax = golden_max(ll, 0.25 * hill_k, 4.0 * hill_k);
        worst = worst.max((fit - hill_k).abs()).max((argmax - hill_k).abs());
    }
    let model = DensityModel::new(DistributionSpec::Exponential { gamma: 0.5 })?;
    let mass = integrate_quadrant(|a, b| permuted_density(&model, &[a, b]).unwrap_or(f64::NAN), 1e-9);
    check(
        worst <= 1e-6 && (mass - 1.0).abs() <= 1e-4,
        format!("max |ML - Hill| over 20 datasets {worst:.1e}; permuted density mass {mass:.7}"),
    )
}

fn small_configs() -> Vec<ExperimentConfig> {
    ExperimentKind::ALL
        .into_iter()
        .map(|kind| {
            let mut cfg = ExperimentConfig::defaults(kind);
            cfg.master_seed = 4242;
            match kind {
                ExperimentKind::VarianceCurve => {
                    cfg.n = 300;
                    cfg.reps = 200;
                }
                ExperimentKind::HillPlot => {
                    cfg.n = 300;
                    cfg.reps = 16;
                }
                ExperimentKind::Coverage => {
                    cfg.n = 300;
                    cfg.reps = 64;
                    cfg.k_grid = experiments::log_spaced_grid(10, 300, 12);
                }
                ExperimentKind::Theorem1Ks | ExperimentKind::Theorem2Moments => {
                    cfg.n_grid = vec![2, 30, 300];
                    cfg.reps = 3000;
                }
                ExperimentKind::LdCheck => {
                    cfg.k_grid = vec![5, 20, 200];
                    cfg.reps = 20_000;
                }
            }
            cfg
        })
        .collect()
}

fn split_merge<E: Experiment>(e: &E, runner: &Runner) -> renyi_tail::Result<ReportTable> {
    let total = e.replications();
    let mut reps = replicate_range(e, 0..total / 2, runner)?;
    reps.extend(replicate_range(e, total / 2..total, runner)?);
    e.summarize(reps)
}

fn determinism() -> Outcome {
    let mut checked = Vec::new();
    for cfg in small_configs() {
        let reference = experiments::run(&cfg, &Runner::new(1))?;
        for workers in [4, 8] {
            let other = experiments::run(&cfg, &Runner::new(workers))?;
            if !reference.same_data(&other) {
                return Err(Fail(format!("{} differs with {workers} workers", cfg.experiment)));
            }
        }
        let runner = Runner::new(4);
        let merged = match cfg.experiment {
            ExperimentKind::VarianceCurve => Some(split_merge(&VarianceCurve::new(cfg.clone())?, &runner)?),
            ExperimentKind::HillPlot => Some(split_merge(&HillPlot::new(cfg.clone())?, &runner)?),
            ExperimentKind::Coverage => Some(split_merge(&Coverage::new(cfg.clone())?, &runner)?),
            ExperimentKind::Theorem1Ks => Some(split_merge(&Theorem1Ks::new(cfg.clone())?, &runner)?),
            ExperimentKind::Theorem2Moments => Some(split_merge(
                &experiments::Theorem2Moments::new(cfg.clone())?,
                &runner,
            )?),
            ExperimentKind::LdCheck => None,
        };
        if let Some(m) = merged {
            if !reference.same_data(&m) {
                return Err(Fail(format!("{} split run differs from single run", cfg.experiment)));
            }
        }
        checked.push(cfg.experiment.as_str());
    }
    Ok(format!("bit-identical across 1/4/8 workers and split runs: {}", checked.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("h-minimum", h_minimum),
        ("figure-1 variance curve", variance_curve),
        ("interval coverage", coverage),
        ("pareto equivalence", pareto_equivalence),
        ("moment recursions", moment_convergence),
        ("uniform-coordinate convergence", theorem1),
        ("large-deviation rates", large_deviations),
        ("likelihood identities", likelihood),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(Fail(d)) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {}: {status} {name} ({secs:.2}s): {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
