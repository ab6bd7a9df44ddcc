use proptest::prelude::*;
use rand::Rng;

use renyi_tail::estimators::{h_function, h_minimizer, hill, quantile_estimator};
use renyi_tail::experiments::{self, ExperimentConfig, ExperimentKind, Runner};
use renyi_tail::large_deviations::rate_function;
use renyi_tail::likelihood::{family_log_likelihood, ml_fit, ModelFamily};
use renyi_tail::renyi::{generalized_renyi, heavy_sample, moments_at, simulate};
use renyi_tail::special::normal_cdf;
use renyi_tail::stats::{ks_critical_value, ks_statistic, mean, sample_variance};
use renyi_tail::{DistributionSpec, HeavySample, SeedSpec, StreamRng};

fn rng(seed: u64) -> StreamRng {
    StreamRng::new(SeedSpec::new(seed, 0))
}

#[test]
fn hill_clt_at_k_equal_n() {
    let n = 2000;
    for (i, spec) in [DistributionSpec::uniform(0.5), DistributionSpec::exponential(0.5)]
        .into_iter()
        .enumerate()
    {
        let spec = spec.unwrap();
        let sd = spec.variance().unwrap().sqrt();
        let mut r = rng(100 + i as u64);
        let z: Vec<f64> = (0..10_000)
            .map(|_| {
                let (_, h) = simulate(&spec, n, 1.0, &mut r).unwrap();
                (n as f64).sqrt() * (hill(&h, n).unwrap() - 0.5) / sd
            })
            .collect();
        let d = ks_statistic(&z, normal_cdf);
        assert!(d < ks_critical_value(0.01, z.len()), "{spec}: D = {d}");
    }
}

#[test]
fn quantile_estimator_variance_near_h() {
    let n = 1000;
    let (s0, h0) = h_minimizer();
    let spec = DistributionSpec::exponential(0.5).unwrap();
    let mut r = rng(200);
    let est: Vec<f64> = (0..10_000)
        .map(|_| {
            let (x, _) = simulate(&spec, n, 1.0, &mut r).unwrap();
            (n as f64).sqrt() * (quantile_estimator(&x, s0).unwrap() - 0.5) / 0.5
        })
        .collect();
    let ratio = sample_variance(&est) / h0;
    assert!((ratio - 1.0).abs() < 0.07, "ratio {ratio}");
    assert!((h_function(s0).unwrap() - h0).abs() < 1e-12);
}

#[test]
fn moment_recursion_agrees_with_simulation() {
    let n = 500;
    for spec in [DistributionSpec::uniform(0.5).unwrap(), DistributionSpec::bernoulli(0.5).unwrap()] {
        let exact = moments_at(&spec, 2, n).unwrap();
        let mut r = rng(300);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                let m = r.random_range(0..n);
                let z = spec.sample_vec(&mut r, m + 1);
                z.iter().enumerate().map(|(j, v)| v / (n - j) as f64).sum::<f64>()
            })
            .collect();
        let sq: Vec<f64> = draws.iter().map(|x| x * x).collect();
        for (k, xs) in [draws, sq].iter().enumerate() {
            let se = (sample_variance(xs) / xs.len() as f64).sqrt();
            let gap = (mean(xs) - exact[k]).abs();
            assert!(gap < 4.0 * se, "{spec} moment {}: gap {gap} se {se}", k + 1);
        }
    }
}

#[test]
fn theorem1_ks_shrinks_with_n() {
    let cfg = ExperimentConfig::defaults(ExperimentKind::Theorem1Ks);
    let table = experiments::run(&cfg, &Runner::new(4)).unwrap();
    let ks = table.column("ks").unwrap();
    let n_col = table.column("n").unwrap();
    let corr = table.column("corr").unwrap();
    let (mc, se, exact) = (
        table.column("cross_moment_mc").unwrap(),
        table.column("cross_moment_se").unwrap(),
        table.column("cross_moment_exact").unwrap(),
    );
    let noise = 2.0 / (cfg.reps as f64).sqrt();
    let per_law = cfg.n_grid.len();
    for law in ks.chunks(per_law) {
        for pair in law.windows(2) {
            assert!(pair[1].unwrap() <= pair[0].unwrap() + noise, "{law:?}");
        }
    }
    for i in 0..n_col.len() {
        if n_col[i] == Some(2000.0) {
            assert!(corr[i].unwrap().abs() < 0.02, "corr {:?}", corr[i]);
        }
        assert!((mc[i].unwrap() - exact[i].unwrap()).abs() < 4.0 * se[i].unwrap());
    }
    assert_eq!(table.meta.config["reps"], cfg.reps);
    assert_eq!(table.meta.master_seed, Some(cfg.master_seed));
}

#[test]
fn ml_fit_beats_grid() {
    let mut r = rng(400);
    for (family, spec) in [
        (ModelFamily::Exponential, DistributionSpec::exponential(0.5).unwrap()),
        (ModelFamily::GammaFixedR(2.0), DistributionSpec::gamma(2.0, 0.5).unwrap()),
        (ModelFamily::Uniform, DistributionSpec::uniform(0.5).unwrap()),
    ] {
        let (_, h) = simulate(&spec, 400, 1.0, &mut r).unwrap();
        let k = 100;
        let fit = ml_fit(family, &h, k).unwrap();
        let best = family_log_likelihood(family, fit, &h, k).unwrap().to_f64();
        for i in 1..=200 {
            let g = 0.2 + 0.6 * i as f64 / 200.0;
            let ll = family_log_likelihood(family, g, &h, k).unwrap().to_f64();
            assert!(ll <= best + 1e-9, "{family}: {g} gives {ll} > {best}");
        }
    }
}

#[test]
fn sampler_matches_cdf() {
    for spec in [
        DistributionSpec::gamma(2.0, 0.5).unwrap(),
        DistributionSpec::strict_pareto(0.5, 1.0).unwrap(),
        DistributionSpec::HallPerturbedPareto,
    ] {
        let xs = spec.sample_vec(&mut rng(500), 100_000);
        let d = ks_statistic(&xs, |x| spec.cdf(x));
        assert!(d < ks_critical_value(0.01, xs.len()), "{spec}: D = {d}");
    }
}

proptest! {
    #[test]
    fn hill_is_average_of_top_spacings(
        z in prop::collection::vec(0.0f64..5.0, 2..300),
        c in 0.1f64..10.0,
        frac in 0.0f64..1.0,
    ) {
        let n = z.len();
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        let h = heavy_sample(&generalized_renyi(&z).unwrap(), c).unwrap();
        let direct = z[n - k..].iter().sum::<f64>() / k as f64;
        prop_assert!((hill(&h, k).unwrap() - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn hill_ignores_scale(
        z in prop::collection::vec(0.0f64..5.0, 2..100),
        factor in 1e-3f64..1e3,
    ) {
        let h = heavy_sample(&generalized_renyi(&z).unwrap(), 1.0).unwrap();
        let w: Vec<f64> = h.w().iter().map(|w| w * factor).collect();
        let scaled = HeavySample::from_order_statistics(w, factor).unwrap();
        let k = z.len();
        let (a, b) = (hill(&h, k).unwrap(), hill(&scaled, k).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn rate_is_convex(g in 0.1f64..2.0, a in 0.05f64..0.95, b in 0.05f64..0.95, lam in 0.0f64..1.0) {
        for spec in [DistributionSpec::uniform(g).unwrap(), DistributionSpec::exponential(g).unwrap()] {
            let (lo, hi) = (a.min(b) * 2.0 * g, a.max(b) * 2.0 * g);
            let mid = lam * lo + (1.0 - lam) * hi;
            let f = |z: f64| rate_function(&spec, z).unwrap().to_f64();
            prop_assert!(f(mid) <= lam * f(lo) + (1.0 - lam) * f(hi) + 1e-9);
            prop_assert!(f(mid) >= 0.0);
        }
    }
}
