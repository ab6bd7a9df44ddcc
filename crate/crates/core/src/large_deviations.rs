//! Cramér rate functions for the Hill estimator and tail-probability oracles.
//!
//! Under the heavy-tail model `k·γ̂(k)` is a sum of `k` iid spacings, so
//! `(1/k) log P(γ̂ ≥ y) → −inf_{x≥y} I(x)` with `I` the Legendre transform of
//! the spacing law's cumulant generating function.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, param, Error, Result};
use crate::rand_models::{DistributionSpec, SeedSpec, StreamRng};
use crate::special::ln_gamma_q;
use crate::Extended;

/// Rate function evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateQuery {
    pub spec: DistributionSpec,
    pub z: f64,
}

impl RateQuery {
    /// Open interval on which `M(t) < ∞`.
    pub fn t_domain(&self) -> Option<(f64, f64)> {
        self.spec.mgf_domain()
    }

    pub fn evaluate(&self) -> Result<Extended> {
        rate_function(&self.spec, self.z)
    }
}

/// `I(z) = sup_t (z t − log M(t))`.
///
/// The supremum is attained where the tilted mean `κ'(t)` equals `z`; the
/// root is bracketed by geometric steps towards the edge of the mgf domain
/// (never evaluating the edge itself) and refined by bisection to machine
/// precision. Points outside the support hull give `+∞`.
pub fn rate_function(spec: &DistributionSpec, z: f64) -> Result<Extended> {
    spec.validate()?;
    let Some((_, t_max)) = spec.mgf_domain() else {
        return Err(Error::Unsupported(format!(
            "{spec} has no finite mgf in a neighbourhood of 0"
        )));
    };
    if z.is_nan() {
        return Err(domain("rate function argument is NaN"));
    }
    let gamma = spec.gamma_param();
    let (lo, hi) = spec.support_hull();
    if z < lo || z > hi {
        return Ok(Extended::PosInfinity);
    }
    if z == gamma {
        return Ok(Extended::Finite(0.0));
    }
    if z == lo || z == hi {
        return Ok(edge_rate(spec, z));
    }

    let tilt = |t: f64| spec.cgf_derivative(t);
    let (mut below, mut above) = if z > gamma {
        let mut step = 1.0;
        let mut t = 0.0;
        loop {
            let candidate = if t_max.is_finite() {
                t_max * (1.0 - step)
            } else {
                1.0 / step
            };
            if tilt(candidate)? >= z {
                break (t, candidate);
            }
            t = candidate;
            step *= 0.5;
            if step < 1e-300 {
                return Ok(Extended::PosInfinity);
            }
        }
    } else {
        let mut t = 0.0;
        let mut candidate = -1.0;
        loop {
            if tilt(candidate)? <= z {
                break (candidate, t);
            }
            t = candidate;
            candidate *= 2.0;
            if candidate < -1e300 {
                return Ok(Extended::PosInfinity);
            }
        }
    };
    for _ in 0..2000 {
        let mid = 0.5 * (below + above);
        if mid <= below || mid >= above {
            break;
        }
        if tilt(mid)? < z {
            below = mid;
        } else {
            above = mid;
        }
    }
    // The objective is flat at the optimum; take the better endpoint.
    let objective = |t: f64| -> Result<f64> { Ok(z * t - spec.cgf(t)?.to_f64()) };
    let value = objective(below)?.max(objective(above)?);
    Ok(Extended::Finite(value.max(0.0)))
}

/// Rate at an endpoint of the support hull: finite only at the atoms of a
/// lattice law.
fn edge_rate(spec: &DistributionSpec, z: f64) -> Extended {
    match *spec {
        DistributionSpec::Bernoulli { gamma } => {
            let p = if z >= 1.0 { gamma } else { 1.0 - gamma };
            if p > 0.0 {
                Extended::Finite(-p.ln())
            } else {
                Extended::PosInfinity
            }
        }
        _ => Extended::PosInfinity,
    }
}

/// Large-deviation limit `−inf_{x≥y} I(x)` of `(1/k) log P(γ̂ ≥ y)`.
pub fn upper_tail_rate(spec: &DistributionSpec, y: f64) -> Result<Extended> {
    if y <= spec.gamma_param() {
        return Ok(Extended::Finite(0.0));
    }
    Ok(match rate_function(spec, y)? {
        Extended::Finite(v) => Extended::Finite(-v),
        _ => Extended::NegInfinity,
    })
}

fn check_rate_args(r: f64, c: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(param(format!("r must be positive, got {r}")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(domain(format!("c must lie in (0,1), got {c}")));
    }
    Ok(())
}

/// Limits of `(1/k) log P(γ̂/γ ≥ 1 + c)` and `(1/k) log P(γ̂/γ ≤ 1 − c)` for
/// gamma(r, r/γ) spacings: `(−rc + r log(1+c), rc + r log(1−c))`.
pub fn gamma_family_rates(r: f64, c: f64) -> Result<(f64, f64)> {
    check_rate_args(r, c)?;
    Ok((r * (c.ln_1p() - c), r * (c + (-c).ln_1p())))
}

/// The same limits for the Hill estimator under an iid strict Pareto sample.
pub fn iid_comparison_rates(c: f64) -> Result<(f64, f64)> {
    gamma_family_rates(1.0, c)
}

/// Exact `log P(γ̂(k) ≥ y)` under exponential or gamma spacings, where
/// `k·γ̂ ~ Gamma(k r, rate r/γ)`.
pub fn exact_hill_tail(spec: &DistributionSpec, k: usize, y: f64) -> Result<f64> {
    spec.validate()?;
    let (r, gamma) = match *spec {
        DistributionSpec::Exponential { gamma } => (1.0, gamma),
        DistributionSpec::Gamma { r, gamma } => (r, gamma),
        _ => {
            return Err(Error::Unsupported(format!(
                "exact Hill tail needs exponential or gamma spacings, got {spec}"
            )))
        }
    };
    if k == 0 {
        return Err(domain("k must be positive"));
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    ln_gamma_q(kf * r, kf * y * r / gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McTailEstimate {
    /// `(1/k) log(events / reps)`.
    pub estimate: f64,
    /// Delta-method standard error of `estimate`.
    pub std_error: f64,
    pub events: u64,
    pub reps: u64,
}

/// Events the raw Monte Carlo estimator must expect before it is trusted.
pub const MIN_EXPECTED_EVENTS: f64 = 100.0;

/// Raw Monte Carlo estimate of `(1/k) log P(γ̂(k) ≥ y)`, where replication
/// `i` draws `k` spacings on stream `seed.stream_index + i`.
///
/// Refuses to run when `reps·exp(−k I(y))` is below [`MIN_EXPECTED_EVENTS`].
pub fn mc_tail_logprob(
    spec: &DistributionSpec,
    k: usize,
    y: f64,
    reps: u64,
    seed: SeedSpec,
) -> Result<McTailEstimate> {
    spec.validate()?;
    if !spec.is_spacing_law() {
        return Err(param(format!("{spec} is not a spacing law")));
    }
    if k == 0 || reps == 0 {
        return Err(domain("k and reps must be positive"));
    }
    if y <= 0.0 {
        return Ok(McTailEstimate {
            estimate: 0.0,
            std_error: 0.0,
            events: reps,
            reps,
        });
    }
    let log_rate = upper_tail_rate(spec, y)?.to_f64();
    let expected = reps as f64 * (k as f64 * log_rate).exp();
    if !(expected >= MIN_EXPECTED_EVENTS) {
        return Err(Error::InsufficientEvents {
            expected,
            observed: 0,
        });
    }
    let threshold = y * k as f64;
    let events: u64 = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = StreamRng::new(SeedSpec::new(
                seed.master_seed,
                seed.stream_index.wrapping_add(i),
            ));
            let sum: f64 = spec.sample_vec(&mut rng, k).iter().sum();
            u64::from(sum >= threshold)
        })
        .sum();
    if events == 0 {
        return Err(Error::InsufficientEvents {
            expected,
            observed: 0,
        });
    }
    let p = events as f64 / reps as f64;
    Ok(McTailEstimate {
        estimate: p.ln() / k as f64,
        std_error: ((1.0 - p) / (p * reps as f64)).sqrt() / k as f64,
        events,
        reps,
    })
}

/// Hill estimate at `k` drawn directly as the mean of `k` spacings.
pub fn draw_hill_mean<R: Rng + ?Sized>(spec: &DistributionSpec, k: usize, rng: &mut R) -> f64 {
    spec.sample_vec(rng, k).iter().sum::<f64>() / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(e: Extended) -> f64 {
        e.finite().expect("finite rate")
    }

    #[test]
    fn rate_zero_at_mean() {
        for spec in [
            DistributionSpec::exponential(0.5).unwrap(),
            DistributionSpec::uniform(0.5).unwrap(),
            DistributionSpec::bernoulli(0.3).unwrap(),
            DistributionSpec::gamma(2.0, 1.0).unwrap(),
        ] {
            assert_eq!(rate_function(&spec, spec.gamma_param()).unwrap(), Extended::Finite(0.0));
            let near = finite(rate_function(&spec, spec.gamma_param() * 1.0001).unwrap());
            assert!(near > 0.0 && near < 1e-6, "{spec}: {near}");
        }
    }

    #[test]
    fn exponential_closed_form() {
        let spec = DistributionSpec::exponential(1.0).unwrap();
        for z in [0.05, 0.5, 2.0, 10.0, 200.0] {
            let got = finite(rate_function(&spec, z).unwrap());
            let exact = z - 1.0 - z.ln();
            assert!((got - exact).abs() < 1e-10 * exact.max(1.0), "z={z}");
        }
        assert!((finite(rate_function(&spec, 2.0).unwrap()) - 0.30685).abs() < 1e-5);
        assert_eq!(rate_function(&spec, 0.0).unwrap(), Extended::PosInfinity);
        assert_eq!(rate_function(&spec, -1.0).unwrap(), Extended::PosInfinity);
    }

    #[test]
    fn gamma_closed_form_example() {
        let spec = DistributionSpec::gamma(2.0, 1.0).unwrap();
        let got = finite(rate_function(&spec, 1.5).unwrap());
        assert!((got - 2.0 * (0.5 - 1.5f64.ln())).abs() < 1e-10);
        assert!((got - 0.18907).abs() < 1e-5);
    }

    #[test]
    fn family_rate_grid() {
        for &r in &[0.5, 1.0, 2.0, 3.0, 4.0] {
            for &c in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                let gamma = 0.7;
                let spec = DistributionSpec::gamma(r, gamma).unwrap();
                let got = finite(rate_function(&spec, (1.0 + c) * gamma).unwrap());
                let (upper, _) = gamma_family_rates(r, c).unwrap();
                assert!((got + upper).abs() < 1e-8, "r={r} c={c}");
                let low = finite(rate_function(&spec, (1.0 - c) * gamma).unwrap());
                let (_, lower) = gamma_family_rates(r, c).unwrap();
                assert!((low + lower).abs() < 1e-8, "r={r} c={c} lower");
            }
        }
    }

    #[test]
    fn uniform_support_edges() {
        let spec = DistributionSpec::uniform(0.5).unwrap();
        assert_eq!(rate_function(&spec, 1.0).unwrap(), Extended::PosInfinity);
        assert_eq!(rate_function(&spec, 0.0).unwrap(), Extended::PosInfinity);
        assert_eq!(rate_function(&spec, 1.2).unwrap(), Extended::PosInfinity);
        let near_edge = finite(rate_function(&spec, 0.999).unwrap());
        assert!(near_edge > 3.0);
    }

    #[test]
    fn bernoulli_is_binary_relative_entropy() {
        let p: f64 = 0.3;
        let spec = DistributionSpec::bernoulli(p).unwrap();
        for z in [0.01, 0.1, 0.5, 0.9, 0.99] {
            let kl = z * (z / p).ln() + (1.0 - z) * ((1.0 - z) / (1.0 - p)).ln();
            let got = finite(rate_function(&spec, z).unwrap());
            assert!((got - kl).abs() < 1e-10, "z={z}: {got} vs {kl}");
        }
        assert!((finite(rate_function(&spec, 1.0).unwrap()) + p.ln()).abs() < 1e-15);
        assert!((finite(rate_function(&spec, 0.0).unwrap()) + (1.0 - p).ln()).abs() < 1e-15);
    }

    #[test]
    fn pareto_is_unsupported() {
        let spec = DistributionSpec::strict_pareto(0.5, 1.0).unwrap();
        assert!(matches!(rate_function(&spec, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rate_is_convex_and_positive() {
        for spec in [
            DistributionSpec::exponential(0.5).unwrap(),
            DistributionSpec::uniform(0.5).unwrap(),
            DistributionSpec::bernoulli(0.5).unwrap(),
            DistributionSpec::gamma(3.0, 0.5).unwrap(),
        ] {
            let (_, hi) = spec.support_hull();
            let top = if hi.is_finite() { hi } else { 3.0 };
            let grid: Vec<f64> = (1..200).map(|i| top * i as f64 / 200.0).collect();
            let values: Vec<f64> = grid.iter().map(|&z| finite(rate_function(&spec, z).unwrap())).collect();
            for w in values.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8, "{spec}");
            }
            for (&z, &v) in grid.iter().zip(&values) {
                if (z - spec.gamma_param()).abs() > 1e-9 {
                    assert!(v > 0.0, "{spec} z={z}");
                }
            }
        }
    }

    #[test]
    fn family_rate_examples() {
        let (u, l) = gamma_family_rates(1.0, 0.5).unwrap();
        assert!((u + 0.09453).abs() < 1e-5);
        assert!((l + 0.19315).abs() < 1e-5);
        assert!(gamma_family_rates(1.0, 1.0).is_err());
        assert!(gamma_family_rates(0.0, 0.5).is_err());
        let (u, l) = gamma_family_rates(1.0, 1e-8).unwrap();
        assert!(u.abs() < 1e-15 && l.abs() < 1e-15);
        for c in [0.05, 0.25, 0.5, 0.75, 0.95] {
            let one = gamma_family_rates(1.0, c).unwrap();
            let two = gamma_family_rates(2.0, c).unwrap();
            assert!((two.0 - 2.0 * one.0).abs() < 1e-15);
            assert!((two.1 - 2.0 * one.1).abs() < 1e-15);
            assert_eq!(iid_comparison_rates(c).unwrap(), one);
        }
        let (u, _) = iid_comparison_rates(0.9).unwrap();
        assert!((u + 0.25815).abs() < 1e-5);
    }

    #[test]
    fn exact_tail_examples() {
        let exp = DistributionSpec::exponential(1.0).unwrap();
        assert!((exact_hill_tail(&exp, 1, 2.0).unwrap() + 2.0).abs() < 1e-13);
        let r200 = exact_hill_tail(&exp, 200, 2.0).unwrap() / 200.0;
        assert!((r200 + (1.0 - 2f64.ln())).abs() < 0.02, "{r200}");
        let g = DistributionSpec::gamma(2.0, 1.0).unwrap();
        let r100 = exact_hill_tail(&g, 100, 1.5).unwrap() / 100.0;
        assert!((r100 + 0.18907).abs() < 0.03, "{r100}");
        assert_eq!(exact_hill_tail(&exp, 10, -1.0).unwrap(), 0.0);
        assert!(exact_hill_tail(&DistributionSpec::uniform(0.5).unwrap(), 3, 1.0).is_err());
    }

    #[test]
    fn exact_tail_against_mpmath() {
        // Reference values from mpmath's regularized upper incomplete gamma.
        let exp = DistributionSpec::exponential(1.0).unwrap();
        let cases = [
            (50, -0.36512961334183586),
            (100, -0.3392689694513168),
            (200, -0.3247444270609246),
            (400, -0.31665239474469214),
        ];
        for (k, reference) in cases {
            let got = exact_hill_tail(&exp, k, 2.0).unwrap() / k as f64;
            assert!((got - reference).abs() < 1e-12 * reference.abs(), "k={k}");
        }
        let g = DistributionSpec::gamma(2.0, 1.0).unwrap();
        let got = exact_hill_tail(&g, 100, 1.5).unwrap() / 100.0;
        assert!((got + 0.21810610863624894).abs() < 1e-12);
    }

    #[test]
    fn exact_tail_converges_to_rate() {
        let exp = DistributionSpec::exponential(0.5).unwrap();
        let c = 0.6;
        let limit = -finite(rate_function(&exp, (1.0 + c) * 0.5).unwrap());
        let mut last_gap = f64::INFINITY;
        for k in [50usize, 100, 200, 400] {
            let v = exact_hill_tail(&exp, k, (1.0 + c) * 0.5).unwrap() / k as f64;
            let gap = (v - limit).abs();
            assert!(gap <= 2.0 * (k as f64).ln() / k as f64, "k={k} gap={gap}");
            assert!(gap < last_gap);
            last_gap = gap;
        }
    }

    /// P(U₁ + … + U_n ≥ s) for iid Uniform(0,1), from the Irwin–Hall CDF.
    fn irwin_hall_upper(n: u32, s: f64) -> f64 {
        let mut cdf = 0.0;
        let mut binom = 1.0;
        let mut fact = 1.0;
        for i in 1..=n {
            fact *= i as f64;
        }
        for j in 0..=(s.floor() as u32) {
            if j > 0 {
                binom *= (n - j + 1) as f64 / j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            cdf += sign * binom * (s - j as f64).powi(n as i32);
        }
        1.0 - cdf / fact
    }

    #[test]
    fn mc_tail_matches_irwin_hall() {
        let spec = DistributionSpec::uniform(0.5).unwrap();
        let (k, y) = (20, 0.6);
        let est = mc_tail_logprob(&spec, k, y, 1_000_000, SeedSpec::new(41, 0)).unwrap();
        let exact = irwin_hall_upper(20, 12.0).ln() / 20.0;
        assert!((exact + 0.13987996363694213).abs() < 1e-9);
        assert!((est.estimate - exact).abs() < 4.0 * est.std_error, "{est:?} vs {exact}");
        // The finite-k value sits well below the limit −I(0.6) at k = 20.
        let limit = upper_tail_rate(&spec, y).unwrap().to_f64();
        assert!((limit + 0.060738685566729456).abs() < 1e-9);
    }

    #[test]
    fn mc_tail_edge_cases() {
        let spec = DistributionSpec::uniform(0.5).unwrap();
        let sure = mc_tail_logprob(&spec, 5, 0.0, 10, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(sure.estimate, 0.0);
        let rare = mc_tail_logprob(&spec, 200, 0.9, 1000, SeedSpec::new(1, 0));
        assert!(matches!(rare, Err(Error::InsufficientEvents { .. })));
    }

    #[test]
    fn mc_tail_is_deterministic() {
        let spec = DistributionSpec::bernoulli(0.5).unwrap();
        let a = mc_tail_logprob(&spec, 10, 0.7, 20_000, SeedSpec::new(9, 3)).unwrap();
        let b = mc_tail_logprob(&spec, 10, 0.7, 20_000, SeedSpec::new(9, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn upper_tail_rate_below_mean_is_zero() {
        let spec = DistributionSpec::exponential(1.0).unwrap();
        assert_eq!(upper_tail_rate(&spec, 0.5).unwrap(), Extended::Finite(0.0));
        assert_eq!(
            upper_tail_rate(&DistributionSpec::uniform(0.5).unwrap(), 1.5).unwrap(),
            Extended::NegInfinity
        );
    }
}
