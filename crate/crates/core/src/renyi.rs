//! Generalized Rényi statistics, the exponentiated heavy-tail sample, and
//! exact finite-`n` oracles for the law of a uniformly chosen coordinate.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{domain, param, Error, Result};
use crate::rand_models::{DistributionSpec, Permutation};

/// `x[k] = Σ_{j≤k} z[j] / (n + 1 − j)` together with its generating spacings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenyiSample {
    n: usize,
    z: Vec<f64>,
    x: Vec<f64>,
}

impl RenyiSample {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }
}

/// Ordered heavy-tailed sample `W_{k,n} = C·exp(X_{k,n})` with `W_{0,n} = C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeavySample {
    scale_c: f64,
    w: Vec<f64>,
}

impl HeavySample {
    /// Wraps observed order statistics. Requires `C > 0` and
    /// `C ≤ w[0] ≤ w[1] ≤ …`.
    pub fn from_order_statistics(w: Vec<f64>, scale_c: f64) -> Result<Self> {
        if !(scale_c > 0.0 && scale_c.is_finite()) {
            return Err(param(format!("scale C must be positive, got {scale_c}")));
        }
        if w.is_empty() {
            return Err(domain("heavy sample must be nonempty"));
        }
        let mut prev = scale_c;
        for (i, &v) in w.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(domain(format!("W[{}] = {v} is not a positive finite value", i + 1)));
            }
            if v < prev {
                return Err(Error::ModelViolation(format!(
                    "W[{}] = {v} is below its predecessor {prev}",
                    i + 1
                )));
            }
            prev = v;
        }
        Ok(Self { scale_c, w })
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn scale_c(&self) -> f64 {
        self.scale_c
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// `W_{m,n}` with one-based `m`; `m = 0` gives `C`.
    pub fn order_stat(&self, m: usize) -> f64 {
        if m == 0 {
            self.scale_c
        } else {
            self.w[m - 1]
        }
    }

    /// The block `(W_{n−k,n}, …, W_{n,n})`, `k + 1` values, with `W_{0,n} = C`.
    pub fn top_block(&self, k: usize) -> Result<Vec<f64>> {
        let n = self.n();
        if k == 0 || k > n {
            return Err(domain(format!("k = {k} outside 1..={n}")));
        }
        Ok((n - k..=n).map(|m| self.order_stat(m)).collect())
    }
}

/// Builds `X_{k,n}` from spacings by a left-to-right prefix sum.
pub fn generalized_renyi(z: &[f64]) -> Result<RenyiSample> {
    let n = z.len();
    if n == 0 {
        return Err(domain("generalized Rényi statistics need at least one spacing"));
    }
    let mut x = Vec::with_capacity(n);
    let mut acc = 0.0;
    for (j, &zj) in z.iter().enumerate() {
        acc += zj / (n - j) as f64;
        x.push(acc);
    }
    Ok(RenyiSample {
        n,
        z: z.to_vec(),
        x,
    })
}

pub fn heavy_sample(r: &RenyiSample, scale_c: f64) -> Result<HeavySample> {
    if !(scale_c > 0.0 && scale_c.is_finite()) {
        return Err(param(format!("scale C must be positive, got {scale_c}")));
    }
    if let Some(j) = r.z.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::ModelViolation(format!(
            "spacing Z[{}] = {} is negative; the model needs nonnegative spacings",
            j + 1,
            r.z[j]
        )));
    }
    let w = r.x.iter().map(|&x| scale_c * x.exp()).collect();
    Ok(HeavySample { scale_c, w })
}

/// `ẑ[k] = (n − k + 1)(log W_{k,n} − log W_{k−1,n})`, `k = 1..n`.
pub fn scaled_log_spacings(h: &HeavySample) -> Vec<f64> {
    let n = h.n();
    let mut prev = h.scale_c.ln();
    h.w.iter()
        .enumerate()
        .map(|(i, &w)| {
            let lw = w.ln();
            let s = (n - i) as f64 * (lw - prev);
            prev = lw;
            s
        })
        .collect()
}

/// `output[i] = x[perm[i]]`.
pub fn permuted_view(r: &RenyiSample, perm: &Permutation) -> Result<Vec<f64>> {
    if perm.len() != r.n {
        return Err(domain(format!(
            "permutation has length {}, sample has {}",
            perm.len(),
            r.n
        )));
    }
    Ok(perm.as_slice().iter().map(|&i| r.x[i]).collect())
}

/// Draws `n` spacings from `spec` and returns the Rényi sample with its
/// heavy-tailed image at scale `C`.
pub fn simulate<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    n: usize,
    scale_c: f64,
    rng: &mut R,
) -> Result<(RenyiSample, HeavySample)> {
    if !spec.is_spacing_law() {
        return Err(param(format!("{spec} is not a spacing law")));
    }
    let z = spec.sample_vec(rng, n);
    let r = generalized_renyi(&z)?;
    let h = heavy_sample(&r, scale_c)?;
    Ok((r, h))
}

/// Characteristic function of `X_{δ₁,n}`, a uniformly chosen coordinate:
/// `ψ_n(t) = (1/n) Σ_{m=1}^n Π_{j=1}^m φ(t/(n+1−j))`, by running product.
pub fn psi_n(spec: &DistributionSpec, n: usize, t: f64) -> Result<Complex64> {
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    if !spec.is_spacing_law() {
        return Err(Error::NotImplemented(format!("psi_n for {spec}")));
    }
    let mut product = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 1..=n {
        product *= spec.characteristic_function(t / (n + 1 - j) as f64)?;
        sum += product;
    }
    Ok(sum / n as f64)
}

/// `m[k][ν] = E X_{δ₁,ν}^k` for `k = 1..=k_max`, `ν = 1..=n`; row `k − 1`,
/// column `ν − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    rows: Vec<Vec<f64>>,
}

impl MomentTable {
    /// `E X_{δ₁,ν}^k` (both indices one-based).
    pub fn get(&self, k: usize, nu: usize) -> f64 {
        self.rows[k - 1][nu - 1]
    }

    pub fn k_max(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

fn spacing_moments(spec: &DistributionSpec, k_max: usize) -> Result<Vec<f64>> {
    (0..=k_max as u32).map(|k| spec.moment(k)).collect()
}

fn binomial_rows(k_max: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for k in 1..=k_max {
        let prev = &rows[k - 1];
        let mut row = vec![1.0; k + 1];
        for j in 1..k {
            row[j] = prev[j - 1] + prev[j];
        }
        rows.push(row);
    }
    rows
}

/// One step of the moment recursion: column `ν` from column `ν − 1`
/// (`prev[j−1] = m_{j,ν−1}`).
fn moment_step(mu: &[f64], binom: &[Vec<f64>], nu: usize, prev: &[f64], out: &mut [f64]) {
    let nuf = nu as f64;
    let carry = (nuf - 1.0) / nuf;
    for k in 1..=out.len() {
        let mut mixed = 0.0;
        for j in 1..k {
            mixed += binom[k][j] * nuf.powi(-((k - j) as i32)) * mu[k - j] * prev[j - 1];
        }
        out[k - 1] = mu[k] / nuf.powi(k as i32) + carry * (prev[k - 1] + mixed);
    }
}

/// Exact moments of `X_{δ₁,ν}` by the recursion on `ν`, starting from
/// `m_{k,1} = μ_k`.
pub fn moment_recursion(spec: &DistributionSpec, k_max: usize, n: usize) -> Result<MomentTable> {
    if k_max == 0 || n == 0 {
        return Err(domain("k_max and n must be positive"));
    }
    let mu = spacing_moments(spec, k_max)?;
    let binom = binomial_rows(k_max);
    let mut rows = vec![Vec::with_capacity(n); k_max];
    let mut column: Vec<f64> = mu[1..].to_vec();
    let mut next = vec![0.0; k_max];
    for (k, row) in rows.iter_mut().enumerate() {
        row.push(column[k]);
    }
    for nu in 2..=n {
        moment_step(&mu, &binom, nu, &column, &mut next);
        std::mem::swap(&mut column, &mut next);
        for (k, row) in rows.iter_mut().enumerate() {
            row.push(column[k]);
        }
    }
    Ok(MomentTable { rows })
}

/// Column `ν = n` of [`moment_recursion`] in `O(k_max)` memory.
pub fn moments_at(spec: &DistributionSpec, k_max: usize, n: usize) -> Result<Vec<f64>> {
    if k_max == 0 || n == 0 {
        return Err(domain("k_max and n must be positive"));
    }
    let mu = spacing_moments(spec, k_max)?;
    let binom = binomial_rows(k_max);
    let mut column: Vec<f64> = mu[1..].to_vec();
    let mut next = vec![0.0; k_max];
    for nu in 2..=n {
        moment_step(&mu, &binom, nu, &column, &mut next);
        std::mem::swap(&mut column, &mut next);
    }
    Ok(column)
}

/// `C_ν = E(X_{δ₁,ν} X_{δ₂,ν})` for `ν = 2..=n`; element `ν − 2`.
pub fn cross_moment_recursion(spec: &DistributionSpec, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(domain("cross moments need n >= 2"));
    }
    let gamma = spec.moment(1)?;
    let mu2 = spec.moment(2)?;
    let mut out = Vec::with_capacity(n - 1);
    let mut c = mu2 / 4.0 + gamma * gamma / 2.0;
    out.push(c);
    for nu in 3..=n {
        let nuf = nu as f64;
        c = mu2 / (nuf * nuf) + 2.0 * (gamma / nuf) * (gamma - gamma / nuf) + c * (nuf - 2.0) / nuf;
        out.push(c);
    }
    Ok(out)
}
