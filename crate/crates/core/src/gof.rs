//! Goodness-of-fit tests of the switching models from complete samples of
//! system, hot and warm failure times.
//!
//! The test compares two estimators of the system CDF: the empirical CDF of
//! the observed systems and a plug-in of the model formula
//! `F⁽²⁾(t) = ∫₀ᵗ F₁(t + g(y) − y) dF₁(y)` built from the hot and warm
//! samples. The normed area between them, `X`, is asymptotically centred
//! normal; `Y² = X²/σ̂²` is referred to χ²(1).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{chi2_1_quantile, chi2_1_sf, normal_pdf};
use crate::step::StepFn;

/// Kernel density values below this are reported instead of divided by.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// `σ̂²` below this fraction of the squared data scale counts as zero.
const DEGENERATE_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// General equivalent-time model, `g(y) = F₁⁻¹(F₂(y))`.
    #[serde(rename = "h0")]
    H0,
    /// Scale model, `g(y) = r·y`.
    #[serde(rename = "h0star")]
    H0Star,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::H0 => "h0",
            Self::H0Star => "h0star",
        })
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h0" => Ok(Self::H0),
            "h0star" | "h0*" => Ok(Self::H0Star),
            other => invalid(format!("unknown hypothesis '{other}' (expected h0 or h0star)")),
        }
    }
}

/// Complete samples: `n` systems with one stand-by unit, `n₁` hot units and
/// `n₂` warm units. All three are kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofData {
    systems: Vec<f64>,
    hot: Vec<f64>,
    warm: Vec<f64>,
}

impl GofData {
    pub fn new(systems: Vec<f64>, hot: Vec<f64>, warm: Vec<f64>) -> Result<Self> {
        Ok(Self {
            systems: sorted_sample("system", systems)?,
            hot: sorted_sample("hot", hot)?,
            warm: sorted_sample("warm", warm)?,
        })
    }

    pub fn systems(&self) -> &[f64] {
        &self.systems
    }

    pub fn hot(&self) -> &[f64] {
        &self.hot
    }

    pub fn warm(&self) -> &[f64] {
        &self.warm
    }

    /// Multiply every failure time by `a`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        let scale = |v: &[f64]| v.iter().map(|x| a * x).collect::<Vec<_>>();
        Self::new(scale(&self.systems), scale(&self.hot), scale(&self.warm))
    }

    fn require_pairs(&self) -> Result<()> {
        if self.systems.len() < 2 || self.hot.len() < 2 || self.warm.len() < 2 {
            return invalid("variance estimation needs at least two observations per sample");
        }
        Ok(())
    }
}

fn sorted_sample(name: &str, mut v: Vec<f64>) -> Result<Vec<f64>> {
    if v.is_empty() {
        return invalid(format!("{name} sample is empty"));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return invalid(format!("{name} failure times must be finite and positive"));
    }
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub hypothesis: Hypothesis,
    pub x_stat: f64,
    pub sigma2_hat: f64,
    pub yn2: f64,
    pub alpha: f64,
    pub threshold: f64,
    pub p_value: f64,
    pub reject: bool,
}

pub fn ecdf(sample: &[f64]) -> Result<StepFn> {
    StepFn::ecdf(sample)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn centred_sum_sq(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum()
}

/// Prefix sums `[0, v₀, v₀ + v₁, …]`.
fn prefix_sums(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for x in v {
        acc += x;
        out.push(acc);
    }
    out
}

/// Empirical equivalent time `ĝ(y) = F̂₁⁻¹(F̂₂(y))` with the generalised
/// inverse `inf{s : F̂₁(s) >= p}`; zero while `F̂₂(y) = 0`.
#[derive(Debug, Clone)]
pub struct EquivalentTimeH0 {
    f1: StepFn,
    f2: StepFn,
}

impl EquivalentTimeH0 {
    pub fn new(hot: &[f64], warm: &[f64]) -> Result<Self> {
        Ok(Self {
            f1: StepFn::ecdf(hot)?,
            f2: StepFn::ecdf(warm)?,
        })
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.f1.quantile(self.f2.eval(y))
    }

    /// `ĝ⁻¹(x) = F̂₂⁻¹(F̂₁(x))`.
    pub fn inverse(&self, x: f64) -> f64 {
        self.f2.quantile(self.f1.eval(x))
    }
}

pub fn ghat_h0(hot: &[f64], warm: &[f64], y: f64) -> Result<f64> {
    Ok(EquivalentTimeH0::new(hot, warm)?.eval(y))
}

/// Moment estimator `r̂ = μ̂₁/μ̂₂` of the scale ratio.
pub fn rhat_moments(hot: &[f64], warm: &[f64]) -> Result<f64> {
    if hot.is_empty() || warm.is_empty() {
        return invalid("moment ratio needs nonempty samples");
    }
    Ok(mean(hot) / mean(warm))
}

/// `F̂⁽²⁾(t) = (1/n₁) Σ_{T₁ⱼ <= t} F̂₁(t + ĝ(T₁ⱼ) − T₁ⱼ)` evaluated directly.
pub fn fhat2_plugin(t: f64, hot: &[f64], ghat: impl Fn(f64) -> f64) -> Result<f64> {
    let f1 = StepFn::ecdf(hot)?;
    let sum: f64 = hot
        .iter()
        .filter(|&&y| y <= t)
        .map(|&y| f1.eval(t + ghat(y) - y))
        .sum();
    Ok(sum / hot.len() as f64)
}

/// `F̂⁽²⁾` as a step function: the uniform law on the `n₁²` atoms
/// `max(T₁ⱼ, T₁ᵢ + T₁ⱼ − ĝ(T₁ⱼ))`.
pub fn fhat2_cdf(hot: &[f64], ghat: impl Fn(f64) -> f64) -> Result<StepFn> {
    if hot.is_empty() {
        return invalid("hot sample is empty");
    }
    let mut atoms = Vec::with_capacity(hot.len() * hot.len());
    for &y in hot {
        let shift = y - ghat(y);
        atoms.extend(hot.iter().map(|&x| y.max(x + shift)));
    }
    if atoms.iter().any(|a| !a.is_finite()) {
        return invalid("equivalent time is not finite");
    }
    atoms.sort_unstable_by(f64::total_cmp);
    Ok(StepFn::from_sorted_atoms(&atoms))
}

fn fhat2_for(data: &GofData, hypothesis: Hypothesis) -> Result<StepFn> {
    match hypothesis {
        Hypothesis::H0Star => {
            let r = rhat_moments(&data.hot, &data.warm)?;
            fhat2_cdf(&data.hot, |y| r * y)
        }
        Hypothesis::H0 => {
            let g = EquivalentTimeH0::new(&data.hot, &data.warm)?;
            fhat2_cdf(&data.hot, |y| g.eval(y))
        }
    }
}

/// `X = √n ∫₀^∞ [F̂⁽¹⁾(t) − F̂⁽²⁾(t)] dt`, integrated exactly over the merged
/// breakpoints.
pub fn statistic_x(data: &GofData, hypothesis: Hypothesis) -> Result<f64> {
    let f_sys = StepFn::ecdf(&data.systems)?;
    let f_model = fhat2_for(data, hypothesis)?;
    let area = StepFn::integral_of_difference(&f_sys, &f_model)?;
    Ok((data.systems.len() as f64).sqrt() * area)
}

/// `ĉ = (1/(μ̂₂ n₁)) Σ T₁ᵢ [1 − F̂₂(T₁ᵢ)]`.
pub fn chat(hot: &[f64], warm: &[f64], mu2_hat: f64) -> Result<f64> {
    let f2 = StepFn::ecdf(warm)?;
    let sum: f64 = hot.iter().map(|&x| x * (1.0 - f2.eval(x))).sum();
    Ok(sum / (mu2_hat * hot.len() as f64))
}

fn check_variance(sigma2: f64, data: &GofData) -> Result<f64> {
    let scale = mean(&data.systems).max(mean(&data.hot)).max(mean(&data.warm));
    if !sigma2.is_finite() || sigma2 <= DEGENERATE_RTOL * scale * scale {
        return Err(Error::DegenerateVariance(format!(
            "variance estimate {sigma2:e} is not positive"
        )));
    }
    Ok(sigma2)
}

/// Variance estimate of `X` under the scale model.
pub fn sigma2_h0star(data: &GofData) -> Result<f64> {
    data.require_pairs()?;
    let (hot, warm) = (&data.hot, &data.warm);
    let (n, n1, n2) = (data.systems.len() as f64, hot.len() as f64, warm.len() as f64);
    let mu2 = mean(warm);
    let r = mean(hot) / mu2;
    let c = chat(hot, warm, mu2)?;
    let f1 = StepFn::ecdf(hot)?;
    let f2 = StepFn::ecdf(warm)?;
    let hot_sums = prefix_sums(hot.iter().copied());
    let warm_sums = prefix_sums(warm.iter().copied());

    let h = |x: f64| {
        let k1 = hot.partition_point(|&t| t <= x / r);
        let k2 = warm.partition_point(|&t| t <= x);
        x * (c + r - 1.0 - f1.eval(x / r) - r * f2.eval(x)) + r * hot_sums[k1] / n1 + r * warm_sums[k2] / n2
    };
    let h_vals: Vec<f64> = hot.iter().map(|&x| h(x)).collect();

    let sigma2 = centred_sum_sq(&data.systems) / n
        + n / (n1 * n1) * centred_sum_sq(&h_vals)
        + c * c * r * r * n / (n2 * n2) * centred_sum_sq(warm);
    check_variance(sigma2, data)
}

/// Bandwidth choice for the kernel estimate of the hot density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// `h = 1.06·s·n^{−1/5}` with `s` the sample standard deviation.
    Silverman,
    Fixed(f64),
}

impl Bandwidth {
    pub fn select(&self, sample: &[f64]) -> f64 {
        match *self {
            Self::Fixed(h) => h,
            Self::Silverman => {
                let n = sample.len() as f64;
                let sd = (centred_sum_sq(sample) / (n - 1.0)).sqrt();
                1.06 * sd * n.powf(-0.2)
            }
        }
    }
}

/// Gaussian kernel density estimate at `x`.
pub fn kernel_density(sample: &[f64], x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return invalid(format!("bandwidth must be positive, got {h}"));
    }
    if sample.is_empty() {
        return invalid("kernel density of an empty sample");
    }
    let sum: f64 = sample.iter().map(|&xi| normal_pdf((x - xi) / h)).sum();
    Ok(sum / (sample.len() as f64 * h))
}

/// Form of the `Q̂` term inside `Ĥ` for the general-model variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H0Variance {
    /// `Ĥ(x)` starts with `Q̂(x)`.
    #[default]
    Published,
    /// `Ĥ(x)` starts with `Q̂(ĝ⁻¹(x))`: the hot-process term written in the
    /// variable of `U₁` after substituting `u = g(y)`. Tracks the simulated
    /// variance of `X` more closely when `g` is far from the identity.
    ChangeOfVariables,
}

/// Variance estimate of `X` under the general model, with the hot density
/// replaced by a kernel estimate.
pub fn sigma2_h0(data: &GofData, bandwidth: Bandwidth) -> Result<f64> {
    sigma2_h0_variant(data, bandwidth, H0Variance::Published)
}

pub fn sigma2_h0_variant(data: &GofData, bandwidth: Bandwidth, variant: H0Variance) -> Result<f64> {
    data.require_pairs()?;
    let (hot, warm) = (&data.hot, &data.warm);
    let (n, n1, n2) = (data.systems.len() as f64, hot.len() as f64, warm.len() as f64);
    let g = EquivalentTimeH0::new(hot, warm)?;
    let h = bandwidth.select(hot);

    // Q̂(x) = (1/n₁) Σ_{T₁ᵢ <= x} [1 − F̂₂(T₁ᵢ)] / f̂₁(ĝ(T₁ᵢ))
    let mut q_terms = Vec::with_capacity(hot.len());
    for &x in hot {
        let at = g.eval(x);
        let density = kernel_density(hot, at, h)?;
        if density < DENSITY_FLOOR {
            return Err(Error::DensityFloor { point: at, density });
        }
        q_terms.push((1.0 - g.f2.eval(x)) / density);
    }
    let q_sums = prefix_sums(q_terms.into_iter());
    let q = |x: f64| q_sums[hot.partition_point(|&t| t <= x)] / n1;

    let g_hot: Vec<f64> = hot.iter().map(|&x| g.eval(x)).collect();
    let g_hot_sums = prefix_sums(g_hot.iter().copied());
    let g_warm_sums = prefix_sums(warm.iter().map(|&x| g.eval(x)));

    let big_h = |x: f64| {
        let k1 = g_hot.partition_point(|&v| v <= x);
        let k2 = warm.partition_point(|&t| t <= x);
        let lead = match variant {
            H0Variance::Published => q(x),
            H0Variance::ChangeOfVariables => q(g.inverse(x)),
        };
        lead - x * g.f1.eval(g.inverse(x)) + g.eval(x) * (1.0 - g.f2.eval(x))
            + g_hot_sums[k1] / n1
            + g_warm_sums[k2] / n2
            - x
    };
    let h_vals: Vec<f64> = hot.iter().map(|&x| big_h(x)).collect();
    let q_vals: Vec<f64> = warm.iter().map(|&x| q(x)).collect();

    let sigma2 = centred_sum_sq(&data.systems) / n
        + n / (n1 * n1) * centred_sum_sq(&h_vals)
        + n / (n2 * n2) * centred_sum_sq(&q_vals);
    check_variance(sigma2, data)
}

/// Rejection threshold `χ²₁₋α(1)`.
pub fn threshold(alpha: f64) -> f64 {
    chi2_1_quantile(1.0 - alpha)
}

/// The rule is strict: a statistic equal to the threshold is not rejected.
pub fn rejects(yn2: f64, threshold: f64) -> bool {
    yn2 > threshold
}

/// Decide from a statistic and its variance estimate.
pub fn decide(hypothesis: Hypothesis, x_stat: f64, sigma2_hat: f64, alpha: f64) -> Result<GofResult> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return invalid(format!("alpha must lie in (0, 0.5), got {alpha}"));
    }
    let yn2 = x_stat * x_stat / sigma2_hat;
    let threshold = threshold(alpha);
    Ok(GofResult {
        hypothesis,
        x_stat,
        sigma2_hat,
        yn2,
        alpha,
        threshold,
        p_value: chi2_1_sf(yn2),
        reject: rejects(yn2, threshold),
    })
}

pub fn run_test(data: &GofData, hypothesis: Hypothesis, alpha: f64) -> Result<GofResult> {
    run_test_with(data, hypothesis, alpha, H0Variance::Published)
}

/// [`run_test`] with a choice of the general-model variance form.
pub fn run_test_with(data: &GofData, hypothesis: Hypothesis, alpha: f64, variant: H0Variance) -> Result<GofResult> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return invalid(format!("alpha must lie in (0, 0.5), got {alpha}"));
    }
    let x_stat = statistic_x(data, hypothesis)?;
    let sigma2_hat = match hypothesis {
        Hypothesis::H0Star => sigma2_h0star(data)?,
        Hypothesis::H0 => sigma2_h0_variant(data, Bandwidth::Silverman, variant)?,
    };
    decide(hypothesis, x_stat, sigma2_hat, alpha)
}
