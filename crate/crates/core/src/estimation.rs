//! Nonparametric estimation of the redundant-system reliability from a
//! complete hot sample and a type-I censored warm sample.
//!
//! Under the scale model the hot times `T₁ᵢ/r` and the warm times `T₂ᵢ` are
//! draws from the same law, so the two samples pool into one Nelson–Aalen
//! estimator once `r` is known. `r` itself is the sign change of the
//! martingale estimating function `U(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::step::{StepFn, CDF_ONE_TOL};

/// Event times closer than this (relative) are treated as simultaneous.
/// Rescaling by an estimated ratio reproduces exact ties only up to rounding.
pub const TIE_RTOL: f64 = 1e-12;

/// Breakpoint count below which the search for `r̂` enumerates candidates.
const ENUMERATION_LIMIT: usize = 64;

/// Complete, ordered sample of hot-condition failure times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotSample {
    times: Vec<f64>,
}

impl HotSample {
    pub fn new(mut times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return invalid("hot sample is empty");
        }
        if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return invalid("hot failure times must be finite and positive");
        }
        times.sort_unstable_by(f64::total_cmp);
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Warm-condition test of `n_on_test` units stopped at `censor_time`; only
/// the failures observed by then are recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmSample {
    times: Vec<f64>,
    n_on_test: usize,
    censor_time: f64,
}

impl WarmSample {
    pub fn complete(times: Vec<f64>) -> Result<Self> {
        let n = times.len();
        Self::censored(times, n, f64::INFINITY)
    }

    pub fn censored(mut times: Vec<f64>, n_on_test: usize, censor_time: f64) -> Result<Self> {
        if censor_time.is_nan() || censor_time <= 0.0 {
            return invalid(format!("censoring time must be positive, got {censor_time}"));
        }
        if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return invalid("warm failure times must be finite and positive");
        }
        if times.len() > n_on_test {
            return invalid(format!(
                "{} warm failures observed but only {} units on test",
                times.len(),
                n_on_test
            ));
        }
        if censor_time.is_infinite() && times.len() != n_on_test {
            return invalid("an uncensored warm test must observe every unit");
        }
        times.sort_unstable_by(f64::total_cmp);
        if let Some(&last) = times.last() {
            if last > censor_time {
                return invalid(format!("warm failure {last} after censoring time {censor_time}"));
            }
        }
        Ok(Self {
            times,
            n_on_test,
            censor_time,
        })
    }

    pub fn empty() -> Self {
        Self {
            times: Vec::new(),
            n_on_test: 0,
            censor_time: f64::INFINITY,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Observed failures `m₂`.
    pub fn failures(&self) -> usize {
        self.times.len()
    }

    pub fn n_on_test(&self) -> usize {
        self.n_on_test
    }

    pub fn censor_time(&self) -> f64 {
        self.censor_time
    }

    fn censored_count(&self) -> usize {
        self.n_on_test - self.times.len()
    }
}

/// Counting paths `N₁`, `N₂` and at-risk counts `Y₁`, `Y₂` of the two tests.
#[derive(Debug, Clone)]
pub struct CountingProcesses {
    pub n1: StepFn,
    pub n2: StepFn,
    hot: Vec<f64>,
    warm: Vec<f64>,
    censored: usize,
    censor_time: f64,
}

impl CountingProcesses {
    /// `Y₁(t) = #{T₁ᵢ >= t}`.
    pub fn y1(&self, t: f64) -> f64 {
        (self.hot.len() - self.hot.partition_point(|&x| x < t)) as f64
    }

    /// `Y₂(t)`: warm units with failure time `>= t` (units censored at `t₁`
    /// included) while `t <= t₁`; zero after censoring.
    pub fn y2(&self, t: f64) -> f64 {
        if t > self.censor_time {
            return 0.0;
        }
        (self.warm.len() - self.warm.partition_point(|&x| x < t) + self.censored) as f64
    }
}

fn counting_path(sorted: &[f64]) -> StepFn {
    let mut breakpoints: Vec<f64> = Vec::with_capacity(sorted.len());
    let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
    for (i, &x) in sorted.iter().enumerate() {
        if breakpoints.last() == Some(&x) {
            *values.last_mut().unwrap() = (i + 1) as f64;
        } else {
            breakpoints.push(x);
            values.push((i + 1) as f64);
        }
    }
    StepFn::new(breakpoints, values, 0.0).expect("sorted sample gives a valid path")
}

pub fn counting_processes(hot: &HotSample, warm: &WarmSample) -> CountingProcesses {
    CountingProcesses {
        n1: counting_path(&hot.times),
        n2: counting_path(&warm.times),
        hot: hot.times.clone(),
        warm: warm.times.clone(),
        censored: warm.censored_count(),
        censor_time: warm.censor_time,
    }
}

/// Time axis on which hot and warm events are pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    /// Hot times as observed, warm times multiplied by `r`.
    Hot,
    /// Hot times divided by `r`, warm times as observed.
    Warm,
}

/// Simultaneous events on the pooled axis and the at-risk counts just
/// before they occur.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EventGroup {
    time: f64,
    events: usize,
    hot_at_risk: usize,
    warm_at_risk: usize,
}

impl EventGroup {
    fn at_risk(&self) -> usize {
        self.hot_at_risk + self.warm_at_risk
    }
}

fn pooled_groups(hot: &HotSample, warm: &WarmSample, r: f64, axis: Axis) -> Result<Vec<EventGroup>> {
    let hot_time = |t: f64| match axis {
        Axis::Hot => t,
        Axis::Warm => t / r,
    };
    let warm_time = |t: f64| match axis {
        Axis::Hot => r * t,
        Axis::Warm => t,
    };
    let censor = warm_time(warm.censor_time);
    let censored = warm.censored_count();
    let (n1, m2) = (hot.times.len(), warm.times.len());

    let mut groups = Vec::with_capacity(n1 + m2);
    let (mut i, mut j) = (0, 0);
    while i < n1 || j < m2 {
        let next_hot = hot.times.get(i).map_or(f64::INFINITY, |&t| hot_time(t));
        let next_warm = warm.times.get(j).map_or(f64::INFINITY, |&t| warm_time(t));
        let time = next_hot.min(next_warm);
        let limit = time + TIE_RTOL * time;
        let hot_at_risk = n1 - i;
        let warm_at_risk = if time <= censor + TIE_RTOL * censor {
            m2 - j + censored
        } else {
            0
        };
        let mut events = 0;
        while i < n1 && hot_time(hot.times[i]) <= limit {
            i += 1;
            events += 1;
        }
        while j < m2 && warm_time(warm.times[j]) <= limit {
            j += 1;
            events += 1;
        }
        if hot_at_risk + warm_at_risk == 0 {
            return Err(Error::ZeroAtRisk(time));
        }
        groups.push(EventGroup {
            time,
            events,
            hot_at_risk,
            warm_at_risk,
        });
    }
    Ok(groups)
}

fn check_ratio(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        invalid(format!("scale ratio must be positive and finite, got {r}"))
    }
}

/// Pooled Nelson–Aalen estimator `Λ̃₂(·, r)` on the warm time scale.
pub fn nelson_aalen_tilde(hot: &HotSample, warm: &WarmSample, r: f64) -> Result<StepFn> {
    check_ratio(r)?;
    let groups = pooled_groups(hot, warm, r, Axis::Warm)?;
    cumulative_hazard(&groups)
}

fn cumulative_hazard(groups: &[EventGroup]) -> Result<StepFn> {
    let mut acc = 0.0;
    let mut breakpoints = Vec::with_capacity(groups.len());
    let mut values = Vec::with_capacity(groups.len());
    for g in groups {
        acc += g.events as f64 / g.at_risk() as f64;
        breakpoints.push(g.time);
        values.push(acc);
    }
    StepFn::new(breakpoints, values, 0.0)
}

/// Estimating function
/// `U(r) = N₂(t₁) − ∫₀^{t₁} Y₂(u) dΛ̃₂(u, r)`, a nonincreasing step function
/// of `r`.
pub fn u_score(hot: &HotSample, warm: &WarmSample, r: f64) -> Result<f64> {
    check_ratio(r)?;
    let groups = pooled_groups(hot, warm, r, Axis::Warm)?;
    let compensator: f64 = groups
        .iter()
        .map(|g| g.events as f64 * g.warm_at_risk as f64 / g.at_risk() as f64)
        .sum();
    Ok(warm.failures() as f64 - compensator)
}

/// Number of ratio breakpoints `T₁ⱼ/T₂ᵢ` and `T₁ⱼ/t₁` inside `[lo, hi]`,
/// or the breakpoints themselves when `collect` is set.
fn breakpoints_within(hot: &HotSample, warm: &WarmSample, lo: f64, hi: f64, collect: Option<&mut Vec<f64>>) -> usize {
    let mut count = 0;
    let mut sink = collect;
    let mut scan = |denominator: f64| {
        // slightly widened search window; exact membership is checked on the ratio
        let a = hot.times.partition_point(|&x| x < lo * denominator * (1.0 - 1e-12));
        let b = hot.times.partition_point(|&x| x <= hi * denominator * (1.0 + 1e-12));
        for &x in &hot.times[a..b] {
            let ratio = x / denominator;
            if ratio >= lo && ratio <= hi {
                count += 1;
                if let Some(out) = sink.as_deref_mut() {
                    out.push(ratio);
                }
            }
        }
    };
    for &w in &warm.times {
        scan(w);
    }
    if warm.censor_time.is_finite() {
        scan(warm.censor_time);
    }
    count
}

/// `r̂ = sup{r : U(r) > 0}`.
///
/// `U` only changes at the ratios `T₁ⱼ/T₂ᵢ` and `T₁ⱼ/t₁`. A geometric
/// bisection narrows the bracket until few breakpoints remain, which are then
/// enumerated; `U` is probed strictly between consecutive breakpoints.
pub fn estimate_r(hot: &HotSample, warm: &WarmSample) -> Result<f64> {
    if warm.failures() == 0 {
        return Err(Error::NotIdentifiable("no warm failures observed".into()));
    }
    let largest_warm_scale = if warm.censor_time.is_finite() {
        warm.censor_time
    } else {
        *warm.times.last().unwrap()
    };
    let min_ratio = hot.times[0] / largest_warm_scale;
    let max_ratio = hot.times[hot.len() - 1] / warm.times[0];
    let mut lo = 0.5 * min_ratio;
    let mut hi = 2.0 * max_ratio;

    if u_score(hot, warm, lo)? <= 0.0 {
        return Err(Error::NotIdentifiable("U(0+) is not positive".into()));
    }
    if u_score(hot, warm, hi)? > 0.0 {
        return Err(Error::NotIdentifiable("U(r) > 0 for every r".into()));
    }

    for _ in 0..200 {
        if breakpoints_within(hot, warm, lo, hi, None) <= ENUMERATION_LIMIT {
            break;
        }
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if u_score(hot, warm, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut candidates = Vec::new();
    breakpoints_within(hot, warm, lo, hi, Some(&mut candidates));
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();
    for (k, &b) in candidates.iter().enumerate() {
        let right = candidates.get(k + 1).copied().unwrap_or(hi);
        let probe = 0.5 * (b + right);
        if u_score(hot, warm, probe)? <= 0.0 {
            return Ok(b);
        }
    }
    Err(Error::NotIdentifiable(format!(
        "no sign change of U located in [{lo}, {hi}]"
    )))
}

/// Pooled hazard and product-limit estimates on the hot time scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardEstimate {
    /// `Λ̂₁`.
    pub lambda1: StepFn,
    /// `F̂₁ = 1 − ∏(1 − dΛ̂₁)`.
    pub f1: StepFn,
    /// `F̂₂(t) = F̂₁(r̂·t)`.
    pub f2: StepFn,
}

pub fn cum_hazard_and_cdf(hot: &HotSample, warm: &WarmSample, r_hat: f64) -> Result<HazardEstimate> {
    check_ratio(r_hat)?;
    let groups = pooled_groups(hot, warm, r_hat, Axis::Hot)?;
    let lambda1 = cumulative_hazard(&groups)?;
    let mut survival = 1.0;
    let mut values = Vec::with_capacity(groups.len());
    for g in &groups {
        let at_risk = g.at_risk();
        survival *= if g.events == at_risk {
            0.0
        } else {
            1.0 - g.events as f64 / at_risk as f64
        };
        values.push(1.0 - survival);
    }
    let f1 = StepFn::new(lambda1.breakpoints().to_vec(), values, 0.0)?;
    let f2 = f1.rescale_time(r_hat)?;
    Ok(HazardEstimate { lambda1, f1, f2 })
}

/// One step of the recurrence for the system CDF estimate:
///
/// `K̂_j(t) = F̂₂(t)·K̂_{j−1}(t) + Σ_{r̂t < Tᵢ <= t} K̂_{j−1}((t − Tᵢ)/(1 − r̂))·ΔF̂₁(Tᵢ)`
///
/// where `ΔF̂₁` is the product-limit jump. The split at `r̂t` assumes
/// `r̂ < 1`; for `r̂ >= 1` the plug-in integral
/// `∫₀ᵗ F̂₁(t + (r̂ − 1)y) dK̂_{j−1}(y)` is summed directly.
pub fn khat_next(f1: &StepFn, r_hat: f64, k_prev: &StepFn, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if r_hat >= 1.0 {
        return khat_plugin(f1, r_hat, k_prev, t);
    }
    let mut acc = f1.eval(r_hat * t) * k_prev.eval(t);
    let times = f1.breakpoints();
    let start = times.partition_point(|&x| x <= r_hat * t);
    let end = times.partition_point(|&x| x <= t);
    let values = f1.values();
    for i in start..end {
        let before = if i == 0 { f1.value_before_first() } else { values[i - 1] };
        let jump = values[i] - before;
        acc += k_prev.eval((t - times[i]) / (1.0 - r_hat)) * jump;
    }
    acc
}

fn khat_plugin(f1: &StepFn, r_hat: f64, k_prev: &StepFn, t: f64) -> f64 {
    k_prev
        .jumps()
        .take_while(|&(y, _)| y <= t)
        .map(|(y, jump)| f1.eval(t + (r_hat - 1.0) * y) * jump)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    /// `None` when the warm test recorded no failure and only `m = 1` was
    /// requested.
    pub r_hat: Option<f64>,
    pub lambda1_hat: StepFn,
    pub f1_hat_cdf: StepFn,
    pub f2_hat_cdf: Option<StepFn>,
    /// `K̂₂ … K̂_m` on `grid`.
    pub k_hat: Vec<StepFn>,
    pub mu_hat: f64,
    /// Set when the system CDF estimate stays below 1 (censoring), so that
    /// `mu_hat` only bounds the mean from below.
    pub mu_is_lower_bound: bool,
    /// Distinct pooled event times `T₁ᵢ` and `r̂·T₂ⱼ`.
    pub pooled_times: Vec<f64>,
    /// Evaluation grid of the `K̂_j`: the pooled times, plus `T_max/r̂` when
    /// `r̂ < 1` and `F̂₁` reaches 1 (all `K̂_j` equal 1 from there on).
    pub grid: Vec<f64>,
}

impl EstimationResult {
    pub fn m(&self) -> usize {
        self.k_hat.len() + 1
    }

    /// `K̂_m`, or `F̂₁` for a single unit.
    pub fn system_cdf(&self) -> &StepFn {
        self.k_hat.last().unwrap_or(&self.f1_hat_cdf)
    }
}

/// `μ̂ = Σ Tᵢ [K̂(Tᵢ) − K̂(Tᵢ₋₁)]` with `K̂(T₀) = 0`.
pub fn mean_from_jumps(cdf: &StepFn) -> f64 {
    cdf.jumps().map(|(t, jump)| t * jump).sum()
}

/// Full pipeline: `r̂`, `Λ̂₁`, `F̂₁`, `F̂₂`, `K̂₂ … K̂_m` and `μ̂`.
pub fn estimate_all(hot: &HotSample, warm: &WarmSample, m: usize) -> Result<EstimationResult> {
    if m == 0 {
        return invalid("m must be at least 1");
    }
    let r_hat = if warm.failures() > 0 {
        Some(estimate_r(hot, warm)?)
    } else if m == 1 {
        None
    } else {
        return Err(Error::NotIdentifiable(
            "stand-by systems need at least one warm failure".into(),
        ));
    };

    let hazard = match r_hat {
        Some(r) => cum_hazard_and_cdf(hot, warm, r)?,
        None => cum_hazard_and_cdf(hot, &WarmSample::empty(), 1.0)?,
    };
    let pooled_times = hazard.f1.breakpoints().to_vec();

    let mut grid = pooled_times.clone();
    if let Some(r) = r_hat {
        let last = *grid.last().unwrap();
        if r < 1.0 && hazard.f1.last_value() >= 1.0 - CDF_ONE_TOL && last / r > last {
            grid.push(last / r);
        }
    }

    let mut k_hat: Vec<StepFn> = Vec::with_capacity(m.saturating_sub(1));
    if let Some(r) = r_hat {
        for _ in 2..=m {
            let prev = k_hat.last().unwrap_or(&hazard.f1);
            let mut values: Vec<f64> = grid.iter().map(|&t| khat_next(&hazard.f1, r, prev, t)).collect();
            // rounding can leave the sums a few ulps out of order
            let mut running = 0.0f64;
            for v in values.iter_mut() {
                running = running.max(v.clamp(0.0, 1.0));
                *v = running;
            }
            k_hat.push(StepFn::new(grid.clone(), values, 0.0)?);
        }
    }

    let system = k_hat.last().unwrap_or(&hazard.f1);
    let mu_hat = mean_from_jumps(system);
    let mu_is_lower_bound = system.last_value() < 1.0 - CDF_ONE_TOL;

    Ok(EstimationResult {
        r_hat,
        lambda1_hat: hazard.lambda1,
        f1_hat_cdf: hazard.f1,
        f2_hat_cdf: r_hat.map(|_| hazard.f2),
        k_hat,
        mu_hat,
        mu_is_lower_bound,
        pooled_times,
        grid,
    })
}
