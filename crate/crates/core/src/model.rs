//! Switching models for warm stand-by units and the system lifetime law.
//!
//! A stand-by unit lives under the warm law `F₂` until the unit it backs up
//! fails at time `y`. It then continues under the hot law `F₁` from the
//! equivalent time `g(y) = F₁⁻¹(F₂(y))`, so its conditional density after the
//! switch is `f₁(t + g(y) − y)`. Under the scale model `F₂(t) = F₁(r·t)` and
//! `g(y) = r·y`. The damage parameter `p` adds a jump of size
//! `p·(1 − F₂(y))` to the stand-by unit's CDF at the switch.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::ParametricDist;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SwitchMode {
    /// Warm and hot laws differ only in time scale: `F₂(t) = F₁(r·t)`.
    ScaleAft { r: f64 },
    /// Arbitrary warm law; equivalent times come from quantile matching.
    GeneralSedyakin { warm: ParametricDist },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandbyModel {
    pub hot: ParametricDist,
    pub mode: SwitchMode,
    /// Switch damage; 0 is the null model.
    pub damage_p: f64,
}

impl StandbyModel {
    pub fn scale_aft(hot: ParametricDist, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("scale ratio r must be positive, got {r}"));
        }
        Ok(Self {
            hot,
            mode: SwitchMode::ScaleAft { r },
            damage_p: 0.0,
        })
    }

    pub fn sedyakin(hot: ParametricDist, warm: ParametricDist) -> Self {
        Self {
            hot,
            mode: SwitchMode::GeneralSedyakin { warm },
            damage_p: 0.0,
        }
    }

    pub fn with_damage(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("damage p must lie in [0, 1], got {p}"));
        }
        self.damage_p = p;
        Ok(self)
    }

    /// The warm-condition law `F₂`.
    pub fn warm(&self) -> ParametricDist {
        match self.mode {
            SwitchMode::ScaleAft { r } => self.hot.time_scaled(r),
            SwitchMode::GeneralSedyakin { warm } => warm,
        }
    }

    /// Equivalent time `g(y) = F₁⁻¹(F₂(y))`; exactly `r·y` under the scale
    /// model.
    pub fn equivalent_time(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match self.mode {
            SwitchMode::ScaleAft { r } => r * y,
            SwitchMode::GeneralSedyakin { warm } => self.hot.sf_quantile(warm.sf(y)),
        }
    }

    /// `g_p(y) = F₁⁻¹(F₂(y) + p(1 − F₂(y)))`, the hot-scale age the unit
    /// resumes from after surviving a damaging switch.
    pub fn damaged_equivalent_time(&self, y: f64) -> f64 {
        if self.damage_p == 0.0 {
            return self.equivalent_time(y);
        }
        let warm_sf = self.warm().sf(y);
        self.hot.sf_quantile((1.0 - self.damage_p) * warm_sf)
    }

    /// Lifetime of a stand-by unit switched on at `y`, as a deterministic
    /// function of the survival level `level ∈ (0, 1)` of a uniform draw.
    ///
    /// The warm lifetime is `F₂⁻¹(1 − level)`. If it exceeds `y`, the unit is
    /// killed at the switch when `(S₂(y) − level)/S₂(y) <= p`; otherwise it
    /// resumes from `g_p(y)` and fails at `y + S₁⁻¹(level) − g_p(y)`. Since
    /// `level < S₂(y) = S₁(g(y))`, `S₁⁻¹(level)` is a draw from `F₁`
    /// conditioned to exceed `g_p(y)`. The result is nonincreasing in `p`.
    pub fn standby_lifetime_at_level(&self, y: f64, level: f64) -> f64 {
        let warm = self.warm();
        let warm_life = warm.sf_quantile(level);
        if warm_life <= y {
            return warm_life;
        }
        let warm_sf = warm.sf(y);
        if self.damage_p > 0.0 {
            let position = (warm_sf - level) / warm_sf;
            if position <= self.damage_p {
                return y;
            }
        }
        let resumed = self.hot.sf_quantile(level);
        y + resumed - self.damaged_equivalent_time(y)
    }
}

/// Lifetime of a stand-by unit given the main chain fails at `switch_time`.
pub fn sample_standby_lifetime<R: Rng + ?Sized>(
    rng: &mut R,
    model: &StandbyModel,
    switch_time: f64,
) -> f64 {
    let level: f64 = rng.sample(Open01);
    model.standby_lifetime_at_level(switch_time, level)
}

/// One main unit plus `m − 1` stand-by units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub m: usize,
    pub model: StandbyModel,
}

impl SystemConfig {
    pub fn new(m: usize, model: StandbyModel) -> Result<Self> {
        if m == 0 {
            return invalid("a system needs at least one unit (m >= 1)");
        }
        Ok(Self { m, model })
    }
}

/// Failure time `T⁽ᵐ⁾ = T₁ ∨ … ∨ T_m` of the redundant system.
pub fn simulate_system<R: Rng + ?Sized>(rng: &mut R, config: &SystemConfig) -> f64 {
    let mut y = config.model.hot.sample(rng);
    for _ in 1..config.m {
        y = y.max(sample_standby_lifetime(rng, &config.model, y));
    }
    y
}

/// System CDF for `m = 2` with exponential units, hot rate `λ₁` and warm
/// rate `λ₂`: `1 − (1 + λ₁/λ₂)e^{−λ₁t} + (λ₁/λ₂)e^{−(λ₁+λ₂)t}`.
pub fn exp_system_cdf_closed_form(lambda1: f64, lambda2: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let ratio = lambda1 / lambda2;
    1.0 - (1.0 + ratio) * (-lambda1 * t).exp() + ratio * (-(lambda1 + lambda2) * t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Stop once successive extrapolated values change by less than this.
    pub tolerance: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            min_nodes: 128,
            max_nodes: 8192,
        }
    }
}

/// `K₁ … K_m` evaluated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemCdfCurves {
    pub grid: Vec<f64>,
    /// `curves[j - 1]` holds `K_j` at the grid points.
    pub curves: Vec<Vec<f64>>,
    pub nodes: usize,
}

impl SystemCdfCurves {
    pub fn k(&self, j: usize) -> &[f64] {
        &self.curves[j - 1]
    }
}

/// Theoretical system CDFs by the recurrence
/// `K_j(t) = ∫₀ᵗ F₁(t + g(y) − y) dK_{j−1}(y)`, `K₁ = F₁`.
///
/// The Stieltjes integrals use the trapezoid rule on a mesh that contains
/// every grid point, with each gap split into the same number of pieces.
/// Halving every piece leaves an even-power error expansion, so the
/// refinements are Romberg-extrapolated until the tolerance is met.
pub fn system_cdf_recurrence(
    config: &SystemConfig,
    grid: &[f64],
    options: &QuadratureOptions,
) -> Result<SystemCdfCurves> {
    if config.model.damage_p != 0.0 {
        return invalid("the recurrence describes the null model (damage p = 0)");
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return invalid("grid points must be finite and >= 0");
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return invalid("grid must be sorted");
    }
    let m = config.m;
    let mut queries: Vec<f64> = grid.iter().copied().filter(|t| *t > 0.0).collect();
    queries.dedup();

    let mut curves = vec![vec![0.0; grid.len()]; m];
    if queries.is_empty() {
        return Ok(SystemCdfCurves {
            grid: grid.to_vec(),
            curves,
            nodes: 1,
        });
    }

    let base = options.min_nodes.div_ceil(queries.len()).max(2);
    let mut table: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut subdivisions = base;
    let mut last_change = f64::INFINITY;
    let mut nodes_used;
    let result = loop {
        nodes_used = subdivisions * queries.len() + 1;
        if nodes_used > options.max_nodes {
            return Err(Error::NoConvergence {
                change: last_change,
                nodes: nodes_used / 2,
                tolerance: options.tolerance,
            });
        }
        let mut row = vec![trapezoid_on_mesh(&config.model, m, &queries, subdivisions)];
        if let Some(prev_row) = table.last() {
            for l in 1..=prev_row.len() {
                let factor = 4f64.powi(l as i32) - 1.0;
                let extrapolated: Vec<f64> = row[l - 1]
                    .iter()
                    .zip(&prev_row[l - 1])
                    .map(|(fine, coarse)| fine + (fine - coarse) / factor)
                    .collect();
                row.push(extrapolated);
            }
            let prev_best = prev_row.last().unwrap();
            let best = row.last().unwrap();
            last_change = best
                .iter()
                .zip(prev_best)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if last_change < options.tolerance {
                break best.clone();
            }
        }
        table.push(row);
        subdivisions *= 2;
    };

    // result is laid out level-major over the distinct positive queries
    for (gi, &t) in grid.iter().enumerate() {
        if t > 0.0 {
            let qi = queries.partition_point(|&q| q < t);
            for (j, curve) in curves.iter_mut().enumerate() {
                curve[gi] = result[j * queries.len() + qi];
            }
        }
    }
    Ok(SystemCdfCurves {
        grid: grid.to_vec(),
        curves,
        nodes: nodes_used,
    })
}

fn trapezoid_on_mesh(model: &StandbyModel, m: usize, queries: &[f64], subdivisions: usize) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(queries.len() * subdivisions + 1);
    let mut query_nodes = Vec::with_capacity(queries.len());
    nodes.push(0.0);
    let mut left = 0.0;
    for &q in queries {
        for s in 1..subdivisions {
            nodes.push(left + (q - left) * s as f64 / subdivisions as f64);
        }
        nodes.push(q);
        query_nodes.push(nodes.len() - 1);
        left = q;
    }
    let n = nodes.len();
    let shift: Vec<f64> = nodes.iter().map(|&y| model.equivalent_time(y) - y).collect();

    // levels[j][i] = K_{j+1}(node_i)
    let mut levels = vec![vec![0.0; n]; m];
    for (i, &x) in nodes.iter().enumerate() {
        levels[0][i] = model.hot.cdf(x);
    }
    let mut phi = vec![0.0; n];
    for k in 1..n {
        let t = nodes[k];
        for i in 0..=k {
            phi[i] = model.hot.cdf(t + shift[i]);
        }
        for j in 1..m {
            let (done, rest) = levels.split_at_mut(j);
            let prev = &done[j - 1];
            let mut acc = 0.0;
            for i in 0..k {
                acc += 0.5 * (phi[i] + phi[i + 1]) * (prev[i + 1] - prev[i]);
            }
            rest[0][k] = acc;
        }
    }

    let mut out = Vec::with_capacity(m * queries.len());
    for level in &levels {
        out.extend(query_nodes.iter().map(|&k| level[k]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::special::ks_statistic;

    fn exp_model(r: f64) -> StandbyModel {
        StandbyModel::scale_aft(ParametricDist::exponential(1.0).unwrap(), r).unwrap()
    }

    #[test]
    fn equivalent_time_scale_model() {
        let model = exp_model(0.5);
        assert_eq!(model.equivalent_time(4.0), 2.0);
        assert_eq!(model.equivalent_time(0.0), 0.0);
    }

    #[test]
    fn equivalent_time_general_exponential() {
        let model = StandbyModel::sedyakin(
            ParametricDist::exponential(1.0).unwrap(),
            ParametricDist::exponential(0.5).unwrap(),
        );
        assert!((model.equivalent_time(4.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn equivalent_time_matches_probabilities() {
        let model = StandbyModel::sedyakin(
            ParametricDist::weibull(2.0, 1.0).unwrap(),
            ParametricDist::weibull(1.3, 2.5).unwrap(),
        );
        for i in 1..50 {
            let y = i as f64 * 0.1;
            let g = model.equivalent_time(y);
            assert!((model.hot.cdf(g) - model.warm().cdf(y)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(exp_system_cdf_closed_form(1.0, 0.5, 0.0), 0.0);
        let e = std::f64::consts::E;
        let iid = 1.0 - 2.0 / e + 1.0 / (e * e);
        assert!((exp_system_cdf_closed_form(1.0, 1.0, 1.0) - iid).abs() < 1e-15);
        assert!((exp_system_cdf_closed_form(1.0, 1.0, 1.0) - 0.399_576).abs() < 1e-6);
        assert!((exp_system_cdf_closed_form(1.0, 0.5, 1.0) - 0.342_622).abs() < 1e-6);
    }

    #[test]
    fn coupling_warm_failure_and_resumption() {
        let model = exp_model(0.5);
        // warm law Exp(0.5): level e^{-1.5} gives warm lifetime 3
        let level = (-0.5f64 * 3.0).exp();
        assert!((model.standby_lifetime_at_level(5.0, level) - 3.0).abs() < 1e-12);
        // warm lifetime 8: resumes at hot age 2.5 and the hot quantile is 4
        let level = (-0.5f64 * 8.0).exp();
        assert!((model.standby_lifetime_at_level(5.0, level) - 6.5).abs() < 1e-12);
    }

    #[test]
    fn full_damage_kills_at_switch() {
        let model = exp_model(0.5).with_damage(1.0).unwrap();
        for i in 1..100 {
            let level = i as f64 / 100.0;
            let warm = model.warm().sf_quantile(level);
            let y = 2.0;
            assert_eq!(model.standby_lifetime_at_level(y, level), warm.min(y));
        }
    }

    #[test]
    fn lifetime_nonincreasing_in_damage() {
        let base = exp_model(0.5);
        for i in 1..200 {
            let level = i as f64 / 200.0;
            let mut prev = f64::INFINITY;
            for k in 0..=10 {
                let model = base.with_damage(k as f64 / 10.0).unwrap();
                let life = model.standby_lifetime_at_level(1.3, level);
                assert!(life <= prev + 1e-12);
                prev = life;
            }
        }
    }

    #[test]
    fn conditional_law_of_standby_matches_mixture() {
        // F(t) = F₂(t) for t <= y, F₂(y) + F₁(t + g(y) − y) − F₁(g(y)) beyond
        let model = StandbyModel::sedyakin(
            ParametricDist::weibull(1.5, 1.0).unwrap(),
            ParametricDist::weibull(1.5, 2.0).unwrap(),
        );
        let y = 1.2;
        let g = model.equivalent_time(y);
        let warm = model.warm();
        let cdf = |t: f64| {
            if t <= y {
                warm.cdf(t)
            } else {
                warm.cdf(y) + model.hot.cdf(t + g - y) - model.hot.cdf(g)
            }
        };
        let mut rng = stream_rng(11);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| sample_standby_lifetime(&mut rng, &model, y))
            .collect();
        assert!(ks_statistic(&draws, cdf) < 0.02);
    }

    #[test]
    fn single_unit_system_is_hot_law() {
        let config = SystemConfig::new(1, exp_model(0.5)).unwrap();
        let mut rng = stream_rng(3);
        let draws: Vec<f64> = (0..20_000).map(|_| simulate_system(&mut rng, &config)).collect();
        assert!(ks_statistic(&draws, |t| config.model.hot.cdf(t)) < 0.015);
    }

    #[test]
    fn full_damage_system_is_hot_law() {
        let config = SystemConfig::new(2, exp_model(0.5).with_damage(1.0).unwrap()).unwrap();
        let mut rng = stream_rng(5);
        let draws: Vec<f64> = (0..20_000).map(|_| simulate_system(&mut rng, &config)).collect();
        assert!(ks_statistic(&draws, |t| config.model.hot.cdf(t)) < 0.015);
    }

    #[test]
    fn recurrence_single_unit_is_hot_cdf() {
        let config = SystemConfig::new(1, exp_model(0.5)).unwrap();
        let grid = [0.0, 0.5, 1.0, 2.0];
        let curves = system_cdf_recurrence(&config, &grid, &QuadratureOptions::default()).unwrap();
        for (t, k) in grid.iter().zip(curves.k(1)) {
            assert_eq!(*k, config.model.hot.cdf(*t));
        }
    }

    #[test]
    fn recurrence_zero_at_origin_and_ordered() {
        let config = SystemConfig::new(4, exp_model(0.5)).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.4).collect();
        let curves = system_cdf_recurrence(&config, &grid, &QuadratureOptions::default()).unwrap();
        for j in 1..=4 {
            assert_eq!(curves.k(j)[0], 0.0);
            assert!(curves.k(j).windows(2).all(|w| w[0] <= w[1] + 1e-12));
        }
        for j in 2..=4 {
            for (a, b) in curves.k(j).iter().zip(curves.k(j - 1)) {
                assert!(a <= &(b + 1e-12));
            }
        }
    }

    #[test]
    fn recurrence_matches_closed_form() {
        let config = SystemConfig::new(2, exp_model(0.5)).unwrap();
        let curves = system_cdf_recurrence(&config, &[1.0], &QuadratureOptions::default()).unwrap();
        let want = 1.0 - 3.0 * (-1.0f64).exp() + 2.0 * (-1.5f64).exp();
        assert!((curves.k(2)[0] - want).abs() < 1e-8);
        assert!((curves.k(2)[0] - 0.342_622).abs() < 1e-6);
    }

    #[test]
    fn recurrence_rejects_damage() {
        let config = SystemConfig::new(2, exp_model(0.5).with_damage(0.3).unwrap()).unwrap();
        assert!(system_cdf_recurrence(&config, &[1.0], &QuadratureOptions::default()).is_err());
    }
}
