//! Seeded replication engine for the significance and power studies.
//!
//! Replication `i` of every cell draws from the stream
//! `replication_rng(master_seed, i)`, independently of the cell, so cells
//! that differ only in the switch damage share their random numbers and a
//! `p = 0` power cell reproduces the significance study exactly. Results are
//! reduced to counts, which makes reports independent of thread scheduling.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::ParametricDist;
use crate::error::{invalid, Error, Result};
use crate::gof::{run_test_with, GofData, H0Variance, Hypothesis};
use crate::model::{simulate_system, StandbyModel, SystemConfig};
use crate::rng::replication_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replications: usize,
    /// Number of simulated systems.
    pub n: usize,
    /// Hot sample size.
    pub n1: usize,
    /// Warm sample size.
    pub n2: usize,
    /// Null switching model; hot and warm samples are always drawn from it.
    pub model: StandbyModel,
    /// Switch damage applied to the simulated systems only.
    pub damage_p: f64,
    pub alpha: f64,
    pub hypothesis: Hypothesis,
    /// Variance form used when `hypothesis` is the general model.
    #[serde(default)]
    pub h0_variance: H0Variance,
    pub master_seed: u64,
    pub parallelism: usize,
}

impl McConfig {
    /// Exponential hot law with the given rate, warm law scaled by `r`, and
    /// `n = n₁ = n₂`.
    pub fn exponential(rate: f64, r: f64, n: usize, replications: usize, master_seed: u64) -> Result<Self> {
        Ok(Self {
            replications,
            n,
            n1: n,
            n2: n,
            model: StandbyModel::scale_aft(ParametricDist::exponential(rate)?, r)?,
            damage_p: 0.0,
            alpha: 0.05,
            hypothesis: Hypothesis::H0Star,
            h0_variance: H0Variance::Published,
            master_seed,
            parallelism: 1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return invalid("at least one replication is required");
        }
        if self.n < 2 || self.n1 < 2 || self.n2 < 2 {
            return invalid("sample sizes must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.damage_p) {
            return invalid(format!("damage p must lie in [0, 1], got {}", self.damage_p));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return invalid(format!("alpha must lie in (0, 0.5), got {}", self.alpha));
        }
        if self.parallelism == 0 {
            return invalid("parallelism must be at least 1");
        }
        if self.model.damage_p != 0.0 {
            return invalid("the null model must carry no damage; set damage_p instead");
        }
        Ok(())
    }

    fn with_cell(&self, n: usize, p: f64) -> Self {
        Self {
            n,
            n1: n,
            n2: n,
            damage_p: p,
            ..self.clone()
        }
    }
}

/// Result of a single replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ReplicationOutcome {
    Tested { yn2: f64, reject: bool },
    Failed { error: String },
}

/// Simulate the three samples of replication `index` and run the test.
pub fn run_replication(config: &McConfig, index: u64) -> ReplicationOutcome {
    match replicate(config, index) {
        Ok((yn2, reject)) => ReplicationOutcome::Tested { yn2, reject },
        Err(e) => ReplicationOutcome::Failed { error: e.to_string() },
    }
}

/// The system, hot and warm samples of replication `index`.
pub fn simulate_gof_data(config: &McConfig, index: u64) -> Result<GofData> {
    let mut rng = replication_rng(config.master_seed, index);
    let hot_law = config.model.hot;
    let warm_law = config.model.warm();
    let hot: Vec<f64> = (0..config.n1).map(|_| hot_law.sample(&mut rng)).collect();
    let warm: Vec<f64> = (0..config.n2).map(|_| warm_law.sample(&mut rng)).collect();
    let system = SystemConfig::new(2, config.model.with_damage(config.damage_p)?)?;
    let systems: Vec<f64> = (0..config.n).map(|_| simulate_system(&mut rng, &system)).collect();
    GofData::new(systems, hot, warm)
}

fn replicate(config: &McConfig, index: u64) -> Result<(f64, bool)> {
    let data = simulate_gof_data(config, index)?;
    let result = run_test_with(&data, config.hypothesis, config.alpha, config.h0_variance)?;
    Ok((result.yn2, result.reject))
}

/// All replication outcomes of one configuration, in index order.
pub fn run_replications(config: &McConfig) -> Result<Vec<ReplicationOutcome>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..config.replications as u64)
            .into_par_iter()
            .map(|i| run_replication(config, i))
            .collect()
    }))
}

/// One `(n, p)` cell of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub p: f64,
    pub replications: usize,
    pub rejections: usize,
    /// Replications whose test could not be computed; excluded from `rate`.
    pub failures: usize,
    pub rate: f64,
    /// `sqrt(rate·(1 − rate)/valid)` with `valid = replications − failures`.
    pub se: f64,
}

impl McCell {
    fn from_outcomes(config: &McConfig, outcomes: &[ReplicationOutcome]) -> Self {
        let mut rejections = 0;
        let mut failures = 0;
        for o in outcomes {
            match o {
                ReplicationOutcome::Tested { reject: true, .. } => rejections += 1,
                ReplicationOutcome::Tested { reject: false, .. } => {}
                ReplicationOutcome::Failed { .. } => failures += 1,
            }
        }
        let valid = outcomes.len() - failures;
        let (rate, se) = if valid == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let rate = rejections as f64 / valid as f64;
            (rate, (rate * (1.0 - rate) / valid as f64).sqrt())
        };
        Self {
            n: config.n,
            n1: config.n1,
            n2: config.n2,
            p: config.damage_p,
            replications: outcomes.len(),
            rejections,
            failures,
            rate,
            se,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub hypothesis: Hypothesis,
    pub alpha: f64,
    pub master_seed: u64,
    pub model: StandbyModel,
    pub cells: Vec<McCell>,
    /// Wall-clock time; left out of serialised reports so that they depend
    /// only on the configuration.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl McReport {
    /// Rejection rate of the first cell.
    pub fn rejection_rate(&self) -> f64 {
        self.cells[0].rate
    }

    pub fn standard_error(&self) -> f64 {
        self.cells[0].se
    }

    pub fn cell(&self, n: usize, p: f64) -> Option<&McCell> {
        self.cells.iter().find(|c| c.n == n && c.p == p)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p,replications,rejections,failures,rate,se\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.n, c.p, c.replications, c.rejections, c.failures, c.rate, c.se
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// One replication of a traced study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub p: f64,
    pub replication: u64,
    pub outcome: ReplicationOutcome,
}

/// Cells of an `(n, p)` grid with `n = n₁ = n₂`, ordered by `n`, then `p`.
pub fn grid_cells(base: &McConfig, sizes: &[usize], damages: &[f64]) -> Result<Vec<McConfig>> {
    if sizes.is_empty() || damages.is_empty() {
        return invalid("study grid is empty");
    }
    Ok(sizes
        .iter()
        .flat_map(|&n| damages.iter().map(move |&p| base.with_cell(n, p)))
        .collect())
}

fn study(base: &McConfig, cells: &[McConfig], mut trace: Option<&mut Vec<TraceRow>>) -> Result<McReport> {
    let start = Instant::now();
    let mut out = Vec::with_capacity(cells.len());
    for cell in cells {
        let outcomes = run_replications(cell)?;
        out.push(McCell::from_outcomes(cell, &outcomes));
        if let Some(rows) = trace.as_deref_mut() {
            rows.extend(outcomes.into_iter().enumerate().map(|(i, outcome)| TraceRow {
                n: cell.n,
                p: cell.damage_p,
                replication: i as u64,
                outcome,
            }));
        }
    }
    Ok(McReport {
        hypothesis: base.hypothesis,
        alpha: base.alpha,
        master_seed: base.master_seed,
        model: base.model,
        cells: out,
        elapsed: start.elapsed(),
    })
}

/// Run every cell and summarise it.
pub fn run_study(base: &McConfig, cells: &[McConfig]) -> Result<McReport> {
    study(base, cells, None)
}

/// [`run_study`] that also returns every replication outcome.
pub fn run_study_traced(base: &McConfig, cells: &[McConfig]) -> Result<(McReport, Vec<TraceRow>)> {
    let mut rows = Vec::new();
    let report = study(base, cells, Some(&mut rows))?;
    Ok((report, rows))
}

/// Empirical significance level of the test for one configuration.
pub fn mc_significance(config: &McConfig) -> Result<McReport> {
    if config.damage_p != 0.0 {
        return invalid("a significance study needs damage_p = 0");
    }
    run_study(config, std::slice::from_ref(config))
}

/// Empirical significance levels over several sample sizes (`n = n₁ = n₂`).
pub fn mc_significance_grid(base: &McConfig, sizes: &[usize]) -> Result<McReport> {
    run_study(base, &grid_cells(base, sizes, &[0.0])?)
}

/// Power against the switch-damage alternative over an `(n, p)` grid.
pub fn mc_power(base: &McConfig, sizes: &[usize], damages: &[f64]) -> Result<McReport> {
    run_study(base, &grid_cells(base, sizes, damages)?)
}
