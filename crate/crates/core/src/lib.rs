//! Reliability of redundant systems with warm stand-by units.
//!
//! * [`model`]: switching models, system simulation and the system CDF
//!   recurrence.
//! * [`estimation`]: nonparametric estimation of the scale ratio, the unit
//!   CDFs and the system CDF from hot and censored warm samples.
//! * [`gof`]: goodness-of-fit tests of the switching models.
//! * [`montecarlo`]: seeded significance and power studies.

pub mod dist;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod model;
pub mod montecarlo;
pub mod rng;
pub mod special;
pub mod step;

pub use dist::ParametricDist;
pub use error::{Error, Result};
pub use estimation::{estimate_all, estimate_r, EstimationResult, HotSample, WarmSample};
pub use gof::{run_test, GofData, GofResult, Hypothesis};
pub use model::{simulate_system, StandbyModel, SwitchMode, SystemConfig};
pub use montecarlo::{mc_power, mc_significance, McCell, McConfig, McReport};
pub use step::StepFn;
