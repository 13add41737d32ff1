//! Right-continuous piecewise-constant functions on `[0, ∞)`.
//!
//! Every empirical curve in the crate (distribution functions, cumulative
//! hazards, counting paths, system CDF estimates) is a [`StepFn`]. Integrals
//! of step functions are computed exactly, segment by segment.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Slack used when deciding whether a CDF has reached 1.
pub const CDF_ONE_TOL: f64 = 1e-9;

/// A right-continuous step function.
///
/// `eval(t)` returns the value attached to the largest breakpoint `<= t`, or
/// `value_before_first` when `t` precedes every breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFn {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    value_before_first: f64,
}

impl StepFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, value_before_first: f64) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return invalid(format!(
                "breakpoints/values length mismatch: {} vs {}",
                breakpoints.len(),
                values.len()
            ));
        }
        if breakpoints.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return invalid("breakpoints must be finite and >= 0");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("breakpoints must be strictly increasing");
        }
        if values.iter().any(|v| v.is_nan()) || value_before_first.is_nan() {
            return invalid("step values must not be NaN");
        }
        Ok(Self {
            breakpoints,
            values,
            value_before_first,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
            value_before_first: value,
        }
    }

    /// Empirical distribution function: a jump of `1/n` at every order
    /// statistic, tied observations merged into one jump.
    pub fn ecdf(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return invalid("empirical CDF of an empty sample");
        }
        let mut sorted = sample.to_vec();
        if sorted.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return invalid("sample values must be finite and >= 0");
        }
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self::from_sorted_atoms(&sorted))
    }

    /// CDF of the uniform law on an already sorted multiset of atoms.
    pub(crate) fn from_sorted_atoms(sorted: &[f64]) -> Self {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        let n = sorted.len() as f64;
        let mut breakpoints = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        for (i, &x) in sorted.iter().enumerate() {
            // counts are divided, never accumulated, so that equal fractions
            // compare equal across samples of different sizes
            let v = (i + 1) as f64 / n;
            if breakpoints.last() == Some(&x) {
                *values.last_mut().unwrap() = v;
            } else {
                breakpoints.push(x);
                values.push(v);
            }
        }
        Self {
            breakpoints,
            values,
            value_before_first: 0.0,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_before_first(&self) -> f64 {
        self.value_before_first
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// Value after the last breakpoint.
    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.value_before_first)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        if idx == 0 {
            self.value_before_first
        } else {
            self.values[idx - 1]
        }
    }

    /// Left limit `f(t-)`.
    #[inline]
    pub fn eval_left(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b < t);
        if idx == 0 {
            self.value_before_first
        } else {
            self.values[idx - 1]
        }
    }

    /// `(breakpoint, jump size)` pairs.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mut prev = self.value_before_first;
        self.breakpoints
            .iter()
            .zip(&self.values)
            .map(move |(&b, &v)| {
                let jump = v - prev;
                prev = v;
                (b, jump)
            })
    }

    /// True when the function is a valid distribution function.
    pub fn is_cdf(&self) -> bool {
        self.value_before_first == 0.0
            && self.values.iter().all(|v| (0.0..=1.0).contains(v))
            && self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// `t ↦ f(scale · t)`.
    pub fn rescale_time(&self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return invalid(format!("time scale must be positive, got {scale}"));
        }
        let breakpoints: Vec<f64> = self.breakpoints.iter().map(|b| b / scale).collect();
        Self::new(breakpoints, self.values.clone(), self.value_before_first)
    }

    /// Generalised inverse `inf{s >= 0 : f(s) >= p}` of a nondecreasing step
    /// function. Returns `+∞` when the level is never reached.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= self.value_before_first {
            return 0.0;
        }
        let idx = self.values.partition_point(|&v| v < p);
        if idx == self.values.len() {
            f64::INFINITY
        } else {
            self.breakpoints[idx]
        }
    }

    /// `∫₀^∞ (1 − F(t)) dt` for a distribution function reaching 1.
    pub fn tail_integral(&self) -> Result<f64> {
        let last = self.last_value();
        if last < 1.0 - CDF_ONE_TOL {
            return Err(Error::IntegralDiverges { last });
        }
        let mut area = 0.0;
        let mut prev_t = 0.0;
        let mut prev_v = self.value_before_first;
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            area += (1.0 - prev_v) * (b - prev_t);
            prev_t = b;
            prev_v = v;
        }
        Ok(area)
    }

    /// Exact `∫₀^∞ (a(t) − b(t)) dt` over the merged breakpoints of two step
    /// functions whose final values agree.
    pub fn integral_of_difference(a: &StepFn, b: &StepFn) -> Result<f64> {
        let tail = a.last_value() - b.last_value();
        if tail.abs() > CDF_ONE_TOL {
            return Err(Error::IntegralDiverges {
                last: a.last_value().min(b.last_value()),
            });
        }
        let (xa, xb) = (&a.breakpoints, &b.breakpoints);
        let (mut i, mut j) = (0, 0);
        let mut prev_t = 0.0;
        let mut va = a.value_before_first;
        let mut vb = b.value_before_first;
        let mut area = 0.0;
        while i < xa.len() || j < xb.len() {
            let next = match (xa.get(i), xb.get(j)) {
                (Some(&p), Some(&q)) => p.min(q),
                (Some(&p), None) => p,
                (None, Some(&q)) => q,
                (None, None) => unreachable!(),
            };
            area += (va - vb) * (next - prev_t);
            prev_t = next;
            if i < xa.len() && xa[i] == next {
                va = a.values[i];
                i += 1;
            }
            if j < xb.len() && xb[j] == next {
                vb = b.values[j];
                j += 1;
            }
        }
        Ok(area)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_right_continuity() {
        let f = StepFn::ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.eval(2.0), 2.0 / 3.0);
        assert_eq!(f.eval(1.999), 1.0 / 3.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(3.0), 1.0);
        assert_eq!(f.eval_left(2.0), 1.0 / 3.0);
    }

    #[test]
    fn before_first_breakpoint() {
        let f = StepFn::new(vec![1.0, 2.0], vec![3.0, 4.0], -1.5).unwrap();
        assert_eq!(f.eval(0.5), -1.5);
    }

    #[test]
    fn ecdf_merges_ties() {
        let f = StepFn::ecdf(&[2.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(f.breakpoints(), &[1.0, 2.0, 4.0]);
        assert_eq!(f.values(), &[0.25, 0.75, 1.0]);
        assert!(f.is_cdf());
    }

    #[test]
    fn tail_integral_matches_means() {
        let f = StepFn::ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert!((f.tail_integral().unwrap() - 2.0).abs() < 1e-15);
        let two_point = StepFn::new(vec![1.0, 3.0], vec![0.5, 1.0], 0.0).unwrap();
        assert!((two_point.tail_integral().unwrap() - 2.0).abs() < 1e-15);
        let single = StepFn::ecdf(&[5.0]).unwrap();
        assert_eq!(single.tail_integral().unwrap(), 5.0);
    }

    #[test]
    fn tail_integral_rejects_defective_cdf() {
        let f = StepFn::new(vec![1.0], vec![0.5], 0.0).unwrap();
        assert!(matches!(f.tail_integral(), Err(Error::IntegralDiverges { .. })));
    }

    #[test]
    fn quantile_inf_convention() {
        let f = StepFn::ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.quantile(0.0), 0.0);
        assert_eq!(f.quantile(1.0 / 3.0), 1.0);
        assert_eq!(f.quantile(0.34), 2.0);
        assert_eq!(f.quantile(1.0), 3.0);
        assert_eq!(f.quantile(1.5), f64::INFINITY);
    }

    #[test]
    fn rejects_unsorted_breakpoints() {
        assert!(StepFn::new(vec![2.0, 1.0], vec![0.0, 1.0], 0.0).is_err());
        assert!(StepFn::new(vec![1.0, 1.0], vec![0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn difference_integral_of_two_ecdfs() {
        let a = StepFn::ecdf(&[1.0, 3.0]).unwrap();
        let b = StepFn::ecdf(&[2.0]).unwrap();
        // mean(b) - mean(a) = 2 - 2
        assert!(StepFn::integral_of_difference(&a, &b).unwrap().abs() < 1e-15);
        let c = StepFn::ecdf(&[4.0]).unwrap();
        assert!((StepFn::integral_of_difference(&a, &c).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rescale_time_composes() {
        let f = StepFn::ecdf(&[1.0, 2.0]).unwrap();
        let g = f.rescale_time(0.5).unwrap();
        assert_eq!(g.eval(2.0), f.eval(1.0));
        assert_eq!(g.eval(3.9), f.eval(1.95));
    }
}
