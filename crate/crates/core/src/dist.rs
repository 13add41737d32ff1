//! Parametric lifetime laws used for the hot and warm units.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A lifetime distribution on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ParametricDist {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
}

impl ParametricDist {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return invalid(format!("exponential rate must be positive, got {rate}"));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return invalid(format!(
                "Weibull shape and scale must be positive, got ({shape}, {scale})"
            ));
        }
        Ok(Self::Weibull { shape, scale })
    }

    /// The law of `T / r` when `T` has this law, i.e. `t ↦ F(r·t)`.
    pub fn time_scaled(&self, r: f64) -> Self {
        match *self {
            Self::Exponential { rate } => Self::Exponential { rate: rate * r },
            Self::Weibull { shape, scale } => Self::Weibull {
                shape,
                scale: scale / r,
            },
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        -(-self.cumulative_hazard(t)).exp_m1()
    }

    pub fn sf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        (-self.cumulative_hazard(t)).exp()
    }

    pub fn cumulative_hazard(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => rate * t,
            Self::Weibull { shape, scale } => (t / scale).powf(shape),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => rate * (-rate * t).exp(),
            Self::Weibull { shape, scale } => {
                if t == 0.0 {
                    return match shape {
                        s if s < 1.0 => f64::INFINITY,
                        1.0 => 1.0 / scale,
                        _ => 0.0,
                    };
                }
                let z = t / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
        }
    }

    /// `F⁻¹(p)`.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        self.hazard_quantile(-(-p).ln_1p())
    }

    /// `S⁻¹(s)`: the time at which the survival function equals `s`.
    pub fn sf_quantile(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        if s <= 0.0 {
            return f64::INFINITY;
        }
        self.hazard_quantile(-s.ln())
    }

    fn hazard_quantile(&self, h: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => h / rate,
            Self::Weibull { shape, scale } => scale * h.powf(1.0 / shape),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Weibull { shape, scale } => scale * gamma_1p(1.0 / shape),
        }
    }

    /// Inverse-transform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s: f64 = rng.sample(Open01);
        self.sf_quantile(s)
    }
}

/// `Γ(1 + x)` for `x > 0` via the Lanczos approximation (g = 7, n = 9).
fn gamma_1p(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let z = x;
    let mut a = COEF[0];
    let t = z + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
}
