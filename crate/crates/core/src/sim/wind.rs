use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::geometry::EnuPoint;

/// Steady wind plus a sinusoidal gust along the mean direction. The gust
/// phase is derived from `phase_seed`, so a given wind is fully reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wind {
    /// m/s
    pub mean: EnuPoint,
    /// m/s
    pub gust_amplitude: f64,
    /// s
    pub gust_period: f64,
    pub phase_seed: u64,
}

impl Default for Wind {
    fn default() -> Self {
        Wind::calm()
    }
}

impl Wind {
    pub fn calm() -> Self {
        Wind {
            mean: EnuPoint::ORIGIN,
            gust_amplitude: 0.0,
            gust_period: 10.0,
            phase_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mean.validate("wind.mean")?;
        ensure_positive("wind.gust_period", self.gust_period)?;
        if !(self.gust_amplitude.is_finite() && self.gust_amplitude >= 0.0) {
            return Err(Error::invalid("wind.gust_amplitude", "must be >= 0"));
        }
        Ok(())
    }

    /// Gust phase offset in radians, `[0, 2pi)`.
    pub fn phase(&self) -> f64 {
        ChaCha8Rng::seed_from_u64(self.phase_seed).gen::<f64>() * TAU
    }

    /// Unit vector the gust acts along; east when there is no mean wind.
    pub fn gust_direction(&self) -> EnuPoint {
        let n = self.mean.norm();
        if n > 0.0 {
            self.mean * (1.0 / n)
        } else {
            EnuPoint::new(1.0, 0.0, 0.0)
        }
    }
}

pub fn wind_velocity(wind: &Wind, t: f64) -> EnuPoint {
    if wind.gust_amplitude == 0.0 {
        return wind.mean;
    }
    let gust = wind.gust_amplitude * (TAU * t / wind.gust_period + wind.phase()).sin();
    wind.mean + wind.gust_direction() * gust
}
