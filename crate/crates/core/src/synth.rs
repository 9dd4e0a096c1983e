//! Reproducible synthetic workload traces.
//!
//! A trace is `value(t) = A(day(t)) * S(t mod 1440) + n(t)`, clipped at zero:
//! a strictly positive smooth daily profile `S` (24 h plus 12 h harmonics),
//! a day-scale amplitude `A` that drifts slowly across the span, and
//! independent Gaussian noise `n`. The same seed always produces the same
//! bytes, which the tests rely on.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{SamplingSpec, TimeSeries, MINUTES_PER_DAY};

/// Shape parameters of the generator. All fields are plain data so callers
/// can tweak individual knobs from a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisSpec {
    /// Mean level of the daily profile.
    pub base_level: f64,
    /// Amplitude of the 24-hour harmonic.
    pub daily_amplitude: f64,
    /// Amplitude of the 12-hour harmonic.
    pub half_day_amplitude: f64,
    /// Phase of the 24-hour harmonic, radians.
    pub daily_phase: f64,
    /// Phase of the 12-hour harmonic, radians.
    pub half_day_phase: f64,
    /// Relative swing of the day-scale amplitude around 1.
    pub amplitude_drift: f64,
    /// Days per full drift cycle.
    pub drift_period_days: u32,
    /// Standard deviation of the additive noise.
    pub noise_std: f64,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        Self {
            base_level: 0.8,
            daily_amplitude: 0.15,
            half_day_amplitude: 0.03,
            daily_phase: -PI / 2.0,
            half_day_phase: 0.9,
            amplitude_drift: 0.1,
            drift_period_days: 10,
            noise_std: 0.05,
        }
    }
}

impl SynthesisSpec {
    /// Noise-free daily profile at a given minute of the day.
    pub fn daily_profile(&self, minute_of_day: u32) -> f64 {
        let x = minute_of_day as f64 / MINUTES_PER_DAY as f64;
        self.base_level
            + self.daily_amplitude * (2.0 * PI * x + self.daily_phase).sin()
            + self.half_day_amplitude * (4.0 * PI * x + self.half_day_phase).sin()
    }

    /// Day-scale amplitude multiplier for a given day index.
    pub fn day_amplitude(&self, day: u32) -> f64 {
        let x = day as f64 / self.drift_period_days.max(1) as f64;
        1.0 + self.amplitude_drift * (2.0 * PI * x).sin()
    }

    /// Noise-free sample at an absolute minute index.
    pub fn noiseless_value(&self, t: i64) -> f64 {
        let day = t.div_euclid(MINUTES_PER_DAY as i64) as u32;
        let minute = t.rem_euclid(MINUTES_PER_DAY as i64) as u32;
        self.day_amplitude(day) * self.daily_profile(minute)
    }

    fn validate(&self) -> Result<()> {
        let worst_profile =
            self.base_level - self.daily_amplitude.abs() - self.half_day_amplitude.abs();
        if worst_profile <= 0.0 || worst_profile.is_nan() {
            return Err(Error::InvalidSynthesisSpec(
                "daily profile must stay strictly positive",
            ));
        }
        if self.amplitude_drift.abs() >= 1.0 {
            return Err(Error::InvalidSynthesisSpec(
                "amplitude drift must keep A(day) positive",
            ));
        }
        if self.noise_std < 0.0 || !self.noise_std.is_finite() {
            return Err(Error::InvalidSynthesisSpec(
                "noise std must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

/// Generate `days` full days of one-minute samples.
///
/// Deterministic in `seed`: two calls with the same arguments return
/// bit-identical series. Values are clipped at zero so a workload can never
/// go negative. Spans shorter than two days leave no room for day-over-day
/// forecasting and are rejected.
pub fn synthesize_workload<T: Scalar>(
    days: u32,
    spec: &SynthesisSpec,
    seed: u64,
) -> Result<TimeSeries<T>> {
    const MIN_DAYS: u32 = 2;
    if days < MIN_DAYS {
        return Err(Error::InsufficientSpan {
            days,
            min: MIN_DAYS,
        });
    }
    spec.validate()?;

    let n = days as usize * MINUTES_PER_DAY as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if spec.noise_std > 0.0 {
        Some(Normal::new(0.0, spec.noise_std).expect("validated noise std"))
    } else {
        None
    };

    let mut values = Vec::with_capacity(n);
    for t in 0..n as i64 {
        let clean = spec.noiseless_value(t);
        let sample = match &noise {
            Some(dist) => (clean + dist.sample(&mut rng)).max(0.0),
            None => clean,
        };
        values.push(T::from_f64_lossy(sample));
    }
    TimeSeries::new(0, values, SamplingSpec::minutes())
}
