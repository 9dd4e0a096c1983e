//! Minute-sampled time series container and basic transforms.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minutes in one day; the season length every day-over-day operation uses.
pub const MINUTES_PER_DAY: u32 = 1440;

/// Uniform sampling grid description.
///
/// Timestamps are implicit: sample `i` of a series lives at minute
/// `start_index + i * period_minutes`. The period must divide a day exactly
/// so that "one day back" always lands on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingSpec {
    period_minutes: u32,
    samples_per_day: u32,
}

impl SamplingSpec {
    pub fn new(period_minutes: u32) -> Result<Self> {
        if period_minutes == 0 || !MINUTES_PER_DAY.is_multiple_of(period_minutes) {
            return Err(Error::IncompatibleSampling {
                period: period_minutes,
            });
        }
        Ok(Self {
            period_minutes,
            samples_per_day: MINUTES_PER_DAY / period_minutes,
        })
    }

    /// One sample per minute, the grid used throughout the workload traces.
    pub fn minutes() -> Self {
        Self {
            period_minutes: 1,
            samples_per_day: MINUTES_PER_DAY,
        }
    }

    pub fn period_minutes(&self) -> u32 {
        self.period_minutes
    }

    pub fn samples_per_day(&self) -> u32 {
        self.samples_per_day
    }
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self::minutes()
    }
}

/// A contiguous run of finite samples on a uniform minute grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    start: i64,
    values: Vec<T>,
    sampling: SamplingSpec,
}

impl<T: Scalar> TimeSeries<T> {
    /// Wrap raw samples. Rejects empty input and non-finite values.
    pub fn new(start: i64, values: Vec<T>, sampling: SamplingSpec) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::MalformedInput {
                line: 0,
                reason: "series has no samples".into(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedInput {
                line: i as u64,
                reason: format!("non-finite sample at offset {i}"),
            });
        }
        Ok(Self {
            start,
            values,
            sampling,
        })
    }

    /// Minute index of the first sample.
    pub fn start_index(&self) -> i64 {
        self.start
    }

    /// Minute index of the last sample.
    pub fn end_index(&self) -> i64 {
        self.start + (self.values.len() as i64 - 1) * self.period() as i64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // `new` rejects empty sample vectors
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn sampling(&self) -> SamplingSpec {
        self.sampling
    }

    pub fn period(&self) -> u32 {
        self.sampling.period_minutes
    }

    /// Position of minute `t` in the sample vector, if it is on the grid.
    pub fn index_of(&self, t: i64) -> Option<usize> {
        let off = t - self.start;
        let period = self.period() as i64;
        if off < 0 || off % period != 0 {
            return None;
        }
        let idx = (off / period) as usize;
        (idx < self.values.len()).then_some(idx)
    }

    pub fn value_at(&self, t: i64) -> Option<T> {
        self.index_of(t).map(|i| self.values[i])
    }

    /// Largest absolute sample value.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Rescale so the largest absolute value becomes exactly 1, returning the
    /// normalised series and the scale that was divided out.
    ///
    /// Applying it twice is a no-op: the second call divides by 1.
    pub fn normalize_max(&self) -> Result<(Self, T)> {
        let scale = self.max_abs();
        if scale <= T::zero() {
            return Err(Error::DegenerateSeries);
        }
        let values = self.values.iter().map(|v| *v / scale).collect();
        Ok((
            Self {
                start: self.start,
                values,
                sampling: self.sampling,
            },
            scale,
        ))
    }

    /// Contiguous sub-series of `length_minutes` worth of samples ending at
    /// minute `end_index` inclusive.
    pub fn window(&self, end_index: i64, length_minutes: u32) -> Result<Self> {
        let period = self.period();
        if length_minutes == 0 || !length_minutes.is_multiple_of(period) {
            return Err(Error::MisalignedWindow {
                window: length_minutes,
                period,
            });
        }
        let count = (length_minutes / period) as usize;
        let from = end_index - (count as i64 - 1) * period as i64;
        let (start_idx, end_idx) = match (self.index_of(from), self.index_of(end_index)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::OutOfHistory {
                    from,
                    to: end_index,
                    start: self.start,
                    end: self.end_index(),
                })
            }
        };
        Ok(Self {
            start: from,
            values: self.values[start_idx..=end_idx].to_vec(),
            sampling: self.sampling,
        })
    }
}
