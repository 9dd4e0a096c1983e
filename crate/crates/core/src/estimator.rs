//! Sliding-window estimation of a series' local level and slope.
//!
//! The trend model inside a window of length `T` minutes is affine,
//! `y(sigma) ~ a0 + a1 * sigma` with `sigma` measured from the window start.
//! Integrating the signal against two fixed polynomial weight functions
//! recovers the coefficients without any iterative fitting:
//!
//! ```text
//! a0 = (2 / T^2) * integral of (2T - 3 sigma) * y(sigma) d sigma
//! a1 = (6 / T^3) * integral of (2 sigma - T) * y(sigma) d sigma
//! ```
//!
//! Discretisation samples the weight functions on the minute grid with
//! trapezoidal quadrature, then applies a minimal rank-2 correction so the
//! discrete weights satisfy the defining moment identities exactly. With the
//! offsets `sigma_i` measured from the window's evaluation point, the value
//! kernel obeys `sum w_i = 1`, `sum w_i sigma_i = 0` and the slope kernel
//! obeys `sum w_i = 0`, `sum w_i sigma_i = 1`. Those four identities force
//! exact recovery of affine signals; everything else about the kernels is a
//! low-pass response that averages noise down.
//!
//! Two alignments are supported: causal windows evaluated at the right edge
//! (usable in real time) and centered windows evaluated at the midpoint
//! (usable in hindsight, with smaller bias on curved signals).

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{TimeSeries, MINUTES_PER_DAY};

/// Default causal window length in minutes.
pub const DEFAULT_CAUSAL_WINDOW: u32 = 60;

/// Default centered window length in minutes.
///
/// Centered estimation runs in hindsight, so it can afford the same reach
/// into the past as the causal window plus the mirror image into the future;
/// the extra span roughly halves the noise variance of the slope estimate.
pub const DEFAULT_CENTERED_WINDOW: u32 = 120;

/// What a kernel estimates at its evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelTarget {
    /// The local trend value `a0`.
    Value,
    /// The local trend slope `a1`, per minute.
    Slope,
}

impl KernelTarget {
    fn name(self) -> &'static str {
        match self {
            KernelTarget::Value => "value kernel",
            KernelTarget::Slope => "slope kernel",
        }
    }
}

/// Where the estimate is anchored relative to the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Window `[t - T, t]`, evaluated at the right edge `t`.
    Causal,
    /// Window `[t - T/2, t + T/2]`, evaluated at the midpoint `t`.
    Centered,
}

impl Alignment {
    fn name(self) -> &'static str {
        match self {
            Alignment::Causal => "causal kernel",
            Alignment::Centered => "centered kernel",
        }
    }
}

/// Finite impulse response estimating the trend value or slope at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterKernel<T> {
    weights: Vec<T>,
    window_minutes: u32,
    period_minutes: u32,
    target: KernelTarget,
    alignment: Alignment,
}

impl<T: Scalar> FilterKernel<T> {
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn window_minutes(&self) -> u32 {
        self.window_minutes
    }

    pub fn period_minutes(&self) -> u32 {
        self.period_minutes
    }

    pub fn target(&self) -> KernelTarget {
        self.target
    }

    pub fn alignment(&self) -> Alignment {
        self.alignment
    }

    /// Offset of the evaluation point from the window start, minutes.
    pub fn eval_offset_minutes(&self) -> u32 {
        match self.alignment {
            Alignment::Causal => self.window_minutes,
            Alignment::Centered => self.window_minutes / 2,
        }
    }

    /// Sample offsets from the evaluation point, minutes. Non-positive for
    /// causal kernels, symmetric around zero for centered ones.
    pub fn offsets_from_eval(&self) -> impl Iterator<Item = i64> + '_ {
        let eval = self.eval_offset_minutes() as i64;
        let period = self.period_minutes as i64;
        (0..self.weights.len() as i64).map(move |i| i * period - eval)
    }

    /// `(sum w_i, sum w_i sigma_i)` with offsets from the evaluation point.
    pub fn moment_sums(&self) -> (T, T) {
        let mut s0 = T::zero();
        let mut s1 = T::zero();
        for (w, sigma) in self.weights.iter().zip(self.offsets_from_eval()) {
            s0 += *w;
            s1 += *w * T::from_f64_lossy(sigma as f64);
        }
        (s0, s1)
    }

    /// Noise gain of the kernel: white noise of variance `v` comes out of the
    /// filter with variance `v * sum w_i^2`.
    pub fn sum_squared_weights(&self) -> T {
        self.weights.iter().map(|w| *w * *w).sum()
    }

    /// Apply the kernel to the window anchored at minute `t`.
    pub fn apply(&self, series: &TimeSeries<T>, t: i64) -> Result<T> {
        if series.period() != self.period_minutes {
            return Err(Error::KernelMismatch {
                expected: "kernel sharing the series' sampling period",
                got: "kernel built for a different period",
            });
        }
        let from = t - self.eval_offset_minutes() as i64;
        let to = from + self.window_minutes as i64;
        let start_idx = match series.index_of(from) {
            Some(i) if i + self.weights.len() <= series.len() => i,
            _ => {
                return Err(Error::OutOfHistory {
                    from,
                    to,
                    start: series.start_index(),
                    end: series.end_index(),
                })
            }
        };
        let samples = &series.values()[start_idx..start_idx + self.weights.len()];
        Ok(self.weights.iter().zip(samples).map(|(w, y)| *w * *y).sum())
    }
}

/// Matched value and slope kernels sharing one window.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPair<T> {
    pub value: FilterKernel<T>,
    pub slope: FilterKernel<T>,
}

impl<T: Scalar> KernelPair<T> {
    pub fn window_minutes(&self) -> u32 {
        self.value.window_minutes
    }

    pub fn alignment(&self) -> Alignment {
        self.value.alignment
    }

    /// Minutes of history needed before the evaluation point.
    pub fn lead_minutes(&self) -> u32 {
        self.value.eval_offset_minutes()
    }

    /// Minutes of future data needed after the evaluation point.
    pub fn lag_minutes(&self) -> u32 {
        self.value.window_minutes - self.value.eval_offset_minutes()
    }
}

/// Build the degree-1 value and slope kernels for a window of
/// `window_minutes` on a `period_minutes` grid.
///
/// The value kernel already includes the shift from the window start to the
/// evaluation point (`a0 + a1 * offset`), so applying it yields the trend at
/// the anchor minute directly. Windows must cover at least four sampling
/// periods for the quadrature to have any support; centered windows must
/// also split evenly around the midpoint.
pub fn build_degree1_kernels<T: Scalar>(
    window_minutes: u32,
    period_minutes: u32,
    alignment: Alignment,
) -> Result<KernelPair<T>> {
    if period_minutes == 0 || !window_minutes.is_multiple_of(period_minutes) {
        return Err(Error::MisalignedWindow {
            window: window_minutes,
            period: period_minutes,
        });
    }
    if window_minutes < 4 * period_minutes {
        return Err(Error::WindowTooShort {
            window: window_minutes,
            min: 4 * period_minutes,
        });
    }
    let intervals = (window_minutes / period_minutes) as usize;
    if alignment == Alignment::Centered && !intervals.is_multiple_of(2) {
        // The midpoint has to land on the sample grid.
        return Err(Error::MisalignedWindow {
            window: window_minutes,
            period: period_minutes,
        });
    }

    let tw = T::from_f64_lossy(window_minutes as f64);
    let dt = T::from_f64_lossy(period_minutes as f64);
    let two = T::from_f64_lossy(2.0);
    let three = T::from_f64_lossy(3.0);
    let six = T::from_f64_lossy(6.0);
    let half = T::from_f64_lossy(0.5);

    let a0_scale = two / (tw * tw);
    let a1_scale = six / (tw * tw * tw);
    let eval_offset = match alignment {
        Alignment::Causal => tw,
        Alignment::Centered => tw * half,
    };

    // Trapezoid samples of the two continuous weight functions, with the
    // value kernel composed with the shift to the evaluation point.
    let mut value = Vec::with_capacity(intervals + 1);
    let mut slope = Vec::with_capacity(intervals + 1);
    for i in 0..=intervals {
        let sigma = T::from_f64_lossy((i as u32 * period_minutes) as f64);
        let quad = if i == 0 || i == intervals {
            dt * half
        } else {
            dt
        };
        let f0 = a0_scale * (two * tw - three * sigma) * quad;
        let f1 = a1_scale * (two * sigma - tw) * quad;
        value.push(f0 + eval_offset * f1);
        slope.push(f1);
    }

    // Offsets from the evaluation point, the coordinate the moment
    // identities are stated in.
    let offsets: Vec<T> = (0..=intervals)
        .map(|i| T::from_f64_lossy((i as u32 * period_minutes) as f64) - eval_offset)
        .collect();
    correct_moments(&mut value, &offsets, T::one(), T::zero());
    correct_moments(&mut slope, &offsets, T::zero(), T::one());

    let make = |weights, target| FilterKernel {
        weights,
        window_minutes,
        period_minutes,
        target,
        alignment,
    };
    Ok(KernelPair {
        value: make(value, KernelTarget::Value),
        slope: make(slope, KernelTarget::Slope),
    })
}

/// Shift the weights by the smallest (least-squares) correction that makes
/// `sum w = target0` and `sum w sigma = target1` hold exactly. The correction
/// lives in the span of `{1, sigma}`, hence rank 2.
fn correct_moments<T: Scalar>(weights: &mut [T], offsets: &[T], target0: T, target1: T) {
    let n = T::from_usize_lossy(weights.len());
    let mut s_sigma = T::zero();
    let mut s_sigma2 = T::zero();
    let mut m0 = T::zero();
    let mut m1 = T::zero();
    for (w, sigma) in weights.iter().zip(offsets) {
        s_sigma += *sigma;
        s_sigma2 += *sigma * *sigma;
        m0 += *w;
        m1 += *w * *sigma;
    }
    let r0 = target0 - m0;
    let r1 = target1 - m1;
    // Solve the 2x2 normal equations [n, s; s, s2] * lambda = r.
    let det = n * s_sigma2 - s_sigma * s_sigma;
    let l0 = (s_sigma2 * r0 - s_sigma * r1) / det;
    let l1 = (n * r1 - s_sigma * r0) / det;
    for (w, sigma) in weights.iter_mut().zip(offsets) {
        *w += l0 + l1 * *sigma;
    }
}

/// Trend level and slope per minute over the range where a full estimation
/// window fits inside the source series.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendSeries<T> {
    start: i64,
    period: u32,
    trend: Vec<T>,
    derivative: Vec<T>,
}

impl<T: Scalar> TrendSeries<T> {
    /// Assemble a trend series from raw vectors, mainly useful in tests and
    /// when loading previously exported estimates.
    pub fn from_parts(start: i64, period: u32, trend: Vec<T>, derivative: Vec<T>) -> Result<Self> {
        if trend.is_empty() || trend.len() != derivative.len() {
            return Err(Error::MalformedInput {
                line: 0,
                reason: "trend and derivative must be equally sized and non-empty".into(),
            });
        }
        if period == 0 {
            return Err(Error::IncompatibleSampling { period });
        }
        Ok(Self {
            start,
            period,
            trend,
            derivative,
        })
    }

    /// First minute with an estimate.
    pub fn valid_from(&self) -> i64 {
        self.start
    }

    /// Last minute with an estimate.
    pub fn valid_to(&self) -> i64 {
        self.start + (self.trend.len() as i64 - 1) * self.period as i64
    }

    pub fn len(&self) -> usize {
        self.trend.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trend.is_empty()
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn trend_values(&self) -> &[T] {
        &self.trend
    }

    pub fn derivative_values(&self) -> &[T] {
        &self.derivative
    }

    fn index_of(&self, t: i64) -> Option<usize> {
        let off = t - self.start;
        let period = self.period as i64;
        if off < 0 || off % period != 0 {
            return None;
        }
        let idx = (off / period) as usize;
        (idx < self.trend.len()).then_some(idx)
    }

    pub fn trend_at(&self, t: i64) -> Option<T> {
        self.index_of(t).map(|i| self.trend[i])
    }

    pub fn derivative_at(&self, t: i64) -> Option<T> {
        self.index_of(t).map(|i| self.derivative[i])
    }
}

/// Additive split of a series into trend and what the trend leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    pub trend: TrendSeries<T>,
    /// `series - trend` on the trend's valid range.
    pub residual: TimeSeries<T>,
}

/// Estimate the trend value and slope at minute `t` from a causal window.
pub fn estimate_trend<T: Scalar>(
    series: &TimeSeries<T>,
    t: i64,
    kernels: &KernelPair<T>,
) -> Result<(T, T)> {
    if kernels.alignment() != Alignment::Causal {
        return Err(Error::KernelMismatch {
            expected: "causal kernel",
            got: kernels.alignment().name(),
        });
    }
    Ok((
        kernels.value.apply(series, t)?,
        kernels.slope.apply(series, t)?,
    ))
}

/// Estimate the trend slope at minute `t` from a window centered on `t`.
///
/// This looks ahead of `t`, so callers must only anchor it at points far
/// enough in the past that the window stays inside recorded history.
pub fn estimate_derivative_centered<T: Scalar>(
    series: &TimeSeries<T>,
    t: i64,
    kernel: &FilterKernel<T>,
) -> Result<T> {
    if kernel.alignment != Alignment::Centered || kernel.target != KernelTarget::Slope {
        return Err(Error::KernelMismatch {
            expected: "centered slope kernel",
            got: match (kernel.alignment, kernel.target) {
                (Alignment::Centered, t) => t.name(),
                (a, _) => a.name(),
            },
        });
    }
    kernel.apply(series, t)
}

/// Split `series` into trend estimates and residual over every minute where
/// the pair's full window fits.
///
/// The residual is stored so that `trend + residual` reproduces the input:
/// the subtraction `series - trend` is exact in floating point whenever the
/// residual is no larger in magnitude than the sample itself, which holds for
/// any series whose trend tracks it to within its own scale.
pub fn decompose<T: Scalar>(
    series: &TimeSeries<T>,
    kernels: &KernelPair<T>,
) -> Result<Decomposition<T>> {
    let period = series.period() as i64;
    let valid_from = series.start_index() + kernels.lead_minutes() as i64;
    let valid_to = series.end_index() - kernels.lag_minutes() as i64;
    if valid_to < valid_from {
        let span = series.end_index() - series.start_index();
        return Err(Error::WindowTooShort {
            window: span as u32,
            min: kernels.window_minutes(),
        });
    }

    let count = ((valid_to - valid_from) / period + 1) as usize;
    let mut trend = Vec::with_capacity(count);
    let mut derivative = Vec::with_capacity(count);
    let mut residual = Vec::with_capacity(count);
    let mut t = valid_from;
    while t <= valid_to {
        let level = kernels.value.apply(series, t)?;
        let slope = kernels.slope.apply(series, t)?;
        let sample = series.value_at(t).expect("t runs over the series grid");
        trend.push(level);
        derivative.push(slope);
        residual.push(sample - level);
        t += period;
    }

    Ok(Decomposition {
        trend: TrendSeries {
            start: valid_from,
            period: series.period(),
            trend,
            derivative,
        },
        residual: TimeSeries::new(valid_from, residual, series.sampling())?,
    })
}

/// Mean residual over each full day contained in the residual series.
///
/// A sound trend split leaves day means near zero; the numbers are reported
/// for inspection rather than enforced.
pub fn daily_residual_means<T: Scalar>(residual: &TimeSeries<T>) -> Vec<T> {
    let per_day = residual.sampling().samples_per_day() as usize;
    residual
        .values()
        .chunks_exact(per_day)
        .map(|day| day.iter().copied().sum::<T>() / T::from_usize_lossy(per_day))
        .collect()
}

/// Dump a kernel pair as `offset_minutes,weight_a0,weight_a1` rows, offsets
/// measured from the evaluation point.
pub fn write_kernels_csv<T: Scalar>(kernels: &KernelPair<T>, writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["offset_minutes", "weight_a0", "weight_a1"])?;
    let offsets = kernels.value.offsets_from_eval();
    for ((offset, w0), w1) in offsets
        .zip(&kernels.value.weights)
        .zip(&kernels.slope.weights)
    {
        csv.write_record([offset.to_string(), format!("{w0}"), format!("{w1}")])?;
    }
    csv.flush()?;
    Ok(())
}

/// Warm-up helper: minutes of history a causal pair consumes before its
/// first estimate, i.e. the trend's `valid_from` minus the series start.
pub fn causal_warmup_minutes(window_minutes: u32) -> u32 {
    window_minutes
}

/// Convenience: day length re-exported where estimation call sites need it.
pub const SEASON_MINUTES: u32 = MINUTES_PER_DAY;
