//! Short-horizon trend forecasters.
//!
//! Only the trend of a workload trace carries forecastable structure — the
//! fluctuation around it averages out over any horizon worth predicting — so
//! every method here extrapolates the trend and is scored against it. Four
//! methods are provided, from weakest to strongest on seasonal data:
//!
//! * **persistence** — the trend stays where it is;
//! * **scaled persistence** — persistence times the ratio of the trend one
//!   day back at the target offset to the trend one day back at the origin,
//!   a multiplicative daily-seasonality correction;
//! * **algebraic** — first-order Taylor extrapolation from the causal trend
//!   and slope at the origin;
//! * **mixed** — Taylor extrapolation from today's trend value using the
//!   slope measured one day back with the centered estimator, combining the
//!   seasonal cue with the robustness of a hindsight derivative.
//!
//! Horizons are capped at [`MAX_HORIZON_MINUTES`] by default; the cap can be
//! lifted explicitly, but all four formulas degrade well before a horizon
//! reaches the daily period.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::{
    build_degree1_kernels, decompose, estimate_derivative_centered, Alignment, FilterKernel,
    TrendSeries, DEFAULT_CAUSAL_WINDOW, DEFAULT_CENTERED_WINDOW,
};
use crate::scalar::Scalar;
use crate::series::{TimeSeries, MINUTES_PER_DAY};

/// Largest horizon accepted without an explicit override, minutes.
pub const MAX_HORIZON_MINUTES: u32 = 60;

const DAY: i64 = MINUTES_PER_DAY as i64;

/// Forecasting method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Persistence,
    ScaledPersistence,
    Algebraic,
    Mixed,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Persistence,
        Method::ScaledPersistence,
        Method::Algebraic,
        Method::Mixed,
    ];

    /// Stable identifier used in CSV output and config files.
    pub fn name(self) -> &'static str {
        match self {
            Method::Persistence => "persistence",
            Method::ScaledPersistence => "scaled_persistence",
            Method::Algebraic => "algebraic",
            Method::Mixed => "mixed",
        }
    }

    /// Two-letter column label for the comparison table.
    pub fn label(self) -> &'static str {
        match self {
            Method::Persistence => "Ps",
            Method::ScaledPersistence => "Pe",
            Method::Algebraic => "Al",
            Method::Mixed => "Mi",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "persistence" => Ok(Method::Persistence),
            "scaled" | "scaled_persistence" => Ok(Method::ScaledPersistence),
            "algebraic" => Ok(Method::Algebraic),
            "mixed" => Ok(Method::Mixed),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Denominator guard for the scaled-persistence ratio, proportional to the
/// series scale so that rescaling the input never changes which origins fall
/// back.
pub fn default_epsilon<T: Scalar>(series: &TimeSeries<T>) -> T {
    T::from_f64_lossy(1e-6) * series.max_abs()
}

fn trend_point<T: Scalar>(trend: &TrendSeries<T>, t: i64) -> Result<T> {
    trend.trend_at(t).ok_or(Error::OutOfHistory {
        from: t,
        to: t,
        start: trend.valid_from(),
        end: trend.valid_to(),
    })
}

fn derivative_point<T: Scalar>(trend: &TrendSeries<T>, t: i64) -> Result<T> {
    trend.derivative_at(t).ok_or(Error::OutOfHistory {
        from: t,
        to: t,
        start: trend.valid_from(),
        end: trend.valid_to(),
    })
}

fn check_horizon_grid(horizon: u32, period: u32) -> Result<()> {
    if horizon == 0 {
        return Err(Error::HorizonOutOfRange {
            horizon,
            max: MAX_HORIZON_MINUTES,
        });
    }
    if !horizon.is_multiple_of(period) {
        return Err(Error::MisalignedHorizon { horizon, period });
    }
    Ok(())
}

/// The trend stays at its current value: predicts `X_trend(t)` for `t + h`.
///
/// The horizon only determines which future instant the value is attributed
/// to; the prediction itself is independent of it.
pub fn forecast_persistence<T: Scalar>(trend: &TrendSeries<T>, t: i64, _horizon: u32) -> Result<T> {
    trend_point(trend, t)
}

/// Scaled-persistence output plus whether the denominator guard tripped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledForecast<T> {
    pub value: T,
    /// True when the day-back trend was within `epsilon` of zero and the
    /// forecast fell back to plain persistence.
    pub fell_back: bool,
}

/// Persistence with a multiplicative daily-seasonality correction:
/// `X_trend(t−1440+h) / X_trend(t−1440) × X_trend(t)`.
pub fn forecast_scaled_persistence<T: Scalar>(
    trend: &TrendSeries<T>,
    t: i64,
    horizon: u32,
    epsilon: T,
) -> Result<ScaledForecast<T>> {
    check_horizon_grid(horizon, trend.period())?;
    let current = trend_point(trend, t)?;
    let day_back = trend_point(trend, t - DAY)?;
    let day_back_target = trend_point(trend, t - DAY + horizon as i64)?;
    if day_back.abs() <= epsilon {
        return Ok(ScaledForecast {
            value: current,
            fell_back: true,
        });
    }
    Ok(ScaledForecast {
        value: day_back_target / day_back * current,
        fell_back: false,
    })
}

/// First-order Taylor extrapolation from the causal estimates at the origin:
/// `X_trend(t) + Ẋ_trend(t) · h`.
pub fn forecast_algebraic<T: Scalar>(trend: &TrendSeries<T>, t: i64, horizon: u32) -> Result<T> {
    if horizon == 0 {
        return Err(Error::HorizonOutOfRange {
            horizon,
            max: MAX_HORIZON_MINUTES,
        });
    }
    let value = trend_point(trend, t)?;
    let slope = derivative_point(trend, t)?;
    Ok(value + slope * T::from_f64_lossy(horizon as f64))
}

/// Taylor extrapolation with the slope taken one day back:
/// `X_trend(t) + Ẋ_centered(t−1440+h) · h`.
///
/// The derivative anchor sits a day in the past, so the centered window
/// around it uses only data before the origin as long as
/// `h + window/2 ≤ 1440`; larger combinations are rejected rather than
/// silently peeking past the origin.
pub fn forecast_mixed<T: Scalar>(
    trend: &TrendSeries<T>,
    series: &TimeSeries<T>,
    t: i64,
    horizon: u32,
    centered_slope: &FilterKernel<T>,
) -> Result<T> {
    check_horizon_grid(horizon, trend.period())?;
    let half_window = (centered_slope.window_minutes() / 2) as i64;
    if horizon as i64 + half_window > DAY {
        return Err(Error::HorizonOutOfRange {
            horizon,
            max: (DAY - half_window) as u32,
        });
    }
    let current = trend_point(trend, t)?;
    let slope = estimate_derivative_centered(series, t - DAY + horizon as i64, centered_slope)?;
    Ok(current + slope * T::from_f64_lossy(horizon as f64))
}

/// Ablation variant of the mixed method: same formula, but the day-back
/// slope comes from the causal estimator instead of the centered one.
pub fn forecast_mixed_causal<T: Scalar>(trend: &TrendSeries<T>, t: i64, horizon: u32) -> Result<T> {
    check_horizon_grid(horizon, trend.period())?;
    let current = trend_point(trend, t)?;
    let slope = derivative_point(trend, t - DAY + horizon as i64)?;
    Ok(current + slope * T::from_f64_lossy(horizon as f64))
}

/// One method applied at one origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast<T> {
    pub origin: i64,
    pub horizon: u32,
    /// The instant the prediction is for: `origin + horizon`.
    pub target: i64,
    pub value: T,
    /// Scaled persistence only: the denominator guard tripped.
    pub fell_back: bool,
}

/// Predictions of one method at one horizon over a contiguous origin range.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSeries<T> {
    method: Method,
    horizon: u32,
    period: u32,
    first_origin: i64,
    values: Vec<T>,
    fallback_origins: Vec<i64>,
}

impl<T: Scalar> ForecastSeries<T> {
    /// Assemble a forecast series from raw parts, e.g. when re-loading
    /// exported forecasts. `first_origin` is the origin of `values[0]`.
    pub fn from_parts(
        method: Method,
        horizon: u32,
        period: u32,
        first_origin: i64,
        values: Vec<T>,
    ) -> Result<Self> {
        if period == 0 {
            return Err(Error::IncompatibleSampling { period });
        }
        if horizon == 0 {
            return Err(Error::HorizonOutOfRange {
                horizon,
                max: MAX_HORIZON_MINUTES,
            });
        }
        Ok(Self {
            method,
            horizon,
            period,
            first_origin,
            values,
            fallback_origins: Vec::new(),
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_origin(&self) -> Option<i64> {
        (!self.values.is_empty()).then_some(self.first_origin)
    }

    pub fn last_origin(&self) -> Option<i64> {
        (!self.values.is_empty())
            .then(|| self.first_origin + (self.values.len() as i64 - 1) * self.period as i64)
    }

    pub fn origins(&self) -> impl Iterator<Item = i64> + '_ {
        let first = self.first_origin;
        let period = self.period as i64;
        (0..self.values.len() as i64).map(move |i| first + i * period)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `(origin, predicted)` pairs; the prediction targets `origin + h`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.origins().zip(self.values.iter().copied())
    }

    pub fn value_at(&self, origin: i64) -> Option<T> {
        let off = origin - self.first_origin;
        let period = self.period as i64;
        if off < 0 || off % period != 0 {
            return None;
        }
        self.values.get((off / period) as usize).copied()
    }

    /// Origins where scaled persistence fell back to plain persistence.
    pub fn fallback_origins(&self) -> &[i64] {
        &self.fallback_origins
    }
}

/// Write forecast series as `origin_t,horizon,method,predicted` rows.
pub fn write_forecast_csv<T: Scalar>(
    batches: &[ForecastSeries<T>],
    writer: impl Write,
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["origin_t", "horizon", "method", "predicted"])?;
    for batch in batches {
        for (origin, value) in batch.iter() {
            csv.write_record([
                origin.to_string(),
                batch.horizon.to_string(),
                batch.method.name().to_string(),
                format!("{value}"),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Window lengths for the two trend estimators backing the forecasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    /// Causal window for the live-edge trend and slope, minutes.
    pub causal_window: u32,
    /// Centered window for the day-back slope of the mixed method, minutes.
    /// Hindsight estimation tolerates a longer window, which buys noise
    /// suppression exactly where the mixed method is most sensitive.
    pub centered_window: u32,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            causal_window: DEFAULT_CAUSAL_WINDOW,
            centered_window: DEFAULT_CENTERED_WINDOW,
        }
    }
}

/// Shared state for forecasting one series: the causal trend decomposition
/// plus the centered slope kernel, built once and reused across methods,
/// origins and horizons.
#[derive(Debug, Clone)]
pub struct ForecastEngine<T> {
    series: TimeSeries<T>,
    config: EstimatorConfig,
    centered_slope: FilterKernel<T>,
    trend: TrendSeries<T>,
    epsilon: T,
    max_horizon: Option<u32>,
}

impl<T: Scalar> ForecastEngine<T> {
    pub fn new(series: TimeSeries<T>, config: EstimatorConfig) -> Result<Self> {
        let causal =
            build_degree1_kernels(config.causal_window, series.period(), Alignment::Causal)?;
        let centered =
            build_degree1_kernels(config.centered_window, series.period(), Alignment::Centered)?;
        let epsilon = default_epsilon(&series);
        let parts = decompose(&series, &causal)?;
        Ok(Self {
            series,
            config,
            centered_slope: centered.slope,
            trend: parts.trend,
            epsilon,
            max_horizon: Some(MAX_HORIZON_MINUTES),
        })
    }

    /// Lift the default horizon cap. Forecast quality beyond an hour is
    /// untested territory; mixed forecasts additionally stay rejected once
    /// the day-back window would overlap the origin's future.
    pub fn allow_long_horizons(mut self) -> Self {
        self.max_horizon = None;
        self
    }

    pub fn series(&self) -> &TimeSeries<T> {
        &self.series
    }

    /// The causal trend decomposition the forecasters draw from.
    pub fn trend(&self) -> &TrendSeries<T> {
        &self.trend
    }

    pub fn config(&self) -> EstimatorConfig {
        self.config
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    fn check_horizon(&self, horizon: u32) -> Result<()> {
        let cap = self.max_horizon.unwrap_or(u32::MAX);
        if horizon == 0 || horizon > cap {
            return Err(Error::HorizonOutOfRange {
                horizon,
                max: self.max_horizon.unwrap_or(MAX_HORIZON_MINUTES),
            });
        }
        Ok(())
    }

    /// Apply `method` at one origin.
    pub fn forecast(&self, method: Method, origin: i64, horizon: u32) -> Result<Forecast<T>> {
        self.check_horizon(horizon)?;
        let (value, fell_back) = match method {
            Method::Persistence => (forecast_persistence(&self.trend, origin, horizon)?, false),
            Method::ScaledPersistence => {
                let f = forecast_scaled_persistence(&self.trend, origin, horizon, self.epsilon)?;
                (f.value, f.fell_back)
            }
            Method::Algebraic => (forecast_algebraic(&self.trend, origin, horizon)?, false),
            Method::Mixed => (
                forecast_mixed(
                    &self.trend,
                    &self.series,
                    origin,
                    horizon,
                    &self.centered_slope,
                )?,
                false,
            ),
        };
        Ok(Forecast {
            origin,
            horizon,
            target: origin + horizon as i64,
            value,
            fell_back,
        })
    }

    /// Minutes of history consumed before `method` can emit its first batch
    /// forecast. Seasonal methods wait out a full day plus enough margin for
    /// their estimator windows; the two purely causal methods only need the
    /// causal window.
    pub fn warmup_minutes(&self, method: Method, horizon: u32) -> u32 {
        let causal = self.config.causal_window;
        match method {
            Method::Persistence | Method::Algebraic => causal,
            // The nominal day-plus-half-window start is clamped so the
            // day-back trend lookup never outruns the trend's own warm-up.
            Method::ScaledPersistence => {
                (MINUTES_PER_DAY + horizon + causal / 2).max(MINUTES_PER_DAY + causal)
            }
            Method::Mixed => MINUTES_PER_DAY + horizon + self.config.centered_window / 2,
        }
    }

    /// Batch origin range used when the caller does not supply one: from the
    /// end of the method's warm-up through the last recorded minute.
    pub fn default_origin_range(&self, method: Method, horizon: u32) -> (i64, i64) {
        let from = self.series.start_index() + self.warmup_minutes(method, horizon) as i64;
        (from, self.series.end_index())
    }

    /// Apply `method` at every origin in `[from, to]` on the sample grid.
    /// An empty range yields an empty series; per-origin failures are
    /// reported with the offending origin attached.
    pub fn batch(
        &self,
        method: Method,
        horizon: u32,
        from: i64,
        to: i64,
    ) -> Result<ForecastSeries<T>> {
        self.check_horizon(horizon)?;
        let period = self.series.period() as i64;
        let mut values = Vec::new();
        let mut fallback_origins = Vec::new();
        let mut t = from;
        while t <= to {
            let forecast = self
                .forecast(method, t, horizon)
                .map_err(|e| e.at_origin(t))?;
            values.push(forecast.value);
            if forecast.fell_back {
                fallback_origins.push(t);
            }
            t += period;
        }
        Ok(ForecastSeries {
            method,
            horizon,
            period: self.series.period(),
            first_origin: from,
            values,
            fallback_origins,
        })
    }

    /// [`Self::batch`] over the method's default origin range.
    pub fn batch_default(&self, method: Method, horizon: u32) -> Result<ForecastSeries<T>> {
        let (from, to) = self.default_origin_range(method, horizon);
        self.batch(method, horizon, from, to)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SamplingSpec;
    use crate::synth::{synthesize_workload, SynthesisSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trend_with(points: &[(i64, f64)], len: usize, fill: f64) -> TrendSeries<f64> {
        let mut values = vec![fill; len];
        for &(t, v) in points {
            values[t as usize] = v;
        }
        TrendSeries::from_parts(0, 1, values, vec![0.0; len]).unwrap()
    }

    #[test]
    fn method_names_parse_and_label() {
        for method in Method::ALL {
            assert_eq!(method.name().parse::<Method>().unwrap(), method);
        }
        assert_eq!(
            "scaled".parse::<Method>().unwrap(),
            Method::ScaledPersistence
        );
        assert_eq!(Method::ScaledPersistence.label(), "Pe");
        assert_eq!(Method::Algebraic.label(), "Al");
        assert_eq!(Method::Mixed.label(), "Mi");
        assert!(matches!(
            "fourier".parse::<Method>(),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn persistence_returns_the_current_trend_for_any_horizon() {
        let trend = trend_with(&[(100, 0.4)], 200, 1.0);
        for h in [1, 5, 30, 60] {
            assert_eq!(forecast_persistence(&trend, 100, h).unwrap(), 0.4);
        }
        assert!(matches!(
            forecast_persistence(&trend, 999, 5),
            Err(Error::OutOfHistory { .. })
        ));
    }

    #[test]
    fn scaled_persistence_matches_the_ratio_formula() {
        // trend(t)=4, trend(t-1440)=2, trend(t-1440+h)=3 -> 3/2*4 = 6.
        let h = 30u32;
        let trend = trend_with(&[(0, 2.0), (30, 3.0), (1440, 4.0)], 1441, 1.0);
        let out = forecast_scaled_persistence(&trend, 1440, h, 1e-9).unwrap();
        assert_eq!(out.value, 6.0);
        assert!(!out.fell_back);
    }

    #[test]
    fn scaled_persistence_with_flat_day_back_reduces_to_persistence() {
        // trend(t-1440+h) == trend(t-1440) -> ratio 1.
        let trend = trend_with(&[(0, 2.5), (30, 2.5), (1440, 4.0)], 1441, 1.0);
        let out = forecast_scaled_persistence(&trend, 1440, 30, 1e-9).unwrap();
        assert_eq!(out.value, 4.0);
    }

    #[test]
    fn scaled_persistence_guards_the_denominator() {
        let trend = trend_with(&[(0, 1e-12), (30, 3.0), (1440, 4.0)], 1441, 1.0);
        let out = forecast_scaled_persistence(&trend, 1440, 30, 1e-9).unwrap();
        assert!(out.fell_back);
        assert_eq!(out.value, 4.0); // persistence fallback

        let short = trend_with(&[(0, 2.0)], 100, 1.0);
        assert!(matches!(
            forecast_scaled_persistence(&short, 99, 30, 1e-9),
            Err(Error::OutOfHistory { .. })
        ));
    }

    #[test]
    fn algebraic_extrapolates_the_tangent() {
        let trend = TrendSeries::from_parts(0, 1, vec![5.0f64; 10], vec![0.1; 10]).unwrap();
        let out = forecast_algebraic(&trend, 4, 5).unwrap();
        assert!((out - 5.5).abs() <= 1e-12);
    }

    #[test]
    fn mixed_matches_the_day_back_slope_formula() {
        // Raw series with slope 0.1 everywhere; trend value 5 at the origin.
        let series = TimeSeries::new(
            0,
            (0..1600).map(|i| 0.1 * i as f64).collect(),
            SamplingSpec::minutes(),
        )
        .unwrap();
        let trend = trend_with(&[(1500, 5.0)], 1501, 1.0);
        let kernel = build_degree1_kernels(120, 1, Alignment::Centered)
            .unwrap()
            .slope;
        let out = forecast_mixed(&trend, &series, 1500, 30, &kernel).unwrap();
        assert!((out - 8.0).abs() <= 1e-9, "got {out}");
    }

    #[test]
    fn mixed_on_a_constant_series_reduces_to_persistence() {
        let series = TimeSeries::new(0, vec![0.7f64; 1700], SamplingSpec::minutes()).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        let origin = 1600;
        let mixed = engine.forecast(Method::Mixed, origin, 30).unwrap().value;
        let persistence = engine
            .forecast(Method::Persistence, origin, 30)
            .unwrap()
            .value;
        assert!((mixed - persistence).abs() <= 1e-12);
        assert!((mixed - 0.7).abs() <= 1e-12);
    }

    #[test]
    fn mixed_rejects_windows_that_would_peek_past_the_origin() {
        let spec = SynthesisSpec::default();
        let series = synthesize_workload::<f64>(3, &spec, 5).unwrap();
        let config = EstimatorConfig {
            causal_window: 60,
            centered_window: 2800,
        };
        let engine = ForecastEngine::new(series, config).unwrap();
        match engine.forecast(Method::Mixed, 4319, 60) {
            Err(Error::HorizonOutOfRange { horizon: 60, max }) => assert_eq!(max, 40),
            other => panic!("expected the causality guard to trip, got {other:?}"),
        }
    }

    #[test]
    fn horizon_cap_is_enforced_and_liftable() {
        let spec = SynthesisSpec::default();
        let series = synthesize_workload::<f64>(3, &spec, 5).unwrap();
        let engine = ForecastEngine::new(series.clone(), EstimatorConfig::default()).unwrap();
        assert!(matches!(
            engine.forecast(Method::Algebraic, 2000, 61),
            Err(Error::HorizonOutOfRange {
                horizon: 61,
                max: 60
            })
        ));
        assert!(matches!(
            engine.forecast(Method::Algebraic, 2000, 0),
            Err(Error::HorizonOutOfRange { horizon: 0, .. })
        ));

        let relaxed = ForecastEngine::new(series, EstimatorConfig::default())
            .unwrap()
            .allow_long_horizons();
        assert!(relaxed.forecast(Method::Algebraic, 2000, 120).is_ok());
        assert!(relaxed.forecast(Method::Mixed, 3000, 120).is_ok());
    }

    #[test]
    fn horizons_off_the_sample_grid_are_rejected() {
        let profile: Vec<f64> = (0..864)
            .map(|i| 1.0 + (i as f64 / 50.0).sin() * 0.2)
            .collect();
        let series = TimeSeries::new(0, profile, SamplingSpec::new(5).unwrap()).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        let origin = 4315; // minute 4315 = sample 863
        assert!(matches!(
            engine.forecast(Method::ScaledPersistence, origin, 7),
            Err(Error::MisalignedHorizon {
                horizon: 7,
                period: 5
            })
        ));
        assert!(engine
            .forecast(Method::ScaledPersistence, origin, 10)
            .is_ok());
        assert!(engine.forecast(Method::Mixed, origin, 10).is_ok());
    }

    #[test]
    fn affine_input_makes_algebraic_exact_and_persistence_err_bh() {
        let b = 0.03;
        let values: Vec<f64> = (0..2000).map(|i| 10.0 + b * i as f64).collect();
        let series = TimeSeries::new(0, values, SamplingSpec::minutes()).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        for h in [5u32, 30, 60] {
            for origin in [100i64, 700, 1900] {
                let truth = 10.0 + b * (origin + h as i64) as f64;
                let algebraic = engine.forecast(Method::Algebraic, origin, h).unwrap().value;
                assert!(
                    (algebraic - truth).abs() <= 1e-9 * truth.abs(),
                    "algebraic at t={origin} h={h}"
                );
                let persistence = engine
                    .forecast(Method::Persistence, origin, h)
                    .unwrap()
                    .value;
                let err = (persistence - truth).abs();
                let expected = b * h as f64;
                assert!(
                    (err - expected).abs() <= 1e-9 * (1.0 + expected),
                    "persistence error {err} vs b*h {expected}"
                );
            }
        }
    }

    /// On y = t^2 the whole pipeline is a polynomial in the kernel moments,
    /// so the forecast error has the closed form `C_v + C_d h - h^2` with
    /// `C_v`, `C_d` the second moments of the value and slope kernels. The
    /// pipeline must reproduce that number, and the error growth from h=5 to
    /// h=60 must match the moment formula's prediction.
    #[test]
    fn algebraic_error_on_a_quadratic_follows_the_moment_formula() {
        let window = 60u32;
        let pair = build_degree1_kernels::<f64>(window, 1, Alignment::Causal).unwrap();
        let second_moment = |k: &FilterKernel<f64>| -> f64 {
            k.weights()
                .iter()
                .zip(k.offsets_from_eval())
                .map(|(w, s)| w * (s as f64).powi(2))
                .sum()
        };
        let c_value = second_moment(&pair.value);
        let c_slope = second_moment(&pair.slope);

        let values: Vec<f64> = (0..4000).map(|i| (i as f64).powi(2)).collect();
        let series = TimeSeries::new(0, values, SamplingSpec::minutes()).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();

        let origin = 3000i64;
        let mut measured = Vec::new();
        for h in [5u32, 60] {
            let forecast = engine.forecast(Method::Algebraic, origin, h).unwrap().value;
            let truth = ((origin + h as i64) as f64).powi(2);
            let predicted_error = c_value + c_slope * h as f64 - (h as f64).powi(2);
            let actual_error = forecast - truth;
            assert!(
                (actual_error - predicted_error).abs() <= 1e-6 * predicted_error.abs(),
                "h={h}: measured {actual_error}, formula {predicted_error}"
            );
            measured.push(actual_error);
        }
        let expected_ratio = (c_value + c_slope * 60.0 - 3600.0) / (c_value + c_slope * 5.0 - 25.0);
        let ratio = measured[1] / measured[0];
        assert!(
            (ratio / expected_ratio - 1.0).abs() <= 0.2,
            "error growth {ratio} vs predicted {expected_ratio}"
        );
    }

    #[test]
    fn forecasts_scale_linearly_with_the_input() {
        let spec = SynthesisSpec::default();
        let series = synthesize_workload::<f64>(3, &spec, 11).unwrap();
        let scaled_values: Vec<f64> = series.values().iter().map(|v| v * 3.7).collect();
        let scaled_series =
            TimeSeries::new(series.start_index(), scaled_values, series.sampling()).unwrap();

        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        let engine_scaled = ForecastEngine::new(scaled_series, EstimatorConfig::default()).unwrap();
        for method in Method::ALL {
            for origin in [1600i64, 2500, 4319] {
                let one = engine.forecast(method, origin, 30).unwrap().value;
                let two = engine_scaled.forecast(method, origin, 30).unwrap().value;
                assert!(
                    (two - 3.7 * one).abs() <= 1e-12 * (1.0 + two.abs()),
                    "{method} at t={origin}"
                );
            }
        }
    }

    #[test]
    fn batch_covers_the_advertised_range_and_is_deterministic() {
        let spec = SynthesisSpec::default();
        let series = synthesize_workload::<f64>(10, &spec, 3).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();

        // Warm-ups at the default windows: causal-only methods need the
        // 60-minute window; scaled waits a day past the trend warm-up; mixed
        // waits a day plus horizon plus half the centered window.
        for (method, horizon, warmup) in [
            (Method::Persistence, 30, 60),
            (Method::Algebraic, 30, 60),
            (Method::ScaledPersistence, 5, 1500),
            (Method::ScaledPersistence, 60, 1530),
            (Method::Mixed, 30, 1530),
            (Method::Mixed, 60, 1560),
        ] {
            assert_eq!(
                engine.warmup_minutes(method, horizon),
                warmup,
                "{method} h={horizon}"
            );
            let batch = engine.batch_default(method, horizon).unwrap();
            assert_eq!(
                batch.first_origin(),
                Some(warmup as i64),
                "{method} h={horizon}"
            );
            assert_eq!(batch.last_origin(), Some(14399), "{method} h={horizon}");
            assert_eq!(batch.len(), 14400 - warmup as usize, "{method} h={horizon}");
        }

        let once = engine.batch_default(Method::Mixed, 30).unwrap();
        let twice = engine.batch_default(Method::Mixed, 30).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn empty_batch_range_yields_an_empty_series() {
        let spec = SynthesisSpec::default();
        let series = synthesize_workload::<f64>(2, &spec, 3).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        let batch = engine.batch(Method::Persistence, 5, 2000, 1999).unwrap();
        assert!(batch.is_empty());
        assert_eq!(batch.first_origin(), None);
        assert_eq!(batch.origins().count(), 0);
    }

    #[test]
    fn batch_persistence_equals_the_trend_slice() {
        let spec = SynthesisSpec::default();
        let series = synthesize_workload::<f64>(2, &spec, 3).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        let batch = engine.batch(Method::Persistence, 5, 100, 400).unwrap();
        for (origin, value) in batch.iter() {
            assert_eq!(value, engine.trend().trend_at(origin).unwrap());
        }
    }

    #[test]
    fn batch_errors_carry_the_offending_origin() {
        let spec = SynthesisSpec::default();
        let series = synthesize_workload::<f64>(2, &spec, 3).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        match engine.batch(Method::Mixed, 30, 100, 200) {
            Err(Error::AtOrigin {
                origin: 100,
                source,
            }) => {
                assert!(matches!(*source, Error::OutOfHistory { .. }));
            }
            other => panic!("expected an origin-tagged failure, got {other:?}"),
        }
    }

    #[test]
    fn scaled_fallback_origins_are_collected() {
        // Two days of zeros, then a jump: the day-back trend under the jump
        // is still zero, so scaled persistence must fall back there.
        let mut values = vec![0.0f64; 4320];
        for v in values.iter_mut().skip(2600) {
            *v = 1.0;
        }
        let series = TimeSeries::new(0, values, SamplingSpec::minutes()).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        let batch = engine
            .batch(Method::ScaledPersistence, 30, 3000, 3100)
            .unwrap();
        assert_eq!(batch.fallback_origins().len(), batch.len());
        let persistence = engine.batch(Method::Persistence, 30, 3000, 3100).unwrap();
        assert_eq!(batch.values(), persistence.values());
    }

    #[test]
    fn mixed_beats_persistence_on_the_noiseless_periodic_profile() {
        let spec = SynthesisSpec {
            amplitude_drift: 0.0,
            noise_std: 0.0,
            ..Default::default()
        };
        let series = synthesize_workload::<f64>(3, &spec, 0).unwrap();
        let engine = ForecastEngine::new(series.clone(), EstimatorConfig::default()).unwrap();

        let h = 5u32;
        let (from, to) = engine.default_origin_range(Method::Mixed, h);
        let to = to - h as i64;
        let mut sse_mixed = 0.0;
        let mut sse_persistence = 0.0;
        let mut t = from;
        while t <= to {
            let truth = series.value_at(t + h as i64).unwrap();
            let m = engine.forecast(Method::Mixed, t, h).unwrap().value;
            let p = engine.forecast(Method::Persistence, t, h).unwrap().value;
            sse_mixed += (m - truth).powi(2);
            sse_persistence += (p - truth).powi(2);
            t += 1;
        }
        assert!(
            sse_mixed <= sse_persistence,
            "mixed {sse_mixed} should not lose to persistence {sse_persistence}"
        );
    }

    #[test]
    fn forecast_csv_has_the_documented_shape() {
        let spec = SynthesisSpec::default();
        let series = synthesize_workload::<f64>(2, &spec, 3).unwrap();
        let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
        let batches = vec![
            engine.batch(Method::Persistence, 5, 100, 102).unwrap(),
            engine.batch(Method::Mixed, 5, 1505, 1506).unwrap(),
        ];
        let mut buf = Vec::new();
        write_forecast_csv(&batches, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "origin_t,horizon,method,predicted");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("100,5,persistence,"));
        assert!(lines[4].starts_with("1505,5,mixed,"));

        // Values survive the round trip exactly.
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let first: f64 = reader.records().next().unwrap().unwrap()[3]
            .parse()
            .unwrap();
        assert_eq!(first, batches[0].values()[0]);
    }

    #[test]
    fn random_series_keep_all_four_methods_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let values: Vec<f64> = (0..3200).map(|_| rng.gen_range(0.0..2.0)).collect();
            let series = TimeSeries::new(0, values, SamplingSpec::minutes()).unwrap();
            let engine = ForecastEngine::new(series, EstimatorConfig::default()).unwrap();
            for method in Method::ALL {
                let v = engine.forecast(method, 3100, 30).unwrap().value;
                assert!(v.is_finite(), "{method}");
            }
        }
    }
}
