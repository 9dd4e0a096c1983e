//! Trend estimation and short-horizon forecasting for minute-sampled cloud
//! workload traces.
//!
//! The crate is organised as a pipeline:
//!
//! * [`series`] holds the [`TimeSeries`](series::TimeSeries) container plus
//!   CSV ingestion, max-normalisation and windowing.
//! * [`synth`] generates reproducible workload traces with a daily profile,
//!   a day-scale amplitude drift and additive noise.
//! * [`estimator`] builds sliding-window filter kernels that recover the
//!   local level and slope of the trend, and splits a series into
//!   `trend + residual`.
//! * [`forecast`] implements four trend forecasters: persistence, scaled
//!   persistence (day-over-day ratio), algebraic (first-order Taylor) and
//!   mixed (Taylor with the slope taken one day back).
//! * [`evaluation`] scores forecasters by summed squared error per horizon
//!   and renders the comparison table.
//! * [`provisioning`] turns normalised forecasts into CPU demand and a
//!   virtual machine count.
//!
//! All numeric code is generic over the scalar type through the [`Scalar`]
//! trait; `f64` aliases for the main types are exported at the crate root.

pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod forecast;
pub mod provisioning;
pub mod scalar;
pub mod series;
pub mod synth;

mod io;

pub use error::{Error, Result};
pub use io::{read_series_csv, read_series_csv_with, write_series_csv, IngestOptions};
pub use scalar::Scalar;

/// Minute-sampled series with `f64` samples, the type the CLI works with.
pub type TimeSeries64 = series::TimeSeries<f64>;
pub type TimeSeries32 = series::TimeSeries<f32>;

pub type TrendSeries64 = estimator::TrendSeries<f64>;
pub type TrendSeries32 = estimator::TrendSeries<f32>;

pub type FilterKernel64 = estimator::FilterKernel<f64>;
pub type FilterKernel32 = estimator::FilterKernel<f32>;

pub type ForecastSeries64 = forecast::ForecastSeries<f64>;
pub type ForecastSeries32 = forecast::ForecastSeries<f32>;

pub type EvaluationReport64 = evaluation::EvaluationReport<f64>;
pub type ProvisionRun64 = provisioning::ProvisionRun<f64>;
