//! From normalized workload forecasts to virtual-machine counts.
//!
//! The input series is assumed to be normalized (dimensionless, roughly
//! `[0, 1]`). A forecast of it is converted to CPU-milliseconds per minute
//! by a linear scale factor, then to a machine count by dividing through one
//! VM's usable capacity. The default capacity of 30000 CPU-ms per minute is
//! one vCPU at a 50% utilization target — a minute offers 60000 CPU-ms, and
//! running hotter than half leaves no headroom for the fluctuation the
//! forecast deliberately ignores.

use std::io::Write;

use crate::error::{Error, Result};
use crate::forecast::{EstimatorConfig, ForecastEngine, Method};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

/// Normalized workload to CPU-milliseconds per minute.
pub const DEFAULT_SCALE_FACTOR: f64 = 5e6;

/// CPU-milliseconds per minute one VM provides at 50% target utilization.
pub const DEFAULT_VM_CAPACITY_MS: f64 = 30_000.0;

/// CPU-milliseconds per minute of one fully saturated vCPU.
pub const FULL_VCPU_MS_PER_MINUTE: f64 = 60_000.0;

/// Default provisioning lead time, minutes.
pub const DEFAULT_PROVISION_HORIZON: u32 = 30;

/// Knobs of the provisioning pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProvisioningConfig {
    pub scale_factor: f64,
    pub per_vm_capacity_ms: f64,
    pub horizon: u32,
    pub method: Method,
    pub estimator: EstimatorConfig,
}

impl Default for ProvisioningConfig {
    fn default() -> Self {
        Self {
            scale_factor: DEFAULT_SCALE_FACTOR,
            per_vm_capacity_ms: DEFAULT_VM_CAPACITY_MS,
            horizon: DEFAULT_PROVISION_HORIZON,
            method: Method::Mixed,
            estimator: EstimatorConfig::default(),
        }
    }
}

impl ProvisioningConfig {
    /// Set the per-VM capacity from a utilization target instead of raw
    /// CPU-milliseconds: `capacity = 60000 × target`.
    pub fn with_utilization_target(mut self, target: f64) -> Self {
        self.per_vm_capacity_ms = FULL_VCPU_MS_PER_MINUTE * target;
        self
    }
}

/// Scale a predicted normalized workload to CPU-milliseconds per minute.
/// Negative predictions (extrapolation can overshoot below zero near steep
/// declines) are clamped to zero; the boolean reports whether that happened.
pub fn rescale_to_cpu_millis<T: Scalar>(y_hat: T, scale_factor: T) -> (T, bool) {
    if y_hat < T::zero() {
        (T::zero(), true)
    } else {
        (y_hat * scale_factor, false)
    }
}

/// Machines needed for a predicted load: the exact quotient and the integer
/// count actually deployable, `max(1, ceil(z/capacity))`. The floor of one
/// keeps a machine running even under zero predicted load.
pub fn predict_vm_count<T: Scalar>(z_hat_ms: T, per_vm_capacity_ms: T) -> Result<(T, u64)> {
    if per_vm_capacity_ms <= T::zero() || per_vm_capacity_ms.is_nan() {
        return Err(Error::InvalidCapacity(
            per_vm_capacity_ms.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let continuous = z_hat_ms.max(T::zero()) / per_vm_capacity_ms;
    let n_vm = continuous.ceil().to_u64().unwrap_or(u64::MAX).max(1);
    Ok((continuous, n_vm))
}

/// Provisioning decision for one origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProvisionPlan<T> {
    pub origin_t: i64,
    pub horizon: u32,
    /// Predicted CPU-milliseconds per minute at `origin_t + horizon`.
    pub z_hat_ms: T,
    pub n_vm_continuous: T,
    pub n_vm: u64,
    /// The forecast dipped below zero and was clamped.
    pub clamped: bool,
}

/// Plans for every valid origin of one series, plus the settings that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProvisionRun<T> {
    pub config: ProvisioningConfig,
    pub plans: Vec<ProvisionPlan<T>>,
}

impl<T: Scalar> ProvisionRun<T> {
    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    /// How many origins had their forecast clamped at zero.
    pub fn clamped_count(&self) -> usize {
        self.plans.iter().filter(|p| p.clamped).count()
    }
}

/// Forecast the series with the configured method (mixed by default, at a
/// 30-minute lead) and emit one plan per valid origin.
pub fn provision_series<T: Scalar>(
    series: &TimeSeries<T>,
    config: &ProvisioningConfig,
) -> Result<ProvisionRun<T>> {
    if !(config.scale_factor > 0.0 && config.scale_factor.is_finite()) {
        return Err(Error::InvalidScaleFactor(config.scale_factor));
    }
    if !(config.per_vm_capacity_ms > 0.0 && config.per_vm_capacity_ms.is_finite()) {
        return Err(Error::InvalidCapacity(config.per_vm_capacity_ms));
    }

    let engine = ForecastEngine::new(series.clone(), config.estimator)?;
    let batch = engine.batch_default(config.method, config.horizon)?;

    let scale = T::from_f64_lossy(config.scale_factor);
    let capacity = T::from_f64_lossy(config.per_vm_capacity_ms);
    let mut plans = Vec::with_capacity(batch.len());
    for (origin, y_hat) in batch.iter() {
        let (z_hat_ms, clamped) = rescale_to_cpu_millis(y_hat, scale);
        let (n_vm_continuous, n_vm) = predict_vm_count(z_hat_ms, capacity)?;
        plans.push(ProvisionPlan {
            origin_t: origin,
            horizon: config.horizon,
            z_hat_ms,
            n_vm_continuous,
            n_vm,
            clamped,
        });
    }
    Ok(ProvisionRun {
        config: *config,
        plans,
    })
}

/// Emit plans as `origin_t,z_hat_ms,n_vm_continuous,n_vm` rows.
pub fn write_plan_csv<T: Scalar>(run: &ProvisionRun<T>, writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["origin_t", "z_hat_ms", "n_vm_continuous", "n_vm"])?;
    for plan in &run.plans {
        csv.write_record([
            plan.origin_t.to_string(),
            format!("{}", plan.z_hat_ms),
            format!("{}", plan.n_vm_continuous),
            plan.n_vm.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}
