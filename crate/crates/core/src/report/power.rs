use super::perf::PerfRecord;
use super::reference::ReferenceDataset;
use crate::error::{Error, Result};

/// Card power and multi-kernel throughput model.
///
/// `watts = idle + k * watts_per_kernel`. Throughput is `k * single` times
/// `scaling_efficiency` once more than one kernel shares the card, and is
/// divided by `contention_penalty` when the HBM layout is invalid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub idle_watts: f64,
    pub watts_per_kernel: f64,
    pub scaling_efficiency: f64,
    pub contention_penalty: f64,
    pub max_kernels: usize,
}

impl PowerModel {
    /// Card draw with the bitstream loaded and no kernel running.
    pub const IDLE_WATTS: f64 = 39.0;
    /// Slope through the 1- and 4-kernel rows, `(71.98 - 45.61) / 3`.
    pub const TWO_POINT_WATTS_PER_KERNEL: f64 = 8.79;
    /// The rounded per-kernel increment quoted alongside the measurements.
    pub const NOMINAL_WATTS_PER_KERNEL: f64 = 7.0;
    pub const MAX_KERNELS: usize = 4;
    pub const CONTENTION_PENALTY: f64 = 2.0;

    pub fn new(
        idle_watts: f64,
        watts_per_kernel: f64,
        scaling_efficiency: f64,
        contention_penalty: f64,
        max_kernels: usize,
    ) -> Result<Self> {
        let pm = Self {
            idle_watts,
            watts_per_kernel,
            scaling_efficiency,
            contention_penalty,
            max_kernels,
        };
        pm.validate()?;
        Ok(pm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.idle_watts < 0.0 || !self.idle_watts.is_finite() {
            return Err(Error::Model(format!(
                "idle_watts must be >= 0, got {}",
                self.idle_watts
            )));
        }
        if self.watts_per_kernel < 0.0 || !self.watts_per_kernel.is_finite() {
            return Err(Error::Model(format!(
                "watts_per_kernel must be >= 0, got {}",
                self.watts_per_kernel
            )));
        }
        if !(self.scaling_efficiency > 0.0 && self.scaling_efficiency <= 1.0) {
            return Err(Error::Model(format!(
                "scaling_efficiency must be in (0, 1], got {}",
                self.scaling_efficiency
            )));
        }
        if self.contention_penalty < 1.0 || !self.contention_penalty.is_finite() {
            return Err(Error::Model(format!(
                "contention_penalty must be >= 1, got {}",
                self.contention_penalty
            )));
        }
        if self.max_kernels == 0 {
            return Err(Error::Model("max_kernels must be at least 1".into()));
        }
        Ok(())
    }

    /// Fits the model to the FPGA rows of `reference`.
    ///
    /// `watts_per_kernel` is the least-squares slope with the intercept pinned
    /// at idle power, `sum k (W_k - idle) / sum k^2`. `scaling_efficiency` is
    /// the largest configuration's throughput over perfect scaling of the
    /// single kernel.
    pub fn calibrated(reference: &ReferenceDataset) -> Result<Self> {
        let rows = reference.fpga_rows();
        let single = reference
            .fpga_row(1)
            .ok_or_else(|| Error::Format("no single-kernel row to calibrate against".into()))?;
        let (mut num, mut den) = (0.0, 0.0);
        for r in &rows {
            let k = r.kernels.unwrap_or(0) as f64;
            num += k * (r.watts - Self::IDLE_WATTS);
            den += k * k;
        }
        let largest = rows.last().expect("fpga_rows is non-empty");
        let k = largest.kernels.unwrap_or(1) as f64;
        let scaling_efficiency = if k > 1.0 {
            (largest.gflops / (k * single.gflops)).min(1.0)
        } else {
            1.0
        };
        Self::new(
            Self::IDLE_WATTS,
            num / den,
            scaling_efficiency,
            Self::CONTENTION_PENALTY,
            Self::MAX_KERNELS,
        )
    }

    pub fn watts(&self, kernels: usize) -> f64 {
        self.idle_watts + kernels as f64 * self.watts_per_kernel
    }
}

impl Default for PowerModel {
    fn default() -> Self {
        Self::calibrated(&ReferenceDataset::bundled()).expect("bundled reference data calibrates")
    }
}

/// Predicts `k` identical kernels on one card from a single-kernel record.
pub fn scale_kernels(single: &PerfRecord, k: usize, pm: &PowerModel, layout_valid: bool) -> Result<PerfRecord> {
    if k == 0 {
        return Err(Error::contract("kernel count must be at least 1"));
    }
    if k > pm.max_kernels {
        return Err(Error::Capacity(format!(
            "{k} kernels requested but at most {} fit on the device",
            pm.max_kernels
        )));
    }
    let mut factor = k as f64;
    if k > 1 {
        factor *= pm.scaling_efficiency;
    }
    if !layout_valid {
        factor /= pm.contention_penalty;
    }
    let label = if k == 1 {
        "1 kernel".to_string()
    } else {
        format!("{k} kernels")
    };
    PerfRecord::new(
        &label,
        single.gflops_achieved * factor,
        single.gflops_theoretical * k as f64,
    )?
    .with_watts(pm.watts(k))
}
