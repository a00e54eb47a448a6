use crate::error::{Error, Result};

/// Cycles for `trips` iterations issued every `ii` cycles through a pipeline
/// of `depth`, split into `batches` equal runs that each fill and drain:
/// `batches * (depth + ii * (trips / batches - 1))`.
pub fn pipeline_cycles(trips: u64, ii: u64, depth: u64, batches: u64) -> Result<u64> {
    if trips == 0 || ii == 0 || depth == 0 || batches == 0 {
        return Err(Error::contract("trips, ii, depth and batches must all be positive"));
    }
    if !trips.is_multiple_of(batches) {
        return Err(Error::contract(format!(
            "{batches} batches do not divide {trips} trips"
        )));
    }
    Ok(batches * (depth + ii * (trips / batches - 1)))
}

/// Fraction of cycles spent issuing rather than filling or draining:
/// `ii * trips / pipeline_cycles`, clamped to 1 for pipelines shallower
/// than their II.
pub fn fill_fraction(trips: u64, ii: u64, depth: u64, batches: u64) -> Result<f64> {
    let cycles = pipeline_cycles(trips, ii, depth, batches)?;
    Ok(((ii * trips) as f64 / cycles as f64).min(1.0))
}

/// Peak GFLOPS with every pipeline full: concurrent flops per cycle times clock.
pub fn theoretical_gflops(flops_per_cycle: f64, clock_mhz: f64) -> f64 {
    flops_per_cycle * clock_mhz / 1000.0
}
