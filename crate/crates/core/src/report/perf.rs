use crate::error::{Error, Result};

/// One row of a performance report.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfRecord {
    pub label: String,
    pub gflops_achieved: f64,
    pub gflops_theoretical: f64,
    pub pct_theoretical: f64,
    pub watts: Option<f64>,
    pub gflops_per_watt: Option<f64>,
}

impl PerfRecord {
    pub fn new(label: &str, achieved: f64, theoretical: f64) -> Result<Self> {
        if !achieved.is_finite() || achieved < 0.0 {
            return Err(Error::contract(format!(
                "achieved GFLOPS must be finite and non-negative, got {achieved}"
            )));
        }
        Ok(Self {
            label: label.to_string(),
            gflops_achieved: achieved,
            gflops_theoretical: theoretical,
            pct_theoretical: percent_theoretical(achieved, theoretical)?,
            watts: None,
            gflops_per_watt: None,
        })
    }

    pub fn with_watts(mut self, watts: f64) -> Result<Self> {
        if watts <= 0.0 || !watts.is_finite() {
            return Err(Error::contract(format!("watts must be positive, got {watts}")));
        }
        self.watts = Some(watts);
        self.gflops_per_watt = Some(self.gflops_achieved / watts);
        Ok(self)
    }
}

pub fn percent_theoretical(achieved: f64, theoretical: f64) -> Result<f64> {
    if theoretical <= 0.0 || !theoretical.is_finite() {
        return Err(Error::contract(format!(
            "theoretical GFLOPS must be positive, got {theoretical}"
        )));
    }
    Ok(100.0 * achieved / theoretical)
}

/// GFLOPS per Watt of a record that carries a power figure.
pub fn efficiency(record: &PerfRecord) -> Result<f64> {
    match record.watts {
        Some(w) if w > 0.0 => Ok(record.gflops_achieved / w),
        Some(w) => Err(Error::contract(format!("watts must be positive, got {w}"))),
        None => Err(Error::contract(format!(
            "record {:?} has no power figure",
            record.label
        ))),
    }
}
