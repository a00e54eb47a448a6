//! Measured figures shipped with the crate as CSV.
//!
//! `table1.csv`: `key,description,gflops,pct_of_cpu,pct_theoretical,theoretical_basis`,
//! one row per kernel version plus the 24-core CPU. `theoretical_basis` is the
//! peak each percentage was quoted against.
//!
//! `table2.csv`: `key,description,kernels,gflops,watts,gflops_per_watt`, with
//! `kernels` empty for the CPU and GPU rows.

use serde::Deserialize;

use crate::dataflow::VersionId;
use crate::error::{Error, Result};

const TABLE1_CSV: &str = include_str!("../../data/table1.csv");
const TABLE2_CSV: &str = include_str!("../../data/table2.csv");

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table1Row {
    pub key: String,
    pub description: String,
    pub gflops: f64,
    pub pct_of_cpu: Option<f64>,
    pub pct_theoretical: Option<f64>,
    pub theoretical_basis: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table2Row {
    pub key: String,
    pub description: String,
    pub kernels: Option<usize>,
    pub gflops: f64,
    pub watts: f64,
    pub gflops_per_watt: f64,
}

/// A measured kernel version: its GFLOPS and the peak it was quoted against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VersionMeasurement {
    pub gflops: f64,
    pub theoretical_gflops: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDataset {
    pub table1_rows: Vec<Table1Row>,
    pub table2_rows: Vec<Table2Row>,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

impl ReferenceDataset {
    pub const CPU_24: &'static str = "cpu24";
    pub const GPU: &'static str = "v100";

    /// The dataset compiled into the crate.
    pub fn bundled() -> Self {
        Self::from_csv(TABLE1_CSV, TABLE2_CSV).expect("bundled reference data is well formed")
    }

    pub fn from_csv(table1: &str, table2: &str) -> Result<Self> {
        let ds = Self {
            table1_rows: parse(table1)?,
            table2_rows: parse(table2)?,
        };
        for id in VersionId::ALL {
            ds.version(id)?;
        }
        for key in [Self::CPU_24, Self::GPU] {
            ds.table2(key)?;
        }
        if ds.fpga_rows().is_empty() {
            return Err(Error::Format("table 2 has no FPGA kernel rows".into()));
        }
        Ok(ds)
    }

    pub fn table1(&self, key: &str) -> Result<&Table1Row> {
        self.table1_rows
            .iter()
            .find(|r| r.key == key)
            .ok_or_else(|| Error::Format(format!("table 1 has no row {key:?}")))
    }

    pub fn table2(&self, key: &str) -> Result<&Table2Row> {
        self.table2_rows
            .iter()
            .find(|r| r.key == key)
            .ok_or_else(|| Error::Format(format!("table 2 has no row {key:?}")))
    }

    pub fn version(&self, id: VersionId) -> Result<VersionMeasurement> {
        let row = self.table1(id.name())?;
        let basis = row
            .theoretical_basis
            .ok_or_else(|| Error::Format(format!("table 1 row {:?} has no theoretical basis", row.key)))?;
        Ok(VersionMeasurement {
            gflops: row.gflops,
            theoretical_gflops: basis,
        })
    }

    /// FPGA rows of table 2 ordered by kernel count.
    pub fn fpga_rows(&self) -> Vec<&Table2Row> {
        let mut rows: Vec<_> = self.table2_rows.iter().filter(|r| r.kernels.is_some()).collect();
        rows.sort_by_key(|r| r.kernels);
        rows
    }

    pub fn fpga_row(&self, kernels: usize) -> Option<&Table2Row> {
        self.table2_rows.iter().find(|r| r.kernels == Some(kernels))
    }
}
