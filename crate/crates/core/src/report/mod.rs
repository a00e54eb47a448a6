//! Performance and power accounting, reference measurements and report tables.

mod compare;
mod perf;
mod power;
mod reference;
mod table;

pub use compare::{comparison_report, ComparisonReport, ComparisonRow, COMPARISON_CSV_HEADER};
pub use perf::{efficiency, percent_theoretical, PerfRecord};
pub use power::{scale_kernels, PowerModel};
pub use reference::{ReferenceDataset, Table1Row, Table2Row, VersionMeasurement};
pub use table::{fmt2, fmt_opt2, TextTable};
