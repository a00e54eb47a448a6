use super::perf::PerfRecord;
use super::reference::ReferenceDataset;
use super::table::{fmt2, fmt_opt2, TextTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    /// `model` for predictions, `reference` for measured rows.
    pub source: &'static str,
    pub gflops: f64,
    pub watts: Option<f64>,
    pub gflops_per_watt: Option<f64>,
    pub vs_cpu: f64,
    pub vs_gpu: f64,
}

/// Model predictions joined with the measured CPU, GPU and FPGA rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// Largest measured FPGA configuration over the 24-core CPU.
    pub fpga_vs_cpu: f64,
    /// Largest measured FPGA configuration over the GPU.
    pub fpga_vs_gpu: f64,
    pub fpga_label: String,
}

pub const COMPARISON_CSV_HEADER: &str = "label,source,gflops,watts,gflops_per_watt,vs_cpu24,vs_v100";

pub fn comparison_report(records: &[PerfRecord], reference: &ReferenceDataset) -> Result<ComparisonReport> {
    let cpu = reference.table2(ReferenceDataset::CPU_24)?.gflops;
    let gpu = reference.table2(ReferenceDataset::GPU)?.gflops;
    let fpga = *reference
        .fpga_rows()
        .last()
        .ok_or_else(|| Error::Format("no FPGA rows in reference data".into()))?;
    let mut rows: Vec<ComparisonRow> = reference
        .table2_rows
        .iter()
        .map(|r| ComparisonRow {
            label: r.description.clone(),
            source: "reference",
            gflops: r.gflops,
            watts: Some(r.watts),
            gflops_per_watt: Some(r.gflops_per_watt),
            vs_cpu: r.gflops / cpu,
            vs_gpu: r.gflops / gpu,
        })
        .collect();
    rows.extend(records.iter().map(|r| ComparisonRow {
        label: r.label.clone(),
        source: "model",
        gflops: r.gflops_achieved,
        watts: r.watts,
        gflops_per_watt: r.gflops_per_watt,
        vs_cpu: r.gflops_achieved / cpu,
        vs_gpu: r.gflops_achieved / gpu,
    }));
    Ok(ComparisonReport {
        rows,
        fpga_vs_cpu: fpga.gflops / cpu,
        fpga_vs_gpu: fpga.gflops / gpu,
        fpga_label: fpga.description.clone(),
    })
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(COMPARISON_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:.3},{:.3}\n",
                r.label,
                r.source,
                fmt2(r.gflops),
                fmt_opt2(r.watts),
                fmt_opt2(r.gflops_per_watt),
                r.vs_cpu,
                r.vs_gpu
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut t = TextTable::new([
            "Description",
            "Source",
            "GFLOPS",
            "Watts",
            "GFLOPS/Watt",
            "x CPU",
            "x GPU",
        ]);
        for r in &self.rows {
            t.push([
                r.label.clone(),
                r.source.to_string(),
                fmt2(r.gflops),
                fmt_opt2(r.watts),
                fmt_opt2(r.gflops_per_watt),
                format!("{:.3}", r.vs_cpu),
                format!("{:.3}", r.vs_gpu),
            ]);
        }
        let mut out = t.render();
        out.push_str(&format!(
            "{}: {:.2}x the 24-core CPU, {:.1}% of the V100\n",
            self.fpga_label,
            self.fpga_vs_cpu,
            100.0 * self.fpga_vs_gpu
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_ratios() {
        let rep = comparison_report(&[], &ReferenceDataset::bundled()).unwrap();
        assert!((rep.fpga_vs_cpu - 289.02 / 65.74).abs() < 1e-12);
        assert!((rep.fpga_vs_cpu - 4.40).abs() <= 0.01);
        assert!((rep.fpga_vs_gpu - 0.709).abs() <= 0.005);
    }

    #[test]
    fn empty_records_give_reference_only_table() {
        let rep = comparison_report(&[], &ReferenceDataset::bundled()).unwrap();
        assert_eq!(rep.rows.len(), 6);
        assert!(rep.rows.iter().all(|r| r.source == "reference"));
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.contains("4 kernels,reference,289.02,71.98,4.02,4.396,0.709"));
    }

    #[test]
    fn model_rows_appended() {
        let r = PerfRecord::new("model", 100.0, 200.0).unwrap();
        let rep = comparison_report(&[r], &ReferenceDataset::bundled()).unwrap();
        assert_eq!(rep.rows.len(), 7);
        assert_eq!(rep.rows[6].source, "model");
        assert!(rep.to_csv().ends_with("model,model,100.00,,,1.521,0.245\n"));
    }
}
