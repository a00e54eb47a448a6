use super::graph::{KernelGraph, PhaseMode, StageSpec};
use super::pipeline::{fill_fraction, pipeline_cycles, theoretical_gflops};
use super::presets::{VersionId, VersionPreset};
use crate::ax::{flops_per_element, ProblemConfig};
use crate::error::{Error, Result};
use crate::memory::{bytes_per_element, transfer_time, validate_layout, HbmLayout, KernelPortMap};
use crate::report::{PerfRecord, ReferenceDataset};

/// Where the cycles of one simulated run go.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleBreakdown {
    /// Whole-run cycles of the slowest stage in each phase (ingest, forward, adjoint).
    pub phase_cycles: [u64; 3],
    pub compute_cycles: u64,
    pub transfer_cycles: u64,
    /// True when HBM traffic runs concurrently with compute.
    pub memory_overlapped: bool,
    pub total_cycles: u64,
}

impl CycleBreakdown {
    pub fn cycles_per_element(&self, nelt: usize) -> f64 {
        self.total_cycles as f64 / nelt as f64
    }
}

/// Whole-run cycles of one stage.
pub fn stage_run_cycles(stage: &StageSpec, nelt: u64) -> Result<u64> {
    if stage.drains_between_elements {
        Ok(nelt
            * pipeline_cycles(
                stage.trips_per_element,
                stage.ii,
                stage.depth,
                stage.batches_per_element,
            )?)
    } else {
        pipeline_cycles(nelt * stage.trips_per_element, stage.ii, stage.depth, 1)
    }
}

/// Whole-run fill fraction of one stage.
pub fn stage_fill_fraction(stage: &StageSpec, nelt: u64) -> Result<f64> {
    if stage.drains_between_elements {
        fill_fraction(
            stage.trips_per_element,
            stage.ii,
            stage.depth,
            stage.batches_per_element,
        )
    } else {
        fill_fraction(nelt * stage.trips_per_element, stage.ii, stage.depth, 1)
    }
}

/// Closed-form cycle count for running `graph` over `cfg.nelt()` elements.
///
/// Single region: every stage back to back, plus all memory traffic.
/// Serialized: per phase the slowest stage, phases summed. Overlapped: the
/// slowest phase. Traffic overlaps compute (total = max) only when the
/// kernel is a dataflow design and each argument has its own clean port;
/// otherwise the shared port stalls the pipeline and the two add.
pub fn predict_cycles(
    graph: &KernelGraph,
    ports: &KernelPortMap,
    cfg: &ProblemConfig,
    mem: &HbmLayout,
) -> Result<CycleBreakdown> {
    if graph.n != cfg.n() {
        return Err(Error::Model(format!(
            "inconsistent stage trip counts: graph sized for n={} but problem has n={}",
            graph.n,
            cfg.n()
        )));
    }
    graph.validate()?;
    let nelt = cfg.nelt() as u64;
    let mut phase_cycles = [0u64; 3];
    let mut sequential = 0u64;
    for stage in &graph.stages {
        let c = stage_run_cycles(stage, nelt)?;
        let slot = &mut phase_cycles[stage.phase.index()];
        *slot = (*slot).max(c);
        sequential += c;
    }
    let compute_cycles = match graph.phase_mode {
        PhaseMode::SingleRegion => sequential,
        PhaseMode::Serialized => phase_cycles.iter().sum(),
        PhaseMode::Overlapped => phase_cycles.iter().copied().max().unwrap_or(0),
    };
    let maps = std::slice::from_ref(ports);
    let seconds = transfer_time(bytes_per_element(cfg.n())?, nelt, maps, mem, graph.clock_mhz);
    // tolerate float noise on exact multiples
    let transfer_cycles = (seconds * graph.clock_mhz * 1e6 - 1e-6).ceil().max(0.0) as u64;
    let memory_overlapped = graph.phase_mode != PhaseMode::SingleRegion && validate_layout(maps, mem).is_valid();
    let total_cycles = if memory_overlapped {
        compute_cycles.max(transfer_cycles)
    } else {
        compute_cycles + transfer_cycles
    };
    Ok(CycleBreakdown {
        phase_cycles,
        compute_cycles,
        transfer_cycles,
        memory_overlapped,
        total_cycles,
    })
}

/// Predicted performance of one kernel version.
pub fn simulate_version(preset: &VersionPreset, cfg: &ProblemConfig, mem: &HbmLayout) -> Result<PerfRecord> {
    let breakdown = predict_cycles(&preset.graph, &preset.ports, cfg, mem)?;
    perf_from_cycles(preset.id.name(), &preset.graph, cfg, &breakdown)
}

/// Performance of running the AX kernel (`flops_per_element` per element)
/// in `breakdown.total_cycles`.
pub fn perf_from_cycles(
    label: &str,
    graph: &KernelGraph,
    cfg: &ProblemConfig,
    breakdown: &CycleBreakdown,
) -> Result<PerfRecord> {
    let flops = flops_per_element(cfg.n())? as f64 * cfg.nelt() as f64;
    perf_from_work(label, graph, flops, breakdown)
}

/// Performance of `flops` operations done in `breakdown.total_cycles`.
pub fn perf_from_work(label: &str, graph: &KernelGraph, flops: f64, breakdown: &CycleBreakdown) -> Result<PerfRecord> {
    let seconds = breakdown.total_cycles as f64 / (graph.clock_mhz * 1e6);
    let achieved = if seconds > 0.0 { flops / seconds / 1e9 } else { 0.0 };
    let theoretical = theoretical_gflops(graph.flops_per_cycle() as f64, graph.clock_mhz);
    PerfRecord::new(label, achieved, theoretical)
}

/// Flops a graph's stages declare per element: `flops_per_cycle * trips`.
pub fn declared_flops_per_element(graph: &KernelGraph) -> u64 {
    graph
        .stages
        .iter()
        .map(|s| s.flops_per_cycle * s.trips_per_element)
        .sum()
}

/// Simulates an arbitrary graph, crediting it with the work its stages
/// declare rather than the AX flop count.
pub fn simulate_graph(
    label: &str,
    graph: &KernelGraph,
    ports: &KernelPortMap,
    cfg: &ProblemConfig,
    mem: &HbmLayout,
) -> Result<(PerfRecord, CycleBreakdown)> {
    let breakdown = predict_cycles(graph, ports, cfg, mem)?;
    let flops = declared_flops_per_element(graph) as f64 * cfg.nelt() as f64;
    Ok((perf_from_work(label, graph, flops, &breakdown)?, breakdown))
}

/// One row of the optimisation ladder: model prediction joined with the
/// measured value.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow {
    pub id: VersionId,
    pub predicted: PerfRecord,
    pub breakdown: CycleBreakdown,
    pub measured_gflops: f64,
    /// The theoretical peak the measurement was quoted against (6.9, 61, 81.2).
    pub reference_theoretical: f64,
    /// `100 * measured / reference_theoretical`.
    pub measured_pct: f64,
}

pub fn ladder_row(
    preset: &VersionPreset,
    cfg: &ProblemConfig,
    mem: &HbmLayout,
    reference: &ReferenceDataset,
) -> Result<LadderRow> {
    let breakdown = predict_cycles(&preset.graph, &preset.ports, cfg, mem)?;
    let predicted = perf_from_cycles(preset.id.name(), &preset.graph, cfg, &breakdown)?;
    let measured = reference.version(preset.id)?;
    Ok(LadderRow {
        id: preset.id,
        predicted,
        breakdown,
        measured_gflops: measured.gflops,
        reference_theoretical: measured.theoretical_gflops,
        measured_pct: crate::report::percent_theoretical(measured.gflops, measured.theoretical_gflops)?,
    })
}

/// Runs all seven presets in ladder order.
pub fn optimization_ladder(
    cfg: &ProblemConfig,
    mem: &HbmLayout,
    reference: &ReferenceDataset,
) -> Result<Vec<LadderRow>> {
    VersionPreset::ladder(cfg.n())?
        .iter()
        .map(|p| ladder_row(p, cfg, mem, reference))
        .collect()
}

/// Slowdown from splitting a kernel into three compute units joined by
/// AXI4 streams, calibrated from the single-kernel figures (77.73 -> 74.29).
pub const DEFAULT_CU_SPLIT_OVERHEAD: f64 = 1.0 - 74.29 / 77.73;

pub fn cu_split_overhead(perf: &PerfRecord, overhead_fraction: f64) -> Result<PerfRecord> {
    if !(0.0..1.0).contains(&overhead_fraction) {
        return Err(Error::contract(format!(
            "overhead fraction must be in [0, 1), got {overhead_fraction}"
        )));
    }
    let mut out = PerfRecord::new(
        &perf.label,
        perf.gflops_achieved * (1.0 - overhead_fraction),
        perf.gflops_theoretical,
    )?;
    if let Some(w) = perf.watts {
        out = out.with_watts(w)?;
    }
    Ok(out)
}
