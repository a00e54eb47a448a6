//! Analytic cycle model of the HLS dataflow kernel.
//!
//! Every figure is closed-form: no event simulation. FIFO depths are carried
//! in the graph but assumed never to block. The model accepts any clock;
//! it does not capture the II rising to 2 above 400 MHz.

mod graph;
mod pipeline;
mod presets;
mod simulate;

pub use graph::{KernelGraph, Phase, PhaseMode, PingPongEdge, StageSpec, StreamEdge, DEFAULT_FIFO_DEPTH};
pub use pipeline::{fill_fraction, pipeline_cycles, theoretical_gflops};
pub use presets::{
    VersionId, VersionPreset, ACCUMULATE_FLOPS_PER_CYCLE, BASELINE_MATMUL_II, MATMUL_DEPTH, MATMUL_DEPTH_400MHZ,
    SPREAD_BANKS, STAGE_DEPTH,
};
pub use simulate::{
    cu_split_overhead, declared_flops_per_element, ladder_row, optimization_ladder, perf_from_cycles, perf_from_work,
    predict_cycles, simulate_graph, simulate_version, stage_fill_fraction, stage_run_cycles, CycleBreakdown, LadderRow,
    DEFAULT_CU_SPLIT_OVERHEAD,
};
