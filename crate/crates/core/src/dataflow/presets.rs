//! The seven kernel versions of the optimisation ladder, as stage graphs.
//!
//! Stage names follow the dataflow diagram: `read_u` fills the first
//! group's reorder buffers, `mm_r/mm_s/mm_t` are `local_grad3`'s three
//! contractions, `accum` applies the geometric factors, `mm_rt/mm_st/mm_tt`
//! are the adjoint contractions, `add_1/add_2` merge them and `write_w`
//! writes the result. `dxm1`/`dxtm1` are read once per run and not modelled
//! as stages.

use std::fmt;
use std::str::FromStr;

use super::graph::{KernelGraph, Phase, PhaseMode, PingPongEdge, StageSpec, StreamEdge};
use crate::error::{Error, Result};
use crate::memory::{KernelPortMap, PortWidth};

/// Matmul pipeline depth at 300 MHz.
pub const MATMUL_DEPTH: u64 = 45;
/// Matmul pipeline depth after retiming for 400 MHz.
pub const MATMUL_DEPTH_400MHZ: u64 = 61;
/// Initiation interval of the CPU-style matmul loop before refactoring.
pub const BASELINE_MATMUL_II: u64 = 102;
/// Depth used for the accumulation and addition stages.
pub const STAGE_DEPTH: u64 = 45;
pub const ACCUMULATE_FLOPS_PER_CYCLE: u64 = 15;

pub const SPREAD_BANKS: [usize; 5] = [0, 2, 4, 6, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VersionId {
    Baseline,
    Dataflow,
    MemOpt,
    MmOpt,
    PingPong,
    StallFree,
    Clock400,
}

impl VersionId {
    /// Ladder order.
    pub const ALL: [VersionId; 7] = [
        VersionId::Baseline,
        VersionId::Dataflow,
        VersionId::MemOpt,
        VersionId::MmOpt,
        VersionId::PingPong,
        VersionId::StallFree,
        VersionId::Clock400,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VersionId::Baseline => "baseline",
            VersionId::Dataflow => "dataflow",
            VersionId::MemOpt => "memopt",
            VersionId::MmOpt => "mmopt",
            VersionId::PingPong => "pingpong",
            VersionId::StallFree => "stallfree",
            VersionId::Clock400 => "clock400",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            VersionId::Baseline => "Initial FPGA version",
            VersionId::Dataflow => "Optimised for dataflow",
            VersionId::MemOpt => "Optimised memory access",
            VersionId::MmOpt => "Optimise matrix multiplications",
            VersionId::PingPong => "Ping-Pong buffering",
            VersionId::StallFree => "Remove pipeline stalls",
            VersionId::Clock400 => "Increase to 400 Mhz",
        }
    }

    pub fn clock_mhz(self) -> f64 {
        match self {
            VersionId::Clock400 => 400.0,
            _ => 300.0,
        }
    }
}

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VersionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        VersionId::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Model(format!("unknown preset {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VersionPreset {
    pub id: VersionId,
    pub graph: KernelGraph,
    pub ports: KernelPortMap,
}

impl VersionPreset {
    pub fn port_bits(&self) -> u32 {
        self.graph.port_width.bits()
    }

    pub fn build(id: VersionId, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::contract(format!("n must be at least 2, got {n}")));
        }
        let points = (n as u64).pow(3);
        let width = match id {
            VersionId::Baseline | VersionId::Dataflow => PortWidth::Bits64,
            _ => PortWidth::Bits512,
        };
        let ports = match id {
            VersionId::Baseline | VersionId::Dataflow => KernelPortMap::shared_bank(0, 0, width),
            _ => KernelPortMap::spread(0, SPREAD_BANKS, width),
        };
        let phase_mode = match id {
            VersionId::Baseline => PhaseMode::SingleRegion,
            VersionId::Dataflow | VersionId::MemOpt | VersionId::MmOpt => PhaseMode::Serialized,
            _ => PhaseMode::Overlapped,
        };
        let continuous = matches!(id, VersionId::StallFree | VersionId::Clock400);
        let mm_depth = if id == VersionId::Clock400 {
            MATMUL_DEPTH_400MHZ
        } else {
            MATMUL_DEPTH
        };

        let matmul = |name: &str, phase: Phase| -> StageSpec {
            let s = match id {
                // One output point per iteration, the n-term dot product inside.
                VersionId::Baseline => StageSpec::new(name, phase, points, BASELINE_MATMUL_II, mm_depth).flops(1),
                // Vitis-BLAS style: flattened k/j/i loop, one MAC per cycle,
                // results only after the last k.
                VersionId::Dataflow | VersionId::MemOpt => {
                    StageSpec::new(name, phase, points * n as u64, 1, mm_depth).flops(1)
                }
                // Unrolled over k: 2n-1 flops per cycle. Until the stall fix
                // the inner i loop drains after every j, i.e. n^2 batches of n.
                VersionId::MmOpt | VersionId::PingPong => StageSpec::new(name, phase, points, 1, mm_depth)
                    .flops(2 * n as u64 - 1)
                    .batches((n * n) as u64),
                VersionId::StallFree | VersionId::Clock400 => {
                    StageSpec::new(name, phase, points, 1, mm_depth).flops(2 * n as u64 - 1)
                }
            };
            if continuous {
                s.continuous()
            } else {
                s
            }
        };
        let compute = |name: &str, phase: Phase, flops: u64| {
            let s = StageSpec::new(name, phase, points, 1, STAGE_DEPTH).flops(flops);
            if continuous {
                s.continuous()
            } else {
                s
            }
        };
        let vpa = width.values_per_access();
        let io = |name: &str, phase: Phase, values: u64| StageSpec::new(name, phase, values.div_ceil(vpa), 1, 1);

        let mut stages = Vec::new();
        let dataflow = id != VersionId::Baseline;
        if dataflow {
            stages.push(io("read_u", Phase::Ingest, points));
            stages.push(io("read_g", Phase::Forward, 6 * points));
        }
        for name in ["mm_r", "mm_s", "mm_t"] {
            stages.push(matmul(name, Phase::Forward));
        }
        stages.push(compute("accum", Phase::Forward, ACCUMULATE_FLOPS_PER_CYCLE));
        for name in ["mm_rt", "mm_st", "mm_tt"] {
            stages.push(matmul(name, Phase::Adjoint));
        }
        stages.push(compute("add_1", Phase::Adjoint, 1));
        stages.push(compute("add_2", Phase::Adjoint, 1));
        if dataflow {
            stages.push(io("write_w", Phase::Adjoint, points));
        }

        let mut stream_edges: Vec<StreamEdge> = ["mm_r", "mm_s", "mm_t"]
            .into_iter()
            .map(|m| StreamEdge::new(m, "accum"))
            .collect();
        stream_edges.push(StreamEdge::new("mm_rt", "add_1"));
        stream_edges.push(StreamEdge::new("mm_st", "add_1"));
        stream_edges.push(StreamEdge::new("add_1", "add_2"));
        stream_edges.push(StreamEdge::new("mm_tt", "add_2"));

        let mut pingpong_edges = Vec::new();
        if dataflow {
            stream_edges.push(StreamEdge::new("read_g", "accum"));
            stream_edges.push(StreamEdge::new("add_2", "write_w"));
            let double = phase_mode == PhaseMode::Overlapped;
            for m in ["mm_r", "mm_s", "mm_t"] {
                let e = PingPongEdge::from_port("read_u", m, points, width);
                pingpong_edges.push(if double { e } else { e.single() });
            }
            for m in ["mm_rt", "mm_st", "mm_tt"] {
                let e = PingPongEdge::new("accum", m, points, 1);
                pingpong_edges.push(if double { e } else { e.single() });
            }
        } else {
            for m in ["mm_rt", "mm_st", "mm_tt"] {
                stream_edges.push(StreamEdge::new("accum", m));
            }
        }

        let graph = KernelGraph {
            n,
            stages,
            stream_edges,
            pingpong_edges,
            phase_mode,
            clock_mhz: id.clock_mhz(),
            port_width: width,
        };
        graph.validate()?;
        Ok(Self { id, graph, ports })
    }

    /// All seven presets in ladder order.
    pub fn ladder(n: usize) -> Result<Vec<Self>> {
        VersionId::ALL.into_iter().map(|id| Self::build(id, n)).collect()
    }
}
