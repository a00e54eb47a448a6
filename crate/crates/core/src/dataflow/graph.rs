use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::memory::PortWidth;

/// Which of the kernel's three per-element phases a stage belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    /// Filling the first matmul group's reorder buffers from HBM.
    Ingest,
    /// First matmul group plus the geometric accumulation.
    Forward,
    /// Second matmul group, the two additions and the write-back.
    Adjoint,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Ingest, Phase::Forward, Phase::Adjoint];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Ingest => "ingest",
            Phase::Forward => "forward",
            Phase::Adjoint => "adjoint",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Phase {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Phase::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown phase {s:?} (ingest|forward|adjoint)"))
    }
}

/// How the three phases of consecutive elements relate in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseMode {
    /// No dataflow at all: every stage runs to completion before the next,
    /// and memory traffic does not overlap compute.
    SingleRegion,
    /// Phases of one element run back to back; stages within a phase overlap.
    Serialized,
    /// The three phases work on elements e+1, e, e-1 at once (needs
    /// double-buffered hand-offs).
    Overlapped,
}

impl PhaseMode {
    pub fn name(self) -> &'static str {
        match self {
            PhaseMode::SingleRegion => "single-region",
            PhaseMode::Serialized => "serialized",
            PhaseMode::Overlapped => "overlapped",
        }
    }
}

impl FromStr for PhaseMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "single-region" => Ok(PhaseMode::SingleRegion),
            "serialized" => Ok(PhaseMode::Serialized),
            "overlapped" => Ok(PhaseMode::Overlapped),
            _ => Err(format!(
                "unknown phase mode {s:?} (single-region|serialized|overlapped)"
            )),
        }
    }
}

/// One pipelined loop in the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSpec {
    pub name: String,
    pub phase: Phase,
    /// Loop iterations per element.
    pub trips_per_element: u64,
    pub ii: u64,
    pub depth: u64,
    /// Floating-point operations in flight per cycle once filled.
    pub flops_per_cycle: u64,
    /// Separately filled and drained runs per element.
    pub batches_per_element: u64,
    /// False when the pipeline keeps running from one element into the next
    /// (only meaningful with overlapped phases).
    pub drains_between_elements: bool,
}

impl StageSpec {
    pub fn new(name: impl Into<String>, phase: Phase, trips: u64, ii: u64, depth: u64) -> Self {
        Self {
            name: name.into(),
            phase,
            trips_per_element: trips,
            ii,
            depth,
            flops_per_cycle: 0,
            batches_per_element: 1,
            drains_between_elements: true,
        }
    }

    pub fn flops(mut self, per_cycle: u64) -> Self {
        self.flops_per_cycle = per_cycle;
        self
    }

    pub fn batches(mut self, batches: u64) -> Self {
        self.batches_per_element = batches;
        self
    }

    pub fn continuous(mut self) -> Self {
        self.drains_between_elements = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Model(format!("stage {}: {m}", self.name)));
        if self.ii < 1 {
            return fail("ii must be at least 1");
        }
        if self.depth < 1 {
            return fail("depth must be at least 1");
        }
        if self.trips_per_element < 1 {
            return fail("trips_per_element must be at least 1");
        }
        if self.batches_per_element < 1 || !self.trips_per_element.is_multiple_of(self.batches_per_element) {
            return fail("batches_per_element must be at least 1 and divide trips_per_element");
        }
        if !self.drains_between_elements && self.batches_per_element != 1 {
            return fail("a pipeline that does not drain between elements must run as one batch");
        }
        Ok(())
    }
}

pub const DEFAULT_FIFO_DEPTH: u32 = 16;

/// HLS stream between two stages. Depth is recorded but never stalls the
/// model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamEdge {
    pub from: String,
    pub to: String,
    pub fifo_depth: u32,
}

impl StreamEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            fifo_depth: DEFAULT_FIFO_DEPTH,
        }
    }
}

/// Reorder buffer between phases, holding one element's points per bank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PingPongEdge {
    pub from: String,
    pub to: String,
    pub buffer_points: u64,
    /// Values written into the buffer per cycle: the port width in doubles
    /// for buffers fed from HBM, 1 for buffers fed by a stream.
    pub values_per_access: u64,
    pub fill_cycles: u64,
    /// Two banks alternating fill and drain; false is a single buffer.
    pub double_buffered: bool,
}

impl PingPongEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, buffer_points: u64, values_per_access: u64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            buffer_points,
            values_per_access,
            fill_cycles: buffer_points.div_ceil(values_per_access.max(1)),
            double_buffered: true,
        }
    }

    /// Buffer filled straight from an HBM port of the given width.
    pub fn from_port(from: impl Into<String>, to: impl Into<String>, buffer_points: u64, width: PortWidth) -> Self {
        Self::new(from, to, buffer_points, width.values_per_access())
    }

    pub fn single(mut self) -> Self {
        self.double_buffered = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelGraph {
    /// Points per dimension the stage trip counts were sized for.
    pub n: usize,
    pub stages: Vec<StageSpec>,
    pub stream_edges: Vec<StreamEdge>,
    pub pingpong_edges: Vec<PingPongEdge>,
    pub phase_mode: PhaseMode,
    pub clock_mhz: f64,
    pub port_width: PortWidth,
}

impl KernelGraph {
    pub fn stage(&self, name: &str) -> Option<&StageSpec> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Sum of per-stage concurrent flops: the denominator of "% theoretical".
    pub fn flops_per_cycle(&self) -> u64 {
        self.stages.iter().map(|s| s.flops_per_cycle).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clock_mhz > 0.0 && self.clock_mhz.is_finite()) {
            return Err(Error::Model(format!(
                "clock_mhz must be positive, got {}",
                self.clock_mhz
            )));
        }
        if self.stages.is_empty() {
            return Err(Error::Model("graph has no stages".into()));
        }
        let mut index = BTreeMap::new();
        for (i, s) in self.stages.iter().enumerate() {
            s.validate()?;
            if index.insert(s.name.as_str(), i).is_some() {
                return Err(Error::Model(format!("duplicate stage name {}", s.name)));
            }
            if !s.drains_between_elements && self.phase_mode != PhaseMode::Overlapped {
                return Err(Error::Model(format!(
                    "stage {}: pipelines can only run across elements with overlapped phases",
                    s.name
                )));
            }
        }
        let lookup = |name: &str, edge: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Model(format!("{edge} edge references unknown stage {name}")))
        };
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.stages.len()];
        for e in &self.stream_edges {
            if e.fifo_depth < 1 {
                return Err(Error::Model(format!(
                    "stream {} -> {}: fifo_depth must be at least 1",
                    e.from, e.to
                )));
            }
            adj[lookup(&e.from, "stream")?].push(lookup(&e.to, "stream")?);
        }
        for e in &self.pingpong_edges {
            if e.values_per_access < 1 {
                return Err(Error::Model(format!(
                    "pingpong {} -> {}: values_per_access must be at least 1",
                    e.from, e.to
                )));
            }
            let expect = e.buffer_points.div_ceil(e.values_per_access);
            if e.fill_cycles != expect {
                return Err(Error::Model(format!(
                    "pingpong {} -> {}: fill_cycles {} should be {expect} for {} points at {} per cycle",
                    e.from, e.to, e.fill_cycles, e.buffer_points, e.values_per_access
                )));
            }
            if self.phase_mode == PhaseMode::Overlapped && !e.double_buffered {
                return Err(Error::Model(format!(
                    "pingpong {} -> {}: overlapped phases need a double buffer",
                    e.from, e.to
                )));
            }
            adj[lookup(&e.from, "pingpong")?].push(lookup(&e.to, "pingpong")?);
        }
        if has_cycle(&adj) {
            return Err(Error::Model("graph acyclic: stage edges form a cycle".into()));
        }
        Ok(())
    }
}

/// Kahn's algorithm; true if some node never reaches in-degree zero.
fn has_cycle(adj: &[Vec<usize>]) -> bool {
    let mut indeg = vec![0usize; adj.len()];
    for targets in adj {
        for &t in targets {
            indeg[t] += 1;
        }
    }
    let mut ready: VecDeque<usize> = (0..adj.len()).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = ready.pop_front() {
        seen += 1;
        for &t in &adj[i] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.push_back(t);
            }
        }
    }
    seen != adj.len()
}

impl fmt::Display for KernelGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "graph n={} mode={} clock={} MHz ports={} bit",
            self.n,
            self.phase_mode.name(),
            self.clock_mhz,
            self.port_width.bits()
        )?;
        for s in &self.stages {
            writeln!(
                f,
                "  {:<10} {:<8} trips={} ii={} depth={} batches={} flops/cycle={}{}",
                s.name,
                s.phase.name(),
                s.trips_per_element,
                s.ii,
                s.depth,
                s.batches_per_element,
                s.flops_per_cycle,
                if s.drains_between_elements { "" } else { " continuous" }
            )?;
        }
        Ok(())
    }
}
