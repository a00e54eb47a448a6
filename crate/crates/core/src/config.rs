//! Line-oriented configuration files.
//!
//! ```text
//! # comment
//! [run]
//! n = 16
//! nelt = 800
//! clock = 300
//! presets = mmopt, pingpong
//!
//! [power]
//! watts_per_kernel = 8.79
//!
//! [graph]
//! phase_mode = overlapped
//! [stage mm_r]
//! phase = forward
//! trips = 4096
//! depth = 45
//! [stream mm_r -> accum]
//! [pingpong read_u -> mm_r]
//! points = 4096
//!
//! [kernel 0]
//! u = 0
//! g = 2
//! dxm1 = 4
//! dxtm1 = 6
//! w = 8
//! width = 512
//! ```
//!
//! Every error carries the line it came from.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataflow::{KernelGraph, Phase, PhaseMode, PingPongEdge, StageSpec, StreamEdge, VersionId};
use crate::error::{Error, Result};
use crate::memory::{KernelArg, KernelPortMap, PortAssignment, PortWidth};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSection {
    pub n: Option<usize>,
    pub nelt: Option<usize>,
    pub clock_mhz: Option<f64>,
    pub seed: Option<u64>,
    pub presets: Option<Vec<VersionId>>,
    pub kernels: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerSection {
    pub idle_watts: Option<f64>,
    pub watts_per_kernel: Option<f64>,
    pub scaling_efficiency: Option<f64>,
    pub contention_penalty: Option<f64>,
    pub max_kernels: Option<usize>,
    pub cu_split_overhead: Option<f64>,
}

/// A user-described kernel graph with its port layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomGraph {
    pub label: String,
    pub graph: KernelGraph,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub run: RunSection,
    pub power: PowerSection,
    pub graph: Option<CustomGraph>,
    pub kernels: Vec<KernelPortMap>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    name: String,
    arg: Option<String>,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !known.contains(&e.key.as_str()) {
                return Err(Error::config(
                    e.line,
                    format!(
                        "unknown key {:?} in [{}] (expected one of: {})",
                        e.key,
                        self.name,
                        known.join(", ")
                    ),
                ));
            }
            if !seen.insert(e.key.as_str()) {
                return Err(Error::config(e.line, format!("duplicate key {:?}", e.key)));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|e| {
                e.value
                    .parse::<T>()
                    .map_err(|err| Error::config(e.line, format!("invalid value {:?} for {key}: {err}", e.value)))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| {
            Error::config(
                self.line,
                format!("[{}] is missing required key {key:?}", self.header()),
            )
        })
    }

    fn header(&self) -> String {
        match &self.arg {
            Some(a) => format!("{} {a}", self.name),
            None => self.name.clone(),
        }
    }

    fn arg(&self) -> Result<&str> {
        self.arg
            .as_deref()
            .ok_or_else(|| Error::config(self.line, format!("[{}] needs an argument", self.name)))
    }

    fn no_arg(&self) -> Result<()> {
        match &self.arg {
            Some(_) => Err(Error::config(self.line, format!("[{}] takes no argument", self.name))),
            None => Ok(()),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(inner) = s.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line, "unterminated section header"))?
                .trim();
            let (name, arg) = match inner.split_once(char::is_whitespace) {
                Some((n, a)) => (n.to_string(), Some(a.trim().to_string())),
                None => (inner.to_string(), None),
            };
            if name.is_empty() {
                return Err(Error::config(line, "empty section name"));
            }
            sections.push(Section {
                name,
                arg,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("expected key = value, got {s:?}")))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::config(line, "key outside of any [section]"))?;
        section.entries.push(Entry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(sections)
}

fn parse_bool(e: Option<&Entry>, default: bool) -> Result<bool> {
    match e {
        None => Ok(default),
        Some(e) => match e.value.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(Error::config(e.line, format!("expected true or false, got {v:?}"))),
        },
    }
}

fn parse_edge(s: &Section) -> Result<(String, String)> {
    let arg = s.arg()?;
    let (from, to) = arg
        .split_once("->")
        .ok_or_else(|| Error::config(s.line, format!("expected [{} from -> to], got {arg:?}", s.name)))?;
    let (from, to) = (from.trim(), to.trim());
    if from.is_empty() || to.is_empty() {
        return Err(Error::config(s.line, "edge endpoints must be non-empty"));
    }
    Ok((from.to_string(), to.to_string()))
}

fn parse_run(s: &Section) -> Result<RunSection> {
    s.no_arg()?;
    s.reject_unknown(&["n", "nelt", "clock", "seed", "presets", "kernels", "out"])?;
    let presets = match s.get("presets") {
        None => None,
        Some(e) => Some(
            e.value
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<VersionId>()
                        .map_err(|err| Error::config(e.line, model_message(err)))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    Ok(RunSection {
        n: s.parse("n")?,
        nelt: s.parse("nelt")?,
        clock_mhz: s.parse("clock")?,
        seed: s.parse("seed")?,
        presets,
        kernels: s.parse("kernels")?,
        out: s.get("out").map(|e| PathBuf::from(&e.value)),
    })
}

fn parse_power(s: &Section) -> Result<PowerSection> {
    s.no_arg()?;
    s.reject_unknown(&[
        "idle_watts",
        "watts_per_kernel",
        "scaling_efficiency",
        "contention_penalty",
        "max_kernels",
        "cu_split_overhead",
    ])?;
    Ok(PowerSection {
        idle_watts: s.parse("idle_watts")?,
        watts_per_kernel: s.parse("watts_per_kernel")?,
        scaling_efficiency: s.parse("scaling_efficiency")?,
        contention_penalty: s.parse("contention_penalty")?,
        max_kernels: s.parse("max_kernels")?,
        cu_split_overhead: s.parse("cu_split_overhead")?,
    })
}

fn parse_width(s: &Section, key: &str, default: PortWidth) -> Result<PortWidth> {
    match s.get(key) {
        None => Ok(default),
        Some(e) => {
            let bits: u32 = e
                .value
                .parse()
                .map_err(|err| Error::config(e.line, format!("invalid port width {:?}: {err}", e.value)))?;
            PortWidth::from_bits(bits).map_err(|err| Error::config(e.line, err.to_string()))
        }
    }
}

fn parse_stage(s: &Section) -> Result<StageSpec> {
    s.reject_unknown(&["phase", "trips", "ii", "depth", "flops", "batches", "continuous"])?;
    let phase: Phase = s.require("phase")?;
    let mut stage = StageSpec::new(
        s.arg()?,
        phase,
        s.require("trips")?,
        s.parse("ii")?.unwrap_or(1),
        s.require("depth")?,
    )
    .flops(s.parse("flops")?.unwrap_or(0))
    .batches(s.parse("batches")?.unwrap_or(1));
    if parse_bool(s.get("continuous"), false)? {
        stage = stage.continuous();
    }
    stage.validate().map_err(|e| Error::config(s.line, model_message(e)))?;
    Ok(stage)
}

fn parse_kernel(s: &Section) -> Result<KernelPortMap> {
    let id: usize = s
        .arg()?
        .parse()
        .map_err(|err| Error::config(s.line, format!("kernel id must be an integer: {err}")))?;
    s.reject_unknown(&["u", "g", "dxm1", "dxtm1", "w", "width"])?;
    let width = parse_width(s, "width", PortWidth::Bits512)?;
    let ports = KernelArg::ALL
        .into_iter()
        .map(|arg| {
            Ok(PortAssignment {
                arg,
                bank: s.require(arg.name())?,
                width,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    KernelPortMap::new(id, ports).map_err(|e| Error::config(s.line, model_message(e)))
}

fn model_message(e: Error) -> String {
    match e {
        Error::Model(m) | Error::Contract(m) | Error::Capacity(m) | Error::Format(m) => m,
        other => other.to_string(),
    }
}

impl FromStr for ConfigFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let sections = tokenize(text)?;
        let mut cfg = ConfigFile::default();
        let mut seen_singletons = BTreeSet::new();
        let mut graph_section: Option<&Section> = None;
        let mut stages = Vec::new();
        let mut streams = Vec::new();
        let mut pingpongs = Vec::new();
        let mut kernel_ids = BTreeSet::new();

        for s in &sections {
            if matches!(s.name.as_str(), "run" | "power" | "graph") && !seen_singletons.insert(s.name.as_str()) {
                return Err(Error::config(s.line, format!("duplicate section [{}]", s.name)));
            }
            match s.name.as_str() {
                "run" => cfg.run = parse_run(s)?,
                "power" => cfg.power = parse_power(s)?,
                "graph" => {
                    s.no_arg()?;
                    s.reject_unknown(&["name", "n", "phase_mode", "clock", "port_bits"])?;
                    graph_section = Some(s);
                }
                "stage" => stages.push((s, parse_stage(s)?)),
                "stream" => {
                    s.reject_unknown(&["fifo_depth"])?;
                    let (from, to) = parse_edge(s)?;
                    let mut e = StreamEdge::new(from, to);
                    if let Some(d) = s.parse("fifo_depth")? {
                        e.fifo_depth = d;
                    }
                    streams.push((s, e));
                }
                "pingpong" => {
                    s.reject_unknown(&["points", "values_per_access", "double"])?;
                    let (from, to) = parse_edge(s)?;
                    let mut e = PingPongEdge::new(
                        from,
                        to,
                        s.require("points")?,
                        s.parse("values_per_access")?.unwrap_or(1),
                    );
                    if !parse_bool(s.get("double"), true)? {
                        e = e.single();
                    }
                    pingpongs.push((s, e));
                }
                "kernel" => {
                    let map = parse_kernel(s)?;
                    if !kernel_ids.insert(map.kernel_id()) {
                        return Err(Error::config(s.line, format!("duplicate kernel {}", map.kernel_id())));
                    }
                    cfg.kernels.push(map);
                }
                other => return Err(Error::config(s.line, format!("unknown section [{other}]"))),
            }
        }

        let first_graph_part = stages
            .first()
            .map(|(s, _)| *s)
            .or(streams.first().map(|(s, _)| *s))
            .or(pingpongs.first().map(|(s, _)| *s));
        match (graph_section, first_graph_part) {
            (None, Some(s)) => {
                return Err(Error::config(
                    s.line,
                    format!("[{}] requires a [graph] section", s.name),
                ));
            }
            (None, None) => {}
            (Some(g), _) => {
                let n = g.parse("n")?.unwrap_or(crate::ax::ProblemConfig::STANDARD_N);
                let graph = KernelGraph {
                    n,
                    stages: stages.into_iter().map(|(_, st)| st).collect(),
                    stream_edges: streams.into_iter().map(|(_, e)| e).collect(),
                    pingpong_edges: pingpongs.into_iter().map(|(_, e)| e).collect(),
                    phase_mode: g.parse::<PhaseMode>("phase_mode")?.unwrap_or(PhaseMode::Overlapped),
                    clock_mhz: g.parse("clock")?.unwrap_or(300.0),
                    port_width: parse_width(g, "port_bits", PortWidth::Bits512)?,
                };
                graph.validate().map_err(|e| Error::config(g.line, model_message(e)))?;
                cfg.graph = Some(CustomGraph {
                    label: g
                        .get("name")
                        .map(|e| e.value.clone())
                        .unwrap_or_else(|| "custom".into()),
                    graph,
                });
            }
        }
        cfg.kernels.sort_by_key(|k| k.kernel_id());
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(err: Error) -> usize {
        match err {
            Error::Config { line, .. } => line,
            other => panic!("expected a configuration error, got {other}"),
        }
    }

    #[test]
    fn run_and_power_sections() {
        let cfg: ConfigFile = "# defaults\n[run]\nn = 8\nnelt=10\nclock = 400\npresets = mmopt, clock400\n\n[power]\nwatts_per_kernel = 7\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.run.n, Some(8));
        assert_eq!(cfg.run.nelt, Some(10));
        assert_eq!(cfg.run.clock_mhz, Some(400.0));
        assert_eq!(cfg.run.presets, Some(vec![VersionId::MmOpt, VersionId::Clock400]));
        assert_eq!(cfg.power.watts_per_kernel, Some(7.0));
        assert!(cfg.graph.is_none());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            line_of("[run]\nn = 8\nnelt = many\n".parse::<ConfigFile>().unwrap_err()),
            3
        );
        assert_eq!(line_of("\n\nn = 8\n".parse::<ConfigFile>().unwrap_err()), 3);
        assert_eq!(line_of("[run]\ncolour = red\n".parse::<ConfigFile>().unwrap_err()), 2);
        assert_eq!(line_of("[run]\n[bogus]\n".parse::<ConfigFile>().unwrap_err()), 2);
        assert_eq!(line_of("[run\n".parse::<ConfigFile>().unwrap_err()), 1);
        assert_eq!(line_of("[run]\njust words\n".parse::<ConfigFile>().unwrap_err()), 2);
    }

    #[test]
    fn kernel_sections() {
        let text = "[kernel 1]\nu=1\ng=3\ndxm1=5\ndxtm1=7\nw=9\n[kernel 0]\nu=0\ng=2\ndxm1=4\ndxtm1=6\nw=8\nwidth=64\n";
        let cfg: ConfigFile = text.parse().unwrap();
        assert_eq!(cfg.kernels.len(), 2);
        assert_eq!(cfg.kernels[0].kernel_id(), 0);
        assert_eq!(cfg.kernels[0].port(KernelArg::W).bank, 8);
        assert_eq!(cfg.kernels[0].port(KernelArg::U).width, PortWidth::Bits64);
        assert_eq!(cfg.kernels[1].port(KernelArg::G).bank, 3);
    }

    #[test]
    fn kernel_missing_argument() {
        let err = "[kernel 0]\nu=0\ng=2\n".parse::<ConfigFile>().unwrap_err();
        assert_eq!(line_of(err), 1);
    }

    const CHAIN: &str = "[graph]
n = 4
phase_mode = serialized
[stage a]
phase = forward
trips = 64
depth = 10
flops = 3
[stage b]
phase = adjoint
trips = 64
depth = 10
[stream a -> b]
";

    #[test]
    fn custom_graph() {
        let cfg: ConfigFile = CHAIN.parse().unwrap();
        let g = cfg.graph.unwrap();
        assert_eq!(g.label, "custom");
        assert_eq!(g.graph.n, 4);
        assert_eq!(g.graph.stages.len(), 2);
        assert_eq!(g.graph.flops_per_cycle(), 3);
        assert_eq!(g.graph.phase_mode, PhaseMode::Serialized);
    }

    #[test]
    fn cyclic_graph_rejected() {
        let text = format!("{CHAIN}[stream b -> a]\n");
        let err = text.parse::<ConfigFile>().unwrap_err();
        assert!(err.to_string().contains("graph acyclic"), "{err}");
        assert_eq!(line_of(err), 1);
    }

    #[test]
    fn stage_without_graph_rejected() {
        let err = "[stage a]\nphase=forward\ntrips=1\ndepth=1\n"
            .parse::<ConfigFile>()
            .unwrap_err();
        assert_eq!(line_of(err), 1);
    }
}
