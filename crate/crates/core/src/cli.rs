//! The `nekflow` command line.
//!
//! Commands build their full output in memory ([`CommandOutput`]) so tests can
//! compare runs byte for byte; [`main_with_args`] prints it, writes files
//! under `--out` and maps the result onto exit codes: 0 success, 1 a
//! property or model check failed, 2 usage or configuration error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::ax::fixtures::{FixtureRng, DEFAULT_SEED};
use crate::ax::gll::gll_derivative;
use crate::ax::verify::PropertySuite;
use crate::ax::{ax_par, flops_per_element, ProblemConfig};
use crate::config::{ConfigFile, CustomGraph};
use crate::dataflow::{
    cu_split_overhead, optimization_ladder, simulate_graph, VersionId, VersionPreset, DEFAULT_CU_SPLIT_OVERHEAD,
    SPREAD_BANKS,
};
use crate::error::{Error, Result};
use crate::memory::{canonical_layout, validate_layout, HbmLayout, KernelPortMap, PortWidth};
use crate::report::{
    comparison_report, efficiency, fmt2, fmt_opt2, scale_kernels, PerfRecord, PowerModel, ReferenceDataset, TextTable,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Largest `n` the verify command accepts.
pub const VERIFY_MAX_N: usize = 32;

#[derive(Debug, Parser)]
#[command(
    name = "nekflow",
    version,
    about = "Nekbone AX kernel reference and FPGA dataflow performance model"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Points per dimension per element.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Number of elements.
    #[arg(long, global = true)]
    pub nelt: Option<usize>,
    /// Keep only presets at this clock (MHz); unset runs each at its own clock.
    #[arg(long, global = true)]
    pub clock: Option<f64>,
    /// Kernel count for `scale` and `validate-layout`.
    #[arg(long, global = true)]
    pub kernels: Option<usize>,
    /// Configuration file.
    #[arg(long, global = true, env = "NEKFLOW_CONFIG")]
    pub config: Option<PathBuf>,
    /// Directory to write CSV and text reports into.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for random fixtures.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated preset names.
    #[arg(long, global = true, value_delimiter = ',')]
    pub preset: Option<Vec<String>>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the kernel property suite (dense oracle, adjointness, symmetry, linearity, flop count).
    Verify {
        /// Use d in place of its transpose, to check the suite catches it.
        #[arg(long, hide = true)]
        corrupt_dt: bool,
    },
    /// Predict every kernel version and join with the measured figures.
    Ladder,
    /// Multi-kernel throughput and power against the measured CPU, GPU and FPGA rows.
    Scale,
    /// Time the host reference kernel.
    Bench,
    /// Check an HBM port layout for bank and controller conflicts.
    ValidateLayout {
        /// File with [kernel N] sections; defaults to the config file's, then the canonical layout.
        #[arg(long)]
        layout: Option<PathBuf>,
    },
}

/// Settings after merging defaults, the config file and flags (flags win).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub nelt: usize,
    pub clock_mhz: Option<f64>,
    pub presets: Vec<VersionId>,
    pub power: PowerModel,
    pub cu_split_overhead: f64,
    pub kernels: usize,
    pub layout: Vec<KernelPortMap>,
    pub custom_graph: Option<CustomGraph>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path).map_err(|e| with_path(e, path))?,
            None => ConfigFile::default(),
        };
        let presets = match &args.preset {
            Some(names) => names
                .iter()
                .map(|s| s.trim().parse())
                .collect::<Result<Vec<VersionId>>>()?,
            None => file.run.presets.clone().unwrap_or_else(|| VersionId::ALL.to_vec()),
        };
        let p = &file.power;
        let calibrated = PowerModel::default();
        let power = PowerModel::new(
            p.idle_watts.unwrap_or(calibrated.idle_watts),
            p.watts_per_kernel.unwrap_or(calibrated.watts_per_kernel),
            p.scaling_efficiency.unwrap_or(calibrated.scaling_efficiency),
            p.contention_penalty.unwrap_or(calibrated.contention_penalty),
            p.max_kernels.unwrap_or(calibrated.max_kernels),
        )?;
        let cfg = Self {
            n: args.n.or(file.run.n),
            nelt: args.nelt.or(file.run.nelt).unwrap_or(ProblemConfig::STANDARD_NELT),
            clock_mhz: args.clock.or(file.run.clock_mhz),
            presets,
            power,
            cu_split_overhead: p.cu_split_overhead.unwrap_or(DEFAULT_CU_SPLIT_OVERHEAD),
            kernels: args.kernels.or(file.run.kernels).unwrap_or(PowerModel::MAX_KERNELS),
            layout: file.kernels,
            custom_graph: file.graph,
            out: args.out.clone().or(file.run.out),
            seed: args.seed.or(file.run.seed).unwrap_or(DEFAULT_SEED),
        };
        if cfg.nelt == 0 {
            return Err(Error::contract("nelt must be at least 1"));
        }
        if let Some(c) = cfg.clock_mhz {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::contract(format!("clock must be positive, got {c}")));
            }
        }
        Ok(cfg)
    }

    /// Problem size for model commands; `n` defaults to 16.
    pub fn problem(&self) -> Result<ProblemConfig> {
        ProblemConfig::new(self.n.unwrap_or(ProblemConfig::STANDARD_N), self.nelt)
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

/// Everything a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub stdout: String,
    /// `(file name, contents)` pairs written under `--out` when set.
    pub files: Vec<(String, String)>,
    pub exit_code: u8,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            files: Vec::new(),
            exit_code: EXIT_OK,
        }
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

pub fn run(cli: &Cli) -> Result<CommandOutput> {
    let cfg = RunConfig::resolve(&cli.global)?;
    match &cli.command {
        Command::Verify { corrupt_dt } => cmd_verify(&cfg, *corrupt_dt),
        Command::Ladder => cmd_ladder(&cfg),
        Command::Scale => cmd_scale(&cfg, cfg.kernels),
        Command::Bench => cmd_bench(&cfg),
        Command::ValidateLayout { layout } => cmd_validate_layout(&cfg, layout.as_deref()),
    }
}

pub fn cmd_verify(cfg: &RunConfig, corrupt_dt: bool) -> Result<CommandOutput> {
    let sizes = match cfg.n {
        Some(n) if !(2..=VERIFY_MAX_N).contains(&n) => {
            return Err(Error::contract(format!(
                "verify needs 2 <= n <= {VERIFY_MAX_N}, got {n}"
            )));
        }
        Some(n) => vec![n],
        None => vec![2, 3, 4],
    };
    let suite = PropertySuite {
        sizes,
        seed: cfg.seed,
        corrupt_transpose: corrupt_dt,
        ..PropertySuite::default()
    };
    let outcomes = suite.run()?;
    let mut stdout = String::new();
    let mut failing = Vec::new();
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(
            stdout,
            "{status} {:<12} n={} trials={} worst={:.3e}",
            o.property.name(),
            o.n,
            o.trials,
            o.worst
        );
        if !o.passed && !failing.contains(&o.property.name()) {
            failing.push(o.property.name());
        }
    }
    let exit_code = if failing.is_empty() {
        let _ = writeln!(stdout, "all {} checks passed", outcomes.len());
        EXIT_OK
    } else {
        let _ = writeln!(stdout, "failing properties: {}", failing.join(", "));
        EXIT_FAILURE
    };
    Ok(CommandOutput {
        stdout,
        files: Vec::new(),
        exit_code,
    })
}

pub const LADDER_CSV_HEADER: &str = "preset,description,clock_mhz,port_bits,cycles_per_element,predicted_gflops,theoretical_gflops,predicted_pct,measured_gflops,measured_pct";

pub fn cmd_ladder(cfg: &RunConfig) -> Result<CommandOutput> {
    let problem = cfg.problem()?;
    let mem = HbmLayout::u280();
    let reference = ReferenceDataset::bundled();
    let rows: Vec<_> = optimization_ladder(&problem, &mem, &reference)?
        .into_iter()
        .filter(|r| cfg.presets.contains(&r.id))
        .filter(|r| cfg.clock_mhz.is_none_or(|c| c == r.id.clock_mhz()))
        .collect();

    let mut csv = format!("{LADDER_CSV_HEADER}\n");
    let mut table = TextTable::new([
        "Version",
        "MHz",
        "Cycles/elem",
        "Predicted GFLOPS",
        "Theoretical",
        "% theoretical",
        "Measured GFLOPS",
        "Measured %",
    ]);
    for r in &rows {
        let cpe = r.breakdown.cycles_per_element(problem.nelt());
        let _ = writeln!(
            csv,
            "{},{},{},{},{:.1},{},{},{},{},{}",
            r.id.name(),
            r.id.description(),
            r.id.clock_mhz(),
            VersionPreset::build(r.id, problem.n())?.port_bits(),
            cpe,
            fmt2(r.predicted.gflops_achieved),
            fmt2(r.predicted.gflops_theoretical),
            fmt2(r.predicted.pct_theoretical),
            fmt2(r.measured_gflops),
            fmt2(r.measured_pct)
        );
        table.push([
            r.id.description().to_string(),
            format!("{}", r.id.clock_mhz()),
            format!("{cpe:.1}"),
            fmt2(r.predicted.gflops_achieved),
            fmt2(r.predicted.gflops_theoretical),
            fmt2(r.predicted.pct_theoretical),
            fmt2(r.measured_gflops),
            fmt2(r.measured_pct),
        ]);
    }
    if let Some(custom) = &cfg.custom_graph {
        let ports = cfg
            .layout
            .first()
            .cloned()
            .unwrap_or_else(|| KernelPortMap::spread(0, SPREAD_BANKS, custom.graph.port_width));
        let custom_problem = ProblemConfig::new(custom.graph.n, problem.nelt())?;
        let (p, b) = simulate_graph(&custom.label, &custom.graph, &ports, &custom_problem, &mem)?;
        let cpe = b.cycles_per_element(problem.nelt());
        let _ = writeln!(
            csv,
            "{},custom graph,{},{},{:.1},{},{},{},,",
            custom.label,
            custom.graph.clock_mhz,
            custom.graph.port_width.bits(),
            cpe,
            fmt2(p.gflops_achieved),
            fmt2(p.gflops_theoretical),
            fmt2(p.pct_theoretical)
        );
        table.push([
            custom.label.clone(),
            format!("{}", custom.graph.clock_mhz),
            format!("{cpe:.1}"),
            fmt2(p.gflops_achieved),
            fmt2(p.gflops_theoretical),
            fmt2(p.pct_theoretical),
            String::new(),
            String::new(),
        ]);
    }
    let text = table.render();
    Ok(CommandOutput {
        stdout: text.clone(),
        files: vec![("ladder.csv".into(), csv), ("ladder.txt".into(), text)],
        exit_code: EXIT_OK,
    })
}

pub const SCALE_CSV_HEADER: &str =
    "kernels,gflops,watts,gflops_per_watt,measured_gflops,measured_watts,measured_gflops_per_watt,gflops_err_pct,watts_err_pct";

/// Single-kernel figure fed into the scaling model: the fastest measured
/// version with the compute-unit split overhead applied.
pub fn single_kernel_record(cfg: &RunConfig, reference: &ReferenceDataset) -> Result<PerfRecord> {
    let m = reference.version(VersionId::Clock400)?;
    let unsplit = PerfRecord::new("1 kernel", m.gflops, m.theoretical_gflops)?;
    cu_split_overhead(&unsplit, cfg.cu_split_overhead)
}

pub fn cmd_scale(cfg: &RunConfig, kernels: usize) -> Result<CommandOutput> {
    if kernels == 0 {
        return Err(Error::contract("--kernels must be at least 1"));
    }
    if kernels > cfg.power.max_kernels {
        return Err(Error::Capacity(format!(
            "{kernels} kernels requested but at most {} fit on the device",
            cfg.power.max_kernels
        )));
    }
    let reference = ReferenceDataset::bundled();
    let mem = HbmLayout::u280();
    let maps = if cfg.layout.is_empty() {
        canonical_layout(kernels, PortWidth::Bits512, &mem)?
    } else {
        cfg.layout.clone()
    };
    let layout_valid = validate_layout(&maps, &mem).is_valid();
    let single = single_kernel_record(cfg, &reference)?;

    let mut csv = format!("{SCALE_CSV_HEADER}\n");
    let mut table = TextTable::new([
        "Kernels",
        "GFLOPS",
        "Watts",
        "GFLOPS/Watt",
        "Measured",
        "Watts",
        "GFLOPS/Watt",
    ]);
    let mut records = Vec::new();
    for k in 1..=kernels {
        let r = scale_kernels(&single, k, &cfg.power, layout_valid)?;
        let eff = efficiency(&r)?;
        let watts = r.watts.expect("scale_kernels sets watts");
        let measured = reference.fpga_row(k);
        let err = |model: f64, meas: f64| format!("{:.2}", 100.0 * (model - meas) / meas);
        let _ = writeln!(
            csv,
            "{k},{},{},{},{},{},{},{},{}",
            fmt2(r.gflops_achieved),
            fmt2(watts),
            fmt2(eff),
            fmt_opt2(measured.map(|m| m.gflops)),
            fmt_opt2(measured.map(|m| m.watts)),
            fmt_opt2(measured.map(|m| m.gflops_per_watt)),
            measured.map(|m| err(r.gflops_achieved, m.gflops)).unwrap_or_default(),
            measured.map(|m| err(watts, m.watts)).unwrap_or_default(),
        );
        table.push([
            k.to_string(),
            fmt2(r.gflops_achieved),
            fmt2(watts),
            fmt2(eff),
            fmt_opt2(measured.map(|m| m.gflops)),
            fmt_opt2(measured.map(|m| m.watts)),
            fmt_opt2(measured.map(|m| m.gflops_per_watt)),
        ]);
        records.push(r);
    }
    let mut model_rows = records.clone();
    for r in &mut model_rows {
        r.label = format!("model {}", r.label);
    }
    let comparison = comparison_report(&model_rows, &reference)?;
    let mut stdout = table.render();
    if !layout_valid {
        stdout.push_str("warning: HBM layout has conflicts, contention penalty applied\n");
    }
    stdout.push('\n');
    stdout.push_str(&comparison.to_text());
    Ok(CommandOutput {
        stdout,
        files: vec![
            ("scale.csv".into(), csv),
            ("comparison.csv".into(), comparison.to_csv()),
        ],
        exit_code: EXIT_OK,
    })
}

/// Result of one host run of the reference kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub flops: u64,
    pub seconds: f64,
    /// Sum of all output values, for checking determinism.
    pub checksum: f64,
}

pub fn run_bench(cfg: &RunConfig) -> Result<BenchResult> {
    let problem = cfg.problem()?;
    let n = problem.n();
    let mut rng = FixtureRng::new(cfg.seed);
    let d = gll_derivative(n)?;
    let u: Vec<_> = (0..problem.nelt()).map(|_| rng.field(n)).collect();
    let g: Vec<_> = (0..problem.nelt()).map(|_| rng.geom_spd(n)).collect();
    let start = Instant::now();
    let w = ax_par(&u, &g, &d, &problem)?;
    let seconds = start.elapsed().as_secs_f64();
    let checksum = w.iter().flat_map(|e| e.values().iter()).sum();
    Ok(BenchResult {
        flops: flops_per_element(n)? * problem.nelt() as u64,
        seconds,
        checksum,
    })
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<CommandOutput> {
    let problem = cfg.problem()?;
    let r = run_bench(cfg)?;
    let gflops = if r.seconds > 0.0 {
        r.flops as f64 / r.seconds / 1e9
    } else {
        0.0
    };
    let mut s = String::new();
    let _ = writeln!(s, "host reference (not an FPGA figure)");
    let _ = writeln!(s, "n={} nelt={} seed={}", problem.n(), problem.nelt(), cfg.seed);
    let _ = writeln!(s, "flops per sweep: {}", r.flops);
    let _ = writeln!(s, "wall time: {:.6} s", r.seconds);
    let _ = writeln!(s, "host GFLOPS: {}", fmt2(gflops));
    let _ = writeln!(s, "checksum: {:.17e}", r.checksum);
    Ok(CommandOutput::ok(s))
}

pub fn cmd_validate_layout(cfg: &RunConfig, layout_file: Option<&Path>) -> Result<CommandOutput> {
    let mem = HbmLayout::u280();
    let maps = match layout_file {
        Some(path) => {
            let file = ConfigFile::load(path).map_err(|e| with_path(e, path))?;
            if file.kernels.is_empty() {
                return Err(Error::Model(format!("{} has no [kernel N] sections", path.display())));
            }
            file.kernels
        }
        None if !cfg.layout.is_empty() => cfg.layout.clone(),
        None => canonical_layout(cfg.kernels, PortWidth::Bits512, &mem)?,
    };
    let report = validate_layout(&maps, &mem);
    let ports: usize = maps.iter().map(|m| m.ports().len()).sum();
    let mut stdout = format!("{} kernel(s), {ports} port(s)\n", maps.len());
    stdout.push_str(&report.to_text());
    Ok(CommandOutput {
        stdout,
        files: vec![("layout.csv".into(), report.to_csv())],
        exit_code: if report.is_valid() { EXIT_OK } else { EXIT_FAILURE },
    })
}

/// Exit code for an error that escaped a command.
pub fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, contents) in files {
        std::fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

/// Parses `args`, runs the command, prints and writes its output. Returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let out_dir = match RunConfig::resolve(&cli.global) {
        Ok(cfg) => cfg.out,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit_code(&e);
        }
    };
    match run(&cli) {
        Ok(output) => {
            print!("{}", output.stdout);
            if let Some(dir) = out_dir {
                if let Err(e) = write_files(&dir, &output.files) {
                    eprintln!("error: writing reports to {}: {e}", dir.display());
                    return EXIT_FAILURE;
                }
            }
            output.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}
