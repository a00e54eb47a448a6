//! HBM subsystem model: banks, controllers, port widths, bank-assignment
//! checks and achievable transfer time.
//!
//! The U280's 8 GB of HBM is 32 banks of 256 MB behind 16 controllers, each
//! controller fronting two adjacent banks (`controller = bank / 2`). Peak
//! bandwidth is 460 GB/s.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PortWidth {
    Bits64,
    Bits512,
}

impl PortWidth {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            64 => Ok(PortWidth::Bits64),
            512 => Ok(PortWidth::Bits512),
            other => Err(Error::contract(format!(
                "port width must be 64 or 512 bits, got {other}"
            ))),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            PortWidth::Bits64 => 64,
            PortWidth::Bits512 => 512,
        }
    }

    pub fn bytes(self) -> u32 {
        self.bits() / 8
    }

    /// Doubles moved per access.
    pub fn values_per_access(self) -> u64 {
        u64::from(self.bits() / 64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HbmLayout {
    pub bank_count: usize,
    pub bank_capacity_mb: u32,
    pub controller_count: usize,
    pub max_bandwidth_gbs: f64,
    /// Bandwidth divisor for ports of one kernel that share a controller.
    /// Also the slowdown applied to kernels that share banks.
    pub contention_penalty: f64,
}

impl Default for HbmLayout {
    fn default() -> Self {
        Self::u280()
    }
}

impl HbmLayout {
    pub fn u280() -> Self {
        Self {
            bank_count: 32,
            bank_capacity_mb: 256,
            controller_count: 16,
            max_bandwidth_gbs: 460.0,
            contention_penalty: 2.0,
        }
    }

    pub fn controller_of(&self, bank: usize) -> usize {
        bank / 2
    }
}

/// The five AX kernel arguments, each mapped to its own port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelArg {
    U,
    G,
    Dxm1,
    Dxtm1,
    W,
}

impl KernelArg {
    pub const ALL: [KernelArg; 5] = [
        KernelArg::U,
        KernelArg::G,
        KernelArg::Dxm1,
        KernelArg::Dxtm1,
        KernelArg::W,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelArg::U => "u",
            KernelArg::G => "g",
            KernelArg::Dxm1 => "dxm1",
            KernelArg::Dxtm1 => "dxtm1",
            KernelArg::W => "w",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for KernelArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortAssignment {
    pub arg: KernelArg,
    pub bank: usize,
    pub width: PortWidth,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelPortMap {
    kernel_id: usize,
    ports: Vec<PortAssignment>,
}

impl KernelPortMap {
    /// Every argument must appear exactly once.
    pub fn new(kernel_id: usize, ports: Vec<PortAssignment>) -> Result<Self> {
        for arg in KernelArg::ALL {
            let count = ports.iter().filter(|p| p.arg == arg).count();
            if count != 1 {
                return Err(Error::contract(format!(
                    "kernel {kernel_id}: argument {arg} has {count} ports, expected 1"
                )));
            }
        }
        Ok(Self { kernel_id, ports })
    }

    /// Arguments in `KernelArg::ALL` order on the given banks.
    pub fn spread(kernel_id: usize, banks: [usize; 5], width: PortWidth) -> Self {
        let ports = KernelArg::ALL
            .into_iter()
            .zip(banks)
            .map(|(arg, bank)| PortAssignment { arg, bank, width })
            .collect();
        Self { kernel_id, ports }
    }

    /// All arguments on one bank, the tool default before tuning.
    pub fn shared_bank(kernel_id: usize, bank: usize, width: PortWidth) -> Self {
        Self::spread(kernel_id, [bank; 5], width)
    }

    pub fn kernel_id(&self) -> usize {
        self.kernel_id
    }

    pub fn ports(&self) -> &[PortAssignment] {
        &self.ports
    }

    pub fn port(&self, arg: KernelArg) -> &PortAssignment {
        self.ports.iter().find(|p| p.arg == arg).expect("all arguments present")
    }
}

/// Per-kernel banks two apart; kernel pairs interleave (even/odd banks) and
/// each pair takes the next block of ten banks.
pub fn canonical_layout(kernels: usize, width: PortWidth, layout: &HbmLayout) -> Result<Vec<KernelPortMap>> {
    (0..kernels)
        .map(|k| {
            let base = (k / 2) * 10 + (k % 2);
            let banks = [base, base + 2, base + 4, base + 6, base + 8];
            if banks[4] >= layout.bank_count {
                return Err(Error::Capacity(format!(
                    "{kernels} kernels do not fit in {} banks with distinct, spaced ports",
                    layout.bank_count
                )));
            }
            Ok(KernelPortMap::spread(k, banks, width))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutFlag {
    BankOutOfRange {
        kernel: usize,
        arg: KernelArg,
        bank: usize,
    },
    SameBank {
        kernel: usize,
        bank: usize,
        args: Vec<KernelArg>,
    },
    /// Two ports of one kernel on banks less than two apart.
    Adjacent {
        kernel: usize,
        first: (KernelArg, usize),
        second: (KernelArg, usize),
    },
    CrossKernel {
        bank: usize,
        kernels: Vec<usize>,
    },
}

impl LayoutFlag {
    pub fn kind(&self) -> &'static str {
        match self {
            LayoutFlag::BankOutOfRange { .. } => "bank-out-of-range",
            LayoutFlag::SameBank { .. } => "same-bank",
            LayoutFlag::Adjacent { .. } => "adjacent-bank",
            LayoutFlag::CrossKernel { .. } => "cross-kernel-bank",
        }
    }
}

impl fmt::Display for LayoutFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutFlag::BankOutOfRange { kernel, arg, bank } => {
                write!(
                    f,
                    "kernel {kernel}: port {arg} targets bank {bank}, which does not exist"
                )
            }
            LayoutFlag::SameBank { kernel, bank, args } => {
                let names: Vec<_> = args.iter().map(|a| a.name()).collect();
                write!(
                    f,
                    "kernel {kernel}: ports {} share bank {bank}; accesses serialise on one bank",
                    names.join(",")
                )
            }
            LayoutFlag::Adjacent { kernel, first, second } => write!(
                f,
                "kernel {kernel}: ports {} (bank {}) and {} (bank {}) are less than two banks apart; \
                 they compete for a memory controller",
                first.0, first.1, second.0, second.1
            ),
            LayoutFlag::CrossKernel { bank, kernels } => {
                let ids: Vec<_> = kernels.iter().map(|k| k.to_string()).collect();
                write!(
                    f,
                    "bank {bank} is shared by kernels {}; expect hold conflicts at routing and degraded scaling",
                    ids.join(",")
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayoutReport {
    pub flags: Vec<LayoutFlag>,
}

impl LayoutReport {
    pub fn is_valid(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn to_text(&self) -> String {
        if self.flags.is_empty() {
            return "layout valid: no shared banks, all per-kernel ports at least two banks apart\n".into();
        }
        let mut s = format!("layout invalid: {} issue(s)\n", self.flags.len());
        for flag in &self.flags {
            let _ = writeln!(s, "  - {flag}");
        }
        s
    }

    /// Columns: `kind,kernel,bank,detail`. `kernel` is empty for cross-kernel flags.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,kernel,bank,detail\n");
        for flag in &self.flags {
            let (kernel, bank, detail) = match flag {
                LayoutFlag::BankOutOfRange { kernel, arg, bank } => (Some(*kernel), *bank, arg.to_string()),
                LayoutFlag::SameBank { kernel, bank, args } => (
                    Some(*kernel),
                    *bank,
                    args.iter().map(|a| a.name()).collect::<Vec<_>>().join(" "),
                ),
                LayoutFlag::Adjacent { kernel, first, second } => {
                    (Some(*kernel), first.1, format!("{} {}@{}", first.0, second.0, second.1))
                }
                LayoutFlag::CrossKernel { bank, kernels } => (
                    None,
                    *bank,
                    kernels.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "),
                ),
            };
            let kernel = kernel.map(|k| k.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{kernel},{bank},{detail}", flag.kind());
        }
        s
    }
}

pub fn validate_layout(maps: &[KernelPortMap], layout: &HbmLayout) -> LayoutReport {
    let mut flags = Vec::new();
    let mut bank_users: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for map in maps {
        let k = map.kernel_id();
        let mut by_bank: BTreeMap<usize, Vec<KernelArg>> = BTreeMap::new();
        for p in map.ports() {
            if p.bank >= layout.bank_count {
                flags.push(LayoutFlag::BankOutOfRange {
                    kernel: k,
                    arg: p.arg,
                    bank: p.bank,
                });
                continue;
            }
            by_bank.entry(p.bank).or_default().push(p.arg);
            bank_users.entry(p.bank).or_default().insert(k);
        }
        for (&bank, args) in &by_bank {
            if args.len() > 1 {
                flags.push(LayoutFlag::SameBank {
                    kernel: k,
                    bank,
                    args: args.clone(),
                });
            }
        }
        let banks: Vec<(usize, KernelArg)> = by_bank.iter().map(|(&b, args)| (b, args[0])).collect();
        for pair in banks.windows(2) {
            let ((b0, a0), (b1, a1)) = (pair[0], pair[1]);
            if b1 - b0 < 2 {
                flags.push(LayoutFlag::Adjacent {
                    kernel: k,
                    first: (a0, b0),
                    second: (a1, b1),
                });
            }
        }
    }
    for (bank, kernels) in bank_users {
        if kernels.len() > 1 {
            flags.push(LayoutFlag::CrossKernel {
                bank,
                kernels: kernels.into_iter().collect(),
            });
        }
    }
    LayoutReport { flags }
}

/// Peak bandwidth of one port in GB/s.
pub fn port_bandwidth(width: PortWidth, clock_mhz: f64) -> f64 {
    f64::from(width.bytes()) * clock_mhz * 1e6 / 1e9
}

/// Achievable aggregate bandwidth (GB/s) of all ports in `maps`.
///
/// Ports sharing a bank split that bank's single-port bandwidth equally. A
/// port whose controller also serves another bank used by the same kernel
/// is divided by `contention_penalty`. The sum is capped at the HBM peak.
/// Ports on nonexistent banks contribute nothing.
pub fn aggregate_bandwidth(maps: &[KernelPortMap], layout: &HbmLayout, clock_mhz: f64) -> f64 {
    let mut per_bank: BTreeMap<usize, usize> = BTreeMap::new();
    for p in maps.iter().flat_map(|m| m.ports()) {
        *per_bank.entry(p.bank).or_default() += 1;
    }
    let mut total = 0.0;
    for map in maps {
        let kernel_banks: BTreeSet<usize> = map.ports().iter().map(|p| p.bank).collect();
        for p in map.ports() {
            if p.bank >= layout.bank_count {
                continue;
            }
            let mut bw = port_bandwidth(p.width, clock_mhz) / per_bank[&p.bank] as f64;
            let ctrl = layout.controller_of(p.bank);
            let controller_shared = kernel_banks
                .iter()
                .any(|&b| b != p.bank && b < layout.bank_count && layout.controller_of(b) == ctrl);
            if controller_shared {
                bw /= layout.contention_penalty;
            }
            total += bw;
        }
    }
    total.min(layout.max_bandwidth_gbs)
}

/// Seconds to move `bytes_per_element * nelt` bytes through `maps`.
pub fn transfer_time(
    bytes_per_element: u64,
    nelt: u64,
    maps: &[KernelPortMap],
    layout: &HbmLayout,
    clock_mhz: f64,
) -> f64 {
    let bytes = bytes_per_element as f64 * nelt as f64;
    if bytes == 0.0 {
        return 0.0;
    }
    let bw = aggregate_bandwidth(maps, layout, clock_mhz);
    if bw <= 0.0 {
        return f64::INFINITY;
    }
    bytes / (bw * 1e9)
}

/// Per-element HBM traffic: `u` in, six geometric factors in, `w` out.
pub fn bytes_per_element(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::contract(format!("n must be at least 2, got {n}")));
    }
    Ok(8 * 8 * (n as u64).pow(3))
}

/// One-off traffic for `dxm1` and `dxtm1`.
pub fn derivative_bytes(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::contract(format!("n must be at least 2, got {n}")));
    }
    Ok(8 * 2 * (n as u64).pow(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controllers_front_adjacent_pairs() {
        let l = HbmLayout::u280();
        assert_eq!(l.controller_of(0), 0);
        assert_eq!(l.controller_of(1), 0);
        assert_eq!(l.controller_of(2), 1);
        assert_eq!(l.controller_of(31), 15);
    }

    #[test]
    fn spaced_single_kernel_is_valid() {
        let map = KernelPortMap::spread(0, [0, 2, 4, 6, 8], PortWidth::Bits512);
        assert!(validate_layout(&[map], &HbmLayout::u280()).is_valid());
    }

    #[test]
    fn two_ports_on_one_bank_flagged() {
        let map = KernelPortMap::spread(0, [0, 0, 4, 6, 8], PortWidth::Bits512);
        let r = validate_layout(&[map], &HbmLayout::u280());
        assert!(matches!(r.flags.as_slice(), [LayoutFlag::SameBank { bank: 0, .. }]));
    }

    #[test]
    fn distance_one_flagged() {
        let map = KernelPortMap::spread(0, [0, 3, 4, 7, 8], PortWidth::Bits512);
        let r = validate_layout(&[map], &HbmLayout::u280());
        assert_eq!(r.flags.iter().filter(|f| f.kind() == "adjacent-bank").count(), 2);
    }

    #[test]
    fn cross_kernel_sharing_flagged() {
        let a = KernelPortMap::spread(0, [0, 2, 4, 6, 8], PortWidth::Bits512);
        let b = KernelPortMap::spread(1, [4, 10, 12, 14, 16], PortWidth::Bits512);
        let r = validate_layout(&[a, b], &HbmLayout::u280());
        assert_eq!(
            r.flags,
            vec![LayoutFlag::CrossKernel {
                bank: 4,
                kernels: vec![0, 1]
            }]
        );
        assert!(r.to_text().contains("degraded scaling"));
        assert!(r.to_csv().contains("cross-kernel-bank,,4,0 1"));
    }

    #[test]
    fn out_of_range_bank_flagged() {
        let map = KernelPortMap::spread(0, [0, 2, 4, 6, 40], PortWidth::Bits64);
        let r = validate_layout(&[map], &HbmLayout::u280());
        assert_eq!(r.flags[0].kind(), "bank-out-of-range");
    }

    #[test]
    fn port_map_requires_all_arguments() {
        let ports = vec![PortAssignment {
            arg: KernelArg::U,
            bank: 0,
            width: PortWidth::Bits64,
        }];
        assert!(KernelPortMap::new(0, ports).is_err());
    }

    #[test]
    fn port_bandwidths() {
        assert!((port_bandwidth(PortWidth::Bits512, 300.0) - 19.2).abs() < 1e-12);
        assert!((port_bandwidth(PortWidth::Bits64, 300.0) - 2.4).abs() < 1e-12);
        assert_eq!(PortWidth::Bits512.bits() / PortWidth::Bits64.bits(), 8);
        assert!(PortWidth::from_bits(128).is_err());
    }

    #[test]
    fn shared_bank_collapses_to_one_port() {
        let l = HbmLayout::u280();
        let map = KernelPortMap::shared_bank(0, 0, PortWidth::Bits64);
        assert!((aggregate_bandwidth(&[map], &l, 300.0) - 2.4).abs() < 1e-12);
    }

    #[test]
    fn spread_ports_add_up() {
        let l = HbmLayout::u280();
        let map = KernelPortMap::spread(0, [0, 2, 4, 6, 8], PortWidth::Bits512);
        assert!((aggregate_bandwidth(&[map], &l, 300.0) - 96.0).abs() < 1e-9);
    }

    #[test]
    fn same_controller_is_penalised() {
        let l = HbmLayout::u280();
        let spaced = KernelPortMap::spread(0, [0, 2, 4, 6, 8], PortWidth::Bits512);
        let packed = KernelPortMap::spread(0, [0, 1, 4, 6, 8], PortWidth::Bits512);
        let bw_packed = aggregate_bandwidth(&[packed], &l, 300.0);
        assert!((bw_packed - (3.0 * 19.2 + 2.0 * 9.6)).abs() < 1e-9);
        assert!(bw_packed < aggregate_bandwidth(&[spaced], &l, 300.0));
    }

    #[test]
    fn traffic_counts() {
        assert_eq!(bytes_per_element(16).unwrap(), 262_144);
        assert_eq!(bytes_per_element(2).unwrap(), 512);
        assert_eq!(derivative_bytes(16).unwrap(), 4096);
        assert!(bytes_per_element(1).is_err());
    }

    #[test]
    fn zero_elements_take_no_time() {
        let map = KernelPortMap::shared_bank(0, 0, PortWidth::Bits64);
        assert_eq!(transfer_time(262_144, 0, &[map], &HbmLayout::u280(), 300.0), 0.0);
    }

    #[test]
    fn canonical_four_kernels() {
        let l = HbmLayout::u280();
        let maps = canonical_layout(4, PortWidth::Bits512, &l).unwrap();
        let banks: BTreeSet<usize> = maps.iter().flat_map(|m| m.ports().iter().map(|p| p.bank)).collect();
        assert_eq!(banks.len(), 20);
        assert!(validate_layout(&maps, &l).is_valid());
        assert!(canonical_layout(7, PortWidth::Bits512, &l).is_err());
    }
}
