use nekflow::ax::ProblemConfig;
use nekflow::cli::{cmd_scale, GlobalArgs, RunConfig};
use nekflow::dataflow::{
    fill_fraction, pipeline_cycles, predict_cycles, simulate_version, PhaseMode, VersionId, VersionPreset,
};
use nekflow::memory::{aggregate_bandwidth, canonical_layout, transfer_time, HbmLayout, KernelPortMap, PortWidth};
use nekflow::report::{efficiency, percent_theoretical, scale_kernels, PerfRecord, PowerModel};
use proptest::prelude::*;

#[test]
fn ladder_cycles_fall_monotonically() {
    let cfg = ProblemConfig::standard();
    let mem = HbmLayout::u280();
    let mut last = f64::INFINITY;
    for p in VersionPreset::ladder(16).unwrap() {
        let b = predict_cycles(&p.graph, &p.ports, &cfg, &mem).unwrap();
        let seconds = b.total_cycles as f64 / (p.graph.clock_mhz * 1e6);
        assert!(seconds < last, "{}", p.id.name());
        last = seconds;
    }
}

#[test]
fn presets_scale_with_n() {
    for n in [4, 8, 12] {
        let cfg = ProblemConfig::new(n, 10).unwrap();
        for p in VersionPreset::ladder(n).unwrap() {
            predict_cycles(&p.graph, &p.ports, &cfg, &HbmLayout::u280()).unwrap();
        }
    }
    assert!(VersionPreset::build(VersionId::Baseline, 1).is_err());
}

#[test]
fn presets_never_beat_their_peak() {
    let cfg = ProblemConfig::standard();
    for p in VersionPreset::ladder(16).unwrap() {
        let r = simulate_version(&p, &cfg, &HbmLayout::u280()).unwrap();
        assert!(r.pct_theoretical <= 100.0, "{}: {}", p.id.name(), r.pct_theoretical);
        assert_eq!(r, simulate_version(&p, &cfg, &HbmLayout::u280()).unwrap());
    }
}

#[test]
fn overlapping_phases_never_costs() {
    let cfg = ProblemConfig::standard();
    let mem = HbmLayout::u280();
    for id in [VersionId::PingPong, VersionId::MmOpt, VersionId::MemOpt] {
        let p = VersionPreset::build(id, 16).unwrap();
        let mut serial = p.graph.clone();
        serial.phase_mode = PhaseMode::Serialized;
        for e in &mut serial.pingpong_edges {
            e.double_buffered = true;
        }
        let mut overlapped = serial.clone();
        overlapped.phase_mode = PhaseMode::Overlapped;
        let s = predict_cycles(&serial, &p.ports, &cfg, &mem).unwrap();
        let o = predict_cycles(&overlapped, &p.ports, &cfg, &mem).unwrap();
        assert!(o.compute_cycles <= s.compute_cycles);
        assert_eq!(o.compute_cycles, *s.phase_cycles.iter().max().unwrap());
        assert_eq!(s.compute_cycles, s.phase_cycles.iter().sum::<u64>());
    }
}

#[test]
fn scale_command_tracks_measurements() {
    let cfg = RunConfig::resolve(&GlobalArgs::default()).unwrap();
    let out = cmd_scale(&cfg, 4).unwrap();
    let csv = out.file("scale.csv").unwrap();
    let row = |k: &str| -> Vec<f64> {
        let line = csv.lines().find(|l| l.starts_with(&format!("{k},"))).unwrap();
        line.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect()
    };
    let one = row("1");
    assert!((one[1] - 74.29).abs() / 74.29 <= 0.05);
    assert!((one[2] - 45.61).abs() / 45.61 <= 0.05);
    let four = row("4");
    assert!((four[3] - 4.02).abs() / 4.02 <= 0.03, "efficiency {}", four[3]);
}

proptest! {
    #[test]
    fn cycles_grow_with_trips(per in 1u64..500, extra in 1u64..100, ii in 1u64..8, depth in 1u64..80, b in 1u64..8) {
        let more = pipeline_cycles((per + extra) * b, ii, depth, b).unwrap();
        prop_assert!(more >= pipeline_cycles(per * b, ii, depth, b).unwrap());
    }

    #[test]
    fn cycles_grow_with_depth(per in 1u64..500, ii in 1u64..8, depth in 1u64..80, b in 1u64..8) {
        let t = per * b;
        prop_assert!(pipeline_cycles(t, ii, depth + 1, b).unwrap() >= pipeline_cycles(t, ii, depth, b).unwrap());
    }

    // Only holds when filling costs at least one issue slot (depth >= ii).
    #[test]
    fn cycles_grow_with_batches(per in 1u64..64, ii in 1u64..8, extra in 0u64..80, b in 1u64..16) {
        let depth = ii + extra;
        let total = per * b * (b + 1);
        prop_assert!(pipeline_cycles(total, ii, depth, b + 1).unwrap() >= pipeline_cycles(total, ii, depth, b).unwrap());
    }

    #[test]
    fn merging_never_costs(per in 1u64..64, ii in 1u64..4, extra in 0u64..80, b in 1u64..512) {
        let depth = ii + extra;
        let total = per * b;
        prop_assert!(pipeline_cycles(total, ii, depth, 1).unwrap() <= pipeline_cycles(total, ii, depth, b).unwrap());
        let f = fill_fraction(total, ii, depth, b).unwrap();
        prop_assert!(f > 0.0 && f <= 1.0);
    }

    #[test]
    fn bandwidth_never_exceeds_peak(kernels in 1usize..=6, wide in any::<bool>(), clock in 50.0f64..1000.0) {
        let mem = HbmLayout::u280();
        let width = if wide { PortWidth::Bits512 } else { PortWidth::Bits64 };
        let maps = canonical_layout(kernels, width, &mem).unwrap();
        let bw = aggregate_bandwidth(&maps, &mem, clock);
        prop_assert!(bw > 0.0 && bw <= mem.max_bandwidth_gbs);
    }

    #[test]
    fn transfer_time_linear_in_elements(nelt in 1u64..10_000, bank in 0usize..32) {
        let mem = HbmLayout::u280();
        let maps = [KernelPortMap::shared_bank(0, bank, PortWidth::Bits64)];
        let one = transfer_time(262_144, nelt, &maps, &mem, 300.0);
        let two = transfer_time(262_144, 2 * nelt, &maps, &mem, 300.0);
        prop_assert!((two - 2.0 * one).abs() <= 1e-12 * two);
    }

    #[test]
    fn report_figures_are_scale_covariant(a in 0.01f64..500.0, t in 0.1f64..500.0, w in 1.0f64..300.0) {
        let p1 = percent_theoretical(a, t).unwrap();
        let p2 = percent_theoretical(2.0 * a, t).unwrap();
        prop_assert!((p2 - 2.0 * p1).abs() <= 1e-9 * p2);
        let e1 = efficiency(&PerfRecord::new("x", a, t).unwrap().with_watts(w).unwrap()).unwrap();
        let e2 = efficiency(&PerfRecord::new("x", 2.0 * a, t).unwrap().with_watts(w).unwrap()).unwrap();
        prop_assert!((e2 - 2.0 * e1).abs() <= 1e-9 * e2);
    }

    #[test]
    fn scaling_is_monotone(single in 1.0f64..200.0) {
        let pm = PowerModel::default();
        let r = PerfRecord::new("1 kernel", single, 81.2).unwrap();
        let mut prev: Option<PerfRecord> = None;
        for k in 1..=pm.max_kernels {
            let s = scale_kernels(&r, k, &pm, true).unwrap();
            if let Some(p) = &prev {
                prop_assert!(s.gflops_achieved > p.gflops_achieved);
                prop_assert!(s.watts.unwrap() > p.watts.unwrap());
            }
            prev = Some(s);
        }
    }
}
