use std::path::Path;
use std::process::{Command, Output};

fn nekflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nekflow"))
        .args(args)
        .env_remove("NEKFLOW_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_passes_by_default() {
    let o = nekflow(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("all 15 checks passed"));
}

#[test]
fn corrupted_transpose_fails_adjointness() {
    let o = nekflow(&["verify", "--n", "3", "--corrupt-dt"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL adjointness"));
    assert!(out.contains("failing properties:"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(nekflow(&["verify", "--n", "1"]).status.code(), Some(2));
    assert_eq!(nekflow(&["scale", "--kernels", "0"]).status.code(), Some(2));
    let o = nekflow(&["scale", "--kernels", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("capacity"));
    assert_eq!(nekflow(&["ladder", "--preset", "warp-drive"]).status.code(), Some(2));
    assert_eq!(nekflow(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn ladder_writes_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = nekflow(&["ladder", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let csv_a = std::fs::read(a.join("ladder.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("ladder.csv")).unwrap());
    assert!(a.join("ladder.txt").exists());
    assert_eq!(String::from_utf8(csv_a).unwrap().lines().count(), 8);
}

#[test]
fn clock_filter() {
    let dir = tempfile::tempdir().unwrap();
    let o = nekflow(&["ladder", "--clock", "300", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("ladder.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(!csv.contains("clock400"));
}

#[test]
fn preset_selection() {
    let dir = tempfile::tempdir().unwrap();
    let o = nekflow(&[
        "ladder",
        "--preset",
        "mmopt,pingpong",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("ladder.csv")).unwrap();
    let names: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["mmopt", "pingpong"]);
}

#[test]
fn cyclic_graph_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cycle.ini",
        "[graph]\n[stage a]\nphase = forward\ntrips = 16\ndepth = 4\n[stage b]\nphase = forward\ntrips = 16\ndepth = 4\n[stream a -> b]\n[stream b -> a]\n",
    );
    let o = nekflow(&["ladder", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("graph acyclic"), "{}", stderr(&o));
    assert!(stderr(&o).contains("line 1"));
}

#[test]
fn custom_graph_row_appended() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "chain.ini",
        "[run]\npresets = stallfree\n[graph]\nname = chain\nn = 4\nphase_mode = serialized\n[stage a]\nphase = forward\ntrips = 64\ndepth = 4\nflops = 2\n",
    );
    let out = dir.path().join("out");
    let o = nekflow(&["ladder", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("ladder.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("chain,custom graph,300,512,"));
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.ini", "[run]\nnelt = 1\nn = 16\n");
    let o = Command::new(env!("CARGO_BIN_EXE_nekflow"))
        .arg("bench")
        .env("NEKFLOW_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("flops per sweep: 831488\n"));
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.ini", "[run]\nn = 16\nnelt = lots\n");
    let o = nekflow(&["ladder", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn bench_is_deterministic() {
    let run = || {
        let o = nekflow(&["bench", "--n", "6", "--nelt", "20", "--seed", "9"]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
            .lines()
            .find(|l| l.starts_with("checksum"))
            .unwrap()
            .to_string()
    };
    assert_eq!(run(), run());
    let o = nekflow(&["bench", "--n", "6", "--nelt", "20"]);
    assert!(stdout(&o).contains("host reference"));
}

#[test]
fn scale_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for name in ["x", "y"] {
        let out = dir.path().join(name);
        let o = nekflow(&["scale", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        csvs.push((
            std::fs::read(out.join("scale.csv")).unwrap(),
            std::fs::read(out.join("comparison.csv")).unwrap(),
        ));
    }
    assert_eq!(csvs[0], csvs[1]);
    let comparison = String::from_utf8(csvs[0].1.clone()).unwrap();
    assert!(comparison.contains("4 kernels,reference,289.02,71.98,4.02,4.396,0.709"));
}

#[test]
fn validate_layout_flags_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let ok = nekflow(&["validate-layout"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("layout valid"));

    let shared = write(
        dir.path(),
        "shared.ini",
        "[kernel 0]\nu=0\ng=2\ndxm1=4\ndxtm1=6\nw=8\n[kernel 1]\nu=4\ng=10\ndxm1=12\ndxtm1=14\nw=16\n",
    );
    let out = dir.path().join("out");
    let o = nekflow(&["validate-layout", "--layout", &shared, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("degraded scaling"));
    let csv = std::fs::read_to_string(out.join("layout.csv")).unwrap();
    assert!(csv.starts_with("kind,kernel,bank,detail\n"));
    assert!(csv.contains("cross-kernel"));

    let broken = write(dir.path(), "broken.ini", "[kernel 0]\nu=0\ng=2\nfoo=4\n");
    let o = nekflow(&["validate-layout", "--layout", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}
