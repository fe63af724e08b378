use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn fundfdtd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fundfdtd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_in(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    fundfdtd(&args)
}

const RANDOM_RUN: &[&str] = &[
    "--set",
    "cfl=5",
    "--set",
    "init=random",
    "--set",
    "steps=20",
    "--set",
    "snapshot_every=10",
    "--set",
    "probes=ez@4,4,4;hy@2,3,1",
    "--set",
    "scheme=ss2",
    "--seed",
    "9",
];

#[test]
fn zero_steps_writes_only_the_header() {
    let d = tempdir().unwrap();
    let o = run_in(d.path(), &["--set", "cfl=2", "--set", "steps=0", "--set", "probes=ex@1,1,1;hz@0,0,0"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(d.path().join("probes.csv")).unwrap();
    assert_eq!(csv, "step,time,ex@1.1.1,hz@0.0.0\n");
}

#[test]
fn probe_values_carry_seventeen_significant_digits() {
    let d = tempdir().unwrap();
    assert_eq!(code(&run_in(d.path(), RANDOM_RUN)), 0);
    let csv = fs::read_to_string(d.path().join("probes.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    for field in row.split(',').skip(1) {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
        let v: f64 = field.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), field);
    }
}

#[test]
fn outputs_are_identical_across_runs_and_threads() {
    let dirs: Vec<_> = (0..3).map(|_| tempdir().unwrap()).collect();
    for (d, threads) in dirs.iter().zip(["1", "1", "4"]) {
        let mut args = RANDOM_RUN.to_vec();
        args.extend(["--threads", threads]);
        assert_eq!(code(&run_in(d.path(), &args)), 0);
    }
    for name in ["probes.csv", "snapshot_00000010.bin", "snapshot_00000020.bin"] {
        let first = fs::read(dirs[0].path().join(name)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(first, fs::read(d.path().join(name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn snapshot_restart_continues_bit_exactly() {
    let full = tempdir().unwrap();
    assert_eq!(code(&run_in(full.path(), RANDOM_RUN)), 0);
    let half = tempdir().unwrap();
    let init = format!("init=snapshot:{}", full.path().join("snapshot_00000010.bin").display());
    let mut args = RANDOM_RUN.to_vec();
    args.extend(["--set", "steps=10", "--set", &init]);
    let o = run_in(half.path(), &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(full.path().join("snapshot_00000020.bin")).unwrap(),
        fs::read(half.path().join("snapshot_00000020.bin")).unwrap()
    );
    let tail = |p: &Path| fs::read_to_string(p.join("probes.csv")).unwrap().lines().last().unwrap().to_owned();
    assert_eq!(tail(full.path()), tail(half.path()));
}

#[test]
fn config_file_and_overrides_combine() {
    let d = tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    fs::write(&cfg, "# small run\nnx = 6\nny = 5\nnz = 4\ncfl = 3\nsteps = 4\nprobes = ez@1,1,1\n").unwrap();
    let out = d.path().join("out");
    let o = fundfdtd(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "steps=2",
        "--set",
        "source=ez@2,2,2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("probes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"final_step\": 2"));
}

#[test]
fn usage_errors_exit_with_one() {
    let d = tempdir().unwrap();
    assert_eq!(code(&fundfdtd(&["frobnicate"])), 1);
    assert_eq!(code(&run_in(d.path(), &["--set", "nonsense=1", "--set", "cfl=1"])), 1);
    assert_eq!(code(&run_in(d.path(), &["--set", "cfl=1", "--set", "scheme=leapfrog"])), 1);
    assert_eq!(code(&run_in(d.path(), &["--set", "cfl=1", "--set", "dt=0.1"])), 1);
    assert_eq!(code(&run_in(d.path(), &["--set", "cfl=1", "--threads", "0"])), 1);
    assert_eq!(code(&fundfdtd(&["verify", "nonexistent"])), 1);
    assert_eq!(code(&fundfdtd(&["--help"])), 0);
}

#[test]
fn overflow_exits_with_three() {
    let d = tempdir().unwrap();
    let o = run_in(
        d.path(),
        &[
            "--set",
            "cfl=5",
            "--set",
            "steps=50",
            "--set",
            "source=ez@4,4,4",
            "--set",
            "amplitude=1e308",
            "--set",
            "frequency=0.01",
        ],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_lists_suites_and_runs_table1() {
    let o = fundfdtd(&["verify"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for suite in ["table1", "equivalence", "stability", "convergence", "dense", "links"] {
        assert!(text.contains(suite), "{text}");
    }
    let d = tempdir().unwrap();
    let o = fundfdtd(&["verify", "table1", "uniformity", "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS table1"));
    let csv = fs::read_to_string(d.path().join("verify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1 + 4);
}

#[test]
fn cost_table_has_eight_columns() {
    let o = fundfdtd(&["cost"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert_eq!(header.matches(" orig").count() + header.matches(" new").count(), 8);
    let totals = text.lines().find(|l| l.starts_with("Total M/D+A/S")).unwrap();
    let nums: Vec<&str> = totals.split_whitespace().skip(2).collect();
    assert_eq!(nums, ["102", "42", "72", "42", "108", "63", "72", "42"]);
}

#[test]
fn cost_csv_and_crank_nicolson() {
    let o = fundfdtd(&["cost", "--scheme", "lod2", "--formulation", "fundamental", "--csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("lod2,fundamental,"));
    let o = fundfdtd(&["cost", "--scheme", "cn"]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not in cost model"));
}

#[test]
fn driven_adi_run_stays_bounded() {
    let d = tempdir().unwrap();
    let o = run_in(
        d.path(),
        &["--set", "cfl=5", "--set", "steps=200", "--set", "source=ez@4,4,4", "--set", "probes=ez@4,4,4;hx@4,3,3"],
    );
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(d.path().join("probes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
    let peak = csv
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(2).map(|v| v.parse::<f64>().unwrap().abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    assert!(peak.is_finite() && peak > 0.0 && peak < 100.0, "{peak}");
}
