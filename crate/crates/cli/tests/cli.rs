use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_oris-link");

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(BIN);
    c.args(args).env_remove("ORIS_LINK_THREADS");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, name: &str, extra: &[&str], envs: &[(&str, &str)]) -> (Output, PathBuf) {
    let out = dir.join(name);
    let cfg = config("table1.conf");
    let mut args = vec![
        "simulate", "--config", s(&cfg), "--out", s(&out), "--trials", "100000",
        "--pt-dbm", "35", "--seed", "9",
    ];
    args.extend_from_slice(extra);
    (run(&args, envs), out)
}

#[test]
fn analyze_writes_schema_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let cfg = config("table1.conf");
    let o = run(&["analyze", "--config", s(&cfg), "--pt-sweep", "0:60:10", "--out", s(&out)], &[]);
    ok(&o);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "pt_dbm,outage_exact,outage_asymptotic,ber_asymptotic,ber_exact_numeric"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1]);
        assert!(w[1][4] <= w[0][4]);
    }
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["command"], "analyze");
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    assert_eq!(m["status"], "ok");
}

#[test]
fn analyze_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("table1.conf");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&run(&["analyze", "--config", s(&cfg), "--pt-sweep", "10:40:5", "--out", s(&a)], &[]));
    ok(&run(&["analyze", "--config", s(&cfg), "--pt-sweep", "10:40:5", "--out", s(&b)], &[]));
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn simulate_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for w in ["1", "4", "8"] {
        let (o, p) = simulate(dir.path(), &format!("w{w}.json"), &["--workers", w], &[]);
        ok(&o);
        outputs.push(std::fs::read(p).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let v: serde_json::Value = serde_json::from_slice(&outputs[0]).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    let mut expected = vec!["metric", "estimate", "ci_low", "ci_high", "trials", "seed", "config_digest"];
    expected.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, expected);
    assert_eq!(v["trials"], 100000);
    assert_eq!(v["seed"], 9);
}

#[test]
fn thread_env_is_honored_and_harmless() {
    let dir = tempfile::tempdir().unwrap();
    let (o1, p1) = simulate(dir.path(), "e1.json", &[], &[("ORIS_LINK_THREADS", "3")]);
    let (o2, p2) = simulate(dir.path(), "e2.json", &["--workers", "1"], &[]);
    ok(&o1);
    ok(&o2);
    assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
}

#[test]
fn existing_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let (o, p) = simulate(dir.path(), "x.json", &[], &[]);
    ok(&o);
    std::fs::write(&p, "keep").unwrap();
    let (o, _) = simulate(dir.path(), "x.json", &[], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "keep");
    let (o, _) = simulate(dir.path(), "x.json", &["--force"], &[]);
    ok(&o);
    assert_ne!(std::fs::read_to_string(&p).unwrap(), "keep");
}

#[test]
fn precision_target_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = simulate(dir.path(), "p.json", &["--max-ci-halfwidth", "1e-6"], &[]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bad_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "pt = 20 dBm\nbogus_key = 3\n").unwrap();
    let out = dir.path().join("o.csv");
    let o = run(&["analyze", "--config", s(&bad), "--pt-sweep", "0:10:5", "--out", s(&out)], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus_key"));

    let cfg = config("table1.conf");
    let o = run(&["analyze", "--config", s(&cfg), "--pt-sweep", "10:0:5", "--out", s(&out)], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &["analyze", "--config", s(&cfg), "--pt-sweep", "0:10:5", "--quad-points", "8", "--out", s(&out)],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--config", s(&cfg), "--out", s(&out), "--trials", "10"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn compare_reports_every_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let cfg = config("table1-self-consistent.conf");
    let o = run(
        &[
            "compare", "--config", s(&cfg), "--pt-sweep", "30:40:10", "--out", s(&out),
            "--trials", "100000", "--workers", "2",
        ],
        &[],
    );
    ok(&o);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(
        "pt_dbm,outage_exact,outage_asymptotic,outage_mc,outage_mc_ci_low,outage_mc_ci_high,\
         ber_asymptotic,ber_exact_numeric,ber_mc,ber_mc_ci_low,ber_mc_ci_high\n"
    ));
    assert_eq!(text.lines().count(), 3);
    for line in text.lines().skip(1) {
        let c: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(c[4] <= c[3] && c[3] <= c[5]);
        assert!(c[9] <= c[8] && c[8] <= c[10]);
    }
}
