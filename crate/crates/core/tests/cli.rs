use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gl_lab(dir: &Path, args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gl-lab"));
    cmd.current_dir(dir).args(args).env_remove("GL_LAB_SEED");
    if let Some(s) = seed_env {
        cmd.env("GL_LAB_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn thm1_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = gl_lab(dir.path(), &["thm1", "--trials", "6", "--n", "5..30", "--out", "run"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for ext in ["json", "csv", "svg", "timing.json"] {
        assert!(dir.path().join(format!("run.{ext}")).exists(), "missing run.{ext}");
    }
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = gl_lab(dir.path(), &["thm2", "--trials", "3", "--n", "5..20", "--out", "r"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&dir.path().join("r.json"));
    assert_eq!(r["schema_version"], 1);
    assert!(r["rng"].is_string());
    assert_eq!(r["spec"]["kind"], "thm2-suite");
    for key in ["seed", "trials", "n_range", "m_range", "region", "d_multiplier", "output_path"] {
        assert!(!r["spec"][key].is_null(), "spec.{key}");
    }
    let agg = &r["aggregate"];
    assert_eq!(agg["trials"], 3);
    assert_eq!(agg["passes"], 3);
    assert_eq!(agg["pass_rate"], 1.0);
    assert_eq!(agg["pass_expected"], true);
    assert!(agg["failures"].as_array().unwrap().is_empty());
    let results = r["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for (i, t) in results.iter().enumerate() {
        assert_eq!(t["index"], i);
        assert!(t["seed"].is_u64());
        let cert = &t["certificate"];
        assert_eq!(cert["theorem"], "thm2");
        for key in ["predicted_inner_count", "observed_inner_count", "observed_outer_count", "winding_inner_count"] {
            assert!(cert[key].is_u64() || cert[key].is_i64(), "{key}");
        }
        assert_eq!(cert["pass"], true);
    }
    let timing = report(&dir.path().join("r.timing.json"));
    assert!(timing["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn env_seed_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    gl_lab(p, &["thm1", "--trials", "3", "--n", "5..20", "--seed", "1", "--out", "env"], Some("9"));
    gl_lab(p, &["thm1", "--trials", "3", "--n", "5..20", "--seed", "9", "--out", "flag"], None);
    let (a, b) = (report(&p.join("env.json")), report(&p.join("flag.json")));
    assert_eq!(a["spec"]["seed"], 9);
    assert_eq!(a["results"], b["results"]);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let args = |jobs: &'static str| ["thm1", "--trials", "8", "--n", "5..40", "--jobs", jobs, "--out", "same"];
    gl_lab(p, &args("1"), None);
    let first: Vec<Vec<u8>> = ["json", "csv", "svg"].iter().map(|e| std::fs::read(p.join(format!("same.{e}"))).unwrap()).collect();
    gl_lab(p, &args("4"), None);
    for (e, bytes) in ["json", "csv", "svg"].iter().zip(first) {
        assert_eq!(std::fs::read(p.join(format!("same.{e}"))).unwrap(), bytes, "same.{e}");
    }
}

#[test]
fn replay_reproduces_a_trial() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    gl_lab(p, &["thm1", "--trials", "4", "--n", "5..40", "--out", "suite"], None);
    let suite = report(&p.join("suite.json"));
    let trial = &suite["results"][2];
    let seed = trial["seed"].as_u64().unwrap().to_string();
    let out = gl_lab(p, &["thm1", "--n", "5..40", "--replay", &seed, "--out", "one"], None);
    assert_eq!(out.status.code(), Some(0));
    let one = report(&p.join("one.json"));
    assert_eq!(one["results"][0]["certificate"], trial["certificate"]);
    assert_eq!(one["results"][0]["n"], trial["n"]);
}

#[test]
fn exploratory_run_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = gl_lab(dir.path(), &["thm1", "--trials", "4", "--n", "5..30", "--d-mult", "0.5..0.9", "--out", "x"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&dir.path().join("x.json"));
    assert_eq!(r["aggregate"]["exploratory"], true);
    assert_eq!(r["aggregate"]["pass_expected"], false);
}

#[test]
fn annulus_below_threshold_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let fail = gl_lab(dir.path(), &["annulus", "--n", "30", "--out", "a"], None);
    assert_eq!(fail.status.code(), Some(1));
    let pass = gl_lab(dir.path(), &["annulus", "--n", "100,300", "--out", "b"], None);
    assert_eq!(pass.status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gl_lab(dir.path(), &["thm1", "--n", "abc"], None).status.code(), Some(2));
    assert_eq!(gl_lab(dir.path(), &["thm1", "--region", "missing.txt"], None).status.code(), Some(2));
}

#[test]
fn polygon_file_region() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("square.txt"), "-1 -1\n1 -1\n1 1\n-1 1\n").unwrap();
    let out = gl_lab(dir.path(), &["thm2", "--trials", "3", "--n", "5..20", "--region", "square.txt", "--out", "sq"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir.path().join("sq.json"));
    assert_eq!(r["spec"]["region"]["type"], "polygon");
}

#[test]
fn plot_matches_golden_svg() {
    let dir = tempfile::tempdir().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases: [(&[&str], &str); 2] = [
        (&["plot", "--figure", "sharp", "--n", "2", "--m", "1", "--d-mult", "1.5", "--out", "g"], "plot_sharp_2_1.svg"),
        (&["plot", "--seed", "5", "--out", "g"], "plot_random_seed5.svg"),
    ];
    for (args, file) in cases {
        let out = gl_lab(dir.path(), args, None);
        assert_eq!(out.status.code(), Some(0));
        let got = std::fs::read_to_string(dir.path().join("g.svg")).unwrap();
        assert_eq!(got, std::fs::read_to_string(golden.join(file)).unwrap(), "{file}");
    }
}
