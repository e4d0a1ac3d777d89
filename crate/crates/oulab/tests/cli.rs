use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oulab::fixture::FixtureSample;
use oulab_core::{observations, DriverKind, OuParams, SamplerKind, TimePoint};
use serde_json::Value;

fn oulab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oulab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = oulab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&ok(args)).unwrap()
}

fn bundled_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/observations_t05.csv")
}

fn result<'a>(v: &'a Value, estimator: &str) -> &'a Value {
    v["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["estimator"] == estimator)
        .unwrap()
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate", "--grid", "0,0.5", "--paths", "3", "--seed", "11",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    assert_ne!(
        a,
        ok(&["simulate", "--grid", "0,0.5", "--paths", "3", "--seed", "12"])
    );
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# oulab "));
    assert!(text.contains("# config_hash="));
    assert!(text.contains("# driver=prng:11"));
    assert!(text.contains("path_id,t,x"));
}

#[test]
fn simulated_file_round_trips_through_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("obs.csv");
    ok(&[
        "simulate",
        "--n",
        "100",
        "--t",
        "0.5",
        "--seed",
        "5",
        "--out",
        file.to_str().unwrap(),
    ]);

    let p = OuParams::new(0.5, -3.0, 1.0, 3.0).unwrap();
    let direct = observations(
        &p,
        TimePoint::new(0.5).unwrap(),
        DriverKind::Prng { seed: 5, stream: 0 },
        100,
        SamplerKind::Exact,
    )
    .unwrap();
    let parsed = FixtureSample::read(&file).unwrap().values();
    assert_eq!(
        parsed.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        direct.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );

    let v = json(&["estimate", file.to_str().unwrap(), "--estimator", "x0"]);
    let x0 = result(&v, "x0")["estimate"].as_f64().unwrap();
    assert!(
        (x0 - 3.0).abs() < 4.0 * 0.25f64.exp() * (0.3935f64 / 100.0).sqrt(),
        "{x0}"
    );
}

#[test]
fn weyl_fourier_simulation_matches_library() {
    let out = String::from_utf8(ok(&[
        "simulate",
        "--n",
        "5",
        "--weyl-stream",
        "3",
        "--sampler",
        "fourier",
        "--truncation",
        "64",
    ]))
    .unwrap();
    let fixture = FixtureSample::parse(&out, "stdout").unwrap();
    let p = OuParams::new(0.5, -3.0, 1.0, 3.0).unwrap();
    let tr = oulab_core::FourierTruncation::new(64).unwrap();
    let direct = observations(
        &p,
        TimePoint::new(0.5).unwrap(),
        DriverKind::Weyl { stream: 3 },
        5,
        SamplerKind::Fourier(tr),
    )
    .unwrap();
    assert_eq!(fixture.values(), direct);
    assert!(out.contains("# driver=weyl:3"));
}

#[test]
fn vanishing_noise_gives_the_mean_curve() {
    let out = ok(&[
        "simulate", "--sigma", "1e-300", "--grid", "0,0.5", "--paths", "1", "--format", "json",
    ]);
    let v: Value = serde_json::from_slice(&out).unwrap();
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["x"].as_f64().unwrap(), 3.0);
    let p = OuParams::new(0.5, -3.0, 1e-300, 3.0).unwrap();
    assert_eq!(
        rows[1]["x"].as_f64().unwrap(),
        p.transition_mean(TimePoint::new(0.5).unwrap())
    );
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn estimate_on_bundled_sample() {
    let path = bundled_path();
    let v = json(&["estimate", path.to_str().unwrap()]);
    assert!((result(&v, "x0")["estimate"].as_f64().unwrap() - 2.90958959).abs() < 1e-6);
    assert!((result(&v, "sigma2")["estimate"].as_f64().unwrap() - 1.070420297).abs() < 1e-6);
    let x0 = result(&v, "x0");
    assert_eq!(x0["trace"].as_array().unwrap().len(), 100);
    assert_eq!(x0["trace"][99], x0["estimate"]);
    assert_eq!(x0["suffix_min"][99], x0["estimate"]);
}

#[test]
fn single_observation_at_the_mean_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.csv");
    let p = OuParams::new(0.5, -3.0, 1.0, 3.0).unwrap();
    let m = p.transition_mean(TimePoint::new(0.5).unwrap());
    std::fs::write(&file, format!("k,z\n1,{m:?}\n")).unwrap();
    let v = json(&["estimate", file.to_str().unwrap(), "--estimator", "x0"]);
    assert!((result(&v, "x0")["estimate"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    let v = json(&["estimate", file.to_str().unwrap(), "--estimator", "mu"]);
    assert!((result(&v, "mu")["estimate"].as_f64().unwrap() + 3.0).abs() < 1e-12);
    let v = json(&["estimate", file.to_str().unwrap(), "--estimator", "theta"]);
    assert!((result(&v, "theta")["estimate"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn exit_codes_separate_usage_io_and_estimation() {
    assert_eq!(oulab(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(oulab(&["simulate", "--theta", "-1"]).status.code(), Some(2));
    assert_eq!(
        oulab(&["moments", "--seed", "1", "--weyl-stream", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        oulab(&["estimate", "/nonexistent/obs.csv"]).status.code(),
        Some(3)
    );
    assert_eq!(
        oulab(&["simulate", "--out", "/nonexistent/dir/out.csv"])
            .status
            .code(),
        Some(3)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "k,z\n1,0.5\n3,0.7\n").unwrap();
    assert_eq!(
        oulab(&["estimate", bad.to_str().unwrap()]).status.code(),
        Some(3)
    );

    // below mu while x0 is above: the rate ratio is negative
    let below = dir.path().join("below.csv");
    std::fs::write(&below, "k,z\n1,-4\n2,-4.5\n").unwrap();
    let report = dir.path().join("report.json");
    let out = oulab(&[
        "estimate",
        below.to_str().unwrap(),
        "--estimator",
        "theta",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert!(result(&v, "theta")["estimate"].is_null());
    assert!(result(&v, "theta")["error"]
        .as_str()
        .unwrap()
        .contains("not positive"));
}

#[test]
fn reproduce_tables_text_and_csv() {
    let text = String::from_utf8(ok(&["reproduce-tables"])).unwrap();
    assert!(text.contains("0.500192489"));
    assert!(text.contains("-3.235239072"));
    assert!(text.contains("3.005595171"));

    let csv = String::from_utf8(ok(&["reproduce-tables", "--format", "csv"])).unwrap();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 80);
    for r in &rows {
        let diff: f64 = r[4].parse().unwrap();
        assert!(diff.abs() <= 1e-6, "{r:?}");
    }

    let printed = String::from_utf8(ok(&["reproduce-tables", "--printed"])).unwrap();
    assert!(printed.contains("observations_t05_printed.csv"));
    assert_eq!(
        oulab(&["reproduce-tables", "--input", "/nonexistent.csv"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 9\nn = 7\nsigma = 2.0\n").unwrap();
    let from_file = ok(&["simulate", "--config", cfg.to_str().unwrap()]);
    let explicit = ok(&["simulate", "--seed", "9", "--n", "7", "--sigma", "2"]);
    assert_eq!(from_file, explicit);
    let overridden = ok(&["simulate", "--config", cfg.to_str().unwrap(), "--n", "3"]);
    assert_eq!(
        FixtureSample::parse(std::str::from_utf8(&overridden).unwrap(), "x")
            .unwrap()
            .rows
            .len(),
        3
    );

    std::fs::write(&cfg, "sigmaa = 2.0\n").unwrap();
    assert_eq!(
        oulab(&["simulate", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn degenerate_experiment_reports_zero_error() {
    let v = json(&[
        "experiment",
        "--sigma",
        "1e-300",
        "--sizes",
        "50",
        "--replications",
        "1",
    ]);
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r["rmse"].as_f64().unwrap() < 1e-13, "{r}");
        assert_eq!(r["failures"], 0);
    }
    assert_eq!(v["config"]["driver"]["seed"], 42);
}

#[test]
fn experiment_reports_do_not_depend_on_threads() {
    let base = ["experiment", "--sizes", "10,100", "--replications", "24"];
    let a = ok(&[&base[..], &["--threads", "1"]].concat());
    let b = ok(&[&base[..], &["--threads", "3"]].concat());
    assert_eq!(a, b);
    let cov = json(&[
        "experiment",
        "--check",
        "covariance",
        "--s",
        "0.25",
        "--n",
        "20000",
    ]);
    assert_eq!(cov["results"][0]["flagged"], false);
}

#[test]
fn moment_check_at_reference_size() {
    let v = json(&["moments"]);
    let r = &v["results"][0];
    assert!(r["z_mean"].as_f64().unwrap().abs() <= 4.0);
    assert!(r["z_variance"].as_f64().unwrap().abs() <= 4.0);
    assert_eq!(r["config_hash"], v["config_hash"]);
}

#[test]
fn equidist_csv() {
    let out = String::from_utf8(ok(&[
        "equidist",
        "--weyl-stream",
        "2",
        "--target",
        "gaussian",
        "--format",
        "csv",
    ]))
    .unwrap();
    assert!(out.contains("# driver=weyl:2"));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(out.as_bytes());
    assert_eq!(rdr.records().count(), 10);
}
