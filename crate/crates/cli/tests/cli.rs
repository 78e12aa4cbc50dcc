use std::path::Path;
use std::process::{Command, Output};

fn epsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsense")).args(args).output().unwrap()
}

fn epsense_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsense"))
        .args(args)
        .env("EPSENSE_THREADS", threads)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn nh1_sweep_matches_closed_form() {
    let o = epsense(&[
        "qfi-sweep", "--model", "nh1", "--gamma-min", "0.1", "--gamma-max", "0.49", "--steps", "40",
        "--delta", "1e-6", "--method", "biortho",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("gamma,qfi_numeric,qfi_analytic,log_qfi"));
    let rows = rows(&text);
    assert_eq!(rows.len(), 40);
    let mut last = f64::NEG_INFINITY;
    for r in rows {
        let g: f64 = r[0].parse().unwrap();
        let q: f64 = r[1].parse().unwrap();
        assert!(g > last);
        last = g;
        let closed = 4.0 / (4.0 * g * g - 1.0).powi(2);
        assert!((q / closed - 1.0).abs() <= 1e-5, "{g}: {q} vs {closed}");
        assert!((r[3].parse::<f64>().unwrap() - q.ln()).abs() < 1e-12);
        // 17 significant digits.
        assert_eq!(r[1].split('e').next().unwrap().trim_start_matches('-').len(), 18);
    }
}

#[test]
fn nh3_sweep_logs_excluded_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nh3.csv");
    let o = epsense(&[
        "qfi-sweep", "--model", "nh3", "--gamma-min", "0.4", "--gamma-max", "0.6", "--steps", "81",
        "--out", path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let logged: Vec<f64> = stderr(&o)
        .lines()
        .filter_map(|l| l.strip_prefix("excluded gamma="))
        .map(|l| l.split(':').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(logged.len(), 5);
    for (a, g) in (8..=12).zip(&logged) {
        assert!((g - 0.05 * a as f64).abs() < 1e-12);
    }
    let sidecar = std::fs::read_to_string(dir.path().join("nh3.csv.excluded.csv")).unwrap();
    assert_eq!(sidecar.lines().count(), 6);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows(&csv).len(), 76);
    assert!(!csv.contains("NaN") && !csv.contains("nan"));
}

#[test]
fn bures_route_is_available() {
    let o = epsense(&[
        "qfi-sweep", "--model", "nh1", "--gamma-min", "0.2", "--gamma-max", "0.4", "--steps", "3",
        "--method", "bures",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for r in rows(&stdout(&o)) {
        let q: f64 = r[1].parse().unwrap();
        let closed: f64 = r[2].parse().unwrap();
        assert!((q / closed - 1.0).abs() < 5e-3);
    }
}

#[test]
fn pauli_y_noise_leaves_nh1_flat() {
    let o = epsense(&["noise-sweep", "--model", "nh1", "--channel", "pauli-y", "--param-steps", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("noise_param,max_log_qfi"));
    let v: Vec<f64> = rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(v.len(), 11);
    for x in &v {
        assert!((x / v[0] - 1.0).abs() <= 1e-6, "{v:?}");
    }
}

#[test]
fn transmon_populations_csv() {
    let o = epsense(&[
        "transmon", "--jtilde", "1", "--delta", "0", "--gamma-e", "8", "--evx", "2", "--t-max", "3",
        "--steps", "100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("exceptional point"));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("t,pe_norm,pf_norm"));
    let rows = rows(&text);
    assert_eq!(rows.len(), 100);
    for r in rows {
        let pe: f64 = r[1].parse().unwrap();
        let pf: f64 = r[2].parse().unwrap();
        assert!((pe + pf - 1.0).abs() < 1e-12);
    }
}

#[test]
fn export_writes_programs() {
    let dir = tempfile::tempdir().unwrap();
    let o = epsense(&[
        "export-qasm", "--model", "nh1", "--gamma", "0.5", "--swap-test", "--out-dir",
        path_str(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["nh1.qasm", "swap_test.qasm"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
    }
    let golden = include_str!("../../core/tests/golden/nh1_ep_t1.qasm");
    assert_eq!(std::fs::read_to_string(dir.path().join("nh1.qasm")).unwrap(), golden);
}

#[test]
fn swap_demo_prints_estimates() {
    let o = epsense(&["swap-demo", "--shots", "100000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.rsplitn(4, ',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let (sigma, est, exact): (f64, f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((est - exact).abs() <= 3.0 * sigma + 1e-12, "{r:?}");
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = epsense(&["qfi-sweep", "--model", "nh1", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    assert!(o.stdout.is_empty());
    assert_eq!(epsense(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(epsense(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_configuration_exits_with_two() {
    let base = ["qfi-sweep", "--model", "nh1", "--gamma-min", "0.1", "--gamma-max", "0.4"];
    let o = epsense(&[&base[..], &["--steps", "1"]].concat());
    assert_eq!(o.status.code(), Some(2));
    let o = epsense(&[&base[..], &["--steps", "5", "--exclude-radius", "-1"]].concat());
    assert_eq!(o.status.code(), Some(2));
    let o = epsense(&["swap-demo", "--shots", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = epsense(&["export-qasm", "--model", "nh1", "--gamma", "-0.2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = epsense_env(&["swap-demo", "--shots", "10"], "many");
    assert_eq!(o.status.code(), Some(2));
    let o = epsense(&[&base[..], &["--steps", "5", "--out", "/nonexistent/dir/x.csv"]].concat());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn whole_grid_at_ep_is_a_numeric_error() {
    let o = epsense(&[
        "qfi-sweep", "--model", "nh1", "--gamma-min", "0.5", "--gamma-max", "0.5000000001", "--steps", "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("excluded"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        "# NH1 sweep\nmodel = nh1\ngamma_min = 0.1\ngamma-max = 0.4\nsteps = 4\nmethod = biortho\n",
    )
    .unwrap();
    let o = epsense(&["qfi-sweep", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o)).len(), 4);
    let o = epsense(&["--config", path_str(&cfg), "qfi-sweep", "--steps", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o)).len(), 6);

    std::fs::write(&cfg, "model = nh1\nno-such-key = 3\n").unwrap();
    assert_eq!(epsense(&["qfi-sweep", "--config", path_str(&cfg)]).status.code(), Some(2));
    std::fs::write(&cfg, "model nh1\n").unwrap();
    assert_eq!(epsense(&["qfi-sweep", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "noise-sweep".to_string(), "--model".into(), "nh2".into(), "--channel".into(), "ad".into(),
            "--param-steps".into(), "6".into(), "--out".into(), path_str(out).into(),
        ]
    };
    let mut outputs = Vec::new();
    for (k, threads) in ["0", "1", "3", "0"].into_iter().enumerate() {
        let out = dir.path().join(format!("run{k}.csv"));
        let a = args(&out);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let o = epsense_env(&refs, threads);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let a = epsense(&["swap-demo", "--shots", "5000", "--seed", "11"]);
    let b = epsense(&["swap-demo", "--shots", "5000", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn plot_script_accompanies_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let script = dir.path().join("q.py");
    let o = epsense(&[
        "qfi-sweep", "--model", "nh1", "--gamma-min", "0.1", "--gamma-max", "0.4", "--steps", "4",
        "--out", path_str(&out), "--plot-script", path_str(&script),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&script).unwrap();
    assert!(text.contains("matplotlib") && text.contains("log_qfi") && text.contains(path_str(&out)));
    let o = epsense(&[
        "qfi-sweep", "--model", "nh1", "--gamma-min", "0.1", "--gamma-max", "0.4", "--steps", "4",
        "--plot-script", path_str(&script),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
