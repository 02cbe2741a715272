use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn antipt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antipt")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    footer: Vec<(String, String)>,
    raw: String,
}

impl Csv {
    fn read(path: &Path) -> Csv {
        let raw = fs::read_to_string(path).unwrap();
        let mut lines = raw.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let (mut rows, mut footer) = (Vec::new(), Vec::new());
        for l in lines {
            if let Some(f) = l.strip_prefix("# ") {
                let (k, v) = f.split_once('=').unwrap();
                footer.push((k.to_string(), v.to_string()));
            } else {
                rows.push(l.split(',').map(String::from).collect());
            }
        }
        Csv { header, rows, footer, raw }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let k = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[k].parse().unwrap()).collect()
    }

    fn footer(&self, key: &str) -> &str {
        &self.footer.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no footer {key}")).1
    }
}

fn run_ok(dir: &Path, args: &[&str]) -> PathBuf {
    let o = antipt(dir, args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir.join(String::from_utf8(o.stdout).unwrap().trim())
}

#[test]
fn evolve_writes_trajectory_and_sidecar() {
    let tmp = TempDir::new().unwrap();
    let csv = run_ok(tmp.path(), &["evolve", "--cap", "4", "--out", "o"]);
    let t = Csv::read(&csv);
    assert_eq!(&t.header[..5], ["z_m", "n_as", "n_ai", "n_bs", "n_bi"]);
    assert!(t.header.iter().any(|h| h.starts_with("G2_")) && t.header.iter().any(|h| h.starts_with("G3_")));
    assert_eq!(t.rows.len(), 41);
    assert!(!t.raw.contains('\r'));
    assert_eq!(t.rows[1][0], "1.0000000000000000e-4");

    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/evolve.json")).unwrap()).unwrap();
    assert_eq!(side["config_hash"].as_str().unwrap(), t.footer("config_hash"));
    assert_eq!(side["config"]["g_eps"], 6.93);
    assert_eq!(side["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn master_g4_accumulates_monotonically() {
    let tmp = TempDir::new().unwrap();
    let g4 = Csv::read(&run_ok(tmp.path(), &["evolve", "--cap", "4"])).col("G4");
    assert!(g4.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn coherent_mean_photons_oscillate() {
    let tmp = TempDir::new().unwrap();
    let n = Csv::read(&run_ok(tmp.path(), &["evolve", "--scheme", "coherent", "--cap", "4", "--z-samples", "81"])).col("n_as");
    let peak = n.iter().copied().fold(0.0, f64::max);
    assert!(peak > 0.0 && *n.last().unwrap() < 0.5 * peak);
}

#[test]
fn no_pump_means_no_correlations() {
    let tmp = TempDir::new().unwrap();
    let t = Csv::read(&run_ok(tmp.path(), &["evolve", "--g-eps", "0 m^-1", "--cap", "4"]));
    for h in t.header.iter().filter(|h| h.starts_with('G') || h.starts_with("n_")) {
        assert!(t.col(h).iter().all(|&x| x == 0.0), "{h}");
    }
}

#[test]
fn single_point_sweep_matches_evolve_endpoint() {
    let tmp = TempDir::new().unwrap();
    let e = Csv::read(&run_ok(tmp.path(), &["evolve", "--cap", "4", "--theta", "0.8"]));
    let s = Csv::read(&run_ok(tmp.path(), &["sweep", "--cap", "4", "--theta", "0.8"]));
    assert_eq!(s.rows.len(), 1);
    assert_eq!(s.rows[0][1], "ok");
    assert_eq!(s.rows[0][2..2 + e.header.len()], e.rows.last().unwrap()[..]);
}

#[test]
fn sweep_reports_visibility_and_engine_deviation() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("run.toml"),
        "[model]\ng_eps = \"6.93 m^-1\"\ngamma = \"7.22 cm^-1\"\ntheta_grid = 9\n\n[truncation]\ntotal = 4\n\n[run]\ncompare = \"gaussian\"\n",
    )
    .unwrap();
    let s = Csv::read(&run_ok(tmp.path(), &["sweep", "-c", "run.toml"]));
    let theta = s.col("theta_rad");
    assert!(theta.windows(2).all(|w| w[1] > w[0]));
    assert!(s.footer("G4_visibility").parse::<f64>().unwrap() >= 0.99);
    assert_eq!(s.footer("G4_min_theta_rad").parse::<f64>().unwrap(), std::f64::consts::PI);
    assert!(s.footer("max_rel_G4_deviation_vs_gaussian").parse::<f64>().unwrap() < 0.01);
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let tmp = TempDir::new().unwrap();
    let args = ["sweep", "--cap", "3", "--theta-points", "7"];
    let a = run_ok(tmp.path(), &[&args[..], &["--threads", "1", "--name", "a"]].concat());
    let b = run_ok(tmp.path(), &[&args[..], &["--threads", "3", "--name", "b"]].concat());
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn failing_points_are_flagged_rows() {
    let tmp = TempDir::new().unwrap();
    let o = antipt(tmp.path(), &["sweep", "--cap", "2", "--theta-points", "3", "--z-samples", "2", "--step", "4 mm"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let s = Csv::read(&tmp.path().join("sweep.csv"));
    assert_eq!(s.rows.len(), 3);
    let status = s.header.iter().position(|h| h == "status").unwrap();
    assert!(s.rows.iter().all(|r| r[status] == "failed" && r.last().unwrap().contains("theta")));
    assert_eq!(s.footer("failed_points"), "3");
}

#[test]
fn flags_override_config_keys() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.toml"), "[model]\ng_eps = \"0 m^-1\"\n[truncation]\ntotal = 3\n").unwrap();
    let zero = Csv::read(&run_ok(tmp.path(), &["evolve", "-c", "c.toml", "--name", "zero"]));
    let on = Csv::read(&run_ok(tmp.path(), &["evolve", "-c", "c.toml", "--g-eps", "0.0693 cm^-1", "--name", "on"]));
    assert_eq!(*zero.col("n_as").last().unwrap(), 0.0);
    assert!(*on.col("n_as").last().unwrap() > 0.0);
    assert_ne!(zero.footer("config_hash"), on.footer("config_hash"));
}

#[test]
fn config_errors_name_the_line() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("[model]\nscheme = \"anti-pt\"\ngamma = \"7.22 cm-1\"\n", "c.toml:3: model.gamma"),
        ("[model]\ng_eps = 6.93\n", "c.toml:2: model.g_eps"),
        ("[model]\ngamma = \"-1 m^-1\"\n", "c.toml:2: model.gamma"),
        ("[model]\ntheta = 0.5\ntheta_grid = 5\n", "c.toml:3: model.theta_grid"),
        ("[run]\nengine = \"euler\"\n", "c.toml:2: run.engine"),
        ("[model]\nbogus = 1\n", "line 2"),
    ];
    for (text, expect) in cases {
        fs::write(tmp.path().join("c.toml"), text).unwrap();
        let o = antipt(tmp.path(), &["evolve", "-c", "c.toml"]);
        assert_eq!(code(&o), 1, "{text}");
        assert!(stderr(&o).contains(expect), "{expect} not in {}", stderr(&o));
    }
}

#[test]
fn invalid_runs_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&antipt(tmp.path(), &["evolve", "--scheme", "coherent", "--engine", "nhh"])), 1);
    assert_eq!(code(&antipt(tmp.path(), &["evolve", "--theta-points", "5"])), 1);
    assert_eq!(code(&antipt(tmp.path(), &["evolve", "--length", "4"])), 1);
}

#[test]
fn numerical_failure_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let o = antipt(tmp.path(), &["evolve", "--cap", "2", "--z-samples", "2", "--step", "4 mm"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn design_reports_paper_numbers() {
    let tmp = TempDir::new().unwrap();
    let o = antipt(tmp.path(), &["design"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let out = &v["outputs"];
    assert!((out["poling_period"]["um"].as_f64().unwrap() - 3.25).abs() < 0.01);
    assert!((out["kappa"]["cm^-1"].as_f64().unwrap() - 76.62).abs() < 0.01);
    assert!((out["gamma"]["cm^-1"].as_f64().unwrap() - 7.22).abs() < 0.01);
    assert!(v["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn design_config_takes_units() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("d.toml"), "[design]\nl_beat = \"102.5 um\"\n").unwrap();
    let o = antipt(tmp.path(), &["design", "-c", "d.toml"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["outputs"]["kappa"]["cm^-1"].as_f64().unwrap() - 2.0 * 76.62).abs() < 0.02);
    fs::write(tmp.path().join("d.toml"), "[design]\nl_beat = 102.5\n").unwrap();
    let o = antipt(tmp.path(), &["design", "-c", "d.toml"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("d.toml:2: design.l_beat"));
}

fn write_scan(path: &Path, b: f64, theta0: f64) {
    let mut s = String::from("P_heater_mW,P_a_W,P_b_W\n");
    for k in 0..60 {
        let p = 400.0 * k as f64 / 59.0;
        let c = (b * p + theta0).cos();
        s.push_str(&format!("{p},{},{}\n", 1e-3 * (1.0 + 0.8 * c), 1e-3 * (1.0 - 0.8 * c)));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn fit_recovers_calibration() {
    let tmp = TempDir::new().unwrap();
    write_scan(&tmp.path().join("scan.csv"), 0.037, 0.56);
    let o = antipt(tmp.path(), &["fit", "scan.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["b_rad_per_mW"].as_f64().unwrap() / 0.037 - 1.0).abs() < 0.01);
    assert!((v["theta0_rad"].as_f64().unwrap() / 0.56 - 1.0).abs() < 0.01);

    let d = antipt(tmp.path(), &["design", "--calibration", "scan.csv"]);
    let v: serde_json::Value = serde_json::from_slice(&d.stdout).unwrap();
    assert!((v["calibration"]["b_rad_per_mW"].as_f64().unwrap() / 0.037 - 1.0).abs() < 0.01);
}

#[test]
fn fit_rejects_malformed_rows() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.csv"), "1,2,3\n4,5\n").unwrap();
    let o = antipt(tmp.path(), &["fit", "bad.csv"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.csv:2"), "{}", stderr(&o));
}

#[test]
fn validate_prints_one_line_per_criterion() {
    let tmp = TempDir::new().unwrap();
    let o = antipt(tmp.path(), &["validate", "--only", "A10,A11", "--json", "r.json"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("A10 PASS") && lines[1].starts_with("A11 PASS"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["criteria"][0]["checks"].as_array().unwrap().len() > 3);
}

#[test]
fn flipped_lambda_co_breaks_bright_dark_consistency() {
    let tmp = TempDir::new().unwrap();
    let o = antipt(tmp.path(), &["validate", "--only", "A7", "--flip-lambda-co"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("A7 FAIL"));
}

#[test]
fn under_truncation_is_flagged() {
    let tmp = TempDir::new().unwrap();
    let o = antipt(tmp.path(), &["validate", "--only", "A1", "--cap", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("A1 FAIL"));
}
