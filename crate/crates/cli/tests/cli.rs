use std::path::{Path, PathBuf};
use std::process::Command;

use sha2::{Digest, Sha256};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_bethe-strip");

fn run_bin(args: &[&str], out: &Path) -> i32 {
    let status = Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("BETHE_STRIP_THREADS")
        .status()
        .expect("binary runs");
    status.code().expect("exit code")
}

fn run_lib(args: &[&str], out: &Path) -> i32 {
    let mut full = vec!["bethe-strip".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--out".into());
    full.push(out.display().to_string());
    bethe_strip_cli::run(full)
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let mut reader = csv::Reader::from_path(path).unwrap();
        let header = reader.headers().unwrap().iter().map(String::from).collect();
        let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
        Self { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    fn f(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }
}

fn tmp() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.csv");
    (dir, out)
}

#[test]
fn free_profile_closed_form_rows() {
    let (_d, out) = tmp();
    assert_eq!(run_lib(&["free-profile", "--K", "2", "--E-grid", "-2:2:5", "--eta-schedule", "0"], &out), 0);
    let csv = Csv::read(&out);
    assert_eq!(csv.rows.len(), 5);
    let centre = csv.rows.iter().position(|r| r[0] == "0.0").unwrap();
    assert!((csv.f(centre, "G0_im_1") - 2f64.sqrt()).abs() < 1e-12);
    assert!((csv.f(centre, "G0_im_1") - 1.414214).abs() < 5e-7);
    // E = +-2 lie outside [-sqrt2, sqrt2] at eta = 0
    assert!(csv.rows[0][2..].iter().all(String::is_empty));
}

#[test]
fn free_profile_schema_for_two_orbitals() {
    let (_d, out) = tmp();
    assert_eq!(run_lib(&["free-profile", "--m", "2", "--A", "diag:-0.5,0.5", "--E-grid", "0:0:1"], &out), 0);
    assert_eq!(Csv::read(&out).header.len(), 1 + 1 + 4 * 2 + 2 * 2);
}

#[test]
fn config_and_domain_exit_codes() {
    let (_d, out) = tmp();
    assert_eq!(run_bin(&["free-profile", "--E-grid", "0:1:0"], &out), 2);
    assert_eq!(run_bin(&["free-profile", "--K", "1"], &out), 2);
    assert_eq!(run_bin(&["dos-scan", "--lambda", "abc"], &out), 2);
    assert_eq!(run_bin(&["no-such-command"], &out), 2);
    assert_eq!(run_bin(&["free-profile", "--E-grid", "5:5:1", "--eta-schedule", "0"], &out), 3);
    assert_eq!(run_bin(&["ce-spectrum", "--E-grid", "3:3:1"], &out), 3);
    assert_eq!(run_bin(&["ce-spectrum", "--m", "3", "--degree", "8"], &out), 2);
    assert!(!out.exists());
}

#[test]
fn manifest_records_digests_and_config() {
    let (_d, out) = tmp();
    assert_eq!(run_lib(&["gap-scan", "--E-grid", "-1:1:3"], &out), 0);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.with_file_name("out.csv.manifest.json")).unwrap()).unwrap();
    let digest = hex::encode(Sha256::digest(std::fs::read(&out).unwrap()));
    assert_eq!(manifest["outputs"][0]["sha256"], digest);
    assert_eq!(manifest["config"]["E-grid"], "-1.0:1.0:3");
    assert_eq!(manifest["schema"]["columns"][1], "gap_kce");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(&file, "# free chain\nK=3\nE-grid=0:0:1\neta-schedule=0\n").unwrap();
    let out = dir.path().join("a.csv");
    assert_eq!(run_lib(&["free-profile", "--config", file.to_str().unwrap()], &out), 0);
    // Im G0(0) = 2/sqrt(K) at zero energy
    assert!((Csv::read(&out).f(0, "G0_im_1") - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(run_lib(&["free-profile", "--config", file.to_str().unwrap(), "--K", "2"], &out), 0);
    assert!((Csv::read(&out).f(0, "G0_im_1") - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn config_echo_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a.csv");
    let args = ["dos-scan", "--lambda", "0.2", "--E-grid", "0:0.5:2", "--pool", "300", "--burnin", "5", "--seed", "4"];
    assert_eq!(run_lib(&args, &out), 0);
    let cmd = bethe_strip_cli::Command::DosScan;
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    let text: String = manifest["config"]
        .as_object()
        .unwrap()
        .iter()
        .filter(|(k, _)| k.as_str() != "out")
        .map(|(k, v)| format!("{k}={}\n", v.as_str().unwrap()))
        .collect();
    let file = dir.path().join("echo.cfg");
    std::fs::write(&file, text).unwrap();
    let again = dir.path().join("b.csv");
    assert_eq!(run_lib(&[cmd.name(), "--config", file.to_str().unwrap()], &again), 0);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn dos_scan_without_disorder_matches_free_density() {
    let dir = TempDir::new().unwrap();
    let (dos, free) = (dir.path().join("dos.csv"), dir.path().join("free.csv"));
    let model = ["--K", "2", "--m", "2", "--A", "diag:-0.5,0.5", "--E-grid", "-1.5:1.5:7"];
    let mut args = vec!["dos-scan", "--lambda", "0", "--eta-schedule", "0.05,0.000001", "--pool", "100", "--burnin", "2"];
    args.extend(model);
    assert_eq!(run_lib(&args, &dos), 0);
    let mut args = vec!["free-profile", "--eta-schedule", "0.000001"];
    args.extend(model);
    assert_eq!(run_lib(&args, &free), 0);
    let (dos, free) = (Csv::read(&dos), Csv::read(&free));
    assert_eq!(dos.rows.len(), 14);
    for (i, row) in free.rows.iter().enumerate() {
        let expected = (free.f(i, "Gfull_im_1") + free.f(i, "Gfull_im_2")) / (2.0 * std::f64::consts::PI);
        let j = 2 * i + 1;
        assert_eq!(dos.rows[j][0], row[0]);
        assert!((dos.f(j, "dos") - expected).abs() < 1e-6, "E = {}", row[0]);
    }
}

#[test]
fn dos_scan_is_byte_identical_across_workers() {
    let dir = TempDir::new().unwrap();
    let args = [
        "dos-scan", "--K", "2", "--m", "2", "--A", "diag:-0.5,0.5", "--lambda", "0.3", "--E-grid", "-1:1:3",
        "--pool", "500", "--burnin", "10", "--sweeps", "3", "--seed", "11",
    ];
    let mut outputs = Vec::new();
    for workers in ["1", "3", "1"] {
        let out = dir.path().join(format!("w{}.csv", outputs.len()));
        let mut a = args.to_vec();
        a.extend(["--workers", workers]);
        assert_eq!(run_lib(&a, &out), 0);
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let other = dir.path().join("seed.csv");
    let mut a = args.to_vec();
    let last = a.len() - 1;
    a[last] = "12";
    assert_eq!(run_lib(&a, &other), 0);
    assert_ne!(outputs[0], std::fs::read(other).unwrap());
}

#[test]
fn workers_default_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("env.csv");
    let status = Command::new(BIN)
        .args(["gap-scan", "--E-grid", "0:0:1", "--out"])
        .arg(&out)
        .env("BETHE_STRIP_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("env.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["workers"], "2");
    assert_eq!(manifest["threads"], 2);
}

#[test]
fn ac_indicator_free_ratio_is_one() {
    let (_d, out) = tmp();
    let args = ["ac-indicator", "--lambda", "0", "--E-grid", "-0.5:0.5:3", "--pool", "100", "--burnin", "2"];
    assert_eq!(run_lib(&args, &out), 0);
    let csv = Csv::read(&out);
    assert_eq!(csv.header.len(), 1 + 2 * 3 + 3);
    for i in 0..csv.rows.len() {
        assert!((csv.f(i, "ratio") - 1.0).abs() < 0.05);
        assert_eq!(csv.rows[i][csv.col("bounded")], "true");
    }
    let verdict: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.with_file_name("out.csv.verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["bounded_everywhere"], true);
    assert!(verdict["note"].as_str().unwrap().contains("indicator"));
}

#[test]
fn ac_indicator_needs_three_levels() {
    let (_d, out) = tmp();
    assert_eq!(run_bin(&["ac-indicator", "--eta-schedule", "0.1,0.01"], &out), 2);
}

#[test]
fn gap_scan_examples() {
    let (_d, out) = tmp();
    assert_eq!(run_lib(&["gap-scan", "--K", "2", "--E-grid", "0:0:1", "--degree", "2"], &out), 0);
    let csv = Csv::read(&out);
    assert!((csv.f(0, "gap_kce") - 0.5).abs() < 1e-12);
    assert!((csv.f(0, "gap_tensor") - 0.5).abs() < 1e-12);

    // the grid runs past the band edge sqrt 2; those rows are skipped
    let edge = 2f64.sqrt();
    let grid = format!("{}:{}:9", edge - 0.08, edge + 0.02);
    assert_eq!(run_lib(&["gap-scan", "--E-grid", &grid, "--degree", "2"], &out), 0);
    let csv = Csv::read(&out);
    assert_eq!(csv.rows.len(), 7);
    let gaps: Vec<f64> = (0..7).map(|i| csv.f(i, "gap_kce")).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{gaps:?}");
    assert!(gaps[6] < 0.2);
    let manifest = std::fs::read_to_string(out.with_file_name("out.csv.manifest.json")).unwrap();
    assert!(manifest.contains("2 out-of-band grid points skipped"));

    let near = edge - 1e-8;
    assert_eq!(run_lib(&["gap-scan", "--E-grid", &format!("{near}:{near}:1"), "--degree", "2"], &out), 0);
    let csv = Csv::read(&out);
    assert!(csv.f(0, "gap_kce") < 1e-3);
    assert!(csv.f(0, "gap_tensor") < 1e-3);
}

#[test]
fn gap_scan_degree_zero_follows_library() {
    // |J| <= max(d, 1) plus the floor 1 - 1/K
    let (_d, out) = tmp();
    for k in ["2", "3", "4"] {
        assert_eq!(run_lib(&["gap-scan", "--K", k, "--E-grid", "-0.5:0.5:3", "--degree", "0"], &out), 0);
        let csv = Csv::read(&out);
        let model = bethe_strip::BetheStripModel::free(k.parse().unwrap(), vec![0.0]).unwrap();
        for i in 0..3 {
            let e = csv.f(i, "E");
            assert_eq!(csv.f(i, "gap_kce"), bethe_strip::susy::gap_kce(e, &model, 0).unwrap());
            assert!(csv.f(i, "gap_kce") <= 1.0 - 1.0 / k.parse::<f64>().unwrap());
        }
    }
}

#[test]
fn ce_spectrum_examples() {
    let (_d, out) = tmp();
    assert_eq!(run_lib(&["ce-spectrum", "--K", "2", "--E-grid", "0:0:1", "--degree", "2"], &out), 0);
    let csv = Csv::read(&out);
    let expected = [1.0, -0.5, 0.25];
    assert_eq!(csv.rows.len(), 3);
    for (i, want) in expected.iter().enumerate() {
        assert!((csv.f(i, "lambda_re") - want).abs() < 1e-12);
        assert!(csv.f(i, "lambda_im").abs() < 1e-12);
        assert!(csv.f(i, "triangularity_residual") < 1e-10);
        assert!((csv.f(i, "modulus") - csv.f(i, "k_pow")).abs() <= 1e-12);
    }
}

#[test]
fn ce_spectrum_reflection_conjugates() {
    let dir = TempDir::new().unwrap();
    let spectrum = |e: &str| {
        let out = dir.path().join(format!("{e}.csv"));
        let grid = format!("{e}:{e}:1");
        let args = ["ce-spectrum", "--K", "3", "--m", "2", "--A", "diag:-0.4,0.4", "--E-grid", &grid, "--degree", "2"];
        assert_eq!(run_lib(&args, &out), 0);
        let csv = Csv::read(&out);
        let mut v: Vec<(f64, f64)> = (0..csv.rows.len()).map(|i| (csv.f(i, "lambda_re"), csv.f(i, "lambda_im"))).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 0..csv.rows.len() {
            assert!((csv.f(i, "modulus") - csv.f(i, "k_pow")).abs() <= 1e-12);
        }
        v
    };
    let plus = spectrum("0.7");
    let mut minus: Vec<(f64, f64)> = spectrum("-0.7").into_iter().map(|(re, im)| (re, -im)).collect();
    minus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(plus.len(), 10);
    for (a, b) in plus.iter().zip(&minus) {
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12, "{a:?} vs {b:?}");
    }
}

#[test]
fn crosscheck_passes_and_detects_mismatch() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let args = ["crosscheck", "--K", "2", "--m", "2", "--depth", "4", "--lambda", "0.5", "--samples", "20"];
    assert_eq!(run_bin(&args, &out), 0);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"][0]["max_deviation"].as_f64().unwrap() <= 1e-8);

    assert_eq!(run_bin(&["crosscheck", "--depth", "0"], &out), 0);

    let mut corrupted = args.to_vec();
    corrupted.extend(["--seed", "1", "--ed-seed", "2"]);
    assert_eq!(run_bin(&corrupted, &out), 4);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}
