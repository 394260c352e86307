use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mwion::dynamics::fit_first_peak;

const TABLE_CONFIG: &str = r#"
frequency_units = "Hz"
species = "171Yb+"
n_ions = 10
omega_z = 1e5
gradient_b = 9.89
"#;

fn mwion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn design_reports_table_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", TABLE_CONFIG);
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&mwion(&["design", cfg.to_str().unwrap()]))).unwrap();
    let b = v["coupling"]["required_gradient"].as_f64().unwrap();
    assert!((b / 9.89 - 1.0).abs() < 0.01);
    let eps = v["coupling"]["ions"][5]["epsilon_c"].as_f64().unwrap();
    assert!((eps / 0.0075 - 1.0).abs() < 0.05);
    assert!(v["spread"]["mean_sigma"].as_f64().unwrap() > 0.0);
    assert!(v["gate_error"]["error_numeric"].as_f64().unwrap() > 0.0);
    assert!(v["seed"].is_u64());
}

#[test]
fn design_without_fidelity_has_null_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", TABLE_CONFIG);
    let out = dir.path().join("r.json");
    let o = mwion(&[
        "design",
        cfg.to_str().unwrap(),
        "--no-fidelity",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(stdout(&o).is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(v["spread"].is_null() && v["gate_error"].is_null());
}

#[test]
fn design_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        &TABLE_CONFIG.replace("n_ions = 10", "n_ions = 13"),
    );
    let run = || {
        let mut v: serde_json::Value =
            serde_json::from_str(&stdout(&mwion(&["design", cfg.to_str().unwrap(), "--seed", "5"]))).unwrap();
        v["timestamp"] = serde_json::Value::Null;
        v.to_string()
    };
    assert_eq!(run(), run());
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.toml",
        "frequency_units = \"Hz\"\nn_ions = \"ten\"\n",
    );
    let o = mwion(&["design", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let missing = mwion(&["modes", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    let unknown = write(dir.path(), "u.toml", &format!("{TABLE_CONFIG}\ncolour = 3\n"));
    assert_eq!(
        mwion(&["design", unknown.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn modes_of_three_ions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        &TABLE_CONFIG.replace("n_ions = 10", "n_ions = 3"),
    );
    let text = stdout(&mwion(&["modes", cfg.to_str().unwrap(), "--format", "csv"]));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let ratios: Vec<f64> = rdr.records().map(|r| r.unwrap()[3].parse().unwrap()).collect();
    for (r, want) in ratios.iter().zip([1.0, 1.7321, 2.4083]) {
        assert!((r - want).abs() < 1e-4, "{r}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&mwion(&["modes", cfg.to_str().unwrap()]))).unwrap();
    assert_eq!(json["vectors"].as_array().unwrap().len(), 3);
}

#[test]
fn spectrum_without_gradient_has_identical_carriers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        &TABLE_CONFIG
            .replace("n_ions = 10", "n_ions = 2")
            .replace("gradient_b = 9.89", "gradient_b = 0"),
    );
    let text = stdout(&mwion(&["spectrum", cfg.to_str().unwrap(), "--format", "csv"]));
    let carriers: Vec<String> = text
        .lines()
        .filter(|l| l.contains(",carrier,"))
        .map(|l| l.split(',').nth(4).unwrap().to_string())
        .collect();
    assert_eq!(carriers.len(), 2);
    assert_eq!(carriers[0], carriers[1]);
}

#[test]
fn blue_sideband_demo_period() {
    let o = mwion(&[
        "evolve",
        "--sideband",
        "blue",
        "--epsilon-c",
        "0.0075",
        "--n-max",
        "6",
        "--format",
        "csv",
    ]);
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: serde_json::Value =
        serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
    let want = header["analytic_rabi_frequency"].as_f64().unwrap();
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let cols = rdr.headers().unwrap().clone();
    let j = cols.iter().position(|c| c == "p_1_1").unwrap();
    let (mut t, mut p) = (Vec::new(), Vec::new());
    for r in rdr.records() {
        let r = r.unwrap();
        t.push(r[0].parse::<f64>().unwrap());
        p.push(r[j].parse::<f64>().unwrap());
    }
    let fit = fit_first_peak(&t, &p, 16).unwrap();
    let period = 2.0 * PI / fit.coupling;
    assert!((period * want / (2.0 * PI) - 1.0).abs() < 0.01);
}

#[test]
fn evolve_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", TABLE_CONFIG);
    let o = mwion(&[
        "evolve",
        cfg.to_str().unwrap(),
        "--sideband",
        "carrier",
        "--n-max",
        "4",
        "--samples",
        "50",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["series"]["times"].as_array().unwrap().len(), 50);
    let eps = v["header"]["drive"]["epsilon_c"].as_f64().unwrap();
    assert!((eps / 0.0075 - 1.0).abs() < 0.05);
}

#[test]
fn red_sideband_from_ground_state_is_rejected() {
    let o = mwion(&["evolve", "--sideband", "red"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn table_without_fidelity() {
    let text = stdout(&mwion(&["table1", "--no-fidelity"]));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let dev: f64 = r[6].parse().unwrap();
        assert!(dev.is_finite());
    }
    let b = rows
        .iter()
        .find(|r| &r[0] == "40" && &r[1] == "1e6" && &r[2] == "gradient_t_per_m")
        .unwrap();
    assert!((b[5].parse::<f64>().unwrap() / 2540.0 - 1.0).abs() < 0.01);
}
