use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strongcoupling"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small tables shared by every test.
struct Tables {
    _dir: TempDir,
    instanton: PathBuf,
    blasius: PathBuf,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let instanton = dir.path().join("inst.json");
        let blasius = dir.path().join("blas.json");
        ok(&["generate", "--model", "instanton", "--order", "40", "--out", s(&instanton)]);
        ok(&["generate", "--model", "blasius", "--order", "40", "--out", s(&blasius)]);
        Tables { _dir: dir, instanton, blasius }
    })
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn generate_writes_table_and_manifest() {
    let t = tables();
    let text = std::fs::read_to_string(&t.instanton).unwrap();
    assert!(text.contains("-1/2"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{}.manifest.json", s(&t.instanton))).unwrap()).unwrap();
    assert_eq!(manifest["command"], "generate");
    assert_eq!(manifest["parameters"]["order"], 40);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn generation_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["generate", "--model", "blasius", "--order", "25", "--out", s(&a)]);
    ok(&["generate", "--model", "blasius", "--order", "25", "--out", s(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn pade_sweep_low_orders() {
    let t = tables();
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pade.csv");
    let summary = dir.path().join("summary.json");
    ok(&[
        "pade", "--coeffs", s(&t.instanton), "--n-max", "20", "--reference", "0.7071067811865475", "--digits", "12",
        "--out", s(&out), "--summary", s(&summary),
    ]);
    let csv = std::fs::read_to_string(&out).unwrap();
    let re = column(&csv, "re_S_N");
    assert_eq!(re.len(), 20);
    assert!(re[1].starts_with("0.84089641"), "{}", re[1]);
    let sum: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(sum["n_max"], 20);
}

#[test]
fn pade_accepts_negative_exponent() {
    let t = tables();
    let stdout = ok(&["pade", "--coeffs", s(&t.blasius), "--M", "-1/2", "--n-max", "4"]);
    assert!(stdout.starts_with("N,"));
}

#[test]
fn vpt_then_richardson_closes_the_pipeline() {
    let t = tables();
    let dir = TempDir::new().unwrap();
    let seq = dir.path().join("vpt.csv");
    let report = dir.path().join("rich.csv");
    ok(&[
        "vpt", "--coeffs", s(&t.instanton), "--p", "-1", "--q", "2", "--n-max", "30", "--richardson", "3", "--out",
        s(&seq), "--report-out", s(&report),
    ]);
    let again = dir.path().join("again.csv");
    ok(&["richardson", "--input", s(&seq), "--column", "b0", "--k-max", "3", "--out", s(&again)]);
    assert_eq!(std::fs::read_to_string(&report).unwrap(), std::fs::read_to_string(&again).unwrap());
    let csv = std::fs::read_to_string(&seq).unwrap();
    assert_eq!(column(&csv, "N").len(), 30);
}

#[test]
fn richardson_rejects_broken_index() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("x.csv");
    std::fs::write(&input, "N,v\n1,1\n2,0.5\n4,0.25\n").unwrap();
    let out = run(&["richardson", "--input", s(&input), "--column", "v"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contiguous"));
}

#[test]
fn large_order_writes_tables() {
    let t = tables();
    let dir = TempDir::new().unwrap();
    let stdout = ok(&[
        "large-order", "--coeffs", s(&t.instanton), "--k-max", "2", "--assume-a", "-3/2", "--out-dir",
        s(dir.path()),
    ]);
    assert!(stdout.contains("exponent A"));
    for name in ["a", "k", "b"] {
        assert!(dir.path().join(format!("{name}_estimates.csv")).exists());
        assert!(dir.path().join(format!("{name}_richardson.csv")).exists());
    }
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn zeta_consistency_alone() {
    let stdout = ok(&["large-order", "--zeta", "0.0171", "0.1190"]);
    assert!(stdout.contains("3.9397"), "{stdout}");
}

#[test]
fn signfit_scores_and_normalizes() {
    let t = tables();
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("signs.json");
    let norm = dir.path().join("norm.csv");
    ok(&[
        "signfit", "--coeffs", s(&t.blasius), "--at", "1.3939,3.11", "--phase-free", "--resolution", "200",
        "--normalize", "1.3939,3.11", "--normalized-out", s(&norm), "--out", s(&report),
    ]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["order"], 40);
    assert_eq!(v["scored"][0]["score"], 40);
    assert_eq!(column(&std::fs::read_to_string(&norm).unwrap(), "j").len(), 40);
}

#[test]
fn signfit_grid_search() {
    let t = tables();
    let stdout = ok(&["signfit", "--coeffs", s(&t.blasius), "--resolution", "100", "--refine-depth", "1"]);
    assert!(stdout.contains("peak a ="));
}

#[test]
fn oracles_print_references() {
    let slope: f64 = ok(&["oracle", "instanton"]).trim().parse().unwrap();
    assert!((slope - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    let shear: f64 = ok(&["oracle", "blasius"]).trim().parse().unwrap();
    assert!((shear - 0.33206).abs() < 1e-5);
    let dir = TempDir::new().unwrap();
    let profile = dir.path().join("profile.csv");
    ok(&["oracle", "blasius", "--epsilon", "4", "--profile", s(&profile), "--samples", "50"]);
    assert_eq!(column(&std::fs::read_to_string(&profile).unwrap(), "x").len(), 51);
}

#[test]
fn short_domain_is_a_runtime_error() {
    let out = run(&["oracle", "blasius", "--length", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["generate", "--model", "ising", "--order", "3", "--out", "x"]).status.code(), Some(2));
    assert_eq!(run(&["vpt", "--q", "2"]).status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let out = run(&["pade", "--coeffs", "/nonexistent/table.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_runs_and_is_deterministic() {
    let t = tables();
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = |d: &Path| {
        vec![
            "report".to_string(),
            "--instanton".into(),
            s(&t.instanton).into(),
            "--blasius".into(),
            s(&t.blasius).into(),
            "--out-dir".into(),
            s(d).into(),
            "--pade-orders".into(),
            "30".into(),
            "--vpt-orders".into(),
            "30".into(),
            "--grid-resolution".into(),
            "100".into(),
        ]
    };
    for d in [a.path(), b.path()] {
        let out = bin().args(args(d)).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 15);
    for name in names {
        if name == "manifest.json" {
            continue;
        }
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?} differs between runs");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary["instanton"]["vpt"]["b0"].is_string());
}
