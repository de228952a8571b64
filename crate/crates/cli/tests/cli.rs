use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_s3dc"))
}

fn bench(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn compile_writes_dumps_and_an_equivalent_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin().arg("compile").arg("--netlist").arg(bench("nand3.nl")).arg("--out-dir").arg(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["placement.txt", "routes.txt", "config.cfg", "report.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let r = json_file(&dir.path().join("report.json"));
    for key in ["benchmark", "grid", "placement", "routing", "equivalence", "thermal", "metrics"] {
        assert!(r.get(key).is_some(), "report lacks {key}");
    }
    assert_eq!(r["equivalence"]["result"], "equivalent");
    assert_eq!(r["routing"]["check"], "ok");
}

#[test]
fn report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.json"));
        let out = run(bin().arg("compile").arg("--netlist").arg(bench("stack_nand2.nl")).arg("--report").arg(&path));
        assert!(out.status.success());
        reports.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn generated_multiplier_compiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin().args(["gen-bench", "--kind", "mult4", "--out-dir"]).arg(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json_file(&dir.path().join("report.json"));
    assert_eq!(summary["gates"], 124);
    let nl = dir.path().join("mult4.nl");
    assert!(std::fs::read_to_string(&nl).unwrap().contains(".model mult4\n"));
    let out = run(bin().arg("metrics").arg("--netlist").arg(&nl));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(serde_json::from_slice::<Value>(&out.stdout).is_ok());
}

#[test]
fn stacked_inverter_without_extraction_runs_hot() {
    let out = run(bin().args(["thermal", "--scenario", "table1", "--gate", "INV", "--no-extraction"]));
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let t = v["results"][0]["hot_spot_k"].as_f64().unwrap();
    assert!(t > 2000.0 && t < 3000.0, "{t}");
}

#[test]
fn missing_file_is_a_user_error() {
    let out = run(bin().args(["compile", "--netlist", "/definitely/not/here.nl"]));
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "io");
}

#[test]
fn malformed_netlist_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let nl = dir.path().join("bad.nl");
    std::fs::write(&nl, ".model x\n.inputs a\n.outputs y\ny = FOO(a)\n").unwrap();
    let out = run(bin().arg("compile").arg("--netlist").arg(&nl));
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "netlist");
    assert!(v["error"]["message"].as_str().unwrap().contains("line 4"));
}
