use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn phasorq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasorq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn nominal(report: &Value, iteration: usize) -> f64 {
    report["iterations"][iteration - 1]["nominal_asp"]
        .as_f64()
        .unwrap()
}

#[test]
fn grover_single_target_two_iterations() {
    let o = phasorq(&[
        "grover",
        "--qubits",
        "3",
        "--marked",
        "5",
        "--iterations",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((nominal(&r, 2) - 0.9453125).abs() < 1e-12);
    assert_eq!(r["iterations"][1]["hardware_reference_asp"], 0.99);
    assert_eq!(r["final_amplitudes"].as_array().unwrap().len(), 8);
}

#[test]
fn grover_bit_string_marks() {
    let o = phasorq(&[
        "grover",
        "--qubits",
        "3",
        "--marked",
        "101",
        "--marked",
        "111",
        "--iterations",
        "1",
    ]);
    assert!(o.status.success());
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["config"]["marked"], serde_json::json!([5, 7]));
    assert!((nominal(&r, 1) - 1.0).abs() < 1e-12);
}

#[test]
fn grover_rejects_out_of_range_mark() {
    let o = phasorq(&["grover", "--qubits", "3", "--marked", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("out of range"));
}

#[test]
fn grover_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let report = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        format!(
            "n_qubits = 3\nmarked = [\"101\", 7]\niterations = 2\ntrials = 50\n\
             [tolerance]\nresistor = 0.01\nseed = 4\n[output]\nreport = {:?}\n",
            report.display().to_string()
        ),
    )
    .unwrap();
    let o = phasorq(&["grover", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!((nominal(&r, 2) - 0.25).abs() < 1e-12);
    assert!(r["iterations"][0]["mc_std"].as_f64().unwrap() > 0.0);
    assert_eq!(r["config"]["tolerance"]["seed"], 4);
}

#[test]
fn sweep_csv_rows() {
    let o = phasorq(&[
        "sweep",
        "--qubits",
        "3",
        "--marked",
        "5",
        "--max-iterations",
        "3",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(text.lines().next(), Some("iteration,nominal_asp,ideal_asp"));
    let ideal: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    for (got, want) in ideal.iter().zip([0.78125, 0.9453125, 0.330078125]) {
        assert!((got - want).abs() < 1e-12);
    }

    let o = phasorq(&[
        "sweep",
        "--qubits",
        "3",
        "--marked",
        "5",
        "--marked",
        "7",
        "--max-iterations",
        "2",
    ]);
    let vals: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 0.25).abs() < 1e-12);

    let o = phasorq(&[
        "sweep",
        "--qubits",
        "3",
        "--marked",
        "5",
        "--max-iterations",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_gates_passes_and_self_test_fails() {
    let o = phasorq(&["verify-gates"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("max deviation"));

    let o = phasorq(&["verify-gates", "--qubits-max", "1"]);
    assert!(o.status.success());

    let o = phasorq(&["verify-gates", "--corrupt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn export_diffusion_structure() {
    let o = phasorq(&["export-netlist", "--grover", "diffusion", "--qubits", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let divs: Vec<_> = text.lines().filter(|l| l.contains(" DIV ")).collect();
    let amps: Vec<_> = text.lines().filter(|l| l.contains(" AMP ")).collect();
    let sums = text.lines().filter(|l| l.contains(" SUM 8 ")).count();
    assert_eq!((divs.len(), amps.len(), sums), (8, 8, 8));
    assert!(divs.iter().all(|l| l.ends_with("DIV 30000 10000")));
    assert!(amps.iter().all(|l| l.ends_with("AMP 10000 30000")));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn circuit_export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(
        dir.path(),
        "c.toml",
        "n_qubits = 3\n[[gates]]\nkind = \"hadamard\"\ntarget = 0\n\
         [[gates]]\nkind = \"x\"\ntarget = 1\ncontrols = [0]\n\
         [[gates]]\nkind = \"phase\"\ntarget = 2\nphi = 1.0471975511965976\n",
    );
    let first = dir.path().join("a.net");
    let second = dir.path().join("b.net");
    let o = phasorq(&[
        "export-netlist",
        "--circuit",
        &circuit,
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = phasorq(&[
        "import-netlist",
        "--input",
        first.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn import_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.net",
        "EMUNET 1\nLINES 2\nFREQ 1000\nSTAGE a DIV 10000\n",
    );
    let o = phasorq(&["import-netlist", "--input", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}
