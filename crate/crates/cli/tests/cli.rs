use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shor-nmr"))
}

#[test]
fn run_writes_summary_and_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["run", "--a", "11", "--plot-data", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["a"], 11);
    assert_eq!(summary["r"], 2);
    assert_eq!(summary["factors"], serde_json::json!([3, 5]));
    assert_eq!(summary["status"], "success");
    assert_eq!(summary["y_support"], serde_json::json!([0, 4]));
    let classes: Vec<&str> = summary["qubits"].as_array().unwrap().iter().map(|q| q["class"].as_str().unwrap()).collect();
    assert_eq!(classes, ["zero", "zero", "mixed"]);
    for name in ["circuit.txt", "timing.json", "spectrum_q1.csv", "spectrum_q3.csv", "plot_q2.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let csv = std::fs::read_to_string(dir.path().join("spectrum_q1.csv")).unwrap();
    assert!(csv.starts_with("freq_hz,real,imag\n"));
}

#[test]
fn summaries_are_reproducible() {
    let read = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let st = bin().args(["run", "--a", "7", "--level", "pulse", "--seed", seed, "--out"]).arg(dir.path()).output().unwrap().status;
        assert!(st.success());
        std::fs::read(dir.path().join("summary.json")).unwrap()
    };
    assert_eq!(read("3"), read("3"));
}

#[test]
fn trivial_root_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["run", "--a", "14", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"failed\""));
}

#[test]
fn invalid_inputs_are_rejected() {
    let out = bin().args(["run", "--a", "9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`a`"));
    let out = bin().args(["run", "--a", "7", "--decoherence", "on"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("decoherence"));
    let out = bin().args(["run", "--a", "7", "--molecule", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pulse_run_dumps_program() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin().args(["run", "--a", "11", "--level", "pulse", "--dump-pulses", "--out"]).arg(dir.path()).output().unwrap().status;
    assert!(st.success());
    let text = std::fs::read_to_string(dir.path().join("pulses.txt")).unwrap();
    assert!(text.starts_with("# spins 7"));
    assert!(text.lines().any(|l| l.starts_with("DELAY")));
}

#[test]
fn dumps_parse_back() {
    let out = bin().args(["dump-circuit", "--a", "7", "--optimized"]).output().unwrap();
    let c = shor_nmr::circuit::Circuit::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(c.find("C").is_none());
    assert!(c.find("D2").is_some());
    let out = bin().args(["dump-pulses", "--a", "7"]).output().unwrap();
    let p = shor_nmr::compiler::PulseProgram::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(p.stats().n_pulses > 100);
}

#[test]
fn custom_molecule_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let sample = bin().arg("sample-molecule").output().unwrap();
    let text = String::from_utf8(sample.stdout).unwrap().replace("temperature_k = 303.15", "temperature_k = 77.0");
    let path = dir.path().join("mol.toml");
    std::fs::write(&path, text).unwrap();
    let out_dir = dir.path().join("out");
    let st = bin().args(["run", "--a", "7", "--molecule"]).arg(&path).arg("--out").arg(&out_dir).output().unwrap().status;
    assert!(st.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["epsilon"].as_f64().unwrap() > 5e-6);
}

#[test]
fn reference_spectra_cover_every_spin() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin().args(["spectra", "--state", "thermal", "--out"]).arg(dir.path()).output().unwrap().status;
    assert!(st.success());
    for k in 1..=7 {
        assert!(dir.path().join(format!("thermal_spin{k}.csv")).exists());
    }
}
