#![allow(dead_code)]

use shor_nmr::circuit::{Circuit, Gate, GateKind};
use shor_nmr::compiler::{OptimizationReport, Rule};
use shor_nmr::linalg::C64;
use shor_nmr::spinsys::{DensityMatrix, MoleculeSpec, StateVector};

/// Deterministic normalized state with all amplitudes nonzero.
pub fn spread_state(n: usize, seed: u64) -> StateVector {
    let dim = 1usize << n;
    let amps: Vec<C64> = (0..dim)
        .map(|k| {
            let x = (k as f64 + 1.0) * (seed as f64 * 0.618 + 1.3);
            C64::new(x.sin() + 1.1, (1.7 * x).cos())
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(n, amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

pub fn spread_density(n: usize, seed: u64) -> DensityMatrix {
    DensityMatrix::from_pure(&spread_state(n, seed))
}

/// Molecule with the given offsets and couplings (0-based pairs) and
/// instantaneous pulses.
pub fn toy_molecule(offsets: &[f64], couplings: &[(usize, usize, f64)]) -> MoleculeSpec {
    let n = offsets.len();
    let mut mol = MoleculeSpec::uncoupled(n, 2.0, 1.0);
    mol.offset_hz = offsets.to_vec();
    for &(i, j, v) in couplings {
        mol.j_hz[i][j] = v;
        mol.j_hz[j][i] = v;
    }
    mol
}

fn gates_match(got: &[Gate], want: &[(GateKind, &[usize])]) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, (k, q))| g.kind == *k && g.qubits == *q)
}

/// Checks the five simplifications of the optimized a=7 circuit.
pub fn check_a7_simplifications(report: &OptimizationReport, optimized: &Circuit) -> Result<(), String> {
    let rewrite = |label: &str| report.for_label(label).ok_or(format!("no rewrite of {label}"));
    let c = rewrite("C")?;
    if c.rule != Rule::DeadControl || !c.replacement.is_empty() {
        return Err(format!("C: {c:?}"));
    }
    let f = rewrite("F")?;
    if f.rule != Rule::ConstantControl || !gates_match(&f.replacement, &[(GateKind::Not, &[5])]) {
        return Err(format!("F: {f:?}"));
    }
    for label in ["E", "H"] {
        let r = rewrite(label)?;
        if r.rule != Rule::DeadGate || !r.replacement.is_empty() {
            return Err(format!("{label}: {r:?}"));
        }
    }
    for (label, c2, t) in [("D", 6, 4), ("G", 5, 7)] {
        let r = rewrite(label)?;
        let want: [(GateKind, &[usize]); 3] =
            [(GateKind::CyDag, &[2, t]), (GateKind::Crz(180.0), &[c2, t]), (GateKind::Cy, &[2, t])];
        if r.rule != Rule::BasisToffoli || !gates_match(&r.replacement, &want) {
            return Err(format!("{label}: {r:?}"));
        }
    }
    if report.rewrites.len() != 6 {
        return Err(format!("expected 6 rewrites, got {}", report.rewrites.len()));
    }
    for label in ["C", "E", "H"] {
        if optimized.find(label).is_some() {
            return Err(format!("{label} still present"));
        }
    }
    if optimized.gates.iter().any(|g| matches!(g.kind, GateKind::Ccnot | GateKind::Cswap)) {
        return Err("three-qubit gate left".into());
    }
    Ok(())
}

/// Trace distance between the first-register states of the optimized and
/// unoptimized circuits from the algorithm input.
pub fn first_register_distance(a: u64) -> f64 {
    use shor_nmr::circuit::{apply_circuit_to_density, build_shor_circuit, shor_input_index, SHOR_QUBITS};
    use shor_nmr::compiler::{peephole_optimize, StateFacts};
    let full = build_shor_circuit(a).unwrap();
    let (opt, _) = peephole_optimize(&full, &StateFacts::shor_input()).unwrap();
    let input = DensityMatrix::basis(SHOR_QUBITS, shor_input_index());
    let x = apply_circuit_to_density(&input, &full).unwrap().reduced(&[0, 1, 2]);
    let y = apply_circuit_to_density(&input, &opt).unwrap().reduced(&[0, 1, 2]);
    x.trace_distance(&y)
}

/// Half a resolution element of a one-second acquisition.
pub const LINE_TOL_HZ: f64 = 0.5;

fn strongest_near(sp: &shor_nmr::readout::Spectrum, f: f64, window: f64) -> f64 {
    sp.freq_axis_hz
        .iter()
        .zip(&sp.amplitudes)
        .filter(|(x, _)| (**x - f).abs() <= window)
        .max_by(|a, b| a.1.re.abs().total_cmp(&b.1.re.abs()))
        .map(|(x, _)| *x)
        .unwrap()
}

/// Compares reference spectra of the sample molecule with the predicted
/// multiplets. Thermal spectra are checked on lines at least 4 Hz from any
/// other line; effective pure spectra must show a single line at the
/// all-partners-up position. Returns the worst deviation in Hz.
pub fn check_line_positions(pure: bool) -> Result<f64, String> {
    use shor_nmr::pipeline::reference_spectra;
    use shor_nmr::readout::predicted_lines;
    let cfg = shor_nmr::RunConfig::new(7, shor_nmr::molecule::sample_molecule());
    let model = cfg.model().map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for sp in reference_spectra(&cfg, pure).map_err(|e| e.to_string())? {
        let spin = sp.spin + 1;
        let lines = predicted_lines(&model, sp.spin, 1e-9);
        if pure {
            let peaks = sp.peaks(0.3);
            if peaks.len() != 1 {
                return Err(format!("spin {spin}: {} lines", peaks.len()));
            }
            let up = lines.iter().find(|l| l.partner_states.contains(&0)).unwrap();
            worst = worst.max((peaks[0].0 - up.freq_hz).abs());
            if peaks[0].1 <= 0.0 {
                return Err(format!("spin {spin}: negative line"));
            }
            continue;
        }
        let freqs: Vec<f64> = lines.iter().map(|l| l.freq_hz).collect();
        let mut checked = 0;
        for (k, &f) in freqs.iter().enumerate() {
            let gap = freqs.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, g)| (g - f).abs()).fold(f64::MAX, f64::min);
            if gap < 4.0 {
                continue;
            }
            worst = worst.max((strongest_near(&sp, f, 1.5) - f).abs());
            checked += 1;
        }
        if checked < 4 {
            return Err(format!("spin {spin}: only {checked} isolated lines"));
        }
    }
    if worst > LINE_TOL_HZ {
        return Err(format!("line off by {worst:.3} Hz"));
    }
    Ok(worst)
}
