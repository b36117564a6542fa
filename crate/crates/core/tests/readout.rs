mod common;

use shor_nmr::channels::SpinModel;
use shor_nmr::circuit::VALID_BASES;
use shor_nmr::molecule::sample_molecule;
use shor_nmr::pipeline::{reference_spectra, run_shor};
use shor_nmr::readout::QubitClass;
use shor_nmr::{Level, RunConfig};

#[test]
fn thermal_lines_sit_at_predicted_frequencies() {
    common::check_line_positions(false).unwrap();
}

#[test]
fn effective_pure_spectra_have_one_line() {
    common::check_line_positions(true).unwrap();
}

#[test]
fn off_resonance_lines_shift_with_the_offset() {
    let mut cfg = RunConfig::new(7, sample_molecule());
    cfg.off_resonance = true;
    let model: SpinModel = cfg.model().unwrap();
    for sp in reference_spectra(&cfg, true).unwrap().into_iter().filter(|s| s.spin == 1 || s.spin == 6) {
        let peaks = sp.peaks(0.3);
        assert_eq!(peaks.len(), 1);
        let want = model.mol.offset_hz[sp.spin] - (0..7).filter(|&k| k != sp.spin).map(|k| model.mol.j_hz[sp.spin][k] / 2.0).sum::<f64>();
        assert!((peaks[0].0 - want).abs() <= common::LINE_TOL_HZ, "spin {}: {} vs {want}", sp.spin + 1, peaks[0].0);
    }
}

#[test]
fn integrals_track_ground_probability() {
    for a in VALID_BASES {
        let out = run_shor(&RunConfig::new(a, sample_molecule())).unwrap();
        let eps = out.summary.epsilon;
        for q in &out.summary.qubits {
            let r = out.final_state.reduced(&[q.qubit - 1]);
            // deviation of P(0) from one half, normalized by the purity
            let p0 = 0.5 + (r.get(0, 0).re - 0.5) / eps;
            assert!((q.s - (2.0 * p0 - 1.0)).abs() < 1e-3, "a={a} qubit {}: {} vs {}", q.qubit, q.s, 2.0 * p0 - 1.0);
        }
    }
}

#[test]
fn longer_acquisition_keeps_classes() {
    for a in [7, 11, 2] {
        let mut cfg = RunConfig::new(a, sample_molecule());
        cfg.level = Level::Gate;
        let short = run_shor(&cfg).unwrap();
        cfg.acquisition.duration_s *= 2.0;
        let long = run_shor(&cfg).unwrap();
        let classes = |o: &shor_nmr::RunOutput| o.summary.qubits.iter().map(|q| q.class).collect::<Vec<QubitClass>>();
        assert_eq!(classes(&short), classes(&long), "a={a}");
    }
}
