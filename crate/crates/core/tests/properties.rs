mod common;

use proptest::prelude::*;
use shor_nmr::channels::{apply_channel_on_spin, gad_kraus, pd_kraus, SpinModel};
use shor_nmr::circuit::{gate_unitary, Circuit, Gate, GateKind};
use shor_nmr::compiler::lower::wrap_degrees;
use shor_nmr::compiler::refocus::even_walsh_rows;
use shor_nmr::compiler::{execute_program, refocusing_schedule, PulseProgram};
use shor_nmr::linalg::C64;
use shor_nmr::postproc::gcd;
use shor_nmr::readout::{class_of, classify_qubit, Calibration, Spectrum};
use shor_nmr::spinsys::{build_hamiltonian, free_evolution, thermal_state, DensityMatrix, StateVector};

fn state(n: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", move |v| {
        let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| {
            let amps = v.iter().map(|(a, b)| C64::new(a / norm, b / norm)).collect();
            DensityMatrix::from_pure(&StateVector::from_amplitudes(n, amps).unwrap())
        })
    })
}

fn couplings3() -> impl Strategy<Value = [f64; 3]> {
    [20.0f64..300.0, -300.0f64..-20.0, 20.0f64..300.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_are_unitary(angle in -720.0f64..720.0, which in 0usize..5) {
        let g = match which {
            0 => Gate::crz(1, 3, angle),
            1 => Gate::new(GateKind::Rz(angle), &[2]),
            2 => Gate::new(GateKind::Cy, &[3, 1]),
            3 => Gate::new(GateKind::CyDag, &[2, 3]),
            _ => Gate::new(GateKind::Cswap, &[1, 2, 3]),
        };
        let u = gate_unitary(&g, 3).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let dot: C64 = (0..8).map(|k| u[k * 8 + r].conj() * u[k * 8 + c]).sum();
                let want = if r == c { 1.0 } else { 0.0 };
                prop_assert!((dot - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kraus_sets_are_complete(t in 0.0f64..50.0, t1 in 0.01f64..100.0, ratio in 0.01f64..2.0, p in 0.0f64..1.0) {
        prop_assert!(gad_kraus(t, t1, p).unwrap().completeness_error() < 1e-12);
        prop_assert!(pd_kraus(t, t1 * ratio).unwrap().completeness_error() < 1e-12);
    }

    #[test]
    fn channels_preserve_trace_and_hermiticity(rho in state(2), t in 0.0f64..5.0, spin in 0usize..2) {
        for k in [gad_kraus(t, 1.3, 0.7).unwrap(), pd_kraus(t, 0.8).unwrap()] {
            let out = apply_channel_on_spin(&rho, &k, spin).unwrap();
            prop_assert!((out.trace() - 1.0).norm() < 1e-12);
            prop_assert!(out.hermiticity_error() < 1e-12);
            prop_assert!(out.eigenvalues().iter().all(|&e| e > -1e-9));
        }
    }

    #[test]
    fn damping_and_dephasing_commute(rho in state(3), t in 0.0f64..3.0, i in 0usize..3, j in 0usize..3) {
        let gad = gad_kraus(t, 0.9, 0.8).unwrap();
        let pd = pd_kraus(t, 0.4).unwrap();
        let a = apply_channel_on_spin(&apply_channel_on_spin(&rho, &gad, i).unwrap(), &pd, j).unwrap();
        let b = apply_channel_on_spin(&apply_channel_on_spin(&rho, &pd, j).unwrap(), &gad, i).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
        if i != j {
            let gi = apply_channel_on_spin(&apply_channel_on_spin(&rho, &gad, i).unwrap(), &gad, j).unwrap();
            let gj = apply_channel_on_spin(&apply_channel_on_spin(&rho, &gad, j).unwrap(), &gad, i).unwrap();
            prop_assert!(gi.max_abs_diff(&gj) < 1e-12);
        }
    }

    #[test]
    fn dephasing_commutes_with_free_evolution(rho in state(3), j in couplings3(), t in 0.0f64..0.2, spin in 0usize..3) {
        let mol = common::toy_molecule(&[120.0, -40.0, 75.0], &[(0, 1, j[0]), (0, 2, j[1]), (1, 2, j[2])]);
        let h = build_hamiltonian(&mol, &[0.0; 3]).unwrap();
        let pd = pd_kraus(t, 0.3).unwrap();
        let a = apply_channel_on_spin(&free_evolution(&rho, &h, t).unwrap(), &pd, spin).unwrap();
        let b = free_evolution(&apply_channel_on_spin(&rho, &pd, spin).unwrap(), &h, t).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn free_evolution_composes(rho in state(3), j in couplings3(), t1 in 0.0f64..0.1, t2 in 0.0f64..0.1) {
        let mol = common::toy_molecule(&[33.0, -210.0, 90.0], &[(0, 1, j[0]), (0, 2, j[1]), (1, 2, j[2])]);
        let h = build_hamiltonian(&mol, &[0.0; 3]).unwrap();
        let two = free_evolution(&free_evolution(&rho, &h, t1).unwrap(), &h, t2).unwrap();
        let one = free_evolution(&rho, &h, t1 + t2).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-12);
        let mut e1 = rho.eigenvalues();
        let mut e2 = one.eigenvalues();
        e1.sort_by(f64::total_cmp);
        e2.sort_by(f64::total_cmp);
        prop_assert!(e1.iter().zip(&e2).all(|(a, b)| (a - b).abs() < 1e-12));
        let th = thermal_state(&mol).unwrap();
        prop_assert!(free_evolution(&th, &h, t1).unwrap().max_abs_diff(&th) < 1e-15);
    }

    #[test]
    fn refocusing_keeps_only_the_active_pair(j in couplings3(), pair in 0usize..3, t in 0.001f64..0.05, rho in state(3)) {
        let (a, b) = [(0, 1), (0, 2), (1, 2)][pair];
        let all = [(0, 1, j[0]), (0, 2, j[1]), (1, 2, j[2])];
        let mol = common::toy_molecule(&[150.0, -60.0, 20.0], &all);
        let model = SpinModel::new(&mol, &[0.0; 3], false).unwrap();
        let mut p = PulseProgram::new(3);
        for e in refocusing_schedule(t, &[(a, b)], &mol, true).unwrap() {
            p.push(e);
        }
        let got = execute_program(&p, &model, &rho).unwrap();
        let only = common::toy_molecule(&[0.0; 3], &[all[pair]]);
        let want = free_evolution(&rho, &build_hamiltonian(&only, &[0.0; 3]).unwrap(), t).unwrap();
        prop_assert!(got.max_abs_diff(&want) < 1e-9);
    }

    #[test]
    fn wrapped_angles_are_congruent(a in -5000.0f64..5000.0) {
        let w = wrap_degrees(a);
        prop_assert!(w > -180.0 && w <= 180.0);
        let k = (a - w) / 360.0;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn gcd_divides_both(a in 1u64..1_000_000, b in 1u64..1_000_000) {
        let g = gcd(a, b);
        prop_assert!(a % g == 0 && b % g == 0);
        prop_assert_eq!(gcd(a / g, b / g), 1);
    }

    #[test]
    fn circuit_text_roundtrip(ops in prop::collection::vec((0usize..6, 1usize..8, 1usize..7, -180.0f64..180.0), 0..30)) {
        let mut c = Circuit::shor_layout();
        for (kind, q, d, angle) in ops {
            let r = (q - 1 + d) % 7 + 1;
            let angle = (angle * 8.0).round() / 8.0;
            c.push(match kind {
                0 => Gate::h(q),
                1 => Gate::not(q),
                2 => Gate::cnot(q, r),
                3 => Gate::crz(q, r, angle),
                4 => Gate::new(GateKind::CyDag, &[q, r]),
                _ => Gate::new(GateKind::Rz(angle), &[q]),
            });
        }
        prop_assert_eq!(Circuit::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn classification_ignores_common_rescaling(s in -1.5f64..1.5, k in 0.01f64..100.0) {
        let sp = Spectrum {
            spin: 0,
            freq_axis_hz: vec![-1.0, 0.0, 1.0],
            amplitudes: vec![C64::new(0.0, 0.0), C64::new(s, 0.3), C64::new(0.0, 0.0)],
            phase_deg: 0.0,
        };
        let cal = Calibration { phase_deg: vec![0.0], reference_integral: vec![1.0], reference_peak: vec![1.0] };
        let scaled_cal = Calibration { reference_integral: vec![k], reference_peak: vec![k], ..cal.clone() };
        let a = classify_qubit(&sp, &cal).unwrap();
        let b = classify_qubit(&sp.scaled(k), &scaled_cal).unwrap();
        prop_assert_eq!(a.class, b.class);
        prop_assert_eq!(a.class, class_of(s));
    }
}

#[test]
fn walsh_rows_are_orthogonal_and_palindromic() {
    for m in 1..=5 {
        let rows = even_walsh_rows(m);
        assert_eq!(rows.len(), 1 << (m - 1));
        for (i, a) in rows.iter().enumerate() {
            assert!(a.iter().eq(a.iter().rev()));
            for b in &rows[i + 1..] {
                assert_eq!(a.iter().zip(b).map(|(x, y)| (x * y) as i32).sum::<i32>(), 0);
            }
        }
    }
}
