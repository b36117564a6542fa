//! Generalized amplitude damping (T1) and phase damping (T2) channels,
//! applied per spin and composed serially with ideal evolution.

use crate::compiler::Pulse;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, C64, ZERO};
use crate::spinsys::{self, DensityMatrix, HamiltonianDiag, MoleculeSpec};

/// Operator-sum description of a single-spin channel acting for `duration_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub ops: Vec<Mat2>,
    pub duration_s: f64,
}

impl KrausSet {
    pub fn identity() -> Self {
        KrausSet { ops: vec![real([[1.0, 0.0], [0.0, 1.0]])], duration_s: 0.0 }
    }

    /// Largest entry of `sum_k E_k^dagger E_k - I`.
    pub fn completeness_error(&self) -> f64 {
        let mut acc = [[ZERO; 2]; 2];
        for e in &self.ops {
            let p = linalg::mat2_mul(&linalg::mat2_dagger(e), e);
            for r in 0..2 {
                for c in 0..2 {
                    acc[r][c] += p[r][c];
                }
            }
        }
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc[r][c] - target).norm());
            }
        }
        worst
    }

    pub fn superoperator(&self) -> [[C64; 4]; 4] {
        linalg::kraus_superoperator(&self.ops)
    }

    /// Applies the channel to a single-spin density matrix.
    pub fn apply_2x2(&self, rho: &Mat2) -> Mat2 {
        let mut out = [[ZERO; 2]; 2];
        for e in &self.ops {
            let t = linalg::mat2_mul(&linalg::mat2_mul(e, rho), &linalg::mat2_dagger(e));
            for r in 0..2 {
                for c in 0..2 {
                    out[r][c] += t[r][c];
                }
            }
        }
        out
    }
}

fn real(m: [[f64; 2]; 2]) -> Mat2 {
    [[C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)], [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)]]
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// Generalized amplitude damping with `gamma = 1 - exp(-t / T1)` relaxing
/// towards populations `(p, 1 - p)`.
pub fn gad_kraus(t: f64, t1: f64, p: f64) -> Result<KrausSet> {
    check_time(t)?;
    if !(t1 > 0.0) {
        return Err(Error::InvalidParameter(format!("T1 must be positive, got {t1}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("polarization p must lie in [0, 1], got {p}")));
    }
    let gamma = if t1.is_infinite() { 0.0 } else { -(-t / t1).exp_m1() };
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    let (g, h) = (gamma.sqrt(), (1.0 - gamma).sqrt());
    Ok(KrausSet {
        ops: vec![
            real([[sp, 0.0], [0.0, sp * h]]),
            real([[0.0, sp * g], [0.0, 0.0]]),
            real([[sq * h, 0.0], [0.0, sq]]),
            real([[0.0, 0.0], [sq * g, 0.0]]),
        ],
        duration_s: t,
    })
}

/// Phase damping with `lambda = (1 + exp(-t / T2)) / 2`, so coherences decay
/// exactly as `exp(-t / T2)`.
pub fn pd_kraus(t: f64, t2: f64) -> Result<KrausSet> {
    check_time(t)?;
    if !(t2 > 0.0) {
        return Err(Error::InvalidParameter(format!("T2 must be positive, got {t2}")));
    }
    let decay = if t2.is_infinite() { 1.0 } else { (-t / t2).exp() };
    let lambda = 0.5 * (1.0 + decay);
    let (a, b) = (lambda.sqrt(), (1.0 - lambda).sqrt());
    Ok(KrausSet { ops: vec![real([[a, 0.0], [0.0, a]]), real([[b, 0.0], [0.0, -b]])], duration_s: t })
}

pub fn apply_channel_on_spin(rho: &DensityMatrix, k: &KrausSet, spin: usize) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    apply_channel_in_place(&mut out, k, spin)?;
    Ok(out)
}

pub fn apply_channel_in_place(rho: &mut DensityMatrix, k: &KrausSet, spin: usize) -> Result<()> {
    let n = rho.n_qubits();
    if spin >= n {
        return Err(Error::SpinOutOfRange { spin, n });
    }
    linalg::apply_superoperator(rho.data_mut(), n, &k.superoperator(), spin);
    Ok(())
}

/// Superoperator of `second` after `first`.
fn compose(second: &[[C64; 4]; 4], first: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            out[i][k] = (0..4).map(|j| second[i][j] * first[j][k]).sum();
        }
    }
    out
}

/// Order of the two serial channel blocks inside one relaxation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelOrder {
    #[default]
    GadThenPd,
    PdThenGad,
}

/// GAD on every spin in order, then PD on every spin in order.
pub fn relaxation_step(rho: &DensityMatrix, mol: &MoleculeSpec, t: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    let order: Vec<usize> = (0..mol.n_spins()).collect();
    relaxation_in_place(&mut out, mol, t, ChannelOrder::GadThenPd, &order)?;
    Ok(out)
}

/// Relaxation with an explicit block order and spin visiting order.
pub fn relaxation_in_place(
    rho: &mut DensityMatrix,
    mol: &MoleculeSpec,
    t: f64,
    order: ChannelOrder,
    spins: &[usize],
) -> Result<()> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(());
    }
    let gad = |rho: &mut DensityMatrix| -> Result<()> {
        for &s in spins {
            apply_channel_in_place(rho, &gad_kraus(t, mol.t1_s[s], mol.polarization(s))?, s)?;
        }
        Ok(())
    };
    let pd = |rho: &mut DensityMatrix| -> Result<()> {
        for &s in spins {
            apply_channel_in_place(rho, &pd_kraus(t, mol.t2_s[s])?, s)?;
        }
        Ok(())
    };
    match order {
        ChannelOrder::GadThenPd => {
            gad(rho)?;
            pd(rho)
        }
        ChannelOrder::PdThenGad => {
            pd(rho)?;
            gad(rho)
        }
    }
}

/// Everything needed to propagate a density matrix through delays and pulses:
/// the molecule, its Hamiltonians in the simulation frame and the
/// decoherence switch.
#[derive(Debug, Clone)]
pub struct SpinModel {
    pub mol: MoleculeSpec,
    pub frame_hz: Vec<f64>,
    pub h_full: HamiltonianDiag,
    pub h_zeeman: HamiltonianDiag,
    pub decoherence: bool,
    pub order: ChannelOrder,
}

impl SpinModel {
    pub fn new(mol: &MoleculeSpec, frame_hz: &[f64], decoherence: bool) -> Result<Self> {
        mol.validate()?;
        Ok(SpinModel {
            mol: mol.clone(),
            frame_hz: frame_hz.to_vec(),
            h_full: spinsys::build_hamiltonian(mol, frame_hz)?,
            h_zeeman: spinsys::build_zeeman(mol, frame_hz)?,
            decoherence,
            order: ChannelOrder::GadThenPd,
        })
    }

    /// Model in the frame where every spin is on resonance.
    pub fn on_resonance(mol: &MoleculeSpec, decoherence: bool) -> Result<Self> {
        Self::new(mol, &mol.on_resonance_frame(), decoherence)
    }

    /// Whether chemical-shift evolution survives in this frame.
    pub fn has_offsets(&self) -> bool {
        self.frame_hz.iter().zip(&self.mol.offset_hz).any(|(f, o)| f != o)
    }

    /// Same result as [`relaxation_in_place`] over all spins: channels on
    /// different spins commute, so GAD and PD of each spin are fused.
    fn relax(&self, rho: &mut DensityMatrix, t: f64) -> Result<()> {
        check_time(t)?;
        if !self.decoherence || t == 0.0 {
            return Ok(());
        }
        let n = rho.n_qubits();
        for s in 0..self.mol.n_spins() {
            let gad = gad_kraus(t, self.mol.t1_s[s], self.mol.polarization(s))?.superoperator();
            let pd = pd_kraus(t, self.mol.t2_s[s])?.superoperator();
            let fused = match self.order {
                ChannelOrder::GadThenPd => compose(&pd, &gad),
                ChannelOrder::PdThenGad => compose(&gad, &pd),
            };
            linalg::apply_superoperator(rho.data_mut(), n, &fused, s);
        }
        Ok(())
    }

    pub fn delay_in_place(&self, rho: &mut DensityMatrix, t: f64) -> Result<()> {
        spinsys::free_evolution_in_place(rho, &self.h_full, t)?;
        self.relax(rho, t)
    }

    pub fn pulse_in_place(&self, rho: &mut DensityMatrix, pulse: &Pulse) -> Result<()> {
        let u = pulse.unitary()?;
        if pulse.spin >= rho.n_qubits() {
            return Err(Error::SpinOutOfRange { spin: pulse.spin, n: rho.n_qubits() });
        }
        if self.has_offsets() {
            spinsys::free_evolution_in_place(rho, &self.h_zeeman, pulse.duration_s)?;
        }
        self.relax(rho, pulse.duration_s)?;
        rho.conjugate_single(&u, pulse.spin);
        Ok(())
    }
}

/// Unitary evolution under `H_0 + H_J` followed by relaxation on every spin.
pub fn simulate_delay(rho: &DensityMatrix, model: &SpinModel, t: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    model.delay_in_place(&mut out, t)?;
    Ok(out)
}

/// A shaped pulse as a delay under `H_0` alone (with relaxation) followed by
/// an instantaneous rotation.
pub fn simulate_pulse(rho: &DensityMatrix, model: &SpinModel, pulse: &Pulse) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    model.pulse_in_place(&mut out, pulse)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::Axis;
    use crate::linalg::ONE;
    use crate::spinsys::StateVector;

    fn plus_state() -> DensityMatrix {
        let s = C64::new(1.0 / 2f64.sqrt(), 0.0);
        DensityMatrix::from_pure(&StateVector::from_amplitudes(1, vec![s, s]).unwrap())
    }

    #[test]
    fn fused_relaxation_matches_serial_blocks() {
        let mol = MoleculeSpec::uncoupled(3, 0.7, 0.3);
        let psi = StateVector::from_amplitudes(
            3,
            (0..8).map(|k| C64::new(0.1 * k as f64 + 0.2, 0.05 * k as f64)).collect(),
        )
        .unwrap();
        let norm: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi = StateVector::from_amplitudes(3, psi.amplitudes().iter().map(|a| a / norm).collect()).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        for order in [ChannelOrder::GadThenPd, ChannelOrder::PdThenGad] {
            let mut model = SpinModel::on_resonance(&mol, true).unwrap();
            model.order = order;
            let mut fused = rho.clone();
            model.relax(&mut fused, 0.25).unwrap();
            let mut serial = rho.clone();
            relaxation_in_place(&mut serial, &mol, 0.25, order, &[0, 1, 2]).unwrap();
            assert!(fused.max_abs_diff(&serial) < 1e-14);
        }
    }

    #[test]
    fn gad_limits() {
        let k = gad_kraus(0.0, 1.0, 0.7).unwrap();
        let rho = [[C64::new(0.3, 0.0), C64::new(0.1, 0.2)], [C64::new(0.1, -0.2), C64::new(0.7, 0.0)]];
        let out = k.apply_2x2(&rho);
        for r in 0..2 {
            for c in 0..2 {
                assert!((out[r][c] - rho[r][c]).norm() < 1e-15);
            }
        }
        let k = gad_kraus(1e6, 1.0, 0.7).unwrap();
        let out = k.apply_2x2(&rho);
        assert!((out[0][0].re - 0.7).abs() < 1e-12);
        assert!((out[1][1].re - 0.3).abs() < 1e-12);
        assert!(out[0][1].norm() < 1e-12);
        assert!(gad_kraus(-1.0, 1.0, 0.5).is_err());
        assert!(gad_kraus(1.0, 0.0, 0.5).is_err());
        assert!(gad_kraus(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn pd_examples() {
        assert!(pd_kraus(0.0, 1.0).unwrap().apply_2x2(&[[ONE, ONE], [ONE, ONE]])[0][1] == ONE);
        let t2 = 0.8;
        let out = pd_kraus(t2, t2).unwrap().apply_2x2(&[[ONE, ONE], [ONE, ONE]]);
        assert!((out[0][1].re - (-1f64).exp()).abs() < 1e-12);
        assert!((out[0][1].re - 0.3679).abs() < 1e-4);
        let pop = [[C64::new(0.2, 0.0), ZERO], [ZERO, C64::new(0.8, 0.0)]];
        let out = pd_kraus(3.0, 0.5).unwrap().apply_2x2(&pop);
        assert_eq!(out[0][0].re, 0.2);
        assert!((out[1][1].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn gad_full_decay_to_ground_on_chosen_spin() {
        let rho = DensityMatrix::maximally_mixed(3);
        let k = gad_kraus(f64::MAX, 1.0, 1.0).unwrap();
        let out = apply_channel_on_spin(&rho, &k, 1).unwrap();
        let r = out.reduced(&[1]);
        assert!((r.get(0, 0).re - 1.0).abs() < 1e-12);
        assert!(apply_channel_on_spin(&rho, &k, 3).is_err());
    }

    #[test]
    fn relaxation_scales_coherence() {
        let mut mol = MoleculeSpec::uncoupled(1, 1e9, 0.5);
        mol.larmor_hz = vec![0.0];
        let out = relaxation_step(&plus_state(), &mol, 0.5).unwrap();
        assert!((out.get(0, 1).re - 0.5 * (-1f64).exp()).abs() < 1e-9);
        assert_eq!(relaxation_step(&plus_state(), &mol, 0.0).unwrap(), plus_state());
    }

    #[test]
    fn instantaneous_x_pulse_tips_to_minus_y() {
        let mol = MoleculeSpec::uncoupled(2, 1.0, 1.0);
        let model = SpinModel::on_resonance(&mol, false).unwrap();
        let pulse = Pulse { spin: 1, angle_deg: 90.0, axis: Axis::PlusX, duration_s: 0.0 };
        let out = simulate_pulse(&DensityMatrix::basis(2, 0), &model, &pulse).unwrap();
        let r = out.reduced(&[1]);
        // <I_y> = Im(rho_10)... = -Im(rho_01)
        let iy = -r.get(0, 1).im;
        assert!((iy + 0.5).abs() < 1e-12);

        let pi = Pulse { angle_deg: 180.0, ..pulse };
        let start = DensityMatrix::from_pure(&StateVector::from_amplitudes(2, vec![C64::new(0.5, 0.0); 4]).unwrap());
        let twice = simulate_pulse(&simulate_pulse(&start, &model, &pi).unwrap(), &model, &pi).unwrap();
        assert!(twice.max_abs_diff(&start) < 1e-14);
    }
}
