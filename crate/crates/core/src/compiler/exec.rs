//! Execution of pulse programs on density matrices.

use super::pulses::{rz, PulseEvent, PulseProgram};
use crate::channels::SpinModel;
use crate::circuit::{apply_circuit_to_state, Circuit};
use crate::error::{Error, Result};
use crate::spinsys::{DensityMatrix, MoleculeSpec, StateVector};

/// Runs every event of `p` in order. Delays evolve under the full
/// Hamiltonian of `model`; frame rotations are applied as exact z rotations.
pub fn execute_program_in_place(p: &PulseProgram, model: &SpinModel, rho: &mut DensityMatrix) -> Result<()> {
    if p.n_spins != rho.n_qubits() {
        return Err(Error::DimensionMismatch { expected: p.n_spins, got: rho.n_qubits() });
    }
    for e in &p.events {
        match e {
            PulseEvent::Pulse(pulse) => model.pulse_in_place(rho, pulse)?,
            PulseEvent::Delay { duration_s, .. } => model.delay_in_place(rho, *duration_s)?,
            PulseEvent::FrameRotation { spin, angle_deg } => rho.conjugate_single(&rz(*angle_deg), *spin),
            PulseEvent::Acquire { .. } => {}
        }
    }
    Ok(())
}

pub fn execute_program(p: &PulseProgram, model: &SpinModel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    execute_program_in_place(p, model, &mut out)?;
    Ok(out)
}

/// Fidelity between executing `p` without decoherence and applying `c`
/// ideally, both starting from the basis state `input`.
pub fn verify_lowering_from(p: &PulseProgram, c: &Circuit, mol: &MoleculeSpec, input: usize) -> Result<f64> {
    let model = SpinModel::on_resonance(mol, false)?;
    let psi0 = StateVector::basis(c.n_qubits, input);
    let ideal = apply_circuit_to_state(&psi0, c)?;
    let rho = execute_program(p, &model, &DensityMatrix::from_pure(&psi0))?;
    Ok(rho.fidelity_with(&ideal).clamp(0.0, 1.0))
}

/// [`verify_lowering_from`] with the input `|00..01>`.
pub fn verify_lowering(p: &PulseProgram, c: &Circuit, mol: &MoleculeSpec) -> Result<f64> {
    verify_lowering_from(p, c, mol, 1)
}
