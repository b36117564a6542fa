//! Gate-to-pulse lowering.
//!
//! Every gate is rewritten into selective pulses, frame rotations and
//! coupling blocks. Identities used (exact up to global phase):
//!
//! - `H = Ry(90) Rz(180)`
//! - `NOT = Rx(180)`
//! - `CRZ(t) = Rz_c(-t/2) Rz_t(-t/2) exp(-i t/4 Z_c Z_t)`
//! - `CNOT = H_t CRZ(180) H_t`
//! - `C-Ry(t) = Rx_t(+-90) C-Rz(-+t) Rx_t(-+90)`
//!
//! `exp(-i phi/4 Z_i Z_j)` is a delay of `phi / (2 pi J_ij)`; when `phi` and
//! `J_ij` differ in sign the block is sandwiched between 180 degree pulses on
//! the target.

use super::pulses::{Axis, PulseProgram};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::spinsys::MoleculeSpec;

/// Wraps an angle into `(-180, 180]`.
pub fn wrap_degrees(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

struct Lowerer<'a> {
    mol: &'a MoleculeSpec,
    prog: PulseProgram,
}

impl Lowerer<'_> {
    fn pulse90(&mut self, spin: usize, axis: Axis) {
        self.prog.pulse(spin, 90.0, axis, self.mol.pulse_90_s);
    }

    fn pulse180(&mut self, spin: usize, axis: Axis) {
        self.prog.pulse(spin, 180.0, axis, self.mol.pulse_180_s);
    }

    fn hadamard(&mut self, s: usize) {
        self.prog.frame(s, 180.0);
        self.pulse90(s, Axis::PlusY);
    }

    /// `exp(-i phi/4 Z_c Z_t)` with `phi` in degrees.
    fn zz(&mut self, c: usize, t: usize, phi_deg: f64) -> Result<()> {
        if phi_deg == 0.0 {
            return Ok(());
        }
        let j = self.mol.coupling(c, t);
        if j == 0.0 {
            return Err(Error::MissingCoupling(c + 1, t + 1));
        }
        let duration = (phi_deg / (360.0 * j)).abs();
        let pair = (c.min(t), c.max(t));
        if phi_deg * j > 0.0 {
            self.prog.delay(duration, vec![pair]);
        } else {
            self.pulse180(t, Axis::PlusX);
            self.prog.delay(duration, vec![pair]);
            self.pulse180(t, Axis::MinusX);
        }
        Ok(())
    }

    fn controlled_phase(&mut self, c: usize, t: usize, theta_deg: f64) -> Result<()> {
        let theta = wrap_degrees(theta_deg);
        if theta == 0.0 {
            return Ok(());
        }
        self.prog.frame(c, -theta / 2.0);
        self.prog.frame(t, -theta / 2.0);
        self.zz(c, t, theta)
    }

    fn controlled_ry(&mut self, c: usize, t: usize, theta_deg: f64) -> Result<()> {
        let (pre, post) = if theta_deg > 0.0 { (Axis::MinusX, Axis::PlusX) } else { (Axis::PlusX, Axis::MinusX) };
        let phi = theta_deg.abs();
        self.pulse90(t, pre);
        self.prog.frame(t, -phi / 2.0);
        self.zz(c, t, phi)?;
        self.pulse90(t, post);
        Ok(())
    }

    fn gate(&mut self, g: &Gate) -> Result<()> {
        let s: Vec<usize> = g.qubits.iter().map(|q| q - 1).collect();
        match g.kind {
            GateKind::Barrier => {}
            GateKind::H => self.hadamard(s[0]),
            GateKind::Not => self.pulse180(s[0], Axis::PlusX),
            GateKind::Rz(a) => self.prog.frame(s[0], a),
            GateKind::Crz(a) => self.controlled_phase(s[0], s[1], a)?,
            GateKind::Cnot => {
                self.hadamard(s[1]);
                self.controlled_phase(s[0], s[1], 180.0)?;
                self.hadamard(s[1]);
            }
            GateKind::Cy => self.controlled_ry(s[0], s[1], 90.0)?,
            GateKind::CyDag => self.controlled_ry(s[0], s[1], -90.0)?,
            GateKind::Ccnot | GateKind::Cswap => return Err(Error::NotLowerable(g.to_string())),
        }
        Ok(())
    }
}

/// Lowers `c` to an unrefocused pulse program: every delay carries the
/// coupling it is meant to implement, other couplings still evolve.
pub fn lower_to_pulses(c: &Circuit, mol: &MoleculeSpec) -> Result<PulseProgram> {
    mol.validate()?;
    if c.n_qubits != mol.n_spins() {
        return Err(Error::DimensionMismatch { expected: mol.n_spins(), got: c.n_qubits });
    }
    c.validate()?;
    let mut l = Lowerer { mol, prog: PulseProgram::new(mol.n_spins()) };
    for g in &c.gates {
        l.gate(g)?;
    }
    Ok(l.prog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::pulses::PulseEvent;

    fn pair_mol(j: f64) -> MoleculeSpec {
        let mut m = MoleculeSpec::uncoupled(2, 10.0, 1.0);
        m.j_hz[0][1] = j;
        m.j_hz[1][0] = j;
        m
    }

    #[test]
    fn wrap() {
        assert_eq!(wrap_degrees(180.0), 180.0);
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert_eq!(wrap_degrees(270.0), -90.0);
        assert_eq!(wrap_degrees(45.0), 45.0);
    }

    #[test]
    fn single_hadamard_is_one_90_pulse() {
        let mut c = Circuit::new(2);
        c.push(Gate::h(1));
        let p = lower_to_pulses(&c, &pair_mol(50.0)).unwrap();
        let st = p.stats();
        assert_eq!(st.n_pulses, 1);
        assert_eq!(st.n_90, 1);
        assert_eq!(st.n_delays, 0);
    }

    #[test]
    fn cnot_delay_is_half_over_j() {
        let mut c = Circuit::new(2);
        c.push(Gate::cnot(1, 2));
        let p = lower_to_pulses(&c, &pair_mol(50.0)).unwrap();
        let delays: Vec<f64> = p
            .events
            .iter()
            .filter_map(|e| match e {
                PulseEvent::Delay { duration_s, .. } => Some(*duration_s),
                _ => None,
            })
            .collect();
        assert_eq!(delays.len(), 1);
        assert!((delays[0] - 0.01).abs() < 1e-15);
        assert_eq!(p.stats().n_90, 2);
    }

    #[test]
    fn rz_is_a_frame_rotation_only() {
        let mut c = Circuit::new(2);
        c.push(Gate::new(GateKind::Rz(90.0), &[2]));
        let p = lower_to_pulses(&c, &pair_mol(50.0)).unwrap();
        assert_eq!(p.events, vec![PulseEvent::FrameRotation { spin: 1, angle_deg: 90.0 }]);
        assert_eq!(p.total_duration(), 0.0);
    }

    #[test]
    fn errors() {
        let mut c = Circuit::new(2);
        c.push(Gate::cnot(1, 2));
        assert_eq!(lower_to_pulses(&c, &pair_mol(0.0)), Err(Error::MissingCoupling(1, 2)));
        let mut c = Circuit::new(3);
        c.push(Gate::ccnot(1, 2, 3));
        let m = MoleculeSpec::uncoupled(3, 1.0, 1.0);
        assert!(matches!(lower_to_pulses(&c, &m), Err(Error::NotLowerable(_))));
    }
}
