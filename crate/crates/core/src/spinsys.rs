//! Spin-system linear algebra: molecule description, Hamiltonians,
//! density matrices and ideal unitary evolution.
//!
//! Conventions: spin 0 (printed as spin 1) is the leftmost tensor factor,
//! `I_z = diag(+1/2, -1/2)` with `|0>` spin-up, and `H_0 = -sum 2 pi nu_i I_zi`
//! in rad/s with hbar = 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, bit_of, Mat2, C64, ONE, ZERO};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

/// Physical description of the spin register.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSpec {
    pub labels: Vec<String>,
    /// Offset of each spin from its channel reference, Hz.
    pub offset_hz: Vec<f64>,
    /// Absolute transition frequency, only used for thermal polarization.
    pub larmor_hz: Vec<f64>,
    /// Symmetric scalar couplings in Hz with zero diagonal.
    pub j_hz: Vec<Vec<f64>>,
    pub t1_s: Vec<f64>,
    pub t2_s: Vec<f64>,
    pub temperature_k: f64,
    /// Duration of a selective 90 degree pulse.
    pub pulse_90_s: f64,
    /// Duration of a selective 180 degree pulse.
    pub pulse_180_s: f64,
}

impl MoleculeSpec {
    pub fn n_spins(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_spins();
        if n == 0 {
            return Err(Error::NoSpins);
        }
        for (field, len) in [
            ("offset_hz", self.offset_hz.len()),
            ("larmor_hz", self.larmor_hz.len()),
            ("t1_s", self.t1_s.len()),
            ("t2_s", self.t2_s.len()),
            ("j_hz", self.j_hz.len()),
        ] {
            if len != n {
                return Err(Error::FieldLength { field, expected: n, got: len });
            }
        }
        for row in &self.j_hz {
            if row.len() != n {
                return Err(Error::FieldLength { field: "j_hz row", expected: n, got: row.len() });
            }
        }
        for i in 0..n {
            if self.j_hz[i][i] != 0.0 {
                return Err(Error::SelfCoupling(i + 1));
            }
            for j in i + 1..n {
                let (a, b) = (self.j_hz[i][j], self.j_hz[j][i]);
                if a != b {
                    return Err(Error::AsymmetricCoupling { i: i + 1, j: j + 1, a, b });
                }
            }
            let (t1, t2) = (self.t1_s[i], self.t2_s[i]);
            if !(t1 > 0.0) {
                return Err(Error::NonPositiveRelaxation { spin: i + 1, which: "T1", value: t1 });
            }
            if !(t2 > 0.0) {
                return Err(Error::NonPositiveRelaxation { spin: i + 1, which: "T2", value: t2 });
            }
            if t2 > 2.0 * t1 {
                return Err(Error::UnphysicalRelaxation { spin: i + 1, t1, t2 });
            }
        }
        if !(self.temperature_k > 0.0) {
            return Err(Error::NonPositiveTemperature(self.temperature_k));
        }
        if !(self.pulse_90_s >= 0.0 && self.pulse_180_s >= 0.0) {
            return Err(Error::InvalidParameter("pulse durations must be non-negative".into()));
        }
        Ok(())
    }

    /// Equilibrium polarization fraction `p = 1/2 + hbar omega / 4 k_B T`
    /// (the high-temperature form used by the amplitude-damping channel).
    pub fn polarization(&self, spin: usize) -> f64 {
        let omega = 2.0 * PI * self.larmor_hz[spin];
        0.5 + HBAR * omega / (4.0 * K_B * self.temperature_k)
    }

    /// The frame in which every spin is on resonance.
    pub fn on_resonance_frame(&self) -> Vec<f64> {
        self.offset_hz.clone()
    }

    /// Copy with every T2 multiplied by `factor`.
    pub fn with_t2_scaled(&self, factor: f64) -> MoleculeSpec {
        let mut m = self.clone();
        m.t2_s.iter_mut().for_each(|t| *t *= factor);
        m
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.j_hz[i][j]
    }

    /// Small uncoupled molecule used in examples and tests.
    pub fn uncoupled(n: usize, t1_s: f64, t2_s: f64) -> MoleculeSpec {
        MoleculeSpec {
            labels: (1..=n).map(|i| format!("S{i}")).collect(),
            offset_hz: vec![0.0; n],
            larmor_hz: vec![500e6; n],
            j_hz: vec![vec![0.0; n]; n],
            t1_s: vec![t1_s; n],
            t2_s: vec![t2_s; n],
            temperature_k: 303.15,
            pulse_90_s: 0.0,
            pulse_180_s: 0.0,
        }
    }
}

/// Diagonal Hamiltonian in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianDiag {
    pub diag: Vec<f64>,
}

impl HamiltonianDiag {
    pub fn zero(n: usize) -> Self {
        HamiltonianDiag { diag: vec![0.0; 1 << n] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }
}

#[inline]
fn z_value(b: usize, spin: usize, n: usize) -> f64 {
    if bit_of(b, spin, n) == 0 {
        0.5
    } else {
        -0.5
    }
}

fn check_frame(mol: &MoleculeSpec, frame_hz: &[f64]) -> Result<()> {
    if frame_hz.len() != mol.n_spins() {
        return Err(Error::DimensionMismatch { expected: mol.n_spins(), got: frame_hz.len() });
    }
    Ok(())
}

/// `H_0 + H_J` in a multiply-rotating frame whose per-spin references
/// `frame_hz` are subtracted from the offsets.
pub fn build_hamiltonian(mol: &MoleculeSpec, frame_hz: &[f64]) -> Result<HamiltonianDiag> {
    check_frame(mol, frame_hz)?;
    let n = mol.n_spins();
    let diag = (0..mol.dim())
        .map(|b| {
            let mut e = 0.0;
            for i in 0..n {
                let zi = z_value(b, i, n);
                e -= 2.0 * PI * (mol.offset_hz[i] - frame_hz[i]) * zi;
                for j in i + 1..n {
                    e += 2.0 * PI * mol.j_hz[i][j] * zi * z_value(b, j, n);
                }
            }
            e
        })
        .collect();
    Ok(HamiltonianDiag { diag })
}

/// The chemical-shift part alone (no couplings), in the given frame.
pub fn build_zeeman(mol: &MoleculeSpec, frame_hz: &[f64]) -> Result<HamiltonianDiag> {
    check_frame(mol, frame_hz)?;
    let n = mol.n_spins();
    let diag = (0..mol.dim())
        .map(|b| {
            (0..n)
                .map(|i| -2.0 * PI * (mol.offset_hz[i] - frame_hz[i]) * z_value(b, i, n))
                .sum()
        })
        .collect();
    Ok(HamiltonianDiag { diag })
}

/// Pure state in the computational basis or an arbitrary superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        StateVector { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: amps.len() });
        }
        Ok(StateVector { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn apply(&mut self, op: &[C64], qubits: &[usize]) {
        linalg::apply_to_vector(&mut self.amps, self.n, op, qubits);
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Dense `2^n x 2^n` density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        Self::from_diagonal(n, &vec![1.0 / dim as f64; dim]).expect("sized")
    }

    pub fn basis(n: usize, index: usize) -> Self {
        Self::from_pure(&StateVector::basis(n, index))
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let data = a.iter().flat_map(|x| a.iter().map(move |y| x * y.conj())).collect();
        DensityMatrix { n: psi.n_qubits(), data }
    }

    pub fn from_diagonal(n: usize, diag: &[f64]) -> Result<Self> {
        let dim = 1 << n;
        if diag.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: diag.len() });
        }
        let mut data = vec![ZERO; dim * dim];
        for (i, &p) in diag.iter().enumerate() {
            data[i * dim + i] = C64::new(p, 0.0);
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn from_data(n: usize, data: Vec<C64>) -> Result<Self> {
        let dim = 1 << n;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim() + c]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.data, self.dim())
    }

    pub fn add_scaled(&mut self, other: &DensityMatrix, w: f64) {
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b * w);
    }

    pub fn scale(&mut self, w: f64) {
        self.data.iter_mut().for_each(|a| *a *= w);
    }

    /// Frobenius norm of the difference.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// rho <- U rho U^dagger with `op` a dense local operator on `qubits`.
    pub fn conjugate(&mut self, op: &[C64], qubits: &[usize]) {
        linalg::conjugate_matrix(&mut self.data, self.n, op, qubits);
    }

    pub fn conjugate_single(&mut self, u: &Mat2, spin: usize) {
        let s = linalg::kraus_superoperator(std::slice::from_ref(u));
        linalg::apply_superoperator(&mut self.data, self.n, &s, spin);
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        let d = self.dim();
        let mut acc = ZERO;
        for r in 0..d {
            if a[r] == ZERO {
                continue;
            }
            let row: C64 = (0..d).map(|c| self.data[r * d + c] * a[c]).sum();
            acc += a[r].conj() * row;
        }
        acc.re
    }

    /// Probability that `spin` is found in `|0>`.
    pub fn prob_zero(&self, spin: usize) -> f64 {
        (0..self.dim()).filter(|&b| bit_of(b, spin, self.n) == 0).map(|b| self.get(b, b).re).sum()
    }

    /// Reduced state on the listed spins, first listed spin most significant.
    pub fn reduced(&self, keep: &[usize]) -> DensityMatrix {
        let n = self.n;
        let k = keep.len();
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let sub = |b: usize, qs: &[usize]| {
            qs.iter().fold(0usize, |acc, &q| (acc << 1) | bit_of(b, q, n))
        };
        let kd = 1 << k;
        let mut out = vec![ZERO; kd * kd];
        let d = self.dim();
        for r in 0..d {
            for c in 0..d {
                if sub(r, &rest) == sub(c, &rest) {
                    out[sub(r, keep) * kd + sub(c, keep)] += self.data[r * d + c];
                }
            }
        }
        DensityMatrix { n: k, data: out }
    }

    /// Trace distance `1/2 ||a - b||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff: Vec<C64> = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        0.5 * linalg::hermitian_eigenvalues(&diff, self.dim()).iter().map(|e| e.abs()).sum::<f64>()
    }
}

/// Embeds a single-spin operator as `I x .. x op x .. x I`.
pub fn embed_single_spin(op: &Mat2, spin: usize, n: usize) -> Result<Vec<C64>> {
    if spin >= n {
        return Err(Error::SpinOutOfRange { spin, n });
    }
    let dim = 1 << n;
    let mut out = vec![ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let others = linalg::mask_of(spin, n) ^ (dim - 1);
            if r & others == c & others {
                out[r * dim + c] = op[bit_of(r, spin, n)][bit_of(c, spin, n)];
            }
        }
    }
    Ok(out)
}

/// `rho -> U rho U^dagger` with `U = exp(-i h t)`.
pub fn free_evolution(rho: &DensityMatrix, h: &HamiltonianDiag, t: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    free_evolution_in_place(&mut out, h, t)?;
    Ok(out)
}

pub fn free_evolution_in_place(rho: &mut DensityMatrix, h: &HamiltonianDiag, t: f64) -> Result<()> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: h.dim() });
    }
    if t == 0.0 {
        return Ok(());
    }
    let phases: Vec<C64> = h.diag.iter().map(|e| C64::from_polar(1.0, -e * t)).collect();
    let d = rho.dim();
    let data = rho.data_mut();
    for r in 0..d {
        for c in 0..d {
            data[r * d + c] *= phases[r] * phases[c].conj();
        }
    }
    Ok(())
}

/// Boltzmann equilibrium `exp(-H_0 / k_B T) / Z` with absolute Larmor frequencies.
pub fn thermal_state(mol: &MoleculeSpec) -> Result<DensityMatrix> {
    if !(mol.temperature_k > 0.0) {
        return Err(Error::NonPositiveTemperature(mol.temperature_k));
    }
    let n = mol.n_spins();
    let up: Vec<f64> = (0..n)
        .map(|i| {
            let x = HBAR * 2.0 * PI * mol.larmor_hz[i] / (2.0 * K_B * mol.temperature_k);
            // e^x / (e^x + e^-x)
            0.5 * (1.0 + x.tanh())
        })
        .collect();
    let diag: Vec<f64> = (0..1usize << n)
        .map(|b| {
            (0..n).map(|i| if bit_of(b, i, n) == 0 { up[i] } else { 1.0 - up[i] }).product()
        })
        .collect();
    DensityMatrix::from_diagonal(n, &diag)
}

/// Spin operator `I_z`.
pub fn iz() -> Mat2 {
    [[C64::new(0.5, 0.0), ZERO], [ZERO, C64::new(-0.5, 0.0)]]
}

pub fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn two_spin(j: f64, offsets: [f64; 2]) -> MoleculeSpec {
        let mut m = MoleculeSpec::uncoupled(2, 1.0, 1.0);
        m.j_hz = vec![vec![0.0, j], vec![j, 0.0]];
        m.offset_hz = offsets.to_vec();
        m
    }

    #[test]
    fn embedding_identity_and_order() {
        let id: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
        let e = embed_single_spin(&id, 2, 3).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(e[r * 8 + c], if r == c { ONE } else { ZERO });
            }
        }
        let e = embed_single_spin(&iz(), 0, 2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| e[i * 4 + i].re).collect();
        assert_eq!(diag, vec![0.5, 0.5, -0.5, -0.5]);

        let x = embed_single_spin(&pauli_x(), 1, 2).unwrap();
        let mut psi = StateVector::basis(2, 0b00);
        psi.apply(&x, &[0, 1]);
        assert_eq!(psi.amplitudes()[0b01], ONE);
        assert!(embed_single_spin(&id, 3, 3).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let one = build_hamiltonian(&MoleculeSpec::uncoupled(1, 1.0, 1.0), &[0.0]).unwrap();
        assert_eq!(one.diag, vec![0.0, 0.0]);

        let h = build_hamiltonian(&two_spin(100.0, [0.0, 0.0]), &[0.0, 0.0]).unwrap();
        let want = [25.0, -25.0, -25.0, 25.0];
        for (a, b) in h.diag.iter().zip(want) {
            assert!((a - 2.0 * PI * b).abs() < 1e-9);
        }
        let h = build_hamiltonian(&two_spin(0.0, [100.0, 0.0]), &[0.0, 0.0]).unwrap();
        let want = [-50.0, -50.0, 50.0, 50.0];
        for (a, b) in h.diag.iter().zip(want) {
            assert!((a - 2.0 * PI * b).abs() < 1e-9);
        }
    }

    #[test]
    fn free_precession_sign() {
        let nu = 37.0;
        let mut mol = MoleculeSpec::uncoupled(1, 1.0, 1.0);
        mol.offset_hz = vec![nu];
        let h = build_hamiltonian(&mol, &[0.0]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let plus = StateVector::from_amplitudes(1, vec![C64::new(s, 0.0); 2]).unwrap();
        let rho = DensityMatrix::from_pure(&plus);
        let t = 0.0123;
        let out = free_evolution(&rho, &h, t).unwrap();
        let expected = C64::from_polar(0.5, 2.0 * PI * nu * t);
        assert!((out.get(0, 1) - expected).norm() < 1e-12);
        assert_eq!(free_evolution(&rho, &h, 0.0).unwrap(), rho);
        assert!(free_evolution(&rho, &h, -1.0).is_err());
    }

    #[test]
    fn coupling_phase_at_half_inverse_j() {
        let j = 10.0;
        let h = build_hamiltonian(&two_spin(j, [0.0, 0.0]), &[0.0, 0.0]).unwrap();
        let t = 1.0 / (2.0 * j);
        let phase = |b: usize| -h.diag[b] * t;
        // |00>,|11> acquire -pi/4, |01>,|10> acquire +pi/4: relative pi/2 of opposite sign
        assert!((phase(0) - phase(1) + PI / 2.0).abs() < 1e-12);
        assert!((phase(3) - phase(2) + PI / 2.0).abs() < 1e-12);
        let _ = I;
    }

    #[test]
    fn thermal_state_examples() {
        let mut mol = MoleculeSpec::uncoupled(3, 1.0, 1.0);
        mol.temperature_k = 1e12;
        let hot = thermal_state(&mol).unwrap();
        assert!(hot.max_abs_diff(&DensityMatrix::maximally_mixed(3)) < 1e-12);

        let mut mol = MoleculeSpec::uncoupled(1, 1.0, 1.0);
        mol.temperature_k = 303.0;
        let rho = thermal_state(&mol).unwrap();
        let x = HBAR * 2.0 * PI * 500e6 / (2.0 * K_B * 303.0);
        let p = x.exp() / (x.exp() + (-x).exp());
        assert!((rho.get(0, 0).re - p).abs() < 1e-15);
        assert!(rho.get(0, 0).re > rho.get(1, 1).re);
        let hi_t = HBAR * 2.0 * PI * 500e6 / (4.0 * K_B * 303.0);
        assert!((p - 0.5 - hi_t).abs() < 1e-12);
        assert!((hi_t - 1.98e-5).abs() < 0.05e-5);
        assert!((mol.polarization(0) - p).abs() < 1e-12);

        mol.temperature_k = 0.0;
        assert_eq!(thermal_state(&mol), Err(Error::NonPositiveTemperature(0.0)));
    }

    #[test]
    fn validation_errors() {
        let mut m = two_spin(5.0, [0.0, 0.0]);
        m.j_hz[1][0] = 6.0;
        assert!(matches!(m.validate(), Err(Error::AsymmetricCoupling { .. })));
        let mut m = two_spin(5.0, [0.0, 0.0]);
        m.t2_s[1] = 2.5;
        assert!(matches!(m.validate(), Err(Error::UnphysicalRelaxation { spin: 2, .. })));
        let mut m = two_spin(5.0, [0.0, 0.0]);
        m.t1_s[0] = 0.0;
        assert!(matches!(m.validate(), Err(Error::NonPositiveRelaxation { spin: 1, .. })));
        assert!(two_spin(5.0, [0.0, 0.0]).validate().is_ok());
    }

    #[test]
    fn reduced_state_of_product() {
        let mut psi = StateVector::basis(2, 0b01);
        let h = [C64::new(1.0 / 2f64.sqrt(), 0.0); 4];
        let mut had = h;
        had[3] = -had[3];
        psi.apply(&had, &[0]);
        let rho = DensityMatrix::from_pure(&psi);
        let r1 = rho.reduced(&[1]);
        assert!((r1.get(1, 1).re - 1.0).abs() < 1e-12);
        let r0 = rho.reduced(&[0]);
        assert!((r0.get(0, 1).re - 0.5).abs() < 1e-12);
    }
}
