//! Effective pure state preparation by temporal averaging.
//!
//! Every experiment applies a linear reversible map `v -> M^k v` (over GF(2))
//! to the computational basis labels, where `M` generates a Singer cycle: its
//! powers `k = 0 .. 2^n - 2` send any nonzero label to every nonzero label
//! exactly once. Averaging the `2^n - 1` permuted thermal states therefore
//! equalizes all populations except the one of `|00..0>`, and a final NOT on
//! the last spin moves the excess to `|00..01>`.

use rayon::prelude::*;

use crate::channels::SpinModel;
use crate::circuit::{apply_circuit_to_density, Circuit, Gate, GateKind};
use crate::compiler;
use crate::error::{Error, Result};
use crate::spinsys::{thermal_state, DensityMatrix, MoleculeSpec};

/// Feedback taps (bit `i` = coefficient of `x^i`) of primitive polynomials of
/// degree 1..=10, leading term implied.
const PRIMITIVE_TAPS: [u32; 10] = [0b1, 0b11, 0b011, 0b0011, 0b00101, 0b000011, 0b0000011, 0b00011101, 0b000010001, 0b0000001001];

/// Square matrix over GF(2); row `i` is a bit mask over columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    pub rows: Vec<u32>,
}

impl Gf2Matrix {
    pub fn identity(n: usize) -> Self {
        Gf2Matrix { rows: (0..n).map(|i| 1 << i).collect() }
    }

    /// Companion matrix of the degree-`n` polynomial with the given taps.
    pub fn companion(n: usize, taps: u32) -> Self {
        let mut rows = vec![0u32; n];
        for (i, row) in rows.iter_mut().enumerate() {
            if i > 0 {
                *row |= 1 << (i - 1);
            }
            if taps >> i & 1 == 1 {
                *row |= 1 << (n - 1);
            }
        }
        Gf2Matrix { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, v: u32) -> u32 {
        self.rows.iter().enumerate().fold(0, |acc, (i, r)| acc | (((r & v).count_ones() & 1) << i))
    }

    pub fn mul(&self, other: &Gf2Matrix) -> Gf2Matrix {
        // (A B) e_j = A (B e_j)
        let n = self.n();
        let mut rows = vec![0u32; n];
        for j in 0..n {
            let col = self.apply(other.apply(1 << j));
            for (i, r) in rows.iter_mut().enumerate() {
                *r |= ((col >> i) & 1) << j;
            }
        }
        Gf2Matrix { rows }
    }

    /// Order of the matrix acting on nonzero vectors, by following the orbit of `e_0`.
    pub fn orbit_length(&self) -> usize {
        let start = 1u32;
        let mut v = self.apply(start);
        let mut len = 1;
        while v != start {
            v = self.apply(v);
            len += 1;
            if len > 1 << self.n() {
                break;
            }
        }
        len
    }
}

/// Singer-cycle generator on `n` bits.
pub fn singer_generator(n: usize) -> Result<Gf2Matrix> {
    if n == 0 || n > PRIMITIVE_TAPS.len() {
        return Err(Error::UnsupportedPartition(format!("{n} spins")));
    }
    let m = Gf2Matrix::companion(n, PRIMITIVE_TAPS[n - 1]);
    debug_assert_eq!(m.orbit_length(), (1 << n) - 1);
    Ok(m)
}

/// CNOT network realizing `v -> A v`, where bit `i` of `v` is spin `i`
/// (qubit `i + 1`). `A` must be invertible.
pub fn synthesize_linear(a: &Gf2Matrix) -> Result<Vec<Gate>> {
    let n = a.n();
    let mut m = a.rows.clone();
    // row operations `row_t ^= row_c`, recorded as (c, t)
    let mut ops: Vec<(usize, usize)> = Vec::new();
    for col in 0..n {
        if m[col] >> col & 1 == 0 {
            let r = (col + 1..n)
                .find(|&r| m[r] >> col & 1 == 1)
                .ok_or_else(|| Error::InvalidParameter("singular GF(2) matrix".into()))?;
            m[col] ^= m[r];
            ops.push((r, col));
        }
        for r in 0..n {
            if r != col && m[r] >> col & 1 == 1 {
                m[r] ^= m[col];
                ops.push((col, r));
            }
        }
    }
    // E_k .. E_1 A = I  =>  A = E_1 .. E_k, so E_k acts first
    Ok(ops.into_iter().rev().map(|(c, t)| Gate::cnot(c + 1, t + 1)).collect())
}

/// How the averaged state is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrepMode {
    /// Populations permuted directly.
    #[default]
    Ideal,
    /// Each experiment's gates applied to the density matrix.
    Simulated,
    /// Each experiment lowered to pulses and run with relaxation.
    PulseLowered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepScheme {
    pub n_spins: usize,
    pub experiments: Vec<Circuit>,
    pub weights: Vec<f64>,
    /// Labels sent by experiment `k`: `label -> maps[k].apply(label)`.
    pub maps: Vec<Gf2Matrix>,
}

/// Builds the averaging scheme. `partition` lists the sizes of the nuclear
/// species groups; it must cover every spin. The permutations act on the whole
/// register, so every grouping yields the same scheme.
pub fn build_prep_scheme(mol: &MoleculeSpec, partition: &[usize]) -> Result<PrepScheme> {
    let n = mol.n_spins();
    if partition.iter().any(|&g| g == 0) || partition.iter().sum::<usize>() != n {
        return Err(Error::UnsupportedPartition(format!("{partition:?} does not cover {n} spins")));
    }
    let gen = singer_generator(n)?;
    let count = (1usize << n) - 1;
    let mut maps = Vec::with_capacity(count);
    let mut cur = Gf2Matrix::identity(n);
    for _ in 0..count {
        maps.push(cur.clone());
        cur = gen.mul(&cur);
    }
    let experiments = maps
        .iter()
        .map(|m| {
            let mut c = Circuit::new(n);
            c.gates = synthesize_linear(m)?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrepScheme { n_spins: n, experiments, weights: vec![1.0 / count as f64; count], maps })
}

/// Basis index of a label vector (bit `i` of the label is spin `i`, spin 0 is the MSB of the index).
fn index_of(label: u32, n: usize) -> usize {
    (0..n).fold(0, |acc, s| acc | ((((label >> s) & 1) as usize) << (n - 1 - s)))
}

fn run_experiment(
    scheme: &PrepScheme,
    k: usize,
    rho_th: &DensityMatrix,
    mode: PrepMode,
    mol: &MoleculeSpec,
    model: Option<&SpinModel>,
) -> Result<DensityMatrix> {
    let n = scheme.n_spins;
    match mode {
        PrepMode::Ideal => {
            if !is_diagonal(rho_th) {
                return Err(Error::InvalidParameter("ideal prep needs a diagonal input".into()));
            }
            let d = rho_th.diagonal();
            let mut out = vec![0.0; d.len()];
            for label in 0..(1u32 << n) {
                out[index_of(scheme.maps[k].apply(label), n)] = d[index_of(label, n)];
            }
            DensityMatrix::from_diagonal(n, &out)
        }
        PrepMode::Simulated => apply_circuit_to_density(rho_th, &scheme.experiments[k]),
        PrepMode::PulseLowered => {
            let model = model.ok_or_else(|| Error::InvalidParameter("pulse-lowered prep needs a spin model".into()))?;
            let prog = compiler::compile_to_pulses(&scheme.experiments[k], mol, model.has_offsets())?;
            compiler::execute_program(&prog, model, rho_th)
        }
    }
}

fn is_diagonal(rho: &DensityMatrix) -> bool {
    let d = rho.dim();
    (0..d).all(|r| (0..d).all(|c| r == c || rho.get(r, c).norm() == 0.0))
}

/// Weighted sum of all experiments applied to `rho_th`, in experiment order.
pub fn average_experiments(
    scheme: &PrepScheme,
    rho_th: &DensityMatrix,
    mode: PrepMode,
    mol: &MoleculeSpec,
    model: Option<&SpinModel>,
) -> Result<DensityMatrix> {
    let outs: Vec<DensityMatrix> = (0..scheme.experiments.len())
        .into_par_iter()
        .map(|k| run_experiment(scheme, k, rho_th, mode, mol, model))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = DensityMatrix::from_diagonal(scheme.n_spins, &vec![0.0; 1 << scheme.n_spins])?;
    for (o, w) in outs.iter().zip(&scheme.weights) {
        acc.add_scaled(o, *w);
    }
    Ok(acc)
}

/// Averaged state before the final NOT: excess population on `|00..0>`.
pub fn ground_reference(mol: &MoleculeSpec, mode: PrepMode, model: Option<&SpinModel>) -> Result<DensityMatrix> {
    let scheme = build_prep_scheme(mol, &[mol.n_spins()])?;
    average_experiments(&scheme, &thermal_state(mol)?, mode, mol, model)
}

/// Applies NOT to the last spin.
pub fn not_last(rho: &DensityMatrix) -> DensityMatrix {
    let n = rho.n_qubits();
    let mut c = Circuit::new(n);
    c.push(Gate::new(GateKind::Not, &[n]));
    apply_circuit_to_density(rho, &c).expect("NOT on an in-range qubit")
}

/// `rho_1`: the averaged thermal state followed by NOT on the last spin.
pub fn effective_pure_state(mol: &MoleculeSpec) -> Result<DensityMatrix> {
    Ok(not_last(&ground_reference(mol, PrepMode::Ideal, None)?))
}

/// Fit of `rho` to `(1 - eps) I / d + eps |target><target|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityFit {
    pub epsilon: f64,
    /// Frobenius norm of `rho` minus the fitted model.
    pub residual: f64,
}

pub fn fit_effective_pure(rho: &DensityMatrix, target: usize) -> PurityFit {
    let d = rho.dim();
    let trace = rho.trace().re;
    let peak = rho.get(target, target).re;
    let epsilon = (d as f64 * peak - trace) / (d as f64 - 1.0);
    let background = (trace - epsilon) / d as f64;
    let mut sq = 0.0;
    for r in 0..d {
        for c in 0..d {
            let mut model = if r == c { background } else { 0.0 };
            if r == target && c == target {
                model += epsilon;
            }
            sq += (rho.get(r, c) - model).norm_sqr();
        }
    }
    PurityFit { epsilon, residual: sq.sqrt() }
}
