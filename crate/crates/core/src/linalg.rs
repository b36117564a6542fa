//! Dense kernels for acting with few-qubit operators on state vectors and
//! density matrices without materializing full-size operators.
//!
//! Qubit (spin) index 0 is the most significant bit of the basis index.

use num_complex::Complex64;

pub type C64 = Complex64;

/// 2x2 complex matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub(crate) fn bit_of(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

#[inline]
pub(crate) fn mask_of(qubit: usize, n: usize) -> usize {
    1 << (n - 1 - qubit)
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mat2_dagger(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn mat2_scale(a: &Mat2, s: C64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

/// Basis offsets of the 2^k sub-block spanned by `qubits`, ordered so that
/// the first listed qubit is the most significant local bit.
fn local_offsets(qubits: &[usize], n: usize) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|m| {
            qubits.iter().enumerate().fold(0, |acc, (pos, &q)| {
                if (m >> (k - 1 - pos)) & 1 == 1 {
                    acc | mask_of(q, n)
                } else {
                    acc
                }
            })
        })
        .collect()
}

fn base_indices(qubits: &[usize], n: usize) -> impl Iterator<Item = usize> {
    let mask: usize = qubits.iter().map(|&q| mask_of(q, n)).sum();
    (0..1usize << n).filter(move |b| b & mask == 0)
}

/// Applies a dense `2^k x 2^k` operator (row-major) on `qubits` to a state vector.
pub fn apply_to_vector(amps: &mut [C64], n: usize, op: &[C64], qubits: &[usize]) {
    let offsets = local_offsets(qubits, n);
    let m = offsets.len();
    debug_assert_eq!(op.len(), m * m);
    let mut buf = vec![ZERO; m];
    for base in base_indices(qubits, n) {
        for (j, off) in offsets.iter().enumerate() {
            buf[j] = amps[base | off];
        }
        for (i, off) in offsets.iter().enumerate() {
            let row = &op[i * m..(i + 1) * m];
            amps[base | off] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

/// rho <- U rho U^dagger for a dense local operator U on `qubits`.
pub fn conjugate_matrix(data: &mut [C64], n: usize, op: &[C64], qubits: &[usize]) {
    let dim = 1usize << n;
    let offsets = local_offsets(qubits, n);
    let m = offsets.len();
    let bases: Vec<usize> = base_indices(qubits, n).collect();
    let mut buf = vec![ZERO; m];
    // left multiplication acts on row indices
    for c in 0..dim {
        for &base in &bases {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = data[(base | off) * dim + c];
            }
            for (i, off) in offsets.iter().enumerate() {
                let row = &op[i * m..(i + 1) * m];
                data[(base | off) * dim + c] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
            }
        }
    }
    // right multiplication by U^dagger acts on column indices with conj(U)
    for r in 0..dim {
        let row_data = &mut data[r * dim..(r + 1) * dim];
        for &base in &bases {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = row_data[base | off];
            }
            for (i, off) in offsets.iter().enumerate() {
                let row = &op[i * m..(i + 1) * m];
                row_data[base | off] = row.iter().zip(&buf).map(|(a, b)| a.conj() * b).sum();
            }
        }
    }
}

/// Superoperator of a single-spin Kraus set, indexed `[(a, b)][(a', b')]`
/// with pair index `2 * a + b`.
pub fn kraus_superoperator(ops: &[Mat2]) -> [[C64; 4]; 4] {
    let mut s = [[ZERO; 4]; 4];
    for e in ops {
        for a in 0..2 {
            for b in 0..2 {
                for ap in 0..2 {
                    for bp in 0..2 {
                        s[2 * a + b][2 * ap + bp] += e[a][ap] * e[b][bp].conj();
                    }
                }
            }
        }
    }
    s
}

/// Applies a single-spin superoperator to every 2x2 block of the density
/// matrix selected by `spin`.
pub fn apply_superoperator(data: &mut [C64], n: usize, s: &[[C64; 4]; 4], spin: usize) {
    let dim = 1usize << n;
    let mask = mask_of(spin, n);
    if is_phase_covariant(s) {
        let (p00, p03, p30, p33, k1, k2) = (s[0][0], s[0][3], s[3][0], s[3][3], s[1][1], s[2][2]);
        for r0 in (0..dim).filter(|r| r & mask == 0) {
            for c0 in (0..dim).filter(|c| c & mask == 0) {
                let i0 = r0 * dim + c0;
                let i3 = (r0 | mask) * dim + (c0 | mask);
                let (v0, v3) = (data[i0], data[i3]);
                data[i0] = p00 * v0 + p03 * v3;
                data[i3] = p30 * v0 + p33 * v3;
                data[r0 * dim + (c0 | mask)] *= k1;
                data[(r0 | mask) * dim + c0] *= k2;
            }
        }
        return;
    }
    apply_dense(data, n, s, spin);
}

fn apply_dense(data: &mut [C64], n: usize, s: &[[C64; 4]; 4], spin: usize) {
    let dim = 1usize << n;
    let mask = mask_of(spin, n);
    for r0 in (0..dim).filter(|r| r & mask == 0) {
        for c0 in (0..dim).filter(|c| c & mask == 0) {
            let idx = [
                r0 * dim + c0,
                r0 * dim + (c0 | mask),
                (r0 | mask) * dim + c0,
                (r0 | mask) * dim + (c0 | mask),
            ];
            let v = [data[idx[0]], data[idx[1]], data[idx[2]], data[idx[3]]];
            for (i, &k) in idx.iter().enumerate() {
                data[k] = s[i][0] * v[0] + s[i][1] * v[1] + s[i][2] * v[2] + s[i][3] * v[3];
            }
        }
    }
}

/// Populations mix only among themselves and each coherence is only scaled.
fn is_phase_covariant(s: &[[C64; 4]; 4]) -> bool {
    const OFF: [(usize, usize); 10] =
        [(0, 1), (0, 2), (3, 1), (3, 2), (1, 0), (1, 2), (1, 3), (2, 0), (2, 1), (2, 3)];
    OFF.iter().all(|&(i, j)| s[i][j] == ZERO)
}

/// Eigenvalues of a Hermitian matrix given row-major.
pub fn hermitian_eigenvalues(data: &[C64], dim: usize) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| data[r * dim + c]);
    let hermitian = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    hermitian.symmetric_eigenvalues().iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariant_fast_path_matches_dense() {
        let s = [
            [C64::new(0.9, 0.0), ZERO, ZERO, C64::new(0.2, 0.0)],
            [ZERO, C64::new(0.7, 0.1), ZERO, ZERO],
            [ZERO, ZERO, C64::new(0.7, -0.1), ZERO],
            [C64::new(0.1, 0.0), ZERO, ZERO, C64::new(0.8, 0.0)],
        ];
        assert!(is_phase_covariant(&s));
        let data: Vec<C64> = (0..64).map(|k| C64::new(k as f64 * 0.3, 1.0 - k as f64 * 0.1)).collect();
        for spin in 0..3 {
            let (mut a, mut b) = (data.clone(), data.clone());
            apply_superoperator(&mut a, 3, &s, spin);
            apply_dense(&mut b, 3, &s, spin);
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-12));
        }
    }
}
