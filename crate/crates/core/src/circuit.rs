//! Gate-level IR, the N = 15 order-finding circuits, the inverse QFT and
//! ideal (decoherence-free) application.
//!
//! Qubits are numbered 1..=n as in the literature: qubits 1-3 hold the first
//! register `x2 x1 x0` (qubit 3 = `x0`), qubits 4-7 the second register
//! `y3 y2 y1 y0` (qubit 7 = `y0`).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::spinsys::{DensityMatrix, StateVector};

pub const N_FACTOR: u64 = 15;
pub const SHOR_QUBITS: usize = 7;
pub const FIRST_REGISTER: [usize; 3] = [1, 2, 3];
pub const SECOND_REGISTER: [usize; 4] = [4, 5, 6, 7];
pub const VALID_BASES: [u64; 7] = [2, 4, 7, 8, 11, 13, 14];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    Not,
    Cnot,
    /// Controlled +90 degree rotation about y.
    Cy,
    /// Controlled -90 degree rotation about y.
    CyDag,
    /// Controlled z rotation: phase `exp(-i angle)` on `|11>`.
    Crz(f64),
    Ccnot,
    Cswap,
    /// `exp(-i angle Z / 2)`.
    Rz(f64),
    Barrier,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::H | GateKind::Not | GateKind::Rz(_) => 1,
            GateKind::Cnot | GateKind::Cy | GateKind::CyDag | GateKind::Crz(_) => 2,
            GateKind::Ccnot | GateKind::Cswap => 3,
            GateKind::Barrier => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::Not => "NOT",
            GateKind::Cnot => "CNOT",
            GateKind::Cy => "CY",
            GateKind::CyDag => "CY_DAG",
            GateKind::Crz(_) => "CRZ",
            GateKind::Ccnot => "CCNOT",
            GateKind::Cswap => "CSWAP",
            GateKind::Rz(_) => "RZ",
            GateKind::Barrier => "BARRIER",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            GateKind::Crz(a) | GateKind::Rz(a) => Some(*a),
            _ => None,
        }
    }

    /// Number of controls; the remaining qubits are targets.
    pub fn n_controls(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cy | GateKind::CyDag | GateKind::Crz(_) | GateKind::Cswap => 1,
            GateKind::Ccnot => 2,
            _ => 0,
        }
    }
}

/// One gate; `qubits` lists controls first, then targets (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub label: Option<String>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Gate { kind, qubits: qubits.to_vec(), label: None }
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, &[q])
    }
    pub fn not(q: usize) -> Self {
        Gate::new(GateKind::Not, &[q])
    }
    pub fn cnot(c: usize, t: usize) -> Self {
        Gate::new(GateKind::Cnot, &[c, t])
    }
    pub fn ccnot(c1: usize, c2: usize, t: usize) -> Self {
        Gate::new(GateKind::Ccnot, &[c1, c2, t])
    }
    pub fn crz(c: usize, t: usize, angle_deg: f64) -> Self {
        Gate::new(GateKind::Crz(angle_deg), &[c, t])
    }

    pub fn controls(&self) -> &[usize] {
        &self.qubits[..self.kind.n_controls().min(self.qubits.len())]
    }

    pub fn targets(&self) -> &[usize] {
        &self.qubits[self.kind.n_controls().min(self.qubits.len())..]
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.kind == GateKind::Barrier {
            return Ok(());
        }
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::MalformedGate(format!(
                "{} takes {} qubits, got {}",
                self.kind.name(),
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q == 0 || q > n {
                return Err(Error::MalformedGate(format!("{}: qubit {q} outside 1..={n}", self.kind.name())));
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::MalformedGate(format!("{}: repeated qubit {q}", self.kind.name())));
            }
        }
        if let Some(a) = self.kind.angle() {
            if !a.is_finite() {
                return Err(Error::MalformedGate(format!("{}: non-finite angle", self.kind.name())));
            }
        }
        Ok(())
    }

    /// Dense local matrix over `qubits` (first listed qubit most significant).
    pub fn local_matrix(&self) -> Vec<C64> {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let controlled = |u: [C64; 4]| {
            let mut m = vec![ZERO; 16];
            m[0] = ONE;
            m[5] = ONE;
            m[10] = u[0];
            m[11] = u[1];
            m[14] = u[2];
            m[15] = u[3];
            m
        };
        match self.kind {
            GateKind::H => vec![s, s, s, -s],
            GateKind::Not => vec![ZERO, ONE, ONE, ZERO],
            GateKind::Rz(a) => {
                let half = a.to_radians() / 2.0;
                vec![C64::from_polar(1.0, -half), ZERO, ZERO, C64::from_polar(1.0, half)]
            }
            GateKind::Cnot => controlled([ZERO, ONE, ONE, ZERO]),
            GateKind::Cy => controlled([s, -s, s, s]),
            GateKind::CyDag => controlled([s, s, -s, s]),
            GateKind::Crz(a) => controlled([ONE, ZERO, ZERO, C64::from_polar(1.0, -a.to_radians())]),
            GateKind::Ccnot => {
                let mut m = identity(8);
                m[6 * 8 + 6] = ZERO;
                m[7 * 8 + 7] = ZERO;
                m[6 * 8 + 7] = ONE;
                m[7 * 8 + 6] = ONE;
                m
            }
            GateKind::Cswap => {
                let mut m = identity(8);
                m[5 * 8 + 5] = ZERO;
                m[6 * 8 + 6] = ZERO;
                m[5 * 8 + 6] = ONE;
                m[6 * 8 + 5] = ONE;
                m
            }
            GateKind::Barrier => vec![ONE],
        }
    }

    fn zero_based(&self) -> Vec<usize> {
        self.qubits.iter().map(|q| q - 1).collect()
    }
}

fn identity(d: usize) -> Vec<C64> {
    let mut m = vec![ZERO; d * d];
    (0..d).for_each(|i| m[i * d + i] = ONE);
    m
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        if let Some(a) = self.kind.angle() {
            write!(f, " {a}")?;
        }
        if let Some(l) = &self.label {
            write!(f, " # {l}")?;
        }
        Ok(())
    }
}

/// Full `2^n x 2^n` unitary of a gate.
pub fn gate_unitary(g: &Gate, n: usize) -> Result<Vec<C64>> {
    g.validate(n)?;
    let dim = 1 << n;
    let mut u = identity(dim);
    if g.kind == GateKind::Barrier {
        return Ok(u);
    }
    let local = g.local_matrix();
    let qs = g.zero_based();
    // apply to each column of the identity
    let mut col = vec![ZERO; dim];
    for c in 0..dim {
        col.iter_mut().enumerate().for_each(|(r, v)| *v = if r == c { ONE } else { ZERO });
        crate::linalg::apply_to_vector(&mut col, n, &local, &qs);
        for r in 0..dim {
            u[r * dim + c] = col[r];
        }
    }
    Ok(u)
}

/// Ordered gate list with register metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub first_register: Vec<usize>,
    pub second_register: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), first_register: Vec::new(), second_register: Vec::new() }
    }

    pub fn shor_layout() -> Self {
        Circuit {
            n_qubits: SHOR_QUBITS,
            gates: Vec::new(),
            first_register: FIRST_REGISTER.to_vec(),
            second_register: SECOND_REGISTER.to_vec(),
        }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn extend(&mut self, other: &Circuit) -> &mut Self {
        self.gates.extend(other.gates.iter().cloned());
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.n_qubits))
    }

    /// Gates excluding barriers.
    pub fn gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind != GateKind::Barrier).count()
    }

    /// Two-qubit-interaction cost: one per controlled single-target gate,
    /// five per Toffoli, seven per Fredkin.
    pub fn interaction_cost(&self) -> usize {
        self.gates
            .iter()
            .map(|g| match g.kind.arity() {
                2 => 1,
                3 if g.kind == GateKind::Ccnot => 5,
                3 => 7,
                _ => 0,
            })
            .sum()
    }

    pub fn find(&self, label: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.label.as_deref() == Some(label))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# qubits {}\n", self.n_qubits);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the line format `KIND q1 [q2 [q3]] [angle_deg]` with `#` comments.
    /// A trailing single-word comment is kept as the gate label.
    pub fn parse(text: &str) -> Result<Circuit> {
        let mut n_declared = None;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let (body, comment) = match raw.find('#') {
                Some(i) => (&raw[..i], Some(raw[i + 1..].trim())),
                None => (raw, None),
            };
            let body = body.trim();
            if body.is_empty() {
                if let Some(rest) = comment.and_then(|c| c.strip_prefix("qubits")) {
                    let n = rest.trim().parse().map_err(|_| Error::CircuitParse {
                        line,
                        msg: format!("bad qubit count `{}`", rest.trim()),
                    })?;
                    n_declared = Some(n);
                }
                continue;
            }
            let mut toks = body.split_whitespace();
            let kind_tok = toks.next().unwrap_or_default();
            let args: Vec<&str> = toks.collect();
            let err = |msg: String| Error::CircuitParse { line, msg };
            let placeholder = match kind_tok.to_ascii_uppercase().as_str() {
                "H" => GateKind::H,
                "NOT" | "X" => GateKind::Not,
                "CNOT" => GateKind::Cnot,
                "CY" => GateKind::Cy,
                "CY_DAG" => GateKind::CyDag,
                "CRZ" => GateKind::Crz(0.0),
                "CCNOT" => GateKind::Ccnot,
                "CSWAP" => GateKind::Cswap,
                "RZ" => GateKind::Rz(0.0),
                "BARRIER" => GateKind::Barrier,
                other => return Err(err(format!("unknown gate kind `{other}`"))),
            };
            let arity = placeholder.arity();
            let wants_angle = placeholder.angle().is_some();
            let expected = arity + usize::from(wants_angle);
            if placeholder != GateKind::Barrier && args.len() != expected {
                return Err(err(format!("{kind_tok} expects {expected} arguments, got {}", args.len())));
            }
            let qubits = args[..arity.min(args.len())]
                .iter()
                .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad qubit `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            let kind = if wants_angle {
                let a: f64 = args[arity].parse().map_err(|_| err(format!("bad angle `{}`", args[arity])))?;
                match placeholder {
                    GateKind::Crz(_) => GateKind::Crz(a),
                    _ => GateKind::Rz(a),
                }
            } else {
                placeholder
            };
            let mut g = Gate::new(kind, &qubits);
            if let Some(c) = comment.filter(|c| !c.is_empty() && !c.contains(char::is_whitespace)) {
                g.label = Some(c.to_string());
            }
            gates.push(g);
        }
        let n = n_declared.unwrap_or_else(|| gates.iter().flat_map(|g| g.qubits.iter().copied()).max().unwrap_or(1));
        let mut c = Circuit::new(n);
        if n == SHOR_QUBITS {
            c.first_register = FIRST_REGISTER.to_vec();
            c.second_register = SECOND_REGISTER.to_vec();
        }
        c.gates = gates;
        c.validate()?;
        Ok(c)
    }
}

/// Checks that `a` is a usable base for N = 15.
pub fn validate_base(a: u64) -> Result<()> {
    if (2..N_FACTOR).contains(&a) && crate::postproc::gcd(a, N_FACTOR) == 1 {
        Ok(())
    } else {
        Err(Error::InvalidBase(a))
    }
}

/// `a^x mod n` by repeated squaring.
pub fn mod_exp_oracle(a: u64, x: u64, n: u64) -> u64 {
    let n128 = n as u128;
    let (mut base, mut e, mut acc) = ((a as u128) % n128, x, 1u128 % n128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % n128;
        }
        base = base * base % n128;
        e >>= 1;
    }
    acc as u64
}

/// Second-register qubit holding bit `k` of `y` (`y0` is qubit 7).
fn y_qubit(k: u32) -> usize {
    7 - k as usize
}

/// Modular exponentiation `|x>|1> -> |x>|a^x mod 15>` for N = 15.
///
/// The `x0`-controlled multiplication of `y = 1` becomes a controlled XOR with
/// `a xor 1`; when `a^2 = 4 (mod 15)` the `x1`-controlled multiplication by 4
/// is the pair of controlled swaps `(y1 y3)` and `(y0 y2)`, each built from a
/// Toffoli between two CNOTs. With `labeled` the gates carry the names A-H.
pub fn build_mod_exp_circuit(a: u64, labeled: bool) -> Result<Circuit> {
    validate_base(a)?;
    let mut c = Circuit::shor_layout();
    let flips: Vec<usize> = (0..4u32).rev().filter(|k| (a ^ 1) >> k & 1 == 1).map(y_qubit).collect();
    let names: Vec<String> = if flips.len() == 2 {
        vec!["A".into(), "B".into()]
    } else {
        (1..=flips.len()).map(|i| format!("A{i}")).collect()
    };
    for (q, name) in flips.iter().zip(&names) {
        let g = Gate::cnot(3, *q);
        c.push(if labeled { g.labeled(name) } else { g });
    }
    let a2 = mod_exp_oracle(a, 2, N_FACTOR);
    if a2 == 4 {
        let stage = [
            (Gate::cnot(4, 6), "C"),
            (Gate::ccnot(2, 6, 4), "D"),
            (Gate::cnot(4, 6), "E"),
            (Gate::cnot(7, 5), "F"),
            (Gate::ccnot(2, 5, 7), "G"),
            (Gate::cnot(7, 5), "H"),
        ];
        for (g, name) in stage {
            c.push(if labeled { g.labeled(name) } else { g });
        }
    } else if a2 != 1 {
        return Err(Error::InvalidBase(a));
    }
    Ok(c)
}

/// Inverse QFT on `qubits`, listed most significant input bit first, without
/// the final bit-reversal swaps: the result is read with the last listed
/// qubit as the most significant bit.
pub fn build_inverse_qft_on(n_qubits: usize, qubits: &[usize]) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    let rev: Vec<usize> = qubits.iter().rev().copied().collect();
    let n = rev.len();
    for j in (0..n).rev() {
        for k in (j + 1..n).rev() {
            let angle = 360.0 / f64::from(1u32 << (k - j + 1));
            c.push(Gate::crz(rev[k], rev[j], angle));
        }
        c.push(Gate::h(rev[j]));
    }
    c
}

pub fn build_inverse_qft(n: usize) -> Circuit {
    let qubits: Vec<usize> = (1..=n).collect();
    build_inverse_qft_on(n, &qubits)
}

/// Hadamards on the first register, modular exponentiation, inverse QFT.
pub fn build_shor_circuit(a: u64) -> Result<Circuit> {
    let mut c = Circuit::shor_layout();
    for q in FIRST_REGISTER {
        c.push(Gate::h(q));
    }
    c.push(Gate::new(GateKind::Barrier, &[]));
    c.extend(&build_mod_exp_circuit(a, true)?);
    c.push(Gate::new(GateKind::Barrier, &[]));
    c.extend(&build_inverse_qft_on(SHOR_QUBITS, &FIRST_REGISTER));
    Ok(c)
}

/// Basis index of `|0000001>`.
pub fn shor_input_index() -> usize {
    1
}

pub fn apply_circuit_to_state(psi: &StateVector, c: &Circuit) -> Result<StateVector> {
    check_dims(psi.n_qubits(), c)?;
    let mut out = psi.clone();
    for g in c.gates.iter().filter(|g| g.kind != GateKind::Barrier) {
        out.apply(&g.local_matrix(), &g.zero_based());
    }
    Ok(out)
}

pub fn apply_circuit_to_density(rho: &DensityMatrix, c: &Circuit) -> Result<DensityMatrix> {
    check_dims(rho.n_qubits(), c)?;
    let mut out = rho.clone();
    for g in c.gates.iter().filter(|g| g.kind != GateKind::Barrier) {
        out.conjugate(&g.local_matrix(), &g.zero_based());
    }
    Ok(out)
}

fn check_dims(n: usize, c: &Circuit) -> Result<()> {
    if n != c.n_qubits {
        return Err(Error::DimensionMismatch { expected: c.n_qubits, got: n });
    }
    c.validate()
}

/// Distribution of the first register read with qubit 3 as the most
/// significant bit, as produced by the inverse QFT.
pub fn first_register_distribution(rho: &DensityMatrix) -> [f64; 8] {
    let reduced = rho.reduced(&[2, 1, 0]);
    let mut p = [0.0; 8];
    for (y, v) in p.iter_mut().enumerate() {
        *v = reduced.get(y, y).re;
    }
    p
}

/// Bit-reverses an `n`-bit integer; used to re-index QFT outputs.
pub fn bit_reverse(v: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, i| (acc << 1) | ((v >> i) & 1))
}

#[allow(dead_code)]
pub(crate) fn degrees(rad: f64) -> f64 {
    rad * 180.0 / PI
}
