//! Forward propagation of classical knowledge about each qubit.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

/// What is known about a qubit's computational-basis value.
///
/// `Basis` means the value is a deterministic function of the superposed
/// (`Unknown`) qubits, so every branch of the state holds it in `|0>` or `|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fact {
    Zero,
    One,
    Basis,
    Unknown,
}

impl Fact {
    pub fn is_classical(self) -> bool {
        self != Fact::Unknown
    }

    fn flip(self) -> Fact {
        match self {
            Fact::Zero => Fact::One,
            Fact::One => Fact::Zero,
            f => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateFacts {
    /// Indexed by qubit - 1.
    pub qubits: Vec<Fact>,
    pub measured_register: Vec<usize>,
}

impl StateFacts {
    /// Facts for a computational basis input (qubit 1 is the most significant bit).
    pub fn from_basis(n: usize, index: usize, measured: &[usize]) -> Self {
        let qubits = (0..n).map(|q| if (index >> (n - 1 - q)) & 1 == 1 { Fact::One } else { Fact::Zero }).collect();
        StateFacts { qubits, measured_register: measured.to_vec() }
    }

    pub fn unknown(n: usize, measured: &[usize]) -> Self {
        StateFacts { qubits: vec![Fact::Unknown; n], measured_register: measured.to_vec() }
    }

    /// Input facts for `|0000001>` with the first register measured.
    pub fn shor_input() -> Self {
        Self::from_basis(7, 1, &crate::circuit::FIRST_REGISTER)
    }

    pub fn get(&self, qubit: usize) -> Fact {
        self.qubits[qubit - 1]
    }

    fn set(&mut self, qubit: usize, f: Fact) {
        self.qubits[qubit - 1] = f;
    }

    /// A superposed qubit was rotated: values that were functions of it lose
    /// their classical status.
    fn scramble(&mut self) {
        for f in self.qubits.iter_mut() {
            if *f == Fact::Basis {
                *f = Fact::Unknown;
            }
        }
    }

    /// Updates the facts across one gate.
    pub fn step(&mut self, g: &Gate) {
        let q = &g.qubits;
        match g.kind {
            GateKind::Barrier => {}
            GateKind::Not => {
                let f = self.get(q[0]).flip();
                self.set(q[0], f);
            }
            GateKind::H => {
                if self.get(q[0]) == Fact::Unknown {
                    self.scramble();
                }
                self.set(q[0], Fact::Unknown);
            }
            GateKind::Rz(_) => {
                if self.get(q[0]) == Fact::Unknown {
                    self.scramble();
                }
            }
            GateKind::Crz(_) => {
                if q.iter().any(|&x| self.get(x) == Fact::Unknown) {
                    self.scramble();
                }
            }
            GateKind::Cy | GateKind::CyDag => {
                let (c, t) = (self.get(q[0]), self.get(q[1]));
                if c == Fact::Zero {
                    return;
                }
                if t == Fact::Unknown {
                    self.scramble();
                }
                self.set(q[1], Fact::Unknown);
            }
            GateKind::Cnot => {
                let (c, t) = (self.get(q[0]), self.get(q[1]));
                let out = match (c, t) {
                    (Fact::Zero, t) => t,
                    (Fact::One, t) => t.flip(),
                    (_, Fact::Unknown) => Fact::Unknown,
                    _ => Fact::Basis,
                };
                self.set(q[1], out);
            }
            GateKind::Ccnot => {
                let (a, b, t) = (self.get(q[0]), self.get(q[1]), self.get(q[2]));
                let out = if a == Fact::Zero || b == Fact::Zero {
                    t
                } else if a == Fact::One && b == Fact::One {
                    t.flip()
                } else if t == Fact::Unknown {
                    Fact::Unknown
                } else {
                    Fact::Basis
                };
                self.set(q[2], out);
            }
            GateKind::Cswap => {
                let (c, a, b) = (self.get(q[0]), self.get(q[1]), self.get(q[2]));
                match c {
                    Fact::Zero => {}
                    Fact::One => {
                        self.set(q[1], b);
                        self.set(q[2], a);
                    }
                    _ => {
                        let merge = |x: Fact, y: Fact| {
                            if x == y {
                                x
                            } else if x.is_classical() && y.is_classical() {
                                Fact::Basis
                            } else {
                                Fact::Unknown
                            }
                        };
                        self.set(q[1], merge(a, b));
                        self.set(q[2], merge(b, a));
                    }
                }
            }
        }
    }
}

/// Facts before every gate and after the last one (`gates.len() + 1` entries).
pub fn propagate_facts(c: &Circuit, input: &StateFacts) -> Result<Vec<StateFacts>> {
    if input.qubits.len() != c.n_qubits {
        return Err(Error::DimensionMismatch { expected: c.n_qubits, got: input.qubits.len() });
    }
    c.validate()?;
    let mut cur = input.clone();
    let mut out = Vec::with_capacity(c.gates.len() + 1);
    out.push(cur.clone());
    for g in &c.gates {
        cur.step(g);
        out.push(cur.clone());
    }
    Ok(out)
}
