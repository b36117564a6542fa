//! Peephole optimization driven by classical knowledge of the input state.
//!
//! Four rules run in order:
//! 1. a gate with a control known to be `|0>` is removed;
//! 2. controls known to be `|1>` are dropped (CNOT becomes NOT);
//! 3. gates whose forward light cone misses the measured register are removed;
//! 4. a Toffoli whose target is in a basis state becomes `CY^dag, CZ^2, CY`.
//!
//! Rule 4 agrees with the Toffoli on every basis input up to a phase that
//! depends only on basis values, which leaves the measured register's
//! reduced state unchanged for the order-finding circuits.

use std::collections::BTreeSet;

use super::facts::{propagate_facts, Fact, StateFacts};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    DeadControl = 1,
    ConstantControl = 2,
    DeadGate = 3,
    BasisToffoli = 4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub rule: Rule,
    pub original: Gate,
    pub replacement: Vec<Gate>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptimizationReport {
    pub rewrites: Vec<Rewrite>,
}

impl OptimizationReport {
    /// The rewrite applied to the gate carrying `label`, if any.
    pub fn for_label(&self, label: &str) -> Option<&Rewrite> {
        self.rewrites.iter().find(|r| r.original.label.as_deref() == Some(label))
    }

    pub fn describe(&self) -> Vec<String> {
        self.rewrites
            .iter()
            .map(|r| {
                let name = r.original.label.clone().unwrap_or_else(|| r.original.to_string());
                match r.rule {
                    Rule::DeadControl => format!("{name}: control is |0>, removed"),
                    Rule::ConstantControl => format!("{name}: control is |1>, replaced by {}", join(&r.replacement)),
                    Rule::DeadGate => format!("{name}: cannot reach the measured register, removed"),
                    Rule::BasisToffoli => format!("{name}: target is a basis state, replaced by {}", join(&r.replacement)),
                }
            })
            .collect()
    }
}

fn join(gates: &[Gate]) -> String {
    let parts: Vec<String> =
        gates.iter().map(|g| g.to_string().split(" #").next().unwrap_or_default().to_string()).collect();
    parts.join("; ")
}

fn relabel(mut g: Gate, label: &Option<String>) -> Gate {
    g.label = label.clone();
    g
}

/// Specialized form of `g` when the controls listed in `ones` are `|1>`.
fn drop_one_controls(g: &Gate, ones: &[usize]) -> Option<Gate> {
    let q = &g.qubits;
    let out = match g.kind {
        GateKind::Cnot => Gate::not(q[1]),
        GateKind::Crz(a) => Gate::new(GateKind::Rz(a), &[q[1]]),
        GateKind::Ccnot => {
            let rest: Vec<usize> = q[..2].iter().copied().filter(|c| !ones.contains(c)).collect();
            match rest.as_slice() {
                [] => Gate::not(q[2]),
                [c] => Gate::cnot(*c, q[2]),
                _ => return None,
            }
        }
        _ => return None,
    };
    Some(relabel(out, &g.label))
}

fn rules_one_two(c: &Circuit, input: &StateFacts, report: &mut OptimizationReport) -> Circuit {
    let mut facts = input.clone();
    let mut out = Circuit { gates: Vec::new(), ..c.clone() };
    for g in &c.gates {
        let controls = g.controls();
        if controls.iter().any(|&q| facts.get(q) == Fact::Zero) {
            report.rewrites.push(Rewrite { rule: Rule::DeadControl, original: g.clone(), replacement: vec![] });
            continue;
        }
        let ones: Vec<usize> = controls.iter().copied().filter(|&q| facts.get(q) == Fact::One).collect();
        let g2 = if ones.is_empty() { None } else { drop_one_controls(g, &ones) };
        let emitted = match g2 {
            Some(n) => {
                report.rewrites.push(Rewrite { rule: Rule::ConstantControl, original: g.clone(), replacement: vec![n.clone()] });
                n
            }
            None => g.clone(),
        };
        facts.step(&emitted);
        out.gates.push(emitted);
    }
    out
}

/// True if nothing downstream of gate `i` can touch the measured register.
fn is_dead(gates: &[Gate], i: usize, measured: &[usize]) -> bool {
    if gates[i].kind == GateKind::Barrier {
        return false;
    }
    let mut cone: BTreeSet<usize> = gates[i].qubits.iter().copied().collect();
    for h in &gates[i + 1..] {
        if h.qubits.iter().any(|q| cone.contains(q)) {
            cone.extend(h.qubits.iter().copied());
        }
    }
    !cone.iter().any(|q| measured.contains(q))
}

fn rule_three(c: &Circuit, measured: &[usize], report: &mut OptimizationReport) -> Circuit {
    let mut out = Circuit { gates: Vec::new(), ..c.clone() };
    for (i, g) in c.gates.iter().enumerate() {
        if is_dead(&c.gates, i, measured) {
            report.rewrites.push(Rewrite { rule: Rule::DeadGate, original: g.clone(), replacement: vec![] });
        } else {
            out.gates.push(g.clone());
        }
    }
    out
}

/// `CY^dag(c1 -> t)`, `CZ^2(c2 -> t)`, `CY(c1 -> t)` in time order.
pub fn basis_toffoli_rewrite(g: &Gate) -> Vec<Gate> {
    let (c1, c2, t) = (g.qubits[0], g.qubits[1], g.qubits[2]);
    let tag = |s: &str| g.label.as_ref().map(|l| format!("{l}{s}"));
    vec![
        Gate { kind: GateKind::CyDag, qubits: vec![c1, t], label: tag("1") },
        Gate { kind: GateKind::Crz(180.0), qubits: vec![c2, t], label: tag("2") },
        Gate { kind: GateKind::Cy, qubits: vec![c1, t], label: tag("3") },
    ]
}

fn rule_four(c: &Circuit, input: &StateFacts, report: &mut OptimizationReport) -> Result<Circuit> {
    let facts = propagate_facts(c, input)?;
    let mut out = Circuit { gates: Vec::new(), ..c.clone() };
    for (g, f) in c.gates.iter().zip(&facts) {
        if g.kind == GateKind::Ccnot && f.get(g.qubits[2]).is_classical() {
            let rep = basis_toffoli_rewrite(g);
            report.rewrites.push(Rewrite { rule: Rule::BasisToffoli, original: g.clone(), replacement: rep.clone() });
            out.gates.extend(rep);
        } else {
            out.gates.push(g.clone());
        }
    }
    Ok(out)
}

/// Applies rules 1-4 to `c` for the input described by `input`.
pub fn peephole_optimize(c: &Circuit, input: &StateFacts) -> Result<(Circuit, OptimizationReport)> {
    if input.qubits.len() != c.n_qubits {
        return Err(Error::DimensionMismatch { expected: c.n_qubits, got: input.qubits.len() });
    }
    if let Some(&q) = input.measured_register.iter().find(|&&q| q == 0 || q > c.n_qubits) {
        return Err(Error::SpinOutOfRange { spin: q, n: c.n_qubits });
    }
    c.validate()?;
    let mut report = OptimizationReport::default();
    let c1 = rules_one_two(c, input, &mut report);
    let c2 = rule_three(&c1, &input.measured_register, &mut report);
    let c3 = rule_four(&c2, input, &mut report)?;
    Ok((c3, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{apply_circuit_to_state, build_shor_circuit, Gate};
    use crate::spinsys::StateVector;

    #[test]
    fn nothing_known_means_nothing_changes() {
        let c = build_shor_circuit(7).unwrap();
        let all = [1, 2, 3, 4, 5, 6, 7];
        let (out, report) = peephole_optimize(&c, &StateFacts::unknown(7, &all)).unwrap();
        assert_eq!(out, c);
        assert!(report.rewrites.is_empty());
    }

    #[test]
    fn rewrite_matches_toffoli_on_basis_inputs_up_to_phase() {
        let g = Gate::ccnot(1, 2, 3);
        let mut a = crate::circuit::Circuit::new(3);
        a.push(g.clone());
        let mut b = crate::circuit::Circuit::new(3);
        b.gates = basis_toffoli_rewrite(&g);
        for x in 0..8 {
            let psi = StateVector::basis(3, x);
            let (ua, ub) = (apply_circuit_to_state(&psi, &a).unwrap(), apply_circuit_to_state(&psi, &b).unwrap());
            assert!((ua.inner(&ub).norm() - 1.0).abs() < 1e-12, "input {x}");
        }
    }

    #[test]
    fn dead_gate_analysis_uses_forward_cone() {
        let mut c = crate::circuit::Circuit::new(3);
        c.push(Gate::cnot(2, 3)).push(Gate::h(1)).push(Gate::cnot(3, 2));
        let (out, _) = peephole_optimize(&c, &StateFacts::unknown(3, &[1])).unwrap();
        assert_eq!(out.gates, vec![Gate::h(1)]);
    }

    #[test]
    fn interaction_cost_never_increases() {
        for a in crate::circuit::VALID_BASES {
            let c = build_shor_circuit(a).unwrap();
            let (out, _) = peephole_optimize(&c, &StateFacts::shor_input()).unwrap();
            assert!(out.interaction_cost() <= c.interaction_cost());
        }
    }
}
