//! Circuit optimization and lowering to pulse programs.

pub mod exec;
pub mod facts;
pub mod lower;
pub mod peephole;
pub mod pulses;
pub mod refocus;

pub use exec::{execute_program, execute_program_in_place, verify_lowering, verify_lowering_from};
pub use facts::{propagate_facts, Fact, StateFacts};
pub use lower::lower_to_pulses;
pub use peephole::{peephole_optimize, OptimizationReport, Rewrite, Rule};
pub use pulses::{Axis, ProgramStats, Pulse, PulseEvent, PulseProgram};
pub use refocus::{refocus_program, refocusing_schedule};

use crate::circuit::Circuit;
use crate::error::Result;
use crate::spinsys::MoleculeSpec;

/// Lowers `c` and refocuses every delay. Offsets are refocused when
/// `refocus_offsets` is set (needed when simulating off resonance).
pub fn compile_to_pulses(c: &Circuit, mol: &MoleculeSpec, refocus_offsets: bool) -> Result<PulseProgram> {
    let raw = lower_to_pulses(c, mol)?;
    refocus_program(&raw, mol, refocus_offsets)
}
