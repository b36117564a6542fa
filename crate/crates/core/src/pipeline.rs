//! End-to-end order-finding run: preparation, algorithm, readout and
//! classical post-processing.

use serde::Serialize;

use crate::channels::SpinModel;
use crate::circuit::{self, apply_circuit_to_density, Circuit, N_FACTOR};
use crate::compiler::{self, OptimizationReport, PulseProgram, StateFacts};
use crate::error::{Error, Result};
use crate::postproc::{self, FactorReport};
use crate::prep::{self, PrepMode};
use crate::readout::{self, Acquisition, QubitReading, Spectrum};
use crate::spinsys::{thermal_state, DensityMatrix, MoleculeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    #[default]
    Gate,
    Pulse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub a: u64,
    pub molecule: MoleculeSpec,
    pub decoherence: bool,
    pub level: Level,
    pub prep: PrepMode,
    pub acquisition: Acquisition,
    /// Apply the peephole optimizer before execution.
    pub optimize: bool,
    /// Multiplies every T2 of the molecule.
    pub t2_scale: f64,
    /// Simulate in a frame where chemical shifts evolve (and must be refocused).
    pub off_resonance: bool,
    /// Recorded in the summary; the pipeline itself is deterministic.
    pub seed: u64,
}

impl RunConfig {
    pub fn new(a: u64, molecule: MoleculeSpec) -> Self {
        RunConfig {
            a,
            molecule,
            decoherence: false,
            level: Level::Gate,
            prep: PrepMode::Ideal,
            acquisition: Acquisition::default(),
            optimize: true,
            t2_scale: 1.0,
            off_resonance: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        circuit::validate_base(self.a).map_err(|_| Error::Config {
            field: "a",
            msg: format!("{} must lie in 2..={} and be coprime to {N_FACTOR}", self.a, N_FACTOR - 1),
        })?;
        if self.molecule.n_spins() != circuit::SHOR_QUBITS {
            return Err(Error::Config {
                field: "molecule",
                msg: format!("needs {} spins, has {}", circuit::SHOR_QUBITS, self.molecule.n_spins()),
            });
        }
        if !(self.t2_scale > 0.0) || !self.t2_scale.is_finite() {
            return Err(Error::Config { field: "t2_scale", msg: format!("must be positive, got {}", self.t2_scale) });
        }
        self.effective_molecule().validate().map_err(|e| Error::Config { field: "molecule", msg: e.to_string() })?;
        if self.decoherence && self.level == Level::Gate && self.prep != PrepMode::PulseLowered {
            return Err(Error::Config {
                field: "decoherence",
                msg: "gate-level execution has no timing; use the pulse level".into(),
            });
        }
        let acq = &self.acquisition;
        if !(acq.duration_s > 0.0) || acq.zero_fill == 0 || acq.dt_s.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::Config { field: "acquisition", msg: "duration, dt and zero fill must be positive".into() });
        }
        Ok(())
    }

    /// Molecule with the T2 scaling applied.
    pub fn effective_molecule(&self) -> MoleculeSpec {
        if self.t2_scale == 1.0 {
            self.molecule.clone()
        } else {
            self.molecule.with_t2_scaled(self.t2_scale)
        }
    }

    pub fn model(&self) -> Result<SpinModel> {
        let mol = self.effective_molecule();
        let frame = if self.off_resonance { vec![0.0; mol.n_spins()] } else { mol.on_resonance_frame() };
        SpinModel::new(&mol, &frame, self.decoherence)
    }
}

/// Intermediate products handed to the caller as soon as they exist.
pub enum Artifact<'a> {
    Circuit(&'a Circuit),
    Pulses(&'a PulseProgram),
    Spectrum(&'a Spectrum),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub a: u64,
    pub n: u64,
    pub level: Level,
    pub decoherence: bool,
    pub prep_mode: String,
    pub prep_experiments: usize,
    pub optimized: bool,
    pub t2_scale: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub gate_count: usize,
    pub qubits: Vec<QubitReading>,
    pub y_support: Vec<u64>,
    pub r: Option<u64>,
    pub factors: Vec<u64>,
    pub status: postproc::FactorStatus,
    pub message: String,
    pub total_duration_s: f64,
    pub n_pulses: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: Summary,
    pub report: FactorReport,
    pub circuit: Circuit,
    pub optimization: Option<OptimizationReport>,
    pub program: Option<PulseProgram>,
    pub spectra: Vec<Spectrum>,
    pub final_state: DensityMatrix,
}

pub fn prep_mode_name(m: PrepMode) -> &'static str {
    match m {
        PrepMode::Ideal => "ideal",
        PrepMode::Simulated => "simulated",
        PrepMode::PulseLowered => "pulse-lowered",
    }
}

/// The circuit that is executed: the full order-finding circuit, optimized
/// for the input `|0000001>` when requested.
pub fn algorithm_circuit(a: u64, optimize: bool) -> Result<(Circuit, Option<OptimizationReport>)> {
    let c = circuit::build_shor_circuit(a)?;
    if optimize {
        let (o, rep) = compiler::peephole_optimize(&c, &StateFacts::shor_input())?;
        Ok((o, Some(rep)))
    } else {
        Ok((c, None))
    }
}

/// Thermal state and effective pure ground state used for calibration.
pub struct References {
    pub thermal: DensityMatrix,
    pub ground: DensityMatrix,
}

pub fn prepare(cfg: &RunConfig, model: &SpinModel) -> Result<References> {
    let mol = cfg.effective_molecule();
    let prep_model = SpinModel { decoherence: cfg.decoherence, ..model.clone() };
    Ok(References { thermal: thermal_state(&mol)?, ground: prep::ground_reference(&mol, cfg.prep, Some(&prep_model))? })
}

/// Runs the pipeline, passing intermediate artifacts to `sink`.
pub fn run_shor_with(cfg: &RunConfig, sink: &mut dyn FnMut(Artifact<'_>) -> Result<()>) -> Result<RunOutput> {
    cfg.validate()?;
    let mol = cfg.effective_molecule();
    let model = cfg.model().map_err(|e| e.at("model"))?;

    let refs = prepare(cfg, &model).map_err(|e| e.at("prep"))?;
    let rho1 = prep::not_last(&refs.ground);
    let epsilon = prep::fit_effective_pure(&rho1, circuit::shor_input_index()).epsilon;

    let (circ, optimization) = algorithm_circuit(cfg.a, cfg.optimize).map_err(|e| e.at("compile"))?;
    sink(Artifact::Circuit(&circ))?;

    let (final_state, program) = match cfg.level {
        Level::Gate => (apply_circuit_to_density(&rho1, &circ).map_err(|e| e.at("execute"))?, None),
        Level::Pulse => {
            let prog = compiler::compile_to_pulses(&circ, &mol, model.has_offsets()).map_err(|e| e.at("compile"))?;
            sink(Artifact::Pulses(&prog))?;
            let out = compiler::execute_program(&prog, &model, &rho1).map_err(|e| e.at("execute"))?;
            (out, Some(prog))
        }
    };

    let spins: Vec<usize> = circuit::FIRST_REGISTER.iter().map(|q| q - 1).collect();
    let cal = readout::calibrate(&refs.thermal, &refs.ground, &model, &cfg.acquisition, &spins)
        .map_err(|e| e.at("readout"))?;
    let mut spectra = Vec::new();
    let mut readings = Vec::new();
    for &s in &spins {
        let sp = readout::acquire(&final_state, &model, s, &cfg.acquisition, cal.phase_deg[s]).map_err(|e| e.at("readout"))?;
        sink(Artifact::Spectrum(&sp))?;
        readings.push(readout::classify_qubit(&sp, &cal).map_err(|e| e.at("readout"))?);
        spectra.push(sp);
    }
    let classes: Vec<_> = readings.iter().map(|r| r.class).collect();
    let support = readout::estimate_register(&classes);
    let report = postproc::report_from_support(cfg.a, N_FACTOR, &support, 3);

    let stats = program.as_ref().map(PulseProgram::stats).unwrap_or_default();
    let summary = Summary {
        a: cfg.a,
        n: N_FACTOR,
        level: cfg.level,
        decoherence: cfg.decoherence,
        prep_mode: prep_mode_name(cfg.prep).into(),
        prep_experiments: (1 << mol.n_spins()) - 1,
        optimized: cfg.optimize,
        t2_scale: cfg.t2_scale,
        seed: cfg.seed,
        epsilon,
        gate_count: circ.gate_count(),
        qubits: readings,
        y_support: report.y_support.clone(),
        r: report.r,
        factors: report.factors.clone(),
        status: report.status,
        message: report.message.clone(),
        total_duration_s: stats.total_duration_s,
        n_pulses: stats.n_pulses,
    };
    Ok(RunOutput { summary, report, circuit: circ, optimization, program, spectra, final_state })
}

pub fn run_shor(cfg: &RunConfig) -> Result<RunOutput> {
    run_shor_with(cfg, &mut |_| Ok(()))
}

/// Spectra of every spin for the thermal state or the effective pure ground state.
pub fn reference_spectra(cfg: &RunConfig, pure: bool) -> Result<Vec<Spectrum>> {
    let model = cfg.model()?;
    let refs = prepare(&RunConfig { decoherence: cfg.decoherence, ..cfg.clone() }, &model)?;
    let state = if pure { &refs.ground } else { &refs.thermal };
    (0..model.mol.n_spins())
        .map(|s| {
            let th = readout::acquire(&refs.thermal, &model, s, &cfg.acquisition, 0.0)?;
            let phase = th.complex_integral().arg().to_degrees();
            readout::acquire(state, &model, s, &cfg.acquisition, phase)
        })
        .collect()
}

/// Averages the spectrum into `bins` equal frequency bins.
pub fn binned(sp: &Spectrum, bins: usize) -> Vec<(f64, f64, f64)> {
    let len = sp.amplitudes.len();
    let bins = bins.clamp(1, len);
    (0..bins)
        .map(|b| {
            let (lo, hi) = (b * len / bins, ((b + 1) * len / bins).max(b * len / bins + 1));
            let k = (hi - lo) as f64;
            let f = sp.freq_axis_hz[lo..hi].iter().sum::<f64>() / k;
            let re = sp.amplitudes[lo..hi].iter().map(|a| a.re).sum::<f64>() / k;
            let im = sp.amplitudes[lo..hi].iter().map(|a| a.im).sum::<f64>() / k;
            (f, re, im)
        })
        .collect()
}

/// Delimited text with a `freq_hz,real,imag` header.
pub fn spectrum_csv(sp: &Spectrum) -> String {
    let mut s = String::from("freq_hz,real,imag\n");
    for (f, a) in sp.freq_axis_hz.iter().zip(&sp.amplitudes) {
        s.push_str(&format!("{f},{},{}\n", a.re, a.im));
    }
    s
}
