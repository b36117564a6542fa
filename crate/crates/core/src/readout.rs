//! Simulated NMR readout: readout pulse, free induction decay, spectrum and
//! per-qubit classification.
//!
//! The recorded signal of spin `s` is `tr(rho |1><0|_s)`, i.e. the sum of the
//! single-quantum coherences `rho[(r,0),(r,1)]` over the other spins' states
//! `r`. After a 90 degree `+y` pulse a spin in `|0>` gives `+1/2`. A partner
//! spin in `|0>` shifts the line by `-J/2`, one in `|1>` by `+J/2`.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::channels::{gad_kraus, pd_kraus, ChannelOrder, SpinModel};
use crate::compiler::{pulses::Pulse, Axis};
use crate::error::{Error, Result};
use crate::linalg::{bit_of, mask_of, C64, ZERO};
use crate::spinsys::DensityMatrix;

/// Acquisition parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    pub duration_s: f64,
    /// Sampling interval; chosen from the bandwidth when `None`.
    pub dt_s: Option<f64>,
    pub zero_fill: usize,
}

impl Default for Acquisition {
    fn default() -> Self {
        Acquisition { duration_s: 1.0, dt_s: None, zero_fill: 4 }
    }
}

/// Highest line frequency (magnitude) of `spin` in the model's frame.
pub fn bandwidth_hz(model: &SpinModel, spin: usize) -> f64 {
    let mol = &model.mol;
    let offset = (mol.offset_hz[spin] - model.frame_hz[spin]).abs();
    offset + (0..mol.n_spins()).map(|k| mol.j_hz[spin][k].abs() / 2.0).sum::<f64>()
}

/// Sampling interval with a 25% margin over the Nyquist limit.
pub fn auto_dt(model: &SpinModel, spin: usize) -> f64 {
    let b = bandwidth_hz(model, spin);
    if b == 0.0 {
        1e-3
    } else {
        1.0 / (2.5 * b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fid {
    pub spin: usize,
    pub dt_s: f64,
    pub samples: Vec<C64>,
}

/// Rotates `spin` by 90 degrees about `+y` without delay.
pub fn readout_pulse(rho: &DensityMatrix, spin: usize) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if spin >= n {
        return Err(Error::SpinOutOfRange { spin, n });
    }
    let u = Pulse { spin, angle_deg: 90.0, axis: Axis::PlusY, duration_s: 0.0 }.unitary()?;
    let mut out = rho.clone();
    out.conjugate_single(&u, spin);
    Ok(out)
}

/// Row and column of the coherence for partner configuration `r`.
fn coherence_index(r: usize, spin: usize, n: usize) -> (usize, usize) {
    let low = r & (mask_of(spin, n) - 1);
    let high = (r >> (n - 1 - spin)) << (n - spin);
    let a = high | low;
    (a, a | mask_of(spin, n))
}

/// Signal recorded from `rho` (no readout pulse).
pub fn transverse_signal(rho: &DensityMatrix, spin: usize) -> C64 {
    let n = rho.n_qubits();
    (0..1usize << (n - 1)).map(|r| coherence_index(r, spin, n)).map(|(a, b)| rho.get(a, b)).sum()
}

fn check_sampling(model: &SpinModel, spin: usize, duration_s: f64, dt_s: f64) -> Result<usize> {
    if !(dt_s > 0.0) || !(duration_s > 0.0) {
        return Err(Error::InvalidParameter(format!("need positive duration and dt, got {duration_s}, {dt_s}")));
    }
    let needed = bandwidth_hz(model, spin);
    if 1.0 / (2.0 * dt_s) <= needed {
        return Err(Error::Nyquist { rate_hz: 1.0 / dt_s, needed_hz: 2.0 * needed });
    }
    Ok(((duration_s / dt_s).round() as usize).max(2))
}

/// Applies the readout pulse to `spin` and samples the signal every `dt_s`
/// while the state evolves under the model's Hamiltonian and relaxation.
///
/// Only the coherences of the observed spin are propagated: that set is closed
/// under diagonal evolution and per-spin amplitude and phase damping.
pub fn simulate_fid(rho: &DensityMatrix, model: &SpinModel, spin: usize, duration_s: f64, dt_s: f64) -> Result<Fid> {
    let n = rho.n_qubits();
    if n != model.mol.n_spins() {
        return Err(Error::DimensionMismatch { expected: model.mol.n_spins(), got: n });
    }
    let len = check_sampling(model, spin, duration_s, dt_s)?;
    let tipped = readout_pulse(rho, spin)?;
    let m = 1usize << (n - 1);
    let idx: Vec<(usize, usize)> = (0..m).map(|r| coherence_index(r, spin, n)).collect();
    let mut c: Vec<C64> = idx.iter().map(|&(a, b)| tipped.get(a, b)).collect();
    let h = &model.h_full.diag;
    let phase: Vec<C64> = idx.iter().map(|&(a, b)| C64::from_polar(1.0, -(h[a] - h[b]) * dt_s)).collect();

    // per-spin restricted superoperators: partner k maps the (k=0, k=1) pair,
    // the observed spin scales its own coherence
    let mut steps: Vec<(usize, [[C64; 2]; 2])> = Vec::new();
    if model.decoherence {
        let mol = &model.mol;
        let mut gad = Vec::new();
        let mut pd = Vec::new();
        for k in 0..n {
            gad.push((k, gad_kraus(dt_s, mol.t1_s[k], mol.polarization(k))?.superoperator()));
            pd.push((k, pd_kraus(dt_s, mol.t2_s[k])?.superoperator()));
        }
        let blocks = match model.order {
            ChannelOrder::GadThenPd => gad.into_iter().chain(pd),
            ChannelOrder::PdThenGad => pd.into_iter().chain(gad),
        };
        for (k, s) in blocks {
            if k == spin {
                let leak = s[1][0].norm() + s[1][2].norm() + s[1][3].norm();
                debug_assert!(leak < 1e-14, "channel mixes the observed coherence");
                steps.push((k, [[s[1][1], ZERO], [ZERO, ZERO]]));
            } else {
                steps.push((k, [[s[0][0], s[0][3]], [s[3][0], s[3][3]]]));
            }
        }
    }
    let reduced_bit = |k: usize| -> usize {
        // position of partner k inside the (n-1)-bit configuration index
        let pos = if k < spin { k } else { k - 1 };
        1 << (n - 2 - pos)
    };

    let mut samples = Vec::with_capacity(len);
    for step in 0..len {
        samples.push(c.iter().sum());
        if step + 1 == len {
            break;
        }
        c.iter_mut().zip(&phase).for_each(|(x, p)| *x *= p);
        for (k, s) in &steps {
            if *k == spin {
                c.iter_mut().for_each(|x| *x *= s[0][0]);
                continue;
            }
            let bit = reduced_bit(*k);
            for r in (0..m).filter(|r| r & bit == 0) {
                let (x0, x1) = (c[r], c[r | bit]);
                c[r] = s[0][0] * x0 + s[0][1] * x1;
                c[r | bit] = s[1][0] * x0 + s[1][1] * x1;
            }
        }
    }
    Ok(Fid { spin, dt_s, samples })
}

/// Reference implementation stepping the full density matrix.
pub fn simulate_fid_full(rho: &DensityMatrix, model: &SpinModel, spin: usize, duration_s: f64, dt_s: f64) -> Result<Fid> {
    let len = check_sampling(model, spin, duration_s, dt_s)?;
    let mut cur = readout_pulse(rho, spin)?;
    let mut samples = Vec::with_capacity(len);
    for step in 0..len {
        samples.push(transverse_signal(&cur, spin));
        if step + 1 < len {
            model.delay_in_place(&mut cur, dt_s)?;
        }
    }
    Ok(Fid { spin, dt_s, samples })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub spin: usize,
    /// Frequencies relative to the spin's reference, strictly increasing.
    pub freq_axis_hz: Vec<f64>,
    pub amplitudes: Vec<C64>,
    pub phase_deg: f64,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.freq_axis_hz[1] - self.freq_axis_hz[0]
    }

    /// `sum Re(S) df`.
    pub fn real_integral(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.re).sum::<f64>() * self.bin_width()
    }

    pub fn complex_integral(&self) -> C64 {
        self.amplitudes.iter().sum::<C64>() * self.bin_width()
    }

    pub fn scaled(&self, k: f64) -> Spectrum {
        Spectrum { amplitudes: self.amplitudes.iter().map(|a| a * k).collect(), ..self.clone() }
    }

    /// Value of the real part at the bin nearest to `f`.
    pub fn real_at(&self, f: f64) -> f64 {
        let j = ((f - self.freq_axis_hz[0]) / self.bin_width()).round();
        let j = j.clamp(0.0, (self.amplitudes.len() - 1) as f64) as usize;
        self.amplitudes[j].re
    }

    /// Local extrema of the real part whose magnitude exceeds
    /// `rel_threshold` times the largest magnitude.
    pub fn peaks(&self, rel_threshold: f64) -> Vec<(f64, f64)> {
        let re: Vec<f64> = self.amplitudes.iter().map(|a| a.re).collect();
        let max = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return vec![];
        }
        (1..re.len() - 1)
            .filter(|&j| {
                let v = re[j];
                v.abs() >= rel_threshold * max
                    && ((v > 0.0 && v >= re[j - 1] && v > re[j + 1]) || (v < 0.0 && v <= re[j - 1] && v < re[j + 1]))
            })
            .map(|j| (self.freq_axis_hz[j], re[j]))
            .collect()
    }
}

/// Fourier transform of the FID with zero filling, first-point halving and a
/// zero-order phase correction `exp(-i phase)`.
pub fn spectrum(fid: &Fid, zero_fill: usize, phase_deg: f64) -> Spectrum {
    let len = fid.samples.len() * zero_fill.max(1);
    let mut buf = vec![ZERO; len];
    buf[..fid.samples.len()].copy_from_slice(&fid.samples);
    buf[0] *= 0.5;
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let rot = C64::from_polar(fid.dt_s, -phase_deg.to_radians());
    let half = len / 2;
    let df = 1.0 / (len as f64 * fid.dt_s);
    let freq_axis_hz = (0..len).map(|j| (j as f64 - half as f64) * df).collect();
    let amplitudes = (0..len).map(|j| buf[(j + len - half) % len] * rot).collect();
    Spectrum { spin: fid.spin, freq_axis_hz, amplitudes, phase_deg }
}

/// Spectrum of `spin` for the state `rho`.
pub fn acquire(rho: &DensityMatrix, model: &SpinModel, spin: usize, acq: &Acquisition, phase_deg: f64) -> Result<Spectrum> {
    let dt = acq.dt_s.unwrap_or_else(|| auto_dt(model, spin));
    let fid = simulate_fid(rho, model, spin, acq.duration_s, dt)?;
    Ok(spectrum(&fid, acq.zero_fill, phase_deg))
}

/// One multiplet component: frequency and the partner states producing it
/// (bit `k` set when partner `k` is `|1>`; the observed spin's bit is unused).
#[derive(Debug, Clone, PartialEq)]
pub struct LinePosition {
    pub freq_hz: f64,
    pub partner_states: Vec<usize>,
}

/// Frequencies `nu - sum_k J_k m_k` over all partner configurations, merged
/// when closer than `merge_hz`.
pub fn predicted_lines(model: &SpinModel, spin: usize, merge_hz: f64) -> Vec<LinePosition> {
    let mol = &model.mol;
    let n = mol.n_spins();
    let nu = mol.offset_hz[spin] - model.frame_hz[spin];
    let mut lines: Vec<LinePosition> = Vec::new();
    for cfg in 0..1usize << n {
        if bit_of(cfg, spin, n) == 1 {
            continue;
        }
        let f = nu
            - (0..n)
                .filter(|&k| k != spin)
                .map(|k| mol.j_hz[spin][k] * if bit_of(cfg, k, n) == 0 { 0.5 } else { -0.5 })
                .sum::<f64>();
        match lines.iter_mut().find(|l| (l.freq_hz - f).abs() < merge_hz) {
            Some(l) => l.partner_states.push(cfg),
            None => lines.push(LinePosition { freq_hz: f, partner_states: vec![cfg] }),
        }
    }
    lines.sort_by(|a, b| a.freq_hz.total_cmp(&b.freq_hz));
    lines
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitClass {
    Zero,
    One,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitReading {
    pub qubit: usize,
    pub class: QubitClass,
    pub s: f64,
    /// Signed line intensities `(frequency, real amplitude / reference peak)`
    /// for the peaks found in the spectrum.
    pub lines: Vec<(f64, f64)>,
}

pub const CLASS_THRESHOLD: f64 = 0.5;

pub fn class_of(s: f64) -> QubitClass {
    if s > CLASS_THRESHOLD {
        QubitClass::Zero
    } else if s < -CLASS_THRESHOLD {
        QubitClass::One
    } else {
        QubitClass::Mixed
    }
}

/// Per-spin phase and reference integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub phase_deg: Vec<f64>,
    pub reference_integral: Vec<f64>,
    pub reference_peak: Vec<f64>,
}

/// Phases from the thermal state (so its lines are positive absorption) and
/// normalization from the effective pure ground state.
pub fn calibrate(
    thermal: &DensityMatrix,
    pure_reference: &DensityMatrix,
    model: &SpinModel,
    acq: &Acquisition,
    spins: &[usize],
) -> Result<Calibration> {
    let n = model.mol.n_spins();
    let mut cal = Calibration { phase_deg: vec![0.0; n], reference_integral: vec![0.0; n], reference_peak: vec![0.0; n] };
    for &s in spins {
        let th = acquire(thermal, model, s, acq, 0.0)?;
        let phase = th.complex_integral().arg().to_degrees();
        let r = acquire(pure_reference, model, s, acq, phase)?;
        cal.phase_deg[s] = phase;
        cal.reference_integral[s] = r.real_integral();
        cal.reference_peak[s] = r.amplitudes.iter().fold(0.0f64, |m, a| m.max(a.re.abs()));
    }
    Ok(cal)
}

/// `s = integral / reference integral` and the resulting class.
pub fn classify_qubit(sp: &Spectrum, cal: &Calibration) -> Result<QubitReading> {
    let reference = *cal.reference_integral.get(sp.spin).ok_or(Error::Uncalibrated)?;
    if !(reference.abs() > 1e-300) || !reference.is_finite() {
        return Err(Error::Uncalibrated);
    }
    let s = sp.real_integral() / reference;
    let peak = cal.reference_peak[sp.spin];
    let lines = sp.peaks(0.2).into_iter().map(|(f, v)| (f, if peak > 0.0 { v / peak } else { v })).collect();
    Ok(QubitReading { qubit: sp.spin + 1, class: class_of(s), s, lines })
}

/// Values of `y` compatible with the classes of qubits 1, 2, 3, with qubit 3
/// as the most significant bit.
pub fn estimate_register(classes: &[QubitClass]) -> Vec<u64> {
    let mut support = vec![0u64];
    for (i, c) in classes.iter().enumerate() {
        let weight = 1u64 << i;
        let options: &[u64] = match c {
            QubitClass::Zero => &[0],
            QubitClass::One => &[1],
            QubitClass::Mixed => &[0, 1],
        };
        support = support.iter().flat_map(|y| options.iter().map(move |b| y + b * weight)).collect();
    }
    support.sort_unstable();
    support
}

/// Analytic single-line FID `A exp(i 2 pi nu t - t / T2)`.
pub fn analytic_fid(spin: usize, amplitude: f64, nu_hz: f64, t2_s: f64, dt_s: f64, len: usize) -> Fid {
    let samples = (0..len)
        .map(|k| {
            let t = k as f64 * dt_s;
            C64::from_polar(amplitude * (-t / t2_s).exp(), 2.0 * PI * nu_hz * t)
        })
        .collect();
    Fid { spin, dt_s, samples }
}
