//! Browser bindings: reference spectra, order-finding runs and relaxation
//! curves, each returned as a JSON string.

use serde_json::{json, Value};
use shor_nmr::channels::{apply_channel_on_spin, gad_kraus, pd_kraus};
use shor_nmr::linalg::C64;
use shor_nmr::molecule::sample_molecule;
use shor_nmr::pipeline::{binned, reference_spectra, run_shor};
use shor_nmr::readout::Spectrum;
use shor_nmr::spinsys::{DensityMatrix, StateVector};
use shor_nmr::{Level, RunConfig};
use wasm_bindgen::prelude::*;

fn series(sp: &Spectrum, bins: usize) -> Value {
    let b = binned(sp, bins);
    json!({
        "spin": sp.spin + 1,
        "freq_hz": b.iter().map(|p| p.0).collect::<Vec<_>>(),
        "real": b.iter().map(|p| p.1).collect::<Vec<_>>(),
    })
}

/// Thermal or effective pure spectrum of one spin (1-based) of the sample molecule.
pub fn reference_spectrum_json(spin: usize, pure: bool, bins: usize) -> Result<String, String> {
    let cfg = RunConfig::new(7, sample_molecule());
    let spectra = reference_spectra(&cfg, pure).map_err(|e| e.to_string())?;
    let sp = spin.checked_sub(1).and_then(|s| spectra.get(s)).ok_or(format!("no spin {spin}"))?;
    Ok(series(sp, bins).to_string())
}

/// Runs order finding for base `a` and returns the summary with binned
/// first-register spectra.
pub fn order_finding_json(a: u64, pulse: bool, decoherence: bool, t2_scale: f64, bins: usize) -> Result<String, String> {
    let mut cfg = RunConfig::new(a, sample_molecule());
    cfg.level = if pulse { Level::Pulse } else { Level::Gate };
    cfg.decoherence = decoherence;
    cfg.t2_scale = t2_scale;
    let out = run_shor(&cfg).map_err(|e| e.to_string())?;
    let circuit = out.circuit.to_text();
    let spectra: Vec<Value> = out.spectra.iter().map(|s| series(s, bins)).collect();
    Ok(json!({ "summary": out.summary, "circuit": circuit, "spectra": spectra }).to_string())
}

/// Excited-state population (starting from |1>) under damping and the
/// coherence of |+> under dephasing, sampled on `points` times in `[0, t_max]`.
pub fn channel_curves_json(t1: f64, t2: f64, polarization: f64, t_max: f64, points: usize) -> Result<String, String> {
    if points < 2 || !(t_max > 0.0) {
        return Err("need at least two points and a positive time span".into());
    }
    let excited = DensityMatrix::basis(1, 1);
    let s = C64::new(0.5f64.sqrt(), 0.0);
    let plus = DensityMatrix::from_pure(&StateVector::from_amplitudes(1, vec![s, s]).map_err(|e| e.to_string())?);
    let mut t = Vec::with_capacity(points);
    let mut population = Vec::with_capacity(points);
    let mut coherence = Vec::with_capacity(points);
    for k in 0..points {
        let time = t_max * k as f64 / (points - 1) as f64;
        let gad = gad_kraus(time, t1, polarization).map_err(|e| e.to_string())?;
        let pd = pd_kraus(time, t2).map_err(|e| e.to_string())?;
        let damped = apply_channel_on_spin(&excited, &gad, 0).map_err(|e| e.to_string())?;
        let dephased = apply_channel_on_spin(&plus, &pd, 0).map_err(|e| e.to_string())?;
        t.push(time);
        population.push(damped.get(1, 1).re);
        coherence.push(2.0 * dephased.get(0, 1).norm());
    }
    Ok(json!({ "t_s": t, "excited_population": population, "coherence": coherence }).to_string())
}

#[wasm_bindgen]
pub fn reference_spectrum(spin: usize, pure: bool, bins: usize) -> Result<String, JsError> {
    reference_spectrum_json(spin, pure, bins).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn order_finding(a: u32, pulse: bool, decoherence: bool, t2_scale: f64, bins: usize) -> Result<String, JsError> {
    order_finding_json(a as u64, pulse, decoherence, t2_scale, bins).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn channel_curves(t1: f64, t2: f64, polarization: f64, t_max: f64, points: usize) -> Result<String, JsError> {
    channel_curves_json(t1, t2, polarization, t_max, points).map_err(|e| JsError::new(&e))
}
