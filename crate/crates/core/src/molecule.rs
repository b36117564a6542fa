//! Molecule description files.
//!
//! ```toml
//! temperature_k = 303.15
//! pulse_90_s = 0.0005     # optional
//! pulse_180_s = 0.001     # optional
//!
//! [[spins]]
//! label = "F1"
//! offset_hz = -22052.0
//! larmor_hz = 469977948.0
//! t1_s = 60.0
//! t2_s = 1.2
//!
//! [[j_hz]]
//! i = 1
//! j = 2
//! value = -221.0
//! ```
//!
//! Spins are numbered from 1 in `j_hz`. Pairs may be listed once in either
//! order; listing both orders with different values is an error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spinsys::MoleculeSpec;

const SAMPLE: &str = include_str!("../data/sample_molecule.toml");

#[derive(Debug, Deserialize, Serialize)]
struct SpinEntry {
    label: Option<String>,
    offset_hz: Option<f64>,
    larmor_hz: Option<f64>,
    t1_s: Option<f64>,
    t2_s: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct CouplingEntry {
    i: Option<usize>,
    j: Option<usize>,
    value: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MoleculeFile {
    spins: Option<Vec<SpinEntry>>,
    #[serde(default)]
    j_hz: Vec<CouplingEntry>,
    temperature_k: Option<f64>,
    pulse_90_s: Option<f64>,
    pulse_180_s: Option<f64>,
}

fn required<T: Copy>(v: Option<T>, name: impl FnOnce() -> String) -> Result<T> {
    v.ok_or_else(|| Error::MissingField(name()))
}

/// Parses and validates a molecule description.
pub fn parse_molecule(text: &str) -> Result<MoleculeSpec> {
    let file: MoleculeFile = toml::from_str(text).map_err(|e| Error::MoleculeParse(e.message().to_string()))?;
    let spins = file.spins.ok_or_else(|| Error::MissingField("spins".into()))?;
    if spins.is_empty() {
        return Err(Error::NoSpins);
    }
    let n = spins.len();
    let mut mol = MoleculeSpec {
        labels: Vec::with_capacity(n),
        offset_hz: Vec::with_capacity(n),
        larmor_hz: Vec::with_capacity(n),
        j_hz: vec![vec![0.0; n]; n],
        t1_s: Vec::with_capacity(n),
        t2_s: Vec::with_capacity(n),
        temperature_k: required(file.temperature_k, || "temperature_k".into())?,
        pulse_90_s: file.pulse_90_s.unwrap_or(0.0),
        pulse_180_s: file.pulse_180_s.unwrap_or(0.0),
    };
    for (k, s) in spins.iter().enumerate() {
        let field = |f: &str| format!("spins[{}].{f}", k + 1);
        mol.labels.push(s.label.clone().unwrap_or_else(|| format!("S{}", k + 1)));
        mol.offset_hz.push(required(s.offset_hz, || field("offset_hz"))?);
        mol.larmor_hz.push(required(s.larmor_hz, || field("larmor_hz"))?);
        mol.t1_s.push(required(s.t1_s, || field("t1_s"))?);
        mol.t2_s.push(required(s.t2_s, || field("t2_s"))?);
    }
    let mut seen = vec![vec![false; n]; n];
    for (k, c) in file.j_hz.iter().enumerate() {
        let field = |f: &str| format!("j_hz[{}].{f}", k + 1);
        let (i, j) = (required(c.i, || field("i"))?, required(c.j, || field("j"))?);
        let value = required(c.value, || field("value"))?;
        for q in [i, j] {
            if q == 0 || q > n {
                return Err(Error::SpinOutOfRange { spin: q, n });
            }
        }
        if i == j {
            return Err(Error::SelfCoupling(i));
        }
        let (a, b) = (i - 1, j - 1);
        if seen[a][b] && mol.j_hz[a][b] != value {
            let (lo, hi) = (i.min(j), i.max(j));
            return Err(Error::AsymmetricCoupling { i: lo, j: hi, a: mol.j_hz[a][b], b: value });
        }
        seen[a][b] = true;
        seen[b][a] = true;
        mol.j_hz[a][b] = value;
        mol.j_hz[b][a] = value;
    }
    mol.validate()?;
    Ok(mol)
}

pub fn load_molecule(path: &Path) -> Result<MoleculeSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MoleculeParse(format!("cannot read {}: {e}", path.display())))?;
    parse_molecule(&text)
}

/// The bundled seven-spin example (five 19F, two 13C). Its values are
/// illustrative, chosen to resemble a perfluorobutadienyl complex.
pub fn sample_molecule() -> MoleculeSpec {
    parse_molecule(SAMPLE).expect("bundled sample molecule is valid")
}

pub fn sample_molecule_text() -> &'static str {
    SAMPLE
}

/// Serializes `mol` in the file format (upper-triangular couplings).
pub fn to_toml(mol: &MoleculeSpec) -> String {
    let n = mol.n_spins();
    let file = MoleculeFile {
        spins: Some(
            (0..n)
                .map(|k| SpinEntry {
                    label: Some(mol.labels[k].clone()),
                    offset_hz: Some(mol.offset_hz[k]),
                    larmor_hz: Some(mol.larmor_hz[k]),
                    t1_s: Some(mol.t1_s[k]),
                    t2_s: Some(mol.t2_s[k]),
                })
                .collect(),
        ),
        j_hz: (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| mol.j_hz[i][j] != 0.0)
            .map(|(i, j)| CouplingEntry { i: Some(i + 1), j: Some(j + 1), value: Some(mol.j_hz[i][j]) })
            .collect(),
        temperature_k: Some(mol.temperature_k),
        pulse_90_s: Some(mol.pulse_90_s),
        pulse_180_s: Some(mol.pulse_180_s),
    };
    toml::to_string(&file).expect("molecule serializes")
}
