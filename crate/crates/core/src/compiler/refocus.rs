//! Refocusing of unwanted couplings and chemical shifts during delays.
//!
//! Each spin follows a Walsh sign pattern over `2^m` equal segments, with a
//! 180 degree pulse wherever its sign changes. A coupling between spins with
//! different patterns averages to zero; spins joined by an active coupling
//! share a pattern so that coupling acts for the full delay. Only patterns
//! with an even number of sign changes are used, which keeps every schedule
//! time-symmetric with an even number of pulses per spin.

use std::collections::BTreeSet;

use super::pulses::{Axis, PulseEvent, PulseProgram};
use crate::error::{Error, Result};
use crate::spinsys::MoleculeSpec;

/// Walsh rows on `2^m` segments with an even number of sign changes, ordered
/// by that number (the first row is constant).
pub fn even_walsh_rows(m: u32) -> Vec<Vec<i8>> {
    let len = 1usize << m;
    let mut rows: Vec<(usize, Vec<i8>)> = (0..len)
        .map(|h| {
            let row: Vec<i8> = (0..len).map(|s| if (h & s).count_ones() % 2 == 0 { 1 } else { -1 }).collect();
            let changes = row.windows(2).filter(|w| w[0] != w[1]).count();
            (changes, row)
        })
        .filter(|(c, _)| c % 2 == 0)
        .collect();
    rows.sort_by_key(|(c, _)| *c);
    rows.into_iter().map(|(_, r)| r).collect()
}

/// Groups spins into classes that must share a sign pattern.
fn coupling_classes(n: usize, active: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(i, j) in active {
        if i >= n || j >= n {
            return Err(Error::SpinOutOfRange { spin: i.max(j), n });
        }
        if i == j {
            return Err(Error::InfeasibleRefocusing(format!("self pair ({})", i + 1)));
        }
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        parent[a] = b;
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for s in 0..n {
        let r = find(&mut parent, s);
        match root_of[r] {
            Some(k) => classes[k].push(s),
            None => {
                root_of[r] = Some(classes.len());
                classes.push(vec![s]);
            }
        }
    }
    let set: BTreeSet<(usize, usize)> = active.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    for class in &classes {
        for (a, &i) in class.iter().enumerate() {
            for &j in &class[a + 1..] {
                if !set.contains(&(i, j)) {
                    return Err(Error::InfeasibleRefocusing(format!(
                        "spins {} and {} are linked through active couplings but ({}, {}) is not active",
                        i + 1,
                        j + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
    }
    Ok(classes)
}

/// Sign pattern for every spin of an `n`-spin system during a delay that keeps
/// only the couplings in `active`. With `refocus_offsets` no spin may keep the
/// constant pattern.
pub fn walsh_assignment(n: usize, active: &[(usize, usize)], refocus_offsets: bool) -> Result<Vec<Vec<i8>>> {
    let mut classes = coupling_classes(n, active)?;
    // larger classes take the patterns with fewer pulses
    classes.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let skip = usize::from(refocus_offsets);
    let needed = classes.len() + skip;
    let mut m = 1u32;
    while (1usize << (m - 1)) < needed {
        m += 1;
    }
    let rows = even_walsh_rows(m);
    let mut out = vec![Vec::new(); n];
    for (k, class) in classes.iter().enumerate() {
        for &s in class {
            out[s] = rows[k + skip].clone();
        }
    }
    Ok(out)
}

/// Expands one delay into segments separated by 180 degree pulses.
pub fn refocusing_schedule(
    duration_s: f64,
    active: &[(usize, usize)],
    mol: &MoleculeSpec,
    refocus_offsets: bool,
) -> Result<Vec<PulseEvent>> {
    if !(duration_s >= 0.0) {
        return Err(Error::NegativeTime(duration_s));
    }
    if duration_s == 0.0 {
        return Ok(Vec::new());
    }
    let n = mol.n_spins();
    for &(i, j) in active {
        if i < n && j < n && mol.coupling(i, j) == 0.0 {
            return Err(Error::MissingCoupling(i + 1, j + 1));
        }
    }
    let patterns = walsh_assignment(n, active, refocus_offsets)?;
    let segments = patterns[0].len();
    let seg = duration_s / segments as f64;
    let mut flips = vec![0usize; n];
    let mut events = Vec::new();
    let mut pending = 0usize;
    for s in 0..segments {
        pending += 1;
        let last = s + 1 == segments;
        let toggles: Vec<usize> = if last { vec![] } else { (0..n).filter(|&k| patterns[k][s] != patterns[k][s + 1]).collect() };
        if last || !toggles.is_empty() {
            events.push(PulseEvent::Delay { duration_s: seg * pending as f64, active: active.to_vec() });
            pending = 0;
        }
        for k in toggles {
            let axis = if flips[k] % 2 == 0 { Axis::PlusX } else { Axis::MinusX };
            flips[k] += 1;
            events.push(PulseEvent::Pulse(super::pulses::Pulse {
                spin: k,
                angle_deg: 180.0,
                axis,
                duration_s: mol.pulse_180_s,
            }));
        }
    }
    Ok(events)
}

/// Replaces every delay in `p` by its refocused schedule.
pub fn refocus_program(p: &PulseProgram, mol: &MoleculeSpec, refocus_offsets: bool) -> Result<PulseProgram> {
    let mut out = PulseProgram::new(p.n_spins);
    for e in &p.events {
        match e {
            PulseEvent::Delay { duration_s, active } => {
                for r in refocusing_schedule(*duration_s, active, mol, refocus_offsets)? {
                    out.push(r);
                }
            }
            other => out.push(other.clone()),
        }
    }
    Ok(out)
}
