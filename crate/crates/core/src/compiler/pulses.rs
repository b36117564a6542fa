//! Pulse alphabet and pulse programs.
//!
//! Spin indices are 0-based in memory and 1-based in the text format.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::PlusX => "+x",
            Axis::MinusX => "-x",
            Axis::PlusY => "+y",
            Axis::MinusY => "-y",
        }
    }

    /// Unit vector of the rotation axis in the transverse plane.
    fn direction(&self) -> (f64, f64) {
        match self {
            Axis::PlusX => (1.0, 0.0),
            Axis::MinusX => (-1.0, 0.0),
            Axis::PlusY => (0.0, 1.0),
            Axis::MinusY => (0.0, -1.0),
        }
    }

    pub fn opposite(&self) -> Axis {
        match self {
            Axis::PlusX => Axis::MinusX,
            Axis::MinusX => Axis::PlusX,
            Axis::PlusY => Axis::MinusY,
            Axis::MinusY => Axis::PlusY,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "+x" | "x" => Ok(Axis::PlusX),
            "-x" => Ok(Axis::MinusX),
            "+y" | "y" => Ok(Axis::PlusY),
            "-y" => Ok(Axis::MinusY),
            other => Err(Error::UnsupportedPulse(format!("unknown axis `{other}`"))),
        }
    }
}

/// Spin-selective rotation `exp(-i angle I_axis)` preceded by free
/// precession for `duration_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub spin: usize,
    pub angle_deg: f64,
    pub axis: Axis,
    pub duration_s: f64,
}

impl Pulse {
    pub fn unitary(&self) -> Result<Mat2> {
        if !self.angle_deg.is_finite() {
            return Err(Error::UnsupportedPulse(format!("non-finite angle {}", self.angle_deg)));
        }
        if !(self.duration_s >= 0.0) {
            return Err(Error::NegativeTime(self.duration_s));
        }
        let half = self.angle_deg.to_radians() / 2.0;
        let (c, s) = (half.cos(), half.sin());
        let (nx, ny) = self.axis.direction();
        // cos(h) I - i sin(h) (nx X + ny Y)
        let off_01 = C64::new(-s * ny, -s * nx);
        let off_10 = C64::new(s * ny, -s * nx);
        Ok([[C64::new(c, 0.0), off_01], [off_10, C64::new(c, 0.0)]])
    }
}

/// `exp(-i angle Z / 2)` on one spin.
pub fn rz(angle_deg: f64) -> Mat2 {
    let half = angle_deg.to_radians() / 2.0;
    [[C64::from_polar(1.0, -half), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::from_polar(1.0, half)]]
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseEvent {
    Pulse(Pulse),
    /// Free evolution; `active` lists the couplings meant to act (i < j).
    Delay { duration_s: f64, active: Vec<(usize, usize)> },
    /// Zero-time z rotation of the spin's reference frame.
    FrameRotation { spin: usize, angle_deg: f64 },
    Acquire { spin: usize },
}

impl PulseEvent {
    pub fn duration(&self) -> f64 {
        match self {
            PulseEvent::Pulse(p) => p.duration_s,
            PulseEvent::Delay { duration_s, .. } => *duration_s,
            _ => 0.0,
        }
    }
}

impl fmt::Display for PulseEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseEvent::Pulse(p) => write!(f, "PULSE {} {} {} {}", p.spin + 1, p.angle_deg, p.axis, p.duration_s),
            PulseEvent::Delay { duration_s, active } => {
                write!(f, "DELAY {duration_s}")?;
                if !active.is_empty() {
                    let pairs: Vec<String> = active.iter().map(|(i, j)| format!("{}-{}", i + 1, j + 1)).collect();
                    write!(f, " {}", pairs.join(","))?;
                }
                Ok(())
            }
            PulseEvent::FrameRotation { spin, angle_deg } => write!(f, "FRAME {} {angle_deg}", spin + 1),
            PulseEvent::Acquire { spin } => write!(f, "ACQUIRE {}", spin + 1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProgramStats {
    pub n_pulses: usize,
    pub n_90: usize,
    pub n_180: usize,
    pub n_delays: usize,
    pub n_frame_rotations: usize,
    pub total_duration_s: f64,
}

/// Ordered event list for an `n_spins` molecule with the accumulated frame
/// angle of every spin.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProgram {
    pub n_spins: usize,
    pub events: Vec<PulseEvent>,
    pub frame_phase: Vec<f64>,
}

impl PulseProgram {
    pub fn new(n_spins: usize) -> Self {
        PulseProgram { n_spins, events: Vec::new(), frame_phase: vec![0.0; n_spins] }
    }

    pub fn push(&mut self, e: PulseEvent) {
        if let PulseEvent::FrameRotation { spin, angle_deg } = e {
            if let Some(p) = self.frame_phase.get_mut(spin) {
                *p = (*p + angle_deg).rem_euclid(360.0);
            }
        }
        self.events.push(e);
    }

    pub fn pulse(&mut self, spin: usize, angle_deg: f64, axis: Axis, duration_s: f64) {
        self.push(PulseEvent::Pulse(Pulse { spin, angle_deg, axis, duration_s }));
    }

    pub fn delay(&mut self, duration_s: f64, active: Vec<(usize, usize)>) {
        self.push(PulseEvent::Delay { duration_s, active });
    }

    pub fn frame(&mut self, spin: usize, angle_deg: f64) {
        if angle_deg != 0.0 {
            self.push(PulseEvent::FrameRotation { spin, angle_deg });
        }
    }

    pub fn append(&mut self, other: &PulseProgram) {
        for e in &other.events {
            self.push(e.clone());
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.events.iter().map(PulseEvent::duration).sum()
    }

    pub fn stats(&self) -> ProgramStats {
        let mut s = ProgramStats { total_duration_s: self.total_duration(), ..Default::default() };
        for e in &self.events {
            match e {
                PulseEvent::Pulse(p) => {
                    s.n_pulses += 1;
                    let a = p.angle_deg.abs();
                    if (a - 90.0).abs() < 1e-9 {
                        s.n_90 += 1;
                    } else if (a - 180.0).abs() < 1e-9 {
                        s.n_180 += 1;
                    }
                }
                PulseEvent::Delay { .. } => s.n_delays += 1,
                PulseEvent::FrameRotation { .. } => s.n_frame_rotations += 1,
                PulseEvent::Acquire { .. } => {}
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let spin_ok = |s: usize| {
            if s < self.n_spins {
                Ok(())
            } else {
                Err(Error::SpinOutOfRange { spin: s, n: self.n_spins })
            }
        };
        for e in &self.events {
            match e {
                PulseEvent::Pulse(p) => {
                    spin_ok(p.spin)?;
                    p.unitary()?;
                }
                PulseEvent::Delay { duration_s, active } => {
                    if !(*duration_s >= 0.0) || !duration_s.is_finite() {
                        return Err(Error::NegativeTime(*duration_s));
                    }
                    for &(i, j) in active {
                        spin_ok(i)?;
                        spin_ok(j)?;
                    }
                }
                PulseEvent::FrameRotation { spin, angle_deg } => {
                    spin_ok(*spin)?;
                    if !angle_deg.is_finite() {
                        return Err(Error::UnsupportedPulse("non-finite frame angle".into()));
                    }
                }
                PulseEvent::Acquire { spin } => spin_ok(*spin)?,
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# spins {}\n", self.n_spins);
        for e in &self.events {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<PulseProgram> {
        let mut n_declared: Option<usize> = None;
        let mut events = Vec::new();
        let mut max_spin = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let err = |msg: String| Error::PulseParse { line, msg };
            let (body, comment) = match raw.find('#') {
                Some(i) => (raw[..i].trim(), Some(raw[i + 1..].trim())),
                None => (raw.trim(), None),
            };
            if body.is_empty() {
                if let Some(rest) = comment.and_then(|c| c.strip_prefix("spins")) {
                    n_declared = Some(rest.trim().parse().map_err(|_| err(format!("bad spin count `{}`", rest.trim())))?);
                }
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            let num = |t: &str| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`")));
            let mut spin = |t: &str| -> Result<usize> {
                let s: usize = t.parse().map_err(|_| err(format!("bad spin `{t}`")))?;
                if s == 0 {
                    return Err(err("spins are numbered from 1".into()));
                }
                max_spin = max_spin.max(s);
                Ok(s - 1)
            };
            let arity = |n: usize| {
                if toks.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("{} expects {} fields, got {}", toks[0], n - 1, toks.len() - 1)))
                }
            };
            let ev = match toks[0].to_ascii_uppercase().as_str() {
                "PULSE" => {
                    arity(5)?;
                    let axis: Axis = toks[3].parse().map_err(|_| err(format!("bad axis `{}`", toks[3])))?;
                    PulseEvent::Pulse(Pulse { spin: spin(toks[1])?, angle_deg: num(toks[2])?, axis, duration_s: num(toks[4])? })
                }
                "DELAY" => {
                    if toks.len() != 2 && toks.len() != 3 {
                        return Err(err("DELAY expects a duration and optional pairs".into()));
                    }
                    let mut active = Vec::new();
                    if let Some(list) = toks.get(2) {
                        for p in list.split(',') {
                            let (a, b) = p.split_once('-').ok_or_else(|| err(format!("bad pair `{p}`")))?;
                            let (a, b) = (spin(a)?, spin(b)?);
                            active.push((a.min(b), a.max(b)));
                        }
                    }
                    PulseEvent::Delay { duration_s: num(toks[1])?, active }
                }
                "FRAME" => {
                    arity(3)?;
                    PulseEvent::FrameRotation { spin: spin(toks[1])?, angle_deg: num(toks[2])? }
                }
                "ACQUIRE" => {
                    arity(2)?;
                    PulseEvent::Acquire { spin: spin(toks[1])? }
                }
                other => return Err(err(format!("unknown event `{other}`"))),
            };
            events.push(ev);
        }
        let mut p = PulseProgram::new(n_declared.unwrap_or(max_spin));
        for e in events {
            p.push(e);
        }
        p.validate()?;
        Ok(p)
    }
}
