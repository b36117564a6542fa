//! Classical post-processing: period from the measured support, continued
//! fractions and factors from the period.

use serde::Serialize;

use crate::circuit::mod_exp_oracle;
use crate::error::{Error, Result};

/// Euclid's algorithm.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Period implied by an ensemble readout: the support is spaced by
/// `2^n / r`, so `r = 2^n / gcd(support)` (with `gcd({0}) = 2^n`).
pub fn period_from_support(support: &[u64], n_bits: u32) -> Result<u64> {
    let q = 1u64 << n_bits;
    if support.is_empty() || support.iter().any(|&y| y >= q) {
        return Err(Error::InvalidParameter(format!("support must be a non-empty subset of 0..{q}")));
    }
    let spacing = support.iter().fold(0, |g, &y| gcd(g, y));
    if spacing == 0 {
        return Err(Error::NoPeriodInformation);
    }
    Ok(q / gcd(spacing, q))
}

/// Continued-fraction convergents `(numerator, denominator)` of `c / q`.
pub fn convergents(c: u64, q: u64) -> Vec<(u64, u64)> {
    let (mut num, mut den) = (c, q);
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut out = Vec::new();
    while den != 0 {
        let a = num / den;
        (num, den) = (den, num % den);
        let (h, k) = (a * h1 + h0, a * k1 + k0);
        (h0, h1, k0, k1) = (h1, h, k1, k);
        out.push((h, k));
    }
    out
}

/// Largest convergent denominator of `c / q` not exceeding `n`.
pub fn continued_fraction_period(c: u64, q: u64, n: u64) -> Result<u64> {
    if q == 0 || c >= q {
        return Err(Error::InvalidParameter(format!("need 0 <= c < q, got c = {c}, q = {q}")));
    }
    if c == 0 {
        return Err(Error::NoPeriodInformation);
    }
    convergents(c, q).into_iter().map(|(_, k)| k).filter(|&k| k <= n).max().ok_or(Error::NoPeriodInformation)
}

/// Smallest `r > 0` with `a^r = 1 (mod n)`.
pub fn multiplicative_order(a: u64, n: u64) -> Option<u64> {
    if gcd(a, n) != 1 || n < 2 {
        return None;
    }
    (1..=n).find(|&r| mod_exp_oracle(a, r, n) == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorStatus {
    Success,
    TrivialFactor,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorReport {
    pub a: u64,
    pub n: u64,
    pub y_support: Vec<u64>,
    pub r: Option<u64>,
    pub factors: Vec<u64>,
    pub status: FactorStatus,
    pub message: String,
}

impl FactorReport {
    pub fn failed(a: u64, n: u64, y_support: Vec<u64>, r: Option<u64>, message: &str) -> Self {
        FactorReport { a, n, y_support, r, factors: vec![], status: FactorStatus::Failed, message: message.into() }
    }
}

/// `gcd(a^{r/2} +- 1, n)` with 1 and `n` filtered out.
pub fn factors_from_period(a: u64, r: u64, n: u64) -> FactorReport {
    let base = FactorReport::failed(a, n, vec![], Some(r), "");
    if r == 0 || r % 2 == 1 {
        return FactorReport { message: format!("period {r} is odd"), ..base };
    }
    let h = mod_exp_oracle(a, r / 2, n);
    if h == n - 1 {
        return FactorReport { message: format!("{a}^{} = -1 (mod {n})", r / 2), ..base };
    }
    let mut factors: Vec<u64> =
        [gcd((h + n - 1) % n, n), gcd((h + 1) % n, n)].into_iter().filter(|&f| f != 1 && f != n).collect();
    factors.sort_unstable();
    factors.dedup();
    if factors.is_empty() {
        return FactorReport { status: FactorStatus::TrivialFactor, message: "only trivial factors".into(), ..base };
    }
    FactorReport { factors, status: FactorStatus::Success, message: String::new(), ..base }
}

/// Full classical tail of the algorithm from a measured support.
pub fn report_from_support(a: u64, n: u64, support: &[u64], n_bits: u32) -> FactorReport {
    match period_from_support(support, n_bits) {
        Ok(r) => FactorReport { y_support: support.to_vec(), ..factors_from_period(a, r, n) },
        Err(e) => FactorReport::failed(a, n, support.to_vec(), None, &e.to_string()),
    }
}
