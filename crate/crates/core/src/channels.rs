//! Finite-output local randomizers.
//!
//! A [`Channel`] is the pair of output laws `(W0, W1)` a user's randomizer
//! produces on private input 0 and 1. Symbols are the indices `0..d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs are accepted when each vector sums to 1 within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Entries below this (but nonzero) are legal and reported in
/// [`Channel::near_zero`].
pub const NEAR_ZERO: f64 = 1e-12;

/// Support class of a channel. Only exact zeros count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SupportClass {
    /// Every entry of both `W0` and `W1` is positive.
    Full,
    /// `W0` is positive everywhere but `W1` has a zero.
    NullSupport,
    /// Some `W0(y)` is zero.
    Singular,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    w0: Vec<f64>,
    w1: Vec<f64>,
    support: SupportClass,
    near_zero: Vec<usize>,
}

/// On-disk form: `{"d": int, "W0": [...], "W1": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelJson {
    pub d: usize,
    #[serde(rename = "W0")]
    pub w0: Vec<f64>,
    #[serde(rename = "W1")]
    pub w1: Vec<f64>,
}

fn check_prob_vector(name: &str, p: &[f64]) -> Result<Vec<f64>> {
    if let Some((i, x)) = p.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::validation(format!(
            "{name}[{i}] = {x} is not finite"
        )));
    }
    if let Some((i, x)) = p.iter().enumerate().find(|(_, x)| **x < 0.0) {
        return Err(Error::validation(format!("{name}[{i}] = {x} is negative")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::validation(format!(
            "{name} sums to {sum}, not 1 (tolerance {SUM_TOLERANCE})"
        )));
    }
    Ok(p.iter().map(|x| x / sum).collect())
}

impl Channel {
    /// Validates the pair of output laws and classifies the support.
    pub fn new(w0: &[f64], w1: &[f64]) -> Result<Self> {
        if w0.len() != w1.len() {
            return Err(Error::validation(format!(
                "W0 has {} entries but W1 has {}",
                w0.len(),
                w1.len()
            )));
        }
        if w0.len() < 2 {
            return Err(Error::validation("alphabet size d must be at least 2"));
        }
        let w0 = check_prob_vector("W0", w0)?;
        let w1 = check_prob_vector("W1", w1)?;

        let support = if w0.contains(&0.0) {
            SupportClass::Singular
        } else if w1.contains(&0.0) {
            SupportClass::NullSupport
        } else {
            SupportClass::Full
        };
        let near_zero = (0..w0.len())
            .filter(|&y| {
                let tiny = |x: f64| x > 0.0 && x < NEAR_ZERO;
                tiny(w0[y]) || tiny(w1[y])
            })
            .collect();
        Ok(Channel {
            w0,
            w1,
            support,
            near_zero,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ChannelJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            d: self.d(),
            w0: self.w0.clone(),
            w1: self.w1.clone(),
        }
    }

    pub fn d(&self) -> usize {
        self.w0.len()
    }

    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn support(&self) -> SupportClass {
        self.support
    }

    /// Symbols with a positive mass below [`NEAR_ZERO`] in either law.
    pub fn near_zero(&self) -> &[usize] {
        &self.near_zero
    }

    pub fn is_full(&self) -> bool {
        self.support == SupportClass::Full
    }

    /// `W1 - W0`.
    pub fn v(&self) -> Vec<f64> {
        self.w1.iter().zip(&self.w0).map(|(a, b)| a - b).collect()
    }

    /// True when `W0 == W1` exactly, i.e. the randomizer leaks nothing.
    pub fn is_identical(&self) -> bool {
        self.w0 == self.w1
    }

    /// If this is a binary randomized-response channel, its local epsilon.
    pub fn rr_epsilon(&self) -> Option<f64> {
        if self.d() != 2 || !self.is_full() {
            return None;
        }
        let (a, b) = (self.w0[0], self.w0[1]);
        let symmetric = (self.w1[0] - b).abs() < 1e-12 && (self.w1[1] - a).abs() < 1e-12;
        (symmetric && a >= b).then(|| (a / b).ln())
    }

    pub(crate) fn require_w0_positive(&self, op: &str) -> Result<()> {
        if self.support == SupportClass::Singular {
            return Err(Error::validation(format!(
                "{op} requires W0(y) > 0 for every symbol (channel is SINGULAR)"
            )));
        }
        Ok(())
    }

    pub(crate) fn require_full(&self, op: &str) -> Result<()> {
        if self.support != SupportClass::Full {
            return Err(Error::validation(format!(
                "{op} requires a FULL-support channel (got {:?})",
                self.support
            )));
        }
        Ok(())
    }
}

impl TryFrom<ChannelJson> for Channel {
    type Error = Error;

    fn try_from(raw: ChannelJson) -> Result<Self> {
        if raw.d != raw.w0.len() || raw.d != raw.w1.len() {
            return Err(Error::validation(format!(
                "declared d = {} but W0 has {} and W1 has {} entries",
                raw.d,
                raw.w0.len(),
                raw.w1.len()
            )));
        }
        Channel::new(&raw.w0, &raw.w1)
    }
}

/// Binary randomized response with local parameter `eps0`: the true bit is
/// reported with probability `e^eps0 / (1 + e^eps0)`.
pub fn rr_channel(eps0: f64) -> Result<Channel> {
    if !eps0.is_finite() || eps0 < 0.0 {
        return Err(Error::validation(format!(
            "eps0 must be finite and nonnegative, got {eps0}"
        )));
    }
    let q = 1.0 / (1.0 + eps0.exp());
    let keep = 1.0 / (1.0 + (-eps0).exp());
    Channel::new(&[keep, q], &[q, keep])
}

/// Per-symbol score statistics of a channel under `W0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreStats {
    /// `W1(y) / W0(y)`
    pub w: Vec<f64>,
    /// `w - 1`
    pub r: Vec<f64>,
    /// `W1 - W0`
    pub v: Vec<f64>,
    /// chi-square divergence of `W1` from `W0`.
    pub chi2: f64,
    /// third score moment `E_W0[r^3]`.
    pub mu3: f64,
    pub delta_star: f64,
    pub delta_full: f64,
    pub w_max: f64,
}

pub fn score_stats(ch: &Channel) -> Result<ScoreStats> {
    ch.require_w0_positive("score_stats")?;
    let w: Vec<f64> = ch.w1.iter().zip(&ch.w0).map(|(a, b)| a / b).collect();
    let r: Vec<f64> = w.iter().map(|x| x - 1.0).collect();
    let v = ch.v();
    let chi2 = v.iter().zip(&ch.w0).map(|(vy, p)| vy * vy / p).sum();
    let mu3 = r.iter().zip(&ch.w0).map(|(ry, p)| p * ry * ry * ry).sum();
    let delta_star = ch.w0.iter().cloned().fold(f64::INFINITY, f64::min);
    let delta_full = ch.w1.iter().cloned().fold(delta_star, f64::min);
    let w_max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ScoreStats {
        w,
        r,
        v,
        chi2,
        mu3,
        delta_star,
        delta_full,
        w_max,
    })
}
