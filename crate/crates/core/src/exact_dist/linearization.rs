use serde::Serialize;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::simplex_linalg::fisher_constant;

use super::atoms::pair_masses;
use super::histogram::convolve;
use super::{check_cap, Composition, HistogramLaw, DEFAULT_ATOM_CAP};

/// Which finite-n proportion feeds the score direction `s_n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum PiConvention {
    /// `k / (n - 1)`: the proportion among the other `n - 1` users.
    #[default]
    LeaveOneOut,
    /// `k / n`, for sensitivity checks.
    Plain,
}

impl PiConvention {
    pub fn pi(self, comp: Composition) -> f64 {
        match self {
            PiConvention::LeaveOneOut if comp.n > 1 => comp.k as f64 / (comp.n - 1) as f64,
            PiConvention::LeaveOneOut => 0.0,
            PiConvention::Plain => comp.pi(),
        }
    }
}

fn check_histogram(ch: &Channel, comp: Composition, h: &[u32]) -> Result<()> {
    if h.len() != ch.d() {
        return Err(Error::validation(format!(
            "histogram has {} entries, channel alphabet has {}",
            h.len(),
            ch.d()
        )));
    }
    let total: u64 = h.iter().map(|&c| c as u64).sum();
    if total != comp.n as u64 {
        return Err(Error::validation(format!(
            "histogram sums to {total}, expected n = {}",
            comp.n
        )));
    }
    Ok(())
}

/// `(P(N), Q(N))` from the law of the other `n - 1` users.
pub(crate) fn masses_at(ch: &Channel, rest: &HistogramLaw, h: &[u32]) -> (f64, f64) {
    let mut m = h.to_vec();
    let (mut p, mut q) = (0.0, 0.0);
    for y in 0..ch.d() {
        if m[y] == 0 {
            continue;
        }
        m[y] -= 1;
        let t = rest.prob(&m);
        m[y] += 1;
        p += ch.w0()[y] * t;
        q += ch.w1()[y] * t;
    }
    (p, q)
}

pub(crate) fn rest_law(ch: &Channel, comp: Composition) -> Result<HistogramLaw> {
    if comp.k >= comp.n {
        return Err(Error::validation(format!(
            "needs k <= n - 1 (got k = {}, n = {})",
            comp.k, comp.n
        )));
    }
    check_cap(comp.n, ch.d(), DEFAULT_ATOM_CAP)?;
    Ok(convolve(ch, comp.n - 1 - comp.k, comp.k))
}

/// `U = L(N) - 1 = E[r(Y*) | N]` at one histogram, via the law of the
/// remaining users.
pub fn conditional_score(ch: &Channel, comp: Composition, histogram: &[u32]) -> Result<f64> {
    check_histogram(ch, comp, histogram)?;
    let rest = rest_law(ch, comp)?;
    let (p, q) = masses_at(ch, &rest, histogram);
    if p <= 0.0 {
        return Err(Error::validation(format!(
            "histogram {histogram:?} lies outside the support of T_(n={}, k={})",
            comp.n, comp.k
        )));
    }
    Ok(q / p - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualSummary {
    pub n: usize,
    pub k: usize,
    pub pi_n: f64,
    /// `window_mult * sqrt(n log n)`
    pub window: f64,
    pub max_residual: f64,
    /// `P`-weighted RMS inside the window, normalized by the in-window mass.
    pub rms_residual: f64,
    pub outside_mass: f64,
}

/// Compares the exact conditional score with its linearization
/// `(1/n) s_n^T (N - E[N])` over the window `||N - E[N]||_inf <= w sqrt(n log n)`.
pub fn linearization_residual(
    ch: &Channel,
    comp: Composition,
    window_mult: f64,
    convention: PiConvention,
) -> Result<ResidualSummary> {
    ch.require_full("linearization_residual")?;
    if !(window_mult > 0.0) || !window_mult.is_finite() {
        return Err(Error::validation(format!(
            "window multiplier must be positive, got {window_mult}"
        )));
    }
    let rest = rest_law(ch, comp)?;
    let Composition { n, k } = comp;
    let pi_n = convention.pi(comp);
    let s = fisher_constant(ch, pi_n)?.s_pi;
    let mean: Vec<f64> = ch
        .w0()
        .iter()
        .zip(ch.w1())
        .map(|(a, b)| (n - k) as f64 * a + k as f64 * b)
        .collect();
    let window = window_mult * (n as f64 * (n as f64).ln()).sqrt();

    let (mut max_residual, mut sq, mut inside, mut outside) = (0.0f64, 0.0, 0.0, 0.0);
    for (h, (p, q)) in pair_masses(ch, &rest) {
        if p <= 0.0 {
            continue;
        }
        let dev: Vec<f64> = h.iter().zip(&mean).map(|(&c, m)| c as f64 - m).collect();
        if dev.iter().any(|x| x.abs() > window) {
            outside += p;
            continue;
        }
        let linear = s.iter().zip(&dev).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        let res = (q / p - 1.0 - linear).abs();
        max_residual = max_residual.max(res);
        sq += p * res * res;
        inside += p;
    }
    Ok(ResidualSummary {
        n,
        k,
        pi_n,
        window,
        max_residual,
        rms_residual: if inside > 0.0 {
            (sq / inside).sqrt()
        } else {
            0.0
        },
        outside_mass: outside,
    })
}
