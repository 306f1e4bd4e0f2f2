//! Exact finite-n laws of the shuffled histogram and everything derived from
//! them: likelihood-ratio atoms, privacy and trade-off curves, divergences,
//! and the linearization residual of the conditional score.

mod atoms;
mod curves;
mod divergence;
mod histogram;
mod linearization;
mod tradeoff;

pub use atoms::{binomial_atoms, lr_atoms, lr_atoms_capped, LrAtom, LrAtomization};
pub use curves::{binomial_curve, privacy_curve, PrivacyCurve, Sidedness};
pub use divergence::{divergences, jsd_pointwise, DivergenceReport};
pub use histogram::{histogram_law, histogram_law_capped, HistogramLaw};
pub use linearization::{conditional_score, linearization_residual, PiConvention, ResidualSummary};
pub(crate) use linearization::{masses_at, rest_law};
pub use tradeoff::{tradeoff_curve, TradeoffCurve};

use serde::Serialize;

use crate::error::{Error, Result};

/// Default cap on the number of histogram atoms an exact computation may touch.
pub const DEFAULT_ATOM_CAP: f64 = 5e6;

/// Binary-output canonical computations switch to log-space weights above this n.
pub const LOG_SPACE_SWITCHOVER: usize = 150;

/// A dataset profile: `n` users, `k` of whom hold input 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Composition {
    pub n: usize,
    pub k: usize,
}

impl Composition {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("composition needs n >= 1"));
        }
        if k > n {
            return Err(Error::validation(format!(
                "composition has k = {k} > n = {n}"
            )));
        }
        Ok(Composition { n, k })
    }

    pub fn pi(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

/// Number of histograms of `n` items over `d` symbols, `C(n+d-1, d-1)`.
pub fn atom_count(n: usize, d: usize) -> f64 {
    (1..d).fold(1.0, |acc, j| acc * (n + j) as f64 / j as f64)
}

pub(crate) fn check_cap(n: usize, d: usize, cap: f64) -> Result<()> {
    let atoms = atom_count(n, d);
    if atoms > cap {
        return Err(Error::CapExceeded { atoms, cap });
    }
    Ok(())
}

pub fn check_eps_grid(eps_grid: &[f64]) -> Result<()> {
    if let Some(e) = eps_grid.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
        return Err(Error::validation(format!(
            "epsilon must be finite and >= 0, got {e}"
        )));
    }
    if eps_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::validation("epsilon grid must be sorted ascending"));
    }
    Ok(())
}

/// `log C(n, k)`, free of the cancellation in `lgamma` differences.
pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k.min(n));
    if k == 0 {
        return 0.0;
    }
    if k <= 30 {
        return (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum();
    }
    let (nf, kf, rf) = (n as f64, k as f64, (n - k) as f64);
    stirling_error(n) - stirling_error(k) - stirling_error(n - k)
        + 0.5 * (nf / (2.0 * std::f64::consts::PI * kf * rf)).ln()
        + kf * (nf / kf).ln()
        - rf * (-kf / nf).ln_1p()
}

/// `ln m! - ((m + 1/2) ln m - m + ln(2 pi) / 2)`
fn stirling_error(m: u64) -> f64 {
    let x = m as f64;
    if m <= 15 {
        let ln_fact: f64 = (2..=m).map(|i| i as f64).product::<f64>().ln();
        return ln_fact - ((x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln());
    }
    let x2 = x * x;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x
}
