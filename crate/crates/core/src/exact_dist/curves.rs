use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::Result;

use super::atoms::{binary_lr, binary_ratios, binomial_ln_pmf};
use super::{check_eps_grid, LrAtomization, LOG_SPACE_SWITCHOVER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sidedness {
    /// `sup_A Q(A) - e^eps P(A)`
    OneSidedQOverP,
    /// `sup_A P(A) - e^eps Q(A)`
    OneSidedPOverQ,
    /// pointwise max of the two one-sided curves
    TwoSided,
}

/// `(epsilon, delta)` pairs on an ascending epsilon grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrivacyCurve {
    pub points: Vec<(f64, f64)>,
    pub sidedness: Sidedness,
}

impl PrivacyCurve {
    pub fn deltas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Smallest grid epsilon whose delta does not exceed `target`.
    pub fn epsilon_for(&self, target: f64) -> Option<f64> {
        self.points.iter().find(|p| p.1 <= target).map(|p| p.0)
    }

    fn from_deltas(
        eps_grid: &[f64],
        deltas: impl IntoIterator<Item = f64>,
        sidedness: Sidedness,
    ) -> Self {
        let mut running = 1.0f64;
        let points = eps_grid
            .iter()
            .zip(deltas)
            .map(|(&e, d)| {
                // clamp to [0,1]; the running min only absorbs round-off
                running = running.min(d.clamp(0.0, 1.0));
                (e, running)
            })
            .collect();
        PrivacyCurve { points, sidedness }
    }
}

/// `E_P[(L - e^eps)_+]` plus any `Q`-mass on `P`-null histograms.
fn one_sided(atoms: &LrAtomization, eps: f64) -> f64 {
    let t = eps.exp();
    // atoms sorted ascending: walk from the top
    let mut acc = atoms.q_null;
    for a in atoms.atoms.iter().rev() {
        if a.l <= t {
            break;
        }
        acc += a.q - t * a.p;
    }
    acc
}

/// Exact hockey-stick curve of the atomized experiment.
pub fn privacy_curve(
    atoms: &LrAtomization,
    eps_grid: &[f64],
    sidedness: Sidedness,
) -> Result<PrivacyCurve> {
    check_eps_grid(eps_grid)?;
    let reversed = match sidedness {
        Sidedness::OneSidedQOverP => None,
        _ => Some(atoms.reversed()),
    };
    let deltas = eps_grid.iter().map(|&e| match (sidedness, &reversed) {
        (Sidedness::OneSidedQOverP, _) => one_sided(atoms, e),
        (Sidedness::OneSidedPOverQ, Some(r)) => one_sided(r, e),
        (Sidedness::TwoSided, Some(r)) => one_sided(atoms, e).max(one_sided(r, e)),
        _ => unreachable!(),
    });
    Ok(PrivacyCurve::from_deltas(eps_grid, deltas, sidedness))
}

/// Canonical one-sided curve `delta_{T_{n,1} || T_{n,0}}` of a binary-output
/// channel straight from the binomial sum, in log space for large `n`.
pub fn binomial_curve(ch: &Channel, n: usize, eps_grid: &[f64]) -> Result<PrivacyCurve> {
    check_eps_grid(eps_grid)?;
    let ln_pmf = binomial_ln_pmf(ch, n)?;
    let (w0, w1) = binary_ratios(ch);
    let lrs: Vec<f64> = (0..=n).map(|k| binary_lr(n, k, w0, w1)).collect();
    let deltas = eps_grid.iter().map(|&e| {
        let t = e.exp();
        if n > LOG_SPACE_SWITCHOVER {
            let logs: Vec<f64> = lrs
                .iter()
                .zip(&ln_pmf)
                .filter(|(l, _)| **l > t)
                .map(|(l, lp)| lp + (l - t).ln())
                .collect();
            log_sum_exp(&logs).exp()
        } else {
            lrs.iter()
                .zip(&ln_pmf)
                .map(|(l, lp)| if *l > t { lp.exp() * (l - t) } else { 0.0 })
                .sum()
        }
    });
    Ok(PrivacyCurve::from_deltas(
        eps_grid,
        deltas,
        Sidedness::OneSidedQOverP,
    ))
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
