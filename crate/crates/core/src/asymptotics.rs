//! Closed-form asymptotic quantities: the Gaussian-DP parameter and its
//! privacy curve, the Gaussian trade-off, and leading divergence constants.

use serde::Serialize;

use crate::channels::{score_stats, Channel};
use crate::error::{Error, Result};
use crate::normal::{phi, phi_inv};
use crate::simplex_linalg::fisher_constant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GdpSource {
    /// `sqrt(chi^2 / n)`
    Canonical,
    /// `sqrt(I_pi / n)`
    Proportional,
    /// `sqrt(m I_pi / n)`
    Unbundled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GdpParams {
    pub mu: f64,
    pub n: usize,
    pub pi: f64,
    pub m: usize,
    pub source: GdpSource,
}

/// `I_pi` for a full-support channel, with `I_0 = chi^2(W1 || W0)`.
pub fn fisher_i(ch: &Channel, pi: f64) -> Result<f64> {
    ch.require_full("Fisher constant")?;
    if pi == 0.0 {
        Ok(score_stats(ch)?.chi2)
    } else {
        Ok(fisher_constant(ch, pi)?.i_pi)
    }
}

/// `mu = sqrt(m I_pi / n)`; `I_0` is the chi-square divergence.
pub fn gdp_mu(ch: &Channel, n: usize, pi: f64, m: usize) -> Result<GdpParams> {
    ch.require_full("gdp_mu")?;
    if n == 0 || m == 0 {
        return Err(Error::validation("gdp_mu needs n >= 1 and m >= 1"));
    }
    let i_pi = fisher_i(ch, pi)?;
    let source = match (m, pi == 0.0) {
        (1, true) => GdpSource::Canonical,
        (1, false) => GdpSource::Proportional,
        _ => GdpSource::Unbundled,
    };
    Ok(GdpParams {
        mu: (m as f64 * i_pi / n as f64).sqrt(),
        n,
        pi,
        m,
        source,
    })
}

/// `delta_GDP(eps; mu) = Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2)`,
/// with the limit 0 at `mu = 0`.
pub fn gdp_delta(eps: f64, mu: f64) -> Result<f64> {
    if !(eps >= 0.0) || !(mu >= 0.0) {
        return Err(Error::validation(format!(
            "gdp_delta needs eps >= 0 and mu >= 0 (got eps = {eps}, mu = {mu})"
        )));
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    let a = phi(-eps / mu + mu / 2.0);
    let b = phi(-eps / mu - mu / 2.0);
    let d = if b == 0.0 { a } else { a - eps.exp() * b };
    Ok(d.clamp(0.0, 1.0))
}

/// Gaussian shift trade-off `beta = Phi(Phi^{-1}(1 - alpha) - mu)`.
pub fn gaussian_tradeoff(mu: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::validation(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    if !(mu >= 0.0) {
        return Err(Error::validation(format!("mu must be >= 0, got {mu}")));
    }
    if mu == 0.0 {
        return Ok(1.0 - alpha);
    }
    Ok(phi(phi_inv(1.0 - alpha) - mu).clamp(0.0, 1.0))
}

/// Asymptotic value against an (optional) exact one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub exact: Option<f64>,
    pub asymptotic: f64,
    pub terms: Vec<f64>,
    pub residual: Option<f64>,
}

/// Three-term expansion of `JSD(T_{n,0} || T_{n,1})`:
/// `chi^2/(8n) - mu3/(16 n^2) + (7/64) chi^4 / n^2`.
pub fn jsd_canonical_asymptotic(
    ch: &Channel,
    n: usize,
    exact: Option<f64>,
) -> Result<ExpansionReport> {
    if n == 0 {
        return Err(Error::validation("n must be >= 1"));
    }
    let s = score_stats(ch)?;
    let n = n as f64;
    let terms = vec![
        s.chi2 / (8.0 * n),
        -s.mu3 / (16.0 * n * n),
        7.0 / 64.0 * s.chi2 * s.chi2 / (n * n),
    ];
    let asymptotic = terms.iter().sum();
    Ok(ExpansionReport {
        exact,
        asymptotic,
        terms,
        residual: exact.map(|e| e - asymptotic),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DivergenceKind {
    Jsd,
    /// Smooth f-divergence with the given `f''(1)`.
    FDiv {
        f2: f64,
    },
    Renyi {
        alpha: f64,
    },
}

/// Leading `1/n` term of a divergence between neighbouring compositions at
/// proportion `pi`.
pub fn leading_divergence(ch: &Channel, n: usize, pi: f64, kind: DivergenceKind) -> Result<f64> {
    if let DivergenceKind::Renyi { alpha } = kind {
        if !(alpha > 1.0) {
            return Err(Error::validation(format!(
                "Renyi order must be > 1, got {alpha}"
            )));
        }
    }
    if n == 0 {
        return Err(Error::validation("n must be >= 1"));
    }
    let i_pi = fisher_i(ch, pi)?;
    let n = n as f64;
    Ok(match kind {
        DivergenceKind::Jsd => i_pi / (8.0 * n),
        DivergenceKind::FDiv { f2 } => f2 / 2.0 * i_pi / n,
        DivergenceKind::Renyi { alpha } => alpha * i_pi / (2.0 * n),
    })
}
