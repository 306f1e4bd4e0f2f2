use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};

use super::LrAtomization;

/// `D(t) = (1/2) log(2/(1+t)) + (t/2) log(2t/(1+t))`, so that
/// `JSD(P||Q) = E_P[D(L)]`. `D(0) = log(2)/2`, `D(1) = 0`.
pub fn jsd_pointwise(t: f64) -> f64 {
    if t == 0.0 {
        return 0.5 * LN_2;
    }
    let u = t - 1.0;
    -0.5 * (0.5 * u).ln_1p() + 0.5 * t * (u / (t + 1.0)).ln_1p()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub jsd: f64,
    pub tv: f64,
    /// `chi^2(Q || P)`
    pub chi2: f64,
    /// `KL(Q || P)`
    pub kl: f64,
    /// `(alpha, D_alpha(Q || P))`
    pub renyi: Vec<(f64, f64)>,
}

/// Divergences of the atomized pair. Rényi orders must exceed 1 and require
/// `Q << P`.
pub fn divergences(atoms: &LrAtomization, alpha_list: &[f64]) -> Result<DivergenceReport> {
    if let Some(a) = alpha_list.iter().find(|a| !(**a > 1.0) || !a.is_finite()) {
        return Err(Error::validation(format!(
            "Renyi order must be finite and > 1, got {a}"
        )));
    }
    if !alpha_list.is_empty() && atoms.q_null > 0.0 {
        return Err(Error::validation(
            "Renyi divergence requested on a pair where Q is not absolutely continuous w.r.t. P",
        ));
    }
    let singular = atoms.q_null > 0.0;
    let jsd = atoms
        .atoms
        .iter()
        .map(|a| a.p * jsd_pointwise(a.l))
        .sum::<f64>()
        + 0.5 * LN_2 * atoms.q_null;
    let tv = atoms
        .atoms
        .iter()
        .map(|a| (a.q - a.p).max(0.0))
        .sum::<f64>()
        + atoms.q_null;
    let (chi2, kl) = if singular {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let chi2 = atoms.atoms.iter().map(|a| a.p * (a.l - 1.0).powi(2)).sum();
        let kl = atoms
            .atoms
            .iter()
            .filter(|a| a.q > 0.0)
            .map(|a| a.q * a.l.ln())
            .sum();
        (chi2, kl)
    };
    let renyi = alpha_list
        .iter()
        .map(|&alpha| {
            let logs: Vec<f64> = atoms
                .atoms
                .iter()
                .filter(|a| a.l > 0.0)
                .map(|a| a.p.ln() + alpha * a.l.ln())
                .collect();
            (alpha, super::curves::log_sum_exp(&logs) / (alpha - 1.0))
        })
        .collect();
    Ok(DivergenceReport {
        jsd,
        tv: tv.clamp(0.0, 1.0),
        chi2,
        kl,
        renyi,
    })
}
