//! Unbundled m-message shuffling: every user sends `m` messages through the
//! same randomizer and all `nm` messages are shuffled individually.

use serde::Serialize;

use crate::channels::{score_stats, Channel};
use crate::error::{Error, Result};
use crate::exact_dist::{
    histogram_law_capped, ln_choose, privacy_curve, Composition, LrAtomization, PrivacyCurve,
    Sidedness, DEFAULT_ATOM_CAP,
};

/// Coefficients kept in log form once `nm log w_max` (or `log C(nm, m)`)
/// passes this.
const LOG_MODE_THRESHOLD: f64 = 600.0;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Exact canonical-pair likelihood ratio
/// `[t^m] prod_y (1 + w(y) t)^{N_y} / C(nm, m)` at a message histogram.
pub fn unbundled_lr(ch: &Channel, n: usize, m: usize, histogram: &[u32]) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::validation("need n >= 1 and m >= 1"));
    }
    if histogram.len() != ch.d() {
        return Err(Error::validation(format!(
            "histogram has {} entries, channel alphabet has {}",
            histogram.len(),
            ch.d()
        )));
    }
    let total: u64 = histogram.iter().map(|&c| c as u64).sum();
    if total != (n * m) as u64 {
        return Err(Error::validation(format!(
            "message histogram sums to {total}, expected n*m = {}",
            n * m
        )));
    }
    let s = score_stats(ch)?;
    let nm = (n * m) as u64;
    let ln_norm = ln_choose(nm, m as u64);
    let log_mode = nm as f64 * s.w_max.ln() > LOG_MODE_THRESHOLD || ln_norm > LOG_MODE_THRESHOLD;

    let l = if log_mode {
        let mut acc = vec![f64::NEG_INFINITY; m + 1];
        acc[0] = 0.0;
        for (&count, &w) in histogram.iter().zip(&s.w) {
            if count == 0 || w == 0.0 {
                continue;
            }
            let top = m.min(count as usize);
            let factor: Vec<f64> = (0..=top)
                .map(|j| ln_choose(count as u64, j as u64) + j as f64 * w.ln())
                .collect();
            let mut next = vec![f64::NEG_INFINITY; m + 1];
            for (i, &a) in acc.iter().enumerate() {
                if a == f64::NEG_INFINITY {
                    continue;
                }
                for (j, &b) in factor.iter().enumerate().take(m + 1 - i) {
                    next[i + j] = log_add(next[i + j], a + b);
                }
            }
            acc = next;
        }
        (acc[m] - ln_norm).exp()
    } else {
        let mut acc = vec![0.0f64; m + 1];
        acc[0] = 1.0;
        for (&count, &w) in histogram.iter().zip(&s.w) {
            if count == 0 || w == 0.0 {
                continue;
            }
            let top = m.min(count as usize);
            let mut factor = vec![1.0f64; top + 1];
            for j in 1..=top {
                factor[j] = factor[j - 1] * w * (count as usize - j + 1) as f64 / j as f64;
            }
            let mut next = vec![0.0f64; m + 1];
            for (i, &a) in acc.iter().enumerate() {
                for (j, &b) in factor.iter().enumerate().take(m + 1 - i) {
                    next[i + j] += a * b;
                }
            }
            acc = next;
        }
        if acc[m] > 0.0 {
            (acc[m].ln() - ln_norm).exp()
        } else {
            0.0
        }
    };

    if m == 1 {
        let linear = histogram
            .iter()
            .zip(&s.w)
            .map(|(&c, w)| c as f64 * w)
            .sum::<f64>()
            / n as f64;
        if (l - linear).abs() > 1e-10 * (1.0 + linear) {
            return Err(Error::Invariant(format!(
                "single-message ratio {l} disagrees with the linear form {linear}"
            )));
        }
    }
    Ok(l)
}

/// Likelihood-ratio atoms of the canonical unbundled pair, from the
/// multinomial law of all `nm` messages under `T^{(m)}_{n,0}`.
pub fn unbundled_atoms(ch: &Channel, n: usize, m: usize) -> Result<LrAtomization> {
    unbundled_atoms_capped(ch, n, m, DEFAULT_ATOM_CAP)
}

pub fn unbundled_atoms_capped(ch: &Channel, n: usize, m: usize, cap: f64) -> Result<LrAtomization> {
    ch.require_w0_positive("unbundled_atoms")?;
    if m == 0 || n == 0 {
        return Err(Error::validation("need n >= 1 and m >= 1"));
    }
    let law = histogram_law_capped(ch, Composition::new(n * m, 0)?, cap)?;
    let triples = law
        .atoms
        .iter()
        .map(|(h, p)| {
            let l = unbundled_lr(ch, n, m, h)?;
            Ok((l, *p, l * p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LrAtomization::from_triples(triples, (0, 1)))
}

/// Exact one-sided curve `delta_{T^{(m)}_{n,1} || T^{(m)}_{n,0}}`.
pub fn unbundled_exact_curve(
    ch: &Channel,
    n: usize,
    m: usize,
    eps_grid: &[f64],
) -> Result<PrivacyCurve> {
    let atoms = unbundled_atoms(ch, n, m)?;
    privacy_curve(&atoms, eps_grid, Sidedness::OneSidedQOverP)
}

/// Bundled against unbundled GDP, in `n`-free form (`mu^2 n`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MmComparison {
    pub m: usize,
    pub chi2: f64,
    /// `m chi^2`
    pub mu_unb_sq_times_n: f64,
    /// `(1 + chi^2)^m - 1`
    pub mu_bund_sq_times_n: f64,
    pub ratio: f64,
    /// `1 + (m-1) chi^2 / 2`
    pub ratio_lower_bound: f64,
    /// `v = 0`: the ratio fields hold their limit value 1.
    pub perfect_privacy: bool,
}

pub fn mm_gdp_compare(ch: &Channel, m: usize) -> Result<MmComparison> {
    ch.require_full("mm_gdp_compare")?;
    if m == 0 {
        return Err(Error::validation("m must be >= 1"));
    }
    let chi2 = score_stats(ch)?.chi2;
    let mf = m as f64;
    let unb = mf * chi2;
    let bund = (mf * chi2.ln_1p()).exp_m1();
    let perfect_privacy = chi2 == 0.0;
    let (ratio, ratio_lower_bound) = if perfect_privacy {
        (1.0, 1.0)
    } else {
        (bund / unb, 1.0 + (mf - 1.0) * chi2 / 2.0)
    };
    Ok(MmComparison {
        m,
        chi2,
        mu_unb_sq_times_n: unb,
        mu_bund_sq_times_n: bund,
        ratio,
        ratio_lower_bound,
        perfect_privacy,
    })
}
