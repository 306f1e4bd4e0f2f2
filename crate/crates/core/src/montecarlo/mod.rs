//! Sampling-based verification: privacy-loss samples, Kolmogorov distance to
//! the Gaussian limit, rate fits, randomized-response boundary diagnostics,
//! and the frequency-estimation application.

mod rng;

pub use rng::{substream, SimConfig};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{rr_channel, score_stats, Channel};
use crate::error::{Error, Result};
use crate::exact_dist::{masses_at, rest_law, Composition, LrAtomization};
use crate::normal::phi;

use rng::par_replicates;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// `T_{n,k}`
    P,
    /// `T_{n,k+1}`
    Q,
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

fn cdf_of(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Samples of the privacy loss `log L` under the chosen hypothesis.
///
/// The canonical pair (`k = 0`) uses the linear form of the likelihood ratio
/// and scales to any `n`; other compositions look the ratio up through the
/// exact law of the remaining users and inherit the enumeration cap.
pub fn sample_privacy_loss(
    ch: &Channel,
    comp: Composition,
    hypothesis: Hypothesis,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    ch.require_full("sample_privacy_loss")?;
    cfg.validate()?;
    let Composition { n, k } = comp;
    if k >= n {
        return Err(Error::validation(format!(
            "needs k <= n - 1 (got k = {k}, n = {n})"
        )));
    }
    let (cdf0, cdf1) = (cdf_of(ch.w0()), cdf_of(ch.w1()));
    let ones = match hypothesis {
        Hypothesis::P => k,
        Hypothesis::Q => k + 1,
    };
    if k == 0 {
        let w = score_stats(ch)?.w;
        return Ok(par_replicates(cfg, |_, rng| {
            let total: f64 = (0..n)
                .map(|i| {
                    let cdf = if i < ones { &cdf1 } else { &cdf0 };
                    w[draw(cdf, rng.random::<f64>())]
                })
                .sum();
            (total / n as f64).ln()
        }));
    }
    let rest = rest_law(ch, comp)?;
    let d = ch.d();
    Ok(par_replicates(cfg, |_, rng| {
        let mut h = vec![0u32; d];
        for i in 0..n {
            let cdf = if i < ones { &cdf1 } else { &cdf0 };
            h[draw(cdf, rng.random::<f64>())] += 1;
        }
        let (p, q) = masses_at(ch, &rest, &h);
        (q / p).ln()
    }))
}

/// Input to [`kolmogorov_to_gaussian`].
#[derive(Clone, Copy, Debug)]
pub enum LossLaw<'a> {
    /// Draws of `log L`.
    Samples(&'a [f64]),
    /// Exact atoms; the masses under the chosen hypothesis are used.
    Exact(&'a LrAtomization),
}

/// Sup-distance between the law of the standardized privacy loss and `Phi`:
/// `(log L + mu^2/2) / mu` under `P`, `(log L - mu^2/2) / mu` under `Q`.
pub fn kolmogorov_to_gaussian(law: LossLaw<'_>, mu: f64, hypothesis: Hypothesis) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::validation(format!("mu must be positive, got {mu}")));
    }
    let shift = match hypothesis {
        Hypothesis::P => 0.5 * mu * mu,
        Hypothesis::Q => -0.5 * mu * mu,
    };
    let standardize = |lambda: f64| (lambda + shift) / mu;
    let (mut pts, escaped): (Vec<(f64, f64)>, f64) = match law {
        LossLaw::Samples(s) => {
            let w = 1.0 / s.len().max(1) as f64;
            (s.iter().map(|&x| (standardize(x), w)).collect(), 0.0)
        }
        LossLaw::Exact(atoms) => {
            let pts = atoms
                .atoms
                .iter()
                .map(|a| {
                    let mass = match hypothesis {
                        Hypothesis::P => a.p,
                        Hypothesis::Q => a.q,
                    };
                    (standardize(a.l.ln()), mass)
                })
                .filter(|(_, m)| *m > 0.0)
                .collect();
            let escaped = match hypothesis {
                Hypothesis::P => 0.0,
                Hypothesis::Q => atoms.q_null,
            };
            (pts, escaped)
        }
    };
    if pts.is_empty() {
        return Err(Error::validation("empty law"));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut dist = 0.0f64;
    let mut cum = 0.0f64;
    let mut i = 0;
    while i < pts.len() {
        let z = pts[i].0;
        let left = cum;
        while i < pts.len() && pts[i].0 == z {
            cum += pts[i].1;
            i += 1;
        }
        let f = phi(z);
        dist = dist.max((left - f).abs()).max((cum - f).abs());
    }
    Ok(dist.max(escaped))
}

/// DKW confidence radius `sqrt(log(2/gamma) / (2 reps))` for a sampled
/// Kolmogorov distance.
pub fn dkw_radius(reps: usize, gamma: f64) -> f64 {
    ((2.0 / gamma).ln() / (2.0 * reps as f64)).sqrt()
}

/// Least-squares slope of `log value` against `log n`.
pub fn rate_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::validation("rate fit needs at least 3 points"));
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0) || !(p.0 > 0.0)) {
        return Err(Error::validation(format!(
            "rate fit needs positive n and values, got {p:?}"
        )));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::validation("rate fit needs distinct n"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    SubCritical,
    Critical,
    SuperCritical,
}

/// Presentation thresholds on `a_n` for [`Regime`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeThresholds {
    pub sub_below: f64,
    pub super_above: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            sub_below: 0.1,
            super_above: 10.0,
        }
    }
}

/// Berry–Esseen diagnostics of shuffled binary randomized response.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RrBoundary {
    pub eps0: f64,
    pub n: usize,
    pub q_n: f64,
    /// `e^eps0 / n`
    pub a_n: f64,
    pub x_plus: f64,
    pub x_minus: f64,
    pub sigma2: f64,
    /// `E|X|^3`
    pub rho3: f64,
    /// `rho3 / sigma^3`, by its closed form (limit 1 at `eps0 = 0`).
    pub lyapunov_ratio: f64,
    /// `2 sqrt(a_n)`
    pub lyapunov_bound: f64,
    pub regime: Regime,
}

pub fn rr_boundary(eps0: f64, n: usize, thresholds: RegimeThresholds) -> Result<RrBoundary> {
    if !(eps0 >= 0.0) || !eps0.is_finite() || n == 0 {
        return Err(Error::validation(format!(
            "rr_boundary needs finite eps0 >= 0 and n >= 1 (got {eps0}, {n})"
        )));
    }
    let e = eps0.exp();
    let q_n = 1.0 / (1.0 + e);
    let a_n = e / n as f64;
    let x_plus = eps0.exp_m1();
    let x_minus = (-eps0).exp_m1();
    let sigma2 = x_plus * x_plus / e;
    let rho3 = q_n * x_plus.abs().powi(3) + (1.0 - q_n) * x_minus.abs().powi(3);
    let lyapunov_ratio = (1.5 * eps0).exp() * (1.0 + (-2.0 * eps0).exp()) / (1.0 + e);
    let regime = if a_n < thresholds.sub_below {
        Regime::SubCritical
    } else if a_n > thresholds.super_above {
        Regime::SuperCritical
    } else {
        Regime::Critical
    };
    Ok(RrBoundary {
        eps0,
        n,
        q_n,
        a_n,
        x_plus,
        x_minus,
        sigma2,
        rho3,
        lyapunov_ratio,
        lyapunov_bound: 2.0 * a_n.sqrt(),
        regime,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyMse {
    /// Number of users holding 1, `round(p_true n)`.
    pub ones: usize,
    /// The realized proportion `ones / n` the estimator targets.
    pub p: f64,
    pub mse_estimate: f64,
    /// Standard error of the MSE estimate.
    pub mse_se: f64,
    /// `1 / (4 n (1 - 2q)^2)`
    pub mse_bound: f64,
    pub bias: f64,
    pub bias_se: f64,
}

/// Monte Carlo error of the debiased randomized-response frequency estimator
/// `(K/n - q) / (1 - 2q)` on a fixed dataset.
pub fn frequency_mse(eps0: f64, n: usize, p_true: f64, cfg: &SimConfig) -> Result<FrequencyMse> {
    if !(eps0 > 0.0) {
        return Err(Error::validation(format!(
            "frequency estimation needs eps0 > 0 (estimator undefined at q = 1/2), got {eps0}"
        )));
    }
    if !(0.0..=1.0).contains(&p_true) || n == 0 {
        return Err(Error::validation("need p_true in [0, 1] and n >= 1"));
    }
    if cfg.reps < 2 {
        return Err(Error::validation(
            "frequency_mse needs at least 2 replicates",
        ));
    }
    cfg.validate()?;
    let ch = rr_channel(eps0)?;
    let q = ch.w0()[1];
    let keep = ch.w1()[1];
    let ones = (p_true * n as f64).round() as usize;
    let p = ones as f64 / n as f64;
    let errors: Vec<f64> = par_replicates(cfg, |_, rng| {
        let k = (0..n)
            .filter(|&i| rng.random::<f64>() < if i < ones { keep } else { q })
            .count();
        (k as f64 / n as f64 - q) / (1.0 - 2.0 * q) - p
    });
    let reps = errors.len() as f64;
    let bias = errors.iter().sum::<f64>() / reps;
    let var = errors.iter().map(|e| (e - bias).powi(2)).sum::<f64>() / (reps - 1.0);
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let mse = sq.iter().sum::<f64>() / reps;
    let mse_var = sq.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / (reps - 1.0);
    Ok(FrequencyMse {
        ones,
        p,
        mse_estimate: mse,
        mse_se: (mse_var / reps).sqrt(),
        mse_bound: 1.0 / (4.0 * n as f64 * (1.0 - 2.0 * q).powi(2)),
        bias,
        bias_se: (var / reps).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_dist::{binomial_atoms, lr_atoms};

    const LN3: f64 = 1.098_612_288_668_109_8;

    #[test]
    fn identical_channel_losses_are_zero() {
        let same = Channel::new(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        let cfg = SimConfig::new(1, 100, 2);
        for hyp in [Hypothesis::P, Hypothesis::Q] {
            let s =
                sample_privacy_loss(&same, Composition::new(10, 0).unwrap(), hyp, &cfg).unwrap();
            assert!(s.iter().all(|&x| x.abs() < 1e-15));
        }
        let s = sample_privacy_loss(&same, Composition::new(6, 3).unwrap(), Hypothesis::Q, &cfg)
            .unwrap();
        assert!(s.iter().all(|&x| x.abs() < 1e-14));
    }

    #[test]
    fn martingale_identities() {
        let ch = rr_channel(LN3).unwrap();
        let comp = Composition::new(100, 0).unwrap();
        let cfg = SimConfig::new(7, 200_000, 4);
        for (hyp, sign) in [(Hypothesis::P, 1.0), (Hypothesis::Q, -1.0)] {
            let s = sample_privacy_loss(&ch, comp, hyp, &cfg).unwrap();
            let x: Vec<f64> = s.iter().map(|l| (sign * l).exp()).collect();
            let m = x.iter().sum::<f64>() / x.len() as f64;
            let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt();
            let se = sd / (x.len() as f64).sqrt();
            assert!((m - 1.0).abs() <= 4.0 * se, "{hyp:?}: mean {m}, se {se}");
        }
    }

    #[test]
    fn general_k_samples_match_exact_mean() {
        let ch = Channel::new(&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5]).unwrap();
        let comp = Composition::new(8, 3).unwrap();
        let cfg = SimConfig::new(3, 50_000, 3);
        let s = sample_privacy_loss(&ch, comp, Hypothesis::P, &cfg).unwrap();
        let atoms = lr_atoms(&ch, comp).unwrap();
        let exact: f64 = atoms.atoms.iter().map(|a| a.p * a.l.ln()).sum();
        let m = s.iter().sum::<f64>() / s.len() as f64;
        let sd = (s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / s.len() as f64).sqrt();
        assert!((m - exact).abs() < 4.0 * sd / (s.len() as f64).sqrt());
    }

    #[test]
    fn kolmogorov_three_atoms() {
        let ch = rr_channel(LN3).unwrap();
        let atoms = lr_atoms(&ch, Composition::new(2, 0).unwrap()).unwrap();
        let mu = (score_stats(&ch).unwrap().chi2 / 2.0).sqrt();
        let d = kolmogorov_to_gaussian(LossLaw::Exact(&atoms), mu, Hypothesis::P).unwrap();
        // brute force over the 3 jump points, both one-sided limits
        let mut want = 0.0f64;
        let mut cum = 0.0;
        for a in &atoms.atoms {
            let z = (a.l.ln() + mu * mu / 2.0) / mu;
            want = want.max((cum - phi(z)).abs());
            cum += a.p;
            want = want.max((cum - phi(z)).abs());
        }
        assert!((d - want).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&d));
        assert!(kolmogorov_to_gaussian(LossLaw::Exact(&atoms), 0.0, Hypothesis::P).is_err());
    }

    #[test]
    fn gaussian_samples_are_close_to_gaussian() {
        use rand_distr::{Distribution, Normal};
        let mu = 0.7;
        let normal = Normal::new(-mu * mu / 2.0, mu).unwrap();
        let mut rng = substream(11, 0);
        let s: Vec<f64> = (0..1_000_000).map(|_| normal.sample(&mut rng)).collect();
        let d = kolmogorov_to_gaussian(LossLaw::Samples(&s), mu, Hypothesis::P).unwrap();
        assert!(d <= 0.002, "{d}");
        assert!(dkw_radius(1_000_000, 0.05) < 0.002);
    }

    #[test]
    fn kolmogorov_shrinks_with_n() {
        let ch = rr_channel(LN3).unwrap();
        let chi2 = score_stats(&ch).unwrap().chi2;
        let at = |n: usize| {
            let atoms = binomial_atoms(&ch, n).unwrap();
            kolmogorov_to_gaussian(
                LossLaw::Exact(&atoms),
                (chi2 / n as f64).sqrt(),
                Hypothesis::P,
            )
            .unwrap()
        };
        assert!(at(1600) < at(400));
    }

    #[test]
    fn rate_fits() {
        let pts: Vec<(f64, f64)> = [100.0, 400.0, 1600.0]
            .iter()
            .map(|&n: &f64| (n, 1.0 / n.sqrt()))
            .collect();
        assert!((rate_exponent(&pts).unwrap() + 0.5).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&n| (n, 7.0 / n))
            .collect();
        assert!((rate_exponent(&pts).unwrap() + 1.0).abs() < 1e-12);
        assert!(rate_exponent(&pts[..2]).is_err());
        assert!(rate_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(rate_exponent(&[(1.0, 1.0), (1.0, 2.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn rr_boundary_examples() {
        let b = rr_boundary(0.0, 50, RegimeThresholds::default()).unwrap();
        assert_eq!(b.sigma2, 0.0);
        assert_eq!(b.rho3, 0.0);
        assert!((b.a_n - 1.0 / 50.0).abs() < 1e-16);

        let b = rr_boundary(LN3, 100, RegimeThresholds::default()).unwrap();
        assert!((b.q_n - 0.25).abs() < 1e-15);
        assert!((b.a_n - 0.03).abs() < 1e-15);
        assert!((b.sigma2 - 4.0 / 3.0).abs() < 1e-14);
        assert!((b.rho3 - 20.0 / 9.0).abs() < 1e-14);
        let ratio = b.rho3 / b.sigma2.powf(1.5);
        assert!((ratio - 1.443_375_672_974_064_5).abs() < 1e-12);
        assert!((ratio - b.lyapunov_ratio).abs() < 1e-12);
        assert!(ratio <= 2.0 * 3.0f64.sqrt());
        assert_eq!(b.regime, Regime::SubCritical);

        let n = 1000;
        let b = rr_boundary((n as f64).ln(), n, RegimeThresholds::default()).unwrap();
        assert_eq!(b.regime, Regime::Critical);
        let b = rr_boundary(12.0, 10, RegimeThresholds::default()).unwrap();
        assert_eq!(b.regime, Regime::SuperCritical);
    }

    #[test]
    fn frequency_bound_and_errors() {
        let cfg = SimConfig::new(5, 2000, 2);
        let r = frequency_mse(LN3, 100, 0.5, &cfg).unwrap();
        assert!((r.mse_bound - 0.01).abs() < 1e-15);
        assert_eq!(r.ones, 50);
        assert!(frequency_mse(0.0, 100, 0.5, &cfg).is_err());
        assert!(frequency_mse(LN3, 100, 1.5, &cfg).is_err());
    }
}
