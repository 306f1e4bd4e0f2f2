//! Computable upper bounds on the canonical one-sided privacy curve.

use serde::Serialize;

use crate::channels::{score_stats, Channel};
use crate::error::{Error, Result};
use crate::exact_dist::Composition;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SEARCH_WIDTH: f64 = 1e-10;
const LAMBDA_FLOOR: f64 = 1e-12;

/// Relative rounding allowance when comparing `e^eps - 1` with `max r`.
const RATIO_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChernoffEvaluation {
    pub eps: f64,
    /// `e^eps - 1`
    pub tau: f64,
    /// Minimizing exponent parameter; infinite when the curve is exactly 0.
    pub lambda_star: f64,
    /// `g(lambda_star)`, the log of the unclamped bound.
    pub log_bound: f64,
    pub raw_bound: f64,
    /// `min(1, raw_bound)`
    pub bound: f64,
}

/// Log-space pieces of the moment generating function of `r(Y)`, `Y ~ W0`.
struct Mgf {
    ln_w0: Vec<f64>,
    ln_w1: Vec<f64>,
    r: Vec<f64>,
}

impl Mgf {
    fn lse(weights: &[f64], r: &[f64], lambda: f64) -> f64 {
        let terms: Vec<f64> = weights
            .iter()
            .zip(r)
            .filter(|(w, _)| w.is_finite())
            .map(|(w, ry)| w + lambda * ry)
            .collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    }

    /// `log M(lambda)`
    fn ln_m(&self, lambda: f64) -> f64 {
        Self::lse(&self.ln_w0, &self.r, lambda)
    }

    /// `log(M + M') = log E_W1[e^{lambda r}]`
    fn ln_m_plus(&self, lambda: f64) -> f64 {
        Self::lse(&self.ln_w1, &self.r, lambda)
    }
}

/// Log of the Chernoff-type bound at a given `lambda`:
/// `-lambda n tau + (n-1) log M(lambda) + log(M(lambda) + M'(lambda))`.
pub fn chernoff_exponent(ch: &Channel, n: usize, eps: f64, lambda: f64) -> Result<f64> {
    let mgf = mgf(ch)?;
    Ok(exponent(&mgf, n, eps.exp_m1(), lambda))
}

fn mgf(ch: &Channel) -> Result<Mgf> {
    let s = score_stats(ch)?;
    Ok(Mgf {
        ln_w0: ch.w0().iter().map(|p| p.ln()).collect(),
        ln_w1: ch
            .w1()
            .iter()
            .map(|p| if *p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
            .collect(),
        r: s.r,
    })
}

fn exponent(mgf: &Mgf, n: usize, tau: f64, lambda: f64) -> f64 {
    -lambda * n as f64 * tau + (n - 1) as f64 * mgf.ln_m(lambda) + mgf.ln_m_plus(lambda)
}

/// Chernoff-type upper bound on `delta_{T_{n,1} || T_{n,0}}(eps)`, minimized
/// over `lambda > 0` by bracket expansion and golden-section search.
pub fn chernoff_delta(ch: &Channel, n: usize, eps: f64) -> Result<ChernoffEvaluation> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::validation(format!(
            "eps must be finite and >= 0, got {eps}"
        )));
    }
    Composition::new(n, 0)?;
    let mgf = mgf(ch)?;
    let tau = eps.exp_m1();
    let r_max = mgf.r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if tau >= r_max - RATIO_SLACK * (1.0 + r_max) {
        // U_n <= max r, so the curve is exactly zero here; the slack absorbs
        // rounding between e^eps and a likelihood ratio equal to it
        return Ok(ChernoffEvaluation {
            eps,
            tau,
            lambda_star: f64::INFINITY,
            log_bound: f64::NEG_INFINITY,
            raw_bound: 0.0,
            bound: 0.0,
        });
    }
    let g = |lambda: f64| exponent(&mgf, n, tau, lambda);
    let r_abs = mgf.r.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let guard = 700.0 / r_abs;

    // bracket: doubling up from 1, halving down from 1
    let mut best = (1.0f64.min(guard), g(1.0f64.min(guard)));
    let (mut lambda, mut prev, mut rises) = (best.0, best.1, 0);
    while rises < 3 && lambda < guard {
        lambda = (2.0 * lambda).min(guard);
        let val = g(lambda);
        rises = if val > prev { rises + 1 } else { 0 };
        if val < best.1 {
            best = (lambda, val);
        }
        prev = val;
    }
    if best.0 == 1.0f64.min(guard) {
        let mut lambda = best.0;
        while lambda > LAMBDA_FLOOR {
            lambda *= 0.5;
            let val = g(lambda);
            if val >= best.1 {
                break;
            }
            best = (lambda, val);
        }
    }

    let (mut lo, mut hi) = (best.0 * 0.5, (best.0 * 2.0).min(guard));
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..500 {
        if hi - lo <= SEARCH_WIDTH {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = g(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    for cand in [(mid, g(mid)), (x1, f1), (x2, f2)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    let raw_bound = best.1.exp();
    Ok(ChernoffEvaluation {
        eps,
        tau,
        lambda_star: best.0,
        log_bound: best.1,
        raw_bound,
        bound: raw_bound.min(1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoeffdingEvaluation {
    pub raw_bound: f64,
    pub bound: f64,
    /// True when the unclamped value is at least 1 (e.g. at `eps = 0`).
    pub vacuous: bool,
}

/// U-statistic Hoeffding bound for unbundled m-message shuffling:
/// `w_max^m exp(-2n (e^eps - 1)^2 / w_max^{2m})`, clamped to 1.
pub fn unbundled_hoeffding_delta(
    ch: &Channel,
    n: usize,
    m: usize,
    eps: f64,
) -> Result<HoeffdingEvaluation> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::validation(format!(
            "eps must be finite and >= 0, got {eps}"
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::validation("need n >= 1 and m >= 1"));
    }
    let w_max = score_stats(ch)?.w_max;
    let tau = eps.exp_m1();
    let ln_wm = m as f64 * w_max.ln();
    let log_raw = ln_wm - 2.0 * n as f64 * tau * tau / (2.0 * ln_wm).exp();
    let raw_bound = log_raw.exp();
    Ok(HoeffdingEvaluation {
        raw_bound,
        bound: raw_bound.min(1.0),
        vacuous: raw_bound >= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::rr_channel;
    use crate::exact_dist::{lr_atoms, privacy_curve, Sidedness};

    const LN3: f64 = 1.098_612_288_668_109_8;
    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn identical_channels_give_zero() {
        let same = Channel::new(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!(chernoff_delta(&same, 10, 0.1).unwrap().bound, 0.0);
    }

    #[test]
    fn vacuous_when_mean_drift_exceeds_threshold() {
        // n tau < chi^2 puts the minimizer at lambda = 0.
        let ch = rr_channel(LN3).unwrap();
        assert_eq!(chernoff_delta(&ch, 2, 0.2).unwrap().bound, 1.0);
    }

    #[test]
    fn bound_dominates_exact_small_case() {
        let ch = rr_channel(LN3).unwrap();
        let atoms = lr_atoms(&ch, Composition::new(2, 0).unwrap()).unwrap();
        let exact = privacy_curve(&atoms, &[0.9], Sidedness::OneSidedQOverP)
            .unwrap()
            .deltas()[0];
        let b = chernoff_delta(&ch, 2, 0.9).unwrap();
        assert!(b.bound >= exact, "{} < {exact}", b.bound);
        assert!(b.bound < 1.0, "{b:?}");
    }

    #[test]
    fn zero_at_and_beyond_local_epsilon() {
        let ch = rr_channel(LN3).unwrap();
        for n in [1, 7, 50] {
            assert_eq!(chernoff_delta(&ch, n, LN3).unwrap().bound, 0.0);
            assert_eq!(chernoff_delta(&ch, n, 2.0).unwrap().bound, 0.0);
        }
    }

    #[test]
    fn minimizer_is_locally_optimal() {
        let ch = Channel::new(&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5]).unwrap();
        for (n, eps) in [(10, 0.3), (100, 0.1), (1000, 0.05)] {
            let e = chernoff_delta(&ch, n, eps).unwrap();
            let g0 = chernoff_exponent(&ch, n, eps, e.lambda_star).unwrap();
            for f in [0.99, 1.01] {
                let g1 = chernoff_exponent(&ch, n, eps, e.lambda_star * f).unwrap();
                assert!(g1 >= g0 - 1e-9, "n={n} eps={eps}");
            }
        }
    }

    #[test]
    fn errors() {
        let ch = rr_channel(LN3).unwrap();
        assert!(chernoff_delta(&ch, 5, -0.1).is_err());
        let sing = Channel::new(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!(chernoff_delta(&sing, 5, 0.1).is_err());
    }

    #[test]
    fn hoeffding_examples() {
        let ch = rr_channel(LN3).unwrap();
        let h = unbundled_hoeffding_delta(&ch, 9, 1, LN2).unwrap();
        assert!((h.bound - 3.0 * (-2.0f64).exp()).abs() < 1e-12);
        assert!((h.bound - 0.406_006).abs() < 1e-6);
        let h = unbundled_hoeffding_delta(&ch, 81, 2, LN2).unwrap();
        assert!((h.raw_bound - 9.0 * (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(h.bound, 1.0);
        assert!(h.vacuous);
        let h = unbundled_hoeffding_delta(&ch, 81, 2, 0.0).unwrap();
        assert!(h.vacuous && h.bound == 1.0);
        let same = Channel::new(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        let h = unbundled_hoeffding_delta(&same, 10, 1, 0.5).unwrap();
        let tau = 0.5f64.exp_m1();
        assert!((h.bound - (-20.0 * tau * tau).exp()).abs() < 1e-15);
    }
}
