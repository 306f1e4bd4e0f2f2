//! Fixed-composition covariance and the Fisher constant.
//!
//! `Sigma_pi = (1-pi) Sigma_0 + pi Sigma_1` with `Sigma_b = diag(W_b) - W_b W_b^T`
//! annihilates the all-ones vector, so its pseudoinverse is only needed on the
//! zero-sum subspace. We act with it by dropping the last coordinate and
//! solving the reduced `(d-1) x (d-1)` system.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::channels::Channel;
use crate::error::{Error, Result};

/// Reject reduced minors whose condition number exceeds this.
pub const MAX_CONDITION: f64 = 1e12;

fn check_pi(pi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::validation(format!(
            "pi must lie in [0, 1], got {pi}"
        )));
    }
    Ok(())
}

fn multinomial_cov(p: &[f64]) -> DMatrix<f64> {
    let d = p.len();
    DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { p[i] } else { 0.0 };
        diag - p[i] * p[j]
    })
}

/// `(1-pi) W0 + pi W1`
pub fn mixture(ch: &Channel, pi: f64) -> Vec<f64> {
    ch.w0()
        .iter()
        .zip(ch.w1())
        .map(|(a, b)| (1.0 - pi) * a + pi * b)
        .collect()
}

/// Per-user covariance of the fixed-composition experiment at proportion `pi`.
pub fn sigma_pi(ch: &Channel, pi: f64) -> Result<DMatrix<f64>> {
    check_pi(pi)?;
    Ok(multinomial_cov(ch.w0()) * (1.0 - pi) + multinomial_cov(ch.w1()) * pi)
}

/// Covariance of one i.i.d. draw from the mixture `f_pi`.
pub fn sigma_mixture(ch: &Channel, pi: f64) -> Result<DMatrix<f64>> {
    check_pi(pi)?;
    Ok(multinomial_cov(&mixture(ch, pi)))
}

#[derive(Clone, Debug, Serialize)]
pub struct FisherReport {
    pub pi: f64,
    pub sigma_pi: DMatrix<f64>,
    /// `v^T Sigma_pi^+ v`
    pub i_pi: f64,
    /// Multinomial proxy `sum_y v(y)^2 / f_pi(y)`; infinite when some
    /// `f_pi(y) = 0` carries signal.
    pub i_f: f64,
    /// `Sigma_pi^+ v`, zero-sum.
    pub s_pi: Vec<f64>,
    /// Solution of the reduced system (first `d-1` coordinates, last dropped).
    pub s_reduced: Vec<f64>,
    pub f_pi: Vec<f64>,
    /// 2-norm condition number of the reduced minor.
    pub condition: f64,
}

/// Computes `I_pi` and the score direction by reduced-coordinate solve.
pub fn fisher_constant(ch: &Channel, pi: f64) -> Result<FisherReport> {
    let sigma = sigma_pi(ch, pi)?;
    let d = ch.d();
    let v = ch.v();
    let f_pi = mixture(ch, pi);

    let reduced = sigma.view((0, 0), (d - 1, d - 1)).into_owned();
    let eig = reduced.clone().symmetric_eigen();
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        let light: Vec<usize> = (0..d).filter(|&y| f_pi[y] < 1e-9).collect();
        return Err(Error::Degenerate(format!(
            "reduced covariance minor at pi = {pi} has condition number {condition:e}; \
             symbols with near-zero mixture mass: {light:?}"
        )));
    }
    let chol = reduced.cholesky().ok_or_else(|| {
        Error::Degenerate("reduced covariance minor is not positive definite".into())
    })?;
    let v_red = DVector::from_column_slice(&v[..d - 1]);
    let theta = chol.solve(&v_red);
    let i_pi = v_red.dot(&theta);

    let mean = theta.iter().sum::<f64>() / d as f64;
    let mut s_pi: Vec<f64> = theta.iter().map(|t| t - mean).collect();
    s_pi.push(-mean);

    let i_f = multinomial_proxy(&v, &f_pi);
    Ok(FisherReport {
        pi,
        sigma_pi: sigma,
        i_pi,
        i_f,
        s_pi,
        s_reduced: theta.iter().cloned().collect(),
        f_pi,
        condition,
    })
}

fn multinomial_proxy(v: &[f64], f: &[f64]) -> f64 {
    v.iter()
        .zip(f)
        .map(|(vy, fy)| match (*vy == 0.0, *fy > 0.0) {
            (true, _) => 0.0,
            (false, true) => vy * vy / fy,
            (false, false) => f64::INFINITY,
        })
        .sum()
}

/// Independent route to `I_pi` through the mixture proxy:
/// `I_pi = I_f / (1 - pi (1-pi) I_f)`.
pub fn fisher_via_mixture(ch: &Channel, pi: f64) -> Result<f64> {
    check_pi(pi)?;
    let i_f = multinomial_proxy(&ch.v(), &mixture(ch, pi));
    let denom = 1.0 - pi * (1.0 - pi) * i_f;
    if !i_f.is_finite() || denom <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "mixture proxy denominator {denom:e} at pi = {pi} (I_f = {i_f})"
        )));
    }
    Ok(i_f / denom)
}
