//! Randomized response near the boundary of the Gaussian regime: the
//! Berry-Esseen diagnostics and the slower rate when `e^eps0 / n -> 0` slowly.
//!
//! cargo run --example rr_boundary

use shuffle_accountant::exact_dist::binomial_atoms;
use shuffle_accountant::montecarlo::{
    kolmogorov_to_gaussian, rate_exponent, rr_boundary, Hypothesis, LossLaw, RegimeThresholds,
};
use shuffle_accountant::{rr_channel, score_stats};

fn main() -> shuffle_accountant::Result<()> {
    let n = 1000;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>16}",
        "eps0", "a_n", "ratio", "bound", "regime"
    );
    for eps0 in [0.5, 2.0, 4.0, 6.9, 9.0, 12.0] {
        let b = rr_boundary(eps0, n, RegimeThresholds::default())?;
        println!(
            "{eps0:>6.1} {:>10.3e} {:>10.4} {:>10.4} {:>16}",
            b.a_n,
            b.lyapunov_ratio / (n as f64).sqrt(),
            b.lyapunov_bound,
            format!("{:?}", b.regime)
        );
    }

    println!("\neps0 = ln(n) / 2, so a_n = n^(-1/2)");
    let mut pts = Vec::new();
    for n in [400, 1600, 6400, 25600] {
        let ch = rr_channel(0.5 * (n as f64).ln())?;
        let mu = (score_stats(&ch)?.chi2 / n as f64).sqrt();
        let ks =
            kolmogorov_to_gaussian(LossLaw::Exact(&binomial_atoms(&ch, n)?), mu, Hypothesis::P)?;
        println!("  n = {n:>6}: Kolmogorov distance {ks:.5}");
        pts.push((n as f64, ks));
    }
    println!(
        "  fitted exponent {:.3} (n^(-1/4) scaling predicts -0.25)",
        rate_exponent(&pts)?
    );
    Ok(())
}
