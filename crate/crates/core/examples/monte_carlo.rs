//! Sampling the privacy loss, with a DKW band on the Kolmogorov distance, and
//! the exact value for comparison.
//!
//! cargo run --example monte_carlo

use shuffle_accountant::asymptotics::gdp_mu;
use shuffle_accountant::exact_dist::lr_atoms;
use shuffle_accountant::montecarlo::{
    dkw_radius, kolmogorov_to_gaussian, sample_privacy_loss, Hypothesis, LossLaw, SimConfig,
};
use shuffle_accountant::{Channel, Composition};

fn main() -> shuffle_accountant::Result<()> {
    let ch = Channel::new(&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5])?;
    let comp = Composition::new(60, 20)?;
    let mu = gdp_mu(&ch, comp.n, comp.pi(), 1)?.mu;
    let cfg = SimConfig::new(42, 100_000, 4);
    println!("{}", cfg.comment_line());
    for hyp in [Hypothesis::P, Hypothesis::Q] {
        let samples = sample_privacy_loss(&ch, comp, hyp, &cfg)?;
        let sign = if hyp == Hypothesis::P { 1.0 } else { -1.0 };
        let mart = samples.iter().map(|x| (sign * x).exp()).sum::<f64>() / samples.len() as f64;
        let sampled = kolmogorov_to_gaussian(LossLaw::Samples(&samples), mu, hyp)?;
        let exact = kolmogorov_to_gaussian(LossLaw::Exact(&lr_atoms(&ch, comp)?), mu, hyp)?;
        println!(
            "{hyp:?}: mean ratio {mart:.4}, Kolmogorov sampled {sampled:.4} ± {:.4}, exact {exact:.4}",
            dkw_radius(samples.len(), 0.05)
        );
    }
    Ok(())
}
