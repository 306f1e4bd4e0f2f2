//! How close the exact privacy curve is to its Gaussian-DP approximation,
//! and the Kolmogorov distance of the privacy loss to its Gaussian limit.
//!
//! cargo run --example gdp_approximation

use shuffle_accountant::asymptotics::{gdp_delta, gdp_mu};
use shuffle_accountant::exact_dist::{binomial_atoms, binomial_curve};
use shuffle_accountant::montecarlo::{kolmogorov_to_gaussian, rate_exponent, Hypothesis, LossLaw};
use shuffle_accountant::rr_channel;

fn main() -> shuffle_accountant::Result<()> {
    let ch = rr_channel(1.0)?;
    let mut distances = Vec::new();
    for n in [100, 400, 1600, 6400] {
        let mu = gdp_mu(&ch, n, 0.0, 1)?.mu;
        let grid: Vec<f64> = [0.0, 0.5, 1.0, 2.0].iter().map(|c| c * mu).collect();
        let exact = binomial_curve(&ch, n, &grid)?;
        println!("n = {n}, mu = {mu:.5}");
        for (e, d) in &exact.points {
            println!(
                "  eps {e:>7.5}: exact {d:.6}  gdp {:.6}",
                gdp_delta(*e, mu)?
            );
        }
        let atoms = binomial_atoms(&ch, n)?;
        let ks = kolmogorov_to_gaussian(LossLaw::Exact(&atoms), mu, Hypothesis::P)?;
        println!("  Kolmogorov distance under P: {ks:.5}");
        distances.push((n as f64, ks));
    }
    println!("fitted rate exponent: {:.3}", rate_exponent(&distances)?);
    Ok(())
}
