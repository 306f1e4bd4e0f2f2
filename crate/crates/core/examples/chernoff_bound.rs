//! The Chernoff upper bound next to the exact curve and the GDP value.
//!
//! cargo run --example chernoff_bound

use shuffle_accountant::asymptotics::{gdp_delta, gdp_mu};
use shuffle_accountant::bounds::chernoff_delta;
use shuffle_accountant::exact_dist::binomial_curve;
use shuffle_accountant::rr_channel;

fn main() -> shuffle_accountant::Result<()> {
    let ch = rr_channel(2.0)?;
    let n = 1000;
    let grid: Vec<f64> = (1..=8).map(|i| 0.05 * i as f64).collect();
    let exact = binomial_curve(&ch, n, &grid)?;
    let mu = gdp_mu(&ch, n, 0.0, 1)?.mu;
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>10}",
        "eps", "exact", "chernoff", "gdp", "lambda*"
    );
    for (e, d) in &exact.points {
        let b = chernoff_delta(&ch, n, *e)?;
        println!(
            "{e:>6.2} {d:>12.4e} {:>12.4e} {:>12.4e} {:>10.4}",
            b.bound,
            gdp_delta(*e, mu)?,
            b.lambda_star
        );
    }
    Ok(())
}
