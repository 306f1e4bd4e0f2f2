//! Estimating the fraction of ones from shuffled randomized-response reports.
//!
//! cargo run --example frequency_estimation

use shuffle_accountant::montecarlo::{frequency_mse, SimConfig};

fn main() -> shuffle_accountant::Result<()> {
    let cfg = SimConfig::new(7, 50_000, 4);
    for eps0 in [0.5, 3f64.ln(), 3.0] {
        println!("eps0 = {eps0:.3}");
        for p in [0.0, 0.25, 0.5] {
            let r = frequency_mse(eps0, 200, p, &cfg)?;
            println!(
                "  p = {p:.2}: mse {:.3e} ± {:.1e} (bound {:.3e}), bias {:+.1e} ± {:.1e}",
                r.mse_estimate, r.mse_se, r.mse_bound, r.bias, r.bias_se
            );
        }
    }
    Ok(())
}
