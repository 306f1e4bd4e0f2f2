//! The Fisher constant `I_pi` across the composition proportion, checked
//! against the mixture-covariance identity.
//!
//! cargo run --example fisher_constant

use shuffle_accountant::simplex_linalg::{fisher_constant, fisher_via_mixture};
use shuffle_accountant::{score_stats, Channel};

fn main() -> shuffle_accountant::Result<()> {
    let ch = Channel::new(&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5])?;
    let stats = score_stats(&ch)?;
    println!(
        "chi2 = {:.6}, mu3 = {:.6}, w_max = {:.4}",
        stats.chi2, stats.mu3, stats.w_max
    );
    println!(
        "{:>5} {:>12} {:>12} {:>12}",
        "pi", "I_pi", "mixture", "condition"
    );
    for i in 0..=10 {
        let pi = i as f64 / 10.0;
        let rep = fisher_constant(&ch, pi)?;
        let mix = fisher_via_mixture(&ch, pi)?;
        println!(
            "{pi:>5.1} {:>12.8} {mix:>12.8} {:>12.2}",
            rep.i_pi, rep.condition
        );
    }
    let mid = fisher_constant(&ch, 0.5)?;
    println!("\nscore direction at pi = 0.5: {:?}", mid.s_pi);
    Ok(())
}
