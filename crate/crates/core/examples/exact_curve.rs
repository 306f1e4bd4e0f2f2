//! Exact privacy curve, trade-off curve and divergences for shuffled
//! randomized response.
//!
//! cargo run --example exact_curve

use shuffle_accountant::exact_dist::{
    binomial_curve, divergences, lr_atoms, privacy_curve, tradeoff_curve,
};
use shuffle_accountant::{rr_channel, Composition, Sidedness};

fn main() -> shuffle_accountant::Result<()> {
    let ch = rr_channel(3f64.ln())?;
    let n = 20;
    let atoms = lr_atoms(&ch, Composition::new(n, 0)?)?;
    println!(
        "{} likelihood-ratio atoms, largest ratio {:.4}",
        atoms.atoms.len(),
        atoms.l_max()
    );

    let grid: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
    let exact = privacy_curve(&atoms, &grid, Sidedness::TwoSided)?;
    let closed = binomial_curve(&ch, n, &grid)?;
    println!("{:>6} {:>12} {:>12}", "eps", "two-sided", "Q||P");
    for ((e, d), (_, d1)) in exact.points.iter().zip(&closed.points) {
        println!("{e:>6.2} {d:>12.6} {d1:>12.6}");
    }

    let t = tradeoff_curve(&atoms);
    println!(
        "\ntrade-off: beta(0.05) = {:.4}, beta(0.5) = {:.4}",
        t.beta_at(0.05),
        t.beta_at(0.5)
    );

    let div = divergences(&atoms, &[2.0, 4.0])?;
    println!(
        "JSD {:.6}  TV {:.6}  chi2 {:.6}  KL {:.6}",
        div.jsd, div.tv, div.chi2, div.kl
    );
    for (alpha, r) in &div.renyi {
        println!("Renyi({alpha}) {r:.6}");
    }
    Ok(())
}
