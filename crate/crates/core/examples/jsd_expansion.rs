//! Exact Jensen-Shannon divergence against its three-term expansion, for the
//! canonical pair and for a balanced composition.
//!
//! cargo run --example jsd_expansion

use shuffle_accountant::asymptotics::{
    jsd_canonical_asymptotic, leading_divergence, DivergenceKind,
};
use shuffle_accountant::exact_dist::{binomial_atoms, divergences, lr_atoms};
use shuffle_accountant::{rr_channel, Composition};

fn main() -> shuffle_accountant::Result<()> {
    let ch = rr_channel(3f64.ln())?;
    println!("canonical pair (k = 0)");
    println!(
        "{:>6} {:>14} {:>14} {:>14}",
        "n", "exact", "expansion", "n^3 residual"
    );
    for n in [10, 25, 50, 100, 200, 400] {
        let exact = divergences(&binomial_atoms(&ch, n)?, &[])?.jsd;
        let rep = jsd_canonical_asymptotic(&ch, n, Some(exact))?;
        let scaled = rep.residual.unwrap_or(f64::NAN) * (n as f64).powi(3);
        println!(
            "{n:>6} {exact:>14.8e} {:>14.8e} {scaled:>14.6}",
            rep.asymptotic
        );
    }

    println!("\nbalanced composition (k = n/2)");
    println!("{:>6} {:>14} {:>14}", "n", "exact", "I/(8n)");
    for n in [20, 50, 100, 200] {
        let k = n / 2;
        let exact = divergences(&lr_atoms(&ch, Composition::new(n, k)?)?, &[])?.jsd;
        let lead = leading_divergence(&ch, n, k as f64 / n as f64, DivergenceKind::Jsd)?;
        println!("{n:>6} {exact:>14.8e} {lead:>14.8e}");
    }
    Ok(())
}
