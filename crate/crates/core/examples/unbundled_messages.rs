//! Sending m messages per user and shuffling them individually: exact curves,
//! the Hoeffding bound, and the comparison with bundled messages.
//!
//! cargo run --example unbundled_messages

use shuffle_accountant::bounds::unbundled_hoeffding_delta;
use shuffle_accountant::multimessage::{mm_gdp_compare, unbundled_exact_curve};
use shuffle_accountant::rr_channel;

fn main() -> shuffle_accountant::Result<()> {
    let ch = rr_channel(3f64.ln())?;
    for m in 1..=4 {
        let c = mm_gdp_compare(&ch, m)?;
        println!(
            "m = {m}: n mu^2 unbundled {:.4}, bundled {:.4}, ratio {:.4} (>= {:.4})",
            c.mu_unb_sq_times_n, c.mu_bund_sq_times_n, c.ratio, c.ratio_lower_bound
        );
    }

    let n = 12;
    let grid = [0.0, 0.25, 0.5, 1.0];
    println!("\nexact unbundled curves, n = {n}");
    for m in 1..=3 {
        let curve = unbundled_exact_curve(&ch, n, m, &grid)?;
        let row: Vec<String> = curve
            .points
            .iter()
            .map(|(e, d)| format!("d({e})={d:.4}"))
            .collect();
        println!("  m = {m}: {}", row.join("  "));
    }

    println!("\nHoeffding bound, m = 2");
    for n in [1_000, 10_000, 100_000] {
        let h = unbundled_hoeffding_delta(&ch, n, 2, 0.5)?;
        println!(
            "  n = {n}: {:.4e}{}",
            h.bound,
            if h.vacuous { " (vacuous)" } else { "" }
        );
    }
    Ok(())
}
