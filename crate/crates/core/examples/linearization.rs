//! How fast the exact conditional score approaches its linearization as the
//! population grows with a fixed proportion of ones.
//!
//! cargo run --example linearization

use shuffle_accountant::exact_dist::{linearization_residual, PiConvention};
use shuffle_accountant::{rr_channel, Channel, Composition};

fn main() -> shuffle_accountant::Result<()> {
    let channels = [
        ("rr(ln 3)", rr_channel(3f64.ln())?),
        ("d = 3", Channel::new(&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5])?),
    ];
    for (name, ch) in &channels {
        println!("{name}");
        for n in [8, 16, 32, 64] {
            let r = linearization_residual(
                ch,
                Composition::new(n, n / 2)?,
                0.25,
                PiConvention::LeaveOneOut,
            )?;
            println!(
                "  n = {n:>3}: max {:.5}  rms {:.5}  outside mass {:.4}",
                r.max_residual, r.rms_residual, r.outside_mass
            );
        }
    }
    Ok(())
}
