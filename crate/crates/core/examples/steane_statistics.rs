//! Single-round Steane correction: success probability and average error
//! against the post-selection window, for two data-qubit envelopes.

use gkplab::protocols::{average_error_probability, postselect_success_probability, SteaneParams};

fn main() -> gkplab::Result<()> {
    for m_b in [1.0, 2.0] {
        let p = SteaneParams::new(1.0, 1.0, 1.0, m_b, 0.1)?;
        println!("m_B = {m_b}{}", if p.regime_warning() { " (outside the small-σ regime)" } else { "" });
        println!("  ν       P_succ     avg error");
        for k in 0..6 {
            let nu = 0.08 * k as f64;
            println!("  {nu:.2}  {:.6}  {:.6e}", postselect_success_probability(&p, nu)?, average_error_probability(&p, nu)?);
        }
    }
    Ok(())
}
