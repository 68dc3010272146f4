//! Outcome-averaged total error of the tree protocol for each fusion variant.

use gkplab::protocols::{tree_protocol_error, DualHomodyneComb, FusionVariant};

fn main() -> gkplab::Result<()> {
    println!("σ²     A             B             C");
    for k in 1..=10 {
        let s2 = 0.02 * k as f64;
        let e: Vec<String> = FusionVariant::all()
            .iter()
            .map(|&v| tree_protocol_error(v, DualHomodyneComb::Physical, s2, [0.0; 3]).map(|x| format!("{:.6e}", x.total_error)))
            .collect::<gkplab::Result<_>>()?;
        println!("{s2:.2}  {}", e.join("  "));
    }
    let e = tree_protocol_error(FusionVariant::A, DualHomodyneComb::Physical, 0.1, [0.2; 3])?;
    println!("σ² = 0.1 with ν = 0.2 on every homodyne: error {:.4e}, success {:.4}", e.total_error, e.success);
    Ok(())
}
