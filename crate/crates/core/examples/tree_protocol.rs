//! Four-qubit tree generation: two three-vertex stars, a Steane round and a
//! fusion, in exact arithmetic with outcomes forced into the zero cells.

use gkplab::protocols::{representative_outcomes, run_tree_protocol, forced, DualHomodyneComb, FusionVariant};
use gkplab::scalar::QSqrt2;

fn main() -> gkplab::Result<()> {
    let v = FusionVariant::A;
    let outs = representative_outcomes(v, DualHomodyneComb::Physical);
    let run = run_tree_protocol::<QSqrt2, rand_chacha::ChaCha8Rng>(v, DualHomodyneComb::Physical, 0.1, [0.0; 3], Some(0.0), &mut forced(&outs))?;
    let s = run.state;
    println!("survivors {:?}, edges {:?}", s.modes, s.topology()?.edges());
    println!("covariance (σ² units):");
    for i in 0..s.cov.rows {
        let row: Vec<String> = s.cov.row(i).iter().map(|x| format!("{x:>5}")).collect();
        println!("  {}", row.join(" "));
    }
    println!("branches (tags = comb index of Steane, control, target):");
    for b in &s.branches {
        let means: Vec<String> = b.mean.iter().map(|x| x.to_string()).collect();
        println!("  {:?} {:.3e} [{}]", b.tags, b.amplitude.norm_sqr() / s.norm2(), means.join(", "));
    }
    Ok(())
}
