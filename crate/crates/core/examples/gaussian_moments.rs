//! Exact Q(√2) covariance propagation through CZ and a balanced beamsplitter,
//! then conditioning on a measured quadrature.

use gkplab::gaussian::{apply_affine, condition_on_linear, symplectic_defect, AffineMap, GaussianMoments};
use gkplab::scalar::{QSqrt2, Scalar};

fn main() -> gkplab::Result<()> {
    let one = QSqrt2::one();
    let g = GaussianMoments::product(&[one.clone(), one.clone()], &[one.clone(), one]);
    let map = AffineMap::<QSqrt2>::beamsplitter_balanced(2, 0, 1).after(&AffineMap::cz(2, 0, 1));
    println!("symplectic defect: {:e}", symplectic_defect(&map.linear.to_f64()));
    let g = apply_affine(&g, &map)?;
    println!("covariance after CZ then 50:50 beamsplitter (σ² units):");
    for i in 0..g.dim() {
        let row: Vec<String> = g.cov.row(i).iter().map(|x| x.to_string()).collect();
        println!("  [{}]", row.join(", "));
    }
    let c = condition_on_linear(&g, 2, QSqrt2::from_ratio(1, 4))?;
    println!("after observing p_0 = 1/4 (√π units):");
    println!("  means  {:?}", c.moments.mean.iter().map(|m| m.to_string()).collect::<Vec<_>>());
    println!("  gains  {:?}", c.gain.iter().map(|m| m.to_string()).collect::<Vec<_>>());
    Ok(())
}
