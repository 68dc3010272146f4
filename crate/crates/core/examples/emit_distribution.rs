//! Homodyne densities and a mean-shifted p-wavefunction as CSV data.

use gkplab::gkp::{ErrorEnvelope1, IdealLogical, Quadrature, SQRT_PI};
use gkplab::runner::{emit_distribution, DistributionKind, DistributionSpec};

fn main() -> gkplab::Result<()> {
    let base = DistributionSpec {
        logical: IdealLogical::XPlus,
        sigma2: 0.1,
        envelope: ErrorEnvelope1::symmetric(),
        quadrature: Quadrature::Q,
        min: -3.0 * SQRT_PI,
        max: 3.0 * SQRT_PI,
        points: 13,
        kind: DistributionKind::Pdf,
    };
    println!("# equal superposition, q density");
    print!("{}", emit_distribution(&base)?.to_csv());
    println!("# |0̃⟩, q density");
    print!("{}", emit_distribution(&DistributionSpec { logical: IdealLogical::Z0, ..base.clone() })?.to_csv());
    println!("# shifted envelope, p wavefunction");
    let shifted = DistributionSpec {
        envelope: ErrorEnvelope1::symmetric().with_means(0.2, -0.1),
        quadrature: Quadrature::P,
        kind: DistributionKind::Wavefunction,
        ..base
    };
    print!("{}", emit_distribution(&shifted)?.to_csv());
    Ok(())
}
