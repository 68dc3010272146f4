//! Single-mode finite-energy GKP states: wavefunction, outcome density and sampling.

use gkplab::gkp::{
    homodyne_outcome_pdf, make_finite_gkp, quadrature_wavefunction, sample_homodyne, seeded_rng, ErrorEnvelope1,
    IdealLogical, Quadrature, SQRT_PI,
};

fn main() -> gkplab::Result<()> {
    let plus = make_finite_gkp(IdealLogical::XPlus, ErrorEnvelope1::symmetric(), 0.1)?;
    println!("δ = {:.4}, κ = {:.4}, teeth kept in q: |n| ≤ {}", plus.delta(), plus.kappa(), plus.n_max(Quadrature::Q));

    let peaks: Vec<f64> = (0..3).map(|n| homodyne_outcome_pdf(&plus, Quadrature::Q, n as f64 * SQRT_PI)).collect();
    println!("q-density at 0, √π, 2√π: {peaks:.5?}");
    println!("peak ratio {:.6} vs e^(-πσ²) = {:.6}", peaks[1] / peaks[0], (-std::f64::consts::PI * 0.1f64).exp());

    let grid: Vec<f64> = (-4..=4).map(|k| k as f64 * SQRT_PI / 2.0).collect();
    let psi = quadrature_wavefunction(&plus, Quadrature::P, &grid)?;
    for (x, a) in grid.iter().zip(&psi) {
        println!("  ψ̃(p = {x:+.3}) = {:+.5} {:+.5}i", a.re, a.im);
    }

    let mut rng = seeded_rng(11);
    let zero = make_finite_gkp(IdealLogical::Z0, ErrorEnvelope1::symmetric(), 0.05)?;
    let draws: Vec<f64> = (0..6).map(|_| sample_homodyne(&zero, Quadrature::Q, &mut rng) / SQRT_PI).collect();
    println!("q samples of |0̃⟩ in units of √π (teeth at even integers): {draws:.3?}");
    Ok(())
}
