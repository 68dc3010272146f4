//! Brute-force grid check of the engine: a CZ-coupled pair, then a homodyne.

use gkplab::gkp::{IdealLogical, Quadrature, SQRT_PI};
use gkplab::graph::{Feedback, GkpGraphState, VertexEnvelope};
use gkplab::ideal::Pauli1;
use gkplab::oracle::{evolve, fidelity, slice_homodyne, synthesize, GridGate, GridSpec};

fn main() -> gkplab::Result<()> {
    let mut s = GkpGraphState::<f64>::empty(0.1);
    s.add_qubit("a", IdealLogical::XPlus, VertexEnvelope::unit())?;
    s.add_qubit("b", IdealLogical::XPlus, VertexEnvelope::unit())?;
    let spec = GridSpec::for_modes(2)?;
    println!("grid: {} points per mode, Δx = {:.4}", spec.points(), spec.dx());
    let grid = evolve(&synthesize(&s, spec)?, GridGate::Cz(0, 1))?;
    s.apply_cz(0, 1)?;
    println!("CZ fidelity engine vs grid: {:.12}", fidelity(&synthesize(&s, spec)?, &grid)?);

    let y = 0.17;
    let rec = s.homodyne_gaussian(0, Quadrature::Q, y, 1.0, &Feedback::None)?;
    s.ideal_measure("a", Pauli1::Z, rec.cell.rem_euclid(2) == 1)?;
    let (rest, density) = slice_homodyne(&grid, 0, Quadrature::Q, y * SQRT_PI)?;
    let rest = rest.expect("nonzero slice");
    println!("grid outcome density at q = {y}√π: {density:.6}");
    println!("post-measurement fidelity: {:.6}", fidelity(&synthesize(&s, rest.spec)?, &rest)?);
    Ok(())
}
