use gkplab::gkp::{IdealLogical, Quadrature, SQRT_PI};
use gkplab::graph::{BranchFilter, Feedback, GkpGraphState, VertexEnvelope};
use gkplab::ideal::Pauli1;
use gkplab::oracle::{evolve, fidelity, slice_homodyne, synthesize, GridGate, GridSpec};
use gkplab::protocols::{forced, steane_correct_vertex, SteaneConfig};

fn pair(sigma2: f64, a: IdealLogical, b: IdealLogical) -> GkpGraphState<f64> {
    let mut s = GkpGraphState::<f64>::empty(sigma2);
    s.add_qubit("a", a, VertexEnvelope::unit()).unwrap();
    s.add_qubit("b", b, VertexEnvelope::unit()).unwrap();
    s
}

fn grid2() -> GridSpec {
    GridSpec::for_modes(2).unwrap()
}

#[test]
fn cz_gate_agrees_with_grid() {
    let s = pair(0.1, IdealLogical::XPlus, IdealLogical::XPlus);
    let before = synthesize(&s, grid2()).unwrap();
    let mut t = s.clone();
    t.apply_cz(0, 1).unwrap();
    let f = fidelity(&synthesize(&t, grid2()).unwrap(), &evolve(&before, GridGate::Cz(0, 1)).unwrap()).unwrap();
    assert!(f > 1.0 - 1e-9, "{f}");
}

#[test]
fn cx_gate_agrees_with_grid() {
    let s = pair(0.1, IdealLogical::XMinus, IdealLogical::Z1);
    let before = synthesize(&s, grid2()).unwrap();
    let mut t = s.clone();
    t.apply_cx(0, 1).unwrap();
    let f = fidelity(&synthesize(&t, grid2()).unwrap(), &evolve(&before, GridGate::Cx(0, 1)).unwrap()).unwrap();
    assert!(f > 1.0 - 1e-9, "{f}");
}

#[test]
fn fourier_agrees_with_grid() {
    let mut s = pair(0.1, IdealLogical::Z0, IdealLogical::XPlus);
    s.apply_cz(0, 1).unwrap();
    let before = synthesize(&s, grid2()).unwrap();
    let mut t = s.clone();
    t.apply_fourier(1).unwrap();
    let f = fidelity(&synthesize(&t, grid2()).unwrap(), &evolve(&before, GridGate::Fourier(1)).unwrap()).unwrap();
    assert!(f > 1.0 - 1e-9, "{f}");
}

#[test]
fn displacement_agrees_with_grid() {
    let mut s = pair(0.1, IdealLogical::XPlus, IdealLogical::Z0);
    s.apply_cz(0, 1).unwrap();
    let before = synthesize(&s, grid2()).unwrap();
    let mut t = s.clone();
    t.apply_displacement(0, 0.13, -0.21, BranchFilter::All).unwrap();
    let g = evolve(&before, GridGate::Displacement(0, 0.13 * SQRT_PI, -0.21 * SQRT_PI)).unwrap();
    let f = fidelity(&synthesize(&t, grid2()).unwrap(), &g).unwrap();
    assert!(f > 1.0 - 1e-9, "{f}");
}

#[test]
fn homodyne_agrees_with_grid_slice() {
    for (quad, y) in [(Quadrature::Q, 0.17), (Quadrature::P, -0.31), (Quadrature::P, 0.93)] {
        let mut s = pair(0.1, IdealLogical::XPlus, IdealLogical::XPlus);
        s.apply_cz(0, 1).unwrap();
        let g = synthesize(&s, grid2()).unwrap();
        let mut t = s.clone();
        let rec = t.homodyne_gaussian(0, quad, y, 1.0, &Feedback::None).unwrap();
        let basis = if quad == Quadrature::Q { Pauli1::Z } else { Pauli1::X };
        t.ideal_measure("a", basis, rec.cell.rem_euclid(2) == 1).unwrap();
        let (rest, _) = slice_homodyne(&g, 0, quad, y * SQRT_PI).unwrap();
        let mine = synthesize(&t, GridSpec { k: 16, modes: 1 }).unwrap();
        let f = fidelity(&mine, &rest.unwrap()).unwrap();
        assert!(f > 0.99, "{quad:?} {y}: {f}");
    }
}

#[test]
fn steane_circuit_agrees_with_grid() {
    // bare circuit: ancilla |0̃⟩, CX(anc → a), p-homodyne of the ancilla, no feedback
    let mut s = GkpGraphState::<f64>::empty(0.1);
    s.add_qubit("a", IdealLogical::XPlus, VertexEnvelope::unit()).unwrap();
    s.add_qubit("anc", IdealLogical::Z0, VertexEnvelope::unit()).unwrap();
    let g = evolve(&synthesize(&s, grid2()).unwrap(), GridGate::Cx(1, 0)).unwrap();
    for y in [0.21, -0.4, 0.62] {
        let mut t = s.clone();
        t.apply_cx(1, 0).unwrap();
        let rec = t.homodyne_gaussian(1, Quadrature::P, y, 1.0, &Feedback::None).unwrap();
        t.ideal_measure("anc", Pauli1::X, rec.cell.rem_euclid(2) == 1).unwrap();
        let (rest, _) = slice_homodyne(&g, 1, Quadrature::P, y * SQRT_PI).unwrap();
        let mine = synthesize(&t, GridSpec { k: 16, modes: 1 }).unwrap();
        let f = fidelity(&mine, &rest.unwrap()).unwrap();
        assert!(f > 0.99, "{y}: {f}");
    }
}

#[test]
fn steane_feedback_recentres_the_target() {
    let s = pair(0.1, IdealLogical::XPlus, IdealLogical::XPlus);
    let out = steane_correct_vertex(&s, &SteaneConfig::p("a"), &mut forced(&[0.21])).unwrap();
    assert_eq!(out.state.n_modes(), 2);
    for b in &out.state.branches {
        assert!(b.mean.iter().all(|m| m.abs() < 1e-12 || (m.abs() - 0.5).abs() < 1e-12), "{:?}", b.mean);
    }
}
