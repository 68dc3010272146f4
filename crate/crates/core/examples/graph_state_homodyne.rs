//! A three-vertex chain as a single Gaussian branch, then a q-homodyne that
//! splits it into nearest-tooth and partner-tooth branches.

use gkplab::graph::{build_graph_state, Feedback, VertexEnvelope};
use gkplab::gkp::Quadrature;
use gkplab::ideal::{GraphTopology, Pauli1};

fn main() -> gkplab::Result<()> {
    let topo = GraphTopology::from_edges(3, &[(0, 1), (1, 2)])?;
    let mut s = build_graph_state::<f64>(&[VertexEnvelope::unit(), VertexEnvelope::unit(), VertexEnvelope::unit()], &topo, 0.08)?;
    println!("modes {:?}", s.modes);
    let c = s.cov_f64();
    for i in 0..c.rows {
        println!("  {:?}", c.row(i));
    }
    let rec = s.homodyne_gaussian(0, Quadrature::Q, 0.2, 1.0, &Feedback::Full)?;
    s.ideal_measure("v0", Pauli1::Z, rec.cell.rem_euclid(2) == 1)?;
    println!("outcome 0.2√π: cell {}, partner {:+}, branch error {:.3e}", rec.cell, rec.partner, rec.branch_error);
    for b in &s.branches {
        println!("  tags {:?}  |a|² = {:.6}  means {:?}", b.tags, b.amplitude.norm_sqr() / s.norm2(), b.mean);
    }
    println!("surviving ideal edges: {:?}", s.topology()?.edges());
    Ok(())
}
