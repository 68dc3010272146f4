//! Stabilizer-level fusion of two star graphs for every Bell outcome.

use gkplab::ideal::{ideal_graph_from_edges, project_bell_ideal, BellOutcome, GraphTopology};

fn main() -> gkplab::Result<()> {
    // stars centred on 0 and 3; fuse leaf 1 with centre 3
    let g = GraphTopology::from_edges(6, &[(0, 1), (0, 2), (3, 4), (3, 5)])?;
    let tab = ideal_graph_from_edges(&g);
    for o in BellOutcome::all() {
        let p = project_bell_ideal(&tab, 3, 1, o)?;
        println!(
            "outcome ({}, {}): edges {:?}, local gates {:?}, Z corrections {:?}",
            o.i,
            o.j,
            p.form.topology.edges(),
            p.form.local_gates,
            p.form.z_corrections
        );
    }
    Ok(())
}
