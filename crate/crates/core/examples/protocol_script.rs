//! Runs the bundled tree script, writes its report, then sweeps σ².

use std::path::Path;

use gkplab::runner::{run_protocol_script, sweep_script, write_report, Overrides, ProtocolScript};

fn main() -> gkplab::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scripts/tree.json");
    let report = run_protocol_script(&path, &Overrides::default())?;
    println!("modes {:?}, {} branches, dropped weight {:e}", report.modes, report.branches.len(), report.dropped_weight);
    println!("error of the realized branch choice: {:.4e}", report.error_probability);
    let out = std::env::temp_dir().join("gkplab-tree-report");
    write_report(&report, &out)?;
    println!("report written to {}", out.display());

    let script = ProtocolScript::load(&path)?;
    print!("{}", sweep_script(&script)?.to_csv());
    Ok(())
}
