//! Writes the tangle / linear-entropy sweep (nine mixed states plus the Werner
//! and MEMS curves) as plot-ready CSV.
//!
//! Usage: cargo run --release --example fig3_sweep [out.csv]

use std::path::PathBuf;

use spapt::harness::{self, OutputFormat, RunConfig};

fn main() -> spapt::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let report = harness::fig3(&RunConfig::new("fig3"))?;
    harness::emit(&report.render(OutputFormat::Csv)?, out.as_deref())?;
    if let Some(p) = out {
        eprintln!("wrote {} rows to {}", report.rows.len(), p.display());
    }
    Ok(())
}
