//! Minimum eigenvalues for the four Bell states from the exact channel, a
//! simulated experiment (trajectories plus tomography) and sampled
//! measurement tables.
//!
//! Usage: cargo run --release --example table1 [shots] [seed]

use spapt::harness::{self, OutputFormat, RunConfig};

fn main() -> spapt::Result<()> {
    let mut args = std::env::args().skip(1);
    let shots = args.next().and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let report = harness::table1(&RunConfig::new("table1").with_shots(shots).with_seed(seed))?;
    print!("{}", report.render(OutputFormat::Csv)?);
    Ok(())
}
