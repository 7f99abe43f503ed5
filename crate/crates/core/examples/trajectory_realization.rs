//! Runs the local measure-and-prepare protocol one copy at a time and shows
//! the ensemble output converging to the exact channel output.
//!
//! Usage: cargo run --release --example trajectory_realization [seed]

use spapt::channels;
use spapt::states::{self, BellKind};
use spapt::tomography::{self, ShotConfig};

fn main() -> spapt::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let rho = states::bell(BellKind::PsiPlus);
    let exact = channels::spa_pt().apply(&rho)?;
    println!("input psi+, seed {seed}");
    println!(
        "{:>10} {:>12} {:>12} {:>18}",
        "runs", "fidelity", "min eig", "branches (T, D)"
    );
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let run = tomography::simulate_trajectories(&rho, &ShotConfig::new(n, seed)?)?;
        let f = states::fidelity(&run.state, &exact)?;
        println!(
            "{n:>10} {f:>12.6} {:>12.5} {:>18}",
            run.state.min_eigenvalue(),
            format!("{:?}", run.branch_counts)
        );
    }
    println!("exact min eigenvalue {:.5}", exact.min_eigenvalue());
    Ok(())
}
