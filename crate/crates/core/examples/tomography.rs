//! Two-qubit Pauli tomography: sampled expectations, linear inversion and
//! projection onto the nearest physical state.

use spapt::states::{self, BellKind};
use spapt::tomography::{self, PauliExpectations, ShotConfig};

fn main() -> spapt::Result<()> {
    for shots in [1_000u64, 10_000, 100_000] {
        let cfg = ShotConfig::new(shots, 3)?;
        print!("{shots:>7} shots/setting:");
        for kind in BellKind::ALL {
            let rho = states::bell(kind);
            let e = PauliExpectations::sampled(&rho, &cfg)?;
            let raw = tomography::qst_linear_inversion(&e);
            let est = tomography::project_to_physical(&raw)?;
            print!("  {kind} F={:.4}", states::fidelity(&est, &rho)?);
        }
        println!();
    }
    Ok(())
}
