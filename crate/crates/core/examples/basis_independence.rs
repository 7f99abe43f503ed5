//! Contrasts a fixed entanglement witness, which only sees states aligned with
//! the basis it was built for, with the SPA-PT test, which flags every Bell
//! state the same way.

use spapt::detection::{self, Method};
use spapt::states::{self, BellKind};

fn main() -> spapt::Result<()> {
    let q =
        detection::witness_projector_for(&states::bell(BellKind::PhiPlus))?.expect("phi+ is NPT");
    println!(
        "{:<6} {:>12} {:>14} {:>12}",
        "state", "tr[W rho]", "SPA-PT min", "verdict"
    );
    for kind in BellKind::ALL {
        let rho = states::bell(kind);
        let w = detection::witness_expectation(&rho, &q)?;
        let v = detection::detect_state(&rho, Method::SpaSpectrum)?;
        println!(
            "{kind:<6} {w:>12.4} {:>14.6} {:>12}",
            v.lambda_min, v.verdict
        );
    }
    Ok(())
}
