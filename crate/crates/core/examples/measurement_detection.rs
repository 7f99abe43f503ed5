//! Detects entanglement from measured probabilities alone: builds the
//! operator from an exact and a sampled probability table and compares its
//! minimum eigenvalue with the 2/9 threshold along the Werner family.

use spapt::detection::{self, Evidence, Method};
use spapt::states;
use spapt::tomography::{self, ShotConfig};

fn main() -> spapt::Result<()> {
    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>12}",
        "p", "(p+2)/12", "ideal", "sampled", "verdict"
    );
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let rho = states::werner(p)?;
        let ideal = detection::detect_state(&rho, Method::FHat)?;
        let table = tomography::sample_table(&rho, &ShotConfig::new(100_000, 7 + i)?)?;
        let sampled = detection::detect(Evidence::Table(&table), Method::FHat)?;
        println!(
            "{p:>5.2} {:>10.5} {:>10.5} {:>10.5} {:>12}",
            (p + 2.0) / 12.0,
            ideal.lambda_min,
            sampled.lambda_min,
            sampled.verdict
        );
    }
    println!("the ideal verdict flips at p = 2/3");
    Ok(())
}
