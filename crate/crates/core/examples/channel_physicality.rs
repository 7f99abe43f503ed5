//! Certifies the building blocks as physical channels through their Choi
//! matrices, and shows that the bare partial transpose is not.

use spapt::channels::{self, QuantumChannel};

fn main() -> spapt::Result<()> {
    let named = [
        ("spa_pt", channels::spa_pt()),
        (
            "spa_transpose",
            QuantumChannel::MeasurePrepare(channels::spa_transpose()),
        ),
        (
            "spa_inversion",
            QuantumChannel::MeasurePrepare(channels::spa_inversion()),
        ),
        ("depolarize", channels::depolarize()),
        ("partial_transpose", channels::partial_transpose_map()),
    ];
    println!(
        "{:<18} {:>16} {:>6} {:>6}",
        "channel", "min eig(Choi)", "CP", "TP"
    );
    for (name, ch) in &named {
        let min = ch.choi()?.min_eigenvalue()?;
        println!(
            "{name:<18} {min:>16.3e} {:>6} {:>6}",
            ch.is_cp()?,
            ch.is_tp()?
        );
    }

    let kraus = channels::spa_pt().to_kraus()?;
    println!("\nSPA-PT needs {} Kraus operators", kraus.operators().len());
    Ok(())
}
