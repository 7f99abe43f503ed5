//! Applies the SPA-PT channel to the four Bell states and a product state and
//! prints the output spectra next to the exact partial transpose.

use spapt::channels;
use spapt::qmath;
use spapt::states::{self, BellKind, DensityMatrix, PureState};

fn main() -> spapt::Result<()> {
    let spa = channels::spa_pt();
    let built = spa.superoperator()?;
    let dev = built.max_abs_diff(&channels::spa_pt_closed_form());
    println!("SPA-PT = (1/9) PT + (8/9) I/4 tr: max deviation {dev:.2e}\n");

    let mut inputs: Vec<(String, DensityMatrix)> = BellKind::ALL
        .iter()
        .map(|&k| (k.to_string(), states::bell(k)))
        .collect();
    inputs.push((
        "|00>".into(),
        DensityMatrix::from_pure(&PureState::basis(4, 0)?),
    ));

    println!(
        "{:<6} {:>34} {:>34}",
        "state", "spectrum of PT", "spectrum of SPA-PT"
    );
    for (name, rho) in &inputs {
        let pt = qmath::eigvalsh(&channels::ideal_pt(rho)?)?;
        let out = spa.apply(rho)?.spectrum();
        println!("{name:<6} {:>34} {:>34}", fmt(&pt), fmt(&out));
    }
    println!(
        "\nentangled iff the SPA-PT minimum eigenvalue is below 2/9 = {:.4}",
        2.0 / 9.0
    );
    Ok(())
}

fn fmt(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:7.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}
