//! Prepares states, writes them as state files, reads them back and runs
//! every detection route on them.

use spapt::harness::{self, DetectMethod, RunConfig};

fn main() -> spapt::Result<()> {
    let dir = std::env::temp_dir().join("spapt-example");
    std::fs::create_dir_all(&dir)?;
    let specs: [(&str, &[&str]); 4] = [
        ("bell", &["psi-"]),
        ("werner", &["p=0.8"]),
        ("mems", &["p=0.4"]),
        ("rho_family", &["p=0.12", "alpha=0.71"]),
    ];
    let cfg = RunConfig::new("detect");
    for (family, params) in specs {
        let params: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        let file = harness::prepare(family, &params)?;
        let path = dir.join(format!("{family}.json"));
        file.save(&path)?;
        let rho = harness::load_state(&path)?;
        print!("{family:<11} {:<22}", params.join(" "));
        for method in DetectMethod::ALL {
            let r = harness::detect(&rho, method, &cfg)?;
            let lam = r.f64_at(0, "lambda_min").unwrap_or(f64::NAN);
            print!(" {method}={lam:.4}");
        }
        println!();
    }
    Ok(())
}
