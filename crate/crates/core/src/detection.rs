//! Entanglement verdicts.
//!
//! Three routes produce a minimum eigenvalue that is compared with a
//! threshold:
//!
//! | method          | eigenvalue of                          | threshold |
//! |-----------------|----------------------------------------|-----------|
//! | `ppt`           | `(𝟙⊗T)[ρ]`                             | 0         |
//! | `spa_spectrum`  | `SPA-PT[ρ]`                            | 2/9       |
//! | `f_hat`         | operator rebuilt from a probability table | 2/9    |
//!
//! The `f_hat` route never touches the state: it assembles the SPA-PT output
//! from the measured statistics alone. On side A of the `𝟙⊗T̃` branch the
//! projectors `|t_i⟩⟨t_i|` are inverted with their dual frame `{D_i}`
//! (`tr[D_i |t_j⟩⟨t_j|] = δ_ij`), giving
//!
//! ```text
//! F̂ = 1/3 Σ_ij p_ij D_i ⊗ |v_j⟩⟨v_j|  +  2/3 Σ_k (q_k + r_k) σ_y|v_k⟩⟨v_k|σ_y ⊗ I/2
//! ```
//!
//! which equals `SPA-PT[ρ]` exactly for an ideal table. The operator with the
//! literal weights `1/3 Σ p_ij |t_i⟩⟨t_i| ⊗ M_j + 1/3 Σ_k M_k ⊗ (q_k|0⟩⟨0| + r_k|1⟩⟨1|)`
//! is available as [`f_hat_printed`] for comparison; its spectrum is not
//! the SPA-PT spectrum (its trace is 1/2) and it is not used for verdicts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{self, SPA_PT_THRESHOLD};
use crate::error::{Error, Result};
use crate::qmath::{self, re, ComplexMatrix};
use crate::states::DensityMatrix;
use crate::tomography::{self, ProbabilityTable};

/// Eigenvalues this close below the threshold count as on it.
pub const VERDICT_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ppt,
    SpaSpectrum,
    FHat,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ppt => "ppt",
            Method::SpaSpectrum => "spa_spectrum",
            Method::FHat => "f_hat",
        }
    }

    pub fn threshold(self) -> f64 {
        match self {
            Method::Ppt => 0.0,
            Method::SpaSpectrum | Method::FHat => SPA_PT_THRESHOLD,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ppt" => Ok(Method::Ppt),
            "spa_spectrum" => Ok(Method::SpaSpectrum),
            "f_hat" => Ok(Method::FHat),
            other => Err(Error::InvalidInput(format!(
                "unknown detection method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Entangled,
    /// Not flagged; for the SPA routes this does not certify separability.
    Undetected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Entangled => "entangled",
            Verdict::Undetected => "undetected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionVerdict {
    pub lambda_min: f64,
    pub threshold: f64,
    pub margin: f64,
    pub method: Method,
    pub verdict: Verdict,
    /// Shots per setting behind the eigenvalue; 0 for exact evaluation.
    pub shots: u64,
}

impl DetectionVerdict {
    pub fn new(lambda_min: f64, method: Method, shots: u64) -> Self {
        let threshold = method.threshold();
        let verdict = if lambda_min < threshold - VERDICT_GUARD {
            Verdict::Entangled
        } else {
            Verdict::Undetected
        };
        Self {
            lambda_min,
            threshold,
            margin: (lambda_min - threshold).abs(),
            method,
            verdict,
            shots,
        }
    }

    pub fn is_entangled(&self) -> bool {
        self.verdict == Verdict::Entangled
    }
}

/// Hermitian operator assembled from measurement statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct FHatOperator {
    mat: ComplexMatrix,
}

impl FHatOperator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }
}

/// Dual frame of the tomography projectors: `tr[D_i |t_j⟩⟨t_j|] = δ_ij`.
pub fn dual_frame() -> [ComplexMatrix; 4] {
    let proj = tomography::tomo_basis().map(|t| t.projector());
    let mut gram = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            gram[i][j] = proj[i].trace_product(&proj[j]).re;
        }
    }
    let inv = invert4(gram).expect("tomography projectors are linearly independent");
    std::array::from_fn(|i| {
        let mut d = ComplexMatrix::zeros(2);
        for (j, p) in proj.iter().enumerate() {
            d = &d + &p.scale_real(inv[i][j]);
        }
        d
    })
}

fn invert4(m: [[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut a = m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col];
        for k in 0..4 {
            a[col][k] /= scale;
            inv[col][k] /= scale;
        }
        for row in 0..4 {
            if row != col {
                let f = a[row][col];
                for k in 0..4 {
                    a[row][k] -= f * a[col][k];
                    inv[row][k] -= f * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

/// Rebuilds the SPA-PT output from a probability table.
pub fn f_hat(table: &ProbabilityTable) -> FHatOperator {
    let duals = dual_frame();
    let transposed = channels::spa_transpose();
    let inverted = channels::spa_inversion();
    let half = ComplexMatrix::identity(2).scale_real(0.5);
    let w = channels::TRANSPOSE_BRANCH_WEIGHT;

    let mut mat = ComplexMatrix::zeros(4);
    for (i, dual) in duals.iter().enumerate() {
        for (j, v) in transposed.prepared().iter().enumerate() {
            let term = dual.kron(&v.projector());
            mat = &mat + &term.scale_real(w * table.p[i][j]);
        }
    }
    for (k, v) in inverted.prepared().iter().enumerate() {
        let term = v.projector().kron(&half);
        mat = &mat + &term.scale_real((1.0 - w) * (table.q[k] + table.r[k]));
    }
    FHatOperator {
        mat: mat.hermitian_part(),
    }
}

/// The operator with literal weights 1/3 and 1/3:
/// `1/3 Σ p_ij |t_i⟩⟨t_i| ⊗ M_j + 1/3 Σ_k M_k ⊗ (q_k|0⟩⟨0| + r_k|1⟩⟨1|)`.
pub fn f_hat_printed(table: &ProbabilityTable) -> FHatOperator {
    let povm = channels::spa_povm();
    let basis = tomography::tomo_basis();
    let mut mat = ComplexMatrix::zeros(4);
    for (i, t) in basis.iter().enumerate() {
        for (j, m) in povm.iter().enumerate() {
            mat = &mat + &t.projector().kron(m).scale_real(table.p[i][j] / 3.0);
        }
    }
    for (k, m) in povm.iter().enumerate() {
        let diag = ComplexMatrix::diag_real(&[table.q[k], table.r[k]]);
        mat = &mat + &m.kron(&diag).scale_real(1.0 / 3.0);
    }
    FHatOperator {
        mat: mat.hermitian_part(),
    }
}

/// Smallest eigenvalue of `F̂` (Jacobi route; authoritative).
pub fn lambda_min_d(f: &FHatOperator) -> Result<f64> {
    qmath::min_eigenvalue(&f.mat)
}

/// Smallest root of `det(F̂ - κI) = 0`, found on the characteristic polynomial.
///
/// The polynomial is real-rooted because `F̂` is Hermitian, so Newton's
/// method started left of every root (Gershgorin bound) climbs monotonically
/// to the smallest one, repeated roots included.
pub fn lambda_min_det_root(f: &FHatOperator) -> Result<f64> {
    let m = &f.mat;
    let n = m.dim();
    let coeffs = characteristic_polynomial(m);
    let eval = |x: f64| {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &cf in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + cf;
        }
        (p, dp)
    };
    let lower = (0..n)
        .map(|i| {
            let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
            m[(i, i)].re - radius
        })
        .fold(f64::INFINITY, f64::min);
    let mut x = lower - 1e-3 * (1.0 + lower.abs());
    for _ in 0..500 {
        let (p, dp) = eval(x);
        if p == 0.0 || dp == 0.0 {
            return Ok(x);
        }
        let step = p / dp;
        // Monotone from the left: a non-positive step means we are at the root.
        if step >= 0.0 || !step.is_finite() {
            return Ok(x);
        }
        let next = x - step;
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence(500))
}

/// Coefficients `c_0..=c_n` of `det(κI - m) = Σ c_k κ^k` (Faddeev–LeVerrier).
fn characteristic_polynomial(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let eye = ComplexMatrix::identity(n);
    let mut mk = ComplexMatrix::zeros(n);
    for k in 1..=n {
        mk = &(m * &mk) + &eye.scale_real(coeffs[n - k + 1]);
        coeffs[n - k] = -(m * &mk).trace().re / k as f64;
    }
    coeffs
}

/// What a verdict is computed from.
#[derive(Debug, Clone, Copy)]
pub enum Evidence<'a> {
    State(&'a DensityMatrix),
    Table(&'a ProbabilityTable),
}

/// Runs one detection route. `ppt` and `spa_spectrum` need the state;
/// `f_hat` takes a table, or builds the ideal one from a state.
pub fn detect(evidence: Evidence<'_>, method: Method) -> Result<DetectionVerdict> {
    match (method, evidence) {
        (Method::Ppt, Evidence::State(rho)) => {
            let lambda = qmath::min_eigenvalue(&channels::ideal_pt(rho)?)?;
            Ok(DetectionVerdict::new(lambda, method, 0))
        }
        (Method::SpaSpectrum, Evidence::State(rho)) => {
            require_two_qubit(rho)?;
            let out = channels::spa_pt().apply(rho)?;
            Ok(DetectionVerdict::new(out.min_eigenvalue(), method, 0))
        }
        (Method::FHat, Evidence::State(rho)) => {
            let table = tomography::ideal_probabilities(rho)?;
            detect(Evidence::Table(&table), method)
        }
        (Method::FHat, Evidence::Table(table)) => {
            table.validate()?;
            let lambda = lambda_min_d(&f_hat(table))?;
            Ok(DetectionVerdict::new(
                lambda,
                method,
                table.shots_per_setting,
            ))
        }
        (_, Evidence::Table(_)) => Err(Error::InvalidInput(format!(
            "method '{method}' needs a state, not a probability table"
        ))),
    }
}

pub fn detect_state(rho: &DensityMatrix, method: Method) -> Result<DetectionVerdict> {
    detect(Evidence::State(rho), method)
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    Ok(())
}

/// `tr[W ρ]` for the witness `W = (𝟙⊗T)(Q)` built from a rank-one projector
/// `Q`; equal to `tr[Q (𝟙⊗T)(ρ)]`. A negative value certifies entanglement.
pub fn witness_expectation(rho: &DensityMatrix, q_projector: &ComplexMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    if q_projector.dim() != 4 {
        return Err(Error::UnsupportedDimension(q_projector.dim()));
    }
    let idem = (q_projector * q_projector).max_abs_diff(q_projector);
    let rank = q_projector.trace();
    if !q_projector.is_hermitian(1e-9) || idem > 1e-9 || (rank - re(1.0)).norm() > 1e-9 {
        return Err(Error::InvalidInput(
            "witness needs a rank-one orthogonal projector".into(),
        ));
    }
    let witness = qmath::partial_transpose(q_projector)?;
    Ok(witness.trace_product(rho.matrix()).re)
}

/// Witness projector for a state: `Q = |e⟩⟨e|` with `|e⟩` the eigenvector of
/// the smallest eigenvalue of `(𝟙⊗T)[ρ]`, or `None` when that eigenvalue is
/// not negative (the state is PPT and this construction yields no witness).
pub fn witness_projector_for(rho: &DensityMatrix) -> Result<Option<ComplexMatrix>> {
    let spec = qmath::herm_eig(&channels::ideal_pt(rho)?)?;
    if spec.min() >= -VERDICT_GUARD {
        return Ok(None);
    }
    Ok(Some(ComplexMatrix::projector(&spec.eigenvectors[0])))
}
