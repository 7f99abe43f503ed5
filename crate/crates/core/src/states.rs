//! Validated quantum states, the state families used in the sweeps, and
//! scalar functionals (fidelity, tangle, linear entropy).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::qmath::{self, c, re, ComplexMatrix, C64};

pub const TRACE_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-12;

/// A density matrix on one or two qubits: Hermitian, unit trace and PSD,
/// each within `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let dim = mat.dim();
        if dim != 2 && dim != 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        let herr = mat.hermiticity_error();
        if herr > qmath::HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (max |m - m†| = {herr:e})"
            )));
        }
        let tr = mat.trace();
        if (tr - re(1.0)).norm() > TRACE_TOL {
            return Err(Error::Validation(format!(
                "density matrix trace is {:.12} {:+.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        let min = qmath::min_eigenvalue(&mat)?;
        if min < -qmath::PSD_TOL {
            return Err(Error::Validation(format!(
                "density matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self { mat })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            mat: ComplexMatrix::projector(psi.amplitudes()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// `ρ_A ⊗ ρ_B`.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        if a.dim() != 2 || b.dim() != 2 {
            return Err(Error::UnsupportedDimension(a.dim() * b.dim()));
        }
        Self::new(a.mat.kron(&b.mat))
    }

    /// Convex combination `Σ w_k ρ_k`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let mut acc = ComplexMatrix::zeros(first.1.dim());
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidInput(format!("negative mixture weight {w}")));
            }
            acc = acc.checked_add(&rho.mat.scale_real(*w))?;
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum()[0]
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        qmath::eigvalsh(&self.mat).expect("validated density matrix has a spectrum")
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// `(U ρ U†)` for a unitary of matching dimension.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let out = u.checked_mul(&self.mat)?.checked_mul(&u.adjoint())?;
        Self::new(out)
    }

    /// Random full-rank two-qubit state: a mixture of four Haar-random pure
    /// states with weights drawn uniformly from the simplex.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let weights: Vec<f64> = (0..4).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = ComplexMatrix::zeros(4);
        for w in weights {
            let psi = PureState::random(4, rng);
            acc = &acc + &ComplexMatrix::projector(psi.amplitudes()).scale_real(w / total);
        }
        Self::new(acc.hermitian_part()).expect("convex mixture of pure states is a state")
    }
}

/// A normalized state vector on one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Validates a vector that must already have unit norm.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        check_qubit_dim(amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state vector has norm {norm}, expected 1"
            )));
        }
        Ok(Self { amps })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        check_qubit_dim(amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amps: amps.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_qubit_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range"
            )));
        }
        let mut amps = vec![re(0.0); dim];
        amps[index] = re(1.0);
        Ok(Self { amps })
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let amps: Vec<C64> = (0..dim)
            .map(|_| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        Self::normalized(amps).expect("gaussian vector is nonzero")
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Entrywise complex conjugate `|ψ*⟩`.
    pub fn conj(&self) -> Self {
        Self {
            amps: self.amps.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Self::normalized(u.mul_vec(&self.amps))
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        Self::normalized(qmath::kron_vec(&self.amps, &other.amps))
    }
}

fn check_qubit_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} = {x} is outside [0, 1]"
        )))
    }
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        }
    }

    pub fn vector(self) -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = re(0.0);
        let amps = match self {
            BellKind::PhiPlus => vec![re(h), z, z, re(h)],
            BellKind::PhiMinus => vec![re(h), z, z, re(-h)],
            BellKind::PsiPlus => vec![z, re(h), re(h), z],
            BellKind::PsiMinus => vec![z, re(h), re(-h), z],
        };
        PureState { amps }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', ' '], "").as_str() {
            "phi+" | "phiplus" => Ok(BellKind::PhiPlus),
            "phi-" | "phiminus" => Ok(BellKind::PhiMinus),
            "psi+" | "psiplus" => Ok(BellKind::PsiPlus),
            "psi-" | "psiminus" => Ok(BellKind::PsiMinus),
            _ => Err(Error::InvalidInput(format!("unknown Bell state '{s}'"))),
        }
    }
}

pub fn bell(kind: BellKind) -> DensityMatrix {
    DensityMatrix::from_pure(&kind.vector())
}

/// `ρ_W = p I/4 + (1-p)|ψ⁻⟩⟨ψ⁻|`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    let singlet = bell(BellKind::PsiMinus).into_matrix();
    let noise = ComplexMatrix::identity(4).scale_real(0.25);
    DensityMatrix::new(&noise.scale_real(p) + &singlet.scale_real(1.0 - p))
}

/// Maximally entangled mixed state with concurrence `p`:
/// `f(p)(|00⟩⟨00| + |11⟩⟨11|) + (p/2)(|00⟩⟨11| + |11⟩⟨00|) + (1-2f(p))|01⟩⟨01|`,
/// `f(p) = p/2` for `p ≥ 2/3`, else `1/3`.
pub fn mems(p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    let f = if p >= 2.0 / 3.0 { p / 2.0 } else { 1.0 / 3.0 };
    let mut m = ComplexMatrix::zeros(4);
    m[(0, 0)] = re(f);
    m[(3, 3)] = re(f);
    m[(0, 3)] = re(p / 2.0);
    m[(3, 0)] = re(p / 2.0);
    m[(1, 1)] = re(1.0 - 2.0 * f);
    DensityMatrix::new(m)
}

/// `|ψ⟩ = α|01⟩ - √(1-α²)|10⟩` and its partner `|ψ⊥⟩ = √(1-α²)|01⟩ + α|10⟩`.
pub fn family_vectors(alpha: f64) -> Result<(PureState, PureState)> {
    check_unit_interval("alpha", alpha)?;
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let z = re(0.0);
    let psi = PureState::normalized(vec![z, re(alpha), re(-beta), z])?;
    let perp = PureState::normalized(vec![z, re(beta), re(alpha), z])?;
    Ok((psi, perp))
}

/// `ρ(p, α) = (1-p)|ψ⟩⟨ψ| + p|ψ⊥⟩⟨ψ⊥|`.
pub fn family_rho(p: f64, alpha: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    let (psi, perp) = family_vectors(alpha)?;
    DensityMatrix::new(&psi.projector().scale_real(1.0 - p) + &perp.projector().scale_real(p))
}

/// The nine `(p, α)` settings of the state sweep.
pub const SWEEP_STATES: [(f64, f64); 9] = [
    (0.0, 0.71),
    (0.12, 0.71),
    (0.25, 0.71),
    (0.3, 0.71),
    (0.51, 0.71),
    (0.0, 0.92),
    (0.0, 0.97),
    (0.37, 0.86),
    (0.42, 0.92),
];

/// Uhlmann fidelity `[tr √(√ρ σ √ρ)]²`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let s = qmath::psd_sqrt(rho.matrix())?;
    let inner = (&(&s * sigma.matrix()) * &s).hermitian_part();
    let spec = qmath::herm_eig(&inner)?;
    let root_trace: f64 = spec.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Squared Wootters concurrence.
pub fn tangle(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence(rho)?.powi(2))
}

/// Wootters concurrence `max(0, λ₁ - λ₂ - λ₃ - λ₄)`.
///
/// The `λ_i` (square roots of the eigenvalues of `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`)
/// are computed as the singular values of `τ = Aᵀ (σ_y⊗σ_y) A` for the
/// factorization `ρ = A A†`, read off the Hermitian dilation `[[0, τ], [τ†, 0]]`
/// so that small values are not squared on the way.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    let spec = qmath::herm_eig(rho.matrix())?;
    // Eigenvalues at round-off scale are treated as exact zeros.
    let cutoff = 1e-14 * spec.max().abs().max(1.0);
    let factor = ComplexMatrix::from_fn(4, |i, k| {
        let l = spec.eigenvalues[k];
        if l > cutoff {
            spec.eigenvectors[k][i] * l.sqrt()
        } else {
            re(0.0)
        }
    });
    let yy = qmath::sigma_y().kron(&qmath::sigma_y());
    let tau = &(&factor.transpose() * &yy) * &factor;
    let dilation = ComplexMatrix::from_fn(8, |i, j| match (i < 4, j < 4) {
        (true, false) => tau[(i, j - 4)],
        (false, true) => tau[(j, i - 4)].conj(),
        _ => re(0.0),
    });
    let ev = qmath::eigvalsh(&dilation)?;
    // Ascending ±σ pairs: the top four are the singular values.
    let lambdas: Vec<f64> = ev[4..].iter().rev().map(|x| x.max(0.0)).collect();
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// Normalized linear entropy `(4/3)(1 - tr ρ²)` of a two-qubit state.
pub fn linear_entropy(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    Ok(((4.0 / 3.0) * (1.0 - rho.purity())).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Closed-form concurrence for X-shaped states:
    // C = 2 max(0, |ρ03| - √(ρ11 ρ22), |ρ12| - √(ρ00 ρ33)).
    fn x_state_concurrence(m: &ComplexMatrix) -> f64 {
        let d = |i: usize| m[(i, i)].re;
        let a = m[(0, 3)].norm() - (d(1) * d(2)).sqrt();
        let b = m[(1, 2)].norm() - (d(0) * d(3)).sqrt();
        2.0 * a.max(b).max(0.0)
    }

    #[test]
    fn bell_coherence_and_marginals() {
        assert!((bell(BellKind::PhiPlus).matrix()[(0, 3)] - re(0.5)).norm() < 1e-15);
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        for k in BellKind::ALL {
            let ra = qmath::partial_trace(bell(k).matrix(), qmath::Subsystem::A).unwrap();
            assert!(ra.max_abs_diff(&half) < 1e-15);
            assert!((tangle(&bell(k)).unwrap() - 1.0).abs() < 1e-10, "{k}");
            assert!((x_state_concurrence(bell(k).matrix()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_kind_parses() {
        assert_eq!("phi+".parse::<BellKind>().unwrap(), BellKind::PhiPlus);
        assert_eq!("PSI_MINUS".parse::<BellKind>().unwrap(), BellKind::PsiMinus);
        assert!("chi+".parse::<BellKind>().is_err());
    }

    #[test]
    fn werner_limits_and_range() {
        let w1 = werner(1.0).unwrap();
        assert!(
            w1.matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                < 1e-15
        );
        assert_eq!(werner(0.0).unwrap(), bell(BellKind::PsiMinus));
        assert!(werner(1.5).is_err());
        assert!(werner(-0.1).is_err());
    }

    #[test]
    fn werner_partial_transpose_minimum() {
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let pt = qmath::partial_transpose(werner(p).unwrap().matrix()).unwrap();
            let min = qmath::min_eigenvalue(&pt).unwrap();
            let expected = (3.0 * p - 2.0) / 4.0;
            assert!((min - expected).abs() < 1e-12, "p={p}: {min}");
        }
    }

    #[test]
    fn mems_examples() {
        assert!(
            mems(1.0)
                .unwrap()
                .matrix()
                .max_abs_diff(bell(BellKind::PhiPlus).matrix())
                < 1e-15
        );
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let m = mems(p).unwrap();
            assert!((m.matrix().trace() - re(1.0)).norm() < 1e-12);
            let t = tangle(&m).unwrap();
            assert!((t - p * p).abs() < 1e-9, "p={p}: tangle {t}");
            assert!((x_state_concurrence(m.matrix()) - p).abs() < 1e-12);
        }
        assert!(mems(2.0).is_err());
    }

    #[test]
    fn family_rho_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = family_rho(0.0, h).unwrap();
        assert!(r.matrix().max_abs_diff(bell(BellKind::PsiMinus).matrix()) < 1e-15);

        for alpha in [0.0, 0.3, 0.71, 0.92, 1.0] {
            let half = family_rho(0.5, alpha).unwrap();
            assert!(tangle(&half).unwrap() < 1e-12, "alpha={alpha}");
        }

        let p = 0.3;
        let diag = family_rho(p, 0.0).unwrap();
        // α = 0 gives |ψ⟩ = -|10⟩ and |ψ⊥⟩ = |01⟩.
        let expected = ComplexMatrix::diag_real(&[0.0, p, 1.0 - p, 0.0]);
        assert!(diag.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(tangle(&diag).unwrap() < 1e-12);

        assert!(family_rho(0.2, 1.2).is_err());
        assert!(family_rho(-0.2, 0.5).is_err());
    }

    #[test]
    fn family_vectors_are_orthogonal() {
        for alpha in [0.0, 0.4, 0.86, 1.0] {
            let (psi, perp) = family_vectors(alpha).unwrap();
            assert!(psi.inner(&perp).norm() < 1e-15);
        }
    }

    #[test]
    fn family_rho_tangle_matches_x_state_form() {
        for (p, alpha) in SWEEP_STATES {
            let rho = family_rho(p, alpha).unwrap();
            let t = tangle(&rho).unwrap();
            let expected = x_state_concurrence(rho.matrix()).powi(2);
            assert!(
                (t - expected).abs() < 1e-9,
                "({p},{alpha}): {t} vs {expected}"
            );
            let s = linear_entropy(&rho).unwrap();
            assert!((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = DensityMatrix::random(&mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        let f = fidelity(&bell(BellKind::PhiPlus), &bell(BellKind::PhiMinus)).unwrap();
        assert!(f.abs() < 1e-12);
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let f = fidelity(&bell(BellKind::PsiMinus), &werner(p).unwrap()).unwrap();
            // ⟨ψ⁻|ρ_W|ψ⁻⟩ = (1-p) + p/4 for a pure first argument.
            assert!((f - (1.0 - 3.0 * p / 4.0)).abs() < 1e-9, "p={p}");
        }
        let one = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(fidelity(&one, &rho).is_err());
    }

    #[test]
    fn fidelity_of_pure_states_is_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = PureState::random(4, &mut rng);
            let b = PureState::random(4, &mut rng);
            let f = fidelity(&DensityMatrix::from_pure(&a), &DensityMatrix::from_pure(&b)).unwrap();
            assert!((f - a.inner(&b).norm_sqr()).abs() < 1e-8);
        }
    }

    #[test]
    fn tangle_examples() {
        assert!(tangle(&DensityMatrix::maximally_mixed(4).unwrap()).unwrap() < 1e-15);
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let t = tangle(&werner(p).unwrap()).unwrap();
            let expected = (1.0 - 1.5 * p).max(0.0).powi(2);
            assert!((t - expected).abs() < 1e-9, "p={p}: {t}");
        }
    }

    #[test]
    fn tangle_of_pure_states_matches_determinant_form() {
        // Pure states: C = 2|a d - b c| for amplitudes (a, b, c, d).
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let psi = PureState::random(4, &mut rng);
            let a = psi.amplitudes();
            let expected = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
            let got = concurrence(&DensityMatrix::from_pure(&psi)).unwrap();
            assert!((got - expected).abs() < 1e-6, "{got} vs {expected}");
        }
    }

    #[test]
    fn linear_entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pure = DensityMatrix::from_pure(&PureState::random(4, &mut rng));
        assert!(linear_entropy(&pure).unwrap() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!((linear_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        // werner(1/2) = diag-in-Bell-basis (1/8, 1/8, 1/8, 5/8): tr ρ² = 28/64.
        let s = linear_entropy(&werner(0.5).unwrap()).unwrap();
        assert!((s - (4.0 / 3.0) * (1.0 - 28.0 / 64.0)).abs() < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(3).scale_real(1.0 / 3.0)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag_real(&[1.2, -0.2])).is_err());
        let mut m = ComplexMatrix::identity(2).scale_real(0.5);
        m[(0, 1)] = re(0.1);
        assert!(DensityMatrix::new(m).is_err());
        assert!(PureState::new(vec![re(1.0), re(1.0)]).is_err());
        assert!(PureState::normalized(vec![re(0.0), re(0.0)]).is_err());
    }

    #[test]
    fn random_states_are_valid_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let x = DensityMatrix::random(&mut a);
            let y = DensityMatrix::random(&mut b);
            assert_eq!(x, y);
            assert!(x.min_eigenvalue() > -1e-12);
        }
    }
}
