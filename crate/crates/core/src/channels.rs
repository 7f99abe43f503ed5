//! Linear maps on qubit operators and the structural physical approximation
//! of the two-qubit partial transpose.
//!
//! A map is held in one of three interchangeable representations (Kraus
//! operators, a measure-and-prepare table, or a superoperator acting on
//! column-stacked matrices) or as a tensor product / convex mixture of other
//! maps. Non-physical maps such as the transpose are representable too; use
//! [`QuantumChannel::is_cp`] and [`QuantumChannel::is_tp`] to certify.
//!
//! The approximate partial transpose decomposes into local measure-and-prepare
//! branches:
//!
//! ```text
//! SPA-PT[ρ] = 1/3 (𝟙 ⊗ T̃)[ρ] + 2/3 (Θ̃ ⊗ D)[ρ]
//!           = 1/9 (𝟙 ⊗ T)[ρ] + 2/9 tr(ρ) I₄
//! ```
//!
//! with `T̃[ρ] = Σ_k tr[M_k ρ] |v_k⟩⟨v_k| = ρᵀ/3 + tr(ρ) I₂/3`,
//! `Θ̃[·] = σ_y T̃[·] σ_y` and `D` full depolarization.

use crate::error::{Error, Result};
use crate::qmath::{self, c, re, ComplexMatrix, C64};
use crate::states::{DensityMatrix, PureState};

/// Tolerance for POVM completeness and effect positivity.
pub const POVM_TOL: f64 = 1e-10;
/// Choi-matrix tolerance for the CP and TP certificates.
pub const CHOI_TOL: f64 = 1e-9;
/// Trace drift allowed when applying a channel to a state.
pub const APPLY_TRACE_TOL: f64 = 1e-10;

/// Weight of the `𝟙 ⊗ T̃` branch; the `Θ̃ ⊗ D` branch takes the rest.
pub const TRANSPOSE_BRANCH_WEIGHT: f64 = 1.0 / 3.0;
/// Minimum output eigenvalue of the SPA-PT on separable inputs.
pub const SPA_PT_THRESHOLD: f64 = 2.0 / 9.0;
/// Scale applied to the partial-transpose spectrum by the SPA-PT.
pub const SPA_PT_SCALE: f64 = 1.0 / 9.0;

/// A channel that measures a POVM and prepares a fixed pure state per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePrepareChannel {
    povm: Vec<ComplexMatrix>,
    prepared: Vec<PureState>,
}

impl MeasurePrepareChannel {
    pub fn new(povm: Vec<ComplexMatrix>, prepared: Vec<PureState>) -> Result<Self> {
        if povm.is_empty() || povm.len() != prepared.len() {
            return Err(Error::InvalidInput(format!(
                "{} effects but {} prepared states",
                povm.len(),
                prepared.len()
            )));
        }
        let d_in = povm[0].dim();
        let d_out = prepared[0].dim();
        let mut sum = ComplexMatrix::zeros(d_in);
        for (k, effect) in povm.iter().enumerate() {
            sum = sum.checked_add(effect)?;
            let min = qmath::min_eigenvalue(effect)?;
            if min < -POVM_TOL {
                return Err(Error::Validation(format!(
                    "POVM effect {k} is not PSD (min eigenvalue {min:e})"
                )));
            }
        }
        if prepared.iter().any(|s| s.dim() != d_out) {
            return Err(Error::InvalidInput(
                "prepared states differ in dimension".into(),
            ));
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d_in));
        if dev > POVM_TOL {
            return Err(Error::Validation(format!(
                "POVM effects do not sum to identity (deviation {dev:e})"
            )));
        }
        Ok(Self { povm, prepared })
    }

    pub fn povm(&self) -> &[ComplexMatrix] {
        &self.povm
    }

    pub fn prepared(&self) -> &[PureState] {
        &self.prepared
    }

    pub fn dim_in(&self) -> usize {
        self.povm[0].dim()
    }

    pub fn dim_out(&self) -> usize {
        self.prepared[0].dim()
    }

    /// Born-rule outcome probabilities `tr[M_k ρ]`.
    pub fn outcome_probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.povm.iter().map(|m| m.trace_product(rho).re).collect()
    }

    fn apply_raw(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out());
        for (effect, state) in self.povm.iter().zip(&self.prepared) {
            let w = effect.trace_product(m);
            out = &out + &state.projector().scale(w);
        }
        out
    }
}

/// A map given by Kraus operators `ρ ↦ Σ K ρ K†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Requires `Σ K†K = I` within [`CHOI_TOL`].
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInput("no Kraus operators".into()))?;
        let d = first.dim();
        let mut sum = ComplexMatrix::zeros(d);
        for k in &ops {
            sum = sum.checked_add(&(&k.adjoint() * k))?;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if dev > CHOI_TOL {
            return Err(Error::Validation(format!(
                "Kraus operators are not trace preserving (deviation {dev:e})"
            )));
        }
        Ok(Self { ops })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    fn apply_raw(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim());
        for k in &self.ops {
            out = &out + &(&(k * m) * &k.adjoint());
        }
        out
    }
}

/// Matrix of a linear map on column-stacked operators: `vec(Λ[m]) = S vec(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub dim_in: usize,
    pub dim_out: usize,
    pub mat: ComplexMatrix,
}

impl Superoperator {
    /// Only dimension-preserving maps are supported.
    pub fn new(dim: usize, mat: ComplexMatrix) -> Result<Self> {
        if mat.dim() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: mat.dim(),
            });
        }
        Ok(Self {
            dim_in: dim,
            dim_out: dim,
            mat,
        })
    }

    /// Tabulates a linear map from its action on the matrix units `|i⟩⟨j|`.
    pub fn from_map(dim: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let n = dim * dim;
        let mut mat = ComplexMatrix::zeros(n);
        for j in 0..dim {
            for i in 0..dim {
                let col = j * dim + i;
                let image = f(&ComplexMatrix::unit(dim, i, j)).vectorize();
                for (row, v) in image.into_iter().enumerate() {
                    mat[(row, col)] = v;
                }
            }
        }
        Self {
            dim_in: dim,
            dim_out: dim,
            mat,
        }
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: m.dim(),
            });
        }
        ComplexMatrix::unvectorize(&self.mat.mul_vec(&m.vectorize()))
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &Superoperator) -> Result<Superoperator> {
        Ok(Superoperator {
            dim_in: self.dim_in,
            dim_out: after.dim_out,
            mat: after.mat.checked_mul(&self.mat)?,
        })
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        self.mat.max_abs_diff(&other.mat)
    }

    pub fn linear_combination(terms: &[(f64, &Superoperator)]) -> Result<Superoperator> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidInput("empty combination".into()))?;
        let mut mat = ComplexMatrix::zeros(first.1.mat.dim());
        for (w, s) in terms {
            mat = mat.checked_add(&s.mat.scale_real(*w))?;
        }
        Superoperator::new(first.1.dim_in, mat)
    }
}

/// Choi matrix `(Λ ⊗ 𝟙)[|Ω⟩⟨Ω|]`, `|Ω⟩ = Σ_i |ii⟩/√d`; unit trace for
/// trace-preserving maps. Ordering is output ⊗ input.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub dim_in: usize,
    pub dim_out: usize,
    pub mat: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn min_eigenvalue(&self) -> Result<f64> {
        qmath::min_eigenvalue(&self.mat)
    }

    /// `tr_out[d_in · Choi]`, which is `I` exactly when the map is trace preserving.
    pub fn output_marginal(&self) -> ComplexMatrix {
        qmath::partial_trace_first(&self.mat, self.dim_out, self.dim_in)
            .scale_real(self.dim_in as f64)
    }
}

/// A linear map between qubit operator spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumChannel {
    Kraus(KrausChannel),
    MeasurePrepare(MeasurePrepareChannel),
    Superoperator(Superoperator),
    /// Independent action on the two tensor factors (first ⊗ second).
    Tensor(Box<QuantumChannel>, Box<QuantumChannel>),
    /// Convex mixture `Σ w_k Λ_k`: apply branch `k` with probability `w_k`.
    Mixture(Vec<(f64, QuantumChannel)>),
}

impl QuantumChannel {
    pub fn tensor(a: QuantumChannel, b: QuantumChannel) -> Self {
        QuantumChannel::Tensor(Box::new(a), Box::new(b))
    }

    /// Weights must be nonnegative, sum to one, and the branches must agree in dimension.
    pub fn mixture(branches: Vec<(f64, QuantumChannel)>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let d = first.1.dim_in();
        let mut total = 0.0;
        for (w, ch) in &branches {
            if *w < 0.0 {
                return Err(Error::InvalidInput(format!("negative branch weight {w}")));
            }
            if ch.dim_in() != d || ch.dim_out() != first.1.dim_out() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: ch.dim_in(),
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "branch weights sum to {total}"
            )));
        }
        Ok(QuantumChannel::Mixture(branches))
    }

    pub fn dim_in(&self) -> usize {
        match self {
            QuantumChannel::Kraus(k) => k.dim(),
            QuantumChannel::MeasurePrepare(mp) => mp.dim_in(),
            QuantumChannel::Superoperator(s) => s.dim_in,
            QuantumChannel::Tensor(a, b) => a.dim_in() * b.dim_in(),
            QuantumChannel::Mixture(bs) => bs[0].1.dim_in(),
        }
    }

    pub fn dim_out(&self) -> usize {
        match self {
            QuantumChannel::Kraus(k) => k.dim(),
            QuantumChannel::MeasurePrepare(mp) => mp.dim_out(),
            QuantumChannel::Superoperator(s) => s.dim_out,
            QuantumChannel::Tensor(a, b) => a.dim_out() * b.dim_out(),
            QuantumChannel::Mixture(bs) => bs[0].1.dim_out(),
        }
    }

    /// Action on an arbitrary (not necessarily physical) operator.
    pub fn apply_raw(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.dim() != self.dim_in() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in(),
                found: m.dim(),
            });
        }
        Ok(match self {
            QuantumChannel::Kraus(k) => k.apply_raw(m),
            QuantumChannel::MeasurePrepare(mp) => mp.apply_raw(m),
            QuantumChannel::Superoperator(s) => s.apply(m)?,
            QuantumChannel::Tensor(a, b) => {
                let (da, db) = (a.dim_in(), b.dim_in());
                let images_a = unit_images(a)?;
                let images_b = unit_images(b)?;
                let mut out = ComplexMatrix::zeros(a.dim_out() * b.dim_out());
                for i in 0..da {
                    for j in 0..da {
                        for k in 0..db {
                            for l in 0..db {
                                let w = m[(i * db + k, j * db + l)];
                                if w == re(0.0) {
                                    continue;
                                }
                                let term = images_a[i * da + j].kron(&images_b[k * db + l]);
                                out = &out + &term.scale(w);
                            }
                        }
                    }
                }
                out
            }
            QuantumChannel::Mixture(bs) => {
                let mut out = ComplexMatrix::zeros(self.dim_out());
                for (w, ch) in bs {
                    out = &out + &ch.apply_raw(m)?.scale_real(*w);
                }
                out
            }
        })
    }

    /// Applies the map to a state and validates the result as a density matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_raw(rho.matrix())?;
        let drift = (out.trace() - re(1.0)).norm();
        if drift > APPLY_TRACE_TOL {
            return Err(Error::Validation(format!(
                "channel changed the trace by {drift:e}"
            )));
        }
        DensityMatrix::new(out.hermitian_part())
    }

    pub fn superoperator(&self) -> Result<Superoperator> {
        if let QuantumChannel::Superoperator(s) = self {
            return Ok(s.clone());
        }
        let d = self.dim_in();
        if d != self.dim_out() {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.dim_out(),
            });
        }
        // Every variant accepts every d×d operator, so tabulation cannot fail.
        Ok(Superoperator::from_map(d, |m| {
            self.apply_raw(m).expect("matching dimension")
        }))
    }

    pub fn choi(&self) -> Result<ChoiMatrix> {
        let (d_in, d_out) = (self.dim_in(), self.dim_out());
        let mut mat = ComplexMatrix::zeros(d_in * d_out);
        for i in 0..d_in {
            for j in 0..d_in {
                let image = self.apply_raw(&ComplexMatrix::unit(d_in, i, j))?;
                let block = image.kron(&ComplexMatrix::unit(d_in, i, j));
                mat = &mat + &block;
            }
        }
        Ok(ChoiMatrix {
            dim_in: d_in,
            dim_out: d_out,
            mat: mat.scale_real(1.0 / d_in as f64),
        })
    }

    /// Completely positive: Choi matrix PSD within [`CHOI_TOL`].
    pub fn is_cp(&self) -> Result<bool> {
        Ok(self.choi()?.min_eigenvalue()? >= -CHOI_TOL)
    }

    /// Trace preserving: output marginal of the unnormalized Choi matrix is `I`.
    pub fn is_tp(&self) -> Result<bool> {
        let choi = self.choi()?;
        let dev = choi
            .output_marginal()
            .max_abs_diff(&ComplexMatrix::identity(choi.dim_in));
        Ok(dev <= CHOI_TOL)
    }

    /// Kraus form read off the Choi spectrum; fails for maps that are not CP.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let choi = self.choi()?;
        let (d_in, d_out) = (choi.dim_in, choi.dim_out);
        let spec = qmath::herm_eig(&choi.mat.scale_real(d_in as f64))?;
        if spec.min() < -CHOI_TOL {
            return Err(Error::NotPsd(spec.min()));
        }
        let mut ops = Vec::new();
        for (mu, w) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
            if *mu <= CHOI_TOL {
                continue;
            }
            let s = mu.sqrt();
            ops.push(ComplexMatrix::from_fn(d_out, |a, i| w[a * d_in + i] * s));
        }
        KrausChannel::new(ops)
    }
}

fn unit_images(ch: &QuantumChannel) -> Result<Vec<ComplexMatrix>> {
    let d = ch.dim_in();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(ch.apply_raw(&ComplexMatrix::unit(d, i, j))?);
        }
    }
    Ok(out)
}

pub fn identity(dim: usize) -> QuantumChannel {
    QuantumChannel::Kraus(KrausChannel {
        ops: vec![ComplexMatrix::identity(dim)],
    })
}

pub fn unitary(u: ComplexMatrix) -> Result<QuantumChannel> {
    Ok(QuantumChannel::Kraus(KrausChannel::new(vec![u])?))
}

/// The (non-physical) transpose on one qubit.
pub fn transpose_map() -> QuantumChannel {
    QuantumChannel::Superoperator(Superoperator::from_map(2, |m| m.transpose()))
}

/// The (non-physical) partial transpose `𝟙 ⊗ T` on two qubits.
pub fn partial_transpose_map() -> QuantumChannel {
    QuantumChannel::tensor(identity(2), transpose_map())
}

/// `ρ ↦ tr(ρ) I/d`.
pub fn replace_with_maximally_mixed(dim: usize) -> QuantumChannel {
    QuantumChannel::Superoperator(Superoperator::from_map(dim, |m| {
        ComplexMatrix::identity(dim).scale(m.trace() / dim as f64)
    }))
}

/// Single-qubit full depolarization as a uniformly random Pauli: Kraus `{σ_i / 2}`.
pub fn depolarize() -> QuantumChannel {
    QuantumChannel::Kraus(KrausChannel {
        ops: (0..4).map(|i| qmath::pauli(i).scale_real(0.5)).collect(),
    })
}

/// The four prepared states `|v_k⟩` of the approximate transpose, each
/// normalized with a real positive `|0⟩` amplitude.
///
/// With `ω = e^{2πi/3}`, `a = iω/(i + ω*)` and `b = iω/(i - ω*)`:
/// `|v₁⟩ ∝ |0⟩ + a|1⟩`, `|v₂⟩ ∝ |0⟩ - b|1⟩`, `|v₃⟩ ∝ |0⟩ + b|1⟩`,
/// `|v₄⟩ ∝ |0⟩ - a|1⟩`. They form a regular tetrahedron on the Bloch sphere.
pub fn v_states() -> [PureState; 4] {
    let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let i = c(0.0, 1.0);
    let a = i * omega / (i + omega.conj());
    let b = i * omega / (i - omega.conj());
    let one = re(1.0);
    [a, -b, b, -a].map(|coef| PureState::normalized(vec![one, coef]).expect("nonzero vector"))
}

/// Effects `M_k = |v_k*⟩⟨v_k*| / 2`.
pub fn spa_povm() -> Vec<ComplexMatrix> {
    v_states()
        .iter()
        .map(|v| v.conj().projector().scale_real(0.5))
        .collect()
}

/// Approximate transpose `T̃[ρ] = Σ_k tr[M_k ρ] |v_k⟩⟨v_k|`.
pub fn spa_transpose() -> MeasurePrepareChannel {
    MeasurePrepareChannel::new(spa_povm(), v_states().to_vec()).expect("complete POVM")
}

/// Approximate inversion `Θ̃[·] = σ_y T̃[·] σ_y`: same POVM, prepares `σ_y|v_k⟩`.
pub fn spa_inversion() -> MeasurePrepareChannel {
    let y = qmath::sigma_y();
    let prepared = v_states()
        .iter()
        .map(|v| v.apply(&y).expect("2x2"))
        .collect();
    MeasurePrepareChannel::new(spa_povm(), prepared).expect("complete POVM")
}

/// The composite SPA-PT as the mixture of its two local branches:
/// `𝟙 ⊗ T̃` with probability 1/3 and `Θ̃ ⊗ D` with probability 2/3.
pub fn spa_pt() -> QuantumChannel {
    QuantumChannel::mixture(spa_pt_branches().to_vec()).expect("valid weights")
}

pub fn spa_pt_branches() -> [(f64, QuantumChannel); 2] {
    [
        (
            TRANSPOSE_BRANCH_WEIGHT,
            QuantumChannel::tensor(identity(2), QuantumChannel::MeasurePrepare(spa_transpose())),
        ),
        (
            1.0 - TRANSPOSE_BRANCH_WEIGHT,
            QuantumChannel::tensor(
                QuantumChannel::MeasurePrepare(spa_inversion()),
                depolarize(),
            ),
        ),
    ]
}

/// `(1/9)(𝟙⊗T) + (8/9)·(replace with I₄/4)` as a single superoperator.
pub fn spa_pt_closed_form() -> Superoperator {
    let pt = partial_transpose_map().superoperator().expect("square map");
    let replace = replace_with_maximally_mixed(4)
        .superoperator()
        .expect("square map");
    Superoperator::linear_combination(&[(SPA_PT_SCALE, &pt), (1.0 - SPA_PT_SCALE, &replace)])
        .expect("equal dimensions")
}

/// Partial transpose of a state; Hermitian with unit trace but possibly not PSD.
pub fn ideal_pt(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    qmath::partial_transpose(rho.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell, werner, BellKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag2(a: f64, b: f64) -> ComplexMatrix {
        ComplexMatrix::diag_real(&[a, b])
    }

    fn ket0() -> DensityMatrix {
        DensityMatrix::new(diag2(1.0, 0.0)).unwrap()
    }

    #[test]
    fn v_states_are_normalized_and_complete() {
        let vs = v_states();
        let mut sum = ComplexMatrix::zeros(2);
        for v in &vs {
            let n: f64 = v.amplitudes().iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
            assert!(v.amplitudes()[0].im == 0.0 && v.amplitudes()[0].re > 0.0);
            sum = &sum + &v.projector();
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(2).scale_real(2.0)) < 1e-10);
    }

    #[test]
    fn v_states_are_tetrahedral() {
        let vs = v_states();
        for j in 0..4 {
            for k in 0..4 {
                if j != k {
                    let overlap = vs[j].inner(&vs[k]).norm_sqr();
                    assert!((overlap - 1.0 / 3.0).abs() < 1e-10, "{j},{k}: {overlap}");
                }
            }
        }
    }

    #[test]
    fn spa_transpose_examples() {
        let t = QuantumChannel::MeasurePrepare(spa_transpose());
        let half = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(t.apply(&half).unwrap().matrix().max_abs_diff(half.matrix()) < 1e-12);
        let out = t.apply(&ket0()).unwrap();
        assert!(out.matrix().max_abs_diff(&diag2(2.0 / 3.0, 1.0 / 3.0)) < 1e-12);
    }

    #[test]
    fn spa_transpose_matches_affine_form() {
        let t = spa_transpose();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let psi = PureState::random(2, &mut rng);
            let w: f64 = rand::Rng::random(&mut rng);
            let rho = &psi.projector().scale_real(w)
                + &ComplexMatrix::identity(2).scale_real((1.0 - w) / 2.0);
            let expected = &rho.transpose().scale_real(1.0 / 3.0)
                + &ComplexMatrix::identity(2).scale_real(1.0 / 3.0);
            assert!(t.apply_raw(&rho).max_abs_diff(&expected) < 1e-10);
        }
    }

    #[test]
    fn spa_transpose_is_physical_but_transpose_is_not() {
        let t = QuantumChannel::MeasurePrepare(spa_transpose());
        assert!(t.choi().unwrap().min_eigenvalue().unwrap() >= -1e-10);
        let raw = transpose_map().choi().unwrap().min_eigenvalue().unwrap();
        assert!((raw + 0.5).abs() < 1e-12);
    }

    #[test]
    fn spa_inversion_examples() {
        let th = QuantumChannel::MeasurePrepare(spa_inversion());
        let half = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(
            th.apply(&half)
                .unwrap()
                .matrix()
                .max_abs_diff(half.matrix())
                < 1e-12
        );
        let out = th.apply(&ket0()).unwrap();
        assert!(out.matrix().max_abs_diff(&diag2(1.0 / 3.0, 2.0 / 3.0)) < 1e-12);

        let y = unitary(qmath::sigma_y()).unwrap().superoperator().unwrap();
        let conj = QuantumChannel::MeasurePrepare(spa_transpose())
            .superoperator()
            .unwrap()
            .then(&y)
            .unwrap();
        let direct = th.superoperator().unwrap();
        assert!(conj.max_abs_diff(&direct) < 1e-10);

        let closed = Superoperator::from_map(2, |m| {
            &ComplexMatrix::identity(2).scale(m.trace() * (2.0 / 3.0)) - &m.scale_real(1.0 / 3.0)
        });
        assert!(direct.max_abs_diff(&closed) < 1e-12);
    }

    #[test]
    fn povms_are_complete() {
        for ch in [spa_transpose(), spa_inversion()] {
            let mut sum = ComplexMatrix::zeros(2);
            for m in ch.povm() {
                sum = &sum + m;
            }
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);
        }
    }

    #[test]
    fn measure_prepare_rejects_incomplete_povm() {
        let povm = vec![diag2(1.0, 0.0)];
        let prep = vec![PureState::basis(2, 0).unwrap()];
        assert!(matches!(
            MeasurePrepareChannel::new(povm, prep),
            Err(Error::Validation(_))
        ));
        let povm = vec![diag2(1.5, 1.0), diag2(-0.5, 0.0)];
        let prep = vec![
            PureState::basis(2, 0).unwrap(),
            PureState::basis(2, 1).unwrap(),
        ];
        assert!(MeasurePrepareChannel::new(povm, prep).is_err());
    }

    #[test]
    fn depolarize_examples() {
        let d = depolarize();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(d.apply(&ket0()).unwrap().matrix().max_abs_diff(&half) < 1e-15);
        let plus_x = DensityMatrix::new(&qmath::sigma_x().scale_real(0.5) + &half).unwrap();
        assert!(d.apply(&plus_x).unwrap().matrix().max_abs_diff(&half) < 1e-15);
        let replace = replace_with_maximally_mixed(2).superoperator().unwrap();
        assert!(d.superoperator().unwrap().max_abs_diff(&replace) < 1e-12);
        let choi = d.choi().unwrap();
        assert!(
            choi.mat
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                < 1e-15
        );
    }

    #[test]
    fn spa_pt_examples() {
        let ch = spa_pt();
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(
            ch.apply(&mixed)
                .unwrap()
                .matrix()
                .max_abs_diff(mixed.matrix())
                < 1e-12
        );

        let spec = ch.apply(&bell(BellKind::PhiPlus)).unwrap().spectrum();
        let expected = [1.0 / 6.0, 5.0 / 18.0, 5.0 / 18.0, 5.0 / 18.0];
        for (a, b) in spec.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{spec:?}");
        }

        let zero_zero = DensityMatrix::from_pure(&PureState::basis(4, 0).unwrap());
        let spec = ch.apply(&zero_zero).unwrap().spectrum();
        let expected = [2.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0, 1.0 / 3.0];
        for (a, b) in spec.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{spec:?}");
        }
    }

    #[test]
    fn spa_pt_matches_closed_form_superoperator() {
        let dev = spa_pt()
            .superoperator()
            .unwrap()
            .max_abs_diff(&spa_pt_closed_form());
        assert!(dev < 1e-10, "{dev:e}");
    }

    #[test]
    fn physicality_certificates() {
        assert!(spa_pt().is_cp().unwrap());
        assert!(spa_pt().is_tp().unwrap());
        let pt = partial_transpose_map();
        assert!(!pt.is_cp().unwrap());
        assert!(pt.is_tp().unwrap());
        assert!((pt.choi().unwrap().min_eigenvalue().unwrap() + 0.5).abs() < 1e-9);
    }

    #[test]
    fn ideal_pt_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DensityMatrix::from_pure(&PureState::random(2, &mut rng));
        let b = DensityMatrix::from_pure(&PureState::random(2, &mut rng));
        let sep = DensityMatrix::product(&a, &b).unwrap();
        assert!(qmath::min_eigenvalue(&ideal_pt(&sep).unwrap()).unwrap() >= -1e-9);

        let min = qmath::min_eigenvalue(&ideal_pt(&bell(BellKind::PsiMinus)).unwrap()).unwrap();
        assert!((min + 0.5).abs() < 1e-12);

        let rho = DensityMatrix::random(&mut rng);
        assert!((ideal_pt(&rho).unwrap().trace() - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn apply_identity_and_werner_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = DensityMatrix::random(&mut rng);
        assert!(
            identity(4)
                .apply(&rho)
                .unwrap()
                .matrix()
                .max_abs_diff(rho.matrix())
                < 1e-15
        );
        let ch = spa_pt();
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let min = ch.apply(&werner(p).unwrap()).unwrap().min_eigenvalue();
            assert!((min - (p + 2.0) / 12.0).abs() < 1e-10, "p={p}: {min}");
        }
    }

    #[test]
    fn apply_rejects_non_physical_output_and_wrong_dimension() {
        let pt = partial_transpose_map();
        assert!(matches!(
            pt.apply(&bell(BellKind::PhiPlus)),
            Err(Error::Validation(_))
        ));
        assert!(spa_pt().apply(&ket0()).is_err());
    }

    #[test]
    fn kraus_round_trip_preserves_the_map() {
        for ch in [
            spa_pt(),
            QuantumChannel::MeasurePrepare(spa_transpose()),
            depolarize(),
        ] {
            let k = QuantumChannel::Kraus(ch.to_kraus().unwrap());
            let dev = k
                .superoperator()
                .unwrap()
                .max_abs_diff(&ch.superoperator().unwrap());
            assert!(dev < 1e-10);
        }
        assert!(partial_transpose_map().to_kraus().is_err());
    }

    #[test]
    fn mixture_validates_weights() {
        assert!(QuantumChannel::mixture(vec![(0.5, identity(2))]).is_err());
        assert!(QuantumChannel::mixture(vec![(1.5, identity(2)), (-0.5, depolarize())]).is_err());
        assert!(QuantumChannel::mixture(vec![(0.5, identity(2)), (0.5, identity(4))]).is_err());
    }

    #[test]
    fn kraus_requires_trace_preservation() {
        assert!(KrausChannel::new(vec![ComplexMatrix::identity(2).scale_real(0.9)]).is_err());
        assert!(KrausChannel::new(vec![]).is_err());
    }
}
