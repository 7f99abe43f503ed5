//! Measurement statistics for the protocol: exact Born-rule tables, seeded
//! finite-shot sampling, trajectory-level simulation of the local SPA-PT
//! realization, and linear-inversion state tomography.
//!
//! Randomness comes from a single `u64` seed. Every measurement setting
//! draws from its own ChaCha stream selected by a fixed stream id, so results
//! do not depend on the order in which settings are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::channels::{self, TRANSPOSE_BRANCH_WEIGHT};
use crate::error::{Error, Result};
use crate::qmath::{self, c, re, ComplexMatrix, Subsystem};
use crate::states::{DensityMatrix, PureState};

pub const DEFAULT_SHOTS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;

const STREAM_TABLE_SETTING: u64 = 0; // + setting index 0..4
const STREAM_TABLE_QR: u64 = 4;
const STREAM_PAULI_SETTING: u64 = 16; // + 3a + b for a, b in 0..3
const STREAM_TRAJECTORY: u64 = 32;

/// Shot budget and root seed for a sampled run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub shots_per_setting: u64,
    pub seed: u64,
}

impl ShotConfig {
    pub fn new(shots_per_setting: u64, seed: u64) -> Result<Self> {
        if shots_per_setting == 0 {
            return Err(Error::InvalidInput(
                "shots per setting must be positive".into(),
            ));
        }
        Ok(Self {
            shots_per_setting,
            seed,
        })
    }
}

impl Default for ShotConfig {
    fn default() -> Self {
        Self {
            shots_per_setting: DEFAULT_SHOTS,
            seed: DEFAULT_SEED,
        }
    }
}

/// Independent generator for one measurement setting.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for task `index` of a sweep (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multinomial counts by sequential conditional binomials. Tiny negative
/// probabilities from round-off are treated as zero.
pub fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let clean: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    let mut mass: f64 = clean.iter().sum();
    let mut left = n;
    let mut counts = vec![0; probs.len()];
    for (k, &p) in clean.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == clean.len() {
            counts[k] = left;
            break;
        }
        let cond = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let x = Binomial::new(left, cond)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        counts[k] = x;
        left -= x;
        mass -= p;
    }
    counts
}

/// Index drawn from unnormalized nonnegative weights.
fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Informationally complete single-qubit states `|0⟩, |1⟩, |+⟩, |+i⟩` used on
/// side A of the `𝟙 ⊗ T̃` branch.
pub fn tomo_basis() -> [PureState; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        vec![re(1.0), re(0.0)],
        vec![re(0.0), re(1.0)],
        vec![re(h), re(h)],
        vec![re(h), c(0.0, h)],
    ]
    .map(|v| PureState::new(v).expect("unit vector"))
}

/// Measured statistics of both branches.
///
/// `p[i][j] = tr[ρ |t_i⟩⟨t_i| ⊗ M_j]`, `q[k] = tr[ρ M_k ⊗ |0⟩⟨0|]`,
/// `r[k] = tr[ρ M_k ⊗ |1⟩⟨1|]`. `shots_per_setting == 0` marks exact values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub p: [[f64; 4]; 4],
    pub q: [f64; 4],
    pub r: [f64; 4],
    pub shots_per_setting: u64,
}

impl ProbabilityTable {
    pub fn zeros() -> Self {
        Self {
            p: [[0.0; 4]; 4],
            q: [0.0; 4],
            r: [0.0; 4],
            shots_per_setting: 0,
        }
    }

    /// Entries in `[0, 1]`, each row of `p` summing to at most one, and
    /// `Σ (q + r) = 1` for nonzero tables.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-9;
        let all = self.p.iter().flatten().chain(&self.q).chain(&self.r);
        for &x in all {
            if !(-tol..=1.0 + tol).contains(&x) {
                return Err(Error::Validation(format!("probability {x} outside [0, 1]")));
            }
        }
        for (i, row) in self.p.iter().enumerate() {
            let s: f64 = row.iter().sum();
            if s > 1.0 + tol {
                return Err(Error::Validation(format!("row {i} of p sums to {s} > 1")));
            }
        }
        let qr: f64 = self.q.iter().chain(&self.r).sum();
        if qr != 0.0 && (qr - 1.0).abs() > tol {
            return Err(Error::Validation(format!(
                "q and r sum to {qr}, expected 1"
            )));
        }
        Ok(())
    }

    /// Largest entrywise difference between two tables.
    pub fn max_abs_diff(&self, other: &ProbabilityTable) -> f64 {
        let a = self.p.iter().flatten().chain(&self.q).chain(&self.r);
        let b = other.p.iter().flatten().chain(&other.q).chain(&other.r);
        a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    Ok(())
}

/// Eight outcome probabilities of setting `i`: `|t_i⟩⟨t_i| ⊗ M_j` then
/// `(I - |t_i⟩⟨t_i|) ⊗ M_j`.
fn setting_distribution(rho: &ComplexMatrix, i: usize) -> [f64; 8] {
    let povm = channels::spa_povm();
    let t = tomo_basis()[i].projector();
    let not_t = &ComplexMatrix::identity(2) - &t;
    let mut out = [0.0; 8];
    for (j, m) in povm.iter().enumerate() {
        out[j] = rho.trace_product(&t.kron(m)).re;
        out[4 + j] = rho.trace_product(&not_t.kron(m)).re;
    }
    out
}

/// `M_k ⊗ |0⟩⟨0|` for `k = 0..4`, then `M_k ⊗ |1⟩⟨1|`.
fn qr_distribution(rho: &ComplexMatrix) -> [f64; 8] {
    let povm = channels::spa_povm();
    let z0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
    let z1 = ComplexMatrix::diag_real(&[0.0, 1.0]);
    let mut out = [0.0; 8];
    for (k, m) in povm.iter().enumerate() {
        out[k] = rho.trace_product(&m.kron(&z0)).re;
        out[4 + k] = rho.trace_product(&m.kron(&z1)).re;
    }
    out
}

pub fn ideal_probabilities(rho: &DensityMatrix) -> Result<ProbabilityTable> {
    require_two_qubit(rho)?;
    let m = rho.matrix();
    let mut table = ProbabilityTable::zeros();
    for i in 0..4 {
        let d = setting_distribution(m, i);
        table.p[i].copy_from_slice(&d[..4]);
    }
    let qr = qr_distribution(m);
    table.q.copy_from_slice(&qr[..4]);
    table.r.copy_from_slice(&qr[4..]);
    Ok(table)
}

/// Finite-shot estimate of the table: each of the four A settings and the
/// `q/r` setting is repeated `shots_per_setting` times.
pub fn sample_table(rho: &DensityMatrix, cfg: &ShotConfig) -> Result<ProbabilityTable> {
    require_two_qubit(rho)?;
    let cfg = ShotConfig::new(cfg.shots_per_setting, cfg.seed)?;
    let n = cfg.shots_per_setting;
    let m = rho.matrix();
    let mut table = ProbabilityTable::zeros();
    table.shots_per_setting = n;
    for i in 0..4 {
        let mut rng = substream(cfg.seed, STREAM_TABLE_SETTING + i as u64);
        let counts = multinomial(&mut rng, n, &setting_distribution(m, i));
        for j in 0..4 {
            table.p[i][j] = counts[j] as f64 / n as f64;
        }
    }
    let mut rng = substream(cfg.seed, STREAM_TABLE_QR);
    let counts = multinomial(&mut rng, n, &qr_distribution(m));
    for k in 0..4 {
        table.q[k] = counts[k] as f64 / n as f64;
        table.r[k] = counts[4 + k] as f64 / n as f64;
    }
    Ok(table)
}

/// Outcome of a trajectory simulation.
#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    /// Ensemble average of the emitted two-qubit states.
    pub state: DensityMatrix,
    pub trajectories: u64,
    /// Runs that took the `𝟙 ⊗ T̃` branch and the `Θ̃ ⊗ D` branch.
    pub branch_counts: [u64; 2],
}

/// Simulates single-copy runs of the local protocol and returns the
/// ensemble-average output state.
pub fn trajectory_spa_pt(rho: &DensityMatrix, cfg: &ShotConfig) -> Result<DensityMatrix> {
    Ok(simulate_trajectories(rho, cfg)?.state)
}

/// Each run picks a branch (`𝟙 ⊗ T̃` with probability 1/3, else `Θ̃ ⊗ D`),
/// measures the relevant qubit with `{M_k}`, prepares the branch's state for
/// outcome `k`, and in the second branch applies a uniformly random Pauli to B.
/// Every run emits a unit-trace product state; the result is their average.
pub fn simulate_trajectories(rho: &DensityMatrix, cfg: &ShotConfig) -> Result<TrajectoryRun> {
    require_two_qubit(rho)?;
    let cfg = ShotConfig::new(cfg.shots_per_setting, cfg.seed)?;
    let n = cfg.shots_per_setting;
    let m = rho.matrix();
    let povm = channels::spa_povm();
    let eye = ComplexMatrix::identity(2);
    let transposed = channels::spa_transpose();
    let inverted = channels::spa_inversion();

    // Unnormalized post-measurement marginals: tr_B[ρ (I⊗M_k)] and tr_A[ρ (M_k⊗I)].
    let cond_a: Vec<ComplexMatrix> = povm
        .iter()
        .map(|mk| qmath::partial_trace(&(m * &eye.kron(mk)), Subsystem::A).expect("4x4"))
        .collect();
    let cond_b: Vec<ComplexMatrix> = povm
        .iter()
        .map(|mk| qmath::partial_trace(&(m * &mk.kron(&eye)), Subsystem::B).expect("4x4"))
        .collect();
    let prob_b: Vec<f64> = cond_a.iter().map(|x| x.trace().re.max(0.0)).collect();
    let prob_a: Vec<f64> = cond_b.iter().map(|x| x.trace().re.max(0.0)).collect();

    let mut rng = substream(cfg.seed, STREAM_TRAJECTORY);
    let mut first = [0u64; 4];
    let mut second = [[0u64; 4]; 4];
    let mut branch_counts = [0u64; 2];
    for _ in 0..n {
        if rng.random::<f64>() < TRANSPOSE_BRANCH_WEIGHT {
            branch_counts[0] += 1;
            first[sample_index(&mut rng, &prob_b)] += 1;
        } else {
            branch_counts[1] += 1;
            let k = sample_index(&mut rng, &prob_a);
            let pauli = rng.random_range(0..4);
            second[k][pauli] += 1;
        }
    }

    let mut acc = ComplexMatrix::zeros(4);
    for k in 0..4 {
        if first[k] > 0 {
            let a_state = cond_a[k].scale_real(1.0 / prob_b[k]);
            let emitted = a_state.kron(&transposed.prepared()[k].projector());
            acc = &acc + &emitted.scale_real(first[k] as f64 / n as f64);
        }
        for (i, &count) in second[k].iter().enumerate() {
            if count == 0 {
                continue;
            }
            let s = qmath::pauli(i);
            let b_state = (&(&s * &cond_b[k]) * &s).scale_real(1.0 / prob_a[k]);
            let emitted = inverted.prepared()[k].projector().kron(&b_state);
            acc = &acc + &emitted.scale_real(count as f64 / n as f64);
        }
    }
    Ok(TrajectoryRun {
        state: DensityMatrix::new(acc.hermitian_part())?,
        trajectories: n,
        branch_counts,
    })
}

/// Two-qubit Pauli expectations `⟨σ_i ⊗ σ_j⟩`, `i, j ∈ {I, X, Y, Z}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliExpectations {
    values: [[f64; 4]; 4],
}

impl PauliExpectations {
    /// Requires all sixteen `((i, j), value)` entries.
    pub fn from_entries(entries: impl IntoIterator<Item = ((usize, usize), f64)>) -> Result<Self> {
        let mut slots = [[None; 4]; 4];
        for ((i, j), v) in entries {
            if i >= 4 || j >= 4 {
                return Err(Error::InvalidInput(format!(
                    "Pauli index ({i}, {j}) out of range"
                )));
            }
            slots[i][j] = Some(v);
        }
        let mut values = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                values[i][j] = slots[i][j].ok_or_else(|| {
                    Error::InvalidInput(format!("missing expectation for Pauli pair ({i}, {j})"))
                })?;
            }
        }
        Ok(Self { values })
    }

    pub fn exact(rho: &DensityMatrix) -> Result<Self> {
        require_two_qubit(rho)?;
        let mut values = [[0.0; 4]; 4];
        for (i, row) in values.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = rho
                    .matrix()
                    .trace_product(&qmath::pauli(i).kron(&qmath::pauli(j)))
                    .re;
            }
        }
        Ok(Self { values })
    }

    /// Estimates from the nine local settings `σ_a ⊗ σ_b`, `a, b ∈ {X, Y, Z}`,
    /// each repeated `shots_per_setting` times. Single-qubit terms are averaged
    /// over the three settings that contain them.
    pub fn sampled(rho: &DensityMatrix, cfg: &ShotConfig) -> Result<Self> {
        require_two_qubit(rho)?;
        let cfg = ShotConfig::new(cfg.shots_per_setting, cfg.seed)?;
        let n = cfg.shots_per_setting as f64;
        let eye = ComplexMatrix::identity(2);
        let eigenprojectors = |a: usize| {
            let s = qmath::pauli(a);
            [(&eye + &s).scale_real(0.5), (&eye - &s).scale_real(0.5)]
        };
        let mut values = [[0.0; 4]; 4];
        values[0][0] = 1.0;
        for a in 1..4 {
            for b in 1..4 {
                let (pa, pb) = (eigenprojectors(a), eigenprojectors(b));
                let mut probs = [0.0; 4];
                for s in 0..2 {
                    for t in 0..2 {
                        probs[2 * s + t] = rho.matrix().trace_product(&pa[s].kron(&pb[t])).re;
                    }
                }
                let stream = STREAM_PAULI_SETTING + 3 * (a as u64 - 1) + (b as u64 - 1);
                let counts = multinomial(
                    &mut substream(cfg.seed, stream),
                    cfg.shots_per_setting,
                    &probs,
                );
                let f: Vec<f64> = counts.iter().map(|&x| x as f64 / n).collect();
                values[a][b] = f[0] - f[1] - f[2] + f[3];
                values[a][0] += (f[0] + f[1] - f[2] - f[3]) / 3.0;
                values[0][b] += (f[0] - f[1] + f[2] - f[3]) / 3.0;
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

/// `ρ̂ = (1/4) Σ_{i,j} ⟨σ_i⊗σ_j⟩ σ_i⊗σ_j`. The result is Hermitian but may
/// fail positivity when the expectations are sampled.
pub fn qst_linear_inversion(e: &PauliExpectations) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let term = qmath::pauli(i).kron(&qmath::pauli(j));
            acc = &acc + &term.scale_real(e.values[i][j] / 4.0);
        }
    }
    acc
}

/// Closest unit-trace PSD matrix in Euclidean distance on the spectrum.
///
/// Working from the smallest eigenvalue up, negative values are zeroed and
/// their deficit is spread evenly over the eigenvalues still in play until
/// none is negative. Eigenvectors are kept.
pub fn project_to_physical(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    let herr = raw.hermiticity_error();
    if herr > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (max |m - m†| = {herr:e})"
        )));
    }
    let tr = raw.trace();
    if (tr - re(1.0)).norm() > 1e-6 {
        return Err(Error::InvalidInput(format!("trace {} is not 1", tr.re)));
    }
    let spec = qmath::herm_eig(&raw.hermitian_part())?;
    let mu: Vec<f64> = spec.eigenvalues.iter().map(|l| l / tr.re).collect();
    let clipped = clip_spectrum(&mu);
    let out = ComplexMatrix::from_fn(raw.dim(), |i, j| {
        let mut z = re(0.0);
        for (l, v) in clipped.iter().zip(&spec.eigenvectors) {
            z += v[i] * v[j].conj() * *l;
        }
        z
    });
    DensityMatrix::new(out.hermitian_part())
}

/// Projects an ascending spectrum summing to one onto the probability simplex.
fn clip_spectrum(ascending: &[f64]) -> Vec<f64> {
    let d = ascending.len();
    let mut out = ascending.to_vec();
    let mut deficit = 0.0;
    let mut cut = 0;
    // `remaining` counts the eigenvalues not yet zeroed.
    while cut < d {
        let remaining = (d - cut) as f64;
        if out[cut] + deficit / remaining < 0.0 {
            deficit += out[cut];
            out[cut] = 0.0;
            cut += 1;
        } else {
            break;
        }
    }
    let remaining = (d - cut) as f64;
    for x in out.iter_mut().skip(cut) {
        *x += deficit / remaining;
    }
    out
}
