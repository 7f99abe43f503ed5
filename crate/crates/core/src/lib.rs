//! Structural physical approximation of the two-qubit partial transpose (SPA-PT),
//! realized as a local measure-and-prepare protocol, and its use for
//! operation-based entanglement detection.
//!
//! The crate is layered bottom-up:
//!
//! - [`qmath`]: dense complex matrices, a cyclic Jacobi Hermitian eigensolver,
//!   PSD square roots, partial transpose and partial trace.
//! - [`states`]: validated density matrices, the Bell/Werner/MEMS/`ρ(p,α)`
//!   families, fidelity, tangle and linear entropy.
//! - [`channels`]: Kraus, measure-and-prepare and superoperator channels, the
//!   approximate transpose `T̃`, approximate inversion `Θ̃`, depolarization and
//!   the composite SPA-PT, with Choi-matrix certification.
//! - [`tomography`]: Born-rule probability tables, seeded shot sampling,
//!   trajectory simulation of the protocol and linear-inversion tomography.
//! - [`detection`]: PPT, SPA-spectrum and measurement-only verdicts, plus a
//!   fixed-witness baseline.
//! - [`harness`]: the experiment driver behind the `spapt` binary (state files,
//!   sweeps, reports).
//!
//! ```
//! use spapt::{channels, states::{bell, BellKind}};
//!
//! let out = channels::spa_pt().apply(&bell(BellKind::PsiMinus)).unwrap();
//! assert!((out.min_eigenvalue() - 1.0 / 6.0).abs() < 1e-10);
//! ```

pub mod channels;
pub mod detection;
pub mod error;
pub mod harness;
pub mod qmath;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use qmath::{ComplexMatrix, Spectrum, C64};
