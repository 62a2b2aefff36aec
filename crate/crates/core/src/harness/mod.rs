//! Experiment drivers: convergence sweeps, perturbation and rotation studies,
//! tail studies, and their CSV/SVG reports.
//!
//! Every study is a pure function of its inputs and seed; Monte Carlo parts
//! reduce in a fixed order, so reports do not depend on the thread count.

mod convergence;
mod report;
mod stability;
mod tails;

pub use convergence::{convergence_sweep, ConvergenceReport, ConvergenceRow, RefMethod, ReferenceChoice, RowFailure, Sweep};
pub use report::{emit_csv, emit_svg, render_csv, render_svg, Cell, Table};
pub use stability::{
    gs_perturbation_study, monotone_within, ratio_band, rotation_stability_study, GsRow, GsStudy, PerturbationMode,
    RotationRow, RotationStudy,
};
pub use tails::{tail_study, TailRow, TailStudy};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gaussian::GaussianError;
use crate::quadrature::QuadratureError;
use crate::slice_geometry::SliceError;

/// Default allowance for the finite-n bias in the final-row check.
pub const DEFAULT_BIAS_BUDGET: f64 = 0.01;
/// Default n schedule for convergence sweeps.
pub const DEFAULT_SCHEDULE: [usize; 4] = [64, 256, 1024, 4096];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Slice(#[from] SliceError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("separation lost: {measured:e} is below the floor {floor:e}")]
    SeparationLost { measured: f64, floor: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Hex SHA-256 of `bytes`.
pub fn fingerprint(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
