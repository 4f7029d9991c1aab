//! Deciding whether an operator is a scalar plus a compact operator, with
//! evidence either way, and the spectral quantities that follow from it.

mod certify;
mod classify;
mod fredholm;
mod invariant;
mod lambda;
mod projection;
mod scan;
mod weyl;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{LinalgError, Scalar};
use crate::operators::OperatorError;

pub use certify::{certify_compact, CertificateRoute, CertificationFailure, CompactnessCertificate, LadderRow};
pub use classify::{candidate_points, classify, Diagnostics, DefinabilityVerdict, Refutation};
pub use fredholm::{eigenspace, fredholm_index, kernel_basis, EigenspaceResult, IndexWitness};
pub use invariant::{invariant_subspace, InvariantRoute, InvariantSubspace};
pub use lambda::{lambda_extract, ProbeRecord, PROBE_COUNT, PROBE_FLOOR};
pub use projection::classify_projection;
pub use scan::{essential_spectrum_scan, ScanRow, DEFAULT_K_FRACTION};
pub use weyl::{find_weyl_witness, WeylPoint, WeylSide, WeylWitness};

/// Tolerances and sizes shared by the definability routines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Options {
    /// Certificate tolerance on the compact tail.
    pub cert_tol: f64,
    /// Residual tolerance for Weyl witness vectors.
    pub weyl_tol: f64,
    /// Relative singular value threshold for kernel counting.
    pub rank_threshold: f64,
    /// Largest truncation size.
    pub n_max: usize,
    /// Rank a witness family must exceed.
    pub rank_budget: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options { cert_tol: 1e-2, weyl_tol: 0.05, rank_threshold: 1e-8, n_max: 512, rank_budget: 5, seed: 0 }
    }
}

impl Options {
    pub fn validate(&self) -> Result<(), DefinabilityError> {
        for (name, v) in [("cert_tol", self.cert_tol), ("weyl_tol", self.weyl_tol), ("rank_threshold", self.rank_threshold)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DefinabilityError::BadOption(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_max < 16 {
            return Err(DefinabilityError::BadOption(format!("n_max must be at least 16, got {}", self.n_max)));
        }
        Ok(())
    }

    /// Truncation used for index, kernel and eigenspace computations, which
    /// also look at twice this size.
    pub fn working_size(&self) -> usize {
        (self.n_max / 2).max(8)
    }
}

#[derive(Debug, Error)]
pub enum DefinabilityError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("lambda probes disagree: {}", describe_probes(.probes))]
    ProbeDisagreement { probes: Vec<ProbeRecord> },
    #[error("no spectral gap at N={size}: singular value {value} lies within a factor 10 above the threshold {threshold}")]
    NoSpectralGap { size: usize, value: f64, threshold: f64 },
    #[error("dimension {at_n} at N={n} differs from {at_2n} at N={}", 2 * .n)]
    Unstable { n: usize, at_n: usize, at_2n: usize },
    #[error("mu = {mu} coincides with lambda(T) = {lambda}")]
    MuIsLambda { mu: Scalar, lambda: Scalar },
    #[error("expected a projection operator")]
    NotProjection,
    #[error("invariant subspaces are computed over the complex field")]
    RealField,
    #[error("operator was not classified as definable")]
    NotDefinable,
    #[error("grid must not be empty")]
    EmptyGrid,
    #[error("invalid option: {0}")]
    BadOption(String),
}

fn describe_probes(probes: &[ProbeRecord]) -> String {
    probes
        .iter()
        .map(|p| format!("e_{} -> {} (consistency {:.3e})", p.index, p.lambda, p.consistency))
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn scalar_pair<S: Serializer>(s: &Scalar, serializer: S) -> Result<S::Ok, S::Error> {
    [s.re(), s.im()].serialize(serializer)
}

pub(crate) fn scalar_pairs<S: Serializer>(s: &[Scalar], serializer: S) -> Result<S::Ok, S::Error> {
    s.iter().map(|v| [v.re(), v.im()]).collect::<Vec<_>>().serialize(serializer)
}
