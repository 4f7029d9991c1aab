use serde::Serialize;

use crate::linalg::{singular_values, svd_right, DenseVector, Scalar};
use crate::operators::{OperatorSpec, ParameterSet};

use super::{lambda_extract, scalar_pair, DefinabilityError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexWitness {
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    pub index: i64,
    /// Absolute singular value threshold.
    pub threshold: f64,
    pub truncation_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenspaceResult {
    #[serde(serialize_with = "scalar_pair")]
    pub mu: Scalar,
    pub dimension: usize,
    pub basis: Vec<DenseVector>,
    /// `|T u - mu u|` per basis vector.
    pub residuals: Vec<f64>,
    /// Distance of each basis vector from the span of the parameters.
    pub containment: Option<Vec<f64>>,
    pub truncation: usize,
}

fn absolute_threshold(t: &OperatorSpec, threshold: f64) -> Result<f64, DefinabilityError> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(DefinabilityError::BadOption(format!("rank threshold must be positive, got {threshold}")));
    }
    Ok(threshold * t.norm_bound().max(1.0))
}

/// Number of singular values below `t`, provided every other one is at
/// least `10 t`.
fn gapped_count(s: &[f64], t: f64, n: usize) -> Result<usize, DefinabilityError> {
    let count = s.iter().filter(|&&v| v < t).count();
    if let Some(&v) = s.iter().filter(|&&v| v >= t && v < 10.0 * t).min_by(|a, b| a.total_cmp(b)) {
        return Err(DefinabilityError::NoSpectralGap { size: n, value: v, threshold: t });
    }
    Ok(count)
}

/// `dim ker (T P_N)` from the exact rectangular restriction.
fn null_count(t: &OperatorSpec, thr: f64, n: usize) -> Result<usize, DefinabilityError> {
    gapped_count(&singular_values(&t.restrict(n))?, thr, n)
}

fn stable_null_count(t: &OperatorSpec, thr: f64, n: usize) -> Result<usize, DefinabilityError> {
    let at_n = null_count(t, thr, n)?;
    let at_2n = null_count(t, thr, 2 * n)?;
    if at_n != at_2n {
        return Err(DefinabilityError::Unstable { n, at_n, at_2n });
    }
    Ok(at_n)
}

/// Kernel and cokernel dimensions of `T` from the restrictions `T P_N` and
/// `T* P_N`, which keep every image coordinate so that boundary columns of
/// shifts are not cut off. Both counts need a factor 10 gap at the threshold
/// `threshold * max(1, |T|)` and must agree at `N` and `2N`.
pub fn fredholm_index(t: &OperatorSpec, threshold: f64, n: usize) -> Result<IndexWitness, DefinabilityError> {
    let thr = absolute_threshold(t, threshold)?;
    let kernel_dim = stable_null_count(t, thr, n)?;
    let cokernel_dim = stable_null_count(&t.adjoint_spec(), thr, n)?;
    Ok(IndexWitness {
        kernel_dim,
        cokernel_dim,
        index: kernel_dim as i64 - cokernel_dim as i64,
        threshold: thr,
        truncation_sizes: vec![n, 2 * n],
    })
}

/// Orthonormal near-null vectors of `T P_N`. With parameters supplied, also
/// reports each vector's distance from their span.
pub fn kernel_basis(
    t: &OperatorSpec,
    threshold: f64,
    n: usize,
    params: Option<&ParameterSet>,
) -> Result<EigenspaceResult, DefinabilityError> {
    let thr = absolute_threshold(t, threshold)?;
    let (s, v) = svd_right(&t.restrict(n))?;
    let dimension = gapped_count(&s, thr, n)?;
    let k = s.len();
    let mut basis = Vec::with_capacity(dimension);
    let mut residuals = Vec::with_capacity(dimension);
    for j in (k - dimension..k).rev() {
        let u = v.column(j);
        residuals.push(crate::linalg::norm_slice(&t.apply_slice(&u)));
        basis.push(DenseVector::new(t.field(), u)?);
    }
    let containment = params.map(|a| {
        let a = match t.field() {
            crate::linalg::Field::Complex => a.to_complex(),
            crate::linalg::Field::Real => a.clone(),
        };
        basis.iter().map(|u| a.distance(u.entries())).collect()
    });
    Ok(EigenspaceResult {
        mu: Scalar::coerce(t.field(), crate::linalg::ZERO),
        dimension,
        basis,
        residuals,
        containment,
        truncation: n,
    })
}

/// `E_mu(T)` as the kernel of `T - mu`, stable across `N` and `2N`. Rejects
/// `mu` within `tol` of `lambda(T)` when the probes determine one. Parameters
/// default to those extracted from the tree.
pub fn eigenspace(t: &OperatorSpec, mu: Scalar, tol: f64, n: usize) -> Result<EigenspaceResult, DefinabilityError> {
    let params = t.extract_parameters();
    if let Ok(lambda) = lambda_extract(t, &params) {
        if (lambda.value() - mu.value()).norm() <= tol {
            return Err(DefinabilityError::MuIsLambda { mu, lambda });
        }
    }
    let shifted = t.shifted_by(mu.value());
    let threshold = tol / shifted.norm_bound().max(1.0);
    let mut result = kernel_basis(&shifted, threshold, n, Some(&params))?;
    let at_2n = null_count(&shifted, absolute_threshold(&shifted, threshold)?, 2 * n)?;
    if at_2n != result.dimension {
        return Err(DefinabilityError::Unstable { n, at_n: result.dimension, at_2n });
    }
    result.mu = mu;
    Ok(result)
}
