use serde::Serialize;

use crate::linalg::{norm_slice, svd_right, DenseVector, Scalar, C64};
use crate::operators::OperatorSpec;

use super::{scalar_pair, DefinabilityError};

/// Which operator the near-null vectors belong to: `T - mu` itself, or the
/// adjoint `T* - conj(mu)`. Both place `mu` in the essential spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylSide {
    Operator,
    Adjoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylPoint {
    #[serde(serialize_with = "scalar_pair")]
    pub mu: Scalar,
    pub side: WeylSide,
    /// Orthonormal vectors supported on the first `truncation` coordinates.
    pub vectors: Vec<DenseVector>,
    pub residuals: Vec<f64>,
}

impl WeylPoint {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Two separated points, each with more than `rank_budget` orthonormal
/// approximate eigenvectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylWitness {
    pub points: Vec<WeylPoint>,
    pub tolerance: f64,
    pub truncation: usize,
    pub rank_budget: usize,
}

impl WeylWitness {
    /// Largest `|(T - mu) u|` (or adjoint residual) recomputed by applying the
    /// operator to each stored vector.
    pub fn revalidate(&self, t: &OperatorSpec) -> f64 {
        let t = t.as_complex();
        let t = &t;
        self.points
            .iter()
            .flat_map(|p| p.vectors.iter().map(move |u| residual(t, p.mu.value(), p.side, u.entries())))
            .fold(0.0, f64::max)
    }
}

fn residual(t: &OperatorSpec, mu: C64, side: WeylSide, u: &[C64]) -> f64 {
    let (mut image, shift) = match side {
        WeylSide::Operator => (t.apply_slice(u), mu),
        WeylSide::Adjoint => (t.apply_adjoint_slice(u), mu.conj()),
    };
    if image.len() < u.len() {
        image.resize(u.len(), C64::new(0.0, 0.0));
    }
    for (y, x) in image.iter_mut().zip(u) {
        *y -= shift * x;
    }
    norm_slice(&image)
}

fn family(t: &OperatorSpec, mu: C64, side: WeylSide, tol: f64, n: usize, size: usize) -> Result<Option<WeylPoint>, DefinabilityError> {
    let (matrix, shift) = match side {
        WeylSide::Operator => (t.restrict(n), mu),
        WeylSide::Adjoint => (t.adjoint_spec().restrict(n), mu.conj()),
    };
    let (s, v) = svd_right(&matrix.shifted(shift))?;
    let k = s.len();
    if k < size || s[k - size] >= tol {
        return Ok(None);
    }
    let mut vectors = Vec::with_capacity(size);
    let mut residuals = Vec::with_capacity(size);
    for j in (k - size..k).rev() {
        let u = v.column(j);
        let r = residual(t, mu, side, &u);
        if r >= tol {
            return Ok(None);
        }
        residuals.push(r);
        vectors.push(DenseVector::new(t.field(), u)?);
    }
    Ok(Some(WeylPoint { mu: Scalar::complex(mu.re, mu.im), side, vectors, residuals }))
}

/// Searches `candidates` for two points `mu`, separated by more than
/// `10 tol`, at which `T - mu` (or its adjoint) has `rank_budget + 1`
/// orthonormal vectors on the first `n` coordinates with residual below
/// `tol`. Real operators are complexified first. Candidates closer than
/// `10 tol` to an earlier one are skipped.
pub fn find_weyl_witness(
    t: &OperatorSpec,
    candidates: &[Scalar],
    tol: f64,
    n: usize,
    rank_budget: usize,
) -> Result<Option<WeylWitness>, DefinabilityError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(DefinabilityError::BadOption(format!("witness tolerance must be positive, got {tol}")));
    }
    let t = t.as_complex();
    let mut kept: Vec<C64> = Vec::new();
    for c in candidates {
        let z = c.value();
        if kept.iter().all(|k| (k - z).norm() > 10.0 * tol) {
            kept.push(z);
        }
    }
    let mut points = Vec::new();
    for mu in kept {
        for side in [WeylSide::Operator, WeylSide::Adjoint] {
            if let Some(p) = family(&t, mu, side, tol, n, rank_budget + 1)? {
                points.push(p);
                break;
            }
        }
        if points.len() == 2 {
            return Ok(Some(WeylWitness { points, tolerance: tol, truncation: n, rank_budget }));
        }
    }
    Ok(None)
}
