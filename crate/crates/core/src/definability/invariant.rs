use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{dot, hermitian_eigen, lu_solve, norm_slice, singular_values, DenseMatrix, DenseVector, Field, Scalar, C64};
use crate::operators::{OperatorSpec, ParameterSet};

use super::{kernel_basis, scalar_pair, DefinabilityError, DefinabilityVerdict};

const POWER_STEPS: usize = 400;
const RAYLEIGH_STEPS: usize = 30;
const KERNEL_THRESHOLD: f64 = 1e-8;
const SEED: u64 = 0x1f_5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantRoute {
    /// `T` is scalar at the working tolerance; any line is invariant.
    Scalar,
    /// An eigenspace of the compact part.
    Eigenspace,
    /// The compact part looks quasinilpotent; nothing is claimed.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantSubspace {
    pub route: InvariantRoute,
    #[serde(serialize_with = "scalar_pair")]
    pub lambda: Scalar,
    /// Eigenvalue of the compact part spanning the subspace.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "optional_pair")]
    pub mu: Option<Scalar>,
    pub basis: Vec<DenseVector>,
    pub dimension: usize,
    /// Codimension inside the first `truncation` coordinates.
    pub codimension: usize,
    /// Largest `dist(T u, E)` over the basis.
    pub residual: f64,
    pub truncation: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn optional_pair<S: serde::Serializer>(s: &Option<Scalar>, serializer: S) -> Result<S::Ok, S::Error> {
    match s {
        Some(v) => scalar_pair(v, serializer),
        None => serializer.serialize_none(),
    }
}

fn invariance_residual(t: &OperatorSpec, basis: &[DenseVector]) -> Result<f64, DefinabilityError> {
    let span = ParameterSet::new(t.field(), basis.to_vec())?;
    Ok(basis.iter().map(|u| span.distance(&t.apply_slice(u.entries()))).fold(0.0, f64::max))
}

/// Eigenvalue of largest modulus of a Hermitian section, otherwise an
/// eigenvalue reached by power iteration refined with Rayleigh quotient
/// iteration.
fn dominant_eigenvalue(k: &DenseMatrix) -> Result<Option<C64>, DefinabilityError> {
    let scale = k.max_abs().max(f64::MIN_POSITIVE);
    if k.hermitian_defect() <= 1e-12 * scale {
        let eig = hermitian_eigen(k)?;
        return Ok(eig
            .eigenvalues
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .map(|v| C64::new(v, 0.0)));
    }
    let n = k.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let normalize = |v: &mut Vec<C64>| -> bool {
        let s = norm_slice(v);
        if !(s > 1e-300 && s.is_finite()) {
            return false;
        }
        v.iter_mut().for_each(|z| *z /= s);
        true
    };
    if !normalize(&mut v) {
        return Ok(None);
    }
    for _ in 0..POWER_STEPS {
        v = k.mul_vec(&v);
        if !normalize(&mut v) {
            return Ok(None);
        }
    }
    let mut mu = dot(&k.mul_vec(&v), &v);
    for _ in 0..RAYLEIGH_STEPS {
        let mut w = lu_solve(&k.shifted(mu), &v)?;
        if !normalize(&mut w) {
            break;
        }
        v = w;
        let next = dot(&k.mul_vec(&v), &v);
        let done = (next - mu).norm() <= 1e-15 * next.norm().max(1.0);
        mu = next;
        if done {
            break;
        }
    }
    Ok(Some(mu))
}

/// A nontrivial closed invariant subspace of a definable `T = lambda I + K`
/// over the complex field. Returns `span{e_0}` when `K` is negligible at
/// `tol`, an eigenspace of `K` for an eigenvalue of modulus above `tol`, and
/// otherwise an inconclusive result.
pub fn invariant_subspace(
    t: &OperatorSpec,
    verdict: &DefinabilityVerdict,
    tol: f64,
    n: usize,
) -> Result<InvariantSubspace, DefinabilityError> {
    if t.field() == Field::Real {
        return Err(DefinabilityError::RealField);
    }
    let DefinabilityVerdict::Definable { lambda, .. } = verdict else {
        return Err(DefinabilityError::NotDefinable);
    };
    if tol.is_nan() || tol <= 0.0 || n == 0 {
        return Err(DefinabilityError::BadOption(format!("need tol > 0 and N > 0, got {tol} and {n}")));
    }
    let lambda = *lambda;
    let k = t.minus_scalar(lambda.value())?;
    let section = k.truncate(n);
    let inconclusive = |reason: String| InvariantSubspace {
        route: InvariantRoute::Inconclusive,
        lambda,
        mu: None,
        basis: Vec::new(),
        dimension: 0,
        codimension: n,
        residual: f64::INFINITY,
        truncation: n,
        reason: Some(reason),
    };

    if let Some(tail) = k.tail_norm_bound(n) {
        let head = singular_values(&section)?.first().copied().unwrap_or(0.0);
        if head + tail < tol {
            let basis = vec![DenseVector::basis(Field::Complex, 0)];
            return Ok(InvariantSubspace {
                route: InvariantRoute::Scalar,
                lambda,
                mu: None,
                residual: invariance_residual(t, &basis)?,
                basis,
                dimension: 1,
                codimension: n - 1,
                truncation: n,
                reason: None,
            });
        }
    }

    let Some(mu) = dominant_eigenvalue(&section)? else {
        return Ok(inconclusive("power iteration collapsed: the compact part is nilpotent on the section".into()));
    };
    if mu.norm() <= tol {
        return Ok(inconclusive(format!("largest eigenvalue of the compact part found has modulus {:.3e}", mu.norm())));
    }
    let eigen = match kernel_basis(&k.shifted_by(mu), KERNEL_THRESHOLD, n, None) {
        Ok(e) if e.dimension > 0 => e,
        Ok(_) => return Ok(inconclusive(format!("no eigenvector of the compact part at {mu}"))),
        Err(e) => return Ok(inconclusive(e.to_string())),
    };
    let residual = invariance_residual(t, &eigen.basis)?;
    if residual >= tol {
        return Ok(inconclusive(format!("eigenspace at {mu} has invariance residual {residual:.3e}")));
    }
    Ok(InvariantSubspace {
        route: InvariantRoute::Eigenspace,
        lambda,
        mu: Some(Scalar::complex(mu.re, mu.im)),
        dimension: eigen.dimension,
        codimension: n - eigen.dimension,
        basis: eigen.basis,
        residual,
        truncation: n,
        reason: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definability::{classify, Options};
    use crate::operators::{DiagonalTail, OperatorKind, RankOnePair};

    fn run(kind: OperatorKind, tol: f64) -> InvariantSubspace {
        let t = OperatorSpec::new(Field::Complex, kind).unwrap();
        let v = classify(&t, &Options::default()).unwrap();
        invariant_subspace(&t, &v, tol, 64).unwrap()
    }

    #[test]
    fn scalar_operator_uses_a_line() {
        let s = run(OperatorKind::scale(Scalar::complex(5.0, 0.0), OperatorKind::Identity), 1e-8);
        assert_eq!(s.route, InvariantRoute::Scalar);
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn reciprocal_compact_part_gives_first_coordinate() {
        let s = run(
            OperatorKind::sum(
                OperatorKind::scale(Scalar::complex(2.0, 0.0), OperatorKind::Identity),
                OperatorKind::diagonal(DenseVector::complex(vec![]), DiagonalTail::Reciprocal),
            ),
            1e-8,
        );
        assert_eq!(s.route, InvariantRoute::Eigenspace);
        assert_eq!(s.dimension, 1);
        assert!(s.residual < 1e-10);
        assert!((s.basis[0].get(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strictly_lower_triangular_part_is_inconclusive() {
        let pairs = (1..12)
            .map(|i| {
                let z: Vec<C64> = (0..i).map(|j| C64::new(2f64.powi(-(i as i32) - j as i32), 0.0)).collect();
                RankOnePair { z: DenseVector::complex(z), e: DenseVector::basis(Field::Complex, i) }
            })
            .collect();
        let s = run(OperatorKind::sum(OperatorKind::Identity, OperatorKind::FiniteRank { pairs }), 1e-8);
        assert_eq!(s.route, InvariantRoute::Inconclusive);
        assert!(s.reason.is_some());
    }

    #[test]
    fn non_hermitian_compact_part() {
        let e = |i| DenseVector::basis(Field::Complex, i);
        let pairs = vec![
            RankOnePair { z: e(0).scaled(C64::new(0.5, 0.0)), e: e(0) },
            RankOnePair { z: DenseVector::complex(vec![C64::new(1.0, 0.0), C64::new(0.0, -0.25)]), e: e(1) },
        ];
        let s = run(
            OperatorKind::sum(OperatorKind::scale(Scalar::complex(1.0, 1.0), OperatorKind::Identity), OperatorKind::FiniteRank { pairs }),
            1e-8,
        );
        assert_eq!(s.route, InvariantRoute::Eigenspace);
        assert!(s.residual < 1e-8);
        assert!(s.dimension >= 1 && s.codimension >= 1);
    }

    #[test]
    fn real_field_is_rejected() {
        let t = OperatorSpec::identity(Field::Real);
        let v = classify(&t, &Options::default()).unwrap();
        assert!(matches!(invariant_subspace(&t, &v, 1e-8, 16), Err(DefinabilityError::RealField)));
    }
}
