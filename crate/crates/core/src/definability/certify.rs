use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use crate::linalg::{singular_values, Scalar};
use crate::operators::OperatorSpec;

use super::{scalar_pair, DefinabilityError};

/// One rung of a certificate ladder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderRow {
    pub n: usize,
    pub value: f64,
}

impl Serialize for LadderRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&self.n)?;
        t.serialize_element(&self.value)?;
        t.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateRoute {
    /// `|K - P_N K P_N|` bounded from the tree structure.
    Structural,
    /// Singular value `s_{N/2}` of the finite section.
    Measured,
}

/// Evidence that `T - lambda I` is compact: a non-increasing ladder of tail
/// values ending below `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessCertificate {
    #[serde(serialize_with = "scalar_pair")]
    pub lambda: Scalar,
    pub route: CertificateRoute,
    pub ladder: Vec<LadderRow>,
    pub tolerance: f64,
}

impl CompactnessCertificate {
    pub fn final_value(&self) -> f64 {
        self.ladder.last().map_or(f64::INFINITY, |r| r.value)
    }

    pub fn final_size(&self) -> usize {
        self.ladder.last().map_or(0, |r| r.n)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.ladder.windows(2).all(|w| w[1].value <= w[0].value)
    }
}

/// Ladders recorded when neither route certifies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificationFailure {
    pub structural: Vec<LadderRow>,
    pub measured: Vec<LadderRow>,
    pub reason: String,
}

fn ladder_sizes(n_max: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut n = 16;
    while n <= n_max {
        sizes.push(n);
        n *= 2;
    }
    if sizes.last() != Some(&n_max) {
        sizes.push(n_max);
    }
    sizes
}

fn structural(t: &OperatorSpec, tol: f64, n_max: usize) -> Result<Vec<LadderRow>, Vec<LadderRow>> {
    let mut ladder = Vec::new();
    let mut prev = 0;
    for n in ladder_sizes(n_max) {
        let Some(tail) = t.tail_norm_bound(n) else {
            return Err(ladder);
        };
        if tail < tol {
            // Smallest size in (prev, n] that still certifies.
            let (mut lo, mut hi, mut best) = (prev, n, tail);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                match t.tail_norm_bound(mid) {
                    Some(v) if v < tol => {
                        hi = mid;
                        best = v;
                    }
                    _ => lo = mid,
                }
            }
            ladder.push(LadderRow { n: hi, value: best });
            return Ok(ladder);
        }
        ladder.push(LadderRow { n, value: tail });
        prev = n;
    }
    Err(ladder)
}

fn measured(t: &OperatorSpec, tol: f64, n_max: usize) -> Result<Vec<LadderRow>, (Vec<LadderRow>, String)> {
    let mut ladder: Vec<LadderRow> = Vec::new();
    for n in ladder_sizes(n_max) {
        let s = singular_values(&t.truncate(n)).map_err(|e| (ladder.clone(), e.to_string()))?;
        let value = s[n / 2];
        if let Some(last) = ladder.last() {
            if value > last.value {
                ladder.push(LadderRow { n, value });
                return Err((ladder, format!("singular value tail increased at N={n}")));
            }
        }
        ladder.push(LadderRow { n, value });
        if value < tol {
            return Ok(ladder);
        }
    }
    Err((ladder, format!("singular value tail stayed above {tol} up to N={n_max}")))
}

/// Certifies that `t` is compact, first from structural tail bounds and
/// otherwise from the decay of `s_{N/2}` over the ladder `16, 32, ..., n_max`.
/// The certificate's `lambda` is zero; callers certifying `T - lambda I`
/// set it.
pub fn certify_compact(
    t: &OperatorSpec,
    tol: f64,
    n_max: usize,
) -> Result<Result<CompactnessCertificate, CertificationFailure>, DefinabilityError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(DefinabilityError::BadOption(format!("certificate tolerance must be positive, got {tol}")));
    }
    if n_max < 1 {
        return Err(DefinabilityError::BadOption("n_max must be positive".into()));
    }
    let lambda = Scalar::coerce(t.field(), crate::linalg::ZERO);
    let structural_ladder = match structural(t, tol, n_max) {
        Ok(ladder) => {
            return Ok(Ok(CompactnessCertificate { lambda, route: CertificateRoute::Structural, ladder, tolerance: tol }))
        }
        Err(ladder) => ladder,
    };
    Ok(match measured(t, tol, n_max) {
        Ok(ladder) => Ok(CompactnessCertificate { lambda, route: CertificateRoute::Measured, ladder, tolerance: tol }),
        Err((measured, reason)) => Err(CertificationFailure { structural: structural_ladder, measured, reason }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{DenseVector, Field};
    use crate::operators::{DiagonalTail, OperatorKind, RankOnePair};

    #[test]
    fn reciprocal_certifies_structurally_at_100() {
        let t = OperatorSpec::new(
            Field::Real,
            OperatorKind::diagonal(DenseVector::real(&[]), DiagonalTail::Reciprocal),
        )
        .unwrap();
        let cert = certify_compact(&t, 1e-2, 512).unwrap().unwrap();
        assert_eq!(cert.route, CertificateRoute::Structural);
        assert_eq!(cert.final_size(), 100);
        assert_eq!(cert.final_value(), 1.0 / 101.0);
        assert!(cert.is_non_increasing());
    }

    #[test]
    fn finite_rank_has_zero_tail() {
        let t = OperatorSpec::new(
            Field::Real,
            OperatorKind::FiniteRank {
                pairs: vec![RankOnePair { z: DenseVector::real(&[1.0, 2.0]), e: DenseVector::real(&[0.0, 1.0]) }],
            },
        )
        .unwrap();
        let cert = certify_compact(&t, 1e-4, 64).unwrap().unwrap();
        assert_eq!(cert.final_value(), 0.0);
    }

    #[test]
    fn shift_fails_with_unit_tail() {
        let t = OperatorSpec::shift_left(Field::Real);
        let fail = certify_compact(&t, 0.5, 128).unwrap().unwrap_err();
        assert!(fail.structural.is_empty());
        assert_eq!(fail.measured.len(), 4);
        assert!(fail.measured.iter().all(|r| (r.value - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ladder_serializes_as_pairs() {
        let row = LadderRow { n: 16, value: 0.25 };
        assert_eq!(serde_json::to_string(&row).unwrap(), "[16,0.25]");
    }
}
