use crate::linalg::{singular_values, DenseMatrix, DenseVector, Field, Scalar, C64, ONE, ZERO};

use super::{DiagonalTail, OperatorKind, OperatorSpec, SetClass};

/// Decomposition `T = s I + K` with `K` a tree whose every leaf has a
/// decaying tail.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarCompactSplit {
    pub scalar: Scalar,
    pub compact: OperatorSpec,
}

fn finite_rank_matrix(pairs: &[super::RankOnePair], field: Field) -> DenseMatrix {
    let rows = pairs.iter().map(|p| p.z.len()).max().unwrap_or(0);
    DenseMatrix::from_fn(field, rows, pairs.len(), |i, j| pairs[j].z.get(i))
}

fn norm_kind(kind: &OperatorKind, field: Field) -> f64 {
    match kind {
        OperatorKind::Identity
        | OperatorKind::ShiftLeft
        | OperatorKind::ShiftRight
        | OperatorKind::CoordinateSubsequence { .. } => 1.0,
        OperatorKind::Zero => 0.0,
        OperatorKind::Diagonal { prefix, tail } => {
            let head = prefix.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let rest = match tail {
                DiagonalTail::Zero => 0.0,
                DiagonalTail::Constant(c) => c.abs(),
                DiagonalTail::Reciprocal => 1.0 / (prefix.len() as f64 + 1.0),
            };
            head.max(rest)
        }
        OperatorKind::FiniteRank { pairs } => {
            let z = finite_rank_matrix(pairs, field);
            if z.rows() == 0 || z.cols() == 0 {
                return 0.0;
            }
            singular_values(&z).map(|s| s[0]).unwrap_or_else(|_| z.frobenius_norm())
        }
        OperatorKind::Projection { target } => match target.class() {
            SetClass::Finite(s) if s.is_empty() => 0.0,
            _ => 1.0,
        },
        OperatorKind::Scale { c, inner } => c.abs() * norm_kind(inner, field),
        OperatorKind::Sum { left, right } => norm_kind(left, field) + norm_kind(right, field),
        OperatorKind::Compose { outer, inner } => norm_kind(outer, field) * norm_kind(inner, field),
        OperatorKind::Adjoint { inner } => norm_kind(inner, field),
        OperatorKind::DirectSum { left, right } => norm_kind(left, field).max(norm_kind(right, field)),
    }
}

/// Bound on `|T - P_N T P_N|` read off the tree, absent when some leaf has
/// no decaying tail.
fn tail_kind(kind: &OperatorKind, field: Field, n: usize) -> Option<f64> {
    match kind {
        OperatorKind::Zero => Some(0.0),
        OperatorKind::Identity
        | OperatorKind::ShiftLeft
        | OperatorKind::ShiftRight
        | OperatorKind::CoordinateSubsequence { .. } => None,
        OperatorKind::Diagonal { prefix, tail } => {
            let head = prefix.entries().iter().skip(n).map(|z| z.norm()).fold(0.0, f64::max);
            let from = n.max(prefix.len());
            let rest = match tail {
                DiagonalTail::Zero => 0.0,
                DiagonalTail::Constant(c) if c.is_zero() => 0.0,
                DiagonalTail::Constant(_) => return None,
                DiagonalTail::Reciprocal => 1.0 / (from as f64 + 1.0),
            };
            Some(head.max(rest))
        }
        OperatorKind::FiniteRank { pairs } => {
            // Frobenius norm of the entries <T e_b, e_a> outside the leading block.
            let rows = pairs.iter().map(|p| p.e.len()).max().unwrap_or(0);
            let cols = pairs.iter().map(|p| p.z.len()).max().unwrap_or(0);
            let mut sum = 0.0;
            for a in 0..rows {
                for b in 0..cols {
                    if a < n && b < n {
                        continue;
                    }
                    let t: C64 = pairs.iter().map(|p| p.e.get(a) * p.z.get(b).conj()).sum();
                    sum += t.norm_sqr();
                }
            }
            Some(sum.sqrt())
        }
        OperatorKind::Projection { target } => match target.class() {
            SetClass::Finite(s) => Some(if s.iter().any(|&k| k >= n) { 1.0 } else { 0.0 }),
            _ => None,
        },
        OperatorKind::Scale { c, inner } => Some(c.abs() * tail_kind(inner, field, n)?),
        OperatorKind::Sum { left, right } => Some(tail_kind(left, field, n)? + tail_kind(right, field, n)?),
        OperatorKind::Compose { outer, inner } => {
            if matches!(**outer, OperatorKind::Zero) || matches!(**inner, OperatorKind::Zero) {
                return Some(0.0);
            }
            // With S = (P A P)(P B P): |AB - S| <= tA |B| + |A| tB, and
            // AB - P AB P = E - P E P for E = AB - S.
            let ta = tail_kind(outer, field, n)?;
            let tb = tail_kind(inner, field, n)?;
            Some(2.0 * (ta * norm_kind(inner, field) + norm_kind(outer, field) * tb))
        }
        OperatorKind::Adjoint { inner } => tail_kind(inner, field, n),
        OperatorKind::DirectSum { left, right } => {
            Some(tail_kind(left, field, n.div_ceil(2))?.max(tail_kind(right, field, n / 2)?))
        }
    }
}

fn scale_node(c: C64, k: OperatorKind, field: Field) -> OperatorKind {
    if c == ZERO || matches!(k, OperatorKind::Zero) {
        OperatorKind::Zero
    } else if c == ONE {
        k
    } else {
        OperatorKind::scale(Scalar::coerce(field, c), k)
    }
}

fn sum_node(a: OperatorKind, b: OperatorKind) -> OperatorKind {
    match (a, b) {
        (OperatorKind::Zero, k) | (k, OperatorKind::Zero) => k,
        (a, b) => OperatorKind::sum(a, b),
    }
}

fn compose_node(a: OperatorKind, b: OperatorKind) -> OperatorKind {
    match (a, b) {
        (OperatorKind::Zero, _) | (_, OperatorKind::Zero) => OperatorKind::Zero,
        (a, b) => OperatorKind::compose(a, b),
    }
}

fn finite_diagonal(field: Field, len: usize, entry: impl Fn(usize) -> C64) -> OperatorKind {
    let prefix = DenseVector::coerce(field, (0..len).map(entry).collect());
    OperatorKind::diagonal(prefix, DiagonalTail::Zero)
}

fn split_kind(kind: &OperatorKind, field: Field) -> Option<(C64, OperatorKind)> {
    match kind {
        OperatorKind::Identity => Some((ONE, OperatorKind::Zero)),
        OperatorKind::Zero | OperatorKind::FiniteRank { .. } => Some((ZERO, kind.clone())),
        OperatorKind::Diagonal { prefix, tail } => match tail {
            DiagonalTail::Constant(c) if !c.is_zero() => {
                let c = c.value();
                Some((c, finite_diagonal(field, prefix.len(), |k| prefix.get(k) - c)))
            }
            _ => Some((ZERO, kind.clone())),
        },
        OperatorKind::ShiftLeft | OperatorKind::ShiftRight => None,
        OperatorKind::CoordinateSubsequence { index_map } => {
            index_map.is_identity().then_some((ONE, OperatorKind::Zero))
        }
        OperatorKind::Projection { target } => match target.class() {
            SetClass::Finite(_) => Some((ZERO, kind.clone())),
            SetClass::Cofinite(missing) => {
                let len = missing.last().map_or(0, |&k| k + 1);
                let kind = finite_diagonal(field, len, |k| {
                    if missing.binary_search(&k).is_ok() {
                        -ONE
                    } else {
                        ZERO
                    }
                });
                Some((ONE, if len == 0 { OperatorKind::Zero } else { kind }))
            }
            SetClass::InfiniteCoinfinite => None,
        },
        OperatorKind::Scale { c, inner } => {
            let (s, k) = split_kind(inner, field)?;
            Some((c.value() * s, scale_node(c.value(), k, field)))
        }
        OperatorKind::Sum { left, right } => {
            let (a, ka) = split_kind(left, field)?;
            let (b, kb) = split_kind(right, field)?;
            Some((a + b, sum_node(ka, kb)))
        }
        OperatorKind::Compose { outer, inner } => {
            // (aI + K1)(bI + K2) = ab I + a K2 + b K1 + K1 K2
            let (a, k1) = split_kind(outer, field)?;
            let (b, k2) = split_kind(inner, field)?;
            let cross = sum_node(scale_node(a, k2.clone(), field), scale_node(b, k1.clone(), field));
            Some((a * b, sum_node(cross, compose_node(k1, k2))))
        }
        OperatorKind::Adjoint { inner } => {
            let (s, k) = split_kind(inner, field)?;
            let k = if matches!(k, OperatorKind::Zero) { k } else { OperatorKind::adjoint(k) };
            Some((s.conj(), k))
        }
        OperatorKind::DirectSum { left, right } => {
            let (a, ka) = split_kind(left, field)?;
            let (b, kb) = split_kind(right, field)?;
            if a != b {
                return None;
            }
            let k = match (&ka, &kb) {
                (OperatorKind::Zero, OperatorKind::Zero) => OperatorKind::Zero,
                _ => OperatorKind::direct_sum(ka, kb),
            };
            Some((a, k))
        }
    }
}

impl OperatorSpec {
    /// Upper bound on the operator norm: exact on leaves, triangle and
    /// submultiplicative inequalities on composite nodes.
    pub fn norm_bound(&self) -> f64 {
        norm_kind(&self.kind, self.field)
    }

    /// Upper bound on `|T - P_N T P_N|`, absent when the structure has no
    /// decaying tail.
    pub fn tail_norm_bound(&self, n: usize) -> Option<f64> {
        if let Some(t) = tail_kind(&self.kind, self.field, n) {
            return Some(t);
        }
        // Trees like `(2I + K) - 2I` only decay after regrouping.
        let split = self.scalar_compact_split()?;
        let s = split.scalar.abs();
        if s > 1e-12 * self.norm_bound().max(1.0) {
            return None;
        }
        Some(s + split.compact.tail_norm_bound_direct(n)?)
    }

    fn tail_norm_bound_direct(&self, n: usize) -> Option<f64> {
        tail_kind(&self.kind, self.field, n)
    }

    /// Structural `s I + K` decomposition, absent when the tree contains a
    /// shift, a non-trivial subsequence, an infinite-and-coinfinite projection
    /// or a direct sum with different scalar parts.
    pub fn scalar_compact_split(&self) -> Option<ScalarCompactSplit> {
        let (s, k) = split_kind(&self.kind, self.field)?;
        Some(ScalarCompactSplit {
            scalar: Scalar::coerce(self.field, s),
            compact: OperatorSpec { field: self.field, kind: k },
        })
    }

    /// Finite-rank operator with the same action as `P_N T P_N`, built from
    /// a singular value decomposition of the truncation.
    pub fn finite_rank_surrogate(&self, n: usize) -> Result<OperatorSpec, crate::linalg::LinalgError> {
        let m = self.truncate(n);
        let svd = crate::linalg::svd(&m)?;
        let cutoff = svd.singular_values.first().copied().unwrap_or(0.0) * 1e-15;
        let pairs = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > cutoff && s > 0.0)
            .map(|(k, &s)| super::RankOnePair {
                z: DenseVector::coerce(self.field, svd.right_vectors.column(k).into_iter().map(|v| v * s).collect()),
                e: DenseVector::coerce(self.field, svd.left_vectors.column(k)),
            })
            .collect();
        Ok(OperatorSpec { field: self.field, kind: OperatorKind::FiniteRank { pairs } })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{IndexRule, ProjectionTarget, RankOnePair};

    fn spec(kind: OperatorKind) -> OperatorSpec {
        OperatorSpec::new(Field::Real, kind).unwrap()
    }

    fn reciprocal() -> OperatorKind {
        OperatorKind::diagonal(DenseVector::real(&[]), DiagonalTail::Reciprocal)
    }

    #[test]
    fn norm_examples() {
        assert_eq!(OperatorSpec::shift_left(Field::Real).norm_bound(), 1.0);
        assert_eq!(spec(OperatorKind::scale(Scalar::real(2.0), OperatorKind::Identity)).norm_bound(), 2.0);
        assert_eq!(spec(OperatorKind::sum(OperatorKind::Identity, OperatorKind::Identity)).norm_bound(), 2.0);
        let fr = spec(OperatorKind::FiniteRank {
            pairs: vec![RankOnePair { z: DenseVector::real(&[1.0, 1.0]), e: DenseVector::real(&[1.0]) }],
        });
        assert!((fr.norm_bound() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tail_examples() {
        assert_eq!(spec(reciprocal()).tail_norm_bound(10), Some(1.0 / 11.0));
        let fr = spec(OperatorKind::FiniteRank {
            pairs: vec![RankOnePair {
                z: DenseVector::real(&[1.0, 0.0, 2.0, 0.0, 1.0]),
                e: DenseVector::real(&[0.0, 0.0, 0.0, 1.0]),
            }],
        });
        assert_eq!(fr.tail_norm_bound(10), Some(0.0));
        assert_eq!(OperatorSpec::shift_left(Field::Real).tail_norm_bound(100), None);
        assert_eq!(OperatorSpec::identity(Field::Real).tail_norm_bound(100), None);
    }

    #[test]
    fn regrouped_tail_after_scalar_cancellation() {
        let t = spec(OperatorKind::sum(OperatorKind::scale(Scalar::real(2.0), OperatorKind::Identity), reciprocal()));
        let k = t.minus_scalar(C64::new(2.0, 0.0)).unwrap();
        assert_eq!(k.tail_norm_bound(10), Some(1.0 / 11.0));
    }

    #[test]
    fn splits() {
        let t = spec(OperatorKind::compose(
            OperatorKind::sum(OperatorKind::scale(Scalar::real(2.0), OperatorKind::Identity), reciprocal()),
            OperatorKind::projection(ProjectionTarget::ArithmeticSet { start: 3, step: 1 }),
        ));
        let split = t.scalar_compact_split().unwrap();
        assert_eq!(split.scalar, Scalar::real(2.0));
        let diff = t.truncate(12).sub(&split.compact.truncate(12).shifted(C64::new(-2.0, 0.0))).unwrap();
        assert_eq!(diff.max_abs(), 0.0);
        assert!(OperatorSpec::shift_right(Field::Real).scalar_compact_split().is_none());
        let evens = spec(OperatorKind::coordinate_subsequence(IndexRule::arithmetic(0, 2)));
        assert!(evens.scalar_compact_split().is_none());
    }

    #[test]
    fn surrogate_matches_truncation() {
        let t = spec(OperatorKind::sum(reciprocal(), OperatorKind::compose(reciprocal(), reciprocal())));
        let s = t.finite_rank_surrogate(8).unwrap();
        let diff = s.truncate(8).sub(&t.truncate(8)).unwrap();
        assert!(diff.max_abs() < 1e-14);
        assert_eq!(s.tail_norm_bound(8), Some(0.0));
    }
}
