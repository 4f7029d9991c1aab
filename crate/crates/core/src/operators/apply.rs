use crate::linalg::{add_padded, dot, orthonormalize, DenseMatrix, DenseVector, Field, Scalar, C64, ONE, ZERO};

use super::{DiagonalTail, OperatorError, OperatorKind, OperatorSpec, RankOnePair};

pub(crate) fn diagonal_entry(prefix: &DenseVector, tail: &DiagonalTail, k: usize) -> C64 {
    if k < prefix.len() {
        return prefix.get(k);
    }
    match tail {
        DiagonalTail::Zero => ZERO,
        DiagonalTail::Constant(c) => c.value(),
        DiagonalTail::Reciprocal => C64::new(1.0 / (k as f64 + 1.0), 0.0),
    }
}

fn deinterleave(x: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let even = x.iter().step_by(2).copied().collect();
    let odd = x.iter().skip(1).step_by(2).copied().collect();
    (even, odd)
}

fn interleave(even: &[C64], odd: &[C64]) -> Vec<C64> {
    let len = (2 * even.len()).saturating_sub(1).max(2 * odd.len());
    let mut out = vec![ZERO; len];
    for (k, v) in even.iter().enumerate() {
        out[2 * k] = *v;
    }
    for (k, v) in odd.iter().enumerate() {
        out[2 * k + 1] = *v;
    }
    out
}

/// Exact image of a finitely supported vector.
pub(crate) fn apply_kind(kind: &OperatorKind, x: &[C64]) -> Vec<C64> {
    match kind {
        OperatorKind::Identity => x.to_vec(),
        OperatorKind::Zero => Vec::new(),
        OperatorKind::Diagonal { prefix, tail } => {
            x.iter().enumerate().map(|(k, v)| v * diagonal_entry(prefix, tail, k)).collect()
        }
        OperatorKind::ShiftLeft => x.get(1..).unwrap_or_default().to_vec(),
        OperatorKind::ShiftRight => {
            if x.is_empty() {
                return Vec::new();
            }
            let mut out = Vec::with_capacity(x.len() + 1);
            out.push(ZERO);
            out.extend_from_slice(x);
            out
        }
        OperatorKind::CoordinateSubsequence { index_map } => {
            (0..index_map.count_below(x.len())).map(|n| x[index_map.index(n)]).collect()
        }
        OperatorKind::FiniteRank { pairs } => pairs
            .iter()
            .fold(Vec::new(), |acc, p| add_padded(&acc, p.e.entries(), dot(x, p.z.entries()))),
        OperatorKind::Projection { target } => {
            x.iter().enumerate().map(|(k, v)| if target.contains(k) { *v } else { ZERO }).collect()
        }
        OperatorKind::Scale { c, inner } => {
            let c = c.value();
            apply_kind(inner, x).into_iter().map(|v| v * c).collect()
        }
        OperatorKind::Sum { left, right } => add_padded(&apply_kind(left, x), &apply_kind(right, x), ONE),
        OperatorKind::Compose { outer, inner } => apply_kind(outer, &apply_kind(inner, x)),
        OperatorKind::Adjoint { inner } => apply_adjoint_kind(inner, x),
        OperatorKind::DirectSum { left, right } => {
            let (even, odd) = deinterleave(x);
            interleave(&apply_kind(left, &even), &apply_kind(right, &odd))
        }
    }
}

/// Exact image under the Hilbert adjoint.
pub(crate) fn apply_adjoint_kind(kind: &OperatorKind, y: &[C64]) -> Vec<C64> {
    match kind {
        OperatorKind::Identity | OperatorKind::Projection { .. } => apply_kind(kind, y),
        OperatorKind::Zero => Vec::new(),
        OperatorKind::Diagonal { prefix, tail } => {
            y.iter().enumerate().map(|(k, v)| v * diagonal_entry(prefix, tail, k).conj()).collect()
        }
        OperatorKind::ShiftLeft => apply_kind(&OperatorKind::ShiftRight, y),
        OperatorKind::ShiftRight => apply_kind(&OperatorKind::ShiftLeft, y),
        OperatorKind::CoordinateSubsequence { index_map } => {
            let Some(last) = y.len().checked_sub(1) else {
                return Vec::new();
            };
            let mut out = vec![ZERO; index_map.index(last) + 1];
            for (n, v) in y.iter().enumerate() {
                out[index_map.index(n)] = *v;
            }
            out
        }
        OperatorKind::FiniteRank { pairs } => pairs
            .iter()
            .fold(Vec::new(), |acc, p| add_padded(&acc, p.z.entries(), dot(y, p.e.entries()))),
        OperatorKind::Scale { c, inner } => {
            let c = c.value().conj();
            apply_adjoint_kind(inner, y).into_iter().map(|v| v * c).collect()
        }
        OperatorKind::Sum { left, right } => {
            add_padded(&apply_adjoint_kind(left, y), &apply_adjoint_kind(right, y), ONE)
        }
        OperatorKind::Compose { outer, inner } => apply_adjoint_kind(inner, &apply_adjoint_kind(outer, y)),
        OperatorKind::Adjoint { inner } => apply_kind(inner, y),
        OperatorKind::DirectSum { left, right } => {
            let (even, odd) = deinterleave(y);
            interleave(&apply_adjoint_kind(left, &even), &apply_adjoint_kind(right, &odd))
        }
    }
}

fn adjoint_kind(kind: &OperatorKind, field: Field) -> OperatorKind {
    match kind {
        OperatorKind::Identity | OperatorKind::Zero | OperatorKind::Projection { .. } => kind.clone(),
        OperatorKind::ShiftLeft => OperatorKind::ShiftRight,
        OperatorKind::ShiftRight => OperatorKind::ShiftLeft,
        OperatorKind::Diagonal { prefix, tail } => OperatorKind::Diagonal {
            prefix: DenseVector::coerce(prefix.field(), prefix.entries().iter().map(|z| z.conj()).collect()),
            tail: match tail {
                DiagonalTail::Constant(c) => DiagonalTail::Constant(c.conj()),
                other => other.clone(),
            },
        },
        OperatorKind::CoordinateSubsequence { .. } => OperatorKind::adjoint(kind.clone()),
        OperatorKind::FiniteRank { pairs } => OperatorKind::FiniteRank { pairs: adjoint_pairs(pairs, field) },
        OperatorKind::Scale { c, inner } => OperatorKind::scale(c.conj(), adjoint_kind(inner, field)),
        OperatorKind::Sum { left, right } => OperatorKind::sum(adjoint_kind(left, field), adjoint_kind(right, field)),
        OperatorKind::Compose { outer, inner } => {
            OperatorKind::compose(adjoint_kind(inner, field), adjoint_kind(outer, field))
        }
        OperatorKind::Adjoint { inner } => (**inner).clone(),
        OperatorKind::DirectSum { left, right } => {
            OperatorKind::direct_sum(adjoint_kind(left, field), adjoint_kind(right, field))
        }
    }
}

/// `sum_i <y, e_i> z_i` rewritten as `sum_j <y, z'_j> q_j` with `q_j` an
/// orthonormal basis of the span of the `z_i`.
fn adjoint_pairs(pairs: &[RankOnePair], field: Field) -> Vec<RankOnePair> {
    let zs: Vec<DenseVector> = pairs.iter().map(|p| p.z.clone()).collect();
    let qs = orthonormalize(&zs).expect("validated specs share one field");
    qs.into_iter()
        .map(|q| {
            let z = pairs.iter().fold(Vec::new(), |acc, p| {
                let c = dot(p.z.entries(), q.entries());
                add_padded(&acc, p.e.entries(), c.conj())
            });
            RankOnePair { z: DenseVector::coerce(field, z), e: q }
        })
        .collect()
}

impl OperatorSpec {
    fn check_vector(&self, x: &DenseVector) -> Result<(), OperatorError> {
        if !x.is_empty() {
            self.field.check(x.field())?;
        }
        Ok(())
    }

    /// `Tx` restricted to its first `out_support` coordinates.
    pub fn apply(&self, x: &DenseVector, out_support: usize) -> Result<DenseVector, OperatorError> {
        if out_support == 0 {
            return Err(OperatorError::ZeroSupport);
        }
        Ok(self.apply_exact(x)?.resized(out_support))
    }

    /// The full, finitely supported image `Tx`.
    pub fn apply_exact(&self, x: &DenseVector) -> Result<DenseVector, OperatorError> {
        self.check_vector(x)?;
        Ok(DenseVector::coerce(self.field, apply_kind(&self.kind, x.entries())))
    }

    /// The full image `T*y`.
    pub fn apply_adjoint(&self, y: &DenseVector) -> Result<DenseVector, OperatorError> {
        self.check_vector(y)?;
        Ok(DenseVector::coerce(self.field, apply_adjoint_kind(&self.kind, y.entries())))
    }

    pub(crate) fn apply_slice(&self, x: &[C64]) -> Vec<C64> {
        apply_kind(&self.kind, x)
    }

    pub(crate) fn apply_adjoint_slice(&self, y: &[C64]) -> Vec<C64> {
        apply_adjoint_kind(&self.kind, y)
    }

    fn basis_images(&self, n: usize) -> Vec<Vec<C64>> {
        (0..n)
            .map(|j| {
                let mut e = vec![ZERO; j + 1];
                e[j] = ONE;
                apply_kind(&self.kind, &e)
            })
            .collect()
    }

    /// The finite section `P_N T P_N` as an `N x N` matrix with entry
    /// `(i, j) = <T e_j, e_i>`.
    pub fn truncate(&self, n: usize) -> DenseMatrix {
        let cols: Vec<Vec<C64>> = self.basis_images(n).into_iter().map(|mut c| {
            c.resize(n, ZERO);
            c
        }).collect();
        DenseMatrix::from_columns(self.field, n, &cols)
    }

    /// `T P_N` as a matrix with `N` columns and enough rows to hold every
    /// image `T e_j` exactly (at least `N`).
    pub fn restrict(&self, n: usize) -> DenseMatrix {
        let mut cols = self.basis_images(n);
        let rows = cols.iter().map(Vec::len).max().unwrap_or(0).max(n);
        for c in &mut cols {
            c.resize(rows, ZERO);
        }
        DenseMatrix::from_columns(self.field, rows, &cols)
    }

    /// A spec tree for the Hilbert adjoint `T*`.
    pub fn adjoint_spec(&self) -> OperatorSpec {
        OperatorSpec { field: self.field, kind: adjoint_kind(&self.kind, self.field) }
    }

    /// `c T`.
    pub fn scaled(&self, c: Scalar) -> Result<OperatorSpec, OperatorError> {
        self.field.check(c.field())?;
        Ok(OperatorSpec { field: self.field, kind: OperatorKind::scale(c, self.kind.clone()) })
    }
}
