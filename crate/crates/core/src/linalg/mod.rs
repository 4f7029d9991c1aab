//! Dense finite-dimensional linear algebra over the real or complex field.
//!
//! Every quantity is stored as a `Complex64`; real-field objects keep their
//! imaginary parts at exactly zero. Vectors are finitely supported sequences
//! with an implicit zero tail, so mixed-length operations zero-pad.

mod eigen;
mod solve;
mod svd;

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use solve::lu_solve;
pub use svd::{singular_values, svd, SvdResult};

pub(crate) use svd::svd_right;

/// Complex double; the storage type for all entries.
pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("field mismatch: {left:?} vs {right:?}")]
    FieldMismatch { left: Field, right: Field },
    #[error("value {value} has a non-zero imaginary part but the field is real")]
    NotReal { value: C64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },
}

/// Scalar field of a Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn admits(self, z: C64) -> bool {
        self == Field::Complex || z.im == 0.0
    }

    pub fn check(self, other: Field) -> Result<(), LinalgError> {
        if self == other {
            Ok(())
        } else {
            Err(LinalgError::FieldMismatch { left: self, right: other })
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// A field-tagged scalar.
///
/// Serializes as a bare number in the real field and as `[re, im]` in the
/// complex field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scalar {
    field: Field,
    value: C64,
}

impl Scalar {
    pub fn real(x: f64) -> Self {
        Scalar { field: Field::Real, value: C64::new(x, 0.0) }
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Scalar { field: Field::Complex, value: C64::new(re, im) }
    }

    pub fn new(field: Field, value: C64) -> Result<Self, LinalgError> {
        if !field.admits(value) {
            return Err(LinalgError::NotReal { value });
        }
        Ok(Scalar { field, value })
    }

    /// Builds a scalar in `field`, discarding the imaginary part when the
    /// field is real.
    pub(crate) fn coerce(field: Field, value: C64) -> Self {
        match field {
            Field::Real => Scalar::real(value.re),
            Field::Complex => Scalar { field, value },
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }

    pub fn abs(&self) -> f64 {
        self.value.norm()
    }

    pub fn conj(&self) -> Self {
        Scalar { field: self.field, value: self.value.conj() }
    }

    pub fn to_complex(&self) -> Self {
        Scalar { field: Field::Complex, value: self.value }
    }

    pub fn is_zero(&self) -> bool {
        self.value == ZERO
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field {
            Field::Real => write!(f, "{}", self.value.re),
            Field::Complex => write!(f, "{}{:+}i", self.value.re, self.value.im),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.field {
            Field::Real => serializer.serialize_f64(self.value.re),
            Field::Complex => [self.value.re, self.value.im].serialize(serializer),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Real(f64),
    Complex([f64; 2]),
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match ScalarRepr::deserialize(deserializer)? {
            ScalarRepr::Real(x) => Ok(Scalar::real(x)),
            ScalarRepr::Complex([re, im]) => Ok(Scalar::complex(re, im)),
        }
    }
}

/// Finitely supported element of l2 over the canonical basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    field: Field,
    entries: Vec<C64>,
}

impl DenseVector {
    pub fn new(field: Field, entries: Vec<C64>) -> Result<Self, LinalgError> {
        if let Some(bad) = entries.iter().find(|z| !field.admits(**z)) {
            return Err(LinalgError::NotReal { value: *bad });
        }
        Ok(DenseVector { field, entries })
    }

    /// Builds a vector, zeroing imaginary parts when the field is real.
    pub(crate) fn coerce(field: Field, mut entries: Vec<C64>) -> Self {
        if field == Field::Real {
            for z in &mut entries {
                z.im = 0.0;
            }
        }
        DenseVector { field, entries }
    }

    pub fn real(entries: &[f64]) -> Self {
        DenseVector {
            field: Field::Real,
            entries: entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn complex(entries: Vec<C64>) -> Self {
        DenseVector { field: Field::Complex, entries }
    }

    pub fn zeros(field: Field, len: usize) -> Self {
        DenseVector { field, entries: vec![ZERO; len] }
    }

    /// Canonical basis vector `e_index`, stored with length `index + 1`.
    pub fn basis(field: Field, index: usize) -> Self {
        let mut entries = vec![ZERO; index + 1];
        entries[index] = ONE;
        DenseVector { field, entries }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    /// Coefficient `i`, zero beyond the stored length.
    pub fn get(&self, i: usize) -> C64 {
        self.entries.get(i).copied().unwrap_or(ZERO)
    }

    /// Index one past the last non-zero coefficient.
    pub fn support(&self) -> usize {
        self.entries.iter().rposition(|z| *z != ZERO).map_or(0, |i| i + 1)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    /// Copy truncated or zero-padded to exactly `len` coefficients.
    pub fn resized(&self, len: usize) -> Self {
        let mut entries = self.entries.clone();
        entries.resize(len, ZERO);
        DenseVector { field: self.field, entries }
    }

    pub fn to_complex(&self) -> Self {
        DenseVector { field: Field::Complex, entries: self.entries.clone() }
    }

    /// Relabels the field of an empty vector; JSON cannot tell `[]` apart.
    pub(crate) fn adopt_field_if_empty(&mut self, field: Field) {
        if self.entries.is_empty() {
            self.field = field;
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        DenseVector::coerce(self.field, self.entries.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &DenseVector) -> Result<Self, LinalgError> {
        self.field.check(other.field)?;
        Ok(DenseVector { field: self.field, entries: add_padded(&self.entries, &other.entries, ONE) })
    }

    pub fn sub(&self, other: &DenseVector) -> Result<Self, LinalgError> {
        self.field.check(other.field)?;
        Ok(DenseVector { field: self.field, entries: add_padded(&self.entries, &other.entries, -ONE) })
    }
}

impl Serialize for DenseVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for z in &self.entries {
            match self.field {
                Field::Real => seq.serialize_element(&z.re)?,
                Field::Complex => seq.serialize_element(&[z.re, z.im])?,
            }
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorRepr {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl<'de> Deserialize<'de> for DenseVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match VectorRepr::deserialize(deserializer) {
            Ok(VectorRepr::Real(xs)) => Ok(DenseVector::real(&xs)),
            Ok(VectorRepr::Complex(ps)) => Ok(DenseVector::complex(
                ps.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
            )),
            Err(_) => Err(de::Error::custom(
                "expected an array of numbers (real) or of [re, im] pairs (complex)",
            )),
        }
    }
}

/// `a + s*b` with implicit zero padding.
pub(crate) fn add_padded(a: &[C64], b: &[C64], s: C64) -> Vec<C64> {
    let mut out = a.to_vec();
    if out.len() < b.len() {
        out.resize(b.len(), ZERO);
    }
    for (o, bi) in out.iter_mut().zip(b) {
        *o += s * bi;
    }
    out
}

/// `sum_i x_i * conj(y_i)` over the common prefix.
pub(crate) fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn norm_slice(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product, linear in the first argument and conjugate-linear in the
/// second.
pub fn inner_product(x: &DenseVector, y: &DenseVector) -> Result<Scalar, LinalgError> {
    x.field.check(y.field)?;
    Ok(Scalar::coerce(x.field, dot(&x.entries, &y.entries)))
}

pub fn norm(x: &DenseVector) -> f64 {
    dot(&x.entries, &x.entries).re.max(0.0).sqrt()
}

/// Orthonormal basis of the span of `vectors` by twice-iterated modified
/// Gram-Schmidt. Vectors whose residual falls below `1e-10 * max(1, |v|)`
/// are dropped.
pub fn orthonormalize(vectors: &[DenseVector]) -> Result<Vec<DenseVector>, LinalgError> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let field = first.field;
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        field.check(v.field)?;
        let scale = norm(v).max(1.0);
        let mut w = v.entries.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                let n = w.len().max(q.len());
                w.resize(n, ZERO);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let r = norm_slice(&w);
        if r > 1e-10 * scale {
            for wi in &mut w {
                *wi /= r;
            }
            basis.push(w);
        }
    }
    Ok(basis.into_iter().map(|b| DenseVector::coerce(field, b)).collect())
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        DenseMatrix { field, rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix::from_data(field, rows, cols, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        DenseMatrix::from_fn(Field::Real, r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub(crate) fn from_data(field: Field, rows: usize, cols: usize, mut data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        if field == Field::Real {
            for z in &mut data {
                z.im = 0.0;
            }
        }
        DenseMatrix { field, rows, cols, data }
    }

    /// Builds a matrix whose columns are `columns`, zero-padded to `rows`.
    pub(crate) fn from_columns(field: Field, rows: usize, columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let mut m = DenseMatrix::zeros(field, rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for (i, z) in col.iter().enumerate().take(rows) {
                m.data[i * cols + j] = *z;
            }
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = if self.field == Field::Real { C64::new(z.re, 0.0) } else { z };
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_complex(&self) -> Self {
        DenseMatrix { field: Field::Complex, ..self.clone() }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        DenseMatrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, actual: other.rows });
        }
        let field = if self.field == Field::Complex || other.field == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        };
        let mut out = DenseMatrix::zeros(field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self, LinalgError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::DimensionMismatch { expected: self.rows * self.cols, actual: other.rows * other.cols });
        }
        let field = if self.field == Field::Complex || other.field == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        };
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(DenseMatrix { field, rows: self.rows, cols: self.cols, data })
    }

    /// `A - mu * I`, where `I` is the leading identity block. A non-real
    /// shift promotes the result to the complex field.
    pub fn shifted(&self, mu: C64) -> Self {
        let field = if mu.im != 0.0 { Field::Complex } else { self.field };
        let mut out = DenseMatrix { field, ..self.clone() };
        for i in 0..self.rows.min(self.cols) {
            out.data[i * self.cols + i] -= mu;
        }
        out
    }

    /// Copy of the leading `rows x cols` block, zero-padded if needed.
    pub fn block(&self, rows: usize, cols: usize) -> Self {
        DenseMatrix::from_fn(self.field, rows, cols, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j)
            } else {
                ZERO
            }
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm_slice(&self.data)
    }

    /// Largest entrywise deviation from Hermitian symmetry; infinite for
    /// non-square matrices.
    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}
