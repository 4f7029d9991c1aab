//! Structured bounded operators on l2 over the real or complex field.
//!
//! An [`OperatorSpec`] is a symbolic tree. Every node maps finitely supported
//! vectors to finitely supported vectors, so application, adjoints and finite
//! sections are all computed exactly from the structure.

mod apply;
mod bounds;
mod params;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{dot, DenseVector, Field, LinalgError, Scalar, C64};

pub use bounds::ScalarCompactSplit;
pub use params::{LinearityReport, ParameterSet, PARAMETER_CUTOFF};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("malformed operator JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl SpecError {
    fn invalid(path: &str, message: impl Into<String>) -> Self {
        SpecError::Invalid { path: path.to_string(), message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("output support must be at least 1")]
    ZeroSupport,
    #[error("operator is already complex")]
    AlreadyComplex,
    #[error("a non-real shift needs a complex operator")]
    ComplexShiftOnRealOperator,
}

/// Diagonal entries beyond the explicit prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalTail {
    Zero,
    Constant(Scalar),
    /// Entry `k` is `1/(k+1)`.
    Reciprocal,
}

/// Strictly increasing index map `n -> i_n`: an explicit prefix followed by
/// the progression `start, start + step, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRule {
    #[serde(default)]
    pub prefix: Vec<usize>,
    pub start: usize,
    pub step: usize,
}

impl IndexRule {
    pub fn arithmetic(start: usize, step: usize) -> Self {
        IndexRule { prefix: Vec::new(), start, step }
    }

    pub fn index(&self, n: usize) -> usize {
        match self.prefix.get(n) {
            Some(&i) => i,
            None => self.start + self.step * (n - self.prefix.len()),
        }
    }

    /// Number of `n` with `i_n < len`.
    pub fn count_below(&self, len: usize) -> usize {
        let head = self.prefix.iter().take_while(|&&i| i < len).count();
        if head < self.prefix.len() || len <= self.start {
            return head;
        }
        head + (len - self.start).div_ceil(self.step)
    }

    /// The `n` with `i_n = j`, if any.
    pub fn preimage(&self, j: usize) -> Option<usize> {
        if let Ok(n) = self.prefix.binary_search(&j) {
            return Some(n);
        }
        if j >= self.start && (j - self.start) % self.step == 0 {
            return Some(self.prefix.len() + (j - self.start) / self.step);
        }
        None
    }

    pub fn is_identity(&self) -> bool {
        self.prefix.iter().enumerate().all(|(n, &i)| n == i) && self.start == self.prefix.len() && self.step == 1
    }

    fn validate(&self, path: &str) -> Result<(), SpecError> {
        if self.step == 0 {
            return Err(SpecError::invalid(path, "index rule step must be at least 1"));
        }
        if self.prefix.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpecError::invalid(path, "index rule prefix must be strictly increasing"));
        }
        if let Some(&last) = self.prefix.last() {
            if self.start <= last {
                return Err(SpecError::invalid(path, "index rule start must exceed the last prefix index"));
            }
        }
        Ok(())
    }
}

/// Coordinate set a projection maps onto.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionTarget {
    FiniteSet(Vec<usize>),
    ArithmeticSet { start: usize, step: usize },
    /// Complement of a finite or arithmetic set.
    ComplementOf(Box<ProjectionTarget>),
}

/// Size class of a coordinate set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetClass {
    Finite(Vec<usize>),
    /// Carries the finite complement.
    Cofinite(Vec<usize>),
    InfiniteCoinfinite,
}

impl ProjectionTarget {
    pub fn contains(&self, k: usize) -> bool {
        match self {
            ProjectionTarget::FiniteSet(s) => s.binary_search(&k).is_ok(),
            ProjectionTarget::ArithmeticSet { start, step } => k >= *start && (k - start) % step == 0,
            ProjectionTarget::ComplementOf(inner) => !inner.contains(k),
        }
    }

    pub fn class(&self) -> SetClass {
        match self {
            ProjectionTarget::FiniteSet(s) => SetClass::Finite(s.clone()),
            ProjectionTarget::ArithmeticSet { start, step: 1 } => SetClass::Cofinite((0..*start).collect()),
            ProjectionTarget::ArithmeticSet { .. } => SetClass::InfiniteCoinfinite,
            ProjectionTarget::ComplementOf(inner) => match inner.class() {
                SetClass::Finite(s) => SetClass::Cofinite(s),
                SetClass::Cofinite(s) => SetClass::Finite(s),
                SetClass::InfiniteCoinfinite => SetClass::InfiniteCoinfinite,
            },
        }
    }

    fn validate(&self, path: &str, nested: bool) -> Result<(), SpecError> {
        match self {
            ProjectionTarget::FiniteSet(s) => {
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(SpecError::invalid(path, "finite_set indices must be strictly increasing"));
                }
            }
            ProjectionTarget::ArithmeticSet { step, .. } => {
                if *step == 0 {
                    return Err(SpecError::invalid(path, "arithmetic_set step must be at least 1"));
                }
            }
            ProjectionTarget::ComplementOf(inner) => {
                if nested {
                    return Err(SpecError::invalid(path, "complement_of cannot be nested"));
                }
                inner.validate(&format!("{path}.complement_of"), true)?;
            }
        }
        Ok(())
    }
}

/// Rank-one term `x -> <x, z> e`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOnePair {
    pub z: DenseVector,
    pub e: DenseVector,
}

/// Grammar of structured operators. `DirectSum` realizes `l2 (+) l2` inside
/// l2 by interleaving: even coordinates belong to `left`, odd ones to
/// `right`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    Identity,
    Zero,
    Diagonal { prefix: DenseVector, tail: DiagonalTail },
    ShiftLeft,
    ShiftRight,
    /// `(Tx)_n = x_{i_n}`.
    CoordinateSubsequence { index_map: IndexRule },
    /// `Tx = sum_i <x, z_i> e_i` with orthonormal `e_i`.
    FiniteRank { pairs: Vec<RankOnePair> },
    Projection { target: ProjectionTarget },
    Scale { c: Scalar, inner: Box<OperatorKind> },
    Sum { left: Box<OperatorKind>, right: Box<OperatorKind> },
    Compose { outer: Box<OperatorKind>, inner: Box<OperatorKind> },
    Adjoint { inner: Box<OperatorKind> },
    DirectSum { left: Box<OperatorKind>, right: Box<OperatorKind> },
}

impl OperatorKind {
    pub fn scale(c: Scalar, inner: OperatorKind) -> Self {
        OperatorKind::Scale { c, inner: Box::new(inner) }
    }

    pub fn sum(left: OperatorKind, right: OperatorKind) -> Self {
        OperatorKind::Sum { left: Box::new(left), right: Box::new(right) }
    }

    pub fn compose(outer: OperatorKind, inner: OperatorKind) -> Self {
        OperatorKind::Compose { outer: Box::new(outer), inner: Box::new(inner) }
    }

    pub fn adjoint(inner: OperatorKind) -> Self {
        OperatorKind::Adjoint { inner: Box::new(inner) }
    }

    pub fn direct_sum(left: OperatorKind, right: OperatorKind) -> Self {
        OperatorKind::DirectSum { left: Box::new(left), right: Box::new(right) }
    }

    pub fn diagonal(prefix: DenseVector, tail: DiagonalTail) -> Self {
        OperatorKind::Diagonal { prefix, tail }
    }

    pub fn coordinate_subsequence(index_map: IndexRule) -> Self {
        OperatorKind::CoordinateSubsequence { index_map }
    }

    pub fn projection(target: ProjectionTarget) -> Self {
        OperatorKind::Projection { target }
    }

    /// Pre-order walk over the tree.
    pub fn visit(&self, f: &mut impl FnMut(&OperatorKind)) {
        f(self);
        match self {
            OperatorKind::Scale { inner, .. } | OperatorKind::Adjoint { inner } => inner.visit(f),
            OperatorKind::Sum { left, right } | OperatorKind::DirectSum { left, right } => {
                left.visit(f);
                right.visit(f);
            }
            OperatorKind::Compose { outer, inner } => {
                outer.visit(f);
                inner.visit(f);
            }
            _ => {}
        }
    }

    pub fn any(&self, pred: impl Fn(&OperatorKind) -> bool) -> bool {
        let mut found = false;
        self.visit(&mut |k| found |= pred(k));
        found
    }

    fn visit_mut(&mut self, f: &mut impl FnMut(&mut OperatorKind)) {
        f(self);
        match self {
            OperatorKind::Scale { inner, .. } | OperatorKind::Adjoint { inner } => inner.visit_mut(f),
            OperatorKind::Sum { left, right } | OperatorKind::DirectSum { left, right } => {
                left.visit_mut(f);
                right.visit_mut(f);
            }
            OperatorKind::Compose { outer, inner } => {
                outer.visit_mut(f);
                inner.visit_mut(f);
            }
            _ => {}
        }
    }
}

/// A validated operator tree together with its scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    field: Field,
    kind: OperatorKind,
}

#[derive(Serialize)]
struct SpecRef<'a> {
    field: Field,
    #[serde(flatten)]
    kind: &'a OperatorKind,
}

#[derive(Deserialize)]
struct SpecOwned {
    field: Field,
    #[serde(flatten)]
    kind: OperatorKind,
}

impl Serialize for OperatorSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SpecRef { field: self.field, kind: &self.kind }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OperatorSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = SpecOwned::deserialize(deserializer)?;
        OperatorSpec::new(raw.field, raw.kind).map_err(serde::de::Error::custom)
    }
}

impl OperatorSpec {
    /// Validates the tree: field consistency, orthonormal `e_i` in finite-rank
    /// nodes, strictly increasing index rules, well-formed projection targets.
    pub fn new(field: Field, mut kind: OperatorKind) -> Result<Self, SpecError> {
        kind.visit_mut(&mut |k| match k {
            OperatorKind::Diagonal { prefix, .. } => prefix.adopt_field_if_empty(field),
            OperatorKind::FiniteRank { pairs } => {
                for p in pairs {
                    p.z.adopt_field_if_empty(field);
                    p.e.adopt_field_if_empty(field);
                }
            }
            _ => {}
        });
        validate(&kind, field, "kind")?;
        Ok(OperatorSpec { field, kind })
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let raw: SpecOwned = serde_json::from_str(text)?;
        OperatorSpec::new(raw.field, raw.kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("operator specs always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("operator specs always serialize")
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn into_kind(self) -> OperatorKind {
        self.kind
    }

    pub fn identity(field: Field) -> Self {
        OperatorSpec { field, kind: OperatorKind::Identity }
    }

    pub fn zero(field: Field) -> Self {
        OperatorSpec { field, kind: OperatorKind::Zero }
    }

    pub fn shift_left(field: Field) -> Self {
        OperatorSpec { field, kind: OperatorKind::ShiftLeft }
    }

    pub fn shift_right(field: Field) -> Self {
        OperatorSpec { field, kind: OperatorKind::ShiftRight }
    }

    /// `T - mu I`. A non-real shift requires a complex operator.
    pub fn minus_scalar(&self, mu: C64) -> Result<Self, OperatorError> {
        if self.field == Field::Real && mu.im != 0.0 {
            return Err(OperatorError::ComplexShiftOnRealOperator);
        }
        if mu == C64::new(0.0, 0.0) {
            return Ok(self.clone());
        }
        let c = Scalar::coerce(self.field, -mu);
        Ok(OperatorSpec {
            field: self.field,
            kind: OperatorKind::sum(self.kind.clone(), OperatorKind::scale(c, OperatorKind::Identity)),
        })
    }

    /// `T - mu I`, complexifying first when `mu` is not real.
    pub fn shifted_by(&self, mu: C64) -> Self {
        let base = if self.field == Field::Real && mu.im != 0.0 {
            self.complexify().expect("real operator")
        } else {
            self.clone()
        };
        base.minus_scalar(mu).expect("field checked")
    }

    pub fn contains_shift(&self) -> bool {
        self.kind.any(|k| {
            matches!(k, OperatorKind::ShiftLeft | OperatorKind::ShiftRight | OperatorKind::CoordinateSubsequence { .. })
        })
    }

    pub fn contains_projection(&self) -> bool {
        self.kind.any(|k| matches!(k, OperatorKind::Projection { .. }))
    }

    /// Canonical extension of a real operator to the complex field: the same
    /// tree with every coefficient reinterpreted as complex.
    pub fn complexify(&self) -> Result<Self, OperatorError> {
        if self.field == Field::Complex {
            return Err(OperatorError::AlreadyComplex);
        }
        let mut kind = self.kind.clone();
        kind.visit_mut(&mut |k| match k {
            OperatorKind::Diagonal { prefix, tail } => {
                *prefix = prefix.to_complex();
                if let DiagonalTail::Constant(c) = tail {
                    *c = c.to_complex();
                }
            }
            OperatorKind::FiniteRank { pairs } => {
                for p in pairs {
                    p.z = p.z.to_complex();
                    p.e = p.e.to_complex();
                }
            }
            OperatorKind::Scale { c, .. } => *c = c.to_complex(),
            _ => {}
        });
        Ok(OperatorSpec { field: Field::Complex, kind })
    }

    /// Complex version of the operator, cloning when it already is complex.
    pub fn as_complex(&self) -> Self {
        match self.field {
            Field::Complex => self.clone(),
            Field::Real => self.complexify().expect("real operator"),
        }
    }
}

fn check_field(field: Field, found: Field, path: &str) -> Result<(), SpecError> {
    if field != found {
        return Err(SpecError::invalid(path, format!("field mismatch: expected {field}, found {found}")));
    }
    Ok(())
}

fn check_finite(v: &DenseVector, path: &str) -> Result<(), SpecError> {
    if v.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SpecError::invalid(path, "non-finite coefficient"));
    }
    Ok(())
}

fn validate(kind: &OperatorKind, field: Field, path: &str) -> Result<(), SpecError> {
    match kind {
        OperatorKind::Identity | OperatorKind::Zero | OperatorKind::ShiftLeft | OperatorKind::ShiftRight => Ok(()),
        OperatorKind::Diagonal { prefix, tail } => {
            check_field(field, prefix.field(), &format!("{path}.prefix"))?;
            check_finite(prefix, &format!("{path}.prefix"))?;
            if let DiagonalTail::Constant(c) = tail {
                check_field(field, c.field(), &format!("{path}.tail.constant"))?;
                if !c.re().is_finite() || !c.im().is_finite() {
                    return Err(SpecError::invalid(&format!("{path}.tail.constant"), "non-finite coefficient"));
                }
            }
            Ok(())
        }
        OperatorKind::CoordinateSubsequence { index_map } => index_map.validate(&format!("{path}.index_map")),
        OperatorKind::FiniteRank { pairs } => {
            for (i, p) in pairs.iter().enumerate() {
                check_field(field, p.z.field(), &format!("{path}.pairs[{i}].z"))?;
                check_field(field, p.e.field(), &format!("{path}.pairs[{i}].e"))?;
                check_finite(&p.z, &format!("{path}.pairs[{i}].z"))?;
                check_finite(&p.e, &format!("{path}.pairs[{i}].e"))?;
            }
            for (i, a) in pairs.iter().enumerate() {
                for (j, b) in pairs.iter().enumerate().skip(i) {
                    let ip = dot(a.e.entries(), b.e.entries());
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (ip - C64::new(want, 0.0)).norm() > 1e-10 {
                        return Err(SpecError::invalid(
                            &format!("{path}.pairs"),
                            format!("e vectors must be orthonormal: <e_{i}, e_{j}> = {ip}"),
                        ));
                    }
                }
            }
            Ok(())
        }
        OperatorKind::Projection { target } => target.validate(&format!("{path}.target"), false),
        OperatorKind::Scale { c, inner } => {
            check_field(field, c.field(), &format!("{path}.c"))?;
            if !c.re().is_finite() || !c.im().is_finite() {
                return Err(SpecError::invalid(&format!("{path}.c"), "non-finite coefficient"));
            }
            validate(inner, field, &format!("{path}.inner"))
        }
        OperatorKind::Sum { left, right } | OperatorKind::DirectSum { left, right } => {
            validate(left, field, &format!("{path}.left"))?;
            validate(right, field, &format!("{path}.right"))
        }
        OperatorKind::Compose { outer, inner } => {
            validate(outer, field, &format!("{path}.outer"))?;
            validate(inner, field, &format!("{path}.inner"))
        }
        OperatorKind::Adjoint { inner } => validate(inner, field, &format!("{path}.inner")),
    }
}
