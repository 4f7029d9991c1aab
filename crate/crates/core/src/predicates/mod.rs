//! Distance predicates `P(x, y) = |f(x) - y|` for operators on balls
//! `B_n = {x : |x| <= n}`, with closed forms for finite-rank operators,
//! truncation-based approximations for compact ones, and the transformer
//! algebra for scaling, sums and composition.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{add_padded, dot, norm_slice, DenseVector, Field, LinalgError, Scalar, C64, ONE};
use crate::operators::{OperatorError, OperatorKind, OperatorSpec, ParameterSet, RankOnePair};

const SORT_SLACK: f64 = 1e-12;

/// Largest truncation `compact_predicate` will build a surrogate from.
pub const SURROGATE_CAP: usize = 1024;

#[derive(Debug, Error)]
pub enum PredicateError {
    #[error("sort index must be at least 1")]
    ZeroSort,
    #[error("{which} has norm {norm} outside the sort bound {bound}")]
    SortViolation { which: &'static str, norm: f64, bound: u32 },
    #[error("operator has no structural tail bound")]
    NoTailBound,
    #[error("tolerance {epsilon} needs a truncation above {cap}")]
    TruncationTooLarge { epsilon: f64, cap: usize },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("scale factor must be non-zero")]
    ZeroScale,
    #[error("operator must be finite rank at the root")]
    NotFiniteRank,
    #[error("expected a {expected} operator")]
    WrongField { expected: Field },
    #[error("image of B_{sort} needs sort {needed}, but the outer predicate accepts only B_{outer}")]
    SortOverflow { sort: u32, needed: u32, outer: u32 },
    #[error("normality probe failed: commutator defect {defect}")]
    NotNormal { defect: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Index `n >= 1` of the ball sort `B_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SortIndex(u32);

impl SortIndex {
    pub fn new(n: u32) -> Result<Self, PredicateError> {
        if n == 0 {
            return Err(PredicateError::ZeroSort);
        }
        Ok(SortIndex(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Smallest sort containing a vector of norm `r`.
    pub fn covering(r: f64) -> Self {
        SortIndex(ceil_sort(r))
    }

    pub fn contains(self, x: &[C64]) -> bool {
        norm_slice(x) <= f64::from(self.0) * (1.0 + SORT_SLACK)
    }
}

impl fmt::Display for SortIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B_{}", self.0)
    }
}

fn ceil_sort(r: f64) -> u32 {
    let m = (r - SORT_SLACK * r.max(1.0)).ceil();
    m.clamp(1.0, f64::from(u32::MAX)) as u32
}

/// Least `m >= 1` with `n * norm_bound(T) <= m`, up to a relative slack of
/// `1e-12` absorbing rounding in the norm bound.
pub fn m_of(t: &OperatorSpec, n: SortIndex) -> u32 {
    ceil_sort(f64::from(n.get()) * t.norm_bound())
}

type Evaluator = dyn Fn(&[C64], &[C64]) -> f64 + Send + Sync;

/// Evaluator for `|f(x) - y|` on `B_n x B_m` with a uniform error bound.
#[derive(Clone)]
pub struct DistancePredicate {
    field: Field,
    source: SortIndex,
    target: SortIndex,
    image_bound: f64,
    error_bound: f64,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for DistancePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistancePredicate")
            .field("field", &self.field)
            .field("source", &self.source)
            .field("target", &self.target)
            .field("image_bound", &self.image_bound)
            .field("error_bound", &self.error_bound)
            .finish_non_exhaustive()
    }
}

impl DistancePredicate {
    fn build(
        field: Field,
        source: SortIndex,
        image_bound: f64,
        error_bound: f64,
        evaluator: impl Fn(&[C64], &[C64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DistancePredicate {
            field,
            source,
            target: SortIndex::covering(image_bound),
            image_bound,
            error_bound,
            evaluator: Arc::new(evaluator),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn source(&self) -> SortIndex {
        self.source
    }

    pub fn target(&self) -> SortIndex {
        self.target
    }

    /// Bound on `|f(x)|` over the source sort.
    pub fn image_bound(&self) -> f64 {
        self.image_bound
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    /// Upper bound on every value over the declared sorts.
    pub fn range_bound(&self) -> f64 {
        self.image_bound + f64::from(self.target.get())
    }

    /// Same evaluator on a larger target sort.
    pub fn with_target(mut self, m: SortIndex) -> Self {
        self.target = m;
        self
    }

    /// Value rescaled into `[0, 1]` by the range bound.
    pub fn normalize(&self, value: f64) -> f64 {
        let r = self.range_bound();
        if r == 0.0 {
            0.0
        } else {
            (value / r).min(1.0)
        }
    }

    /// Evaluates after checking fields and sorts.
    pub fn eval(&self, x: &DenseVector, y: &DenseVector) -> Result<f64, PredicateError> {
        for v in [x, y] {
            if !v.is_empty() {
                self.field.check(v.field())?;
            }
        }
        if !self.source.contains(x.entries()) {
            return Err(PredicateError::SortViolation { which: "x", norm: x.norm(), bound: self.source.get() });
        }
        if !self.target.contains(y.entries()) {
            return Err(PredicateError::SortViolation { which: "y", norm: y.norm(), bound: self.target.get() });
        }
        Ok(self.eval_unchecked(x.entries(), y.entries()))
    }

    /// Evaluates without sort or field checks.
    pub fn eval_unchecked(&self, x: &[C64], y: &[C64]) -> f64 {
        (self.evaluator)(x, y)
    }
}

/// The two real predicates `Re <x, y>` and `Im <x, y>` of the complex
/// signature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexInnerParts {
    pub re: f64,
    pub im: f64,
}

pub fn complex_inner_parts(x: &DenseVector, y: &DenseVector) -> Result<ComplexInnerParts, PredicateError> {
    x.field().check(y.field())?;
    let ip = dot(x.entries(), y.entries());
    Ok(ComplexInnerParts { re: ip.re, im: ip.im })
}

fn finite_rank_pairs(t: &OperatorSpec) -> Result<&[RankOnePair], PredicateError> {
    match t.kind() {
        OperatorKind::FiniteRank { pairs } => Ok(pairs),
        _ => Err(PredicateError::NotFiniteRank),
    }
}

fn real_formula(pairs: &[RankOnePair], x: &[C64], y: &[C64]) -> f64 {
    let mut s = 0.0;
    for p in pairs {
        let a = dot(x, p.z.entries()).re;
        let b = dot(p.e.entries(), y).re;
        s += a * a - 2.0 * a * b;
    }
    let yy = dot(y, y).re;
    (s + yy).max(0.0).sqrt()
}

fn complex_formula(pairs: &[RankOnePair], x: &[C64], y: &[C64]) -> f64 {
    let mut s = 0.0;
    for p in pairs {
        let a = dot(x, p.z.entries());
        let b = dot(p.e.entries(), y);
        s += a.re * a.re + a.im * a.im - 2.0 * (a.re * b.re - a.im * b.im);
    }
    let yy = dot(y, y).re;
    (s + yy).max(0.0).sqrt()
}

/// Closed-form `|Tx - y|` for a real finite-rank `T`, without forming `Tx`.
pub fn finite_rank_distance_real(t: &OperatorSpec, x: &DenseVector, y: &DenseVector) -> Result<f64, PredicateError> {
    if t.field() != Field::Real {
        return Err(PredicateError::WrongField { expected: Field::Real });
    }
    let pairs = finite_rank_pairs(t)?;
    Ok(real_formula(pairs, x.entries(), y.entries()))
}

/// Closed-form `|Tx - y|` for a complex finite-rank `T` through the real and
/// imaginary parts of the inner products.
pub fn finite_rank_distance_complex(
    t: &OperatorSpec,
    x: &DenseVector,
    y: &DenseVector,
) -> Result<f64, PredicateError> {
    if t.field() != Field::Complex {
        return Err(PredicateError::WrongField { expected: Field::Complex });
    }
    let pairs = finite_rank_pairs(t)?;
    Ok(complex_formula(pairs, x.entries(), y.entries()))
}

/// Exact predicate for a finite-rank operator.
pub fn finite_rank_predicate(t: &OperatorSpec, n: SortIndex) -> Result<DistancePredicate, PredicateError> {
    let pairs = finite_rank_pairs(t)?.to_vec();
    let image = f64::from(n.get()) * t.norm_bound();
    Ok(match t.field() {
        Field::Real => DistancePredicate::build(Field::Real, n, image, 0.0, move |x, y| real_formula(&pairs, x, y)),
        Field::Complex => {
            DistancePredicate::build(Field::Complex, n, image, 0.0, move |x, y| complex_formula(&pairs, x, y))
        }
    })
}

/// Exact predicate `|s x - y|` for a scalar multiple of the identity.
pub fn scalar_predicate(s: Scalar, n: SortIndex) -> DistancePredicate {
    let c = s.value();
    DistancePredicate::build(s.field(), n, f64::from(n.get()) * s.abs(), 0.0, move |x, y| {
        norm_slice(&add_padded(&x.iter().map(|v| v * c).collect::<Vec<_>>(), y, -ONE))
    })
}

/// Predicate of the zero map, `|y|`.
pub fn zero_predicate(field: Field, n: SortIndex) -> DistancePredicate {
    DistancePredicate::build(field, n, 0.0, 0.0, |_, y| norm_slice(y))
}

/// Smallest `N` with `n * tail(N) < epsilon`, searched over a doubling
/// ladder and refined by bisection.
fn truncation_for(t: &OperatorSpec, n: f64, epsilon: f64) -> Result<(usize, f64), PredicateError> {
    let ok = |k: usize| t.tail_norm_bound(k).map(|tail| (n * tail < epsilon, tail));
    let first = ok(1).ok_or(PredicateError::NoTailBound)?;
    if first.0 {
        return Ok((1, first.1));
    }
    let mut lo = 1;
    let mut hi = 2;
    loop {
        if hi > SURROGATE_CAP {
            return Err(PredicateError::TruncationTooLarge { epsilon, cap: SURROGATE_CAP });
        }
        if ok(hi).ok_or(PredicateError::NoTailBound)?.0 {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid).ok_or(PredicateError::NoTailBound)?.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tail = t.tail_norm_bound(hi).ok_or(PredicateError::NoTailBound)?;
    Ok((hi, tail))
}

/// Approximate predicate for an operator with a structural tail bound: the
/// exact finite-rank predicate of `P_N T P_N`, where `N` is the smallest
/// truncation with `n * tail(N) < epsilon`. The error bound is
/// `n * tail(N)`.
pub fn compact_predicate(t: &OperatorSpec, n: SortIndex, epsilon: f64) -> Result<DistancePredicate, PredicateError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(PredicateError::BadTolerance(epsilon));
    }
    if matches!(t.kind(), OperatorKind::FiniteRank { .. }) {
        return finite_rank_predicate(t, n);
    }
    let nf = f64::from(n.get());
    let (size, tail) = truncation_for(t, nf, epsilon)?;
    let surrogate = t.finite_rank_surrogate(size)?;
    let mut p = finite_rank_predicate(&surrogate, n)?;
    p.error_bound = nf * tail;
    p.image_bound = nf * t.norm_bound();
    p.target = SortIndex::covering(p.image_bound);
    Ok(p)
}

/// Truncation size `compact_predicate` would use.
pub fn compact_truncation(t: &OperatorSpec, n: SortIndex, epsilon: f64) -> Result<usize, PredicateError> {
    truncation_for(t, f64::from(n.get()), epsilon).map(|(k, _)| k)
}

/// Predicate for any operator with a structural `s I + K` split: the
/// compact predicate of `K` shifted by `s I`.
pub fn operator_predicate(t: &OperatorSpec, n: SortIndex, epsilon: f64) -> Result<DistancePredicate, PredicateError> {
    if matches!(t.kind(), OperatorKind::FiniteRank { .. }) {
        return finite_rank_predicate(t, n);
    }
    let split = t.scalar_compact_split().ok_or(PredicateError::NoTailBound)?;
    if matches!(split.compact.kind(), OperatorKind::Zero) {
        return Ok(scalar_predicate(split.scalar, n));
    }
    let k = compact_predicate(&split.compact, n, epsilon)?;
    if split.scalar.is_zero() {
        return Ok(k);
    }
    sum_predicate(&k, &OperatorSpec::identity(t.field()).scaled(split.scalar)?)
}

/// Predicate for `r f` from one for `f`: `|r| P(x, y / r)`.
pub fn scale_predicate(p: &DistancePredicate, r: Scalar) -> Result<DistancePredicate, PredicateError> {
    if r.is_zero() {
        return Err(PredicateError::ZeroScale);
    }
    p.field.check(r.field())?;
    let inner = p.evaluator.clone();
    let inv = ONE / r.value();
    let mag = r.abs();
    let mut out = DistancePredicate::build(p.field, p.source, mag * p.image_bound, mag * p.error_bound, move |x, y| {
        let ys: Vec<C64> = y.iter().map(|v| v * inv).collect();
        mag * inner(x, &ys)
    });
    out.target = SortIndex::covering(mag * f64::from(p.target.get()));
    Ok(out)
}

/// Predicate for `f1 + f2` from one for `f1`: `P1(x, y - f2(x))`.
pub fn sum_predicate(p1: &DistancePredicate, f2: &OperatorSpec) -> Result<DistancePredicate, PredicateError> {
    p1.field.check(f2.field())?;
    let inner = p1.evaluator.clone();
    let f2c = f2.clone();
    let image = p1.image_bound + f64::from(p1.source.get()) * f2.norm_bound();
    let mut out = DistancePredicate::build(p1.field, p1.source, image, p1.error_bound, move |x, y| {
        let shifted = add_padded(y, &f2c.apply_slice(x), -ONE);
        inner(x, &shifted)
    });
    out.target = out.target.max(p1.target);
    Ok(out)
}

/// Predicate for `f2 o f1` from one for `f2`: `P_outer(f1(x), y)` on the
/// sort `B_n`, provided `f1(B_n)` fits in the outer source sort.
pub fn compose_predicate(
    outer: &DistancePredicate,
    f1: &OperatorSpec,
    n: SortIndex,
) -> Result<DistancePredicate, PredicateError> {
    outer.field.check(f1.field())?;
    let needed = m_of(f1, n);
    if needed > outer.source.get() {
        return Err(PredicateError::SortOverflow { sort: n.get(), needed, outer: outer.source.get() });
    }
    let inner = outer.evaluator.clone();
    let f1c = f1.clone();
    let mut out = DistancePredicate::build(outer.field, n, outer.image_bound, outer.error_bound, move |x, y| {
        inner(&f1c.apply_slice(x), y)
    });
    out.target = outer.target;
    Ok(out)
}

const NORMALITY_PROBES: usize = 8;
const NORMALITY_TOL: f64 = 1e-9;

/// Largest relative commutator defect `|T*T x - T T* x| / (|T|^2 |x|)` over
/// seeded random probes.
pub fn normality_defect(t: &OperatorSpec, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = t.norm_bound().powi(2).max(1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..NORMALITY_PROBES {
        let x: Vec<C64> = (0..32)
            .map(|_| match t.field() {
                Field::Real => C64::new(rng.gen_range(-1.0..1.0), 0.0),
                Field::Complex => C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            })
            .collect();
        let a = t.apply_adjoint_slice(&t.apply_slice(&x));
        let b = t.apply_slice(&t.apply_adjoint_slice(&x));
        let d = norm_slice(&add_padded(&a, &b, -ONE)) / (scale * norm_slice(&x).max(f64::MIN_POSITIVE));
        worst = worst.max(d);
    }
    worst
}

/// `|T* x - y|` for a normal `T`, computed from `T` alone as
/// `sqrt(|Tx|^2 - 2 Re <Ty, x> + |y|^2)`.
pub fn normal_adjoint_predicate(t: &OperatorSpec, x: &DenseVector, y: &DenseVector) -> Result<f64, PredicateError> {
    let defect = normality_defect(t, 0x6e6f726d);
    if defect > NORMALITY_TOL {
        return Err(PredicateError::NotNormal { defect });
    }
    for v in [x, y] {
        if !v.is_empty() {
            t.field().check(v.field())?;
        }
    }
    let tx = t.apply_slice(x.entries());
    let ty = t.apply_slice(y.entries());
    let v = dot(&tx, &tx).re - 2.0 * dot(&ty, x.entries()).re + dot(y.entries(), y.entries()).re;
    Ok(v.max(0.0).sqrt())
}

/// Orthogonal projection onto the span of `a`: returns `(Px, x - Px)`.
pub fn orthogonal_project(a: &ParameterSet, x: &DenseVector) -> Result<(DenseVector, DenseVector), PredicateError> {
    Ok(a.project(x)?)
}
