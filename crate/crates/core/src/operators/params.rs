use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{add_padded, dot, norm_slice, orthonormalize, DenseVector, Field, LinalgError, C64};

use super::{DiagonalTail, OperatorKind, OperatorSpec, SetClass};

/// Basis vectors contributed by infinite structure (reciprocal tails,
/// infinite projection targets) are listed only below this index.
pub const PARAMETER_CUTOFF: usize = 64;

/// A finite parameter set `A` together with an orthonormal basis of its span.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterSet {
    field: Field,
    vectors: Vec<DenseVector>,
    basis: Vec<DenseVector>,
}

impl ParameterSet {
    pub fn new(field: Field, vectors: Vec<DenseVector>) -> Result<Self, LinalgError> {
        for v in &vectors {
            field.check(v.field())?;
        }
        let basis = orthonormalize(&vectors)?;
        Ok(ParameterSet { field, vectors, basis })
    }

    pub fn empty(field: Field) -> Self {
        ParameterSet { field, vectors: Vec::new(), basis: Vec::new() }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn vectors(&self) -> &[DenseVector] {
        &self.vectors
    }

    pub fn basis(&self) -> &[DenseVector] {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// One past the last coordinate any basis vector touches.
    pub fn support(&self) -> usize {
        self.basis.iter().map(DenseVector::support).max().unwrap_or(0)
    }

    /// `(Px, x - Px)` for the orthogonal projection `P` onto the span.
    pub fn project(&self, x: &DenseVector) -> Result<(DenseVector, DenseVector), LinalgError> {
        if !self.basis.is_empty() && !x.is_empty() {
            self.field.check(x.field())?;
        }
        let (px, r) = self.project_slice(x.entries());
        Ok((DenseVector::coerce(x.field(), px), DenseVector::coerce(x.field(), r)))
    }

    pub(crate) fn project_slice(&self, x: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let mut px = Vec::new();
        let mut r = x.to_vec();
        // Two passes keep the residual orthogonal to working precision.
        for _ in 0..2 {
            for b in &self.basis {
                let c = dot(&r, b.entries());
                px = add_padded(&px, b.entries(), c);
                r = add_padded(&r, b.entries(), -c);
            }
        }
        (px, r)
    }

    /// Distance from `x` to the span.
    pub fn distance(&self, x: &[C64]) -> f64 {
        norm_slice(&self.project_slice(x).1)
    }

    pub fn to_complex(&self) -> Self {
        ParameterSet {
            field: Field::Complex,
            vectors: self.vectors.iter().map(DenseVector::to_complex).collect(),
            basis: self.basis.iter().map(DenseVector::to_complex).collect(),
        }
    }
}

fn embed(v: &DenseVector, offset: usize) -> DenseVector {
    let mut out = vec![C64::new(0.0, 0.0); (2 * v.len() + offset).saturating_sub(1).max(offset + 1)];
    for (k, z) in v.entries().iter().enumerate() {
        out[2 * k + offset] = *z;
    }
    DenseVector::coerce(v.field(), out)
}

fn collect(kind: &OperatorKind, field: Field, out: &mut Vec<DenseVector>) {
    let basis = |k| DenseVector::basis(field, k);
    match kind {
        OperatorKind::Identity
        | OperatorKind::Zero
        | OperatorKind::ShiftLeft
        | OperatorKind::ShiftRight
        | OperatorKind::CoordinateSubsequence { .. } => {}
        OperatorKind::Diagonal { prefix, tail } => {
            let end = match tail {
                DiagonalTail::Reciprocal => prefix.len().max(PARAMETER_CUTOFF),
                _ => prefix.len(),
            };
            out.extend((0..end).map(basis));
        }
        OperatorKind::FiniteRank { pairs } => {
            for p in pairs {
                out.push(p.z.clone());
                out.push(p.e.clone());
            }
        }
        OperatorKind::Projection { target } => match target.class() {
            SetClass::Finite(s) | SetClass::Cofinite(s) => out.extend(s.into_iter().map(basis)),
            SetClass::InfiniteCoinfinite => {
                out.extend((0..PARAMETER_CUTOFF).filter(|&k| target.contains(k)).map(basis))
            }
        },
        OperatorKind::Scale { inner, .. } | OperatorKind::Adjoint { inner } => collect(inner, field, out),
        OperatorKind::Sum { left, right } => {
            collect(left, field, out);
            collect(right, field, out);
        }
        OperatorKind::Compose { outer, inner } => {
            collect(outer, field, out);
            collect(inner, field, out);
        }
        OperatorKind::DirectSum { left, right } => {
            let mut l = Vec::new();
            collect(left, field, &mut l);
            out.extend(l.iter().map(|v| embed(v, 0)));
            let mut r = Vec::new();
            collect(right, field, &mut r);
            out.extend(r.iter().map(|v| embed(v, 1)));
        }
    }
}

/// Outcome of randomized additivity and homogeneity probes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearityReport {
    pub trials: usize,
    pub max_additivity_residual: f64,
    pub max_homogeneity_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

const PROBE_DIM: usize = 32;

fn random_vector(rng: &mut ChaCha8Rng, field: Field, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| match field {
            Field::Real => C64::new(rng.gen_range(-1.0..1.0), 0.0),
            Field::Complex => C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        })
        .collect()
}

impl OperatorSpec {
    /// The canonical parameter vectors the tree is definable over, in a
    /// deterministic depth-first order.
    pub fn extract_parameters(&self) -> ParameterSet {
        let mut vectors = Vec::new();
        collect(&self.kind, self.field, &mut vectors);
        ParameterSet::new(self.field, vectors).expect("validated specs share one field")
    }

    /// Randomized check that `T(x + y) = Tx + Ty` and `T(ax) = a Tx`.
    pub fn linearity_check(&self, trials: usize, seed: u64) -> LinearityReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let norm = self.norm_bound().max(1.0);
        let mut add_res: f64 = 0.0;
        let mut hom_res: f64 = 0.0;
        let mut worst_ratio: f64 = 0.0;
        for _ in 0..trials {
            let x = random_vector(&mut rng, self.field, PROBE_DIM);
            let y = random_vector(&mut rng, self.field, PROBE_DIM);
            let a = random_vector(&mut rng, self.field, 1)[0] * 4.0;
            let scale = norm * (norm_slice(&x) + norm_slice(&y)).max(1.0) * a.norm().max(1.0);

            let sum = add_padded(&x, &y, C64::new(1.0, 0.0));
            let lhs = self.apply_slice(&sum);
            let rhs = add_padded(&self.apply_slice(&x), &self.apply_slice(&y), C64::new(1.0, 0.0));
            let r1 = norm_slice(&add_padded(&lhs, &rhs, C64::new(-1.0, 0.0)));

            let ax: Vec<C64> = x.iter().map(|v| v * a).collect();
            let lhs = self.apply_slice(&ax);
            let rhs: Vec<C64> = self.apply_slice(&x).into_iter().map(|v| v * a).collect();
            let r2 = norm_slice(&add_padded(&lhs, &rhs, C64::new(-1.0, 0.0)));

            add_res = add_res.max(r1);
            hom_res = hom_res.max(r2);
            worst_ratio = worst_ratio.max(r1.max(r2) / scale);
        }
        let tolerance = 1e-9;
        LinearityReport {
            trials,
            max_additivity_residual: add_res,
            max_homogeneity_residual: hom_res,
            tolerance,
            passed: worst_ratio < tolerance,
        }
    }
}
