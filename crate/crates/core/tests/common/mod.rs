#![allow(dead_code)]

use opdef_core::linalg::{orthonormalize, DenseVector, Field, Scalar, C64};
use opdef_core::operators::{DiagonalTail, IndexRule, OperatorKind, OperatorSpec, ProjectionTarget, RankOnePair};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_scalar(rng: &mut ChaCha8Rng, field: Field, radius: f64) -> C64 {
    match field {
        Field::Real => C64::new(rng.gen_range(-radius..radius), 0.0),
        Field::Complex => C64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)),
    }
}

pub fn random_entries(rng: &mut ChaCha8Rng, field: Field, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| match field {
            Field::Real => C64::new(rng.gen_range(-1.0..1.0), 0.0),
            Field::Complex => C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        })
        .collect()
}

pub fn random_vector(rng: &mut ChaCha8Rng, field: Field, len: usize) -> DenseVector {
    DenseVector::new(field, random_entries(rng, field, len)).unwrap()
}

/// Random vector with norm at most `radius`.
pub fn random_in_ball(rng: &mut ChaCha8Rng, field: Field, len: usize, radius: f64) -> DenseVector {
    let v = random_vector(rng, field, len);
    let target = radius * rng.gen::<f64>();
    let n = v.norm();
    if n == 0.0 {
        return v;
    }
    v.scaled(C64::new(target / n, 0.0))
}

pub fn random_finite_rank(rng: &mut ChaCha8Rng, field: Field, rank: usize, dim: usize) -> OperatorKind {
    let raw: Vec<DenseVector> = (0..rank).map(|_| random_vector(rng, field, dim)).collect();
    let es = orthonormalize(&raw).unwrap();
    let pairs = es
        .into_iter()
        .map(|e| {
            let len = rng.gen_range(1..=dim);
            RankOnePair { z: random_vector(rng, field, len), e }
        })
        .collect();
    OperatorKind::FiniteRank { pairs }
}

/// Diagonal with geometrically decaying prefix and zero tail.
pub fn random_decaying_diagonal(rng: &mut ChaCha8Rng, field: Field, len: usize) -> OperatorKind {
    let rate = rng.gen_range(0.3..0.7);
    let entries = (0..len)
        .map(|k| random_scalar(rng, field, 1.0) * f64::powi(rate, k as i32))
        .collect();
    OperatorKind::diagonal(DenseVector::new(field, entries).unwrap(), DiagonalTail::Zero)
}

pub fn random_target(rng: &mut ChaCha8Rng) -> ProjectionTarget {
    match rng.gen_range(0..4) {
        0 => {
            let mut s: Vec<usize> = (0..rng.gen_range(0..5)).map(|_| rng.gen_range(0..12)).collect();
            s.sort_unstable();
            s.dedup();
            ProjectionTarget::FiniteSet(s)
        }
        1 => ProjectionTarget::ArithmeticSet { start: rng.gen_range(0..5), step: rng.gen_range(1..4) },
        2 => ProjectionTarget::ComplementOf(Box::new(ProjectionTarget::ArithmeticSet {
            start: rng.gen_range(0..5),
            step: rng.gen_range(1..4),
        })),
        _ => ProjectionTarget::ComplementOf(Box::new(ProjectionTarget::FiniteSet(vec![rng.gen_range(0..6)]))),
    }
}

pub fn random_leaf(rng: &mut ChaCha8Rng, field: Field) -> OperatorKind {
    match rng.gen_range(0..9) {
        0 => OperatorKind::Identity,
        1 => OperatorKind::Zero,
        2 => {
            let tail = match rng.gen_range(0..3) {
                0 => DiagonalTail::Zero,
                1 => DiagonalTail::Constant(Scalar::new(field, random_scalar(rng, field, 2.0)).unwrap()),
                _ => DiagonalTail::Reciprocal,
            };
            let len = rng.gen_range(0..6);
            OperatorKind::diagonal(random_vector(rng, field, len), tail)
        }
        3 => OperatorKind::ShiftLeft,
        4 => OperatorKind::ShiftRight,
        5 => {
            let prefix = if rng.gen_bool(0.5) { vec![0, 2] } else { Vec::new() };
            let start = prefix.last().map_or(0, |l| l + 1) + rng.gen_range(0..3);
            OperatorKind::coordinate_subsequence(IndexRule { prefix, start, step: rng.gen_range(1..4) })
        }
        6 => {
            let rank = rng.gen_range(1..4);
            random_finite_rank(rng, field, rank, 8)
        }
        7 => OperatorKind::projection(random_target(rng)),
        _ => random_decaying_diagonal(rng, field, 10),
    }
}

pub fn random_kind(rng: &mut ChaCha8Rng, field: Field, depth: usize) -> OperatorKind {
    if depth == 0 || rng.gen_bool(0.35) {
        return random_leaf(rng, field);
    }
    match rng.gen_range(0..5) {
        0 => OperatorKind::scale(
            Scalar::new(field, random_scalar(rng, field, 2.0)).unwrap(),
            random_kind(rng, field, depth - 1),
        ),
        1 => OperatorKind::sum(random_kind(rng, field, depth - 1), random_kind(rng, field, depth - 1)),
        2 => OperatorKind::compose(random_kind(rng, field, depth - 1), random_kind(rng, field, depth - 1)),
        3 => OperatorKind::adjoint(random_kind(rng, field, depth - 1)),
        _ => OperatorKind::direct_sum(random_kind(rng, field, depth - 1), random_kind(rng, field, depth - 1)),
    }
}

pub fn random_spec(rng: &mut ChaCha8Rng, field: Field, depth: usize) -> OperatorSpec {
    OperatorSpec::new(field, random_kind(rng, field, depth)).unwrap()
}

/// Random compact tree: finite-rank pieces plus decaying diagonals.
pub fn random_compact(rng: &mut ChaCha8Rng, field: Field) -> OperatorKind {
    let rank = rng.gen_range(1..=3);
    let dim = rng.gen_range(3..=12);
    let fr = random_finite_rank(rng, field, rank, dim);
    let len = rng.gen_range(4..=24);
    let diag = random_decaying_diagonal(rng, field, len);
    OperatorKind::sum(fr, diag)
}

pub fn field_of(seed: u64) -> Field {
    if seed % 2 == 0 {
        Field::Real
    } else {
        Field::Complex
    }
}
