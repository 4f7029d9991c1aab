use serde::Serialize;

use crate::linalg::{norm_slice, Scalar, C64, ONE, ZERO};
use crate::operators::{OperatorSpec, ParameterSet};

use super::{scalar_pair, DefinabilityError};

/// Number of basis probes used to read off `lambda`.
pub const PROBE_COUNT: usize = 4;

/// Probes start no earlier than this index, so decaying diagonal tails have
/// shrunk below the agreement tolerance.
pub const PROBE_FLOOR: usize = 1 << 16;

const AGREEMENT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub index: usize,
    #[serde(serialize_with = "scalar_pair")]
    pub lambda: Scalar,
    /// `|(I - P) T e_j - lambda_j e_j|`.
    pub consistency: f64,
}

/// Reads `lambda` from `T e_j = P T e_j + lambda e_j` at basis vectors `e_j`
/// orthogonal to the parameters. When the tree has a structural `s I + K`
/// split and the probes agree with `s` up to the tail of `K` at the probe
/// indices, `s` itself is returned.
pub fn lambda_extract(t: &OperatorSpec, a: &ParameterSet) -> Result<Scalar, DefinabilityError> {
    let records = probe(t, a);
    let scale = t.norm_bound().max(1.0);
    let mean = records.iter().map(|r| r.lambda.value()).sum::<C64>() / PROBE_COUNT as f64;
    let agree = records.iter().all(|r| {
        r.consistency <= AGREEMENT_TOL * scale && (r.lambda.value() - mean).norm() <= AGREEMENT_TOL * mean.norm().max(1.0)
    });
    if !agree {
        return Err(DefinabilityError::ProbeDisagreement { probes: records });
    }
    if let Some(split) = t.scalar_compact_split() {
        let s = split.scalar.value();
        let first = records[0].index;
        if let Some(tail) = split.compact.tail_norm_bound(first) {
            if (mean - s).norm() <= tail + AGREEMENT_TOL * s.norm().max(1.0) {
                return Ok(split.scalar);
            }
        }
    }
    Ok(Scalar::coerce(t.field(), mean))
}

pub(crate) fn probe(t: &OperatorSpec, a: &ParameterSet) -> Vec<ProbeRecord> {
    let start = (a.support() + 4).max(PROBE_FLOOR);
    (start..start + PROBE_COUNT)
        .map(|j| {
            let mut x = vec![ZERO; j + 1];
            x[j] = ONE;
            let tx = t.apply_slice(&x);
            let lambda = tx.get(j).copied().unwrap_or(ZERO);
            let (_, mut perp) = a.project_slice(&tx);
            if perp.len() <= j {
                perp.resize(j + 1, ZERO);
            }
            perp[j] -= lambda;
            ProbeRecord { index: j, lambda: Scalar::coerce(t.field(), lambda), consistency: norm_slice(&perp) }
        })
        .collect()
}
