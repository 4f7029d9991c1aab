use serde::Serialize;

use crate::linalg::{Scalar, C64};
use crate::operators::OperatorSpec;

use super::lambda::probe;
use super::{
    certify_compact, find_weyl_witness, fredholm_index, lambda_extract, scalar_pair, scalar_pairs,
    CertificationFailure, CompactnessCertificate, DefinabilityError, IndexWitness, Options, ProbeRecord,
    WeylWitness,
};

/// Diagonal clusters tried as Weyl candidates, at most.
const DIAGONAL_CANDIDATES: usize = 8;

/// Largest section whose diagonal is sampled for candidates.
const DIAGONAL_SAMPLE: usize = 128;

/// Radius of the interior ring sampled for shift-like trees.
const RING_RADIUS: f64 = 0.55;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Refutation {
    Weyl(WeylWitness),
    Index(IndexWitness),
}

/// Evidence gathered by a run that reached no verdict.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "optional_pair")]
    pub lambda: Option<Scalar>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<ProbeRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certification: Option<CertificationFailure>,
    #[serde(serialize_with = "scalar_pairs")]
    pub candidates: Vec<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<String>,
}

fn optional_pair<S: serde::Serializer>(s: &Option<Scalar>, serializer: S) -> Result<S::Ok, S::Error> {
    match s {
        Some(v) => scalar_pair(v, serializer),
        None => serializer.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DefinabilityVerdict {
    Definable {
        #[serde(serialize_with = "scalar_pair")]
        lambda: Scalar,
        certificate: CompactnessCertificate,
    },
    NotDefinable {
        witness: Refutation,
    },
    Inconclusive {
        reason: String,
        diagnostics: Diagnostics,
    },
}

impl DefinabilityVerdict {
    pub fn kind(&self) -> &'static str {
        match self {
            DefinabilityVerdict::Definable { .. } => "definable",
            DefinabilityVerdict::NotDefinable { .. } => "not_definable",
            DefinabilityVerdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn lambda(&self) -> Option<Scalar> {
        match self {
            DefinabilityVerdict::Definable { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    pub fn is_definable(&self) -> bool {
        matches!(self, DefinabilityVerdict::Definable { .. })
    }

    pub fn weyl_witness(&self) -> Option<&WeylWitness> {
        match self {
            DefinabilityVerdict::NotDefinable { witness: Refutation::Weyl(w) } => Some(w),
            _ => None,
        }
    }
}

fn push_separated(out: &mut Vec<Scalar>, z: C64, sep: f64) -> bool {
    if out.iter().all(|c| (c.value() - z).norm() > sep) {
        out.push(Scalar::complex(z.re, z.im));
        true
    } else {
        false
    }
}

/// Candidate essential-spectrum points in priority order: clustered diagonal
/// entries of a finite section, the probe values, `{0, 1}` for trees with
/// projections, and for shift-like trees the unit circle points `±1, ±i`,
/// a ring of radius 0.55, and `0`.
pub fn candidate_points(t: &OperatorSpec, options: &Options) -> Vec<Scalar> {
    let sep = 10.0 * options.weyl_tol;
    let mut out = Vec::new();
    let section = t.truncate(options.n_max.min(DIAGONAL_SAMPLE));
    let mut clusters = 0;
    for i in 0..section.rows() {
        if clusters == DIAGONAL_CANDIDATES {
            break;
        }
        if push_separated(&mut out, section.get(i, i), sep) {
            clusters += 1;
        }
    }
    for p in probe(t, &t.extract_parameters()) {
        push_separated(&mut out, p.lambda.value(), sep);
    }
    if t.contains_projection() {
        for z in [0.0, 1.0] {
            push_separated(&mut out, C64::new(z, 0.0), sep);
        }
    }
    if t.contains_shift() {
        let circle = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
        for z in circle {
            push_separated(&mut out, z, sep);
        }
        for k in 0..8 {
            push_separated(&mut out, C64::from_polar(RING_RADIUS, std::f64::consts::FRAC_PI_4 * k as f64), sep);
        }
        push_separated(&mut out, C64::new(0.0, 0.0), sep);
    }
    out
}

/// Semi-decision procedure for `T = lambda I + K` with `K` compact.
///
/// Reads `lambda` from basis probes and certifies `T - lambda I`; failing
/// that, looks for a Weyl witness at two candidate points of the essential
/// spectrum, and then for a nonzero Fredholm index. Anything else is
/// inconclusive. Only invalid options are errors.
pub fn classify(t: &OperatorSpec, options: &Options) -> Result<DefinabilityVerdict, DefinabilityError> {
    options.validate()?;
    let mut diagnostics = Diagnostics::default();
    let params = t.extract_parameters();
    match lambda_extract(t, &params) {
        Ok(lambda) => {
            diagnostics.lambda = Some(lambda);
            match t.minus_scalar(lambda.value()).map_err(DefinabilityError::from).and_then(|k| {
                certify_compact(&k, options.cert_tol, options.n_max)
            }) {
                Ok(Ok(mut certificate)) => {
                    certificate.lambda = lambda;
                    return Ok(DefinabilityVerdict::Definable { lambda, certificate });
                }
                Ok(Err(failure)) => diagnostics.certification = Some(failure),
                Err(e) => diagnostics.index = Some(e.to_string()),
            }
        }
        Err(DefinabilityError::ProbeDisagreement { probes }) => diagnostics.probes = probes,
        Err(e) => return Err(e),
    }

    diagnostics.candidates = candidate_points(t, options);
    match find_weyl_witness(t, &diagnostics.candidates, options.weyl_tol, options.n_max, options.rank_budget) {
        Ok(Some(w)) => return Ok(DefinabilityVerdict::NotDefinable { witness: Refutation::Weyl(w) }),
        Ok(None) => {}
        Err(DefinabilityError::BadOption(m)) => return Err(DefinabilityError::BadOption(m)),
        Err(e) => diagnostics.index = Some(e.to_string()),
    }

    match fredholm_index(t, options.rank_threshold, options.working_size()) {
        Ok(w) if w.index != 0 => return Ok(DefinabilityVerdict::NotDefinable { witness: Refutation::Index(w) }),
        Ok(w) => diagnostics.index = Some(format!("Fredholm index 0 (kernel {}, cokernel {})", w.kernel_dim, w.cokernel_dim)),
        Err(e) => diagnostics.index = Some(e.to_string()),
    }

    let reason = match (&diagnostics.certification, diagnostics.probes.is_empty()) {
        (Some(f), _) => format!("compactness not certified ({}) and no refutation found", f.reason),
        (None, false) => "lambda probes disagree but no refutation found".to_string(),
        (None, true) => "no certificate and no refutation found".to_string(),
    };
    Ok(DefinabilityVerdict::Inconclusive { reason, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definability::CertificateRoute;
    use crate::linalg::{DenseVector, Field};
    use crate::operators::{DiagonalTail, IndexRule, OperatorKind};

    #[test]
    fn two_plus_reciprocal_is_definable() {
        let t = OperatorSpec::new(
            Field::Real,
            OperatorKind::sum(
                OperatorKind::scale(Scalar::real(2.0), OperatorKind::Identity),
                OperatorKind::diagonal(DenseVector::real(&[]), DiagonalTail::Reciprocal),
            ),
        )
        .unwrap();
        match classify(&t, &Options::default()).unwrap() {
            DefinabilityVerdict::Definable { lambda, certificate } => {
                assert_eq!(lambda, Scalar::real(2.0));
                assert_eq!(certificate.route, CertificateRoute::Structural);
                assert_eq!(certificate.final_size(), 100);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complex_left_shift_is_refuted_on_the_circle() {
        let t = OperatorSpec::shift_left(Field::Complex);
        let v = classify(&t, &Options::default()).unwrap();
        let w = v.weyl_witness().expect("weyl witness");
        assert_eq!(w.points.len(), 2);
        for p in &w.points {
            assert!((p.mu.abs() - 1.0).abs() < 1e-12);
        }
        assert!(w.revalidate(&t) < 0.05);
    }

    #[test]
    fn even_subsequence_is_refuted() {
        let t = OperatorSpec::new(Field::Real, OperatorKind::coordinate_subsequence(IndexRule::arithmetic(0, 2))).unwrap();
        let v = classify(&t, &Options::default()).unwrap();
        assert_eq!(v.kind(), "not_definable");
    }

    #[test]
    fn tight_tolerance_falls_back_to_the_index() {
        let t = OperatorSpec::shift_right(Field::Real);
        let options = Options { weyl_tol: 1e-3, n_max: 64, ..Options::default() };
        match classify(&t, &options).unwrap() {
            DefinabilityVerdict::NotDefinable { witness: Refutation::Index(w) } => assert_eq!(w.index, -1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verdict_json_carries_tags() {
        let v = classify(&OperatorSpec::identity(Field::Real), &Options::default()).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["verdict"], "definable");
        assert_eq!(json["lambda"], serde_json::json!([1.0, 0.0]));
        assert_eq!(json["certificate"]["ladder"][0], serde_json::json!([1, 0.0]));
    }
}
