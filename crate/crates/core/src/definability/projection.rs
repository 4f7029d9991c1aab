use crate::linalg::{Scalar, C64};
use crate::operators::{OperatorKind, OperatorSpec, SetClass};

use super::classify::{Diagnostics, DefinabilityVerdict, Refutation};
use super::{certify_compact, find_weyl_witness, DefinabilityError, Options};

/// A coordinate projection is a scalar plus compact operator exactly when its
/// range has finite dimension (`lambda = 0`) or finite codimension
/// (`lambda = 1`). Other targets are refuted at `mu = 0` and `mu = 1`.
pub fn classify_projection(p: &OperatorSpec, options: &Options) -> Result<DefinabilityVerdict, DefinabilityError> {
    options.validate()?;
    let OperatorKind::Projection { target } = p.kind() else {
        return Err(DefinabilityError::NotProjection);
    };
    let lambda = match target.class() {
        SetClass::Finite(_) => 0.0,
        SetClass::Cofinite(_) => 1.0,
        SetClass::InfiniteCoinfinite => {
            let candidates = [Scalar::real(0.0), Scalar::real(1.0)];
            return Ok(
                match find_weyl_witness(p, &candidates, options.weyl_tol, options.n_max, options.rank_budget)? {
                    Some(w) => DefinabilityVerdict::NotDefinable { witness: Refutation::Weyl(w) },
                    None => DefinabilityVerdict::Inconclusive {
                        reason: "no Weyl witness at 0 and 1".into(),
                        diagnostics: Diagnostics { candidates: candidates.to_vec(), ..Diagnostics::default() },
                    },
                },
            );
        }
    };
    let lambda = Scalar::new(p.field(), C64::new(lambda, 0.0))?;
    match certify_compact(&p.minus_scalar(lambda.value())?, options.cert_tol, options.n_max)? {
        Ok(mut certificate) => {
            certificate.lambda = lambda;
            Ok(DefinabilityVerdict::Definable { lambda, certificate })
        }
        Err(failure) => Ok(DefinabilityVerdict::Inconclusive {
            reason: failure.reason.clone(),
            diagnostics: Diagnostics { certification: Some(failure), ..Diagnostics::default() },
        }),
    }
}
