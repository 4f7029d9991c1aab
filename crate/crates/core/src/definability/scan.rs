use rayon::prelude::*;
use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use crate::linalg::{singular_values, Scalar};
use crate::operators::OperatorSpec;

use super::DefinabilityError;

/// Fraction of the truncation size used to pick the defect singular value.
pub const DEFAULT_K_FRACTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub mu: Scalar,
    pub defect: f64,
}

impl Serialize for ScanRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(3)?;
        t.serialize_element(&self.mu.re())?;
        t.serialize_element(&self.mu.im())?;
        t.serialize_element(&self.defect)?;
        t.end()
    }
}

/// For each `mu`, the `floor(k_fraction N)`-th smallest singular value of
/// the finite section of `T - mu`. Small values mark approximate membership
/// in the essential spectrum. Rows follow the order of `grid`.
pub fn essential_spectrum_scan(
    t: &OperatorSpec,
    grid: &[Scalar],
    k_fraction: f64,
    n: usize,
) -> Result<Vec<ScanRow>, DefinabilityError> {
    if grid.is_empty() {
        return Err(DefinabilityError::EmptyGrid);
    }
    if !(0.0..1.0).contains(&k_fraction) {
        return Err(DefinabilityError::BadOption(format!("k_fraction must lie in [0, 1), got {k_fraction}")));
    }
    if n == 0 {
        return Err(DefinabilityError::BadOption("truncation size must be positive".into()));
    }
    let section = t.truncate(n);
    let k = (k_fraction * n as f64).floor() as usize;
    grid.par_iter()
        .map(|mu| {
            let s = singular_values(&section.shifted(mu.value()))?;
            Ok(ScanRow { mu: *mu, defect: s[n - 1 - k] })
        })
        .collect()
}
