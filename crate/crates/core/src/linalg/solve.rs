use super::{DenseMatrix, LinalgError, C64, ZERO};

/// Solves `A x = b` by LU with partial pivoting.
///
/// Exactly singular pivots are replaced by `eps * max|A|`, which is what
/// inverse iteration wants: a huge but finite solution along the null
/// direction.
pub fn lu_solve(a: &DenseMatrix, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
    let n = a.rows();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    if a.cols() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, actual: a.cols() });
    }
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, actual: b.len() });
    }
    let scale = a.max_abs();
    let floor = f64::EPSILON * if scale > 0.0 { scale } else { 1.0 };
    let mut lu = a.data().to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, lu[i * n + k].norm()))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        if best <= floor {
            lu[k * n + k] = C64::new(floor, 0.0);
        }
        let pivot = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / pivot;
            if f == ZERO {
                continue;
            }
            lu[i * n + k] = f;
            for j in k + 1..n {
                let u = lu[k * n + j];
                lu[i * n + j] -= f * u;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= lu[k * n + j] * x[j];
        }
        x[k] = s / lu[k * n + k];
    }
    Ok(x)
}
