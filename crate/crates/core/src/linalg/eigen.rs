//! Cyclic Jacobi eigensolver for Hermitian matrices.

use super::{DenseMatrix, Field, LinalgError, C64, ZERO};

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DenseMatrix,
}

const MAX_SWEEPS: usize = 100;

pub fn hermitian_eigen(a: &DenseMatrix) -> Result<HermitianEigen, LinalgError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(LinalgError::Empty);
    }
    let asymmetry = a.hermitian_defect();
    if asymmetry > 1e-10 * a.max_abs().max(1.0) {
        return Err(LinalgError::NotHermitian { asymmetry });
    }
    let n = a.rows();
    // Work on the exactly Hermitian part.
    let mut m: Vec<C64> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            if i == j {
                C64::new(a.get(i, i).re, 0.0)
            } else {
                (a.get(i, j) + a.get(j, i).conj()) * 0.5
            }
        })
        .collect();
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }

    let frob = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * frob || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { routine: "hermitian_eigen", iterations: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    let eigenvalues = order.iter().map(|&i| m[i * n + i].re).collect();
    let field = a.field();
    let eigenvectors = DenseMatrix::from_fn(field, n, n, |i, k| v[i * n + order[k]]);
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

/// Annihilates `m[p][q]` with the unitary `G = diag(1, conj(ph)) R(c, s)`,
/// where `ph` is the phase of `m[p][q]` and `R` the real Jacobi rotation of
/// the resulting real symmetric 2x2 block.
fn rotate(m: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;
    let ph = apq / g;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phc = ph.conj();

    // columns: M <- M G
    for i in 0..n {
        let mp = m[i * n + p];
        let mq = m[i * n + q];
        m[i * n + p] = mp * c - mq * phc * s;
        m[i * n + q] = mp * s + mq * phc * c;
    }
    // rows: M <- G^* M
    for j in 0..n {
        let mp = m[p * n + j];
        let mq = m[q * n + j];
        m[p * n + j] = mp * c - mq * ph * s;
        m[q * n + j] = mp * s + mq * ph * c;
    }
    m[p * n + q] = ZERO;
    m[q * n + p] = ZERO;
    m[p * n + p].im = 0.0;
    m[q * n + q].im = 0.0;

    for i in 0..n {
        let vp = v[i * n + p];
        let vq = v[i * n + q];
        v[i * n + p] = vp * c - vq * phc * s;
        v[i * n + q] = vp * s + vq * phc * c;
    }
}

impl HermitianEigen {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    pub fn field(&self) -> Field {
        self.eigenvectors.field()
    }
}
