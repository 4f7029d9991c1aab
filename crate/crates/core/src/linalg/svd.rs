//! Singular value decomposition for complex matrices.
//!
//! Householder reduction to a real non-negative upper bidiagonal form,
//! followed by implicit-shift Golub-Kahan QR sweeps on the bidiagonal
//! (the LINPACK `dsvdc` iteration). Rotations in the sweep are real, so they
//! apply unchanged to the complex singular vectors.

use super::{DenseMatrix, LinalgError, C64, ONE, ZERO};

/// Thin SVD `A = U diag(s) V^*` with `k = min(rows, cols)` singular triples.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// `rows x k`, orthonormal columns.
    pub left_vectors: DenseMatrix,
    /// `cols x k`, orthonormal columns.
    pub right_vectors: DenseMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> DenseMatrix {
        let u = &self.left_vectors;
        let v = &self.right_vectors;
        let field = u.field();
        DenseMatrix::from_fn(field, u.rows(), v.rows(), |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, s)| u.get(i, k) * *s * v.get(j, k).conj())
                .sum()
        })
    }
}

pub fn svd(a: &DenseMatrix) -> Result<SvdResult, LinalgError> {
    let out = decompose(a, true, true)?;
    Ok(SvdResult {
        singular_values: out.s,
        left_vectors: out.u.expect("requested"),
        right_vectors: out.v.expect("requested"),
    })
}

/// Singular values only, descending.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    Ok(decompose(a, false, false)?.s)
}

/// Singular values together with the right singular vectors.
pub(crate) fn svd_right(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix), LinalgError> {
    let out = decompose(a, false, true)?;
    Ok((out.s, out.v.expect("requested")))
}

struct Decomposition {
    s: Vec<f64>,
    u: Option<DenseMatrix>,
    v: Option<DenseMatrix>,
}

fn decompose(a: &DenseMatrix, want_u: bool, want_v: bool) -> Result<Decomposition, LinalgError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(LinalgError::Empty);
    }
    if a.rows() >= a.cols() {
        return decompose_tall(a, want_u, want_v);
    }
    // A^* = U' S V'^*  =>  A = V' S U'^*
    let flipped = decompose_tall(&a.adjoint(), want_v, want_u)?;
    Ok(Decomposition { s: flipped.s, u: flipped.v, v: flipped.u })
}

struct Reflector {
    offset: usize,
    v: Vec<C64>,
    beta: f64,
}

impl Reflector {
    /// `H = I - beta v v^*` with `H x = alpha e_1`; returns `(H, alpha)`.
    fn annihilate(offset: usize, x: &[C64]) -> (Self, C64) {
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (Reflector { offset, v: Vec::new(), beta: 0.0 }, ZERO);
        }
        let x0 = x[0];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v = x.to_vec();
        v[0] = x0 - alpha;
        let vv = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (Reflector { offset, v, beta: 2.0 / vv }, alpha)
    }

    fn is_identity(&self) -> bool {
        self.beta == 0.0
    }

    /// Applies `H` from the left to rows `offset..` of the columns `cols`
    /// of a row-major matrix with `stride` columns.
    fn apply_left(&self, data: &mut [C64], stride: usize, cols: std::ops::Range<usize>) {
        if self.is_identity() {
            return;
        }
        for j in cols {
            let mut s = ZERO;
            for (i, vi) in self.v.iter().enumerate() {
                s += vi.conj() * data[(self.offset + i) * stride + j];
            }
            let s = s * self.beta;
            if s == ZERO {
                continue;
            }
            for (i, vi) in self.v.iter().enumerate() {
                data[(self.offset + i) * stride + j] -= s * vi;
            }
        }
    }

    /// Applies `H` from the right to columns `offset..` of the rows `rows`.
    fn apply_right(&self, data: &mut [C64], stride: usize, rows: std::ops::Range<usize>) {
        if self.is_identity() {
            return;
        }
        for i in rows {
            let row = &mut data[i * stride + self.offset..i * stride + self.offset + self.v.len()];
            let s: C64 = row.iter().zip(&self.v).map(|(r, v)| r * v).sum::<C64>() * self.beta;
            if s == ZERO {
                continue;
            }
            for (r, v) in row.iter_mut().zip(&self.v) {
                *r -= s * v.conj();
            }
        }
    }
}

fn decompose_tall(a: &DenseMatrix, want_u: bool, want_v: bool) -> Result<Decomposition, LinalgError> {
    let m = a.rows();
    let n = a.cols();
    let mut w = a.data().to_vec();
    let mut d = vec![ZERO; n];
    let mut e = vec![ZERO; n];
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n.saturating_sub(2));

    for k in 0..n {
        let x: Vec<C64> = (k..m).map(|i| w[i * n + k]).collect();
        let (h, alpha) = Reflector::annihilate(k, &x);
        h.apply_left(&mut w, n, k + 1..n);
        d[k] = alpha;
        left.push(h);

        if k + 2 < n {
            let y: Vec<C64> = (k + 1..n).map(|j| w[k * n + j].conj()).collect();
            let (g, alpha) = Reflector::annihilate(k + 1, &y);
            g.apply_right(&mut w, n, k + 1..m);
            e[k] = alpha.conj();
            right.push(g);
        } else if k + 1 < n {
            e[k] = w[k * n + k + 1];
        }
    }

    // U = H_0 ... H_{n-1} [I_n; 0]
    let mut u = if want_u {
        let mut u = vec![ZERO; m * n];
        for i in 0..n {
            u[i * n + i] = ONE;
        }
        for h in left.iter().rev() {
            h.apply_left(&mut u, n, 0..n);
        }
        Some(u)
    } else {
        None
    };
    // V = G_0 ... G_{n-3}
    let mut v = if want_v {
        let mut v = vec![ZERO; n * n];
        for i in 0..n {
            v[i * n + i] = ONE;
        }
        for g in right.iter().rev() {
            g.apply_left(&mut v, n, 0..n);
        }
        Some(v)
    } else {
        None
    };

    // Rotate phases into U and V so the bidiagonal is real and non-negative.
    let mut s = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for k in 0..n {
        let dk = d[k];
        let r = dk.norm();
        if r > 0.0 {
            let ph = dk / r;
            if let Some(u) = u.as_mut() {
                for i in 0..m {
                    u[i * n + k] *= ph;
                }
            }
            e[k] *= ph.conj();
        }
        s[k] = r;
        if k + 1 < n {
            let ek = e[k];
            let r = ek.norm();
            if r > 0.0 {
                let ph = ek / r;
                d[k + 1] *= ph.conj();
                if let Some(v) = v.as_mut() {
                    for i in 0..n {
                        v[i * n + k + 1] *= ph.conj();
                    }
                }
            }
            sup[k] = r;
        }
    }

    bidiagonal_qr(&mut s, &mut sup, u.as_deref_mut(), m, v.as_deref_mut(), n)?;

    let field = a.field();
    Ok(Decomposition {
        s,
        u: u.map(|u| DenseMatrix::from_data(field, m, n, u)),
        v: v.map(|v| DenseMatrix::from_data(field, n, n, v)),
    })
}

#[inline]
fn rotate_columns(data: &mut [C64], rows: usize, stride: usize, j: usize, k: usize, cs: f64, sn: f64) {
    for i in 0..rows {
        let a = data[i * stride + j];
        let b = data[i * stride + k];
        data[i * stride + j] = a * cs + b * sn;
        data[i * stride + k] = a * (-sn) + b * cs;
    }
}

/// Diagonalizes the real upper bidiagonal `(s, e)` in place, accumulating the
/// rotations into `u` (`m x n`) and `v` (`n x n`). On return `s` is sorted in
/// descending order and is non-negative.
fn bidiagonal_qr(
    s: &mut [f64],
    e: &mut [f64],
    mut u: Option<&mut [C64]>,
    m: usize,
    mut v: Option<&mut [C64]>,
    n: usize,
) -> Result<(), LinalgError> {
    let eps = f64::EPSILON;
    let tiny = 2f64.powi(-966);
    let max_iter = 75 * n.max(4);
    let mut iterations = 0usize;
    let mut p = n as isize;
    let pp = p - 1;

    while p > 0 {
        let mut k = p - 2;
        while k >= 0 {
            let ku = k as usize;
            if e[ku].abs() <= tiny + eps * (s[ku].abs() + s[ku + 1].abs()) {
                e[ku] = 0.0;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p - 2 {
            kase = 4;
        } else {
            let mut ks = p - 1;
            while ks > k {
                let ksu = ks as usize;
                let t = (if ks != p { e[ksu].abs() } else { 0.0 })
                    + (if ks != k + 1 { e[ksu - 1].abs() } else { 0.0 });
                if s[ksu].abs() <= tiny + eps * t {
                    s[ksu] = 0.0;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        k += 1;
        let ku = k as usize;
        let pu = p as usize;

        match kase {
            // Deflate a negligible s[p-1].
            1 => {
                let mut f = e[pu - 2];
                e[pu - 2] = 0.0;
                for j in (ku..=pu - 2).rev() {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != ku {
                        f = -sn * e[j - 1];
                        e[j - 1] *= cs;
                    }
                    if let Some(v) = v.as_deref_mut() {
                        rotate_columns(v, n, n, j, pu - 1, cs, sn);
                    }
                }
            }
            // Split at a negligible s[k-1].
            2 => {
                let mut f = e[ku - 1];
                e[ku - 1] = 0.0;
                for j in ku..pu {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] *= cs;
                    if let Some(u) = u.as_deref_mut() {
                        rotate_columns(u, m, n, j, ku - 1, cs, sn);
                    }
                }
            }
            // One implicit-shift QR sweep.
            3 => {
                iterations += 1;
                if iterations > max_iter {
                    return Err(LinalgError::NoConvergence { routine: "svd", iterations });
                }
                let scale = s[pu - 1]
                    .abs()
                    .max(s[pu - 2].abs())
                    .max(e[pu - 2].abs())
                    .max(s[ku].abs())
                    .max(e[ku].abs());
                let sp = s[pu - 1] / scale;
                let spm1 = s[pu - 2] / scale;
                let epm1 = e[pu - 2] / scale;
                let sk = s[ku] / scale;
                let ek = e[ku] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = 0.0;
                if b != 0.0 || c != 0.0 {
                    shift = (b * b + c).sqrt();
                    if b < 0.0 {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                for j in ku..pu - 1 {
                    let t = f.hypot(g);
                    let cs = f / t;
                    let sn = g / t;
                    if j != ku {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] *= cs;
                    if let Some(v) = v.as_deref_mut() {
                        rotate_columns(v, n, n, j, j + 1, cs, sn);
                    }
                    let t = f.hypot(g);
                    let cs = f / t;
                    let sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] *= cs;
                    if j < m - 1 {
                        if let Some(u) = u.as_deref_mut() {
                            rotate_columns(u, m, n, j, j + 1, cs, sn);
                        }
                    }
                }
                e[pu - 2] = f;
            }
            // Convergence of s[k]: fix the sign, then bubble into order.
            _ => {
                let mut k = ku;
                if s[k] <= 0.0 {
                    s[k] = if s[k] < 0.0 { -s[k] } else { 0.0 };
                    if let Some(v) = v.as_deref_mut() {
                        for i in 0..=(pp as usize) {
                            v[i * n + k] = -v[i * n + k];
                        }
                    }
                }
                while (k as isize) < pp {
                    if s[k] >= s[k + 1] {
                        break;
                    }
                    s.swap(k, k + 1);
                    if k < n - 1 {
                        if let Some(v) = v.as_deref_mut() {
                            for i in 0..n {
                                v.swap(i * n + k, i * n + k + 1);
                            }
                        }
                    }
                    if k < m - 1 {
                        if let Some(u) = u.as_deref_mut() {
                            for i in 0..m {
                                u.swap(i * n + k, i * n + k + 1);
                            }
                        }
                    }
                    k += 1;
                }
                p -= 1;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_contract(a: &DenseMatrix) {
        let r = svd(a).unwrap();
        let k = a.rows().min(a.cols());
        assert_eq!(r.singular_values.len(), k);
        for w in r.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(r.singular_values.iter().all(|s| *s >= 0.0));
        let scale = a.max_abs().max(1.0);
        let diff = r.reconstruct().sub(a).unwrap().max_abs();
        assert!(diff <= 1e-10 * scale, "reconstruction error {diff}");
        for m in [&r.left_vectors, &r.right_vectors] {
            let g = m.adjoint().matmul(m).unwrap();
            let id = DenseMatrix::identity(Field::Complex, k);
            assert!(g.sub(&id).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let s = singular_values(&DenseMatrix::identity(Field::Real, 3)).unwrap();
        assert_eq!(s, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_two_zero() {
        let a = DenseMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(singular_values(&a).unwrap(), vec![2.0, 0.0]);
        check_contract(&a);
    }

    #[test]
    fn nilpotent_jordan_block() {
        // [[0,1],[0,0]] = e_0 e_1^T, a rank-one partial isometry.
        let a = DenseMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = svd(&a).unwrap();
        assert!((r.singular_values[0] - 1.0).abs() < 1e-15);
        assert!(r.singular_values[1].abs() < 1e-15);
        check_contract(&a);
    }

    #[test]
    fn real_input_gives_real_factors() {
        let a = DenseMatrix::from_real_rows(&[&[1.0, -2.0, 0.5], &[3.0, 0.0, 1.0], &[0.0, 4.0, -1.0]]);
        let r = svd(&a).unwrap();
        assert!(r.left_vectors.data().iter().all(|z| z.im == 0.0));
        assert!(r.right_vectors.data().iter().all(|z| z.im == 0.0));
        check_contract(&a);
    }

    #[test]
    fn random_rectangular_and_complex() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(1, 1), (1, 5), (5, 1), (7, 3), (3, 7), (16, 16), (33, 20), (64, 64)] {
            let a = DenseMatrix::from_fn(Field::Complex, m, n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            check_contract(&a);
        }
    }

    #[test]
    fn rank_deficient_matrix() {
        // Outer product has one non-zero singular value |u||v|.
        let a = DenseMatrix::from_fn(Field::Real, 6, 4, |i, j| C64::new((i + 1) as f64 * (j as f64 - 1.5), 0.0));
        let s = singular_values(&a).unwrap();
        let u2: f64 = (1..=6).map(|i| (i * i) as f64).sum();
        let v2: f64 = [2.25, 0.25, 0.25, 2.25].iter().sum();
        assert!((s[0] - (u2 * v2).sqrt()).abs() < 1e-12);
        assert!(s[1..].iter().all(|x| *x < 1e-12));
        check_contract(&a);
    }
}
