//! Matrix kernels used by the ADMM updates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{arg_err, shape_err, Error, Result};
use crate::tensor::{dot, DenseMatrix, Elementwise};

/// Reduced singular value decomposition `m = u · diag(s) · vᵀ`.
///
/// Singular values are nonincreasing and strictly positive; numerically zero
/// ones are dropped, so `s.len()` may be smaller than `min(rows, cols)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `u · diag(f(s)) · vᵀ`, keeping only terms where `f(s) != 0`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = DenseMatrix::zeros(m, n);
        for (k, &s) in self.singular_values.iter().enumerate() {
            let w = f(s);
            if w == 0.0 {
                continue;
            }
            let uk = self.u.col(k);
            for j in 0..n {
                let c = w * self.v.get(j, k);
                for (o, a) in out.col_mut(j).iter_mut().zip(uk) {
                    *o += c * a;
                }
            }
        }
        out
    }

    pub fn recompose(&self) -> DenseMatrix {
        self.recompose_with(|s| s)
    }
}

/// Reduced SVD via Householder QR followed by one-sided Jacobi on the
/// triangular factor.
pub fn svd_reduced(m: &DenseMatrix) -> Result<SvdFactors> {
    if !m.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    if m.rows() >= m.cols() {
        svd_tall(m)
    } else {
        let t = svd_tall(&m.transpose())?;
        Ok(SvdFactors {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

fn svd_tall(a: &DenseMatrix) -> Result<SvdFactors> {
    let (m, n) = (a.rows(), a.cols());
    let scale = a.max_abs();
    if n == 0 || scale == 0.0 {
        return Ok(SvdFactors {
            u: DenseMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        });
    }
    let scaled = a.scale(1.0 / scale);
    let (q, r) = householder_qr(&scaled);
    let (ur, s, v) = jacobi_svd_square(&r);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let smax = s[order[0]];
    let cutoff = smax * f64::EPSILON * (m.max(n) as f64);
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&k| s[k] > cutoff && s[k] > 0.0)
        .collect();

    let r_kept = keep.len();
    let mut u_small = DenseMatrix::zeros(n, r_kept);
    let mut v_out = DenseMatrix::zeros(n, r_kept);
    let mut sv = Vec::with_capacity(r_kept);
    for (c, &k) in keep.iter().enumerate() {
        let inv = 1.0 / s[k];
        for (o, x) in u_small.col_mut(c).iter_mut().zip(ur.col(k)) {
            *o = x * inv;
        }
        v_out.col_mut(c).copy_from_slice(v.col(k));
        sv.push(s[k] * scale);
    }
    let u = q.matmul(&u_small)?;
    Ok(SvdFactors {
        u,
        singular_values: sv,
        v: v_out,
    })
}

/// Thin Householder QR of a tall matrix: `a = q · r`, `q` is `m×n`, `r` is `n×n`.
fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let x = &w.col(k)[k..];
        let norm = libm::sqrt(dot(x, x));
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vn = libm::sqrt(dot(&v, &v));
        if vn == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vn);
        for j in k..n {
            let col = &mut w.col_mut(j)[k..];
            let d = 2.0 * dot(&v, col);
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= d * vi;
            }
        }
        reflectors.push(v);
    }
    let r = DenseMatrix::from_fn(n, n, |i, j| if i <= j { w.get(i, j) } else { 0.0 });
    let mut q = DenseMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let col = &mut q.col_mut(j)[k..];
            let d = 2.0 * dot(v, col);
            for (c, vi) in col.iter_mut().zip(v) {
                *c -= d * vi;
            }
        }
    }
    (q, r)
}

/// One-sided Jacobi on a square matrix. Returns the rotated columns (whose
/// norms are the singular values), the norms, and the accumulated rotation.
fn jacobi_svd_square(r: &DenseMatrix) -> (DenseMatrix, Vec<f64>, DenseMatrix) {
    let n = r.cols();
    let mut w = r.clone();
    let mut v = DenseMatrix::identity(n);
    let tol = f64::EPSILON * n.max(1) as f64;
    let mut norms: Vec<f64> = (0..n).map(|j| dot(w.col(j), w.col(j))).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                let gamma = dot(w.col(p), w.col(q));
                if gamma == 0.0 || gamma.abs() <= tol * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_cols(&mut w, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
                norms[p] = dot(w.col(p), w.col(p));
                norms[q] = dot(w.col(q), w.col(q));
            }
        }
        if !rotated {
            break;
        }
    }
    let s = (0..n).map(|j| libm::sqrt(dot(w.col(j), w.col(j)))).collect();
    (w, s, v)
}

fn rotate_cols(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let (cp, cq) = m.col_pair_mut(p, q);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Singular value shrinkage `U · diag(max(σ − τ, 0)) · Vᵀ`, the proximal map
/// of `τ‖·‖_*`.
pub fn svd_shrink(m: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    Ok(svd_shrink_with_norm(m, tau)?.0)
}

/// Shrinkage together with the nuclear norm of the result.
pub(crate) fn svd_shrink_with_norm(m: &DenseMatrix, tau: f64) -> Result<(DenseMatrix, f64)> {
    check_tau(tau)?;
    let f = svd_reduced(m)?;
    let shrunk = |s: f64| (s - tau).max(0.0);
    let norm = f.singular_values.iter().map(|&s| shrunk(s)).sum();
    Ok((f.recompose_with(shrunk), norm))
}

pub fn nuclear_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(svd_reduced(m)?.singular_values.iter().sum())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(arg_err!("shrinkage threshold must be finite and nonnegative, got {}", tau));
    }
    Ok(())
}

/// Elementwise soft threshold `sign(x)·max(|x| − τ, 0)`.
pub fn soft_shrink<T: Elementwise>(x: &T, tau: f64) -> Result<T> {
    check_tau(tau)?;
    let mut out = x.clone();
    out.map_in_place(|v| shrink_scalar(v, tau));
    Ok(out)
}

#[inline]
pub(crate) fn shrink_scalar(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Cholesky factor `a = l·lᵀ` of a symmetric positive definite matrix.
///
/// The lower bandwidth of `a` is detected at factorization time; the factor
/// has the same bandwidth and solves cost `O(n·bandwidth)` per right-hand side.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    bandwidth: usize,
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(shape_err!("cholesky of a {}x{} matrix", n, a.cols()));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite("cholesky input".into()));
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut bandwidth = 0;
        for j in 0..n {
            for i in j + 1..n {
                let (x, y) = (a.get(i, j), a.get(j, i));
                if (x - y).abs() > 1e-12 * scale {
                    return Err(Error::NotPositiveDefinite);
                }
                if x != 0.0 {
                    bandwidth = bandwidth.max(i - j);
                }
            }
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let lo = j.saturating_sub(bandwidth);
            let mut d = a.get(j, j);
            for k in lo..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let ljj = libm::sqrt(d);
            l.set(j, j, ljj);
            for i in j + 1..(j + bandwidth + 1).min(n) {
                let mut s = a.get(i, j);
                for k in i.saturating_sub(bandwidth)..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / ljj);
            }
        }
        Ok(Self { n, bandwidth, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Solves `a·x = b` in place for a single right-hand side.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, l) = (self.n, self.bandwidth, &self.l);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= l.get(i, k) * b[k];
            }
            b[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= l.get(k, i) * b[k];
            }
            b[i] = s / l.get(i, i);
        }
    }

    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.rows() != self.n {
            return Err(shape_err!("rhs has {} rows, system has {}", b.rows(), self.n));
        }
        let mut x = b.clone();
        for j in 0..x.cols() {
            self.solve_in_place(x.col_mut(j));
        }
        Ok(x)
    }
}

/// Solves `a·x = b` for symmetric positive definite `a`.
pub fn spd_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    Cholesky::factor(a)?.solve(b)
}

/// Largest singular value.
///
/// Power iteration on `mᵀm`, stopped when the eigen-residual falls below
/// `1e-10` relative; after 500 iterations without convergence the value from
/// a full SVD is used, inflated by `1 + 1e-6`.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    let n = m.cols();
    if n == 0 || m.rows() == 0 || m.max_abs() == 0.0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n).map(|j| 1.0 + 1e-3 * j as f64).collect();
    normalize(&mut v);
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut mv = vec![0.0; m.rows()];
        for (j, &x) in v.iter().enumerate() {
            for (o, a) in mv.iter_mut().zip(m.col(j)) {
                *o += x * a;
            }
        }
        (0..n).map(|j| dot(m.col(j), &mv)).collect()
    };
    for _ in 0..500 {
        let w = apply(&v);
        let est = dot(&v, &w);
        let resid: f64 = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - est * b) * (a - est * b))
            .sum();
        if est > 0.0 && libm::sqrt(resid) <= 1e-10 * est {
            return libm::sqrt(est);
        }
        v = w;
        if normalize(&mut v) == 0.0 {
            break;
        }
    }
    svd_reduced(m)
        .ok()
        .and_then(|f| f.singular_values.first().copied())
        .map_or(f64::NAN, |s| s * (1.0 + 1e-6))
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = libm::sqrt(dot(v, v));
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// First-difference matrix: ones on the diagonal, −1 on the first superdiagonal.
pub fn toeplitz_diff(n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(arg_err!("toeplitz_diff needs n >= 1"));
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if j == i + 1 {
            -1.0
        } else {
            0.0
        }
    }))
}
