//! Truncated HOSVD, core thresholding and reconstruction SNR.

use alloc::vec::Vec;

use crate::error::{arg_err, Error, Result};
use crate::linalg::svd_reduced;
use crate::tensor::{dot, mode_product, multilinear, unfold, DenseMatrix, DenseTensor, Elementwise};

/// Tucker model `⟦core; factors⟧` with orthonormal factor columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerModel {
    pub core: DenseTensor,
    pub factors: Vec<DenseMatrix>,
}

impl TuckerModel {
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        multilinear(&self.core, &self.factors)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.cols()).collect()
    }
}

/// Truncated higher-order SVD.
///
/// `factors[n]` holds the leading `ranks[n]` left singular vectors of the
/// mode-`n` unfolding, each column signed so that its largest-magnitude
/// entry is nonnegative. When an unfolding has fewer nonzero singular values
/// than requested, the basis is completed with orthonormal directions.
pub fn hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<TuckerModel> {
    if ranks.len() != t.order() {
        return Err(arg_err!(
            "{} ranks given for a tensor of order {}",
            ranks.len(),
            t.order()
        ));
    }
    let mut factors = Vec::with_capacity(ranks.len());
    for (n, &r) in ranks.iter().enumerate() {
        let dim = t.dims()[n];
        if r == 0 || r > dim {
            return Err(arg_err!("rank {} out of range 1..={} for mode {}", r, dim, n));
        }
        factors.push(leading_left_vectors(&unfold(t, n)?, r)?);
    }
    let mut core = t.clone();
    for (n, f) in factors.iter().enumerate() {
        core = mode_product(&core, &f.transpose(), n)?;
    }
    Ok(TuckerModel { core, factors })
}

/// Leading `r` left singular vectors with the sign convention applied.
pub(crate) fn leading_left_vectors(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    let svd = svd_reduced(m)?;
    let mut q = svd.u.leading_cols(r);
    if q.cols() < r {
        q = complete_orthonormal(&q, r);
    }
    fix_signs(&mut q);
    Ok(q)
}

/// Flip each column so its largest-magnitude entry is nonnegative.
pub(crate) fn fix_signs(q: &mut DenseMatrix) {
    for j in 0..q.cols() {
        let col = q.col_mut(j);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Extends orthonormal columns `q` to `r` columns using coordinate directions.
pub(crate) fn complete_orthonormal(q: &DenseMatrix, r: usize) -> DenseMatrix {
    let m = q.rows();
    let mut cols: Vec<Vec<f64>> = (0..q.cols()).map(|j| q.col(j).to_vec()).collect();
    let mut k = 0;
    while cols.len() < r && k < m {
        let mut v: Vec<f64> = (0..m).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        for _ in 0..2 {
            for c in &cols {
                let d = dot(c, &v);
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = libm::sqrt(dot(&v, &v));
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
        k += 1;
    }
    DenseMatrix::from_fn(m, cols.len(), |i, j| cols[j][i])
}

/// Zeroes core entries with `|s| < tn` and reports the zero fraction of the result.
pub fn truncate_core(model: &TuckerModel, tn: f64) -> Result<(TuckerModel, f64)> {
    if !(tn >= 0.0) {
        return Err(arg_err!("truncation threshold must be nonnegative, got {}", tn));
    }
    let mut out = model.clone();
    out.core.map_in_place(|v| if v.abs() < tn { 0.0 } else { v });
    let zeros = out.core.values().iter().filter(|&&v| v == 0.0).count();
    let sparsity = zeros as f64 / out.core.len() as f64;
    Ok((out, sparsity))
}

/// `20·log10(‖truth‖ / ‖approx − truth‖)` in dB; `+∞` when the error is zero.
pub fn reconstruction_snr(truth: &DenseTensor, approx: &DenseTensor) -> Result<f64> {
    let signal = truth.frobenius();
    if signal == 0.0 {
        return Err(Error::InvalidArgument("SNR of an all-zero reference".into()));
    }
    let err = approx.sub(truth)?.frobenius();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * libm::log10(signal / err))
}
