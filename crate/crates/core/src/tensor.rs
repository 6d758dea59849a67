//! Dense tensors, matrices and the multilinear primitives built on them.
//!
//! Tensors are stored with the first index varying fastest, and matrices are
//! column-major, so the mode-0 unfolding of a tensor shares its storage order.
//! The mode-`n` unfolding places entry `(i_0, …, i_{N-1})` in row `i_n` and in
//! the column obtained by enumerating the remaining indices first-fastest.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{arg_err, shape_err, Error, Result};

/// Shared elementwise access for [`DenseMatrix`] and [`DenseTensor`].
pub trait Elementwise: Clone {
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];

    fn map_in_place(&mut self, mut f: impl FnMut(f64) -> f64) {
        for v in self.values_mut() {
            *v = f(*v);
        }
    }

    fn l1_norm(&self) -> f64 {
        self.values().iter().map(|v| v.abs()).sum()
    }

    fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Column-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape_err!(
                "{} values supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + n * i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape_err!("ragged rows"));
        }
        Ok(Self::from_fn(rows.len(), cols, |i, j| rows[i][j]))
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i + n * i] = *v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + self.rows * j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + self.rows * j] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Two distinct columns, mutably. Requires `p < q`.
    pub(crate) fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let r = self.rows;
        let (a, b) = self.data.split_at_mut(q * r);
        (&mut a[p * r..(p + 1) * r], &mut b[..r])
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(shape_err!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            ));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let w = rhs.get(k, j);
                for (d, a) in dst.iter_mut().zip(self.col(k)) {
                    *d += w * a;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · rhs`, without materializing the transpose.
    pub fn t_matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != rhs.rows {
            return Err(shape_err!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            ));
        }
        Ok(DenseMatrix::from_fn(self.cols, rhs.cols, |i, j| {
            dot(self.col(i), rhs.col(j))
        }))
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = dot(self.col(i), self.col(j));
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        g
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        let mut out = self.clone();
        out.map_in_place(|v| v * s);
        out
    }

    pub fn zip_with(&self, rhs: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(shape_err!(
                "{}x{} vs {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(dot(&self.data, &self.data))
    }

    /// Frobenius inner product.
    pub fn inner(&self, rhs: &DenseMatrix) -> Result<f64> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(shape_err!("inner product of mismatched matrices"));
        }
        Ok(dot(&self.data, &rhs.data))
    }

    /// Leading `k` columns.
    pub fn leading_cols(&self, k: usize) -> DenseMatrix {
        let k = k.min(self.cols);
        DenseMatrix {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }
}

impl Elementwise for DenseMatrix {
    fn values(&self) -> &[f64] {
        &self.data
    }
    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense N-order real tensor, first index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(arg_err!("a tensor needs at least one mode"));
    }
    if dims.contains(&0) {
        return Err(arg_err!("zero-length mode in {:?}", dims));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| arg_err!("dimension product overflows for {:?}", dims))
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(shape_err!(
                "{} values supplied for dims {:?} ({} expected)",
                data.len(),
                dims,
                len
            ));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            data: vec![0.0; len],
        })
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_dims(dims)?;
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (i, d) in idx.iter_mut().zip(dims) {
                *i += 1;
                if *i < *d {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Storage offset of a multi-index. Panics when out of bounds.
    pub fn offset(&self, idx: &[usize]) -> usize {
        linear_index(&self.dims, idx).expect("index out of bounds")
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn add(&self, rhs: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> DenseTensor {
        let mut out = self.clone();
        out.map_in_place(|v| v * s);
        out
    }

    pub fn zip_with(&self, rhs: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        same_dims(self, rhs)?;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(DenseTensor {
            dims: self.dims.clone(),
            data,
        })
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(dot(&self.data, &self.data))
    }

    /// `(left, extent, right)` sizes around `mode`.
    pub(crate) fn split_at_mode(&self, mode: usize) -> (usize, usize, usize) {
        let left = self.dims[..mode].iter().product();
        let right = self.dims[mode + 1..].iter().product();
        (left, self.dims[mode], right)
    }
}

impl Elementwise for DenseTensor {
    fn values(&self) -> &[f64] {
        &self.data
    }
    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

pub(crate) fn linear_index(dims: &[usize], idx: &[usize]) -> Option<usize> {
    if idx.len() != dims.len() {
        return None;
    }
    let mut off = 0;
    let mut stride = 1;
    for (&i, &d) in idx.iter().zip(dims) {
        if i >= d {
            return None;
        }
        off += i * stride;
        stride *= d;
    }
    Some(off)
}

pub(crate) fn multi_index(dims: &[usize], mut off: usize) -> Vec<usize> {
    dims.iter()
        .map(|&d| {
            let i = off % d;
            off /= d;
            i
        })
        .collect()
}

fn same_dims(a: &DenseTensor, b: &DenseTensor) -> Result<()> {
    if a.dims != b.dims {
        return Err(shape_err!("dims {:?} vs {:?}", a.dims, b.dims));
    }
    Ok(())
}

fn check_mode(t: &DenseTensor, mode: usize) -> Result<()> {
    if mode >= t.order() {
        return Err(Error::ModeOutOfRange {
            mode,
            order: t.order(),
        });
    }
    Ok(())
}

/// Mode-`mode` unfolding: an `I_mode × ∏_{l≠mode} I_l` matrix.
pub fn unfold(t: &DenseTensor, mode: usize) -> Result<DenseMatrix> {
    check_mode(t, mode)?;
    let (left, k, right) = t.split_at_mode(mode);
    if mode == 0 {
        return DenseMatrix::new(k, right, t.data.clone());
    }
    let mut out = vec![0.0; t.len()];
    for b in 0..right {
        for kk in 0..k {
            let src = &t.data[left * (kk + k * b)..left * (kk + 1 + k * b)];
            for (a, v) in src.iter().enumerate() {
                out[kk + k * (a + left * b)] = *v;
            }
        }
    }
    DenseMatrix::new(k, left * right, out)
}

/// Inverse of [`unfold`].
pub fn fold(m: &DenseMatrix, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
    let len = check_dims(dims)?;
    if mode >= dims.len() {
        return Err(Error::ModeOutOfRange {
            mode,
            order: dims.len(),
        });
    }
    let k = dims[mode];
    if m.rows() != k || m.rows() * m.cols() != len {
        return Err(shape_err!(
            "{}x{} matrix cannot fold into {:?} along mode {}",
            m.rows(),
            m.cols(),
            dims,
            mode
        ));
    }
    if mode == 0 {
        return DenseTensor::new(dims.to_vec(), m.data.clone());
    }
    let left: usize = dims[..mode].iter().product();
    let right: usize = dims[mode + 1..].iter().product();
    let mut out = vec![0.0; len];
    for b in 0..right {
        for kk in 0..k {
            let dst = &mut out[left * (kk + k * b)..left * (kk + 1 + k * b)];
            for (a, v) in dst.iter_mut().enumerate() {
                *v = m.data[kk + k * (a + left * b)];
            }
        }
    }
    DenseTensor::new(dims.to_vec(), out)
}

/// n-mode product `t ×_mode m`; mode extent `I_mode` becomes `m.rows()`.
pub fn mode_product(t: &DenseTensor, m: &DenseMatrix, mode: usize) -> Result<DenseTensor> {
    check_mode(t, mode)?;
    if m.cols() != t.dims[mode] {
        return Err(shape_err!(
            "{}x{} matrix applied along mode {} of extent {}",
            m.rows(),
            m.cols(),
            mode,
            t.dims[mode]
        ));
    }
    let (left, k, right) = t.split_at_mode(mode);
    let p = m.rows();
    let mut out = vec![0.0; left * p * right];
    if left == 1 {
        for b in 0..right {
            let src = &t.data[b * k..(b + 1) * k];
            let dst = &mut out[b * p..(b + 1) * p];
            for (kk, s) in src.iter().enumerate() {
                for (d, c) in dst.iter_mut().zip(m.col(kk)) {
                    *d += s * c;
                }
            }
        }
    } else {
        for b in 0..right {
            let src = &t.data[b * left * k..(b + 1) * left * k];
            let dst = &mut out[b * left * p..(b + 1) * left * p];
            for pp in 0..p {
                let d = &mut dst[pp * left..(pp + 1) * left];
                for kk in 0..k {
                    let w = m.get(pp, kk);
                    for (x, y) in d.iter_mut().zip(&src[kk * left..(kk + 1) * left]) {
                        *x += w * y;
                    }
                }
            }
        }
    }
    let mut dims = t.dims.clone();
    dims[mode] = p;
    DenseTensor::new(dims, out)
}

/// Tucker product `⟦s; factors[0], …, factors[N-1]⟧` by sequential mode products.
pub fn multilinear(s: &DenseTensor, factors: &[DenseMatrix]) -> Result<DenseTensor> {
    if factors.len() != s.order() {
        return Err(shape_err!(
            "{} factors for a core of order {}",
            factors.len(),
            s.order()
        ));
    }
    let mut out = s.clone();
    for (n, f) in factors.iter().enumerate() {
        out = mode_product(&out, f, n)?;
    }
    Ok(out)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (p, q) = (b.rows(), b.cols());
    DenseMatrix::from_fn(a.rows() * p, a.cols() * q, |i, j| {
        a.get(i / p, j / q) * b.get(i % p, j % q)
    })
}

pub fn inner(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    same_dims(a, b)?;
    Ok(dot(&a.data, &b.data))
}

pub fn frobenius(a: &DenseTensor) -> f64 {
    a.frobenius()
}

/// Copy of `t` with the entries in `mask` taken from `source`.
pub fn project_assign(
    t: &DenseTensor,
    mask: &ObservationMask,
    source: &DenseTensor,
) -> Result<DenseTensor> {
    same_dims(t, source)?;
    if mask.dims() != t.dims() {
        return Err(shape_err!(
            "mask dims {:?} vs tensor dims {:?}",
            mask.dims(),
            t.dims()
        ));
    }
    let mut out = t.clone();
    for &o in mask.linear_indices() {
        out.data[o] = source.data[o];
    }
    Ok(out)
}

/// Set of observed multi-indices over a dimension vector.
///
/// Indices are kept as sorted, unique storage offsets (first index fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    dims: Vec<usize>,
    observed: Vec<usize>,
}

impl ObservationMask {
    /// Builds a mask from index tuples; duplicates and out-of-range tuples are errors.
    pub fn new(dims: &[usize], tuples: &[Vec<usize>]) -> Result<Self> {
        check_dims(dims)?;
        let mut observed = Vec::with_capacity(tuples.len());
        for t in tuples {
            observed.push(
                linear_index(dims, t)
                    .ok_or_else(|| arg_err!("index {:?} out of range for {:?}", t, dims))?,
            );
        }
        Self::from_offsets(dims, observed)
    }

    /// Builds a mask from storage offsets.
    pub fn from_offsets(dims: &[usize], mut observed: Vec<usize>) -> Result<Self> {
        let len = check_dims(dims)?;
        observed.sort_unstable();
        if observed.windows(2).any(|w| w[0] == w[1]) {
            return Err(arg_err!("duplicate observed index"));
        }
        if observed.last().is_some_and(|&o| o >= len) {
            return Err(arg_err!("observed offset out of range"));
        }
        Ok(Self {
            dims: dims.to_vec(),
            observed,
        })
    }

    /// Builds a mask from a dense boolean view.
    pub fn from_dense(dims: &[usize], dense: &[bool]) -> Result<Self> {
        let len = check_dims(dims)?;
        if dense.len() != len {
            return Err(shape_err!("dense mask of length {} for {:?}", dense.len(), dims));
        }
        let observed = dense
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        Ok(Self {
            dims: dims.to_vec(),
            observed,
        })
    }

    pub fn full(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            observed: (0..len).collect(),
        })
    }

    pub fn empty(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            observed: Vec::new(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Number of observed entries, `|Ω|`.
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    /// `|Ωᶜ|`.
    pub fn complement_len(&self) -> usize {
        self.total() - self.observed.len()
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        linear_index(&self.dims, idx).is_some_and(|o| self.contains_offset(o))
    }

    pub fn contains_offset(&self, offset: usize) -> bool {
        self.observed.binary_search(&offset).is_ok()
    }

    pub fn linear_indices(&self) -> &[usize] {
        &self.observed
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.observed.iter().map(|&o| multi_index(&self.dims, o))
    }

    /// Dense boolean view in storage order.
    pub fn dense(&self) -> Vec<bool> {
        let mut d = vec![false; self.total()];
        for &o in &self.observed {
            d[o] = true;
        }
        d
    }
}
