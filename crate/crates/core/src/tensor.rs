//! Dense real tensors and CP (canonical polyadic) decompositions.
//!
//! Storage is row-major: the last index varies fastest. Every unfolding and
//! Khatri-Rao product in the crate follows from that single convention, so
//! for a CP tensor
//!
//! ```text
//! unfold(T, 0) = U_0 · diag(λ) · (U_1 ⊙ U_2 ⊙ … ⊙ U_{m-1})^T
//! ```
//!
//! where in `A ⊙ B` the row index of `A` varies slower than that of `B`.
//!
//! Modes are 0-based throughout the API.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An m-way real array with explicit shape.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        validate_shape(&shape)?;
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::shape(format!(
                "shape {:?} needs {} entries, got {}",
                shape,
                len,
                data.len()
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        validate_shape(shape)?;
        let len = shape.iter().product();
        Ok(DenseTensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        validate_shape(shape)?;
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, shape);
        }
        Ok(DenseTensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// The rank-1 tensor `v_0 ⊗ v_1 ⊗ … ⊗ v_{m-1}`.
    pub fn outer(vectors: &[&[f64]]) -> Result<Self> {
        let shape: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
        DenseTensor::from_fn(&shape, |idx| {
            idx.iter().zip(vectors).map(|(&i, v)| v[i]).product()
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut off = 0;
        for (&i, &n) in idx.iter().zip(&self.shape) {
            debug_assert!(i < n);
            off = off * n + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        hs_norm(self)
    }

    pub fn scaled(&self, c: f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// `self - other`, elementwise.
    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + other`, elementwise.
    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        if self.shape != other.shape {
            return Err(Error::shape(format!(
                "elementwise operands have shapes {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn mode_product(&self, v: &DMatrix<f64>, mode: usize) -> Result<DenseTensor> {
        mode_product(self, v, mode)
    }

    pub fn unfold(&self, mode: usize) -> Result<DMatrix<f64>> {
        unfold(self, mode)
    }

    /// Reorders modes so that mode `i` of the result is mode `perm[i]` of `self`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<DenseTensor> {
        let m = self.order();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::contract(format!(
                "{perm:?} is not a permutation of 0..{m}"
            )));
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let strides = self.strides();
        let new_strides: Vec<usize> = perm.iter().map(|&p| strides[p]).collect();
        DenseTensor::from_fn(&new_shape, |idx| {
            let off: usize = idx.iter().zip(&new_strides).map(|(i, s)| i * s).sum();
            self.data[off]
        })
    }
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::shape("tensor order must be at least 1"));
    }
    if let Some(pos) = shape.iter().position(|&n| n == 0) {
        return Err(Error::shape(format!(
            "dimension of mode {pos} is zero in shape {shape:?}"
        )));
    }
    Ok(())
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for t in (0..shape.len().saturating_sub(1)).rev() {
        strides[t] = strides[t + 1] * shape[t + 1];
    }
    strides
}

/// Advances a row-major multi-index; wraps to all zeros after the last entry.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for t in (0..idx.len()).rev() {
        idx[t] += 1;
        if idx[t] < shape[t] {
            return;
        }
        idx[t] = 0;
    }
}

/// Weighted sum of rank-1 terms, `Σ_s λ_s u^{s,0} ⊗ … ⊗ u^{s,m-1}`.
///
/// Factor `j` is an `n_j × r` matrix whose column `s` is `u^{s,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpDecomposition {
    factors: Vec<DMatrix<f64>>,
    weights: Vec<f64>,
}

impl CpDecomposition {
    pub fn new(factors: Vec<DMatrix<f64>>, weights: Vec<f64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::shape("a CP decomposition needs at least one factor"));
        }
        let r = weights.len();
        for (j, f) in factors.iter().enumerate() {
            if f.ncols() != r {
                return Err(Error::shape(format!(
                    "factor {j} has {} columns but there are {r} weights",
                    f.ncols()
                )));
            }
            if f.nrows() == 0 {
                return Err(Error::shape(format!("factor {j} has no rows")));
            }
        }
        Ok(CpDecomposition { factors, weights })
    }

    /// All weights equal to one.
    pub fn unweighted(factors: Vec<DMatrix<f64>>) -> Result<Self> {
        let r = factors.first().map_or(0, |f| f.ncols());
        CpDecomposition::new(factors, vec![1.0; r])
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    pub fn factors(&self) -> &[DMatrix<f64>] {
        &self.factors
    }

    pub fn factor(&self, mode: usize) -> &DMatrix<f64> {
        &self.factors[mode]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_parts(self) -> (Vec<DMatrix<f64>>, Vec<f64>) {
        (self.factors, self.weights)
    }

    pub fn to_tensor(&self) -> DenseTensor {
        cp_to_tensor(self)
    }

    /// Same factors with every weight multiplied by `c`.
    pub fn scale_weights(&self, c: f64) -> CpDecomposition {
        CpDecomposition {
            factors: self.factors.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }

    /// Folds the weights into factor 0 and sets them to one.
    pub fn absorb_weights(&self) -> CpDecomposition {
        let mut factors = self.factors.clone();
        for (s, &w) in self.weights.iter().enumerate() {
            factors[0].column_mut(s).scale_mut(w);
        }
        CpDecomposition {
            factors,
            weights: vec![1.0; self.rank()],
        }
    }
}

/// Dense reconstruction of a CP decomposition.
pub fn cp_to_tensor(cp: &CpDecomposition) -> DenseTensor {
    let shape = cp.shape();
    let mut lead = cp.factors[0].clone();
    for (s, &w) in cp.weights.iter().enumerate() {
        lead.column_mut(s).scale_mut(w);
    }
    let data = if cp.order() == 1 {
        (0..lead.nrows()).map(|i| lead.row(i).sum()).collect()
    } else {
        let rest: Vec<&DMatrix<f64>> = cp.factors[1..].iter().collect();
        let kr = khatri_rao_chain(&rest).expect("factor column counts checked at construction");
        // unfold(T, 0) = lead · kr^T, laid out row-major
        let unfolded = &lead * kr.transpose();
        row_major(&unfolded)
    };
    DenseTensor { shape, data }
}

pub fn hs_norm(t: &DenseTensor) -> f64 {
    t.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Mode-`mode` product `V ×_mode T`: every mode fiber of `T` is mapped by `V`.
///
/// A `1 × n` matrix contracts the mode away entirely, so the result has one
/// fewer mode (unless `T` is already a vector, in which case the result has
/// shape `[1]`).
pub fn mode_product(t: &DenseTensor, v: &DMatrix<f64>, mode: usize) -> Result<DenseTensor> {
    let m = t.order();
    if mode >= m {
        return Err(Error::shape(format!(
            "mode {mode} out of range for a tensor of order {m}"
        )));
    }
    let n = t.shape[mode];
    if v.ncols() != n {
        return Err(Error::shape(format!(
            "matrix has {} columns but mode {mode} has dimension {n}",
            v.ncols()
        )));
    }
    let p = v.nrows();
    if p == 0 {
        return Err(Error::shape("mode product with a matrix of zero rows"));
    }
    let outer: usize = t.shape[..mode].iter().product();
    let inner: usize = t.shape[mode + 1..].iter().product();
    let mut data = vec![0.0; outer * p * inner];
    for o in 0..outer {
        let src = &t.data[o * n * inner..(o + 1) * n * inner];
        let dst = &mut data[o * p * inner..(o + 1) * p * inner];
        for a in 0..p {
            let out_fiber = &mut dst[a * inner..(a + 1) * inner];
            for k in 0..n {
                let c = v[(a, k)];
                if c == 0.0 {
                    continue;
                }
                let in_fiber = &src[k * inner..(k + 1) * inner];
                for (d, s) in out_fiber.iter_mut().zip(in_fiber) {
                    *d += c * s;
                }
            }
        }
    }
    let mut shape = t.shape.clone();
    if p == 1 && m > 1 {
        shape.remove(mode);
    } else {
        shape[mode] = p;
    }
    Ok(DenseTensor { shape, data })
}

/// Column-wise Kronecker product. Row `a·p + b` of the result holds
/// `A[a, :] * B[b, :]` where `B` has `p` rows.
pub fn khatri_rao(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::shape(format!(
            "Khatri-Rao operands have {} and {} columns",
            a.ncols(),
            b.ncols()
        )));
    }
    let (k, p) = (a.nrows(), b.nrows());
    Ok(DMatrix::from_fn(k * p, a.ncols(), |row, col| {
        a[(row / p, col)] * b[(row % p, col)]
    }))
}

/// `M_0 ⊙ M_1 ⊙ … ⊙ M_{q-1}`, left-associated.
pub fn khatri_rao_chain(mats: &[&DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::shape("Khatri-Rao chain of zero matrices"))?;
    let mut acc = (*first).clone();
    for m in rest {
        acc = khatri_rao(&acc, m)?;
    }
    Ok(acc)
}

/// Mode-`mode` unfolding: an `n_mode × Π_{j≠mode} n_j` matrix whose columns
/// enumerate the remaining modes lexicographically, last mode fastest.
pub fn unfold(t: &DenseTensor, mode: usize) -> Result<DMatrix<f64>> {
    if mode >= t.order() {
        return Err(Error::shape(format!(
            "mode {mode} out of range for a tensor of order {}",
            t.order()
        )));
    }
    let n = t.shape[mode];
    let outer: usize = t.shape[..mode].iter().product();
    let inner: usize = t.shape[mode + 1..].iter().product();
    let mut out = DMatrix::zeros(n, outer * inner);
    for o in 0..outer {
        for i in 0..n {
            let base = (o * n + i) * inner;
            for c in 0..inner {
                out[(i, o * inner + c)] = t.data[base + c];
            }
        }
    }
    Ok(out)
}

/// Inverse of [`unfold`].
pub fn fold(mat: &DMatrix<f64>, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
    validate_shape(shape)?;
    if mode >= shape.len() {
        return Err(Error::shape(format!(
            "mode {mode} out of range for shape {shape:?}"
        )));
    }
    let n = shape[mode];
    let outer: usize = shape[..mode].iter().product();
    let inner: usize = shape[mode + 1..].iter().product();
    if mat.nrows() != n || mat.ncols() != outer * inner {
        return Err(Error::shape(format!(
            "a {}x{} matrix cannot be folded along mode {mode} into {shape:?}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let mut data = vec![0.0; n * outer * inner];
    for o in 0..outer {
        for i in 0..n {
            let base = (o * n + i) * inner;
            for c in 0..inner {
                data[base + c] = mat[(i, o * inner + c)];
            }
        }
    }
    Ok(DenseTensor {
        shape: shape.to_vec(),
        data,
    })
}

/// `‖T − X‖ / ‖T‖` where `X` is the reconstruction of `cp`. The denominator
/// is floored at the smallest positive normal so a zero `T` does not divide
/// by zero.
pub fn relative_residual(t: &DenseTensor, cp: &CpDecomposition) -> Result<f64> {
    if t.shape() != cp.shape().as_slice() {
        return Err(Error::shape(format!(
            "tensor shape {:?} differs from decomposition shape {:?}",
            t.shape(),
            cp.shape()
        )));
    }
    let recon = cp_to_tensor(cp);
    let diff: f64 = t
        .data
        .iter()
        .zip(&recon.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / hs_norm(t).max(f64::MIN_POSITIVE))
}

/// `v_{m-1}ᵀ ×_{m-1} ( … (v_0ᵀ ×_0 T))`: the multilinear form of `T`
/// evaluated at one vector per mode.
pub fn multilinear_form(t: &DenseTensor, vectors: &[&[f64]]) -> Result<f64> {
    if vectors.len() != t.order() {
        return Err(Error::shape(format!(
            "{} vectors for a tensor of order {}",
            vectors.len(),
            t.order()
        )));
    }
    // contract the last mode first so the remaining mode indices stay valid
    let mut cur = t.clone();
    for (mode, v) in vectors.iter().enumerate().rev() {
        let row = DMatrix::from_row_slice(1, v.len(), v);
        cur = mode_product(&cur, &row, mode)?;
    }
    Ok(cur.data[0])
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        out.extend(m.row(i).iter());
    }
    out
}
