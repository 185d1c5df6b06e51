//! Dense multilinear algebra: tensor storage, unfolding, mode products,
//! outer and Kronecker products, symmetry predicates, norms.
//!
//! Tensors are stored flat in first-index-fastest (colexicographic) order,
//! so the mode-0 unfolding is a pure reshape of the data buffer. Modes are
//! zero-indexed throughout. Matrices and vectors are plain `nalgebra`
//! dynamic types.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type DenseVector = DVector<f64>;

/// Dense real tensor of arbitrary order.
///
/// Entry `(j_0, .., j_{k-1})` lives at linear index
/// `j_0 + n_0 * (j_1 + n_1 * (j_2 + ...))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    /// Build a tensor from its shape and flat data (first index fastest).
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("tensor order must be at least 1".into()));
        }
        let mut len = 1usize;
        for &d in &dims {
            if d == 0 {
                return Err(Error::InvalidShape(format!("zero-sized mode in dims {dims:?}")));
            }
            len = len
                .checked_mul(d)
                .ok_or_else(|| Error::InvalidShape(format!("dims {dims:?} overflow")))?;
        }
        if data.len() != len {
            return Err(Error::InvalidShape(format!(
                "data length {} does not match dims {:?} (expected {})",
                data.len(),
                dims,
                len
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims, vec![0.0; len])
    }

    /// Build entrywise from a function of the multi-index.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let mut idx = vec![0usize; t.order()];
        for l in 0..t.len() {
            t.data[l] = f(&idx);
            advance(&mut idx, &t.dims);
        }
        if !t.data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(t)
    }

    /// Cubical tensor with the given values on the main diagonal.
    pub fn diagonal(order: usize, diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        if order == 0 || n == 0 {
            return Err(Error::InvalidShape("diagonal tensor needs order >= 1, dim >= 1".into()));
        }
        let mut t = Self::zeros(vec![n; order])?;
        for (j, &v) in diag.iter().enumerate() {
            let idx = vec![j; order];
            t.set(&idx, v);
        }
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_cubical(&self) -> bool {
        self.dims.iter().all(|&d| d == self.dims[0])
    }

    /// Shared dimension of a cubical tensor.
    pub fn cubical_dim(&self) -> Result<usize> {
        if self.is_cubical() {
            Ok(self.dims[0])
        } else {
            Err(Error::NotCubical(self.dims.clone()))
        }
    }

    fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order());
        let mut l = 0;
        let mut stride = 1;
        for (i, &j) in idx.iter().enumerate() {
            debug_assert!(j < self.dims[i]);
            l += j * stride;
            stride *= self.dims[i];
        }
        l
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let l = self.linear_index(idx);
        self.data[l] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the sub-tensor obtained by pinning one index.
    pub fn slice_norm(&self, mode: usize, index: usize) -> Result<f64> {
        self.check_mode(mode)?;
        if index >= self.dims[mode] {
            return Err(Error::InvalidArgument(format!(
                "slice index {index} out of range for mode of size {}",
                self.dims[mode]
            )));
        }
        let mut acc = 0.0;
        let mut idx = vec![0usize; self.order()];
        for l in 0..self.len() {
            if idx[mode] == index {
                acc += self.data[l] * self.data[l];
            }
            advance(&mut idx, &self.dims);
        }
        Ok(acc.sqrt())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "cannot add tensors with dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Self {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            Err(Error::ModeOutOfRange { mode, order: self.order() })
        } else {
            Ok(())
        }
    }

    /// Mode-`p` unfolding: the `n_p x (prod of remaining dims)` matrix whose
    /// columns are the mode-`p` fibers, ordered colexicographically over the
    /// remaining indices (smallest remaining mode varies fastest).
    pub fn unfold(&self, mode: usize) -> Result<DenseMatrix> {
        self.check_mode(mode)?;
        let rows = self.dims[mode];
        let cols = self.len() / rows;
        if mode == 0 {
            // first index fastest: a straight reshape of the buffer
            return Ok(DenseMatrix::from_column_slice(rows, cols, &self.data));
        }
        // colexicographic strides over the remaining modes
        let mut cstride = vec![0usize; self.order()];
        let mut acc = 1usize;
        for (i, slot) in cstride.iter_mut().enumerate() {
            if i == mode {
                continue;
            }
            *slot = acc;
            acc *= self.dims[i];
        }
        let mut m = DenseMatrix::zeros(rows, cols);
        let mut idx = vec![0usize; self.order()];
        for l in 0..self.len() {
            let col: usize = idx
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != mode)
                .map(|(i, &j)| j * cstride[i])
                .sum();
            m[(idx[mode], col)] = self.data[l];
            advance(&mut idx, &self.dims);
        }
        Ok(m)
    }

    /// Mode-`p` product with a matrix: replaces `n_p` by `m.nrows()` and
    /// satisfies `unfold(result, p) = m * unfold(self, p)` exactly.
    pub fn mode_mul_matrix(&self, mode: usize, m: &DenseMatrix) -> Result<DenseTensor> {
        self.check_mode(mode)?;
        if m.ncols() != self.dims[mode] {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} product: matrix has {} columns, mode has size {}",
                m.ncols(),
                self.dims[mode]
            )));
        }
        let unfolded = self.unfold(mode)?;
        let product = m * unfolded;
        let mut dims = self.dims.clone();
        dims[mode] = m.nrows();
        fold(&product, mode, &dims)
    }

    /// Mode-`p` product with a vector; the order drops by one.
    pub fn mode_mul_vector(&self, mode: usize, v: &DenseVector) -> Result<DenseTensor> {
        self.check_mode(mode)?;
        if v.len() != self.dims[mode] {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} product: vector has length {}, mode has size {}",
                v.len(),
                self.dims[mode]
            )));
        }
        if self.order() == 1 {
            // scalar result, keep it as a 1-element order-1 tensor
            let s: f64 = self.data.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            return DenseTensor::new(vec![1], vec![s]);
        }
        let out_dims: Vec<usize> =
            self.dims.iter().enumerate().filter(|&(i, _)| i != mode).map(|(_, &d)| d).collect();
        let mut out = DenseTensor::zeros(out_dims)?;
        let mut cstride = vec![0usize; self.order()];
        let mut acc = 1usize;
        for (i, slot) in cstride.iter_mut().enumerate() {
            if i == mode {
                continue;
            }
            *slot = acc;
            acc *= self.dims[i];
        }
        let mut idx = vec![0usize; self.order()];
        for l in 0..self.len() {
            let out_l: usize = idx
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != mode)
                .map(|(i, &j)| j * cstride[i])
                .sum();
            out.data[out_l] += self.data[l] * v[idx[mode]];
            advance(&mut idx, &self.dims);
        }
        Ok(out)
    }

    /// Contract a cubical order-`k` tensor with the state along the first
    /// `k - 1` modes, returning the length-`n` vector field coefficient.
    pub fn contract_state(&self, x: &DenseVector) -> Result<DenseVector> {
        let n = self.cubical_dim()?;
        if self.order() < 2 {
            return Err(Error::InvalidShape(
                "state contraction needs a tensor of order at least 2".into(),
            ));
        }
        if x.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "state has length {}, tensor dimension is {n}",
                x.len()
            )));
        }
        let mut t = self.mode_mul_vector(0, x)?;
        while t.order() > 1 {
            t = t.mode_mul_vector(0, x)?;
        }
        Ok(DenseVector::from_column_slice(&t.data))
    }

    /// True iff entries are invariant (within `tol`, absolute) under every
    /// permutation of all indices.
    pub fn is_symmetric(&self, tol: f64) -> Result<bool> {
        Ok(self.symmetry_deviation(self.order())? <= tol)
    }

    /// True iff entries are invariant (within `tol`, absolute) under every
    /// permutation of the first `k - 1` indices.
    pub fn is_almost_symmetric(&self, tol: f64) -> Result<bool> {
        if self.order() == 1 {
            self.cubical_dim()?;
            return Ok(true);
        }
        Ok(self.symmetry_deviation(self.order() - 1)? <= tol)
    }

    /// Max deviation `|A[t] - A[perm(t)]|` over permutations of the first
    /// `modes` indices.
    pub fn symmetry_deviation(&self, modes: usize) -> Result<f64> {
        self.cubical_dim()?;
        let k = self.order();
        debug_assert!(modes <= k);
        let mut max_dev: f64 = 0.0;
        let mut idx = vec![0usize; k];
        let mut permuted = vec![0usize; k];
        for l in 0..self.len() {
            for perm in (0..modes).permutations(modes) {
                permuted.copy_from_slice(&idx);
                for (slot, &src) in perm.iter().enumerate() {
                    permuted[slot] = idx[src];
                }
                let dev = (self.data[l] - self.get(&permuted)).abs();
                max_dev = max_dev.max(dev);
            }
            advance(&mut idx, &self.dims);
        }
        Ok(max_dev)
    }

    /// Average over all permutations of the first `k - 1` indices. Every
    /// index orbit is filled with one shared value (computed in a canonical
    /// order, reusing the original value when the orbit is already
    /// constant), so the result is exactly almost symmetric, the map is
    /// exactly idempotent, and `contract_state` is unchanged up to
    /// round-off.
    pub fn symmetrize_first_modes(&self) -> Result<DenseTensor> {
        self.cubical_dim()?;
        let k = self.order();
        if k <= 2 {
            return Ok(self.clone());
        }
        let perms: Vec<Vec<usize>> = (0..k - 1).permutations(k - 1).collect();
        let mut out = DenseTensor::zeros(self.dims.clone())?;
        let mut idx = vec![0usize; k];
        let mut permuted = vec![0usize; k];
        for _ in 0..self.len() {
            // visit each orbit once, at its sorted-prefix representative
            if idx[..k - 1].windows(2).all(|w| w[0] <= w[1]) {
                let mut values = Vec::with_capacity(perms.len());
                let mut positions = Vec::with_capacity(perms.len());
                for perm in &perms {
                    permuted.copy_from_slice(&idx);
                    for (slot, &src) in perm.iter().enumerate() {
                        permuted[slot] = idx[src];
                    }
                    values.push(self.get(&permuted));
                    positions.push(self.linear_index(&permuted));
                }
                let first = values[0];
                let value = if values.iter().all(|v| v.to_bits() == first.to_bits()) {
                    first
                } else {
                    values.iter().sum::<f64>() / values.len() as f64
                };
                for &p in &positions {
                    out.data[p] = value;
                }
            }
            advance(&mut idx, &self.dims);
        }
        Ok(out)
    }
}

/// Odometer-style increment of a multi-index, first index fastest.
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) {
    for (j, &d) in idx.iter_mut().zip(dims) {
        *j += 1;
        if *j < d {
            return;
        }
        *j = 0;
    }
}

/// Inverse of [`DenseTensor::unfold`]: `unfold(fold(m, p, dims), p) == m`.
pub fn fold(m: &DenseMatrix, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
    if mode >= dims.len() {
        return Err(Error::ModeOutOfRange { mode, order: dims.len() });
    }
    let mut out = DenseTensor::zeros(dims.to_vec())?;
    let rest: usize = out.len() / dims[mode];
    if m.nrows() != dims[mode] || m.ncols() != rest {
        return Err(Error::InvalidShape(format!(
            "cannot fold a {}x{} matrix into dims {:?} along mode {mode}",
            m.nrows(),
            m.ncols(),
            dims
        )));
    }
    if mode == 0 {
        out.data.copy_from_slice(m.as_slice());
        return Ok(out);
    }
    let mut cstride = vec![0usize; dims.len()];
    let mut acc = 1usize;
    for i in 0..dims.len() {
        if i == mode {
            continue;
        }
        cstride[i] = acc;
        acc *= dims[i];
    }
    let mut idx = vec![0usize; dims.len()];
    for l in 0..out.len() {
        let col: usize = idx
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != mode)
            .map(|(i, &j)| j * cstride[i])
            .sum();
        out.data[l] = m[(idx[mode], col)];
        advance(&mut idx, dims);
    }
    Ok(out)
}

/// Outer product of a nonempty list of vectors; entry `(j_0..j_{k-1})` is
/// the product of the `j_p`-th components.
pub fn outer(vectors: &[DenseVector]) -> Result<DenseTensor> {
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("outer product of an empty list".into()));
    }
    let dims: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
    DenseTensor::from_fn(dims, |idx| {
        idx.iter().zip(vectors).map(|(&j, v)| v[j]).product()
    })
}

/// Symmetric outer power `v ∘ v ∘ ... ∘ v` (`k` factors).
pub fn outer_power(v: &DenseVector, k: usize) -> Result<DenseTensor> {
    outer(&vec![v.clone(); k])
}

/// Kronecker product (standard convention: last factor varies fastest).
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.kronecker(b)
}

/// Kronecker power `m^[q]`, with `m^[0]` the 1x1 identity.
pub fn kron_power(m: &DenseMatrix, q: usize) -> DenseMatrix {
    let mut out = DenseMatrix::identity(1, 1);
    for _ in 0..q {
        out = out.kronecker(m);
    }
    out
}

/// Kronecker power of a vector, as an `n^q x 1` matrix.
pub fn kron_power_vec(v: &DenseVector, q: usize) -> DenseMatrix {
    let m = DenseMatrix::from_column_slice(v.len(), 1, v.as_slice());
    kron_power(&m, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn random_tensor(dims: &[usize], seed: u64) -> DenseTensor {
        let mut r = rng(seed);
        let len = dims.iter().product();
        DenseTensor::new(dims.to_vec(), (0..len).map(|_| r.gen_range(-1.0..1.0)).collect())
            .unwrap()
    }

    fn random_vector(n: usize, seed: u64) -> DenseVector {
        let mut r = rng(seed);
        DenseVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0))
    }

    /// Independent unfolding oracle: places every entry by the explicit
    /// colexicographic column formula, one index tuple at a time.
    fn oracle_unfold(t: &DenseTensor, mode: usize) -> DenseMatrix {
        let k = t.order();
        let dims = t.dims();
        let rows = dims[mode];
        let cols: usize = dims.iter().enumerate().filter(|&(i, _)| i != mode).map(|(_, d)| d).product();
        let mut m = DenseMatrix::zeros(rows, cols);
        let mut idx = vec![0usize; k];
        loop {
            let mut col = 0usize;
            let mut stride = 1usize;
            for i in 0..k {
                if i == mode {
                    continue;
                }
                col += idx[i] * stride;
                stride *= dims[i];
            }
            m[(idx[mode], col)] = t.get(&idx);
            // manual odometer so the oracle shares no code with the impl
            let mut carry = 0;
            loop {
                idx[carry] += 1;
                if idx[carry] < dims[carry] {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
                if carry == k {
                    return m;
                }
            }
        }
    }

    /// Brute-force mode product straight from the summation definition.
    fn oracle_mode_mul(t: &DenseTensor, mode: usize, m: &DenseMatrix) -> DenseTensor {
        let mut dims = t.dims().to_vec();
        dims[mode] = m.nrows();
        DenseTensor::from_fn(dims, |out_idx| {
            let mut s = 0.0;
            for jp in 0..t.dims()[mode] {
                let mut src = out_idx.to_vec();
                src[mode] = jp;
                s += t.get(&src) * m[(out_idx[mode], jp)];
            }
            s
        })
        .unwrap()
    }

    #[test]
    fn new_validates_shape_and_data() {
        assert!(DenseTensor::new(vec![], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 0], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(DenseTensor::new(vec![2], vec![f64::NAN, 0.0]).is_err());
        assert!(DenseTensor::new(vec![usize::MAX, usize::MAX], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn unfold_single_entry_all_modes() {
        let mut t = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        t.set(&[0, 0, 0], 1.0);
        for mode in 0..3 {
            let m = t.unfold(mode).unwrap();
            assert_eq!((m.nrows(), m.ncols()), (2, 4));
            assert_eq!(m[(0, 0)], 1.0);
            assert_eq!(m.iter().map(|v| v.abs()).sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn unfold_mode_out_of_range() {
        let t = DenseTensor::zeros(vec![2, 2]).unwrap();
        assert!(matches!(t.unfold(2), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn unfold_rank_one_matches_kron_and_oracle() {
        let u = random_vector(2, 1);
        let v = random_vector(3, 2);
        let w = random_vector(4, 3);
        let t = outer(&[u.clone(), v.clone(), w.clone()]).unwrap();
        let unfolded = t.unfold(0).unwrap();
        // columns ordered with mode 1 fastest: u * (w (x) v)^T
        let wv = kron(
            &DenseMatrix::from_column_slice(4, 1, w.as_slice()),
            &DenseMatrix::from_column_slice(3, 1, v.as_slice()),
        );
        let expect = DenseMatrix::from_column_slice(2, 1, u.as_slice()) * wv.transpose();
        assert_relative_eq!(unfolded, expect, epsilon = 1e-14);
        for mode in 0..3 {
            assert_relative_eq!(t.unfold(mode).unwrap(), oracle_unfold(&t, mode), epsilon = 0.0);
        }
    }

    #[test]
    fn unfold_matches_oracle_on_randoms() {
        for (seed, dims) in [(7u64, vec![2, 3, 4]), (8, vec![3, 2]), (9, vec![2, 2, 3, 2])] {
            let t = random_tensor(&dims, seed);
            for mode in 0..dims.len() {
                assert_eq!(t.unfold(mode).unwrap(), oracle_unfold(&t, mode));
            }
        }
    }

    #[test]
    fn fold_inverts_unfold() {
        let t = random_tensor(&[2, 3, 4], 11);
        for mode in 0..3 {
            let m = t.unfold(mode).unwrap();
            let back = fold(&m, mode, t.dims()).unwrap();
            assert_eq!(back, t);
            // and the other composition
            assert_eq!(back.unfold(mode).unwrap(), m);
        }
    }

    #[test]
    fn fold_zero_and_scalar() {
        let z = fold(&DenseMatrix::zeros(2, 6), 1, &[3, 2, 2]).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        let s = fold(&DenseMatrix::from_element(1, 1, 5.0), 0, &[1, 1]).unwrap();
        assert_eq!(s.get(&[0, 0]), 5.0);
        assert!(fold(&DenseMatrix::zeros(2, 5), 1, &[3, 2, 2]).is_err());
    }

    #[test]
    fn mode_mul_identity_is_noop() {
        let t = random_tensor(&[2, 3, 2], 13);
        for mode in 0..3 {
            let m = DenseMatrix::identity(t.dims()[mode], t.dims()[mode]);
            assert_eq!(t.mode_mul_matrix(mode, &m).unwrap(), t);
        }
    }

    #[test]
    fn mode_mul_matches_summation_oracle() {
        let t = random_tensor(&[2, 3, 2], 17);
        let mut r = rng(18);
        let m = DenseMatrix::from_fn(4, 3, |_, _| r.gen_range(-1.0..1.0));
        let got = t.mode_mul_matrix(1, &m).unwrap();
        let want = oracle_mode_mul(&t, 1, &m);
        assert_eq!(got.dims(), &[2, 4, 2]);
        assert_relative_eq!(got.unfold(0).unwrap(), want.unfold(0).unwrap(), epsilon = 1e-13);
    }

    #[test]
    fn mode_mul_unfold_identity() {
        let t = random_tensor(&[3, 2, 4], 19);
        let mut r = rng(20);
        for mode in 0..3 {
            let m = DenseMatrix::from_fn(5, t.dims()[mode], |_, _| r.gen_range(-1.0..1.0));
            let prod = t.mode_mul_matrix(mode, &m).unwrap();
            let lhs = prod.unfold(mode).unwrap();
            let rhs = m.clone() * t.unfold(mode).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
        }
    }

    #[test]
    fn mode_products_commute_across_distinct_modes() {
        let t = random_tensor(&[3, 4, 2], 23);
        let mut r = rng(24);
        let m1 = DenseMatrix::from_fn(2, 3, |_, _| r.gen_range(-1.0..1.0));
        let m2 = DenseMatrix::from_fn(5, 4, |_, _| r.gen_range(-1.0..1.0));
        let a = t.mode_mul_matrix(0, &m1).unwrap().mode_mul_matrix(1, &m2).unwrap();
        let b = t.mode_mul_matrix(1, &m2).unwrap().mode_mul_matrix(0, &m1).unwrap();
        assert_relative_eq!(a.unfold(0).unwrap(), b.unfold(0).unwrap(), epsilon = 1e-13);
    }

    #[test]
    fn mode_mul_vector_extracts_basis_slice() {
        let t = random_tensor(&[2, 3, 4], 29);
        let e0 = DenseVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let s = t.mode_mul_vector(1, &e0).unwrap();
        assert_eq!(s.dims(), &[2, 4]);
        for i in 0..2 {
            for k in 0..4 {
                assert_eq!(s.get(&[i, k]), t.get(&[i, 0, k]));
            }
        }
    }

    #[test]
    fn mode_mul_vector_all_ones() {
        let t = DenseTensor::new(vec![2, 2, 2], vec![1.0; 8]).unwrap();
        let v = DenseVector::from_element(2, 1.0);
        let s = t.mode_mul_vector(0, &v).unwrap();
        assert_eq!(s.dims(), &[2, 2]);
        assert!(s.data().iter().all(|&x| x == 2.0));
    }

    #[test]
    fn mode_mul_vector_matches_oracle() {
        let t = random_tensor(&[3, 2, 4], 31);
        let v = random_vector(2, 32);
        let got = t.mode_mul_vector(1, &v).unwrap();
        let want = DenseTensor::from_fn(vec![3, 4], |idx| {
            (0..2).map(|j| t.get(&[idx[0], j, idx[1]]) * v[j]).sum()
        })
        .unwrap();
        assert_relative_eq!(got.unfold(0).unwrap(), want.unfold(0).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn contract_state_diagonal() {
        let t = DenseTensor::diagonal(4, &[3.0, -2.0]).unwrap();
        let x = DenseVector::from_column_slice(&[2.0, 0.5]);
        let f = t.contract_state(&x).unwrap();
        assert_relative_eq!(f[0], 3.0 * 8.0, epsilon = 1e-14);
        assert_relative_eq!(f[1], -2.0 * 0.125, epsilon = 1e-14);
    }

    #[test]
    fn contract_state_basis_vector_picks_column() {
        let t = random_tensor(&[3, 3, 3], 37);
        let e0 = DenseVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let f = t.contract_state(&e0).unwrap();
        for i in 0..3 {
            assert_eq!(f[i], t.get(&[0, 0, i]));
        }
    }

    #[test]
    fn contract_state_rejects_order_one_and_non_cubical() {
        let t = DenseTensor::new(vec![2], vec![1.0, 2.0]).unwrap();
        assert!(t.contract_state(&DenseVector::from_column_slice(&[1.0, 1.0])).is_err());
        let t = random_tensor(&[2, 3], 41);
        assert!(matches!(
            t.contract_state(&DenseVector::zeros(2)),
            Err(Error::NotCubical(_))
        ));
    }

    #[test]
    fn contract_state_is_multilinear() {
        // expand A(au + bv)^2 = a^2 Auu + ab (Auv + Avu) + b^2 Avv for k = 3
        let t = random_tensor(&[3, 3, 3], 43);
        let u = random_vector(3, 44);
        let v = random_vector(3, 45);
        let (a, b) = (0.7, -1.3);
        let x = DenseVector::from_fn(3, |i, _| a * u[i] + b * v[i]);
        let lhs = t.contract_state(&x).unwrap();
        let term = |p: &DenseVector, q: &DenseVector| {
            t.mode_mul_vector(0, p).unwrap().mode_mul_vector(0, q).unwrap()
        };
        let mut rhs = DenseVector::zeros(3);
        for (w, ta) in [
            (a * a, term(&u, &u)),
            (a * b, term(&u, &v)),
            (a * b, term(&v, &u)),
            (b * b, term(&v, &v)),
        ] {
            rhs += w * DenseVector::from_column_slice(ta.data());
        }
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn outer_basis_vectors() {
        let e0 = DenseVector::from_column_slice(&[1.0, 0.0]);
        let t = outer(&[e0.clone(), e0.clone(), e0]).unwrap();
        assert_eq!(t.get(&[0, 0, 0]), 1.0);
        assert_eq!(t.frobenius_norm(), 1.0);
    }

    #[test]
    fn outer_norm_is_product_of_norms() {
        let u = random_vector(4, 47);
        let v = random_vector(3, 48);
        let t = outer(&[u.clone(), v.clone()]).unwrap();
        assert_relative_eq!(t.frobenius_norm(), u.norm() * v.norm(), epsilon = 1e-13);
    }

    #[test]
    fn outer_sum_reconstructs_diagonal() {
        let lambdas = [2.0, -1.0, 0.5];
        let mut acc = DenseTensor::zeros(vec![3, 3, 3]).unwrap();
        for (j, &l) in lambdas.iter().enumerate() {
            let mut e = DenseVector::zeros(3);
            e[j] = 1.0;
            acc = acc.add(&outer_power(&e, 3).unwrap().scale(l)).unwrap();
        }
        assert_eq!(acc, DenseTensor::diagonal(3, &lambdas).unwrap());
    }

    #[test]
    fn kron_power_conventions() {
        let x = DenseVector::from_column_slice(&[1.0, 2.0]);
        assert_eq!(kron_power_vec(&x, 0), DenseMatrix::identity(1, 1));
        let x2 = kron_power_vec(&x, 2);
        assert_eq!(x2.as_slice(), &[1.0, 2.0, 2.0, 4.0]);
        let i8 = kron_power(&DenseMatrix::identity(2, 2), 3);
        assert_eq!(i8, DenseMatrix::identity(8, 8));
    }

    #[test]
    fn symmetry_predicates() {
        let d = DenseTensor::diagonal(3, &[1.0, 2.0]).unwrap();
        assert!(d.is_symmetric(0.0).unwrap());
        assert!(d.is_almost_symmetric(0.0).unwrap());

        // A_{121} = A_{211} = 1 (1-based): almost symmetric but A_{112} = 0
        let mut t = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        t.set(&[0, 1, 0], 1.0);
        t.set(&[1, 0, 0], 1.0);
        assert!(t.is_almost_symmetric(0.0).unwrap());
        assert!(!t.is_symmetric(0.0).unwrap());

        let nc = DenseTensor::zeros(vec![2, 3]).unwrap();
        assert!(nc.is_symmetric(0.0).is_err());
    }

    #[test]
    fn symmetrize_first_modes_properties() {
        let t = random_tensor(&[3, 3, 3, 3], 53);
        let s = t.symmetrize_first_modes().unwrap();
        assert!(s.is_almost_symmetric(0.0).unwrap());
        // idempotent
        assert_eq!(s.symmetrize_first_modes().unwrap(), s);
        // pairwise means for k = 3
        let t3 = random_tensor(&[2, 2, 2], 54);
        let s3 = t3.symmetrize_first_modes().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mean = 0.5 * (t3.get(&[i, j, k]) + t3.get(&[j, i, k]));
                    assert_relative_eq!(s3.get(&[i, j, k]), mean, epsilon = 1e-15);
                }
            }
        }
        // already almost symmetric: unchanged
        let again = s.symmetrize_first_modes().unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn symmetrize_preserves_state_contraction() {
        for seed in 0..20u64 {
            let t = random_tensor(&[3, 3, 3, 3], 100 + seed);
            let s = t.symmetrize_first_modes().unwrap();
            let x = random_vector(3, 200 + seed);
            let a = t.contract_state(&x).unwrap();
            let b = s.contract_state(&x).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn frobenius_norm_basics() {
        assert_eq!(DenseTensor::zeros(vec![2, 2]).unwrap().frobenius_norm(), 0.0);
        let mut t = DenseTensor::zeros(vec![2, 3, 2]).unwrap();
        t.set(&[1, 2, 0], 3.0);
        assert_eq!(t.frobenius_norm(), 3.0);
        let r = random_tensor(&[2, 3, 4], 55);
        for mode in 0..3 {
            assert_relative_eq!(
                r.frobenius_norm(),
                r.unfold(mode).unwrap().norm(),
                epsilon = 1e-13
            );
        }
    }
}
