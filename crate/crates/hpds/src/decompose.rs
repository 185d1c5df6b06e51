//! Higher-order singular value decomposition (full, compact, and
//! shared-factor compact for almost symmetric tensors), Z-eigenpair
//! computation via the shifted symmetric higher-order power method, and
//! orthogonal (odeco) decomposition of symmetric tensors.
//!
//! All factor matrices follow a fixed sign convention (largest-magnitude
//! entry of each column is positive, ties broken by lowest index) and a
//! deterministic ordering under repeated singular values, so decompositions
//! are bitwise reproducible.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, DenseTensor, DenseVector};

/// Absolute tolerance for symmetry predicates on inputs.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-10;
/// Relative singular-value cutoff: keep sigma > tol * sigma_max.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-8;
/// Relative off-diagonal core mass below which a core counts as diagonal.
pub const DEFAULT_ODECO_TOL: f64 = 1e-8;

/// Truncation rule with a single shared rank (first `k - 1` modes).
#[derive(Debug, Clone, PartialEq)]
pub enum Truncation {
    /// Keep singular values `sigma > tol * sigma_max`.
    Tolerance(f64),
    /// Keep exactly this many leading columns.
    Rank(usize),
}

/// Per-mode truncation rule for [`compact_hosvd`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModeTruncation {
    Tolerance(f64),
    Ranks(Vec<usize>),
}

/// Full or truncated Tucker factorization with orthonormal factors.
#[derive(Debug, Clone)]
pub struct HosvdFactors {
    /// Core tensor `S = A x_0 U_0^T x_1 ... x_{k-1} U_{k-1}^T`.
    pub core: DenseTensor,
    /// Orthonormal factor per mode (`n_p x n_p` full, `n_p x r_p` truncated).
    pub factors: Vec<DenseMatrix>,
    /// Per-mode singular values of the unfoldings, descending, padded with
    /// zeros to the mode size (full lists even for truncated factorizations).
    pub mode_singular_values: Vec<Vec<f64>>,
}

impl HosvdFactors {
    /// Multiply the core back through every factor.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let mut t = self.core.clone();
        for (mode, u) in self.factors.iter().enumerate() {
            t = t.mode_mul_matrix(mode, u)?;
        }
        Ok(t)
    }
}

/// Compact HOSVD of an almost symmetric tensor with one factor `V` shared by
/// the first `k - 1` modes and a separate factor `V_k` for the last mode.
#[derive(Debug, Clone)]
pub struct SharedCompactHosvd {
    /// Reduced core, shape `r x ... x r x r_k`.
    pub core: DenseTensor,
    /// Shared factor for the first `k - 1` modes, `n x r`.
    pub v: DenseMatrix,
    /// Last-mode factor, `n x r_k`.
    pub v_k: DenseMatrix,
    /// Mode-0 singular values, descending, full length `n`.
    pub sigma: Vec<f64>,
    /// Last-mode singular values, descending, full length `n`.
    pub sigma_last: Vec<f64>,
    pub r: usize,
    pub r_k: usize,
    /// Relative Frobenius reconstruction residual.
    pub residual: f64,
}

impl SharedCompactHosvd {
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let k = self.core.order();
        let mut t = self.core.clone();
        for mode in 0..k - 1 {
            t = t.mode_mul_matrix(mode, &self.v)?;
        }
        t.mode_mul_matrix(k - 1, &self.v_k)
    }
}

/// A Z-eigenpair `(lambda, u)` with `A u^{k-1} = lambda u`, `||u|| = 1`.
#[derive(Debug, Clone)]
pub struct ZEigenpair {
    pub lambda: f64,
    pub vector: DenseVector,
    /// `||A u^{k-1} - lambda u||_2` at the returned pair.
    pub residual: f64,
}

/// Options for the multi-start shifted power iteration.
#[derive(Debug, Clone)]
pub struct ZEigOpts {
    /// Number of deterministic seeded starting vectors.
    pub starts: usize,
    pub max_iter: usize,
    /// Residual acceptance threshold.
    pub tol: f64,
    /// Shift magnitude; `None` picks one from a spectral-norm bound.
    pub shift: Option<f64>,
    /// Seed for the starting vectors.
    pub seed: u64,
}

impl Default for ZEigOpts {
    fn default() -> Self {
        Self { starts: 32, max_iter: 20_000, tol: 1e-8, shift: None, seed: 0 }
    }
}

/// Orthogonal decomposition `A = sum_j lambda_j u_j ∘ ... ∘ u_j` of a
/// symmetric tensor, with orthonormal `u_j` (zero `lambda_j` allowed).
#[derive(Debug, Clone)]
pub struct OdecoDecomposition {
    /// Length-`n` coefficient list; entries beyond the tensor's multilinear
    /// rank are exactly zero.
    pub lambdas: Vec<f64>,
    /// Orthogonal `n x n` matrix whose columns are the `u_j`.
    pub u: DenseMatrix,
}

impl OdecoDecomposition {
    /// Rebuild the order-`k` tensor from the decomposition.
    pub fn reconstruct(&self, k: usize) -> Result<DenseTensor> {
        let n = self.u.nrows();
        let mut acc = DenseTensor::zeros(vec![n; k])?;
        for (j, &l) in self.lambdas.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let col = DenseVector::from_column_slice(self.u.column(j).as_slice());
            acc = acc.add(&crate::tensor::outer_power(&col, k)?.scale(l))?;
        }
        Ok(acc)
    }
}

/// Thin SVD with descending singular values, the crate sign convention
/// applied to each left singular vector, and lexicographic stabilization of
/// columns that share a singular value.
pub(crate) fn ordered_svd(m: &DenseMatrix) -> (DenseMatrix, Vec<f64>) {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut cols: Vec<(f64, Vec<f64>)> = sigma
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let mut col: Vec<f64> = u.column(j).iter().copied().collect();
            fix_sign(&mut col);
            (s, col)
        })
        .collect();
    // descending sigma; exact ties ordered lexicographically by vector
    cols.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then_with(|| {
            a.1.iter().zip(&b.1).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let rows = m.nrows();
    let out = DenseMatrix::from_fn(rows, cols.len(), |i, j| cols[j].1[i]);
    (out, cols.into_iter().map(|(s, _)| s).collect())
}

/// Flip a vector so its largest-magnitude entry (lowest index on ties) is
/// positive.
fn fix_sign(col: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        for v in col.iter_mut() {
            *v = -*v;
        }
    }
}

/// Extend a matrix with orthonormal columns to a full orthogonal basis by
/// greedily appending the standard basis vector with the largest residual
/// (deterministic; appended columns get the sign convention).
pub(crate) fn complete_basis(u: &DenseMatrix) -> DenseMatrix {
    let n = u.nrows();
    let mut cols: Vec<DVector<f64>> =
        (0..u.ncols()).map(|j| DVector::from_column_slice(u.column(j).as_slice())).collect();
    while cols.len() < n {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            for q in &cols {
                let d = q.dot(&e);
                e -= q * d;
            }
            let norm = e.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, e));
            }
        }
        let (norm, mut e) = best.expect("n > 0");
        debug_assert!(norm > 1e-8, "complement residual collapsed");
        e /= norm;
        // re-orthogonalize once for numerical hygiene
        for q in &cols {
            let d = q.dot(&e);
            e -= q * d;
        }
        e /= e.norm();
        let mut raw: Vec<f64> = e.iter().copied().collect();
        fix_sign(&mut raw);
        cols.push(DVector::from_column_slice(&raw));
    }
    DenseMatrix::from_fn(n, n, |i, j| cols[j][i])
}

fn full_factor(unfolding: &DenseMatrix) -> (DenseMatrix, Vec<f64>) {
    let (u, mut sigma) = ordered_svd(unfolding);
    let n = unfolding.nrows();
    sigma.resize(n, 0.0);
    let u = if u.ncols() < n { complete_basis(&u) } else { u };
    (u, sigma)
}

/// Full HOSVD: factors are the (sign-fixed) left singular vector matrices of
/// the mode unfoldings, and the core is the input multiplied by their
/// transposes.
pub fn hosvd(a: &DenseTensor) -> Result<HosvdFactors> {
    if a.frobenius_norm() == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let k = a.order();
    let mut factors = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    for mode in 0..k {
        let (u, sigma) = full_factor(&a.unfold(mode)?);
        factors.push(u);
        sigmas.push(sigma);
    }
    let mut core = a.clone();
    for (mode, u) in factors.iter().enumerate() {
        core = core.mode_mul_matrix(mode, &u.transpose())?;
    }
    Ok(HosvdFactors { core, factors, mode_singular_values: sigmas })
}

/// Singular values of the mode-`p` unfolding, descending, padded with zeros
/// to the mode size.
pub fn mode_singular_values(a: &DenseTensor, mode: usize) -> Result<Vec<f64>> {
    let unfolding = a.unfold(mode)?;
    let (_, mut sigma) = ordered_svd(&unfolding);
    sigma.resize(a.dims()[mode], 0.0);
    Ok(sigma)
}

fn rank_from_tol(sigma: &[f64], tol: f64) -> usize {
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    sigma.iter().filter(|&&s| s > tol * sigma_max).count()
}

/// Truncated HOSVD. Returns the factorization and its relative
/// reconstruction residual.
pub fn compact_hosvd(a: &DenseTensor, criterion: &ModeTruncation) -> Result<(HosvdFactors, f64)> {
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let k = a.order();
    let mut factors = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    for mode in 0..k {
        let n_p = a.dims()[mode];
        let (u, sigma) = full_factor(&a.unfold(mode)?);
        let r_p = match criterion {
            ModeTruncation::Tolerance(tol) => {
                if *tol < 0.0 {
                    return Err(Error::InvalidArgument("truncation tolerance must be >= 0".into()));
                }
                let r = rank_from_tol(&sigma, *tol);
                if r == 0 {
                    return Err(Error::InvalidArgument(
                        "truncation tolerance discards every singular value".into(),
                    ));
                }
                r
            }
            ModeTruncation::Ranks(ranks) => {
                if ranks.len() != k {
                    return Err(Error::InvalidArgument(format!(
                        "expected {k} mode ranks, got {}",
                        ranks.len()
                    )));
                }
                let r = ranks[mode];
                if r == 0 || r > n_p {
                    return Err(Error::RankOutOfRange { rank: r, max: n_p });
                }
                r
            }
        };
        factors.push(u.columns(0, r_p).into_owned());
        sigmas.push(sigma);
    }
    let mut core = a.clone();
    for (mode, u) in factors.iter().enumerate() {
        core = core.mode_mul_matrix(mode, &u.transpose())?;
    }
    let out = HosvdFactors { core, factors, mode_singular_values: sigmas };
    let residual = out.reconstruct()?.sub(a)?.frobenius_norm() / norm;
    Ok((out, residual))
}

/// Compact HOSVD of an almost symmetric tensor sharing one factor across the
/// first `k - 1` modes (their unfoldings coincide exactly), with a separate
/// last-mode factor. For symmetric inputs whose last-mode subspace matches,
/// the shared factor is reused for the last mode so that `V_k == V` holds as
/// a matrix identity.
pub fn shared_factor_compact_hosvd(
    a: &DenseTensor,
    criterion: &Truncation,
) -> Result<SharedCompactHosvd> {
    let k = a.order();
    if k < 2 {
        return Err(Error::InvalidShape("shared-factor HOSVD needs order >= 2".into()));
    }
    let n = a.cubical_dim()?;
    let dev = a.symmetry_deviation(k - 1)?;
    if dev > DEFAULT_SYMMETRY_TOL {
        return Err(Error::NotAlmostSymmetric { max_dev: dev, tol: DEFAULT_SYMMETRY_TOL });
    }
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroTensor);
    }

    let (u1, mut sigma) = ordered_svd(&a.unfold(0)?);
    sigma.resize(n, 0.0);
    let r = match criterion {
        Truncation::Tolerance(tol) => {
            if *tol < 0.0 {
                return Err(Error::InvalidArgument("truncation tolerance must be >= 0".into()));
            }
            rank_from_tol(&sigma, *tol)
        }
        Truncation::Rank(r) => {
            if *r == 0 || *r > n {
                return Err(Error::RankOutOfRange { rank: *r, max: n });
            }
            *r
        }
    };
    if r == 0 {
        return Err(Error::InvalidArgument(
            "truncation tolerance discards every singular value".into(),
        ));
    }

    let (uk, mut sigma_last) = ordered_svd(&a.unfold(k - 1)?);
    sigma_last.resize(n, 0.0);
    let last_tol = match criterion {
        Truncation::Tolerance(tol) => *tol,
        Truncation::Rank(_) => DEFAULT_TRUNCATION_TOL,
    };
    let mut r_k = rank_from_tol(&sigma_last, last_tol).max(1);
    if matches!(criterion, Truncation::Rank(_)) && a.is_symmetric(DEFAULT_SYMMETRY_TOL)? {
        r_k = r_k.min(r);
    }

    let v = u1.columns(0, r).into_owned();
    let mut v_k = uk.columns(0, r_k).into_owned();
    if r_k == r {
        let projector_gap = (&v_k * v_k.transpose() - &v * v.transpose()).norm();
        if projector_gap <= DEFAULT_SYMMETRY_TOL {
            v_k = v.clone();
        }
    }

    let mut core = a.clone();
    for mode in 0..k - 1 {
        core = core.mode_mul_matrix(mode, &v.transpose())?;
    }
    core = core.mode_mul_matrix(k - 1, &v_k.transpose())?;

    let out = SharedCompactHosvd {
        core,
        v,
        v_k,
        sigma,
        sigma_last,
        r,
        r_k,
        residual: 0.0,
    };
    let residual = out.reconstruct()?.sub(a)?.frobenius_norm() / norm;
    Ok(SharedCompactHosvd { residual, ..out })
}

fn normalize_or_basis(mut v: DenseVector) -> DenseVector {
    let n = v.norm();
    if n > 0.0 {
        v /= n;
        v
    } else {
        let mut e = DenseVector::zeros(v.len());
        e[0] = 1.0;
        e
    }
}

/// Shifted symmetric higher-order power iteration from one start; returns a
/// converged eigenpair candidate if the residual meets `tol`.
fn shopm(
    a: &DenseTensor,
    original: &DenseTensor,
    shift: f64,
    start: &DenseVector,
    opts: &ZEigOpts,
) -> Option<ZEigenpair> {
    let mut x = start.clone();
    for _ in 0..opts.max_iter {
        let g = a.contract_state(&x).ok()?;
        let next = normalize_or_basis(g + shift * &x);
        let step = (&next - &x).amax();
        x = next;
        if step < 1e-13 {
            break;
        }
    }
    let g = original.contract_state(&x).ok()?;
    let lambda = x.dot(&g);
    let residual = (&g - lambda * &x).norm();
    if residual <= opts.tol && lambda.is_finite() {
        Some(ZEigenpair { lambda, vector: x, residual })
    } else {
        None
    }
}

/// Best-effort Z-eigenpair search for a symmetric cubical tensor of order at
/// least 3, using the shifted symmetric higher-order power method from
/// deterministic seeded starts (both shift signs, so local maxima and minima
/// of the homogeneous form are reachable). Duplicates (same `lambda` within
/// 1e-6, same vector up to sign) are merged; no completeness claim is made.
pub fn z_eigenpairs(a: &DenseTensor, opts: &ZEigOpts) -> Result<Vec<ZEigenpair>> {
    let n = a.cubical_dim()?;
    let k = a.order();
    if k < 3 {
        return Err(Error::InvalidArgument("Z-eigenpairs need tensor order >= 3".into()));
    }
    let dev = a.symmetry_deviation(k)?;
    if dev > DEFAULT_SYMMETRY_TOL {
        return Err(Error::NotSymmetric { max_dev: dev, tol: DEFAULT_SYMMETRY_TOL });
    }
    if a.frobenius_norm() == 0.0 {
        return Ok(Vec::new());
    }

    // scale-invariant shift above the convexity bound (k-1) * max spectral
    // radius of the contracted Hessian, itself bounded by sigma_max
    let sigma_max = mode_singular_values(a, 0)?[0];
    let shift = opts.shift.map(f64::abs).unwrap_or((k - 1) as f64 * sigma_max * 1.000001);
    let negated = a.scale(-1.0);

    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let starts: Vec<DenseVector> = (0..opts.starts.max(1))
        .map(|_| {
            normalize_or_basis(DenseVector::from_fn(n, |_, _| {
                StandardNormal.sample(&mut rng)
            }))
        })
        .collect();

    let mut candidates: Vec<ZEigenpair> = starts
        .par_iter()
        .flat_map_iter(|start| {
            let pos = shopm(a, a, shift, start, opts);
            let neg = shopm(&negated, a, shift, start, opts);
            pos.into_iter().chain(neg)
        })
        .collect();

    // canonical vector sign for even order (u and -u carry the same lambda)
    if k.is_multiple_of(2) {
        for c in &mut candidates {
            let mut raw: Vec<f64> = c.vector.iter().copied().collect();
            fix_sign(&mut raw);
            c.vector = DenseVector::from_column_slice(&raw);
        }
    }
    candidates.sort_by(|p, q| {
        q.lambda.total_cmp(&p.lambda).then_with(|| {
            p.vector
                .iter()
                .zip(q.vector.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });

    let mut merged: Vec<ZEigenpair> = Vec::new();
    for c in candidates {
        let dup = merged.iter_mut().find(|m| {
            (m.lambda - c.lambda).abs() <= 1e-6
                && ((&m.vector - &c.vector).norm() <= 1e-6 || (&m.vector + &c.vector).norm() <= 1e-6)
        });
        match dup {
            Some(m) => {
                if c.residual < m.residual {
                    *m = c;
                }
            }
            None => merged.push(c),
        }
    }
    if merged.is_empty() {
        log::warn!(
            "no Z-eigenpair converged from {} starts (shift {:.3e}, tol {:.1e})",
            opts.starts,
            shift,
            opts.tol
        );
    }
    Ok(merged)
}

/// Orthogonal decomposition of a symmetric tensor via the shared compact
/// HOSVD: succeeds when the reduced core is diagonal within `tol` (relative
/// off-diagonal Frobenius mass). The returned coefficients are the core
/// diagonal, padded with exact zeros for the appended basis columns; the
/// coefficients are Z-eigenvalues of the tensor with the basis columns as
/// eigenvectors.
pub fn odeco_decompose(a: &DenseTensor, tol: f64) -> Result<OdecoDecomposition> {
    let n = a.cubical_dim()?;
    let k = a.order();
    let dev = a.symmetry_deviation(k)?;
    if dev > DEFAULT_SYMMETRY_TOL {
        return Err(Error::NotSymmetric { max_dev: dev, tol: DEFAULT_SYMMETRY_TOL });
    }
    if a.frobenius_norm() == 0.0 {
        return Ok(OdecoDecomposition { lambdas: vec![0.0; n], u: DenseMatrix::identity(n, n) });
    }
    let shared = shared_factor_compact_hosvd(a, &Truncation::Tolerance(DEFAULT_TRUNCATION_TOL))?;
    let core = &shared.core;
    let core_norm = core.frobenius_norm();
    let mut off_sq = 0.0;
    let mut idx = vec![0usize; k];
    for l in 0..core.len() {
        if !idx[1..].iter().all(|&j| j == idx[0]) {
            let v = core.data()[l];
            off_sq += v * v;
        }
        crate::tensor::advance(&mut idx, core.dims());
    }
    let off_mass = off_sq.sqrt() / core_norm;
    if off_mass > tol {
        return Err(Error::NotOdeco { mass: off_mass, tol });
    }
    let mut lambdas: Vec<f64> = (0..shared.r).map(|j| core.get(&vec![j; k])).collect();
    lambdas.resize(n, 0.0);
    let u = complete_basis(&shared.v);
    Ok(OdecoDecomposition { lambdas, u })
}

/// Whether a symmetric tensor is orthogonally decomposable at tolerance
/// `tol`; precondition failures (non-symmetric input) still error.
pub fn is_odeco(a: &DenseTensor, tol: f64) -> Result<bool> {
    match odeco_decompose(a, tol) {
        Ok(_) => Ok(true),
        Err(Error::NotOdeco { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}
