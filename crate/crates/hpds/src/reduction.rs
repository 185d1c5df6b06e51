//! HOSVD-based model order reduction of input-output HPDS models.
//!
//! The dynamic tensor's shared-factor compact HOSVD
//! `A = S_red x_0 V ... x_{k-2} V x_{k-1} V_k` yields the reduced model
//!
//! ```text
//! A_red = S_red x_{k-1} (V^T V_k),   B_red = V^T B,   C_red = C V
//! ```
//!
//! over the latent state `z = V^T x`.

use crate::decompose::{shared_factor_compact_hosvd, SharedCompactHosvd};
pub use crate::decompose::Truncation;
use crate::error::{Error, Result};
use crate::system::{param_count, InputOutputHpds};
use crate::tensor::{DenseMatrix, DenseVector};

/// Residual below which a reduction counts as exact.
pub const EXACT_REDUCTION_TOL: f64 = 1e-10;

/// Reduced model together with the projection basis that produced it.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    /// The reduced input-output HPDS over dimension `r`.
    pub model: InputOutputHpds,
    /// The underlying shared-factor decomposition (`V`, `V_k`, core, spectra).
    pub shared: SharedCompactHosvd,
    pub r: usize,
}

impl ReducedModel {
    /// Projection basis `V` (`n x r`, orthonormal columns).
    pub fn v(&self) -> &DenseMatrix {
        &self.shared.v
    }
}

/// Summary of one reduction run.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub r: usize,
    pub r_k: usize,
    /// Mode-0 singular values of the dynamic tensor (descending, length `n`);
    /// the first `r` are retained.
    pub sigma: Vec<f64>,
    /// Last-mode singular values; the first `r_k` are retained.
    pub sigma_last: Vec<f64>,
    /// Relative Frobenius truncation residual of the dynamic tensor.
    pub residual: f64,
    pub exact: bool,
    pub params_before: u128,
    pub params_after: u128,
}

/// HOSVD-based reduction of an input-output HPDS.
///
/// The reduced dynamic tensor is re-symmetrized over its contracted modes
/// (a no-op for exact reductions, where truncation discards nothing).
pub fn reduce(
    model: &InputOutputHpds,
    criterion: &Truncation,
) -> Result<(ReducedModel, ReductionReport)> {
    let a = model.dynamic_tensor();
    let k = model.order();
    let n = model.state_dim();
    let shared = shared_factor_compact_hosvd(a, criterion)?;

    let coupling = shared.v.transpose() * &shared.v_k; // r x r_k
    let a_red = shared
        .core
        .mode_mul_matrix(k - 1, &coupling)?
        .symmetrize_first_modes()?;

    let b_red = model.input_matrix().map(|b| shared.v.transpose() * b);
    let c_red = model.output_matrix().map(|c| c * &shared.v);
    let reduced = InputOutputHpds::new(a_red, b_red, c_red)?;

    let report = ReductionReport {
        r: shared.r,
        r_k: shared.r_k,
        sigma: shared.sigma.clone(),
        sigma_last: shared.sigma_last.clone(),
        residual: shared.residual,
        exact: shared.residual <= EXACT_REDUCTION_TOL,
        params_before: param_count(n, k, model.input_dim(), model.output_dim()),
        params_after: param_count(shared.r, k, model.input_dim(), model.output_dim()),
    };
    let r = shared.r;
    Ok((ReducedModel { model: reduced, shared, r }, report))
}

/// Latent state `z = V^T x`.
pub fn project_state(v: &DenseMatrix, x: &DenseVector) -> Result<DenseVector> {
    if x.len() != v.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "state has length {}, basis has {} rows",
            x.len(),
            v.nrows()
        )));
    }
    Ok(v.transpose() * x)
}

/// Lifted state `x_hat = V z`.
pub fn lift_state(v: &DenseMatrix, z: &DenseVector) -> Result<DenseVector> {
    if z.len() != v.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "latent state has length {}, basis has {} columns",
            z.len(),
            v.ncols()
        )));
    }
    Ok(v * z)
}

/// Relative Frobenius distance between the dynamic tensor and the
/// reconstruction through the reduction's factors.
pub fn reduction_residual(model: &InputOutputHpds, reduced: &ReducedModel) -> Result<f64> {
    let a = model.dynamic_tensor();
    let back = reduced.shared.reconstruct()?;
    Ok(back.sub(a)?.frobenius_norm() / a.frobenius_norm())
}
