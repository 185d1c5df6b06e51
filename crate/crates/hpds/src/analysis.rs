//! System-theoretic tests on tensor-based HPDS models: stability
//! classification through the odeco coefficients, the tensor Kalman-type
//! controllability rank test, the state-dependent observability rank test,
//! and checks that both matrices project correctly onto a reduced model
//! (`R_red = V^T R` and `O_red(z) = O(x) V` for exact reductions).

use itertools::Itertools;

use crate::decompose::{odeco_decompose, ordered_svd};
use crate::error::{Error, Result};
use crate::reduction::{ReducedModel, EXACT_REDUCTION_TOL};
use crate::system::InputOutputHpds;
use crate::tensor::{kron, kron_power, kron_power_vec, DenseMatrix, DenseTensor, DenseVector};

/// Relative singular-value threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Components of the initial state below this magnitude count as zero in
/// stability classification (the strict sign test is not robust at
/// round-off scale).
pub const ALPHA_ZERO_TOL: f64 = 1e-12;

/// Count of singular values above `rank_tol * sigma_max`.
pub fn numerical_rank(m: &DenseMatrix, rank_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * smax).count()
}

/// Orthonormal basis of the column space (sign-fixed, deterministic).
fn column_space_basis(m: &DenseMatrix, rank_tol: f64) -> DenseMatrix {
    let (u, sigma) = ordered_svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 { 0 } else { sigma.iter().filter(|&&s| s > rank_tol * smax).count() };
    u.columns(0, rank).into_owned()
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Stable,
    AsymptoticallyStable,
    Unstable,
}

/// Stability classification of an odeco HPDS at a given initial state.
///
/// With `x0 = sum_j alpha_j u_j` over the decomposition's eigenvectors, the
/// signs of `lambda_j alpha_j^{k-2}` decide the verdict: all negative is
/// asymptotically stable, any positive is unstable, and zeros (including
/// components treated as zero below [`ALPHA_ZERO_TOL`]) downgrade to stable.
#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `lambda_j * alpha_j^{k-2}` (zeroed where `|alpha_j|` is negligible).
    pub terms: Vec<f64>,
    pub classification: StabilityClass,
    /// All decomposition coefficients nonzero, so the origin is the only
    /// equilibrium.
    pub origin_unique: bool,
    /// Indices whose terms were treated as zero because of a negligible
    /// `alpha_j`.
    pub zeroed_terms: Vec<usize>,
}

pub fn stability_classify(
    a: &DenseTensor,
    x0: &DenseVector,
    odeco_tol: f64,
) -> Result<StabilityVerdict> {
    let n = a.cubical_dim()?;
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, tensor dimension is {n}",
            x0.len()
        )));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let k = a.order();
    let deco = odeco_decompose(a, odeco_tol)?;
    let alphas: Vec<f64> = (deco.u.transpose() * x0).iter().copied().collect();
    let mut terms = Vec::with_capacity(n);
    let mut zeroed = Vec::new();
    for (j, (&l, &alpha)) in deco.lambdas.iter().zip(&alphas).enumerate() {
        if alpha.abs() <= ALPHA_ZERO_TOL {
            zeroed.push(j);
            terms.push(0.0);
        } else {
            terms.push(l * alpha.powi(k as i32 - 2));
        }
    }
    let classification = if terms.iter().any(|&t| t > 0.0) {
        StabilityClass::Unstable
    } else if terms.iter().all(|&t| t < 0.0) {
        StabilityClass::AsymptoticallyStable
    } else {
        StabilityClass::Stable
    };
    let origin_unique = deco.lambdas.iter().all(|&l| l != 0.0);
    Ok(StabilityVerdict {
        lambdas: deco.lambdas,
        alphas,
        terms,
        classification,
        origin_unique,
        zeroed_terms: zeroed,
    })
}

// ---------------------------------------------------------------------------
// Controllability
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ControllabilityOpts {
    /// Levels beyond `M_0 = B`; `None` runs the full `n - 1`.
    pub max_level: Option<usize>,
    /// Hard cap on total generated columns.
    pub column_cap: usize,
    pub rank_tol: f64,
    /// Stop once the rank reaches `n` or stops growing.
    pub early_stop: bool,
}

impl Default for ControllabilityOpts {
    fn default() -> Self {
        Self { max_level: None, column_cap: 50_000, rank_tol: DEFAULT_RANK_TOL, early_stop: true }
    }
}

/// Controllability matrix `R = [M_0 M_1 ...]` and its rank.
#[derive(Debug, Clone)]
pub struct ControllabilityResult {
    pub matrix: DenseMatrix,
    /// Levels generated beyond `M_0`.
    pub levels_used: usize,
    pub rank: usize,
    pub rank_tol: f64,
    /// Full rank `n` with even tensor order.
    pub is_strongly_controllable: bool,
    /// Set when the column cap cut generation short; the rank refers to the
    /// partial matrix.
    pub truncated_by_cap: bool,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc.checked_mul(n.checked_sub(i)?)?;
        acc /= i + 1;
    }
    Some(acc)
}

fn contract_with(a: &DenseTensor, vectors: &[&DenseVector]) -> Result<DenseVector> {
    let mut t = a.mode_mul_vector(0, vectors[0])?;
    for v in &vectors[1..] {
        t = t.mode_mul_vector(0, v)?;
    }
    Ok(DenseVector::from_column_slice(t.data()))
}

fn controllability_with_bases(
    a: &DenseTensor,
    b: &DenseMatrix,
    opts: &ControllabilityOpts,
) -> Result<(ControllabilityResult, Vec<DenseMatrix>)> {
    let n = a.cubical_dim()?;
    let k = a.order();
    if k < 2 {
        return Err(Error::InvalidShape("dynamic tensor must have order >= 2".into()));
    }
    if b.nrows() != n || b.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "input matrix is {}x{}, expected {n} rows and at least one column",
            b.nrows(),
            b.ncols()
        )));
    }
    let max_level = opts.max_level.unwrap_or_else(|| n.saturating_sub(1));

    let mut columns: Vec<DenseVector> =
        (0..b.ncols()).map(|j| DenseVector::from_column_slice(b.column(j).as_slice())).collect();
    let assemble = |cols: &[DenseVector]| DenseMatrix::from_columns(cols);

    let mut rank = numerical_rank(&assemble(&columns), opts.rank_tol);
    let mut bases_used: Vec<DenseMatrix> = Vec::new();
    let mut truncated = false;
    let mut levels_used = 0;

    for _level in 1..=max_level {
        if opts.early_stop && rank >= n {
            break;
        }
        let q = column_space_basis(&assemble(&columns), opts.rank_tol);
        let q_cols = q.ncols();
        if q_cols == 0 {
            break;
        }
        let new_cols = binomial(q_cols + k - 2, k - 1).unwrap_or(usize::MAX);
        if columns.len().saturating_add(new_cols) > opts.column_cap {
            truncated = true;
            break;
        }
        let basis_vectors: Vec<DenseVector> =
            (0..q_cols).map(|j| DenseVector::from_column_slice(q.column(j).as_slice())).collect();
        for combo in (0..q_cols).combinations_with_replacement(k - 1) {
            let picks: Vec<&DenseVector> = combo.iter().map(|&i| &basis_vectors[i]).collect();
            columns.push(contract_with(a, &picks)?);
        }
        bases_used.push(q);
        levels_used += 1;
        let new_rank = numerical_rank(&assemble(&columns), opts.rank_tol);
        let stagnated = new_rank == rank;
        rank = new_rank;
        if opts.early_stop && (rank >= n || stagnated) {
            break;
        }
    }

    let matrix = assemble(&columns);
    let result = ControllabilityResult {
        levels_used,
        rank,
        rank_tol: opts.rank_tol,
        is_strongly_controllable: rank == n && k.is_multiple_of(2),
        truncated_by_cap: truncated,
        matrix,
    };
    Ok((result, bases_used))
}

/// Controllability matrix per the tensor Kalman-type rank test: `M_0 = B`,
/// and level `j` stacks `A x_0 v_1 x_1 ... x_{k-2} v_{k-1}` over all
/// multisets of columns of an orthonormal basis of `col([M_0 .. M_{j-1}])`
/// (multilinearity plus symmetry in the contracted modes makes multisets
/// span-equivalent to the full column-space sweep).
pub fn controllability_matrix(
    a: &DenseTensor,
    b: &DenseMatrix,
    opts: &ControllabilityOpts,
) -> Result<ControllabilityResult> {
    Ok(controllability_with_bases(a, b, opts)?.0)
}

/// Full-rank test for strong controllability; odd tensor order is a
/// precondition violation (only accessibility is certified there).
pub fn is_strongly_controllable(
    a: &DenseTensor,
    b: &DenseMatrix,
    opts: &ControllabilityOpts,
) -> Result<bool> {
    if !a.order().is_multiple_of(2) {
        return Err(Error::OddOrderControllability { order: a.order() });
    }
    let n = a.cubical_dim()?;
    Ok(controllability_matrix(a, b, opts)?.rank == n)
}

// ---------------------------------------------------------------------------
// Observability
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ObservabilityOpts {
    /// Levels beyond `P_0 = C`; `None` runs the full `n - 1`.
    pub max_level: Option<usize>,
    /// Entry-count budget for the Kronecker-structured intermediates.
    pub size_cap: usize,
    pub rank_tol: f64,
    pub early_stop: bool,
}

impl Default for ObservabilityOpts {
    fn default() -> Self {
        Self {
            max_level: None,
            size_cap: 100_000_000,
            rank_tol: DEFAULT_RANK_TOL,
            early_stop: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservabilityVerdict {
    Observable,
    NotObservable,
    /// The size cap (or a user level limit) stopped the computation before
    /// the rank was decided.
    Inconclusive,
}

/// Stacked state-dependent observability matrix `O(x) = [P_0; P_1; ...]`.
#[derive(Debug, Clone)]
pub struct ObservabilityResult {
    pub matrix: DenseMatrix,
    pub x: DenseVector,
    /// Levels computed beyond `P_0`.
    pub levels_used: usize,
    pub rank: usize,
    pub rank_tol: f64,
    pub observable: bool,
    pub inconclusive: bool,
}

impl ObservabilityResult {
    pub fn verdict(&self) -> ObservabilityVerdict {
        if self.observable {
            ObservabilityVerdict::Observable
        } else if self.inconclusive {
            ObservabilityVerdict::Inconclusive
        } else {
            ObservabilityVerdict::NotObservable
        }
    }
}

/// `sum_q x^[q-1] (x) I_n (x) x^[top-q]`, an `n^top x n` matrix.
fn state_kron_sum(x: &DenseVector, top: usize) -> DenseMatrix {
    let n = x.len();
    let rows = n.pow(top as u32);
    let identity = DenseMatrix::identity(n, n);
    let mut acc = DenseMatrix::zeros(rows, n);
    for q in 1..=top {
        let left = kron_power_vec(x, q - 1);
        let right = kron_power_vec(x, top - q);
        acc += kron(&kron(&left, &identity), &right);
    }
    acc
}

/// `sum_i I_n^[i-1] (x) A_(k) (x) I_n^[m-i]` with `m = (j-1)(k-2)+1`,
/// mapping level `j` tails to level `j - 1` tails.
fn transition_block(a_k: &DenseMatrix, n: usize, k: usize, j: usize) -> DenseMatrix {
    let m = (j - 1) * (k - 2) + 1;
    let rows = n.pow(m as u32);
    let cols = n.pow((m + k - 2) as u32);
    let mut acc = DenseMatrix::zeros(rows, cols);
    for i in 1..=m {
        let left = kron_power(&DenseMatrix::identity(n, n), i - 1);
        let right = kron_power(&DenseMatrix::identity(n, n), m - i);
        acc += kron(&kron(&left, a_k), &right);
    }
    acc
}

fn level_entry_budget(n: usize, k: usize, l: usize, j: usize) -> Option<usize> {
    let top = j.checked_mul(k - 2)?.checked_add(1)?;
    let tail = n.checked_pow(u32::try_from(top).ok()?)?;
    let sum_entries = tail.checked_mul(n)?;
    let g_entries = l.checked_mul(tail)?;
    let f_entries = if j >= 2 {
        let m = (j - 1) * (k - 2) + 1;
        let rows = n.checked_pow(u32::try_from(m).ok()?)?;
        rows.checked_mul(tail)?
    } else {
        0
    };
    sum_entries.max(g_entries).max(f_entries).into()
}

/// State-dependent observability matrix of an almost symmetric dynamic
/// tensor with linear output `C`. Builds `P_0 = C` and deeper blocks from
/// the mode-`k` unfolding chained through transition blocks; stops at full
/// rank, rank stagnation, the level limit, or the size cap (the last marks
/// the result inconclusive when the rank is still undecided).
pub fn observability_matrix(
    a: &DenseTensor,
    c: &DenseMatrix,
    x: &DenseVector,
    opts: &ObservabilityOpts,
) -> Result<ObservabilityResult> {
    let n = a.cubical_dim()?;
    let k = a.order();
    if k < 2 {
        return Err(Error::InvalidShape("dynamic tensor must have order >= 2".into()));
    }
    let dev = a.symmetry_deviation(k - 1)?;
    if dev > crate::decompose::DEFAULT_SYMMETRY_TOL {
        return Err(Error::NotAlmostSymmetric {
            max_dev: dev,
            tol: crate::decompose::DEFAULT_SYMMETRY_TOL,
        });
    }
    if c.ncols() != n || c.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "output matrix is {}x{}, expected {n} columns and at least one row",
            c.nrows(),
            c.ncols()
        )));
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "state has length {}, expected {n}",
            x.len()
        )));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let l = c.nrows();
    let max_level = opts.max_level.unwrap_or_else(|| n.saturating_sub(1));
    let a_k = a.unfold(k - 1)?;

    let mut blocks: Vec<DenseMatrix> = vec![c.clone()];
    let stack = |blocks: &[DenseMatrix]| -> DenseMatrix {
        let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut out = DenseMatrix::zeros(rows, n);
        let mut at = 0;
        for b in blocks {
            out.rows_mut(at, b.nrows()).copy_from(b);
            at += b.nrows();
        }
        out
    };

    let mut rank = numerical_rank(c, opts.rank_tol);
    let mut levels_used = 0;
    // once the running product C A_(k) F_2 ... F_j vanishes, every deeper
    // block is zero and stopping is conclusive
    let mut chain_dead = false;
    // running product kept as its l-row form
    let mut chain: Option<DenseMatrix> = None;

    for j in 1..=max_level {
        if opts.early_stop && rank >= n {
            break;
        }
        match level_entry_budget(n, k, l, j) {
            Some(budget) if budget <= opts.size_cap => {}
            _ => break,
        }
        let g = match chain.take() {
            None => c * &a_k,
            Some(prev) => prev * transition_block(&a_k, n, k, j),
        };
        let top = j * (k - 2) + 1;
        assert_eq!(g.ncols(), n.pow(top as u32), "transition chain dimension contract");
        let p_j = &g * state_kron_sum(x, top);
        assert_eq!((p_j.nrows(), p_j.ncols()), (l, n), "observability block contract");
        chain_dead = g.norm() == 0.0;
        chain = Some(g);
        blocks.push(p_j);
        levels_used = j;
        let new_rank = numerical_rank(&stack(&blocks), opts.rank_tol);
        let stagnated = new_rank == rank;
        rank = new_rank;
        if chain_dead || (opts.early_stop && (rank >= n || stagnated)) {
            break;
        }
    }

    let observable = rank >= n;
    // conclusive outcomes: full rank, a dead chain, or the full level count
    // of the rank test; a rank-stagnation stop alone proves nothing, since
    // a later block can still add rank
    let exhausted_fully = levels_used >= n.saturating_sub(1);
    let inconclusive = !observable && !chain_dead && !exhausted_fully;
    Ok(ObservabilityResult {
        matrix: stack(&blocks),
        x: x.clone(),
        levels_used,
        rank,
        rank_tol: opts.rank_tol,
        observable,
        inconclusive,
    })
}

/// Tri-state local weak observability test at `x`.
pub fn is_locally_weakly_observable(
    a: &DenseTensor,
    c: &DenseMatrix,
    x: &DenseVector,
    opts: &ObservabilityOpts,
) -> Result<ObservabilityVerdict> {
    Ok(observability_matrix(a, c, x, opts)?.verdict())
}

// ---------------------------------------------------------------------------
// Preservation under reduction
// ---------------------------------------------------------------------------

/// Residuals of the projection identities between a model and its
/// reduction. Equality holds for exact reductions; under truncation the
/// residuals are reported without any claim.
#[derive(Debug, Clone)]
pub struct PreservationCheck {
    /// `||R_red - V^T R||_F` when controllability was checked.
    pub residual_controllability: Option<f64>,
    /// `||O_red(z) - O(x) V||_F` when observability was checked.
    pub residual_observability: Option<f64>,
    pub exact_reduction: bool,
    pub rank_original: usize,
    pub rank_reduced: usize,
    pub levels_used: usize,
}

/// Rebuild the controllability recursion in the reduced space with bases
/// aligned to the full-space run (reduced basis = `V^T` applied to the full
/// basis, same multiset order) and compare against `V^T R`.
pub fn check_controllability_preservation(
    model: &InputOutputHpds,
    reduced: &ReducedModel,
    opts: &ControllabilityOpts,
) -> Result<PreservationCheck> {
    let b = model.input_matrix().ok_or(Error::InputMatrixAbsent)?;
    let a = model.dynamic_tensor();
    let k = model.order();
    let (full, bases) = controllability_with_bases(a, b, opts)?;

    let v = reduced.v();
    let a_red = reduced.model.dynamic_tensor();
    let b_red = reduced.model.input_matrix().ok_or(Error::InputMatrixAbsent)?;
    let mut red_cols: Vec<DenseVector> = (0..b_red.ncols())
        .map(|j| DenseVector::from_column_slice(b_red.column(j).as_slice()))
        .collect();
    for q in &bases {
        let projected: Vec<DenseVector> =
            (0..q.ncols()).map(|j| v.transpose() * q.column(j)).collect();
        for combo in (0..q.ncols()).combinations_with_replacement(k - 1) {
            let picks: Vec<&DenseVector> = combo.iter().map(|&i| &projected[i]).collect();
            red_cols.push(contract_with(a_red, &picks)?);
        }
    }
    let r_red = DenseMatrix::from_columns(&red_cols);
    let projected_full = v.transpose() * &full.matrix;
    debug_assert_eq!(r_red.shape(), projected_full.shape());
    let residual = (&r_red - projected_full).norm();

    Ok(PreservationCheck {
        residual_controllability: Some(residual),
        residual_observability: None,
        exact_reduction: reduced.shared.residual <= EXACT_REDUCTION_TOL,
        rank_original: full.rank,
        rank_reduced: numerical_rank(&r_red, opts.rank_tol),
        levels_used: full.levels_used,
    })
}

/// Compare `O_red(V^T x)` (computed at the same level count) against
/// `O(x) V`. Requires a symmetric dynamic tensor.
pub fn check_observability_preservation(
    model: &InputOutputHpds,
    reduced: &ReducedModel,
    x: &DenseVector,
    opts: &ObservabilityOpts,
) -> Result<PreservationCheck> {
    let c = model.output_matrix().ok_or(Error::OutputMatrixAbsent)?;
    let a = model.dynamic_tensor();
    let dev = a.symmetry_deviation(a.order())?;
    if dev > crate::decompose::DEFAULT_SYMMETRY_TOL {
        return Err(Error::NotSymmetric {
            max_dev: dev,
            tol: crate::decompose::DEFAULT_SYMMETRY_TOL,
        });
    }
    let full = observability_matrix(a, c, x, opts)?;

    let v = reduced.v();
    let z = v.transpose() * x;
    let c_red = reduced.model.output_matrix().ok_or(Error::OutputMatrixAbsent)?;
    let aligned = ObservabilityOpts {
        max_level: Some(full.levels_used),
        early_stop: false,
        ..opts.clone()
    };
    let red = observability_matrix(reduced.model.dynamic_tensor(), c_red, &z, &aligned)?;
    if red.levels_used != full.levels_used {
        return Err(Error::Numerical(
            "reduced observability computation could not match the full level count".into(),
        ));
    }
    let projected = &full.matrix * v;
    let residual = (&red.matrix - projected).norm();

    Ok(PreservationCheck {
        residual_controllability: None,
        residual_observability: Some(residual),
        exact_reduction: reduced.shared.residual <= EXACT_REDUCTION_TOL,
        rank_original: full.rank,
        rank_reduced: red.rank,
        levels_used: full.levels_used,
    })
}
