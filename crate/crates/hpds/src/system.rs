//! The tensor-based system model: a degree `k - 1` homogeneous polynomial
//! vector field `A x^{k-1}` with optional linear input `B u` and linear
//! output `C x`, fixed-step simulation, and homogenization of general
//! polynomial systems into this form.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, DenseTensor, DenseVector};

/// Default norm threshold at which a simulation declares finite-time
/// blow-up instead of erroring (escape in finite time is an expected
/// outcome for unstable homogeneous systems).
pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e6;

/// Input-output HPDS `x' = A x^{k-1} + B u`, `y = C x`, carried by an
/// order-`k` almost symmetric dynamic tensor. `B` and `C` are optional so
/// autonomous and output-only systems share the type.
#[derive(Debug, Clone)]
pub struct InputOutputHpds {
    a: DenseTensor,
    b: Option<DenseMatrix>,
    c: Option<DenseMatrix>,
}

impl InputOutputHpds {
    pub fn new(a: DenseTensor, b: Option<DenseMatrix>, c: Option<DenseMatrix>) -> Result<Self> {
        let n = a.cubical_dim()?;
        if a.order() < 2 {
            return Err(Error::InvalidShape("dynamic tensor must have order >= 2".into()));
        }
        let dev = a.symmetry_deviation(a.order() - 1)?;
        if dev > crate::decompose::DEFAULT_SYMMETRY_TOL {
            return Err(Error::NotAlmostSymmetric {
                max_dev: dev,
                tol: crate::decompose::DEFAULT_SYMMETRY_TOL,
            });
        }
        if let Some(b) = &b {
            if b.nrows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "input matrix has {} rows, state dimension is {n}",
                    b.nrows()
                )));
            }
            if !b.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        if let Some(c) = &c {
            if c.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "output matrix has {} columns, state dimension is {n}",
                    c.ncols()
                )));
            }
            if !c.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { a, b, c })
    }

    pub fn dynamic_tensor(&self) -> &DenseTensor {
        &self.a
    }

    pub fn input_matrix(&self) -> Option<&DenseMatrix> {
        self.b.as_ref()
    }

    pub fn output_matrix(&self) -> Option<&DenseMatrix> {
        self.c.as_ref()
    }

    /// State dimension `n`.
    pub fn state_dim(&self) -> usize {
        self.a.dims()[0]
    }

    /// Tensor order `k` (the vector field has degree `k - 1`).
    pub fn order(&self) -> usize {
        self.a.order()
    }

    /// Input dimension `m` (0 without an input matrix).
    pub fn input_dim(&self) -> usize {
        self.b.as_ref().map_or(0, |b| b.ncols())
    }

    /// Output dimension `l` (0 without an output matrix).
    pub fn output_dim(&self) -> usize {
        self.c.as_ref().map_or(0, |c| c.nrows())
    }

    /// Right-hand side `A x^{k-1} + B u`. Passing an input to a model
    /// without an input matrix is an error; `None` means zero input.
    pub fn vector_field(&self, x: &DenseVector, u: Option<&DenseVector>) -> Result<DenseVector> {
        let mut f = self.a.contract_state(x)?;
        if let Some(u) = u {
            let b = self.b.as_ref().ok_or(Error::InputMatrixAbsent)?;
            if u.len() != b.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "input has length {}, input matrix has {} columns",
                    u.len(),
                    b.ncols()
                )));
            }
            f += b * u;
        }
        Ok(f)
    }

    /// Output map `y = C x`.
    pub fn output(&self, x: &DenseVector) -> Result<DenseVector> {
        let c = self.c.as_ref().ok_or(Error::OutputMatrixAbsent)?;
        if x.len() != c.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "state has length {}, output matrix has {} columns",
                x.len(),
                c.ncols()
            )));
        }
        Ok(c * x)
    }

    /// Fixed-step integration of the vector field. Integration stops with a
    /// recorded blow-up time when the state norm exceeds the divergence
    /// bound; a non-finite state that appears without tripping the bound is
    /// a numerical error.
    pub fn simulate(
        &self,
        x0: &DenseVector,
        u: &ControlSignal,
        t_span: (f64, f64),
        dt: f64,
        opts: &SimOptions,
    ) -> Result<Trajectory> {
        let n = self.state_dim();
        if x0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "initial state has length {}, state dimension is {n}",
                x0.len()
            )));
        }
        if dt.is_nan() || dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidArgument("step size must be positive and finite".into()));
        }
        let (t0, t1) = t_span;
        if t1.is_nan() || t0.is_nan() || t1 <= t0 {
            return Err(Error::InvalidArgument("time span must be nonempty".into()));
        }
        if !x0.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }

        let m = self.input_dim();
        let eval_u = |t: f64| -> Result<Option<DenseVector>> {
            if m == 0 {
                return Ok(None);
            }
            let v = u.eval(t, m)?;
            Ok(Some(v))
        };
        let field = |t: f64, x: &DenseVector| -> Result<DenseVector> {
            let uv = eval_u(t)?;
            let f = self.vector_field(x, uv.as_ref())?;
            if !f.iter().all(|v| v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite vector field at t = {t}")));
            }
            Ok(f)
        };

        let mut times = vec![t0];
        let mut states = vec![x0.clone()];
        let mut diverged_at = None;

        // a stage state past the bound means the step escapes; evaluating
        // the polynomial field there would overflow long before the
        // post-step check runs
        let stage_escapes = |v: &DenseVector| -> bool {
            !v.iter().all(|x| x.is_finite()) || v.norm() > opts.divergence_bound
        };

        let total = t1 - t0;
        let n_steps = (total / dt).ceil().max(1.0) as usize;
        'steps: for step in 0..n_steps {
            let t = t0 + step as f64 * dt;
            let h = (t1 - t).min(dt);
            if h <= 0.0 {
                break;
            }
            let t_next = if step + 1 == n_steps { t1 } else { t + h };
            let x = states.last().expect("nonempty").clone();
            let next = match opts.method {
                Integrator::Rk4 => {
                    let k1 = field(t, &x)?;
                    let s1 = &x + (0.5 * h) * &k1;
                    if stage_escapes(&s1) {
                        diverged_at = Some(t_next);
                        break 'steps;
                    }
                    let k2 = field(t + 0.5 * h, &s1)?;
                    let s2 = &x + (0.5 * h) * &k2;
                    if stage_escapes(&s2) {
                        diverged_at = Some(t_next);
                        break 'steps;
                    }
                    let k3 = field(t + 0.5 * h, &s2)?;
                    let s3 = &x + h * &k3;
                    if stage_escapes(&s3) {
                        diverged_at = Some(t_next);
                        break 'steps;
                    }
                    let k4 = field(t + h, &s3)?;
                    x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                }
                Integrator::Euler => {
                    let k1 = field(t, &x)?;
                    x + h * k1
                }
            };
            if !next.iter().all(|v| v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite state at t = {t_next}")));
            }
            times.push(t_next);
            states.push(next);
            if states.last().expect("nonempty").norm() > opts.divergence_bound {
                diverged_at = Some(t_next);
                break;
            }
        }

        let outputs = match &self.c {
            Some(_) => {
                let mut ys = Vec::with_capacity(states.len());
                for x in &states {
                    ys.push(self.output(x)?);
                }
                Some(ys)
            }
            None => None,
        };
        Ok(Trajectory { times, states, outputs, diverged_at })
    }
}

/// Fixed-step integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    Euler,
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub method: Integrator,
    pub divergence_bound: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { method: Integrator::Rk4, divergence_bound: DEFAULT_DIVERGENCE_BOUND }
    }
}

/// Control input `u(t)`.
#[derive(Clone)]
pub enum ControlSignal {
    Zero,
    Constant(DenseVector),
    /// `(t_i, u_i)` table, constant between breakpoints; zero before the
    /// first breakpoint.
    PiecewiseConstant(Vec<(f64, DenseVector)>),
    /// Arbitrary evaluation contract `t -> u(t)`.
    Custom(Arc<dyn Fn(f64) -> DenseVector + Send + Sync>),
}

impl std::fmt::Debug for ControlSignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ControlSignal::Zero => write!(f, "Zero"),
            ControlSignal::Constant(u) => write!(f, "Constant({u:?})"),
            ControlSignal::PiecewiseConstant(t) => write!(f, "PiecewiseConstant({} rows)", t.len()),
            ControlSignal::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl ControlSignal {
    /// Evaluate at time `t`; the result must have dimension `m`.
    pub fn eval(&self, t: f64, m: usize) -> Result<DenseVector> {
        let v = match self {
            ControlSignal::Zero => DenseVector::zeros(m),
            ControlSignal::Constant(u) => u.clone(),
            ControlSignal::PiecewiseConstant(table) => table
                .iter()
                .rev()
                .find(|(ti, _)| *ti <= t)
                .map(|(_, u)| u.clone())
                .unwrap_or_else(|| DenseVector::zeros(m)),
            ControlSignal::Custom(f) => f(t),
        };
        if v.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "control signal has dimension {}, expected {m}",
                v.len()
            )));
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite control input at t = {t}")));
        }
        Ok(v)
    }
}

/// Simulation record: strictly increasing times, one state per time, and
/// outputs when the model has an output matrix.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DenseVector>,
    pub outputs: Option<Vec<DenseVector>>,
    /// Set when the divergence bound tripped; later times are not recorded.
    pub diverged_at: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DenseVector {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

/// One monomial block of a polynomial vector field: an order `d + 1`
/// coefficient tensor whose first `d` modes are contracted with the state.
#[derive(Debug, Clone)]
pub struct PolyTerm {
    degree: usize,
    coeffs: DenseTensor,
}

impl PolyTerm {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &DenseTensor {
        &self.coeffs
    }
}

/// Polynomial dynamical system `x' = sum_d T_d x^d` over `n` states,
/// normalized so every coefficient tensor is symmetric in its contracted
/// modes.
#[derive(Debug, Clone)]
pub struct PolynomialSystem {
    n: usize,
    terms: Vec<PolyTerm>,
}

impl PolynomialSystem {
    pub fn new(n: usize, terms: Vec<(usize, DenseTensor)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidShape("state dimension must be positive".into()));
        }
        let mut out = Vec::with_capacity(terms.len());
        for (degree, t) in terms {
            if t.order() != degree + 1 {
                return Err(Error::InvalidShape(format!(
                    "degree-{degree} term needs an order-{} tensor, got order {}",
                    degree + 1,
                    t.order()
                )));
            }
            if t.dims().iter().any(|&d| d != n) {
                return Err(Error::DimensionMismatch(format!(
                    "term dims {:?} do not match state dimension {n}",
                    t.dims()
                )));
            }
            let coeffs = if degree >= 2 { t.symmetrize_first_modes()? } else { t };
            out.push(PolyTerm { degree, coeffs });
        }
        Ok(Self { n, terms: out })
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PolyTerm] {
        &self.terms
    }

    /// Evaluate the polynomial vector field.
    pub fn vector_field(&self, x: &DenseVector) -> Result<DenseVector> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "state has length {}, system dimension is {}",
                x.len(),
                self.n
            )));
        }
        let mut f = DenseVector::zeros(self.n);
        for term in &self.terms {
            if term.degree == 0 {
                f += DenseVector::from_column_slice(term.coeffs.data());
            } else {
                let mut t = term.coeffs.mode_mul_vector(0, x)?;
                while t.order() > 1 {
                    t = t.mode_mul_vector(0, x)?;
                }
                f += DenseVector::from_column_slice(t.data());
            }
        }
        Ok(f)
    }

    /// Lift to a homogeneous system of the given degree by appending an
    /// auxiliary state with `x_{n+1}' = 0`: a degree-`d` term is multiplied
    /// by `x_{n+1}^{target - d}`, and the lifted tensor is symmetrized over
    /// its contracted modes. On the slice `x_{n+1} = 1` the first `n`
    /// components of the homogenized field equal the original field.
    pub fn homogenize(&self, target_degree: usize) -> Result<InputOutputHpds> {
        if target_degree < 1 {
            return Err(Error::InvalidArgument("target degree must be at least 1".into()));
        }
        if let Some(term) = self.terms.iter().find(|t| t.degree > target_degree) {
            return Err(Error::InvalidArgument(format!(
                "target degree {target_degree} is below a term of degree {}",
                term.degree
            )));
        }
        let n = self.n;
        let aux = n; // index of the appended state
        let k = target_degree + 1;
        let mut lifted = DenseTensor::zeros(vec![n + 1; k])?;
        let mut idx_out = vec![0usize; k];
        for term in &self.terms {
            let d = term.degree;
            let t = &term.coeffs;
            let mut idx = vec![0usize; d + 1];
            for _ in 0..t.len() {
                let v = t.get(&idx);
                if v != 0.0 {
                    // first d slots from the term, padding slots on the
                    // auxiliary index, output index last
                    idx_out[..d].copy_from_slice(&idx[..d]);
                    for slot in idx_out.iter_mut().take(k - 1).skip(d) {
                        *slot = aux;
                    }
                    idx_out[k - 1] = idx[d];
                    lifted.set(&idx_out, lifted.get(&idx_out) + v);
                }
                // odometer
                let mut pos = 0;
                loop {
                    idx[pos] += 1;
                    if idx[pos] < n {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                    if pos == d + 1 {
                        break;
                    }
                }
            }
        }
        let sym = lifted.symmetrize_first_modes()?;
        InputOutputHpds::new(sym, None, None)
    }
}

/// Total parameter count `n^k + n m + n l` of an input-output HPDS.
pub fn param_count(n: usize, k: usize, m: usize, l: usize) -> u128 {
    let n = n as u128;
    n.checked_pow(k as u32).unwrap_or(u128::MAX).saturating_add(n * m as u128)
        .saturating_add(n * l as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn cubic_scalar(coeff: f64) -> InputOutputHpds {
        let a = DenseTensor::new(vec![1, 1, 1, 1], vec![coeff]).unwrap();
        InputOutputHpds::new(a, None, None).unwrap()
    }

    #[test]
    fn vector_field_zero_state() {
        let a = DenseTensor::diagonal(4, &[1.0, -1.0, 0.5]).unwrap();
        let sys = InputOutputHpds::new(a, None, None).unwrap();
        let f = sys.vector_field(&DenseVector::zeros(3), None).unwrap();
        assert_eq!(f.norm(), 0.0);
    }

    #[test]
    fn vector_field_scalar_cubic() {
        let sys = cubic_scalar(-1.0);
        for x in [-2.0, -0.5, 0.0, 1.5] {
            let f = sys.vector_field(&DenseVector::from_element(1, x), None).unwrap();
            assert_relative_eq!(f[0], -x * x * x, epsilon = 1e-14);
        }
    }

    #[test]
    fn vector_field_diagonal_reduced_system() {
        let a = DenseTensor::diagonal(4, &[-8.2880, -3.2248, -9.7615]).unwrap();
        let sys = InputOutputHpds::new(a, None, None).unwrap();
        let mut e0 = DenseVector::zeros(3);
        e0[0] = 1.0;
        let f = sys.vector_field(&e0, None).unwrap();
        assert_relative_eq!(f[0], -8.2880, epsilon = 1e-12);
        assert_relative_eq!(f[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(f[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn input_term_and_errors() {
        let a = DenseTensor::diagonal(3, &[1.0, 1.0]).unwrap();
        let b = DenseMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let sys = InputOutputHpds::new(a.clone(), Some(b), None).unwrap();
        let x = DenseVector::zeros(2);
        let u = DenseVector::from_element(1, 3.0);
        let f = sys.vector_field(&x, Some(&u)).unwrap();
        assert_eq!(f.as_slice(), &[3.0, 6.0]);

        let no_input = InputOutputHpds::new(a, None, None).unwrap();
        assert!(matches!(no_input.vector_field(&x, Some(&u)), Err(Error::InputMatrixAbsent)));
    }

    #[test]
    fn output_map() {
        let a = DenseTensor::diagonal(3, &[1.0, 1.0]).unwrap();
        let x = DenseVector::from_column_slice(&[1.5, -2.0]);

        let id = InputOutputHpds::new(a.clone(), None, Some(DenseMatrix::identity(2, 2))).unwrap();
        assert_eq!(id.output(&x).unwrap(), x);

        let zero = InputOutputHpds::new(a.clone(), None, Some(DenseMatrix::zeros(2, 2))).unwrap();
        assert_eq!(zero.output(&x).unwrap().norm(), 0.0);

        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let c = DenseMatrix::from_fn(3, 2, |_, _| rng.gen_range(-1.0..1.0));
        let sys = InputOutputHpds::new(a.clone(), None, Some(c.clone())).unwrap();
        let y = sys.output(&x).unwrap();
        for i in 0..3 {
            let oracle: f64 = (0..2).map(|j| c[(i, j)] * x[j]).sum();
            assert_relative_eq!(y[i], oracle, epsilon = 1e-14);
        }

        let none = InputOutputHpds::new(a, None, None).unwrap();
        assert!(matches!(none.output(&x), Err(Error::OutputMatrixAbsent)));
    }

    #[test]
    fn model_validation() {
        // not almost symmetric
        let mut t = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        t.set(&[0, 1, 0], 1.0);
        assert!(matches!(
            InputOutputHpds::new(t, None, None),
            Err(Error::NotAlmostSymmetric { .. })
        ));
        // input matrix row mismatch
        let a = DenseTensor::diagonal(3, &[1.0, 1.0]).unwrap();
        assert!(InputOutputHpds::new(a, Some(DenseMatrix::zeros(3, 1)), None).is_err());
    }

    #[test]
    fn simulate_cubic_decay_matches_closed_form() {
        // x' = -x^3, x(0) = 1 has x(t) = 1/sqrt(1 + 2t)
        let sys = cubic_scalar(-1.0);
        let x0 = DenseVector::from_element(1, 1.0);
        let traj = sys
            .simulate(&x0, &ControlSignal::Zero, (0.0, 4.0), 1e-3, &SimOptions::default())
            .unwrap();
        assert!(traj.diverged_at.is_none());
        assert_relative_eq!(*traj.times.last().unwrap(), 4.0, epsilon = 1e-12);
        let exact = 1.0 / 3.0;
        assert!((traj.final_state()[0] - exact).abs() <= 1e-6);
    }

    #[test]
    fn rk4_error_shrinks_at_fourth_order() {
        // measured above the round-off floor
        let sys = cubic_scalar(-1.0);
        let x0 = DenseVector::from_element(1, 1.0);
        let err_at = |dt: f64| {
            let traj = sys
                .simulate(&x0, &ControlSignal::Zero, (0.0, 4.0), dt, &SimOptions::default())
                .unwrap();
            (traj.final_state()[0] - 1.0 / 3.0).abs()
        };
        let coarse = err_at(0.05);
        let fine = err_at(0.025);
        assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn euler_is_first_order() {
        let sys = cubic_scalar(-1.0);
        let x0 = DenseVector::from_element(1, 1.0);
        let opts = SimOptions { method: Integrator::Euler, ..Default::default() };
        let traj = sys.simulate(&x0, &ControlSignal::Zero, (0.0, 4.0), 1e-3, &opts).unwrap();
        assert!((traj.final_state()[0] - 1.0 / 3.0).abs() <= 1e-3);
    }

    #[test]
    fn simulate_with_constant_input_matches_linear_closed_form() {
        // order-2 tensor: x' = a x + b u with constant u has
        // x(t) = (x0 + bu/a) e^{at} - bu/a
        let (a, b, u0, x0) = (-0.8f64, 0.5f64, 2.0f64, 1.0f64);
        let tensor = DenseTensor::new(vec![1, 1], vec![a]).unwrap();
        let sys = InputOutputHpds::new(
            tensor,
            Some(DenseMatrix::from_element(1, 1, b)),
            None,
        )
        .unwrap();
        let signal = ControlSignal::Constant(DenseVector::from_element(1, u0));
        let traj = sys
            .simulate(
                &DenseVector::from_element(1, x0),
                &signal,
                (0.0, 3.0),
                1e-3,
                &SimOptions::default(),
            )
            .unwrap();
        let forced = b * u0 / a;
        let exact = (x0 + forced) * (a * 3.0).exp() - forced;
        assert!((traj.final_state()[0] - exact).abs() <= 1e-9);
    }

    #[test]
    fn simulate_zero_initial_state_stays_zero() {
        let a = DenseTensor::diagonal(4, &[2.0, -1.0]).unwrap();
        let sys = InputOutputHpds::new(a, None, None).unwrap();
        let traj = sys
            .simulate(
                &DenseVector::zeros(2),
                &ControlSignal::Zero,
                (0.0, 1.0),
                1e-2,
                &SimOptions::default(),
            )
            .unwrap();
        assert!(traj.states.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn simulate_detects_finite_time_blowup() {
        // x' = +x^3 escapes at t* = 1/(2 x0^2) = 0.5
        let sys = cubic_scalar(1.0);
        let x0 = DenseVector::from_element(1, 1.0);
        let traj = sys
            .simulate(&x0, &ControlSignal::Zero, (0.0, 2.0), 1e-4, &SimOptions::default())
            .unwrap();
        let at = traj.diverged_at.expect("must diverge");
        assert!(at > 0.3 && at < 0.7, "diverged at {at}");
        assert!(traj.states.iter().all(|x| x.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn piecewise_signal_lookup() {
        let table = vec![
            (1.0, DenseVector::from_element(1, 2.0)),
            (3.0, DenseVector::from_element(1, -1.0)),
        ];
        let sig = ControlSignal::PiecewiseConstant(table);
        assert_eq!(sig.eval(0.0, 1).unwrap()[0], 0.0);
        assert_eq!(sig.eval(1.0, 1).unwrap()[0], 2.0);
        assert_eq!(sig.eval(2.9, 1).unwrap()[0], 2.0);
        assert_eq!(sig.eval(5.0, 1).unwrap()[0], -1.0);
    }

    #[test]
    fn homogenize_linear_system() {
        // x' = -x lifts to x1' = -x1 x2, x2' = 0
        let t = DenseTensor::new(vec![1, 1], vec![-1.0]).unwrap();
        let psys = PolynomialSystem::new(1, vec![(1, t)]).unwrap();
        let h = psys.homogenize(2).unwrap();
        assert_eq!(h.state_dim(), 2);
        assert_eq!(h.order(), 3);
        let x = DenseVector::from_column_slice(&[0.7, 1.0]);
        let f = h.vector_field(&x, None).unwrap();
        assert_relative_eq!(f[0], -0.7, epsilon = 1e-14);
        assert_relative_eq!(f[1], 0.0, epsilon = 1e-14);
        // invariant under scaling of the auxiliary coordinate
        let x2 = DenseVector::from_column_slice(&[0.7, 2.0]);
        let f2 = h.vector_field(&x2, None).unwrap();
        assert_relative_eq!(f2[0], -0.7 * 2.0, epsilon = 1e-14);
    }

    #[test]
    fn homogenize_constant_term() {
        let c = DenseTensor::new(vec![1], vec![5.0]).unwrap();
        let psys = PolynomialSystem::new(1, vec![(0, c)]).unwrap();
        let h = psys.homogenize(2).unwrap();
        let x = DenseVector::from_column_slice(&[0.0, 3.0]);
        let f = h.vector_field(&x, None).unwrap();
        assert_relative_eq!(f[0], 5.0 * 9.0, epsilon = 1e-13);
    }

    #[test]
    fn homogenize_matches_polynomial_field_on_unit_slice() {
        let n = 3;
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let mut rnd_tensor = |dims: Vec<usize>| {
            let len = dims.iter().product();
            DenseTensor::new(dims, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
        };
        let terms = vec![
            (0, rnd_tensor(vec![n])),
            (1, rnd_tensor(vec![n, n])),
            (2, rnd_tensor(vec![n, n, n])),
        ];
        let psys = PolynomialSystem::new(n, terms).unwrap();
        let h = psys.homogenize(2).unwrap();
        let mut rng2 = ChaCha12Rng::seed_from_u64(22);
        for _ in 0..10 {
            let x = DenseVector::from_fn(n, |_, _| rng2.gen_range(-1.0..1.0));
            let mut lifted = DenseVector::zeros(n + 1);
            lifted.rows_mut(0, n).copy_from(&x);
            lifted[n] = 1.0;
            let f_orig = psys.vector_field(&x).unwrap();
            let f_hom = h.vector_field(&lifted, None).unwrap();
            for i in 0..n {
                assert!((f_orig[i] - f_hom[i]).abs() <= 1e-12);
            }
            assert_relative_eq!(f_hom[n], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn homogenize_rejects_low_target() {
        let t = DenseTensor::new(vec![1, 1, 1], vec![1.0]).unwrap();
        let psys = PolynomialSystem::new(1, vec![(2, t)]).unwrap();
        assert!(psys.homogenize(1).is_err());
    }

    #[test]
    fn homogenized_trajectories_keep_aux_coordinate() {
        let t = DenseTensor::new(vec![1, 1], vec![-1.0]).unwrap();
        let psys = PolynomialSystem::new(1, vec![(1, t)]).unwrap();
        let h = psys.homogenize(2).unwrap();
        let x0 = DenseVector::from_column_slice(&[1.0, 1.0]);
        let traj = h
            .simulate(&x0, &ControlSignal::Zero, (0.0, 2.0), 1e-3, &SimOptions::default())
            .unwrap();
        for x in &traj.states {
            assert_relative_eq!(x[1], 1.0, epsilon = 1e-12);
        }
        // on the invariant slice the dynamics is plain exponential decay
        assert!((traj.final_state()[0] - (-2.0f64).exp()).abs() <= 1e-6);
    }

    #[test]
    fn param_count_reference_values() {
        assert_eq!(param_count(6, 4, 0, 0), 1296);
        assert_eq!(param_count(3, 4, 0, 0), 81);
        assert_eq!(param_count(12, 4, 5, 0), 20796);
        assert_eq!(param_count(7, 4, 5, 0), 2436);
        assert_eq!(param_count(0, 3, 0, 0), 0);
    }
}
