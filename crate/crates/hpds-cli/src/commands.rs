//! Implementations behind the CLI subcommands. Each function loads its
//! inputs, delegates to the library, and writes model/report/CSV outputs.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use hpds::analysis::{
    controllability_matrix, observability_matrix, stability_classify, ControllabilityOpts,
    ObservabilityOpts, ObservabilityVerdict, StabilityClass,
};
use hpds::generators;
use hpds::reduction::{project_state, reduce, Truncation};
use hpds::system::{param_count, ControlSignal, Integrator, SimOptions, Trajectory};
use hpds::tensor::{DenseTensor, DenseVector};

use crate::literal::{parse_signal, parse_vector};
use crate::model_file::{Metadata, ModelFile};
use crate::report::{
    ComparePayload, ControllabilityPayload, InfoPayload, ObservabilityPayload, ReductionPayload,
    ReportFile, StabilityPayload,
};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenKind {
    /// Orthogonally decomposable dynamic tensor with `r` nonzero
    /// coefficients (magnitudes in [0.5, 3], random signs).
    Odeco,
    /// Symmetrized standard-normal dynamic tensor plus Gaussian B/C.
    AlmostSymmetric,
    /// Built-in six-state degree-three benchmark (fixed coefficients).
    Example1,
    /// Twelve-state degree-three benchmark with a 12x5 input matrix.
    Example2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

fn read_model(path: &Path) -> CliResult<ModelFile> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    ModelFile::from_slice(&bytes)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(CliError::io(path))
}

fn write_or_print(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => write_bytes(p, bytes),
        None => {
            std::io::stdout().write_all(bytes).map_err(CliError::io("<stdout>"))
        }
    }
}

fn state_vector(s: &str, n: usize, what: &str) -> CliResult<DenseVector> {
    let v = parse_vector(s)?;
    if v.len() != n {
        return Err(CliError::Parse(format!(
            "{what} has {} entries, model dimension is {n}",
            v.len()
        )));
    }
    Ok(DenseVector::from_column_slice(&v))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_gen(
    kind: GenKind,
    n: Option<usize>,
    k: Option<usize>,
    r: Option<usize>,
    m: usize,
    l: usize,
    seed: Option<u64>,
    name: Option<String>,
    out: &Path,
) -> CliResult<()> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| CliError::Parse(format!("--{flag} is required for this kind")))
    };
    let need_seed =
        || seed.ok_or_else(|| CliError::Parse("--seed is required for random kinds".into()));
    let (model, generator) = match kind {
        GenKind::Example1 => (generators::example1(), "example1"),
        GenKind::Example2 => (generators::example2(need_seed()?)?, "example2"),
        GenKind::Odeco => {
            let (n, k, r) = (need(n, "n")?, need(k, "k")?, need(r, "r")?);
            let (model, _) = generators::random_odeco(n, k, r, need_seed()?)?;
            (model, generators::GENERATOR_ID)
        }
        GenKind::AlmostSymmetric => {
            let (n, k) = (need(n, "n")?, need(k, "k")?);
            (generators::random_almost_symmetric(n, k, m, l, need_seed()?)?, generators::GENERATOR_ID)
        }
    };
    let metadata = Metadata { name, seed, generator: Some(generator.to_string()) };
    let file = ModelFile::from_system(&model, None, Some(metadata));
    write_bytes(out, &file.to_bytes())?;
    println!(
        "wrote {} (n={}, k={}, m={}, l={})",
        out.display(),
        model.state_dim(),
        model.order(),
        model.input_dim(),
        model.output_dim()
    );
    Ok(())
}

pub fn cmd_reduce(
    model_path: &Path,
    tol: Option<f64>,
    rank: Option<usize>,
    out_model: &Path,
    out_report: Option<&Path>,
) -> CliResult<()> {
    let start = Instant::now();
    let file = read_model(model_path)?;
    let model = file.to_system()?;
    let criterion = match (tol, rank) {
        (Some(_), Some(_)) => {
            return Err(CliError::Parse("--tol and --rank are mutually exclusive".into()))
        }
        (None, Some(r)) => Truncation::Rank(r),
        (Some(t), None) => Truncation::Tolerance(t),
        (None, None) => Truncation::Tolerance(1e-8),
    };
    let (reduced, report) = reduce(&model, &criterion)?;

    let metadata = Metadata {
        name: file
            .metadata
            .as_ref()
            .and_then(|m| m.name.clone())
            .map(|n| format!("{n}-reduced")),
        seed: file.metadata.as_ref().and_then(|m| m.seed),
        generator: Some("reduce".to_string()),
    };
    let out_file = ModelFile::from_system(&reduced.model, Some(reduced.v()), Some(metadata));
    write_bytes(out_model, &out_file.to_bytes())?;

    let payload = ReductionPayload {
        r: report.r,
        r_k: report.r_k,
        sigma: report.sigma.clone(),
        sigma_last: report.sigma_last.clone(),
        residual: report.residual,
        exact: report.exact,
        params_before: report.params_before,
        params_after: report.params_after,
    };
    if let Some(path) = out_report {
        write_bytes(path, &ReportFile::new(payload, start.elapsed()).to_bytes())?;
    }
    println!(
        "reduced to r={} (residual {:.3e}, exact={}, parameters {} -> {})",
        report.r, report.residual, report.exact, report.params_before, report.params_after
    );
    Ok(())
}

fn trajectory_csv(traj: &Trajectory) -> Vec<u8> {
    let n = traj.states.first().map_or(0, |x| x.len());
    let l = traj.outputs.as_ref().and_then(|ys| ys.first().map(|y| y.len())).unwrap_or(0);
    let mut out = String::new();
    out.push('t');
    for i in 1..=n {
        out.push_str(&format!(",x_{i}"));
    }
    for i in 1..=l {
        out.push_str(&format!(",y_{i}"));
    }
    out.push('\n');
    for (i, t) in traj.times.iter().enumerate() {
        out.push_str(&format!("{t:.16e}"));
        for v in traj.states[i].iter() {
            out.push_str(&format!(",{v:.16e}"));
        }
        if let Some(ys) = &traj.outputs {
            for v in ys[i].iter() {
                out.push_str(&format!(",{v:.16e}"));
            }
        }
        out.push('\n');
    }
    out.into_bytes()
}

#[derive(serde::Serialize)]
struct TrajectoryJson {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outputs: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diverged_at: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    model_path: &Path,
    x0: &str,
    u: Option<&str>,
    t0: f64,
    tmax: f64,
    dt: f64,
    method: Integrator,
    divergence_bound: f64,
    out: Option<&Path>,
    format: OutputFormat,
) -> CliResult<()> {
    let file = read_model(model_path)?;
    let model = file.to_system()?;
    let x0 = state_vector(x0, model.state_dim(), "--x0")?;
    let signal = match u {
        Some(spec) => parse_signal(spec)?,
        None => ControlSignal::Zero,
    };
    let opts = SimOptions { method, divergence_bound };
    let traj = model.simulate(&x0, &signal, (t0, tmax), dt, &opts)?;
    let bytes = match format {
        OutputFormat::Csv => trajectory_csv(&traj),
        OutputFormat::Json => {
            let doc = TrajectoryJson {
                times: traj.times.clone(),
                states: traj.states.iter().map(|x| x.as_slice().to_vec()).collect(),
                outputs: traj
                    .outputs
                    .as_ref()
                    .map(|ys| ys.iter().map(|y| y.as_slice().to_vec()).collect()),
                diverged_at: traj.diverged_at,
            };
            let mut b = serde_json::to_vec_pretty(&doc).expect("trajectory serializes");
            b.push(b'\n');
            b
        }
    };
    write_or_print(out, &bytes)?;
    if let Some(t) = traj.diverged_at {
        eprintln!("note: trajectory exceeded the divergence bound at t = {t}");
    }
    Ok(())
}

pub fn cmd_compare(
    model_path: &Path,
    reduced_path: &Path,
    x0: &str,
    tmax: f64,
    dt: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let start = Instant::now();
    let full_file = read_model(model_path)?;
    let full = full_file.to_system()?;
    let red_file = read_model(reduced_path)?;
    let reduced = red_file.to_system()?;
    let v = red_file
        .projection_matrix()?
        .ok_or(CliError::Core(hpds::Error::ProjectionAbsent))?;
    if v.nrows() != full.state_dim() || v.ncols() != reduced.state_dim() {
        return Err(CliError::Parse(format!(
            "projection is {}x{}, expected {}x{}",
            v.nrows(),
            v.ncols(),
            full.state_dim(),
            reduced.state_dim()
        )));
    }
    let x0 = state_vector(x0, full.state_dim(), "--x0")?;
    let z0 = project_state(&v, &x0)?;
    let opts = SimOptions::default();
    let full_traj = full.simulate(&x0, &ControlSignal::Zero, (0.0, tmax), dt, &opts)?;
    let red_traj = reduced.simulate(&z0, &ControlSignal::Zero, (0.0, tmax), dt, &opts)?;

    let steps = full_traj.states.len().min(red_traj.states.len());
    let mut max_state_error = 0.0f64;
    let mut final_state_error = 0.0f64;
    for i in 0..steps {
        let lifted = &v * &red_traj.states[i];
        let err = (&full_traj.states[i] - lifted).norm();
        max_state_error = max_state_error.max(err);
        final_state_error = err;
    }
    let max_output_error = match (&full_traj.outputs, &red_traj.outputs) {
        (Some(fy), Some(ry)) => {
            let mut m = 0.0f64;
            for i in 0..steps.min(fy.len()).min(ry.len()) {
                m = m.max((&fy[i] - &ry[i]).norm());
            }
            Some(m)
        }
        _ => None,
    };
    let payload = ComparePayload {
        max_state_error,
        final_state_error,
        max_output_error,
        compared_steps: steps,
        full_diverged_at: full_traj.diverged_at,
        reduced_diverged_at: red_traj.diverged_at,
    };
    let report = ReportFile::new(payload, start.elapsed());
    write_or_print(out, &report.to_bytes())?;
    eprintln!("max state error {max_state_error:.6e} over {steps} steps");
    Ok(())
}

pub fn cmd_stability(
    model_path: &Path,
    x0: &str,
    odeco_tol: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let start = Instant::now();
    let file = read_model(model_path)?;
    let model = file.to_system()?;
    let x0 = state_vector(x0, model.state_dim(), "--x0")?;
    let verdict = stability_classify(model.dynamic_tensor(), &x0, odeco_tol)?;
    let classification = match verdict.classification {
        StabilityClass::Stable => "stable",
        StabilityClass::AsymptoticallyStable => "asymptotically_stable",
        StabilityClass::Unstable => "unstable",
    };
    let payload = StabilityPayload {
        classification: classification.to_string(),
        lambdas: verdict.lambdas.clone(),
        alphas: verdict.alphas.clone(),
        terms: verdict.terms.clone(),
        origin_unique: verdict.origin_unique,
        zeroed_terms: verdict.zeroed_terms.clone(),
    };
    let report = ReportFile::new(payload, start.elapsed());
    write_or_print(out, &report.to_bytes())?;
    eprintln!("verdict: {classification}");
    Ok(())
}

pub fn cmd_controllability(
    model_path: &Path,
    max_level: Option<usize>,
    rank_tol: f64,
    column_cap: usize,
    out: Option<&Path>,
) -> CliResult<()> {
    let start = Instant::now();
    let file = read_model(model_path)?;
    let model = file.to_system()?;
    if model.order() % 2 != 0 {
        return Err(CliError::Core(hpds::Error::OddOrderControllability {
            order: model.order(),
        }));
    }
    let b = model.input_matrix().ok_or(CliError::Core(hpds::Error::InputMatrixAbsent))?;
    let opts = ControllabilityOpts { max_level, rank_tol, column_cap, early_stop: true };
    let res = controllability_matrix(model.dynamic_tensor(), b, &opts)?;
    let payload = ControllabilityPayload {
        rank: res.rank,
        state_dim: model.state_dim(),
        levels_used: res.levels_used,
        rank_tol: res.rank_tol,
        strongly_controllable: res.is_strongly_controllable,
        truncated_by_cap: res.truncated_by_cap,
    };
    let report = ReportFile::new(payload, start.elapsed());
    write_or_print(out, &report.to_bytes())?;
    eprintln!(
        "rank {} of {} ({})",
        res.rank,
        model.state_dim(),
        if res.is_strongly_controllable { "strongly controllable" } else { "not strongly controllable" }
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_observability(
    model_path: &Path,
    x: &str,
    max_level: Option<usize>,
    rank_tol: f64,
    size_cap: usize,
    out: Option<&Path>,
) -> CliResult<()> {
    let start = Instant::now();
    let file = read_model(model_path)?;
    let model = file.to_system()?;
    let c = model.output_matrix().ok_or(CliError::Core(hpds::Error::OutputMatrixAbsent))?;
    let x = state_vector(x, model.state_dim(), "--x")?;
    let opts = ObservabilityOpts { max_level, rank_tol, size_cap, early_stop: true };
    let res = observability_matrix(model.dynamic_tensor(), c, &x, &opts)?;
    let verdict = match res.verdict() {
        ObservabilityVerdict::Observable => "observable",
        ObservabilityVerdict::NotObservable => "not_observable",
        ObservabilityVerdict::Inconclusive => "inconclusive",
    };
    let payload = ObservabilityPayload {
        rank: res.rank,
        state_dim: model.state_dim(),
        levels_used: res.levels_used,
        rank_tol: res.rank_tol,
        verdict: verdict.to_string(),
    };
    let report = ReportFile::new(payload, start.elapsed());
    write_or_print(out, &report.to_bytes())?;
    eprintln!("verdict: {verdict} (rank {} of {})", res.rank, model.state_dim());
    Ok(())
}

pub fn cmd_info(model_path: &Path, format: OutputFormat, out: Option<&Path>) -> CliResult<()> {
    let start = Instant::now();
    let file = read_model(model_path)?;
    // info renders diagnostics even when system invariants fail, so build
    // the raw tensor instead of going through InputOutputHpds
    let a = DenseTensor::new(file.dynamic_tensor.dims.clone(), file.dynamic_tensor.data.clone())?;
    let k = a.order();
    let n = file.dim;
    let m = file.input_matrix.as_ref().map_or(0, |b| b.cols);
    let l = file.output_matrix.as_ref().map_or(0, |c| c.rows);
    let payload = InfoPayload {
        state_dim: n,
        order: k,
        input_dim: m,
        output_dim: l,
        degree: k - 1,
        param_count: param_count(n, k, m, l),
        frobenius_norm: a.frobenius_norm(),
        almost_symmetric_deviation: a.symmetry_deviation(k - 1)?,
        symmetric_deviation: a.symmetry_deviation(k)?,
        has_projection: file.projection.is_some(),
        metadata_name: file.metadata.as_ref().and_then(|md| md.name.clone()),
    };
    match format {
        OutputFormat::Json => {
            let report = ReportFile::new(payload, start.elapsed());
            write_or_print(out, &report.to_bytes())?;
        }
        OutputFormat::Csv => {
            return Err(CliError::Parse("info supports only --format json".into()));
        }
    }
    Ok(())
}
