//! Parsers for small command-line literals: state vectors and control
//! signal specifications. Both accept untrusted input and never panic.

use hpds::system::ControlSignal;
use hpds::tensor::DenseVector;

use crate::{CliError, CliResult};

const MAX_VECTOR_LEN: usize = 4096;
const MAX_TABLE_ROWS: usize = 10_000;

/// Comma-separated finite numbers, e.g. `"1,2.5,-3e-2"`.
pub fn parse_vector(s: &str) -> CliResult<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(CliError::Parse("empty vector literal".into()));
    }
    let mut out = Vec::new();
    for piece in s.split(',') {
        if out.len() >= MAX_VECTOR_LEN {
            return Err(CliError::Parse(format!(
                "vector literal longer than {MAX_VECTOR_LEN} entries"
            )));
        }
        let v: f64 = piece
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("not a number: {piece:?}")))?;
        if !v.is_finite() {
            return Err(CliError::Parse(format!("non-finite entry: {piece:?}")));
        }
        out.push(v);
    }
    Ok(out)
}

/// Control signal specification:
///
/// - `zero`
/// - `const:<v1,v2,...>`
/// - `table:<t0>:<v1,v2,...>;<t1>:<...>;...` (piecewise constant, strictly
///   increasing times, zero before the first breakpoint)
pub fn parse_signal(s: &str) -> CliResult<ControlSignal> {
    let s = s.trim();
    if s == "zero" {
        return Ok(ControlSignal::Zero);
    }
    if let Some(rest) = s.strip_prefix("const:") {
        let u = parse_vector(rest)?;
        return Ok(ControlSignal::Constant(DenseVector::from_column_slice(&u)));
    }
    if let Some(rest) = s.strip_prefix("table:") {
        let mut rows: Vec<(f64, DenseVector)> = Vec::new();
        for entry in rest.split(';') {
            if rows.len() >= MAX_TABLE_ROWS {
                return Err(CliError::Parse(format!(
                    "signal table longer than {MAX_TABLE_ROWS} rows"
                )));
            }
            let entry = entry.trim();
            let (t_str, v_str) = entry
                .split_once(':')
                .ok_or_else(|| CliError::Parse(format!("table entry missing ':': {entry:?}")))?;
            let t: f64 = t_str
                .trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("not a time: {t_str:?}")))?;
            if !t.is_finite() {
                return Err(CliError::Parse(format!("non-finite time: {t_str:?}")));
            }
            let v = parse_vector(v_str)?;
            if let Some((prev, last)) = rows.last().map(|(p, u)| (*p, u.len())) {
                if t <= prev {
                    return Err(CliError::Parse("table times must be strictly increasing".into()));
                }
                if v.len() != last {
                    return Err(CliError::Parse("table rows must have equal width".into()));
                }
            }
            rows.push((t, DenseVector::from_column_slice(&v)));
        }
        if rows.is_empty() {
            return Err(CliError::Parse("empty signal table".into()));
        }
        return Ok(ControlSignal::PiecewiseConstant(rows));
    }
    Err(CliError::Parse(format!(
        "unrecognized signal spec {s:?} (expected zero | const:... | table:...)"
    )))
}
