//! Versioned JSON model files.
//!
//! Tensor data is a flat number array with an explicit layout tag
//! (`first-index-fastest`); matrices are row-major. Numbers survive a
//! write/read round trip bit-exactly, and serialization is deterministic,
//! so files generated from the same seed are byte-identical.

use hpds::system::InputOutputHpds;
use hpds::tensor::{DenseMatrix, DenseTensor};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const LAYOUT: &str = "first-index-fastest";

/// Schema guards; parsing is exposed to untrusted input.
pub const MAX_ORDER: usize = 8;
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorData {
    pub dims: Vec<usize>,
    pub layout: String,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data_row_major: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub order: usize,
    pub dim: usize,
    pub dynamic_tensor: TensorData,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_matrix: Option<MatrixData>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output_matrix: Option<MatrixData>,
    /// Projection basis `V` (`n x r`), present on reduced models.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub projection: Option<MatrixData>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metadata: Option<Metadata>,
}

impl MatrixData {
    pub fn from_matrix(m: &DenseMatrix) -> Self {
        let data_row_major =
            (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect();
        Self { rows: m.nrows(), cols: m.ncols(), data_row_major }
    }

    pub fn to_matrix(&self) -> CliResult<DenseMatrix> {
        let len = self
            .rows
            .checked_mul(self.cols)
            .ok_or_else(|| CliError::Parse("matrix shape overflows".into()))?;
        if self.rows == 0 || self.cols == 0 {
            return Err(CliError::Parse("matrix must have positive shape".into()));
        }
        if self.data_row_major.len() != len {
            return Err(CliError::Parse(format!(
                "matrix data length {} does not match {}x{}",
                self.data_row_major.len(),
                self.rows,
                self.cols
            )));
        }
        if !self.data_row_major.iter().all(|v| v.is_finite()) {
            return Err(CliError::Parse("matrix entries must be finite".into()));
        }
        Ok(DenseMatrix::from_row_slice(self.rows, self.cols, &self.data_row_major))
    }
}

impl ModelFile {
    /// Parse and validate; never panics on malformed input.
    pub fn from_slice(bytes: &[u8]) -> CliResult<Self> {
        let file: ModelFile =
            serde_json::from_slice(bytes).map_err(|e| CliError::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.dynamic_tensor.layout != LAYOUT {
            return Err(CliError::Parse(format!(
                "unsupported tensor layout {:?} (expected {LAYOUT:?})",
                self.dynamic_tensor.layout
            )));
        }
        if self.order < 2 || self.order > MAX_ORDER {
            return Err(CliError::Parse(format!(
                "tensor order {} outside supported range 2..={MAX_ORDER}",
                self.order
            )));
        }
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(CliError::Parse(format!(
                "state dimension {} outside supported range 1..={MAX_DIM}",
                self.dim
            )));
        }
        if self.dynamic_tensor.dims.len() != self.order
            || self.dynamic_tensor.dims.iter().any(|&d| d != self.dim)
        {
            return Err(CliError::Parse(format!(
                "dynamic tensor dims {:?} do not match order {} and dim {}",
                self.dynamic_tensor.dims, self.order, self.dim
            )));
        }
        let expected = self
            .dim
            .checked_pow(self.order as u32)
            .ok_or_else(|| CliError::Parse("tensor shape overflows".into()))?;
        if self.dynamic_tensor.data.len() != expected {
            return Err(CliError::Parse(format!(
                "tensor data length {} does not match dims (expected {expected})",
                self.dynamic_tensor.data.len()
            )));
        }
        if !self.dynamic_tensor.data.iter().all(|v| v.is_finite()) {
            return Err(CliError::Parse("tensor entries must be finite".into()));
        }
        for (label, m, expect_rows, expect_cols) in [
            ("input matrix", &self.input_matrix, Some(self.dim), None),
            ("output matrix", &self.output_matrix, None, Some(self.dim)),
        ] {
            if let Some(m) = m {
                m.to_matrix().map_err(|e| CliError::Parse(format!("{label}: {e}")))?;
                if let Some(r) = expect_rows {
                    if m.rows != r {
                        return Err(CliError::Parse(format!(
                            "{label} has {} rows, expected {r}",
                            m.rows
                        )));
                    }
                }
                if let Some(c) = expect_cols {
                    if m.cols != c {
                        return Err(CliError::Parse(format!(
                            "{label} has {} columns, expected {c}",
                            m.cols
                        )));
                    }
                }
            }
        }
        // a reduced model's projection maps the original space (rows) onto
        // this model's space (columns)
        if let Some(p) = &self.projection {
            p.to_matrix().map_err(|e| CliError::Parse(format!("projection: {e}")))?;
            if p.cols != self.dim {
                return Err(CliError::Parse(format!(
                    "projection has {} columns, expected the model dimension {}",
                    p.cols, self.dim
                )));
            }
            if p.rows < p.cols || p.rows > MAX_DIM {
                return Err(CliError::Parse(format!(
                    "projection shape {}x{} is not a tall basis within the supported range",
                    p.rows, p.cols
                )));
            }
        }
        Ok(())
    }

    /// Build the in-memory system (validating the almost-symmetry
    /// invariant along the way).
    pub fn to_system(&self) -> CliResult<InputOutputHpds> {
        let a = DenseTensor::new(self.dynamic_tensor.dims.clone(), self.dynamic_tensor.data.clone())
            .map_err(CliError::Core)?;
        let b = self.input_matrix.as_ref().map(|m| m.to_matrix()).transpose()?;
        let c = self.output_matrix.as_ref().map(|m| m.to_matrix()).transpose()?;
        InputOutputHpds::new(a, b, c).map_err(CliError::Core)
    }

    pub fn projection_matrix(&self) -> CliResult<Option<DenseMatrix>> {
        self.projection.as_ref().map(|m| m.to_matrix()).transpose()
    }

    pub fn from_system(
        model: &InputOutputHpds,
        projection: Option<&DenseMatrix>,
        metadata: Option<Metadata>,
    ) -> Self {
        let a = model.dynamic_tensor();
        ModelFile {
            schema_version: SCHEMA_VERSION,
            order: model.order(),
            dim: model.state_dim(),
            dynamic_tensor: TensorData {
                dims: a.dims().to_vec(),
                layout: LAYOUT.to_string(),
                data: a.data().to_vec(),
            },
            input_matrix: model.input_matrix().map(MatrixData::from_matrix),
            output_matrix: model.output_matrix().map(MatrixData::from_matrix),
            projection: projection.map(MatrixData::from_matrix),
            metadata,
        }
    }

    /// Deterministic pretty serialization (trailing newline included).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("schema types serialize");
        out.push(b'\n');
        out
    }
}
