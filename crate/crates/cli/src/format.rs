//! JSON file formats: matrices as explicit dimensions plus row-major
//! `[re, im]` pairs, and systems as four such matrices.

use std::fmt;
use std::path::Path;

use kyp_core::{CMatrix, SystemRealization};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A malformed or inconsistent input file.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([clean(z.re), clean(z.im)]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn to_matrix(&self, field: &str) -> Result<CMatrix, InputError> {
        if self.entries.len() != self.rows * self.cols {
            return Err(InputError(format!(
                "{field}.entries: expected {} pairs for a {}x{} matrix, found {}",
                self.rows * self.cols,
                self.rows,
                self.cols,
                self.entries.len()
            )));
        }
        if let Some(k) = self
            .entries
            .iter()
            .position(|[re, im]| !re.is_finite() || !im.is_finite())
        {
            return Err(InputError(format!(
                "{field}.entries[{k}]: not a finite number"
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i * self.cols + j];
            Complex64::new(re, im)
        }))
    }
}

/// Negative zero prints as `-0.0`; normalize it so reports stay stable.
fn clean(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub state_dim: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    #[serde(rename = "A")]
    pub a: MatrixFile,
    #[serde(rename = "B")]
    pub b: MatrixFile,
    #[serde(rename = "C")]
    pub c: MatrixFile,
    #[serde(rename = "D")]
    pub d: MatrixFile,
}

impl SystemFile {
    pub fn from_system(tau: &SystemRealization) -> Self {
        Self {
            state_dim: tau.state_dim(),
            input_dim: tau.input_dim(),
            output_dim: tau.output_dim(),
            a: MatrixFile::from_matrix(tau.a()),
            b: MatrixFile::from_matrix(tau.b()),
            c: MatrixFile::from_matrix(tau.c()),
            d: MatrixFile::from_matrix(tau.d()),
        }
    }

    pub fn to_system(&self, label: &str) -> Result<SystemRealization, InputError> {
        let (h, m, n) = (self.state_dim, self.input_dim, self.output_dim);
        let blocks = [
            ("A", &self.a, (h, h)),
            ("B", &self.b, (h, m)),
            ("C", &self.c, (n, h)),
            ("D", &self.d, (n, m)),
        ];
        let mut parsed = Vec::with_capacity(4);
        for (name, file, shape) in blocks {
            if (file.rows, file.cols) != shape {
                return Err(InputError(format!(
                    "{name}: expected {}x{} from the declared dimensions, found {}x{}",
                    shape.0, shape.1, file.rows, file.cols
                )));
            }
            parsed.push(file.to_matrix(name)?);
        }
        let [a, b, c, d]: [CMatrix; 4] = parsed.try_into().expect("four blocks");
        SystemRealization::from_parts(a, b, c, d, label).map_err(|e| InputError(e.to_string()))
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

pub fn load_system(path: &Path) -> Result<SystemRealization, InputError> {
    let text = read(path)?;
    let file: SystemFile =
        serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "system".into());
    file.to_system(&label)
}

/// A candidate `X`: either a bare matrix object or `{"X": matrix}`.
pub fn load_candidate(path: &Path) -> Result<CMatrix, InputError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Candidate {
        Wrapped {
            #[serde(rename = "X")]
            x: MatrixFile,
        },
        Bare(MatrixFile),
    }
    let text = read(path)?;
    let parsed: Candidate = serde_json::from_str(&text).map_err(|e| {
        InputError(format!(
            "{}: expected a matrix with fields rows, cols, entries ({e})",
            path.display()
        ))
    })?;
    match parsed {
        Candidate::Wrapped { x } => x.to_matrix("X"),
        Candidate::Bare(x) => x.to_matrix("X"),
    }
}
