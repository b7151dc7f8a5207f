//! JSON state files: `{"dims": [d1, d2], "matrix": [[[re, im], ...], ...]}`.
//!
//! Rows are indexed by the composite index `i = i1 * d2 + i2`. Floats are
//! written in shortest round-trip form, so a write/read cycle is exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use relent_core::{Complex64, ComplexMatrix, DensityMatrix, Dims};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_matrix(m: &ComplexMatrix, dims: Dims) -> Self {
        let n = m.dim();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self {
            dims: [dims.d1, dims.d2],
            matrix,
        }
    }

    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self::from_matrix(rho.matrix(), rho.dims())
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.dims[0], self.dims[1])
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        let rows: Vec<Vec<Complex64>> = self
            .matrix
            .iter()
            .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        if rows
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(CliError::Input("matrix has non-finite entries".into()));
        }
        ComplexMatrix::from_rows(&rows).map_err(|e| CliError::Input(e.to_string()))
    }

    /// Parses and validates against the density-matrix invariants at `tol`.
    pub fn to_state(&self, tol: f64) -> Result<DensityMatrix, CliError> {
        DensityMatrix::with_tolerance(self.to_matrix()?, self.dims(), tol)
            .map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("state file: {e}")))
    }
}

pub fn read_state(path: &Path, tol: f64) -> Result<(DensityMatrix, Vec<u8>), CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Input(format!("{} is not UTF-8", path.display())))?;
    let state = StateFile::parse(text)?.to_state(tol)?;
    Ok((state, bytes))
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let rho = relent_core::random_npt(Dims::new(2, 3), 4).unwrap();
        let text = StateFile::from_state(&rho).to_json();
        let back = StateFile::parse(&text).unwrap().to_state(1e-8).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        assert_eq!(back.dims(), rho.dims());
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(StateFile::parse("{\"dims\": [2, 2]}").is_err());
        let ragged = r#"{"dims": [1, 2], "matrix": [[[0.5, 0]], [[0, 0], [0.5, 0]]]}"#;
        assert!(StateFile::parse(ragged).unwrap().to_state(1e-8).is_err());
        let wrong_dims = r#"{"dims": [2, 2], "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}"#;
        assert!(StateFile::parse(wrong_dims)
            .unwrap()
            .to_state(1e-8)
            .is_err());
        let not_unit = r#"{"dims": [1, 2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#;
        assert!(StateFile::parse(not_unit).unwrap().to_state(1e-8).is_err());
        let ok = r#"{"dims": [1, 2], "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}"#;
        assert!(StateFile::parse(ok).unwrap().to_state(1e-8).is_ok());
    }
}
