use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{is_finite, ComplexMatrix};

/// A nonempty, ordered family of named square matrices of one common size.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet {
    names: Vec<String>,
    matrices: Vec<ComplexMatrix>,
}

impl MatrixSet {
    /// Builds a set with default names `A1, A2, ...`.
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let names = (1..=matrices.len()).map(|i| format!("A{i}")).collect();
        Self::with_names(names, matrices)
    }

    pub fn with_names(names: Vec<String>, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidInput("matrix set is empty".into()));
        }
        if names.len() != matrices.len() {
            return Err(Error::InvalidInput(format!(
                "{} names for {} matrices",
                names.len(),
                matrices.len()
            )));
        }
        let n = matrices[0].nrows();
        if n == 0 {
            return Err(Error::DimensionMismatch("matrices must be at least 1x1".into()));
        }
        for (name, m) in names.iter().zip(&matrices) {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "matrix `{name}` is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !is_finite(m) {
                return Err(Error::InvalidInput(format!(
                    "matrix `{name}` has a non-finite entry"
                )));
            }
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(MatrixSet { names, matrices })
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ComplexMatrix)> {
        self.names.iter().map(String::as_str).zip(&self.matrices)
    }

    /// `{ s_inv * A * s }`, keeping names.
    pub fn conjugated(&self, s: &ComplexMatrix, s_inv: &ComplexMatrix) -> MatrixSet {
        MatrixSet {
            names: self.names.clone(),
            matrices: self.matrices.iter().map(|a| s_inv * a * s).collect(),
        }
    }
}
