//! Matrix files: `{"n": …, "d": …, "re": [[…]], "im": [[…]]}`.
//!
//! `n` and `d` may be omitted when reading; they are then inferred from the
//! row count, which must be a prime power. When present they are checked
//! against the shape.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use punif_core::galois::{is_prime, Register};
use punif_core::{DenseOperator, UnitaryHandle};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_operator(op: &DenseOperator) -> Self {
        let reg = op.register();
        let dim = op.dim();
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..dim).map(|i| (0..dim).map(|j| f(&op[(i, j)])).collect()).collect()
        };
        MatrixFile { n: Some(reg.n), d: Some(reg.d.get()), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn register(&self) -> Result<Register> {
        let dim = self.re.len();
        if dim == 0 {
            return Err(CliError::Matrix("matrix has no rows".into()));
        }
        let (n, d) = match (self.n, self.d) {
            (Some(n), Some(d)) => (n, d),
            (None, Some(d)) => (power_of(dim, d).ok_or_else(|| not_power(dim, d))?, d),
            (n, None) => {
                let (n_inf, d_inf) = infer_register(dim)?;
                if n.is_some_and(|n| n != n_inf) {
                    return Err(CliError::Matrix(format!("n = {} does not match dimension {dim}", n.unwrap())));
                }
                (n_inf, d_inf)
            }
        };
        let reg = Register::new(n, d)?;
        if reg.dim() != dim {
            return Err(CliError::Matrix(format!("n = {n}, d = {d} gives dimension {}, found {dim} rows", reg.dim())));
        }
        Ok(reg)
    }

    pub fn to_operator(&self) -> Result<DenseOperator> {
        let reg = self.register()?;
        let dim = reg.dim();
        if self.im.len() != dim {
            return Err(CliError::Matrix(format!("\"im\" has {} rows, \"re\" has {dim}", self.im.len())));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, (re, im)) in self.re.iter().zip(&self.im).enumerate() {
            if re.len() != dim || im.len() != dim {
                return Err(CliError::Matrix(format!("row {i} does not have {dim} entries")));
            }
            data.extend(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)));
        }
        Ok(DenseOperator::from_rows(reg, data)?)
    }

    pub fn to_unitary(&self, tolerance: f64) -> Result<UnitaryHandle> {
        UnitaryHandle::with_tolerance(self.to_operator()?, tolerance).map_err(|e| CliError::Matrix(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain numbers serialize")
    }
}

/// Reads and validates a unitary from a matrix file.
pub fn read_unitary(path: &Path, tolerance: f64) -> Result<UnitaryHandle> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    MatrixFile::parse(&text)?.to_unitary(tolerance)
}

fn power_of(dim: usize, d: u32) -> Option<usize> {
    let d = d as usize;
    if d < 2 {
        return None;
    }
    let (mut acc, mut n) = (1usize, 0usize);
    while acc < dim {
        acc = acc.checked_mul(d)?;
        n += 1;
    }
    (acc == dim && n > 0).then_some(n)
}

fn not_power(dim: usize, d: u32) -> CliError {
    CliError::Matrix(format!("dimension {dim} is not a power of {d}"))
}

/// `(n, d)` with `d^n = dim` and `d` prime.
pub fn infer_register(dim: usize) -> Result<(usize, u32)> {
    let p = (2..=dim).find(|p| dim.is_multiple_of(*p)).ok_or_else(|| CliError::Matrix(format!("dimension {dim}")))?;
    let d = u32::try_from(p).map_err(|_| CliError::Matrix(format!("dimension {dim} is too large")))?;
    debug_assert!(is_prime(d));
    let n = power_of(dim, d).ok_or_else(|| CliError::Matrix(format!("dimension {dim} is not a prime power")))?;
    Ok((n, d))
}
