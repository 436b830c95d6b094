//! Bundled generating matrices.
//!
//! * `hammersley`: identity, anti-diagonal reversal, then Sobol dimensions 2, 3, ...
//! * `sobol`: the first `d` Sobol matrices (dimension 1 is the identity).
//! * `zero`: all-zero matrices.
//!
//! For order `σ > 1` the order-1 family of dimension `σd` is built and interlaced.

use std::sync::OnceLock;

use super::{interlace, DigitalNetSpec, F2Matrix};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: &[&str] = &["hammersley", "sobol", "zero"];

const SOBOL_DATA: &str = include_str!("../../data/sobol_direction_numbers.txt");

struct Primitive {
    s: usize,
    a: u64,
    m: Vec<u64>,
}

fn sobol_table() -> &'static [Primitive] {
    static TABLE: OnceLock<Vec<Primitive>> = OnceLock::new();
    TABLE.get_or_init(|| {
        SOBOL_DATA
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let v: Vec<u64> = l
                    .split_whitespace()
                    .map(|x| x.parse().expect("bundled direction numbers are integers"))
                    .collect();
                let s = v[1] as usize;
                assert_eq!(v.len(), 3 + s, "malformed direction-number row for dimension {}", v[0]);
                Primitive { s, a: v[2], m: v[3..].to_vec() }
            })
            .collect()
    })
}

/// Number of Sobol dimensions available (including the identity dimension).
pub fn sobol_dimensions() -> usize {
    sobol_table().len() + 1
}

/// Number of bundled Sobol dimensions; kept as a constant for documentation and CLI help.
pub const SOBOL_DIMENSIONS: usize = 13;

pub fn identity(n: usize) -> F2Matrix {
    F2Matrix::from_rows(n, (0..n).map(|r| 1u64 << r).collect()).expect("n within column limit")
}

/// Anti-diagonal matrix: output digit `r` is input digit `n-1-r`.
pub fn reversal(n: usize) -> F2Matrix {
    F2Matrix::from_rows(n, (0..n).map(|r| 1u64 << (n - 1 - r)).collect()).expect("n within column limit")
}

/// Order-1 `n×n` Sobol matrix of dimension `dim` (1-based).
pub fn sobol_matrix(dim: usize, n: usize) -> Result<F2Matrix> {
    if dim == 0 || dim > sobol_dimensions() {
        return Err(Error::domain(format!(
            "Sobol dimension {dim} not bundled (1..={})",
            sobol_dimensions()
        )));
    }
    if n > super::MAX_COLUMNS {
        return Err(Error::domain("bit depth too large"));
    }
    if dim == 1 {
        return Ok(identity(n));
    }
    let prim = &sobol_table()[dim - 2];
    let s = prim.s;
    let mut m: Vec<u64> = prim.m.iter().copied().take(n).collect();
    for k in s..n {
        // m_{k+1} from the previous s values (0-based indices)
        let mut v = m[k - s] ^ (m[k - s] << s);
        for i in 1..s {
            let bit = (prim.a >> (s - 1 - i)) & 1;
            if bit == 1 {
                v ^= m[k - i] << i;
            }
        }
        m.push(v);
    }
    // column c holds v_{c+1} = m_{c+1} / 2^{c+1}; row r (digit r+1) is bit c-r of m_{c+1}
    let mut rows = vec![0u64; n];
    for (c, &mc) in m.iter().enumerate() {
        for (r, row) in rows.iter_mut().enumerate().take(c + 1) {
            if (mc >> (c - r)) & 1 == 1 {
                *row |= 1 << c;
            }
        }
    }
    F2Matrix::from_rows(n, rows)
}

/// Order-1 `n×n` matrices of a bundled family.
pub fn order1_matrices(name: &str, d: usize, n: usize) -> Result<Vec<F2Matrix>> {
    match name {
        "hammersley" => (0..d)
            .map(|i| match i {
                0 => Ok(identity(n)),
                1 => Ok(reversal(n)),
                _ => sobol_matrix(i, n),
            })
            .collect(),
        "sobol" => (1..=d).map(|i| sobol_matrix(i, n)).collect(),
        "zero" => Ok(vec![F2Matrix::zeros(n, n)?; d]),
        _ => Err(unknown(name)),
    }
}

fn unknown(name: &str) -> Error {
    Error::domain(format!(
        "unknown construction {name:?}; available: {}",
        BUILTIN_NAMES.join(", ")
    ))
}

/// Bundled spec of dimension `d`, bit depth `n` and order `sigma`.
pub fn builtin(name: &str, d: usize, n: usize, sigma: usize) -> Result<DigitalNetSpec> {
    if !BUILTIN_NAMES.contains(&name) {
        return Err(unknown(name));
    }
    if d == 0 || sigma == 0 {
        return Err(Error::domain("d and sigma must be positive"));
    }
    if name == "zero" {
        return DigitalNetSpec::new(n, sigma, vec![F2Matrix::zeros(sigma * n, n)?; d]);
    }
    let base = DigitalNetSpec::new(n, 1, order1_matrices(name, sigma * d, n)?)?;
    interlace(&base, sigma)
}
