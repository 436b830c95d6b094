//! Digital nets over F2: generating matrices, the digital construction, digit
//! interlacing and verification of the order-σ `(t,n,d)`-net property.

mod builtin;
mod verify;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dyadic::{level_bits, position_of};
use crate::error::{Error, Result};
use crate::pointset::{PointSet, MAX_PRECISION_BITS};

pub use builtin::{builtin, identity, order1_matrices, reversal, sobol_matrix, BUILTIN_NAMES, SOBOL_DIMENSIONS};
pub use verify::{minimal_t, selection_count, verify_net_order, DEFAULT_WORK_LIMIT};

/// Maximum number of columns (bit depth `n`).
pub const MAX_COLUMNS: usize = 63;

/// Matrix over F2 with at most 63 columns; each row is one machine word whose bit `c`
/// is the entry in column `c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    cols: usize,
    rows: Vec<u64>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        F2Matrix::from_rows(cols, vec![0; rows])
    }

    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Result<Self> {
        if cols > MAX_COLUMNS {
            return Err(Error::domain(format!("at most {MAX_COLUMNS} columns are supported")));
        }
        let mask = if cols == 64 { u64::MAX } else { (1u64 << cols) - 1 };
        if rows.iter().any(|r| r & !mask != 0) {
            return Err(Error::domain("row has bits beyond the column count"));
        }
        Ok(F2Matrix { cols, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> u64 {
        self.rows[r]
    }

    pub fn row_words(&self) -> &[u64] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.rows[r] >> c) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        if v {
            self.rows[r] |= 1 << c;
        } else {
            self.rows[r] &= !(1 << c);
        }
    }

    /// `C · v` where bit `c` of `v` is the `c`-th entry of the vector; bit `r` of the
    /// result is output digit `r`.
    pub fn mul_vec(&self, v: u64) -> u128 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u128, |acc, (r, &row)| acc | (((row & v).count_ones() as u128 & 1) << r))
    }

    /// Rank over F2.
    pub fn rank(&self) -> usize {
        let mut basis = Basis::default();
        self.rows.iter().filter(|&&r| basis.insert(r)).count()
    }
}

/// Row-reduced basis keyed by leading bit.
#[derive(Clone, Copy)]
pub(crate) struct Basis {
    pivots: [u64; 64],
}

impl Default for Basis {
    fn default() -> Self {
        Basis { pivots: [0; 64] }
    }
}

impl Basis {
    /// Adds `v`; returns false if `v` is dependent on the current vectors.
    pub(crate) fn insert(&mut self, mut v: u64) -> bool {
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if self.pivots[top] == 0 {
                self.pivots[top] = v;
                return true;
            }
            v ^= self.pivots[top];
        }
        false
    }
}

/// Dimension, bit depth, order and generating matrices of a digital net.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitalNetSpec {
    d: usize,
    n: usize,
    sigma: usize,
    matrices: Vec<F2Matrix>,
    t: Option<u32>,
}

impl DigitalNetSpec {
    pub fn new(n: usize, sigma: usize, matrices: Vec<F2Matrix>) -> Result<Self> {
        let d = matrices.len();
        if d == 0 {
            return Err(Error::domain("at least one matrix is required"));
        }
        if sigma == 0 {
            return Err(Error::domain("order must be at least 1"));
        }
        if n > MAX_COLUMNS {
            return Err(Error::domain(format!("bit depth above {MAX_COLUMNS}")));
        }
        if (sigma * n) as u32 > MAX_PRECISION_BITS {
            return Err(Error::domain(format!(
                "precision sigma*n = {} exceeds {MAX_PRECISION_BITS} bits",
                sigma * n
            )));
        }
        for (i, m) in matrices.iter().enumerate() {
            if m.rows() != sigma * n || m.cols() != n {
                return Err(Error::domain(format!(
                    "matrix {} is {}x{}, expected {}x{}",
                    i + 1,
                    m.rows(),
                    m.cols(),
                    sigma * n,
                    n
                )));
            }
        }
        Ok(DigitalNetSpec {
            d,
            n,
            sigma,
            matrices,
            t: None,
        })
    }

    /// Attaches a quality parameter after checking it exhaustively.
    pub fn with_verified_t(mut self, t: u32, work_limit: u128) -> Result<Self> {
        if !verify_net_order(&self, self.sigma, t, work_limit)? {
            return Err(Error::domain(format!("spec is not an order-{} net with t={t}", self.sigma)));
        }
        self.t = Some(t);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn matrices(&self) -> &[F2Matrix] {
        &self.matrices
    }

    pub fn t(&self) -> Option<u32> {
        self.t
    }

    pub fn precision_bits(&self) -> u32 {
        (self.sigma * self.n) as u32
    }

    /// Matrix file text: `d n sigma`, then `sigma*n` lines of `n` characters per matrix.
    /// Lines starting with `#` are comments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.d, self.n, self.sigma).unwrap();
        for m in &self.matrices {
            for r in 0..m.rows() {
                let line: String = (0..m.cols()).map(|c| if m.get(r, c) { '1' } else { '0' }).collect();
                writeln!(out, "{line}").unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (lno, header) = lines.next().ok_or_else(|| Error::parse(1, "empty matrix file"))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(lno, "header must be `d n sigma`"))?;
        if fields.len() != 3 {
            return Err(Error::parse(lno, "header must be `d n sigma`"));
        }
        let (d, n, sigma) = (fields[0], fields[1], fields[2]);
        if d == 0 || sigma == 0 {
            return Err(Error::parse(lno, "d and sigma must be positive"));
        }
        if n > MAX_COLUMNS {
            return Err(Error::parse(lno, format!("bit depth above {MAX_COLUMNS}")));
        }
        let mut last = lno;
        let mut matrices = Vec::with_capacity(d);
        for i in 0..d {
            let mut rows = Vec::with_capacity(sigma * n);
            for r in 0..sigma * n {
                let (lno, line) = lines.next().ok_or_else(|| {
                    Error::parse(last + 1, format!("matrix {} ends after {r} of {} rows", i + 1, sigma * n))
                })?;
                last = lno;
                if line.len() != n {
                    return Err(Error::parse(lno, format!("row has {} entries, expected {n}", line.len())));
                }
                let mut word = 0u64;
                for (c, ch) in line.chars().enumerate() {
                    match ch {
                        '0' => {}
                        '1' => word |= 1 << c,
                        _ => return Err(Error::parse(lno, format!("invalid entry {ch:?}"))),
                    }
                }
                rows.push(word);
            }
            matrices.push(F2Matrix::from_rows(n, rows).map_err(|e| Error::parse(lno, e.to_string()))?);
        }
        if let Some((lno, _)) = lines.next() {
            return Err(Error::parse(lno, "trailing data after the declared matrices"));
        }
        DigitalNetSpec::new(n, sigma, matrices).map_err(|e| Error::parse(lno, e.to_string()))
    }
}

/// Applies the digital construction: `x_{i,ν} = Σ_λ (C_i ν̄)_λ 2^-λ` for `ν = 0..2^n`.
pub fn digital_points(spec: &DigitalNetSpec) -> Result<PointSet> {
    let p = spec.precision_bits();
    let count = 1usize << spec.n;
    let mut coords = Vec::with_capacity(count * spec.d);
    for nu in 0..count as u64 {
        for m in &spec.matrices {
            let digits = m.mul_vec(nu);
            // digit λ (row λ-1) has weight 2^(p-λ)
            let mut x = 0u64;
            for r in 0..p as usize {
                if (digits >> r) & 1 == 1 {
                    x |= 1 << (p as usize - 1 - r);
                }
            }
            coords.push(x);
        }
    }
    PointSet::from_numerators(spec.d, p, coords)
}

/// Digit interlacing of an order-1 spec of dimension `σd` into an order-σ spec of
/// dimension `d`.
pub fn interlace(base: &DigitalNetSpec, sigma: usize) -> Result<DigitalNetSpec> {
    if sigma == 0 {
        return Err(Error::domain("order must be at least 1"));
    }
    if base.sigma != 1 {
        return Err(Error::domain("interlacing needs an order-1 base spec"));
    }
    if base.d % sigma != 0 {
        return Err(Error::domain(format!(
            "base dimension {} is not divisible by {sigma}",
            base.d
        )));
    }
    let n = base.n;
    let d = base.d / sigma;
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let mut rows = vec![0u64; sigma * n];
        for lambda in 0..n {
            for u in 0..sigma {
                rows[lambda * sigma + u] = base.matrices[i * sigma + u].row(lambda);
            }
        }
        out.push(F2Matrix::from_rows(n, rows)?);
    }
    DigitalNetSpec::new(n, sigma, out)
}

/// Linear (row-major, first coordinate most significant) position of the box of the
/// given shape containing point `i`.
pub(crate) fn linear_position(ps: &PointSet, shape: &[i32], i: usize) -> u128 {
    let p = ps.precision_bits();
    let mut lin = 0u128;
    for (k, &j) in shape.iter().enumerate() {
        let b = level_bits(j);
        lin = (lin << b) | position_of(ps.numerator(i, k), p, j) as u128;
    }
    lin
}

/// Splits a linear position back into per-coordinate positions.
pub(crate) fn split_position(shape: &[i32], mut lin: u128) -> Vec<u64> {
    let mut m = vec![0u64; shape.len()];
    for k in (0..shape.len()).rev() {
        let b = level_bits(shape[k]);
        m[k] = (lin & ((1u128 << b) - 1)) as u64;
        lin >>= b;
    }
    m
}

/// Number of points in each nonempty box `I_{j,m}` of the given shape.
pub fn box_point_counts(ps: &PointSet, shape: &[i32]) -> Result<BTreeMap<Vec<u64>, u64>> {
    check_shape(ps, shape)?;
    let mut counts = BTreeMap::new();
    for i in 0..ps.len() {
        let m = split_position(shape, linear_position(ps, shape, i));
        *counts.entry(m).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Largest number of points in a single box of the given shape.
pub fn max_box_count(ps: &PointSet, shape: &[i32]) -> Result<u64> {
    check_shape(ps, shape)?;
    let mut pos: Vec<u128> = (0..ps.len()).map(|i| linear_position(ps, shape, i)).collect();
    pos.sort_unstable();
    let mut best = 0u64;
    let mut run = 0u64;
    for w in 0..pos.len() {
        run = if w > 0 && pos[w] == pos[w - 1] { run + 1 } else { 1 };
        best = best.max(run);
    }
    Ok(best)
}

pub(crate) fn check_shape(ps: &PointSet, shape: &[i32]) -> Result<()> {
    if shape.len() != ps.dim() {
        return Err(Error::domain(format!(
            "shape has {} entries, point set has dimension {}",
            shape.len(),
            ps.dim()
        )));
    }
    if shape.iter().any(|&j| j < -1 || j > 63) {
        return Err(Error::domain("levels must lie in -1..=63"));
    }
    if shape.iter().map(|&j| level_bits(j)).sum::<u32>() > 127 {
        return Err(Error::domain("shape order above 127 is not supported"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicRational;

    fn dr(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn hammersley2() -> DigitalNetSpec {
        DigitalNetSpec::new(2, 1, vec![identity(2), reversal(2)]).unwrap()
    }

    #[test]
    fn van_der_corput_order() {
        let spec = DigitalNetSpec::new(2, 1, vec![identity(2)]).unwrap();
        let ps = digital_points(&spec).unwrap();
        let xs: Vec<DyadicRational> = ps.points().into_iter().map(|p| p[0].clone()).collect();
        assert_eq!(xs, vec![dr("0"), dr("1/2^1"), dr("1/2^2"), dr("3/2^2")]);
    }

    #[test]
    fn hammersley_points() {
        let ps = digital_points(&hammersley2()).unwrap();
        let expect = [["0", "0"], ["1/2^1", "1/2^2"], ["1/2^2", "1/2^1"], ["3/2^2", "3/2^2"]];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(ps.point(i), vec![dr(e[0]), dr(e[1])]);
        }
    }

    #[test]
    fn zero_matrices_collapse_to_origin() {
        let spec = DigitalNetSpec::new(3, 2, vec![F2Matrix::zeros(6, 3).unwrap(); 2]).unwrap();
        let ps = digital_points(&spec).unwrap();
        assert_eq!(ps.len(), 8);
        assert!(ps.all_numerators().iter().all(|&c| c == 0));
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(DigitalNetSpec::new(2, 2, vec![identity(2)]).is_err());
        assert!(DigitalNetSpec::new(2, 1, vec![identity(3)]).is_err());
    }

    #[test]
    fn interlace_rows() {
        let base = DigitalNetSpec::new(2, 1, vec![identity(2), identity(2)]).unwrap();
        let out = interlace(&base, 2).unwrap();
        assert_eq!(out.dim(), 1);
        let m = &out.matrices()[0];
        assert_eq!(m.row_words(), &[0b01, 0b01, 0b10, 0b10]);
        assert_eq!(interlace(&hammersley2(), 1).unwrap(), hammersley2());
        assert!(interlace(&hammersley2(), 3).is_err());
        assert_eq!(digital_points(&out).unwrap().len(), 4);
    }

    #[test]
    fn box_counts() {
        let ps = digital_points(&hammersley2()).unwrap();
        let all = box_point_counts(&ps, &[-1, -1]).unwrap();
        assert_eq!(all.into_iter().collect::<Vec<_>>(), vec![(vec![0, 0], 4)]);
        for shape in [[1, 1], [2, 0], [0, 2]] {
            let c = box_point_counts(&ps, &shape).unwrap();
            assert_eq!(c.len(), 4);
            assert!(c.values().all(|&v| v == 1));
        }
        assert_eq!(max_box_count(&ps, &[2, 2]).unwrap(), 1);
        assert_eq!(max_box_count(&ps, &[1, -1]).unwrap(), 2);
    }

    #[test]
    fn matrix_text_roundtrip() {
        let spec = builtin("sobol", 3, 4, 2).unwrap();
        let text = spec.to_text();
        assert_eq!(DigitalNetSpec::parse(&text).unwrap(), spec);
        assert_eq!(DigitalNetSpec::parse(&format!("# comment\n{text}")).unwrap(), spec);
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        match DigitalNetSpec::parse(&truncated) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 11),
            other => panic!("unexpected {other:?}"),
        }
        match DigitalNetSpec::parse("1 2 1\n10\n2x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rank() {
        assert_eq!(identity(5).rank(), 5);
        assert_eq!(F2Matrix::from_rows(3, vec![0b011, 0b110, 0b101]).unwrap().rank(), 2);
    }
}
