//! Finite point sets in `[0,1)^d` with dyadic coordinates.
//!
//! Coordinates are stored as integer numerators over a common denominator
//! `2^precision_bits`, which keeps every exact kernel in integer arithmetic.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};

/// Largest supported coordinate precision.
pub const MAX_PRECISION_BITS: u32 = 62;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    d: usize,
    precision_bits: u32,
    coords: Vec<u64>,
}

impl PointSet {
    /// Builds a point set from numerators over `2^precision_bits`, laid out point by point.
    pub fn from_numerators(d: usize, precision_bits: u32, coords: Vec<u64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        if precision_bits > MAX_PRECISION_BITS {
            return Err(Error::domain(format!(
                "precision {precision_bits} exceeds the supported {MAX_PRECISION_BITS} bits"
            )));
        }
        if coords.len() % d != 0 {
            return Err(Error::domain("coordinate count is not a multiple of d"));
        }
        let limit = 1u64 << precision_bits;
        if let Some(bad) = coords.iter().find(|&&c| c >= limit) {
            return Err(Error::domain(format!(
                "coordinate {bad}/2^{precision_bits} is not in [0,1)"
            )));
        }
        Ok(PointSet {
            d,
            precision_bits,
            coords,
        })
    }

    /// Builds a point set from exact coordinates; every exponent must be at most
    /// `precision_bits`.
    pub fn from_dyadic(d: usize, precision_bits: u32, points: &[Vec<DyadicRational>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * d);
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::domain(format!("point {i} has {} coordinates, expected {d}", p.len())));
            }
            for c in p {
                if !c.in_unit_interval() {
                    return Err(Error::domain(format!("coordinate {c} of point {i} is not in [0,1)")));
                }
                let num = c.u64_numerator_at(precision_bits).ok_or_else(|| {
                    Error::domain(format!("coordinate {c} needs more than {precision_bits} bits"))
                })?;
                coords.push(num);
            }
        }
        PointSet::from_numerators(d, precision_bits, coords)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Numerators of point `i` over `2^precision_bits`.
    pub fn numerators(&self, i: usize) -> &[u64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn numerator(&self, i: usize, k: usize) -> u64 {
        self.coords[i * self.d + k]
    }

    pub fn all_numerators(&self) -> &[u64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> Vec<DyadicRational> {
        self.numerators(i)
            .iter()
            .map(|&c| DyadicRational::new(c, self.precision_bits))
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<DyadicRational>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Coordinates as floats (exact, since precision is at most 62 bits and values
    /// below 2^53 are represented exactly; larger numerators round).
    pub fn to_f64(&self) -> Vec<f64> {
        let scale = 0.5f64.powi(self.precision_bits as i32);
        self.coords.iter().map(|&c| c as f64 * scale).collect()
    }

    /// Same points written with a finer precision.
    pub fn with_precision(&self, precision_bits: u32) -> Result<Self> {
        if precision_bits < self.precision_bits {
            let shift = self.precision_bits - precision_bits;
            if self.coords.iter().any(|&c| c & ((1u64 << shift) - 1) != 0) {
                return Err(Error::domain("coordinates need more precision than requested"));
            }
            let coords = self.coords.iter().map(|&c| c >> shift).collect();
            return PointSet::from_numerators(self.d, precision_bits, coords);
        }
        let shift = precision_bits - self.precision_bits;
        let coords = self.coords.iter().map(|&c| c << shift).collect();
        PointSet::from_numerators(self.d, precision_bits, coords)
    }

    /// Smallest precision that represents every coordinate exactly.
    pub fn minimal_precision(&self) -> u32 {
        let tz = self
            .coords
            .iter()
            .filter(|&&c| c != 0)
            .map(|c| c.trailing_zeros())
            .min()
            .unwrap_or(self.precision_bits);
        self.precision_bits - tz.min(self.precision_bits)
    }

    /// `n` independent uniform points with coordinates on the `2^-precision_bits` grid.
    pub fn random(d: usize, n: usize, precision_bits: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let limit = 1u64 << precision_bits.min(MAX_PRECISION_BITS);
        let coords = (0..n * d).map(|_| rng.gen_range(0..limit)).collect();
        PointSet::from_numerators(d, precision_bits, coords)
    }

    /// `n` points packed into the corner box `[0, 2^-spread_bits)^d`.
    pub fn clustered(d: usize, n: usize, precision_bits: u32, spread_bits: u32, seed: u64) -> Result<Self> {
        if spread_bits > precision_bits {
            return Err(Error::domain("spread exceeds precision"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let limit = 1u64 << (precision_bits - spread_bits);
        let coords = (0..n * d).map(|_| rng.gen_range(0..limit)).collect();
        PointSet::from_numerators(d, precision_bits, coords)
    }

    /// Text form: `d N precision_bits`, then one line per point of `a/2^k` values. Lines
    /// starting with `#` are comments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.d, self.len(), self.precision_bits).unwrap();
        for i in 0..self.len() {
            let line: Vec<String> = self
                .numerators(i)
                .iter()
                .map(|&c| DyadicRational::new(c, self.precision_bits).to_string())
                .collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        PointSet::read(text.as_bytes())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| {
                l.as_ref()
                    .map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
                    .unwrap_or(true)
            });
        let (lno, header) = lines.next().ok_or_else(|| Error::parse(1, "empty point-set file"))?;
        let header = header?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(lno, "header must be `d N precision_bits`"));
        }
        let num = |s: &str, what: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::parse(lno, format!("invalid {what} {s:?}")))
        };
        let d = num(fields[0], "dimension")? as usize;
        let n = num(fields[1], "point count")? as usize;
        let precision = num(fields[2], "precision")? as u32;
        if d == 0 {
            return Err(Error::parse(lno, "dimension must be at least 1"));
        }
        if precision > MAX_PRECISION_BITS {
            return Err(Error::parse(lno, format!("precision above {MAX_PRECISION_BITS} bits")));
        }
        let mut coords = Vec::with_capacity(n * d);
        for i in 0..n {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| Error::parse(lno + i + 1, format!("expected {n} points, found {i}")))?;
            let line = line?;
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != d {
                return Err(Error::parse(lno, format!("expected {d} coordinates, found {}", vals.len())));
            }
            for v in vals {
                let r: DyadicRational = v
                    .parse()
                    .map_err(|_| Error::parse(lno, format!("invalid coordinate {v:?}")))?;
                if !r.in_unit_interval() {
                    return Err(Error::parse(lno, format!("coordinate {v} is not in [0,1)")));
                }
                let c = r
                    .u64_numerator_at(precision)
                    .ok_or_else(|| Error::parse(lno, format!("coordinate {v} exceeds {precision} bits")))?;
                coords.push(c);
            }
        }
        if let Some((lno, _)) = lines.next() {
            return Err(Error::parse(lno, "trailing data after the declared points"));
        }
        PointSet::from_numerators(d, precision, coords)
    }
}
