use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::{linear_for_shape, point_factor_int};
use crate::dyadic::{order, shapes_in_range, DyadicIndex, DyadicRational};
use crate::error::{Error, Result};
use crate::gf2net::{linear_position, split_position};
use crate::pointset::PointSet;
use crate::scalar::bit_len;

/// Default cap on `shapes × N` for a coefficient table.
pub const DEFAULT_TABLE_BUDGET: u128 = 100_000_000;

/// Coefficients of one shape `j`: the linear part (the same for every `m`) and the
/// nonzero counting parts, sorted by linear position.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeBlock {
    shape: Vec<i32>,
    linear: DyadicRational,
    linear_f64: f64,
    positions: Vec<u128>,
    counting: Vec<i128>,
}

impl ShapeBlock {
    pub fn shape(&self) -> &[i32] {
        &self.shape
    }

    pub fn order(&self) -> u32 {
        order(&self.shape)
    }

    pub fn linear(&self) -> &DyadicRational {
        &self.linear
    }

    pub fn linear_f64(&self) -> f64 {
        self.linear_f64
    }

    /// Number of positions with a nonzero counting part.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `(linear position, counting numerator)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (u128, i128)> + '_ {
        self.positions.iter().copied().zip(self.counting.iter().copied())
    }

    pub fn counting_numerator(&self, pos: u128) -> i128 {
        match self.positions.binary_search(&pos) {
            Ok(i) => self.counting[i],
            Err(_) => 0,
        }
    }

    pub fn positions_of(&self, pos: u128) -> Vec<u64> {
        split_position(&self.shape, pos)
    }

    /// Number of positions `2^{|j|}`.
    pub fn index_count(&self) -> u128 {
        1u128 << self.order()
    }
}

/// Haar coefficients `⟨f, h_{j,m}⟩ = counting - linear` for every shape with all
/// levels in `-1..=max_level`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarCoefficientTable {
    d: usize,
    point_count: u64,
    precision_bits: Option<u32>,
    max_level: i32,
    counting_exp: u32,
    blocks: Vec<ShapeBlock>,
    lookup: HashMap<Vec<i32>, usize>,
}

impl HaarCoefficientTable {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point_count(&self) -> u64 {
        self.point_count
    }

    /// Coordinate precision of the generating point set; `None` for tables built from
    /// explicit coefficients.
    pub fn precision_bits(&self) -> Option<u32> {
        self.precision_bits
    }

    pub fn max_level(&self) -> i32 {
        self.max_level
    }

    /// Counting numerators are stored over `2^counting_exponent`.
    pub fn counting_exponent(&self) -> u32 {
        self.counting_exp
    }

    pub fn blocks(&self) -> &[ShapeBlock] {
        &self.blocks
    }

    pub fn block(&self, shape: &[i32]) -> Option<&ShapeBlock> {
        self.lookup.get(shape).map(|&i| &self.blocks[i])
    }

    pub fn counting_value(&self, numerator: i128) -> DyadicRational {
        DyadicRational::new(numerator, self.counting_exp)
    }

    pub fn counting_f64(&self, numerator: i128) -> f64 {
        numerator as f64 * 0.5f64.powi(self.counting_exp as i32)
    }

    /// `(counting, linear)` for an index whose shape is covered by the table.
    pub fn get(&self, index: &DyadicIndex) -> Option<(DyadicRational, DyadicRational)> {
        let b = self.block(index.levels())?;
        let pos = index
            .levels()
            .iter()
            .zip(index.positions())
            .fold(0u128, |acc, (&j, &m)| (acc << crate::dyadic::level_bits(j)) | m as u128);
        Some((self.counting_value(b.counting_numerator(pos)), b.linear.clone()))
    }

    /// `⟨f, h_{j,m}⟩` if the shape is covered.
    pub fn coefficient(&self, index: &DyadicIndex) -> Option<DyadicRational> {
        self.get(index).map(|(c, l)| c - l)
    }

    /// Coefficient as a float from a block and a position.
    pub fn coefficient_f64(&self, block: &ShapeBlock, pos: u128) -> f64 {
        self.counting_f64(block.counting_numerator(pos)) - block.linear_f64
    }

    /// Total number of indices `Σ_j 2^{|j|}` covered by the table.
    pub fn index_count(&self) -> u128 {
        self.blocks.iter().map(|b| b.index_count()).sum()
    }

    /// Number of stored nonzero counting parts.
    pub fn stored_entries(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// Table restricted to the shapes accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(&[i32]) -> bool) -> Self {
        let blocks: Vec<ShapeBlock> = self.blocks.iter().filter(|b| keep(&b.shape)).cloned().collect();
        let lookup = blocks.iter().enumerate().map(|(i, b)| (b.shape.clone(), i)).collect();
        HaarCoefficientTable {
            blocks,
            lookup,
            ..self.clone()
        }
    }

    /// Table restricted to shapes of order exactly `n`.
    pub fn restrict_to_order(&self, n: u32) -> Self {
        self.restrict(|s| order(s) == n)
    }

    /// Table holding the given coefficients of an abstract function; shapes that
    /// appear are covered, every other coefficient of those shapes is zero.
    pub fn from_coefficients(d: usize, entries: &[(DyadicIndex, DyadicRational)]) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        let exp = entries.iter().map(|(_, v)| v.exponent()).max().unwrap_or(0);
        let mut by_shape: HashMap<Vec<i32>, Vec<(u128, i128)>> = HashMap::new();
        let mut max_level = -1;
        for (idx, v) in entries {
            if idx.dim() != d {
                return Err(Error::domain("index dimension mismatch"));
            }
            if idx.order() > 127 {
                return Err(Error::domain("shape order above 127 is not supported"));
            }
            let num = v
                .numerator_at(exp)
                .and_then(|n| n.to_i128())
                .ok_or_else(|| Error::domain("coefficient does not fit the table precision"))?;
            let pos = idx
                .levels()
                .iter()
                .zip(idx.positions())
                .fold(0u128, |acc, (&j, &m)| (acc << crate::dyadic::level_bits(j)) | m as u128);
            max_level = max_level.max(*idx.levels().iter().max().unwrap());
            by_shape.entry(idx.levels().to_vec()).or_default().push((pos, num));
        }
        let mut shapes: Vec<Vec<i32>> = by_shape.keys().cloned().collect();
        shapes.sort();
        let blocks = shapes
            .into_iter()
            .map(|shape| {
                let mut list = by_shape.remove(&shape).unwrap();
                list.sort_by_key(|e| e.0);
                let (positions, counting) = merge(list);
                ShapeBlock {
                    shape,
                    linear: DyadicRational::zero(),
                    linear_f64: 0.0,
                    positions,
                    counting,
                }
            })
            .collect::<Vec<_>>();
        let lookup = blocks.iter().enumerate().map(|(i, b)| (b.shape.clone(), i)).collect();
        Ok(HaarCoefficientTable {
            d,
            point_count: 0,
            precision_bits: None,
            max_level,
            counting_exp: exp,
            blocks,
            lookup,
        })
    }

    /// CSV dump: one row per stored index, or per covered index when `all` is set.
    pub fn to_csv(&self, all: bool, budget: u128) -> Result<String> {
        if all {
            Error::check_budget("coefficient dump", self.index_count(), budget)?;
        }
        let d = self.d;
        let mut out = String::new();
        let header: Vec<String> = (1..=d)
            .map(|k| format!("j_{k}"))
            .chain((1..=d).map(|k| format!("m_{k}")))
            .chain(["counting_num", "counting_exp", "linear_num", "linear_exp"].map(String::from))
            .collect();
        writeln!(out, "{}", header.join(",")).unwrap();
        for b in &self.blocks {
            let mut row = |pos: u128, c: i128| {
                let counting = self.counting_value(c);
                let m = b.positions_of(pos);
                let fields: Vec<String> = b
                    .shape
                    .iter()
                    .map(|j| j.to_string())
                    .chain(m.iter().map(|v| v.to_string()))
                    .chain([
                        counting.numerator().to_string(),
                        counting.exponent().to_string(),
                        b.linear.numerator().to_string(),
                        b.linear.exponent().to_string(),
                    ])
                    .collect();
                writeln!(out, "{}", fields.join(",")).unwrap();
            };
            if all {
                for pos in 0..b.index_count() {
                    row(pos, b.counting_numerator(pos));
                }
            } else {
                for (pos, c) in b.entries() {
                    row(pos, c);
                }
            }
        }
        Ok(out)
    }
}

fn merge(list: Vec<(u128, i128)>) -> (Vec<u128>, Vec<i128>) {
    let mut positions: Vec<u128> = Vec::with_capacity(list.len());
    let mut counting: Vec<i128> = Vec::with_capacity(list.len());
    for (pos, v) in list {
        if positions.last() == Some(&pos) {
            *counting.last_mut().unwrap() += v;
        } else {
            positions.push(pos);
            counting.push(v);
        }
    }
    // drop exact cancellations
    let keep: Vec<bool> = counting.iter().map(|&c| c != 0).collect();
    let positions = positions.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| p).collect();
    let counting = counting.into_iter().filter(|&c| c != 0).collect();
    (positions, counting)
}

fn build_block(ps: &PointSet, shape: Vec<i32>) -> ShapeBlock {
    let p = ps.precision_bits();
    let d = ps.dim();
    let mut list: Vec<(u128, i128)> = Vec::new();
    'points: for i in 0..ps.len() {
        let z = ps.numerators(i);
        let mut prod: i128 = 1;
        for k in 0..d {
            let g = point_factor_int(shape[k], z[k], p);
            if g == 0 {
                continue 'points;
            }
            prod *= g as i128;
        }
        list.push((linear_position(ps, &shape, i), prod));
    }
    list.sort_unstable_by_key(|e| e.0);
    let (positions, counting) = merge(list);
    let linear = linear_for_shape(&shape, ps.len() as u64);
    ShapeBlock {
        linear_f64: linear.to_f64(),
        linear,
        shape,
        positions,
        counting,
    }
}

/// All coefficients of `D_P` with every level in `-1..=max_level`.
///
/// The counting part vanishes when some level is at least the coordinate precision,
/// so `max_level >= precision_bits - 1` captures every nonzero counting coefficient.
pub fn coefficient_table(ps: &PointSet, max_level: i32, budget: u128) -> Result<HaarCoefficientTable> {
    if max_level < -1 || max_level > 63 {
        return Err(Error::domain("max level must lie in -1..=63"));
    }
    if ps.is_empty() {
        return Err(Error::domain("the point set is empty"));
    }
    let d = ps.dim();
    let p = ps.precision_bits();
    let shapes_count = ((max_level + 2) as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    Error::check_budget(
        "coefficient table",
        shapes_count.saturating_mul(ps.len() as u128),
        budget,
    )?;
    if (max_level.max(0) as u64) * d as u64 > 127 {
        return Err(Error::domain("shape orders above 127 are not supported"));
    }
    let counting_exp = p * d as u32;
    if counting_exp as u64 + bit_len(ps.len() as u128) + 1 > 126 {
        return Err(Error::domain(format!(
            "d*precision = {counting_exp} is too large for table storage; use coeff_discrepancy"
        )));
    }
    let shapes = shapes_in_range(d, -1, max_level);
    let blocks: Vec<ShapeBlock> = shapes.into_par_iter().map(|s| build_block(ps, s)).collect();
    let lookup = blocks.iter().enumerate().map(|(i, b)| (b.shape.clone(), i)).collect();
    Ok(HaarCoefficientTable {
        d,
        point_count: ps.len() as u64,
        precision_bits: Some(p),
        max_level,
        counting_exp,
        blocks,
        lookup,
    })
}

/// Sum of squared counting numerators of a block, exact.
pub(crate) fn sum_squares(block: &ShapeBlock) -> BigInt {
    let mut acc = BigInt::zero();
    let mut small: u128 = 0;
    for &c in &block.counting {
        let a = c.unsigned_abs();
        match a.checked_mul(a).and_then(|s| small.checked_add(s)) {
            Some(v) => small = v,
            None => {
                acc += BigInt::from(small);
                small = 0;
                acc += BigInt::from(a) * BigInt::from(a);
            }
        }
    }
    acc + BigInt::from(small)
}

pub(crate) fn sum_counting(block: &ShapeBlock) -> BigInt {
    let mut acc = BigInt::zero();
    let mut small: i128 = 0;
    for &c in &block.counting {
        match small.checked_add(c) {
            Some(v) => small = v,
            None => {
                acc += BigInt::from(small);
                small = c;
            }
        }
    }
    acc + BigInt::from(small)
}
