use std::collections::HashSet;

use super::table::HaarCoefficientTable;
use crate::dyadic::{DyadicIndex, DyadicRational};
use crate::error::{Error, Result};

/// Cap on the number of cells of the common refinement of a region.
const MAX_REGION_CELLS: u128 = 1 << 26;

/// A finite union of dyadic boxes, stored as the set of cells of a common refinement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    d: usize,
    levels: Vec<u32>,
    cells: HashSet<u128>,
    full: bool,
}

fn box_level(j: i32) -> u32 {
    j.max(0) as u32
}

impl Region {
    pub fn cube(d: usize) -> Self {
        Region {
            d,
            levels: vec![0; d],
            cells: std::iter::once(0).collect(),
            full: true,
        }
    }

    pub fn empty(d: usize) -> Self {
        Region {
            d,
            levels: vec![0; d],
            cells: HashSet::new(),
            full: false,
        }
    }

    /// Union of the boxes `I_{j,m}`; a level `-1` is treated as the whole interval.
    pub fn from_boxes(d: usize, boxes: &[DyadicIndex]) -> Result<Self> {
        if boxes.iter().any(|b| b.dim() != d) {
            return Err(Error::domain("box dimension mismatch"));
        }
        let mut levels = vec![0u32; d];
        for b in boxes {
            for (l, &j) in levels.iter_mut().zip(b.levels()) {
                *l = (*l).max(box_level(j));
            }
        }
        let total: u32 = levels.iter().sum();
        if total > 120 {
            return Err(Error::domain("region refinement too fine"));
        }
        let mut cells = HashSet::new();
        for b in boxes {
            let spread: u32 = b.levels().iter().zip(&levels).map(|(&j, &l)| l - box_level(j)).sum();
            let added = cells.len() as u128 + (1u128 << spread);
            Error::check_budget("region cells", added, MAX_REGION_CELLS)?;
            let ranges: Vec<(u64, u64)> = b
                .levels()
                .iter()
                .zip(b.positions())
                .zip(&levels)
                .map(|((&j, &m), &l)| {
                    let s = l - box_level(j);
                    (m << s, 1u64 << s)
                })
                .collect();
            for_each_cell(&ranges, &levels, |c| {
                cells.insert(c);
                true
            });
        }
        let full = cells.len() as u128 == 1u128 << total;
        Ok(Region { d, levels, cells, full })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_cube(&self) -> bool {
        self.full
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn volume(&self) -> DyadicRational {
        DyadicRational::new(self.cells.len() as u64, self.levels.iter().sum())
    }

    /// Whether `I_{j,m} ⊆ U`.
    pub fn contains_box(&self, shape: &[i32], m: &[u64]) -> bool {
        if self.full {
            return true;
        }
        if self.cells.is_empty() {
            return false;
        }
        let ranges: Vec<(u64, u64)> = shape
            .iter()
            .zip(m)
            .zip(&self.levels)
            .map(|((&j, &mk), &l)| {
                let j = box_level(j);
                if j >= l {
                    (mk >> (j - l), 1)
                } else {
                    (mk << (l - j), 1u64 << (l - j))
                }
            })
            .collect();
        let mut inside = true;
        for_each_cell(&ranges, &self.levels, |c| {
            inside = self.cells.contains(&c);
            inside
        });
        inside
    }
}

/// Visits the cells `∏ [start_k, start_k + len_k)` until `f` returns false.
fn for_each_cell(ranges: &[(u64, u64)], levels: &[u32], mut f: impl FnMut(u128) -> bool) {
    let d = ranges.len();
    let mut idx = vec![0u64; d];
    loop {
        let pos = (0..d).fold(0u128, |acc, k| (acc << levels[k]) | (ranges[k].0 + idx[k]) as u128);
        if !f(pos) {
            return;
        }
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < ranges[k].1 {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Total volume of the maximal boxes `I_{j,m} ⊆ U` with all levels `>= 0`, `|j| >= n`
/// and a nonzero counting coefficient.
///
/// For a table of a point set these are the boxes holding a point in their interior;
/// a box is maximal when none of its immediate parents of order `>= n` qualifies.
pub fn maximal_interval_mass(table: &HaarCoefficientTable, region: &Region, n: u32) -> Result<DyadicRational> {
    if region.dim() != table.dim() {
        return Err(Error::domain("region dimension mismatch"));
    }
    if let Some(p) = table.precision_bits() {
        if table.max_level() < p as i32 - 1 {
            return Err(Error::domain("the table must reach level precision - 1"));
        }
    }
    let qualifies = |shape: &[i32], m: &[u64]| -> bool {
        let Some(b) = table.block(shape) else {
            return false;
        };
        let pos = shape.iter().zip(m).fold(0u128, |acc, (&j, &mk)| (acc << j as u32) | mk as u128);
        b.counting_numerator(pos) != 0 && region.contains_box(shape, m)
    };
    let mut mass = DyadicRational::from_int(0);
    for b in table.blocks() {
        let shape = b.shape();
        if shape.iter().any(|&j| j < 0) || b.order() < n {
            continue;
        }
        for (pos, c) in b.entries() {
            if c == 0 {
                continue;
            }
            let m = b.positions_of(pos);
            if !region.contains_box(shape, &m) {
                continue;
            }
            let has_parent = b.order() > n
                && (0..shape.len()).any(|k| {
                    if shape[k] == 0 {
                        return false;
                    }
                    let mut ps = shape.to_vec();
                    ps[k] -= 1;
                    let mut pm = m.clone();
                    pm[k] >>= 1;
                    qualifies(&ps, &pm)
                });
            if !has_parent {
                mass += &DyadicRational::pow2_neg(b.order());
            }
        }
    }
    Ok(mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{coefficient_table, DEFAULT_TABLE_BUDGET};
    use crate::pointset::PointSet;

    fn idx(j: &[i32], m: &[u64]) -> DyadicIndex {
        DyadicIndex::new(j.to_vec(), m.to_vec()).unwrap()
    }

    #[test]
    fn region_basics() {
        let r = Region::from_boxes(2, &[idx(&[1, 0], &[0, 0]), idx(&[2, 1], &[2, 0])]).unwrap();
        assert_eq!(r.volume(), "5/2^3".parse().unwrap());
        assert!(r.contains_box(&[1, 1], &[0, 1]));
        assert!(r.contains_box(&[2, 1], &[2, 0]));
        assert!(!r.contains_box(&[2, 1], &[2, 1]));
        assert!(!r.contains_box(&[0, 0], &[0, 0]));
        let halves = Region::from_boxes(1, &[idx(&[1], &[0]), idx(&[1], &[1])]).unwrap();
        assert!(halves.is_cube());
    }

    /// Direct oracle: all boxes inside U holding a point strictly inside, then the
    /// maximal ones by pairwise containment.
    fn brute_mass(ps: &PointSet, region: &Region, n: u32) -> DyadicRational {
        let p = ps.precision_bits();
        let d = ps.dim();
        let mut found: Vec<(Vec<i32>, Vec<u64>)> = Vec::new();
        for shape in crate::dyadic::shapes_in_range(d, 0, p as i32 - 1) {
            if crate::dyadic::order(&shape) < n {
                continue;
            }
            for m in crate::dyadic::positions(&shape) {
                if !region.contains_box(&shape, &m) {
                    continue;
                }
                let interior = (0..ps.len()).any(|i| {
                    (0..d).all(|k| {
                        let len = 1u64 << (p - shape[k] as u32);
                        let z = ps.numerator(i, k);
                        z > m[k] * len && z < (m[k] + 1) * len
                    })
                });
                if interior {
                    found.push((shape.clone(), m));
                }
            }
        }
        let inside = |a: &(Vec<i32>, Vec<u64>), b: &(Vec<i32>, Vec<u64>)| {
            (0..d).all(|k| a.0[k] >= b.0[k] && (a.1[k] >> (a.0[k] - b.0[k])) == b.1[k])
        };
        let mut mass = DyadicRational::from_int(0);
        for a in &found {
            if !found.iter().any(|b| b != a && inside(a, b)) {
                mass += &DyadicRational::pow2_neg(crate::dyadic::order(&a.0));
            }
        }
        mass
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..8 {
            let d = 1 + seed as usize % 2;
            let ps = PointSet::random(d, 5, 4, seed).unwrap();
            let t = coefficient_table(&ps, 3, DEFAULT_TABLE_BUDGET).unwrap();
            let regions = [
                Region::cube(d),
                Region::from_boxes(d, &[DyadicIndex::new(vec![1; d], vec![0; d]).unwrap()]).unwrap(),
            ];
            for r in &regions {
                for n in 0..4 {
                    assert_eq!(maximal_interval_mass(&t, r, n).unwrap(), brute_mass(&ps, r, n), "seed {seed} n {n}");
                }
            }
        }
    }

    #[test]
    fn point_free_region() {
        let ps = PointSet::from_numerators(2, 2, vec![1, 1]).unwrap();
        let t = coefficient_table(&ps, 2, DEFAULT_TABLE_BUDGET).unwrap();
        let r = Region::from_boxes(2, &[idx(&[1, 1], &[1, 1])]).unwrap();
        assert_eq!(maximal_interval_mass(&t, &r, 0).unwrap(), DyadicRational::from_int(0));
        assert_eq!(maximal_interval_mass(&t, &Region::empty(2), 0).unwrap(), DyadicRational::from_int(0));
    }
}
