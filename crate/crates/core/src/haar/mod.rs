//! Exact Haar coefficients of the discrepancy function, the Littlewood–Paley square
//! function and the Parseval form of the L2 norm.
//!
//! Coefficients are `⟨f, h_{j,m}⟩` with L∞-normalised Haar functions, so a table
//! represents the function `Σ 2^{|j|} ⟨f,h_{j,m}⟩ h_{j,m}`.

mod parseval;
mod region;
mod square;
mod table;

use num_traits::Zero;

use crate::dyadic::{DyadicIndex, DyadicRational};
use crate::error::{Error, Result};
use crate::pointset::PointSet;

pub use parseval::{linear_tail, parseval_l2, parseval_squared};
pub use region::{maximal_interval_mass, Region};
pub use square::{square_function, square_function_grid, square_function_sup, table_function};
pub use table::{coefficient_table, HaarCoefficientTable, ShapeBlock, DEFAULT_TABLE_BUDGET};

/// `⟨x, h_j⟩` in one dimension: `1/2` for level `-1`, `-2^{-2j-2}` otherwise.
fn linear_factor(j: i32) -> DyadicRational {
    if j < 0 {
        DyadicRational::pow2_neg(1)
    } else {
        -DyadicRational::pow2_neg(2 * j as u32 + 2)
    }
}

/// `⟨N x_1⋯x_d, h_{j,m}⟩ = N ∏_k c(j_k)`; independent of `m`.
pub fn coeff_linear(index: &DyadicIndex, n_points: u64) -> DyadicRational {
    linear_for_shape(index.levels(), n_points)
}

pub(crate) fn linear_for_shape(shape: &[i32], n_points: u64) -> DyadicRational {
    shape
        .iter()
        .fold(DyadicRational::from_int(n_points as i64), |acc, &j| acc * linear_factor(j))
}

/// One-dimensional `⟨χ_{[z,1)}, h_{j,m}⟩`.
fn point_factor(j: i32, m: u64, z: &DyadicRational) -> DyadicRational {
    if j < 0 {
        return DyadicRational::from_int(1) - z;
    }
    let e = j as u32 + 1;
    let l = DyadicRational::new(2 * m, e);
    let mid = DyadicRational::new(2 * m + 1, e);
    let r = DyadicRational::new(2 * m + 2, e);
    if z <= &l || z >= &r {
        DyadicRational::zero()
    } else if z <= &mid {
        l - z
    } else {
        z - r
    }
}

/// `⟨χ_{[z,1)}, h_{j,m}⟩`, the contribution of one point to the counting coefficient.
pub fn coeff_point(index: &DyadicIndex, z: &[DyadicRational]) -> Result<DyadicRational> {
    if z.len() != index.dim() {
        return Err(Error::domain("point dimension mismatch"));
    }
    if z.iter().any(|v| !v.in_unit_interval()) {
        return Err(Error::domain("point must lie in [0,1)^d"));
    }
    let mut acc = DyadicRational::from_int(1);
    for ((&j, &m), zk) in index.levels().iter().zip(index.positions()).zip(z) {
        acc = acc * point_factor(j, m, zk);
        if acc.is_zero() {
            break;
        }
    }
    Ok(acc)
}

/// Integer form of [`point_factor`] for a coordinate with numerator `z` over `2^p`,
/// evaluated on the box of level `j` containing `z`; the result is over `2^p`.
#[inline]
pub(crate) fn point_factor_int(j: i32, z: u64, p: u32) -> i64 {
    if j < 0 {
        return ((1u64 << p) - z) as i64;
    }
    let j = j as u32;
    if j >= p {
        return 0;
    }
    let len = 1u64 << (p - j);
    let l = z & !(len - 1);
    if z == l {
        return 0;
    }
    let mid = l + len / 2;
    if z <= mid {
        l as i64 - z as i64
    } else {
        z as i64 - (l + len) as i64
    }
}

/// Exact `⟨D_P, h_{j,m}⟩`.
pub fn coeff_discrepancy(ps: &PointSet, index: &DyadicIndex) -> Result<DyadicRational> {
    if index.dim() != ps.dim() {
        return Err(Error::domain("index dimension mismatch"));
    }
    let p = ps.precision_bits();
    let mut counting = num_bigint::BigInt::zero();
    for i in 0..ps.len() {
        let z = ps.numerators(i);
        let mut prod = num_bigint::BigInt::from(1);
        for (k, (&j, &m)) in index.levels().iter().zip(index.positions()).enumerate() {
            if j >= 0 && crate::dyadic::position_of(z[k], p, j) != m {
                prod = num_bigint::BigInt::zero();
                break;
            }
            let g = point_factor_int(j, z[k], p);
            if g == 0 {
                prod = num_bigint::BigInt::zero();
                break;
            }
            prod *= g;
        }
        counting += prod;
    }
    let counting = DyadicRational::new(counting, p * ps.dim() as u32);
    Ok(counting - coeff_linear(index, ps.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dr(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn idx(j: &[i32], m: &[u64]) -> DyadicIndex {
        DyadicIndex::new(j.to_vec(), m.to_vec()).unwrap()
    }

    #[test]
    fn linear_examples() {
        assert_eq!(coeff_linear(&idx(&[0], &[0]), 1), dr("-1/2^2"));
        assert_eq!(coeff_linear(&idx(&[-1], &[0]), 1), dr("1/2^1"));
        assert_eq!(coeff_linear(&idx(&[0, 0], &[0, 0]), 4), dr("1/2^2"));
    }

    #[test]
    fn point_examples() {
        let h = idx(&[0], &[0]);
        assert_eq!(coeff_point(&h, &[dr("0")]).unwrap(), dr("0"));
        assert_eq!(coeff_point(&h, &[dr("1/2^2")]).unwrap(), dr("-1/2^2"));
        assert_eq!(coeff_point(&h, &[dr("1/2^1")]).unwrap(), dr("-1/2^1"));
        assert_eq!(coeff_point(&idx(&[-1], &[0]), &[dr("1/2^2")]).unwrap(), dr("3/2^2"));
    }

    #[test]
    fn discrepancy_examples() {
        let origin = PointSet::from_numerators(1, 0, vec![0]).unwrap();
        assert_eq!(coeff_discrepancy(&origin, &idx(&[0], &[0])).unwrap(), dr("1/2^2"));
        // mean of D over the cube: ∫(1 - x) for the origin
        assert_eq!(coeff_discrepancy(&origin, &idx(&[-1], &[0])).unwrap(), dr("1/2^1"));
    }

    #[test]
    fn integer_factor_matches_exact() {
        let p = 6;
        for j in -1..8 {
            for z in 0..64u64 {
                let m = crate::dyadic::position_of(z, p, j);
                let exact = point_factor(j, m, &DyadicRational::new(z, p));
                assert_eq!(DyadicRational::new(point_factor_int(j, z, p), p), exact, "j={j} z={z}");
            }
        }
    }
}
