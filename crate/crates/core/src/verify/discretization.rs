use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discrepancy::local_discrepancy;
use crate::dyadic::DyadicRational;
use crate::error::Result;
use crate::pointset::PointSet;

/// Behaviour of `D` on cells `∏(a_k 2^{-P}, (a_k+1) 2^{-P}]` of the grid of a binary net
/// with `N = 2^n` points and precision `P = σn`.
///
/// On such a cell the counting part is constant, so `D` varies exactly by the range of
/// `N x_1⋯x_d`, which is at most `N 2^{-P} Σ_k ∏_{i≠k} (a_i+1) 2^{-P} <= N·d·2^{-P}`.
/// The check is qualitative: it confirms the ordering of magnitudes, not a constant of
/// any implication chain built on it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscretizationReport {
    pub applicable: bool,
    /// Why the check does not apply.
    pub reason: Option<String>,
    pub n: u32,
    pub precision_bits: u32,
    pub samples: usize,
    /// Largest `sup - inf` of `D` over the sampled cells.
    pub max_variation: f64,
    /// `N·d·2^{-P}`.
    pub bound: f64,
    /// Cells where the counting part was not constant.
    pub counting_violations: usize,
    /// Cells whose variation exceeds the face-product bound of that cell.
    pub bound_violations: usize,
    pub pass: bool,
}

impl DiscretizationReport {
    fn inapplicable(reason: &str) -> Self {
        DiscretizationReport {
            applicable: false,
            reason: Some(reason.to_string()),
            n: 0,
            precision_bits: 0,
            samples: 0,
            max_variation: 0.0,
            bound: 0.0,
            counting_violations: 0,
            bound_violations: 0,
            pass: false,
        }
    }
}

/// Samples `samples` cells with a seeded generator. Applies to `N = 2^n` points whose
/// coordinates need exactly a multiple of `n` bits.
pub fn discretization_consistency(ps: &PointSet, samples: usize, seed: u64) -> Result<DiscretizationReport> {
    let big_n = ps.len();
    if big_n == 0 || !big_n.is_power_of_two() {
        return Ok(DiscretizationReport::inapplicable("the number of points is not a power of two"));
    }
    let n = big_n.trailing_zeros();
    let minimal = ps.minimal_precision();
    if n > 0 && minimal % n != 0 {
        return Ok(DiscretizationReport::inapplicable(
            "the coordinates are not on the 2^{-σn} grid of a binary net",
        ));
    }
    let p = minimal.max(n).max(1);
    if p > 60 {
        return Ok(DiscretizationReport::inapplicable("the grid is too fine"));
    }
    let ps = if ps.precision_bits() == p { ps.clone() } else { coarsen(ps, p)? };
    let d = ps.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = DyadicRational::pow2_neg(p);
    let (mut max_variation, mut counting_violations, mut bound_violations) = (0f64, 0, 0);
    for _ in 0..samples {
        let a: Vec<u64> = (0..d).map(|_| rng.gen_range(0..(1u64 << p))).collect();
        let upper: Vec<DyadicRational> = a.iter().map(|&ak| DyadicRational::new(ak + 1, p)).collect();
        let mid: Vec<DyadicRational> = a.iter().map(|&ak| DyadicRational::new(2 * ak + 1, p + 1)).collect();
        let at_upper = local_discrepancy(&ps, &upper)?;
        let at_mid = local_discrepancy(&ps, &mid)?;
        if at_upper.counting != at_mid.counting {
            counting_violations += 1;
        }
        let lower = a
            .iter()
            .fold(DyadicRational::from_int(big_n as i64), |acc, &ak| acc * DyadicRational::new(ak, p));
        let variation = at_upper.linear.clone() - &lower;
        let mut cell_bound = DyadicRational::from_int(0);
        for k in 0..d {
            let face = (0..d)
                .filter(|&i| i != k)
                .fold(DyadicRational::from_int(big_n as i64) * &h, |acc, i| acc * &upper[i]);
            cell_bound += &face;
        }
        if variation > cell_bound {
            bound_violations += 1;
        }
        max_variation = max_variation.max(variation.to_f64());
    }
    let bound = big_n as f64 * d as f64 * 2f64.powi(-(p as i32));
    let pass = counting_violations == 0 && bound_violations == 0 && max_variation <= bound;
    Ok(DiscretizationReport {
        applicable: true,
        reason: None,
        n,
        precision_bits: p,
        samples,
        max_variation,
        bound,
        counting_violations,
        bound_violations,
        pass,
    })
}

fn coarsen(ps: &PointSet, p: u32) -> Result<PointSet> {
    let shift = ps.precision_bits().saturating_sub(p);
    let coords = ps.all_numerators().iter().map(|&c| c >> shift).collect();
    let coarse = PointSet::from_numerators(ps.dim(), ps.precision_bits() - shift, coords)?;
    if coarse.precision_bits() < p {
        coarse.with_precision(p)
    } else {
        Ok(coarse)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2net::{builtin, digital_points};

    #[test]
    fn single_point() {
        let ps = PointSet::from_numerators(2, 3, vec![5, 2]).unwrap();
        let r = discretization_consistency(&ps, 200, 1).unwrap();
        assert!(r.applicable && r.pass);
        assert!(r.max_variation <= r.bound);
    }

    #[test]
    fn hammersley_sixteen() {
        let ps = digital_points(&builtin("hammersley", 2, 4, 1).unwrap()).unwrap();
        let r = discretization_consistency(&ps, 1000, 7).unwrap();
        assert!(r.applicable && r.pass, "{r:?}");
        assert_eq!(r.precision_bits, 4);
        assert_eq!(r.bound, 2.0);
        assert!(r.max_variation > 1.0);
        assert_eq!(r.counting_violations, 0);
    }

    #[test]
    fn order_two_net() {
        let ps = digital_points(&builtin("hammersley", 3, 3, 2).unwrap()).unwrap();
        let r = discretization_consistency(&ps, 300, 2).unwrap();
        assert!(r.applicable && r.pass);
        assert_eq!(r.precision_bits, 6);
    }

    #[test]
    fn random_set_is_flagged() {
        let ps = PointSet::random(2, 16, 30, 4).unwrap();
        let r = discretization_consistency(&ps, 10, 0).unwrap();
        assert!(!r.applicable && r.reason.is_some());
        let ps = PointSet::random(2, 10, 8, 4).unwrap();
        assert!(!discretization_consistency(&ps, 10, 0).unwrap().applicable);
    }
}
