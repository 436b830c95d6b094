use std::collections::HashSet;

use serde::Serialize;

use crate::dyadic::{enumerate_shapes, DyadicRational};
use crate::error::{Error, Result};
use crate::gf2net::linear_position;
use crate::norms::{Method, NormReport};
use crate::pointset::PointSet;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShapeEmptyCount {
    pub shape: Vec<i32>,
    pub empty: u64,
    pub total: u64,
}

/// Empty dyadic boxes of order `n` with `2N <= 2^n < 4N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmptyBoxReport {
    pub n: u32,
    pub shapes: Vec<ShapeEmptyCount>,
    /// Every shape has at least `2^{n-1}` empty boxes.
    pub pass: bool,
    /// `Σ_{|j|=n} 2^n Σ_{empty m} ⟨N x_1⋯x_d, h_{j,m}⟩²`, exact.
    pub lower_bound_squared: String,
    pub lower_bound: f64,
}

/// The order `n` with `2N <= 2^n < 4N`.
pub fn empty_box_order(n_points: usize) -> u32 {
    let two_n = 2 * n_points.max(1) as u64;
    64 - (two_n - 1).leading_zeros()
}

pub fn check_empty_boxes(ps: &PointSet) -> Result<EmptyBoxReport> {
    if ps.is_empty() {
        return Err(Error::domain("the point set is empty"));
    }
    let d = ps.dim();
    let n = empty_box_order(ps.len());
    if n > 40 {
        return Err(Error::domain("order too large for box enumeration"));
    }
    let shapes = enumerate_shapes(d, n);
    let mut counts = Vec::with_capacity(shapes.len());
    let mut empty_total: u128 = 0;
    for shape in shapes {
        let occupied: HashSet<u128> = (0..ps.len()).map(|i| linear_position(ps, &shape, i)).collect();
        let total = 1u64 << n;
        let empty = total - occupied.len() as u64;
        empty_total += empty as u128;
        counts.push(ShapeEmptyCount { shape, empty, total });
    }
    let pass = counts.iter().all(|c| c.empty >= 1u64 << (n - 1));
    // each empty box has coefficient -N ∏(-2^{-2j_k-2}), squared N² 2^{-4n-4d}
    let big_n = ps.len() as i64;
    let sq = DyadicRational::from_int(big_n * big_n)
        * DyadicRational::new(empty_total, 4 * n + 4 * d as u32)
        * DyadicRational::from_int(1).mul_pow2(n as i64);
    Ok(EmptyBoxReport {
        n,
        shapes: counts,
        pass,
        lower_bound: sq.to_f64().sqrt(),
        lower_bound_squared: sq.to_string(),
    })
}

/// `(Σ_{|j|=n} 2^n Σ_{empty m} coeff²)^{1/2}`, a lower bound for the BMO norm with
/// `U` the cube.
pub fn bmo_lower_bound<F: Real>(ps: &PointSet) -> Result<NormReport<F>> {
    let r = check_empty_boxes(ps)?;
    Ok(NormReport::new(F::of(r.lower_bound), Method::EmptyBox)
        .param("n", r.n)
        .param("squared", r.lower_bound_squared)
        .param("pass", r.pass))
}
