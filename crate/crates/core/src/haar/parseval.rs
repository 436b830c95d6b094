use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::table::{sum_counting, sum_squares, HaarCoefficientTable};
use crate::dyadic::order;
use crate::error::{Error, Result};
use crate::norms::{Method, NormReport};
use crate::scalar::{ratio_to_f64, Real};

/// `Σ 2^{|j|} Σ_m ⟨N x_1⋯x_d, h_{j,m}⟩²` over all shapes with some level above `max_level`.
pub fn linear_tail(n_points: u64, d: usize, max_level: i32) -> BigRational {
    let rat = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    let total = rat(1, 3);
    let four_pow = BigInt::from(4).pow((max_level + 1) as u32);
    let partial = rat(1, 4) + rat(1, 12) * (BigRational::one() - BigRational::new(BigInt::one(), four_pow));
    let n2 = BigRational::from_integer(BigInt::from(n_points).pow(2));
    n2 * (pow(&total, d) - pow(&partial, d))
}

fn pow(x: &BigRational, d: usize) -> BigRational {
    (0..d).fold(BigRational::one(), |acc, _| acc * x)
}

/// Exact `‖f‖₂²` from the table: the coefficient sum plus the linear tail for tables of
/// a point set.
pub fn parseval_squared(table: &HaarCoefficientTable) -> Result<BigRational> {
    if let Some(p) = table.precision_bits() {
        if table.max_level() < p as i32 - 1 {
            return Err(Error::domain(format!(
                "max level {} is below precision - 1 = {}",
                table.max_level(),
                p as i32 - 1
            )));
        }
        let full = crate::dyadic::shapes_in_range(table.dim(), -1, table.max_level()).len();
        if table.blocks().len() != full {
            return Err(Error::domain("the table has been restricted; Parseval needs every shape"));
        }
    }
    let s = table.counting_exponent();
    let mut acc = BigRational::zero();
    for b in table.blocks() {
        let w = order(b.shape());
        let s2 = BigRational::new(sum_squares(b), BigInt::one() << (2 * s) as usize);
        let s1 = BigRational::new(sum_counting(b), BigInt::one() << s as usize);
        let l = b.linear().to_rational();
        let count = BigRational::from_integer(BigInt::one() << w as usize);
        let block = s2 - BigRational::from_integer(BigInt::from(2)) * &l * s1 + count * &l * &l;
        acc += block * BigRational::from_integer(BigInt::one() << w as usize);
    }
    if table.precision_bits().is_some() {
        acc += linear_tail(table.point_count(), table.dim(), table.max_level());
    }
    Ok(acc)
}

pub fn parseval_l2<F: Real>(table: &HaarCoefficientTable) -> Result<NormReport<F>> {
    let sq = parseval_squared(table)?;
    let v = ratio_to_f64(&sq).max(0.0);
    Ok(NormReport::new(F::of(v.sqrt()), Method::Parseval)
        .param("squared", v)
        .param("max_level", table.max_level())
        .param("shapes", table.blocks().len() as u64))
}
