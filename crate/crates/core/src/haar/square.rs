use super::table::HaarCoefficientTable;
use crate::dyadic::{order, position_of, DyadicRational};
use crate::error::{Error, Result};
use crate::norms::GridFunction;

fn covered<'a>(table: &'a HaarCoefficientTable, shape: &[i32]) -> Result<&'a super::ShapeBlock> {
    if shape.len() != table.dim() {
        return Err(Error::domain("shape dimension mismatch"));
    }
    table
        .block(shape)
        .ok_or_else(|| Error::domain(format!("shape {shape:?} is not covered by the table")))
}

/// `(Σ_{j ∈ shapes} 2^{2|j|} Σ_m ⟨f,h_{j,m}⟩² χ_{I_{j,m}}(x))^{1/2}`.
pub fn square_function(table: &HaarCoefficientTable, shapes: &[Vec<i32>], x: &[DyadicRational]) -> Result<f64> {
    if x.len() != table.dim() || x.iter().any(|v| !v.in_unit_interval()) {
        return Err(Error::domain("x must be a point of [0,1)^d"));
    }
    let exp = x.iter().map(|v| v.exponent()).max().unwrap_or(0).min(63);
    let num: Vec<u64> = x
        .iter()
        .map(|v| {
            v.u64_numerator_at(exp)
                .ok_or_else(|| Error::domain("x needs more than 63 bits"))
        })
        .collect::<Result<_>>()?;
    let mut acc = DyadicRational::from_int(0);
    for shape in shapes {
        let b = covered(table, shape)?;
        let pos = shape
            .iter()
            .zip(&num)
            .fold(0u128, |acc, (&j, &z)| (acc << j.max(0) as u32) | position_of(z, exp, j) as u128);
        let c = table.counting_value(b.counting_numerator(pos)) - b.linear();
        acc += &c.square().mul_pow2(2 * order(shape) as i64);
    }
    Ok(acc.to_f64().sqrt())
}

/// The square function on the cells of the finest level of `shapes` in each
/// coordinate, where it is constant.
pub fn square_function_grid(table: &HaarCoefficientTable, shapes: &[Vec<i32>], budget: u128) -> Result<GridFunction> {
    let d = table.dim();
    let blocks = shapes.iter().map(|s| covered(table, s)).collect::<Result<Vec<_>>>()?;
    let levels: Vec<u32> = (0..d)
        .map(|k| shapes.iter().map(|s| s[k].max(0) as u32).max().unwrap_or(0))
        .collect();
    let total: u32 = levels.iter().sum();
    if total > 40 {
        return Err(Error::domain("square function grid too fine"));
    }
    let cells = 1u128 << total;
    Error::check_budget("square function cells", cells.saturating_mul(shapes.len().max(1) as u128), budget)?;
    let mut values = vec![0f64; cells as usize];
    let mut cell = vec![0u64; d];
    for (lin, v) in values.iter_mut().enumerate() {
        let mut rest = lin;
        for k in (0..d).rev() {
            cell[k] = (rest & ((1usize << levels[k]) - 1)) as u64;
            rest >>= levels[k];
        }
        let mut acc = 0f64;
        for (s, b) in shapes.iter().zip(&blocks) {
            let pos = (0..d).fold(0u128, |acc, k| {
                let j = s[k].max(0) as u32;
                (acc << j) | (cell[k] >> (levels[k] - j)) as u128
            });
            let c = table.coefficient_f64(b, pos);
            acc += c * c * 4f64.powi(order(s) as i32);
        }
        *v = acc.sqrt();
    }
    GridFunction::new(levels, values)
}

/// `sup_x` of the square function.
pub fn square_function_sup(table: &HaarCoefficientTable, shapes: &[Vec<i32>], budget: u128) -> Result<f64> {
    let g = square_function_grid(table, shapes, budget)?;
    Ok(g.values().iter().fold(0f64, |m, &v| m.max(v)))
}

/// The function `Σ 2^{|j|} ⟨f,h_{j,m}⟩ h_{j,m}` over the shapes of the table, sampled on
/// the grid where it is piecewise constant.
pub fn table_function(table: &HaarCoefficientTable, budget: u128) -> Result<GridFunction> {
    let d = table.dim();
    let levels: Vec<u32> = (0..d)
        .map(|k| {
            table
                .blocks()
                .iter()
                .map(|b| (b.shape()[k] + 1) as u32)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let total: u32 = levels.iter().sum();
    if total > 60 {
        return Err(Error::domain("grid too fine"));
    }
    let cells = 1u128 << total;
    Error::check_budget(
        "grid function",
        cells.saturating_mul(table.blocks().len().max(1) as u128),
        budget,
    )?;
    let mut values = vec![0f64; cells as usize];
    let mut cell = vec![0u64; d];
    for (lin, v) in values.iter_mut().enumerate() {
        let mut rest = lin as u128;
        for k in (0..d).rev() {
            cell[k] = (rest & ((1u128 << levels[k]) - 1)) as u64;
            rest >>= levels[k];
        }
        let mut acc = 0f64;
        for b in table.blocks() {
            let s = b.shape();
            let mut pos = 0u128;
            let mut sign = 1f64;
            for k in 0..d {
                if s[k] < 0 {
                    continue;
                }
                let fine = cell[k] >> (levels[k] - (s[k] as u32 + 1));
                pos = (pos << s[k] as u32) | (fine >> 1) as u128;
                if fine & 1 == 1 {
                    sign = -sign;
                }
            }
            acc += sign * table.coefficient_f64(b, pos) * 2f64.powi(b.order() as i32);
        }
        *v = acc;
    }
    GridFunction::new(levels, values)
}
