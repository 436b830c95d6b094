use serde::Serialize;

use super::orlicz::{orlicz_norm_proxy, DEFAULT_P_GRID};
use crate::dyadic::order;
use crate::error::{Error, Result};
use crate::haar::{square_function_grid, table_function, HaarCoefficientTable};

/// `‖f‖_{exp(L^{2/(d-1)})}` (proxy) against `‖Sf‖_∞` for a single-order table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CwwReport {
    pub order: u32,
    pub alpha: f64,
    pub exp_norm: f64,
    pub square_sup: f64,
    /// `None` for the zero function.
    pub ratio: Option<f64>,
}

fn single_order(table: &HaarCoefficientTable) -> Result<u32> {
    let orders: Vec<u32> = table.blocks().iter().map(|b| order(b.shape())).collect();
    match orders.first() {
        Some(&n) if orders.iter().all(|&o| o == n) => Ok(n),
        Some(_) => Err(Error::domain("the table mixes several orders")),
        None => Err(Error::domain("the table is empty")),
    }
}

fn shapes(table: &HaarCoefficientTable) -> Vec<Vec<i32>> {
    table.blocks().iter().map(|b| b.shape().to_vec()).collect()
}

pub fn cww_check(table: &HaarCoefficientTable, budget: u128) -> Result<CwwReport> {
    let d = table.dim();
    if d < 2 {
        return Err(Error::domain("the exponent 2/(d-1) needs d >= 2"));
    }
    let n = single_order(table)?;
    let alpha = 2.0 / (d as f64 - 1.0);
    let f = table_function(table, budget)?;
    let exp_norm = orlicz_norm_proxy::<_, f64>(&f, alpha, &DEFAULT_P_GRID)?.value;
    let square_sup = square_function_grid(table, &shapes(table), budget)?
        .values()
        .iter()
        .fold(0f64, |m, &v| m.max(v));
    Ok(CwwReport {
        order: n,
        alpha,
        exp_norm,
        square_sup,
        ratio: (square_sup > 0.0).then(|| exp_norm / square_sup),
    })
}

/// `‖f‖_p / (p^{(d-1)/2} ‖Sf‖_p)` at one `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LittlewoodPaleyRatio {
    pub p: u32,
    pub norm: f64,
    pub square_norm: f64,
    pub ratio: Option<f64>,
}

/// Hyperbolic Littlewood–Paley ratios of a single-order table.
pub fn littlewood_paley_ratios(
    table: &HaarCoefficientTable,
    p_grid: &[u32],
    budget: u128,
) -> Result<Vec<LittlewoodPaleyRatio>> {
    single_order(table)?;
    let d = table.dim();
    let f = table_function(table, budget)?;
    let s = square_function_grid(table, &shapes(table), budget)?;
    Ok(p_grid
        .iter()
        .map(|&p| {
            let norm = f.lp(p as f64);
            let square_norm = s.lp(p as f64);
            let scale = (p as f64).powf((d as f64 - 1.0) / 2.0) * square_norm;
            LittlewoodPaleyRatio {
                p,
                norm,
                square_norm,
                ratio: (scale > 0.0).then(|| norm / scale),
            }
        })
        .collect())
}
