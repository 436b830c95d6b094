use rayon::prelude::*;
use serde::Serialize;

use super::{bmo_lower_bound, empty_box_order, fit_exponent};
use crate::discrepancy::{l2_warnock, star_discrepancy};
use crate::error::{Error, Result};
use crate::gf2net::{builtin, digital_points};
use crate::haar::coefficient_table;
use crate::norms::{bmo_proxy, orlicz_norm_proxy, CandidateFamily, DiscrepancyFunction, Method, DEFAULT_P_GRID};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "norm")]
pub enum StudyNorm {
    BmoProxy,
    OrliczProxy { alpha: f64 },
    Star,
    L2,
    BmoLowerBound,
}

impl StudyNorm {
    pub fn name(&self) -> &'static str {
        match self {
            StudyNorm::BmoProxy => "bmo-proxy",
            StudyNorm::OrliczProxy { .. } => "orlicz-proxy",
            StudyNorm::Star => "star",
            StudyNorm::L2 => "l2",
            StudyNorm::BmoLowerBound => "bmo-lower-bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyPoint {
    pub n: u32,
    /// Abscissa of the fit: `n`, or for the empty-box bound its box order (`n + 1` for
    /// `N = 2^n`).
    pub order: u32,
    pub points: u64,
    pub value: f64,
    pub method: Method,
}

/// Norm values of a net family over a range of `n` with the fitted exponent of
/// `value ≈ c·n^e`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingStudy {
    pub construction: String,
    pub d: usize,
    pub sigma: usize,
    pub norm: StudyNorm,
    pub points: Vec<StudyPoint>,
    pub exponent: f64,
    pub intercept: f64,
    pub residual: f64,
}

impl ScalingStudy {
    /// `value / order^e` for each point.
    pub fn normalized(&self, e: f64) -> Vec<f64> {
        self.points.iter().map(|p| p.value / (p.order as f64).powf(e)).collect()
    }
}

fn evaluate(construction: &str, d: usize, sigma: usize, n: u32, norm: StudyNorm, budget: u128) -> Result<StudyPoint> {
    let spec = builtin(construction, d, n as usize, sigma)?;
    let ps = digital_points(&spec)?;
    let mut order = n;
    let report = match norm {
        StudyNorm::Star => star_discrepancy::<f64>(&ps, budget)?,
        StudyNorm::L2 => l2_warnock::<f64>(&ps, budget)?,
        StudyNorm::BmoLowerBound => {
            order = empty_box_order(ps.len());
            bmo_lower_bound::<f64>(&ps)?
        }
        StudyNorm::BmoProxy => {
            let table = coefficient_table(&ps, ps.precision_bits() as i32 - 1, budget)?;
            bmo_proxy::<f64>(&table, &CandidateFamily::for_table(&table), budget)?
        }
        StudyNorm::OrliczProxy { alpha } => {
            let f = DiscrepancyFunction::with_budget(&ps, budget);
            orlicz_norm_proxy::<_, f64>(&f, alpha, &DEFAULT_P_GRID)?
        }
    };
    Ok(StudyPoint {
        n,
        order,
        points: ps.len() as u64,
        value: report.value,
        method: report.method,
    })
}

/// Builds the bundled net `construction` of order `sigma` at each `n`, evaluates the norm
/// of its discrepancy function and fits the exponent by least squares of `log value`
/// against `log n` (the box order for [`StudyNorm::BmoLowerBound`]).
pub fn scaling_study(
    construction: &str,
    d: usize,
    sigma: usize,
    ns: &[u32],
    norm: StudyNorm,
    budget: u128,
) -> Result<ScalingStudy> {
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::domain("a scaling study needs at least 4 distinct n"));
    }
    if distinct[0] == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let points = distinct
        .par_iter()
        .map(|&n| evaluate(construction, d, sigma, n, norm, budget))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.order as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value).collect();
    let fit = fit_exponent(&xs, &ys).ok_or_else(|| Error::domain("norm values must be positive to fit an exponent"))?;
    Ok(ScalingStudy {
        construction: construction.to_string(),
        d,
        sigma,
        norm,
        points,
        exponent: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
    })
}
