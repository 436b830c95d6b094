//! Empirical checks of the discrepancy estimates: empty-box counts, coefficient
//! bounds, regime sums, scaling studies and the discretization check.

mod discretization;
mod empty;
mod regimes;
mod study;

pub use discretization::{discretization_consistency, DiscretizationReport};
pub use empty::{bmo_lower_bound, check_empty_boxes, empty_box_order, EmptyBoxReport, ShapeEmptyCount};
pub use regimes::{lemma31_fit, three_regime_sums, Lemma31Fit, RegimeSums};
pub use study::{scaling_study, ScalingStudy, StudyNorm, StudyPoint};

use serde::Serialize;

/// Least-squares line `y = slope·x + intercept` with the root-mean-square residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(LinearFit {
        slope,
        intercept,
        residual,
    })
}

/// Exponent `e` of `value ≈ c·n^e` by least squares on logarithms.
pub fn fit_exponent(ns: &[f64], values: &[f64]) -> Option<LinearFit> {
    if values.iter().any(|&v| !(v > 0.0)) || ns.iter().any(|&n| !(n > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_line(&xs, &ys)
}

/// `max / min` of positive values; the stability measure of a fitted constant.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}
