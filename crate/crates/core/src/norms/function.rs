use std::sync::OnceLock;

use crate::discrepancy::{l2_warnock, star_discrepancy_exact, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::pointset::PointSet;

use super::lp::lp_norm_exact;

/// A bounded function on `[0,1)^d` whose norms the estimators can evaluate.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    /// `‖f‖_∞`.
    fn sup_norm(&self) -> Result<f64>;
    /// Exact `‖f‖_p` for an integer `p >= 1`, or `None` if no exact method applies.
    fn lp_exact(&self, p: u32) -> Result<Option<f64>>;

    fn l2_norm(&self) -> Result<f64> {
        self.lp_exact(2)?
            .ok_or_else(|| Error::domain("no exact L2 norm for this integrand"))
    }
}

/// The constant function `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant {
    pub d: usize,
    pub c: f64,
}

impl Integrand for Constant {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, _x: &[f64]) -> f64 {
        self.c
    }

    fn sup_norm(&self) -> Result<f64> {
        Ok(self.c.abs())
    }

    fn lp_exact(&self, _p: u32) -> Result<Option<f64>> {
        Ok(Some(self.c.abs()))
    }
}

/// `λ·f`.
pub struct Scaled<'a, I: Integrand> {
    pub inner: &'a I,
    pub factor: f64,
}

impl<I: Integrand> Integrand for Scaled<'_, I> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.eval(x)
    }

    fn sup_norm(&self) -> Result<f64> {
        Ok(self.factor.abs() * self.inner.sup_norm()?)
    }

    fn lp_exact(&self, p: u32) -> Result<Option<f64>> {
        Ok(self.inner.lp_exact(p)?.map(|v| self.factor.abs() * v))
    }
}

/// A function constant on the cells of the dyadic grid with `2^{levels[k]}` cells in
/// coordinate `k`; values are stored with the last coordinate varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    levels: Vec<u32>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(levels: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        let total: u32 = levels.iter().sum();
        if levels.is_empty() || total > 40 || values.len() != 1usize << total {
            return Err(Error::domain("grid function size does not match its levels"));
        }
        Ok(GridFunction { levels, values })
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            levels: self.levels.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `(mean |v|^p)^{1/p}` for real `p >= 1`.
    pub fn lp(&self, p: f64) -> f64 {
        let mean = self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / self.values.len() as f64;
        mean.powf(1.0 / p)
    }
}

impl Integrand for GridFunction {
    fn dim(&self) -> usize {
        self.levels.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let idx = self.levels.iter().zip(x).fold(0usize, |acc, (&l, &xk)| {
            let cells = 1usize << l;
            let c = ((xk * cells as f64) as usize).min(cells - 1);
            (acc << l) | c
        });
        self.values[idx]
    }

    fn sup_norm(&self) -> Result<f64> {
        Ok(self.values.iter().fold(0f64, |m, v| m.max(v.abs())))
    }

    fn lp_exact(&self, p: u32) -> Result<Option<f64>> {
        Ok(Some(self.lp(p as f64)))
    }
}

/// The discrepancy function of a point set, with its sup norm and L2 norm cached.
pub struct DiscrepancyFunction<'a> {
    ps: &'a PointSet,
    coords: Vec<f64>,
    budget: u128,
    sup: OnceLock<f64>,
    l2: OnceLock<f64>,
}

impl<'a> DiscrepancyFunction<'a> {
    pub fn new(ps: &'a PointSet) -> Self {
        Self::with_budget(ps, DEFAULT_BUDGET)
    }

    pub fn with_budget(ps: &'a PointSet, budget: u128) -> Self {
        DiscrepancyFunction {
            ps,
            coords: ps.to_f64(),
            budget,
            sup: OnceLock::new(),
            l2: OnceLock::new(),
        }
    }

    pub fn point_set(&self) -> &PointSet {
        self.ps
    }
}

impl Integrand for DiscrepancyFunction<'_> {
    fn dim(&self) -> usize {
        self.ps.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let d = self.ps.dim();
        let count = self
            .coords
            .chunks_exact(d)
            .filter(|z| z.iter().zip(x).all(|(a, b)| a < b))
            .count();
        count as f64 - self.ps.len() as f64 * x.iter().product::<f64>()
    }

    fn sup_norm(&self) -> Result<f64> {
        if let Some(&v) = self.sup.get() {
            return Ok(v);
        }
        let v = star_discrepancy_exact(self.ps, self.budget)?.value.to_f64();
        Ok(*self.sup.get_or_init(|| v))
    }

    fn lp_exact(&self, p: u32) -> Result<Option<f64>> {
        if p == 2 {
            if let Some(&v) = self.l2.get() {
                return Ok(Some(v));
            }
            let v = l2_warnock::<f64>(self.ps, self.budget)?.value;
            return Ok(Some(*self.l2.get_or_init(|| v)));
        }
        if p % 2 == 1 {
            return Ok(None);
        }
        Ok(Some(lp_norm_exact::<f64>(self.ps, p, self.budget)?.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_function_eval_and_norms() {
        let g = GridFunction::new(vec![1, 1], vec![1.0, -2.0, 0.0, 3.0]).unwrap();
        assert_eq!(g.eval(&[0.1, 0.7]), -2.0);
        assert_eq!(g.eval(&[0.6, 0.9]), 3.0);
        assert_eq!(g.sup_norm().unwrap(), 3.0);
        assert!((g.lp(2.0) - (14.0f64 / 4.0).sqrt()).abs() < 1e-15);
        assert!(GridFunction::new(vec![1], vec![0.0]).is_err());
    }

    #[test]
    fn discrepancy_function_eval() {
        let ps = PointSet::from_numerators(1, 1, vec![1]).unwrap();
        let f = DiscrepancyFunction::new(&ps);
        assert_eq!(f.eval(&[0.25]), -0.25);
        assert_eq!(f.eval(&[0.75]), 0.25);
        assert_eq!(f.sup_norm().unwrap(), 0.5);
        assert!((f.l2_norm().unwrap() - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
