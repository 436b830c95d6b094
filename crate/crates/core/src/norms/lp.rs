use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Integrand, Method, NormReport};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::scalar::{bit_len, ratio_to_f64, ExactInt, Real};

struct Cells<'a, I> {
    ps: &'a PointSet,
    p: usize,
    /// `zpow[k][point][e - 1] = z_k^e` over `2^{eP}`.
    zpow: Vec<Vec<Vec<I>>>,
    one_pow: Vec<I>,
    /// `diff[q][r] = r^q - (r-1)^q`.
    diff: Vec<Vec<I>>,
    /// `lpow[q][l] = l^q`.
    lpow: Vec<Vec<I>>,
}

impl<'a, I: ExactInt> Cells<'a, I> {
    fn new(ps: &'a PointSet, p: usize) -> Self {
        let d = ps.dim();
        let n = ps.len();
        let powers = |base: I| {
            let mut v = Vec::with_capacity(p);
            let mut acc = I::one();
            for _ in 0..p {
                acc = acc.mul_ref(&base);
                v.push(acc.clone());
            }
            v
        };
        let zpow = (0..d)
            .map(|k| (0..n).map(|i| powers(I::from_u64(ps.numerator(i, k)))).collect())
            .collect();
        let one_pow = powers(I::one().shl(ps.precision_bits()));
        let mut lpow = vec![Vec::new(); p + 1];
        let mut diff = vec![Vec::new(); p + 1];
        for q in 1..=p {
            lpow[q] = (0..=n)
                .map(|l| {
                    let b = I::from_u64(l as u64);
                    (0..q).fold(I::one(), |acc, _| acc.mul_ref(&b))
                })
                .collect();
            diff[q] = (0..=n)
                .map(|r| {
                    if r == 0 {
                        I::zero()
                    } else {
                        let mut v = lpow[q][r].clone();
                        v -= &lpow[q][r - 1];
                        v
                    }
                })
                .collect();
        }
        Cells {
            ps,
            p,
            zpow,
            one_pow,
            diff,
            lpow,
        }
    }

    /// `z_k^e` for a point, or `1` for `None`.
    fn pow(&self, k: usize, pt: Option<usize>, e: usize) -> &I {
        match pt {
            Some(i) => &self.zpow[k][i][e],
            None => &self.one_pow[e],
        }
    }

    fn sorted_prefix(&self, list: &[usize], k: usize) -> Vec<usize> {
        let mut v = list.to_vec();
        v.sort_by_key(|&i| self.ps.numerator(i, k));
        v
    }

    /// Adds the cells of coordinates `k..d` to `out`; `list` holds the points below the
    /// current cell in coordinates `< k`, sorted by coordinate `k`.
    fn level(&self, k: usize, list: &[usize], acc: &[I], out: &mut [I]) {
        let d = self.ps.dim();
        if k + 1 == d {
            self.last(list, acc, out);
            return;
        }
        let mut child: Vec<usize> = Vec::with_capacity(list.len());
        for r in 0..list.len() {
            let key = |i: usize| self.ps.numerator(i, k + 1);
            let i = list[r];
            child.insert(child.partition_point(|&c| key(c) <= key(i)), i);
            self.interval(k, list, r, acc, |a| self.level(k + 1, &child, a, out));
        }
    }

    /// The interval of coordinate `k` between the `r`-th point of `list` and the next.
    fn interval(&self, k: usize, list: &[usize], r: usize, acc: &[I], mut then: impl FnMut(&[I])) {
        let cur = list[r];
        let next = list.get(r + 1).copied();
        let next_val = next.map_or(1u64 << self.ps.precision_bits(), |i| self.ps.numerator(i, k));
        if next_val == self.ps.numerator(cur, k) {
            return;
        }
        let child_acc: Vec<I> = (0..self.p)
            .map(|e| {
                let mut w = self.pow(k, next, e).clone();
                w -= self.pow(k, Some(cur), e);
                acc[e].mul_ref(&w)
            })
            .collect();
        then(&child_acc);
    }

    /// Last coordinate by summation by parts:
    /// `Σ_r r^q (z_{(r+1)}^e - z_{(r)}^e) = L^q - Σ_r (r^q - (r-1)^q) z_{(r)}^e`.
    fn last(&self, list: &[usize], acc: &[I], out: &mut [I]) {
        let k = self.ps.dim() - 1;
        let l = list.len();
        for i in 0..self.p {
            let q = self.p - i;
            let mut s = self.lpow[q][l].mul_ref(&self.one_pow[i]);
            for (r, &pt) in list.iter().enumerate() {
                s -= &self.diff[q][r + 1].mul_ref(&self.zpow[k][pt][i]);
            }
            out[i] += &acc[i].mul_ref(&s);
        }
    }

    /// `T_i = Σ_cells c^{p-i} ∏_k (b_k^{i+1} - a_k^{i+1})` for `i < p`.
    fn run(&self) -> Vec<I> {
        let d = self.ps.dim();
        let p = self.p;
        let all: Vec<usize> = (0..self.ps.len()).collect();
        let first = self.sorted_prefix(&all, 0);
        let ones = vec![I::one(); p];
        if d == 1 {
            let mut out = vec![I::zero(); p];
            self.last(&first, &ones, &mut out);
            return out;
        }
        (0..first.len())
            .into_par_iter()
            .map(|r| {
                let mut out = vec![I::zero(); p];
                let child = self.sorted_prefix(&first[..=r], 1);
                self.interval(0, &first, r, &ones, |a| self.level(1, &child, a, &mut out));
                out
            })
            .reduce(
                || vec![I::zero(); p],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        *x += y;
                    }
                    a
                },
            )
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Exact `∫ D(x)^p dx` for even `p` by integrating `(c - N∏x_k)^p` in closed form on
/// every cell where the counting part is the constant `c`.
pub fn lp_norm_cells(ps: &PointSet, p: u32, budget: u128) -> Result<BigRational> {
    if p == 0 || p % 2 == 1 {
        return Err(Error::domain(format!("exact Lp needs an even p, got {p}; use lp_norm_estimate")));
    }
    if ps.is_empty() {
        return Err(Error::domain("the point set is empty"));
    }
    let n = ps.len() as u128;
    let d = ps.dim() as u32;
    let cells = (n + 1).checked_pow(d).unwrap_or(u128::MAX);
    Error::check_budget("Lp cells", cells, budget)?;
    let pu = p as usize;
    let bits = (0..pu)
        .map(|i| (pu - i) as u64 * bit_len(n) + (d * ps.precision_bits()) as u64 * (i as u64 + 1) + 2)
        .max()
        .unwrap();
    let t: Vec<BigInt> = if bits <= i128::CAPACITY_BITS {
        Cells::<i128>::new(ps, pu).run().into_iter().map(BigInt::from).collect()
    } else {
        Cells::<BigInt>::new(ps, pu).run()
    };
    let big_n = BigInt::from(ps.len());
    let mut total = BigRational::zero();
    for (i, ti) in t.into_iter().enumerate() {
        let coeff = binomial(pu, i) * num_traits::pow(-big_n.clone(), i);
        let den = BigInt::from(i + 1).pow(d) << (d as usize * ps.precision_bits() as usize * (i + 1));
        total += BigRational::new(coeff * ti, den);
    }
    total += BigRational::new(num_traits::pow(-big_n, pu), BigInt::from(pu + 1).pow(d));
    Ok(total)
}

pub fn lp_norm_exact<F: Real>(ps: &PointSet, p: u32, budget: u128) -> Result<NormReport<F>> {
    let v = lp_norm_cells(ps, p, budget)?;
    let f = ratio_to_f64(&v).max(0.0).powf(1.0 / p as f64);
    Ok(NormReport::new(F::of(f), Method::ExactCell)
        .param("p", p)
        .param("integral", ratio_to_f64(&v))
        .param("points", ps.len() as u64))
}

/// Values of `f` at two uniform points in each of `k^d` equal strata, with `k` the
/// largest integer such that `2k^d <= samples`. Stratum `s` draws from its own stream.
pub(crate) fn stratified_values<I: Integrand + ?Sized>(f: &I, samples: usize, seed: u64) -> (usize, Vec<f64>) {
    let d = f.dim();
    let half = (samples / 2).max(1);
    let mut k = 1usize;
    while (k + 1).checked_pow(d as u32).is_some_and(|v| v <= half) {
        k += 1;
    }
    let strata = k.pow(d as u32);
    let values = (0..strata)
        .into_par_iter()
        .flat_map_iter(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut cell = vec![0usize; d];
            let mut rest = s;
            for c in cell.iter_mut().rev() {
                *c = rest % k;
                rest /= k;
            }
            let mut out = [0f64; 2];
            let mut x = vec![0f64; d];
            for o in out.iter_mut() {
                for (xk, &c) in x.iter_mut().zip(&cell) {
                    *xk = (c as f64 + rng.gen::<f64>()) / k as f64;
                }
                *o = f.eval(&x);
            }
            out
        })
        .collect();
    (k, values)
}

/// Mean and standard error of the stratified estimator from paired values.
pub(crate) fn stratified_mean(values: &[f64]) -> (f64, f64) {
    let strata = values.len() / 2;
    let mut sum = 0.0;
    let mut var = 0.0;
    for pair in values.chunks_exact(2) {
        sum += pair[0] + pair[1];
        var += (pair[0] - pair[1]).powi(2) / 4.0;
    }
    let k = strata as f64;
    (sum / (2.0 * k), var.sqrt() / k)
}

/// Stratified Monte Carlo estimate of `‖f‖_p`; the error bound is three standard errors
/// carried through `t ↦ t^{1/p}`.
pub fn lp_norm_estimate<I: Integrand + ?Sized, F: Real>(
    f: &I,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<NormReport<F>> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain("p must be a finite real >= 1"));
    }
    if samples < 2 {
        return Err(Error::domain("at least two samples are needed"));
    }
    let (k, values) = stratified_values(f, samples, seed);
    let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    let (mean, se) = stratified_mean(&powered);
    let value = mean.powf(1.0 / p);
    let err = if mean > 0.0 {
        3.0 * se * mean.powf(1.0 / p - 1.0) / p
    } else {
        (3.0 * se).powf(1.0 / p)
    };
    Ok(NormReport::new(F::of(value), Method::MonteCarlo)
        .with_error(F::of(err))
        .param("p", p)
        .param("samples", values.len() as u64)
        .param("strata_per_axis", k as u64)
        .param("seed", seed))
}
