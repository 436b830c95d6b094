//! The discrepancy function `D(x) = #{z ∈ P : z < x} - N x_1⋯x_d`, its exact
//! supremum over anchored boxes, and its exact L2 norm.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::norms::{Method, NormReport};
use crate::pointset::PointSet;
use crate::scalar::{bit_len, ratio_to_f64, ExactInt, Real};

/// Default cap on `N·(N+2)^d` for the star discrepancy and `N²d` for the L2 identity.
pub const DEFAULT_BUDGET: u128 = 1 << 40;

/// `D(x)` split into its counting and linear parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscrepancyValue {
    pub counting: u64,
    pub linear: DyadicRational,
}

impl DiscrepancyValue {
    pub fn value(&self) -> DyadicRational {
        DyadicRational::from_int(self.counting as i64) - &self.linear
    }
}

/// `D(x)` for `x ∈ [0,1]^d`.
pub fn local_discrepancy(ps: &PointSet, x: &[DyadicRational]) -> Result<DiscrepancyValue> {
    if x.len() != ps.dim() {
        return Err(Error::domain("point dimension mismatch"));
    }
    let one = DyadicRational::one();
    if x.iter().any(|v| v.is_negative() || v > &one) {
        return Err(Error::domain("x must lie in [0,1]^d"));
    }
    let p = ps.precision_bits();
    // z_k < x_k compared at a common exponent
    let e = x.iter().map(|v| v.exponent()).max().unwrap_or(0).max(p);
    let xs: Vec<BigInt> = x.iter().map(|v| v.numerator_at(e).unwrap()).collect();
    let shift = (e - p) as usize;
    let counting = (0..ps.len())
        .filter(|&i| {
            ps.numerators(i)
                .iter()
                .zip(&xs)
                .all(|(&z, xk)| (BigInt::from(z) << shift) < *xk)
        })
        .count() as u64;
    let linear = x
        .iter()
        .fold(DyadicRational::from_int(ps.len() as i64), |acc, v| acc * v);
    Ok(DiscrepancyValue { counting, linear })
}

/// Exact star discrepancy with the box attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarDiscrepancy {
    pub value: DyadicRational,
    /// Upper corner of the extremal box.
    pub argmax: Vec<DyadicRational>,
    /// True when the value is attained as a limit of boxes shrinking onto a closed box
    /// (the counting function exceeds the volume); false for an open box.
    pub closed: bool,
}

struct Search<'a, I> {
    ps: &'a PointSet,
    n: I,
    best: I,
    best_x: Vec<u64>,
    best_closed: bool,
    x: Vec<u64>,
}

impl<I: ExactInt> Search<'_, I> {
    fn run(&mut self, closed: bool) {
        let d = self.ps.dim();
        let mut all: Vec<usize> = (0..self.ps.len()).collect();
        all.sort_by_key(|&i| self.ps.numerator(i, 0));
        let v = I::one();
        self.level(0, &all, &v, closed, d);
    }

    fn level(&mut self, k: usize, list: &[usize], vol: &I, closed: bool, d: usize) {
        let ps = self.ps;
        let one = 1u64 << ps.precision_bits();
        if k + 1 == d {
            let mut r = 0;
            while r < list.len() {
                let v = ps.numerator(list[r], k);
                let mut s = r;
                while s < list.len() && ps.numerator(list[s], k) == v {
                    s += 1;
                }
                if closed {
                    self.x[k] = v;
                    self.offer_closed(s as u64, vol, v);
                } else {
                    self.x[k] = v;
                    self.offer_open(r as u64, vol, v);
                }
                r = s;
            }
            if !closed {
                self.x[k] = one;
                self.offer_open(list.len() as u64, vol, one);
            }
            return;
        }
        let mut child: Vec<usize> = Vec::with_capacity(list.len());
        let key = |i: usize| ps.numerator(i, k + 1);
        let mut r = 0;
        while r < list.len() {
            let v = ps.numerator(list[r], k);
            let mut s = r;
            while s < list.len() && ps.numerator(list[s], k) == v {
                s += 1;
            }
            if !closed {
                // points strictly below v
                self.x[k] = v;
                let next = vol.mul_ref(&I::from_u64(v));
                self.level(k + 1, &child.clone(), &next, closed, d);
            }
            for &i in &list[r..s] {
                let pos = child.partition_point(|&c| key(c) <= key(i));
                child.insert(pos, i);
            }
            if closed {
                self.x[k] = v;
                let next = vol.mul_ref(&I::from_u64(v));
                self.level(k + 1, &child.clone(), &next, closed, d);
            }
            r = s;
        }
        if !closed {
            self.x[k] = one;
            let next = vol.shl(ps.precision_bits());
            self.level(k + 1, &child, &next, closed, d);
        }
    }

    fn offer_closed(&mut self, count: u64, vol: &I, v: u64) {
        // count·2^{dP} - N·vol·v
        let mut val = I::from_u64(count).shl(self.ps.precision_bits() * self.ps.dim() as u32);
        val -= &self.n.mul_ref(vol).mul_ref(&I::from_u64(v));
        if val > self.best {
            self.best = val;
            self.best_x = self.x.clone();
            self.best_closed = true;
        }
    }

    fn offer_open(&mut self, count: u64, vol: &I, v: u64) {
        let mut val = self.n.mul_ref(vol).mul_ref(&I::from_u64(v));
        val -= &I::from_u64(count).shl(self.ps.precision_bits() * self.ps.dim() as u32);
        if val > self.best {
            self.best = val;
            self.best_x = self.x.clone();
            self.best_closed = false;
        }
    }
}

fn star_generic<I: ExactInt>(ps: &PointSet) -> StarDiscrepancy {
    let d = ps.dim();
    let p = ps.precision_bits();
    let mut s = Search {
        ps,
        n: I::from_u64(ps.len() as u64),
        best: I::zero(),
        best_x: vec![0; d],
        best_closed: true,
        x: vec![0; d],
    };
    s.run(true);
    s.run(false);
    StarDiscrepancy {
        value: DyadicRational::new(s.best.into_bigint(), p * d as u32),
        argmax: s.best_x.iter().map(|&v| DyadicRational::new(v, p)).collect(),
        closed: s.best_closed,
    }
}

/// Exact `sup_{x ∈ [0,1]^d} |D(x)|`.
pub fn star_discrepancy_exact(ps: &PointSet, budget: u128) -> Result<StarDiscrepancy> {
    if ps.is_empty() {
        return Err(Error::domain("the point set is empty"));
    }
    let n = ps.len() as u128;
    let work = (n + 2)
        .checked_pow(ps.dim() as u32)
        .and_then(|c| c.checked_mul(n))
        .unwrap_or(u128::MAX);
    Error::check_budget("star discrepancy", work, budget)?;
    let bits = bit_len(n) + ps.precision_bits() as u64 * ps.dim() as u64 + 1;
    Ok(if bits <= i128::CAPACITY_BITS {
        star_generic::<i128>(ps)
    } else {
        star_generic::<BigInt>(ps)
    })
}

pub fn star_discrepancy<F: Real>(ps: &PointSet, budget: u128) -> Result<NormReport<F>> {
    let s = star_discrepancy_exact(ps, budget)?;
    Ok(NormReport::new(F::of(s.value.to_f64()), Method::CriticalGrid)
        .param("exact", s.value.to_string())
        .param(
            "argmax",
            s.argmax.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        )
        .param("box", if s.closed { "closed" } else { "open" })
        .param("points", ps.len() as u64))
}

fn pair_sum<I: ExactInt>(ps: &PointSet) -> BigInt {
    let d = ps.dim();
    let one = 1u64 << ps.precision_bits();
    let rows: Vec<BigInt> = (0..ps.len())
        .into_par_iter()
        .map(|a| {
            let za = ps.numerators(a);
            let mut acc = I::zero();
            for b in 0..ps.len() {
                let zb = ps.numerators(b);
                let mut prod = I::one();
                for k in 0..d {
                    prod = prod.mul_ref(&I::from_u64(one - za[k].max(zb[k])));
                }
                acc += &prod;
            }
            acc.into_bigint()
        })
        .collect();
    rows.into_iter().sum()
}

/// Exact `∫ D(x)² dx` by the quadratic identity
/// `Σ_{z,z'} ∏(1-max(z_k,z'_k)) - N 2^{1-d} Σ_z ∏(1-z_k²) + N² 3^{-d}`.
pub fn l2_squared_exact(ps: &PointSet) -> BigRational {
    let d = ps.dim() as u32;
    let p = ps.precision_bits();
    let n = BigInt::from(ps.len());
    let bits = 2 * bit_len(ps.len() as u128) + (p as u64) * d as u64 + 1;
    let pairs = if bits <= i128::CAPACITY_BITS {
        pair_sum::<i128>(ps)
    } else {
        pair_sum::<BigInt>(ps)
    };
    let two = BigInt::from(2);
    let t1 = BigRational::new(pairs, two.pow(p * d));

    let sq_one = BigInt::one() << (2 * p) as usize;
    let mut single = BigInt::zero();
    for i in 0..ps.len() {
        let mut prod = BigInt::one();
        for &z in ps.numerators(i) {
            let z = BigInt::from(z);
            prod *= &sq_one - &z * &z;
        }
        single += prod;
    }
    // N 2^{1-d} Σ ∏(1-z²) with the sum over 2^{2dP}
    let t2 = BigRational::new(&n * single * 2, two.pow(2 * p * d + d));
    let t3 = BigRational::new(&n * &n, BigInt::from(3).pow(d));
    t1 - t2 + t3
}

pub fn l2_warnock<F: Real>(ps: &PointSet, budget: u128) -> Result<NormReport<F>> {
    if ps.is_empty() {
        return Err(Error::domain("the point set is empty"));
    }
    let n = ps.len() as u128;
    Error::check_budget("L2 identity", n * n * ps.dim() as u128, budget)?;
    let sq = l2_squared_exact(ps);
    debug_assert!(!sq.is_negative());
    Ok(NormReport::new(F::of(ratio_to_f64(&sq).max(0.0).sqrt()), Method::Warnock)
        .param("squared", ratio_to_f64(&sq))
        .param("points", ps.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dr(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn hammersley2() -> PointSet {
        PointSet::from_numerators(2, 2, vec![0, 0, 2, 1, 1, 2, 3, 3]).unwrap()
    }

    /// sup |D| over the grid of step 2^-g in [0,1]^d, including both one-sided limits
    /// at every grid point (closed and open boxes).
    fn brute_star(ps: &PointSet, g: u32) -> DyadicRational {
        assert!(ps.precision_bits() <= g);
        let d = ps.dim();
        let shift = g - ps.precision_bits();
        let steps = (1u64 << g) + 1;
        let n = ps.len() as i64;
        let mut idx = vec![0u64; d];
        let mut best = DyadicRational::zero();
        loop {
            let vol = idx
                .iter()
                .fold(DyadicRational::one(), |a, &v| a * DyadicRational::new(v, g));
            let nv = &vol * &DyadicRational::from_int(n);
            let open = (0..ps.len())
                .filter(|&i| ps.numerators(i).iter().zip(&idx).all(|(&z, &x)| (z << shift) < x))
                .count() as i64;
            let closed = (0..ps.len())
                .filter(|&i| ps.numerators(i).iter().zip(&idx).all(|(&z, &x)| (z << shift) <= x))
                .count() as i64;
            for v in [
                (&DyadicRational::from_int(open) - &nv).abs(),
                (&DyadicRational::from_int(closed) - &nv).abs(),
            ] {
                if v > best {
                    best = v;
                }
            }
            let mut k = 0;
            loop {
                if k == d {
                    return best;
                }
                idx[k] += 1;
                if idx[k] < steps {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn local_values() {
        let ps = hammersley2();
        let v = local_discrepancy(&ps, &[dr("0"), dr("0")]).unwrap();
        assert_eq!((v.counting, v.value()), (0, DyadicRational::zero()));
        let v = local_discrepancy(&ps, &[dr("1/2^1"), dr("1/2^1")]).unwrap();
        assert_eq!((v.counting, v.linear.clone(), v.value()), (1, dr("1"), dr("0")));
        let origin = PointSet::from_numerators(1, 0, vec![0]).unwrap();
        let v = local_discrepancy(&origin, &[dr("1")]).unwrap();
        assert_eq!((v.counting, v.linear.clone(), v.value()), (1, dr("1"), dr("0")));
        assert!(local_discrepancy(&origin, &[dr("3/2^1")]).is_err());
    }

    #[test]
    fn star_small_sets() {
        let origin = PointSet::from_numerators(1, 0, vec![0]).unwrap();
        assert_eq!(star_discrepancy_exact(&origin, DEFAULT_BUDGET).unwrap().value, dr("1"));
        let half = PointSet::from_numerators(1, 1, vec![1]).unwrap();
        assert_eq!(star_discrepancy_exact(&half, DEFAULT_BUDGET).unwrap().value, dr("1/2^1"));
        let two = PointSet::from_numerators(1, 1, vec![0, 1]).unwrap();
        let s = star_discrepancy_exact(&two, DEFAULT_BUDGET).unwrap();
        assert_eq!(s.value, brute_star(&two, 12));
        assert_eq!(s.value, dr("1"));
    }

    #[test]
    fn star_matches_brute_force() {
        for seed in 0..12 {
            for d in 1..=3 {
                let n = 1 + (seed as usize * 3) % 9;
                let ps = PointSet::random(d, n, 3, seed).unwrap();
                let g = if d == 3 { 3 } else { 5 };
                let s = star_discrepancy_exact(&ps, DEFAULT_BUDGET).unwrap();
                assert_eq!(s.value, brute_star(&ps, g), "seed {seed} d {d}");
                let at = local_discrepancy(&ps, &s.argmax).unwrap();
                if !s.closed {
                    assert_eq!(at.value().abs(), s.value);
                }
            }
        }
        let ps = hammersley2();
        assert_eq!(star_discrepancy_exact(&ps, DEFAULT_BUDGET).unwrap().value, brute_star(&ps, 4));
    }

    #[test]
    fn star_budget() {
        let ps = PointSet::random(2, 50, 10, 1).unwrap();
        assert!(matches!(star_discrepancy_exact(&ps, 1000), Err(Error::Resource { .. })));
    }

    #[test]
    fn warnock_examples() {
        let origin = PointSet::from_numerators(1, 0, vec![0]).unwrap();
        let third = BigRational::new(BigInt::one(), BigInt::from(3));
        assert_eq!(l2_squared_exact(&origin), third);
        let half = PointSet::from_numerators(1, 1, vec![1]).unwrap();
        let twelfth = BigRational::new(BigInt::one(), BigInt::from(12));
        assert_eq!(l2_squared_exact(&half), twelfth);
        let r: NormReport<f64> = l2_warnock(&origin, DEFAULT_BUDGET).unwrap();
        assert!((r.value - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    /// Exact ∫D² by integrating the piecewise polynomial over the grid 2^-g, valid when
    /// every coordinate lies on that grid: on each grid cell the count is constant and
    /// ∫(c - N∏x)² = c²|cell| - 2cN∏∫x + N²∏∫x².
    fn exact_quadrature(ps: &PointSet, g: u32) -> BigRational {
        let d = ps.dim();
        let shift = g - ps.precision_bits();
        let cells = 1u64 << g;
        let n = BigInt::from(ps.len());
        let den = BigInt::one() << g as usize;
        let mut idx = vec![0u64; d];
        let mut total = BigRational::zero();
        loop {
            let c = (0..ps.len())
                .filter(|&i| ps.numerators(i).iter().zip(&idx).all(|(&z, &x)| (z << shift) <= x))
                .count();
            let c = BigRational::from_integer(BigInt::from(c));
            let mut vol = BigRational::one();
            let mut m1 = BigRational::one();
            let mut m2 = BigRational::one();
            for &x in &idx {
                let a = BigRational::new(BigInt::from(x), den.clone());
                let b = BigRational::new(BigInt::from(x + 1), den.clone());
                vol *= &b - &a;
                m1 *= (&b * &b - &a * &a) / BigInt::from(2);
                m2 *= (&b * &b * &b - &a * &a * &a) / BigInt::from(3);
            }
            let nn = BigRational::from_integer(n.clone());
            total += &c * &c * vol - BigRational::from_integer(BigInt::from(2)) * &c * &nn * m1
                + &nn * &nn * m2;
            let mut k = 0;
            loop {
                if k == d {
                    return total;
                }
                idx[k] += 1;
                if idx[k] < cells {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn warnock_matches_cellwise_integration() {
        for seed in 0..10 {
            for d in 1..=3 {
                let ps = PointSet::random(d, 1 + seed as usize % 7, 3, seed).unwrap();
                assert_eq!(l2_squared_exact(&ps), exact_quadrature(&ps, 3), "seed {seed} d {d}");
            }
        }
    }

    #[test]
    fn warnock_matches_midpoint_quadrature() {
        for seed in 0..3 {
            let n = 1 + (seed as usize * 13) % 32;
            let ps = PointSet::random(2, n, 16, seed).unwrap();
            let exact = ratio_to_f64(&l2_squared_exact(&ps));
            let xs = ps.to_f64();
            let g = 1 << 10;
            let h = 1.0 / g as f64;
            let mut sum = 0.0;
            for a in 0..g {
                for b in 0..g {
                    let x = [(a as f64 + 0.5) * h, (b as f64 + 0.5) * h];
                    let c = (0..n).filter(|&i| xs[2 * i] < x[0] && xs[2 * i + 1] < x[1]).count();
                    let v = c as f64 - n as f64 * x[0] * x[1];
                    sum += v * v * h * h;
                }
            }
            assert!((sum - exact).abs() <= 1e-3 * exact, "seed {seed}: {sum} vs {exact}");
        }
    }

    #[test]
    fn l2_below_star() {
        for seed in 0..5 {
            let ps = PointSet::random(2, 20, 12, seed).unwrap();
            let l2: NormReport<f64> = l2_warnock(&ps, DEFAULT_BUDGET).unwrap();
            let st: NormReport<f64> = star_discrepancy(&ps, DEFAULT_BUDGET).unwrap();
            assert!(l2.value <= st.value);
        }
    }
}
