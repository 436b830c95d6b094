//! Exact dyadic rationals, dyadic boxes and L∞-normalised Haar functions.
//!
//! A dyadic interval on level `j ≥ 0` is `[m 2^-j, (m+1) 2^-j)`; level `-1` is the
//! whole interval `[0,1)`. Boxes in `[0,1)^d` are products of such intervals and are
//! addressed by a [`DyadicIndex`] `(j, m)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// The exact number `numerator / 2^exponent`, kept in canonical form
/// (odd numerator, or zero numerator with zero exponent).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DyadicRational {
    num: BigInt,
    exp: u32,
}

impl DyadicRational {
    pub fn new(numerator: impl Into<BigInt>, exponent: u32) -> Self {
        let mut r = DyadicRational {
            num: numerator.into(),
            exp: exponent,
        };
        r.normalize();
        r
    }

    pub fn from_int(v: i64) -> Self {
        DyadicRational::new(v, 0)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        DyadicRational {
            num: BigInt::one(),
            exp: k,
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp as u64);
        if shift > 0 {
            self.num >>= shift as usize;
            self.exp -= shift as u32;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// Numerator of `self` written over `2^exp`, if `exp` is at least the canonical
    /// exponent.
    pub fn numerator_at(&self, exp: u32) -> Option<BigInt> {
        (exp >= self.exp).then(|| &self.num << (exp - self.exp) as usize)
    }

    /// Same as [`numerator_at`](Self::numerator_at) but for values that fit in `u64`.
    pub fn u64_numerator_at(&self, exp: u32) -> Option<u64> {
        if self.num.is_negative() {
            return None;
        }
        self.numerator_at(exp)?.to_u64()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        DyadicRational {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    /// `self * 2^shift` (shift may be negative).
    pub fn mul_pow2(&self, shift: i64) -> Self {
        if self.num.is_zero() {
            return self.clone();
        }
        if shift >= 0 {
            let s = shift as u64;
            if s <= self.exp as u64 {
                DyadicRational {
                    num: self.num.clone(),
                    exp: self.exp - s as u32,
                }
            } else {
                DyadicRational {
                    num: &self.num << (s - self.exp as u64) as usize,
                    exp: 0,
                }
            }
        } else {
            DyadicRational::new(self.num.clone(), self.exp + (-shift) as u32)
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// True iff `0 <= self < 1`.
    pub fn in_unit_interval(&self) -> bool {
        !self.num.is_negative() && self.num < (BigInt::one() << self.exp as usize)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp as usize)
    }

    pub fn to_f64(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        // keep 64 significant bits so huge numerators do not overflow
        let bits = self.num.bits() as i64;
        let drop = (bits - 64).max(0);
        let head = (&self.num >> drop as usize).to_f64().unwrap_or(0.0);
        let e = drop - self.exp as i64;
        if e >= -1000 {
            head * 2f64.powi(e as i32)
        } else {
            head * 2f64.powi(-1000) * 2f64.powi((e + 1000).max(-1100) as i32)
        }
    }

    pub fn to_real<F: Real>(&self) -> F {
        F::of(self.to_f64())
    }
}

impl Zero for DyadicRational {
    fn zero() -> Self {
        DyadicRational::default()
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for DyadicRational {
    fn one() -> Self {
        DyadicRational::from_int(1)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        let a = &self.num << (e - self.exp) as usize;
        let b = &other.num << (e - other.exp) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_ref(a: &DyadicRational, b: &DyadicRational) -> DyadicRational {
    let e = a.exp.max(b.exp);
    let num = (&a.num << (e - a.exp) as usize) + (&b.num << (e - b.exp) as usize);
    DyadicRational::new(num, e)
}

fn mul_ref(a: &DyadicRational, b: &DyadicRational) -> DyadicRational {
    DyadicRational::new(&a.num * &b.num, a.exp + b.exp)
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $f:expr) => {
        impl $trait<&DyadicRational> for &DyadicRational {
            type Output = DyadicRational;
            fn $method(self, rhs: &DyadicRational) -> DyadicRational {
                $f(self, rhs)
            }
        }
        impl $trait<DyadicRational> for DyadicRational {
            type Output = DyadicRational;
            fn $method(self, rhs: DyadicRational) -> DyadicRational {
                $f(&self, &rhs)
            }
        }
        impl $trait<&DyadicRational> for DyadicRational {
            type Output = DyadicRational;
            fn $method(self, rhs: &DyadicRational) -> DyadicRational {
                $f(&self, rhs)
            }
        }
        impl $trait<DyadicRational> for &DyadicRational {
            type Output = DyadicRational;
            fn $method(self, rhs: DyadicRational) -> DyadicRational {
                $f(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Sub, sub, |a: &DyadicRational, b: &DyadicRational| add_ref(a, &-b));

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            num: -&self.num,
            exp: self.exp,
        }
    }
}

impl AddAssign<&DyadicRational> for DyadicRational {
    fn add_assign(&mut self, rhs: &DyadicRational) {
        *self = add_ref(self, rhs);
    }
}

impl SubAssign<&DyadicRational> for DyadicRational {
    fn sub_assign(&mut self, rhs: &DyadicRational) {
        *self = add_ref(self, &-rhs);
    }
}

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = DyadicRational>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DyadicRational {
    type Err = Error;

    /// Accepts `a/2^k` or a plain integer `a`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::domain(format!("not a dyadic rational: {s:?}"));
        match s.split_once('/') {
            None => Ok(DyadicRational::new(s.parse::<BigInt>().map_err(|_| bad())?, 0)),
            Some((a, k)) => {
                let k = k.trim().strip_prefix("2^").ok_or_else(bad)?;
                let exp = k.parse::<u32>().map_err(|_| bad())?;
                let num = a.trim().parse::<BigInt>().map_err(|_| bad())?;
                Ok(DyadicRational::new(num, exp))
            }
        }
    }
}

/// `(j, m)` naming the dyadic box `I_{j,m}` and the Haar function `h_{j,m}`.
///
/// Levels are `-1, 0, 1, ...`; for level `-1` the only position is `0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicIndex {
    j: Vec<i32>,
    m: Vec<u64>,
}

/// Number of positions on a level (`2^max(j,0)`), as a bit count.
pub(crate) fn level_bits(j: i32) -> u32 {
    j.max(0) as u32
}

/// Order `|j| = Σ max(j_k, 0)`.
pub fn order(shape: &[i32]) -> u32 {
    shape.iter().map(|&j| level_bits(j)).sum()
}

impl DyadicIndex {
    pub fn new(j: Vec<i32>, m: Vec<u64>) -> Result<Self> {
        if j.len() != m.len() {
            return Err(Error::domain("level and position vectors differ in length"));
        }
        if j.is_empty() {
            return Err(Error::domain("dimension must be at least 1"));
        }
        for (&jk, &mk) in j.iter().zip(&m) {
            if jk < -1 {
                return Err(Error::domain(format!("level {jk} below -1")));
            }
            if jk > 63 {
                return Err(Error::domain(format!("level {jk} above 63 is not supported")));
            }
            if (mk >> level_bits(jk)) != 0 {
                return Err(Error::domain(format!(
                    "position {mk} out of range for level {jk}"
                )));
            }
        }
        Ok(DyadicIndex { j, m })
    }

    /// The index of the unit cube: all levels `-1`.
    pub fn root(d: usize) -> Self {
        DyadicIndex {
            j: vec![-1; d],
            m: vec![0; d],
        }
    }

    pub fn levels(&self) -> &[i32] {
        &self.j
    }

    pub fn positions(&self) -> &[u64] {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.j.len()
    }

    pub fn order(&self) -> u32 {
        order(&self.j)
    }

    /// Exact volume `2^-|j|`.
    pub fn volume(&self) -> DyadicRational {
        DyadicRational::pow2_neg(self.order())
    }
}

/// Half-open box `×_k [lower_k, upper_k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicBox {
    pub lower: Vec<DyadicRational>,
    pub upper: Vec<DyadicRational>,
}

impl DyadicBox {
    pub fn contains(&self, x: &[DyadicRational]) -> bool {
        x.len() == self.lower.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v < hi)
    }

    pub fn volume(&self) -> DyadicRational {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(DyadicRational::one(), |acc, (lo, hi)| acc * (hi - lo))
    }
}

/// `I_{j,m}` as explicit endpoints.
pub fn box_of(index: &DyadicIndex) -> DyadicBox {
    let mut lower = Vec::with_capacity(index.dim());
    let mut upper = Vec::with_capacity(index.dim());
    for (&j, &m) in index.j.iter().zip(&index.m) {
        let e = level_bits(j);
        lower.push(DyadicRational::new(m, e));
        upper.push(DyadicRational::new(m + 1, e));
    }
    DyadicBox { lower, upper }
}

/// One-dimensional `h_{j,m}(x)` for `x ∈ [0,1)`.
pub fn haar_eval_1d(j: i32, m: u64, x: &DyadicRational) -> i8 {
    if j < 0 {
        return 1;
    }
    let two_m = DyadicRational::new(2 * m, j as u32 + 1);
    let mid = DyadicRational::new(2 * m + 1, j as u32 + 1);
    let end = DyadicRational::new(2 * m + 2, j as u32 + 1);
    if x < &two_m || x >= &end {
        0
    } else if x < &mid {
        1
    } else {
        -1
    }
}

/// Tensor-product Haar function `∏_k h_{j_k,m_k}(x_k)`.
pub fn haar_eval(index: &DyadicIndex, x: &[DyadicRational]) -> i8 {
    debug_assert_eq!(x.len(), index.dim());
    let mut s = 1i8;
    for ((&j, &m), xk) in index.j.iter().zip(&index.m).zip(x) {
        s *= haar_eval_1d(j, m, xk);
        if s == 0 {
            break;
        }
    }
    s
}

/// All `j ∈ N_0^d` with `|j| = n`, in lexicographic order.
pub fn enumerate_shapes(d: usize, n: u32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    let mut cur = vec![0i32; d];
    fn rec(k: usize, left: u32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        let d = cur.len();
        if k == d - 1 {
            cur[k] = left as i32;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[k] = v as i32;
            rec(k + 1, left - v, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// All level vectors with entries in `lo..=hi` (odometer order, last coordinate fastest).
pub fn shapes_in_range(d: usize, lo: i32, hi: i32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    if d == 0 || hi < lo {
        return out;
    }
    let mut cur = vec![lo; d];
    loop {
        out.push(cur.clone());
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < hi {
                cur[k] += 1;
                for c in cur.iter_mut().skip(k + 1) {
                    *c = lo;
                }
                break;
            }
        }
    }
}

/// Position of the level-`j` dyadic interval containing the coordinate whose
/// numerator over `2^precision` is `num`.
pub(crate) fn position_of(num: u64, precision: u32, j: i32) -> u64 {
    if j <= 0 {
        0
    } else if j as u32 <= precision {
        num >> (precision - j as u32)
    } else {
        num << (j as u32 - precision)
    }
}

/// Iterator over all positions `m ∈ D_j` for a shape.
pub fn positions(shape: &[i32]) -> impl Iterator<Item = Vec<u64>> + '_ {
    let total: u128 = 1u128 << order(shape);
    (0..total).map(move |mut lin| {
        let mut m = vec![0u64; shape.len()];
        for k in (0..shape.len()).rev() {
            let b = level_bits(shape[k]);
            m[k] = (lin & ((1u128 << b) - 1)) as u64;
            lin >>= b;
        }
        m
    })
}
