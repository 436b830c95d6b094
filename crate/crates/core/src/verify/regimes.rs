use serde::Serialize;

use crate::error::{Error, Result};
use crate::haar::HaarCoefficientTable;

/// Parts of `Σ_{j ∈ N_0^d} 2^{|j|} Σ_m ⟨D,h_{j,m}⟩²` (the BMO sum with `U` the cube) split
/// by `|j|` at `n - ⌈t/2⌉` and `n`.
///
/// `large + intermediate + small` is the full sum. The small regime is also reported
/// for the linear and the counting part alone; those two do not add up to `small`
/// because of the cross term `-2 Σ C·L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeSums {
    pub n: u32,
    pub t: u32,
    pub large: f64,
    pub intermediate: f64,
    pub small: f64,
    pub small_linear: f64,
    pub small_counting: f64,
}

impl RegimeSums {
    pub fn total(&self) -> f64 {
        self.large + self.intermediate + self.small
    }
}

fn require_complete(table: &HaarCoefficientTable, n: u32) -> Result<()> {
    let p = table
        .precision_bits()
        .ok_or_else(|| Error::domain("the table must come from a point set"))?;
    if table.max_level() < (p as i32 - 1).max(n as i32 - 1) {
        return Err(Error::domain("the table must reach level max(precision, n) - 1"));
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn three_regime_sums(table: &HaarCoefficientTable, n: u32, t: u32) -> Result<RegimeSums> {
    require_complete(table, n)?;
    let d = table.dim();
    let split = n.saturating_sub(t.div_ceil(2));
    let n2 = (table.point_count() as f64).powi(2);
    let (mut large, mut intermediate, mut small, mut small_counting) = (0.0, 0.0, 0.0, 0.0);
    for b in table.blocks() {
        if b.shape().iter().any(|&j| j < 0) {
            continue;
        }
        let w = 2f64.powi(b.order() as i32);
        let lin = b.linear_f64();
        let missing = (b.index_count() - b.len() as u128) as f64;
        let mut full = missing * lin * lin;
        let mut counting = 0.0;
        for (_, c) in b.entries() {
            let c = table.counting_f64(c);
            full += (c - lin).powi(2);
            counting += c * c;
        }
        let o = b.order();
        if o < split {
            large += w * full;
        } else if o < n {
            intermediate += w * full;
        } else {
            small += w * full;
            small_counting += w * counting;
        }
    }
    // shapes beyond the table hold only their linear part: N² ∏_k 2^{-2j_k-4} per shape
    let j_max = table.max_level();
    let per_axis = 1.0 / 12.0;
    let per_axis_in = per_axis * (1.0 - 4f64.powi(-(j_max + 1)));
    small += n2 * (per_axis.powi(d as i32) - per_axis_in.powi(d as i32));
    let below: f64 = (0..n as u64)
        .map(|k| 4f64.powi(-(k as i32)) * binomial(k + d as u64 - 1, d as u64 - 1))
        .sum();
    let small_linear = n2 * 2f64.powi(-4 * d as i32) * ((4.0f64 / 3.0).powi(d as i32) - below);
    Ok(RegimeSums {
        n,
        t,
        large,
        intermediate,
        small,
        small_linear,
        small_counting,
    })
}

/// Fitted constants of the coefficient bounds for an order-2 net with `2^n` points.
///
/// * `c1 = max |coeff| 2^{|j|}` over `|j| >= n - ⌈t/2⌉`.
/// * `c2`: the smallest constant such that for every shape with `|j| >= n - ⌈t/2⌉` at
///   most `2^n` positions have `|coeff| > c2·2^{-2|j|+n}`.
/// * `c3 = max |coeff| / (2^{-n}(2n - t - 2|j|)^{d-1})` over `|j| < n - ⌈t/2⌉`.
///
/// Levels range over `N_{-1}^d`. Shapes beyond the table only carry the linear part,
/// whose scaled values do not exceed those inside the table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma31Fit {
    pub n: u32,
    pub t: u32,
    pub c1: f64,
    pub c2: f64,
    pub c3: Option<f64>,
    /// Largest number of positions in one shape exceeding the `c2` bound.
    pub max_exceptions: u64,
}

/// The `(k+1)`-th largest of the stored values (sorted descending) together with
/// `missing` copies of `lin`.
fn kth_largest(sorted: &[f64], missing: u128, lin: f64, k: usize) -> f64 {
    let above = sorted.iter().take_while(|&&v| v > lin).count();
    if k < above {
        sorted[k]
    } else if (k as u128) < above as u128 + missing {
        lin
    } else {
        sorted.get(k - missing as usize).copied().unwrap_or(0.0)
    }
}

pub fn lemma31_fit(table: &HaarCoefficientTable, n: u32, t: u32) -> Result<Lemma31Fit> {
    require_complete(table, n)?;
    let d = table.dim();
    if table.point_count() != 1u64 << n {
        return Err(Error::domain("the table must come from 2^n points"));
    }
    let split = n.saturating_sub(t.div_ceil(2));
    let allowed = 1usize << n;
    // shapes beyond the table with one level above it and the others -1 give
    // |L| 2^{2|j|-n} = 2^{-(d-1)} / 4; no other linear-only shape exceeds it
    let mut c2 = 2f64.powi(-(d as i32 - 1)) / 4.0;
    let mut c1 = 0f64;
    let mut c3: Option<f64> = None;
    let mut upper: Vec<(f64, Vec<f64>, u128, f64)> = Vec::new();
    for b in table.blocks() {
        let o = b.order();
        let lin = b.linear_f64().abs();
        let mut abs: Vec<f64> = b.entries().map(|(_, c)| (table.counting_f64(c) - b.linear_f64()).abs()).collect();
        abs.sort_by(|x, y| y.total_cmp(x));
        let missing = b.index_count() - b.len() as u128;
        let top = abs.first().copied().unwrap_or(0.0).max(if missing > 0 { lin } else { 0.0 });
        if o >= split {
            c1 = c1.max(top * 2f64.powi(o as i32));
            let scale = 2f64.powi(2 * o as i32 - n as i32);
            if b.index_count() > allowed as u128 {
                c2 = c2.max(kth_largest(&abs, missing, lin, allowed) * scale);
            }
            upper.push((scale, abs, missing, lin));
        } else {
            let denom = 2f64.powi(-(n as i32)) * ((2 * n - t - 2 * o) as f64).powi(d as i32 - 1);
            c3 = Some(c3.unwrap_or(0.0).max(top / denom));
        }
    }
    let max_exceptions = upper
        .iter()
        .map(|(scale, abs, missing, lin)| {
            let stored = abs.iter().filter(|&&v| v * scale > c2).count() as u64;
            stored + if lin * scale > c2 { *missing as u64 } else { 0 }
        })
        .max()
        .unwrap_or(0);
    Ok(Lemma31Fit {
        n,
        t,
        c1,
        c2,
        c3,
        max_exceptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2net::{builtin, digital_points, minimal_t};
    use crate::haar::coefficient_table;
    use crate::pointset::PointSet;

    fn net(d: usize, n: usize) -> (PointSet, u32) {
        let spec = builtin("hammersley", d, n, 2).unwrap();
        let t = minimal_t(&spec, 2, 1 << 30).unwrap();
        (digital_points(&spec).unwrap(), t)
    }

    #[test]
    fn regimes_add_up_to_cube_energy() {
        let (ps, t) = net(2, 4);
        let table = coefficient_table(&ps, ps.precision_bits() as i32 - 1, 1 << 30).unwrap();
        let r = three_regime_sums(&table, 4, t).unwrap();
        // cube energy = ‖D‖₂² minus the indices with some level -1
        let all = crate::haar::parseval_squared(&table).unwrap();
        let all = crate::scalar::ratio_to_f64(&all);
        let with_minus: f64 = table
            .blocks()
            .iter()
            .filter(|b| b.shape().iter().any(|&j| j < 0))
            .map(|b| {
                let lin = b.linear_f64();
                let missing = (b.index_count() - b.len() as u128) as f64;
                let s: f64 = b.entries().map(|(_, c)| (table.counting_f64(c) - lin).powi(2)).sum();
                2f64.powi(b.order() as i32) * (s + missing * lin * lin)
            })
            .sum::<f64>();
        // shapes with a -1 level beyond the table: per axis 1/4 for -1 and 1/12 otherwise
        let j = table.max_level();
        let inner = 1.0 / 12.0 * (1.0 - 4f64.powi(-(j + 1)));
        let n2 = (ps.len() as f64).powi(2);
        let tail_minus = n2 * ((0.25f64 + 1.0 / 12.0).powi(2) - (0.25 + inner).powi(2))
            - n2 * ((1.0f64 / 12.0).powi(2) - inner.powi(2));
        let expect = all - with_minus - tail_minus;
        assert!((r.total() - expect).abs() < 1e-9 * expect, "{} vs {expect}", r.total());
        assert!(r.small_linear > 0.0 && r.small_counting > 0.0);
    }

    #[test]
    fn lemma_fit_exceptions_bounded() {
        for (d, n) in [(2, 4), (2, 5), (3, 4)] {
            let (ps, t) = net(d, n);
            let table = coefficient_table(&ps, ps.precision_bits() as i32 - 1, 1 << 32).unwrap();
            let f = lemma31_fit(&table, n as u32, t).unwrap();
            assert!(f.max_exceptions <= 1 << n);
            assert!(f.c1 > 0.0 && f.c2 > 0.0);
        }
    }

    #[test]
    fn kth_with_missing() {
        let sorted = [5.0, 4.0, 1.0, 0.5];
        assert_eq!(kth_largest(&sorted, 3, 2.0, 1), 4.0);
        assert_eq!(kth_largest(&sorted, 3, 2.0, 2), 2.0);
        assert_eq!(kth_largest(&sorted, 3, 2.0, 4), 2.0);
        assert_eq!(kth_largest(&sorted, 3, 2.0, 5), 1.0);
        assert_eq!(kth_largest(&sorted, 3, 2.0, 7), 0.0);
    }
}
