//! Exhaustive check of the order-σ net property.
//!
//! For a coordinate, the weight of a row selection is the sum of its `min(η, σ)`
//! largest row indices. Independence is inherited by subsets, so it suffices to check
//! the largest selection of each weight class: for a "head" `H` of at most `σ`
//! indices, that is `H` itself when `|H| < σ`, and `H` together with every index below
//! `min H` when `|H| = σ`. A partial selection (some coordinates empty) is itself an
//! admissible selection, so the search stops at the first dependent prefix.

use rayon::prelude::*;

use super::{Basis, DigitalNetSpec};
use crate::error::{Error, Result};

/// Default cap on the number of rank updates performed by one check.
pub const DEFAULT_WORK_LIMIT: u128 = 100_000_000;

struct Head {
    weight: usize,
    rows: Vec<usize>,
}

/// All heads on rows `1..=rows` with weight at most `max_weight`, sorted by weight.
fn heads(rows: usize, sigma: usize, max_weight: usize) -> Vec<Head> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn rec(
        start: usize,
        rows: usize,
        sigma: usize,
        left: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Head>,
    ) {
        if !cur.is_empty() {
            let weight: usize = cur.iter().sum();
            let mut sel: Vec<usize> = cur.clone();
            if cur.len() == sigma {
                let lo = *cur.iter().min().unwrap();
                sel.extend(1..lo);
            }
            out.push(Head { weight, rows: sel });
        }
        if cur.len() == sigma {
            return;
        }
        for r in start..=rows.min(left) {
            cur.push(r);
            rec(r + 1, rows, sigma, left - r, cur, out);
            cur.pop();
        }
    }
    rec(1, rows, sigma, max_weight, &mut cur, &mut out);
    out.sort_by_key(|h| h.weight);
    out
}

/// Number of admissible selection classes (one rank update each) that a check of
/// `spec` at order `sigma` and quality `t` visits in the worst case.
pub fn selection_count(spec: &DigitalNetSpec, sigma: usize, t: u32) -> u128 {
    let rows = sigma * spec.n();
    let Some(w) = rows.checked_sub(t as usize) else {
        return 0;
    };
    let hs = heads(rows, sigma, w);
    let mut per_weight = vec![0u128; w + 1];
    for h in &hs {
        per_weight[h.weight] += 1;
    }
    // ways[s]: tuples over the processed coordinates of total weight s (empty heads allowed)
    let mut ways = vec![0u128; w + 1];
    ways[0] = 1;
    let mut total = 0u128;
    for _ in 0..spec.dim() {
        let mut next = ways.clone();
        for s in 0..=w {
            if ways[s] == 0 {
                continue;
            }
            for (hw, &c) in per_weight.iter().enumerate().skip(1) {
                if s + hw > w {
                    break;
                }
                next[s + hw] = next[s + hw].saturating_add(ways[s].saturating_mul(c));
            }
        }
        ways = next;
    }
    for v in ways {
        total = total.saturating_add(v);
    }
    total
}

/// True iff `spec` is an order-`sigma` digital `(t,n,d)`-net. For `sigma` below the
/// declared order only the first `sigma*n` rows of each matrix take part.
pub fn verify_net_order(spec: &DigitalNetSpec, sigma: usize, t: u32, work_limit: u128) -> Result<bool> {
    if sigma == 0 || sigma > spec.sigma() {
        return Err(Error::domain(format!(
            "order {sigma} must lie in 1..={}",
            spec.sigma()
        )));
    }
    let rows = sigma * spec.n();
    if t as usize > rows {
        return Err(Error::domain(format!("t = {t} exceeds sigma*n = {rows}")));
    }
    let w = rows - t as usize;
    Error::check_budget("net verification", selection_count(spec, sigma, t), work_limit)?;
    let hs = heads(rows, sigma, w);
    let mats: Vec<&[u64]> = spec.matrices().iter().map(|m| m.row_words()).collect();

    fn rec(k: usize, left: usize, basis: &Basis, hs: &[Head], mats: &[&[u64]]) -> bool {
        if k == mats.len() {
            return true;
        }
        // empty head for coordinate k
        if !rec(k + 1, left, basis, hs, mats) {
            return false;
        }
        for h in hs {
            if h.weight > left {
                break;
            }
            let mut b = *basis;
            if !h.rows.iter().all(|&r| b.insert(mats[k][r - 1])) {
                return false;
            }
            if !rec(k + 1, left - h.weight, &b, hs, mats) {
                return false;
            }
        }
        true
    }

    let root = Basis::default();
    if !rec(1, w, &root, &hs, &mats) {
        return Ok(false);
    }
    let ok = hs.par_iter().all(|h| {
        let mut b = root;
        h.rows.iter().all(|&r| b.insert(mats[0][r - 1])) && rec(1, w - h.weight, &b, &hs, &mats)
    });
    Ok(ok)
}

/// Smallest `t` for which [`verify_net_order`] passes. Checks run from `t = sigma*n`
/// downwards, cheapest first, relying on monotonicity in `t`.
pub fn minimal_t(spec: &DigitalNetSpec, sigma: usize, work_limit: u128) -> Result<u32> {
    let top = (sigma * spec.n()) as u32;
    let mut t = top;
    while t > 0 {
        if !verify_net_order(spec, sigma, t - 1, work_limit)? {
            break;
        }
        t -= 1;
    }
    Ok(t)
}
