//! The one-sided block process.
//!
//! A 0-block is one fair bit. A (k+1)-block is three k-blocks: the first two
//! independent, the third their pointwise sum mod 2. In base 3 this means the
//! coordinates whose digits are all 0 or 1 carry fresh coins, and a coordinate
//! with a digit 2 at position `k` is the sum of the coordinates `3^k` and
//! `2 * 3^k` below it.

use std::collections::HashMap;
use std::sync::RwLock;

use num_rational::BigRational;
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{joint_distribution, rank_independent, BitExpr, SeedId, SeedTag};
use crate::law::{JointDist, Word};
use crate::sampling::letter;
use crate::source::{check_len, LinearField, WindowSampler};

pub fn pow3(k: u32) -> u64 {
    3u64.pow(k)
}

/// Position of the lowest base-3 digit equal to 2.
pub fn lowest_two(mut x: u64) -> Option<u32> {
    let mut k = 0;
    while x > 0 {
        if x % 3 == 2 {
            return Some(k);
        }
        x /= 3;
        k += 1;
    }
    None
}

/// Memoized symbolic block process. Safe to share between threads.
#[derive(Default)]
pub struct BlockProcess {
    memo: RwLock<HashMap<u64, BitExpr>>,
}

impl BlockProcess {
    pub fn new() -> Self {
        Self::default()
    }

    /// Affine expression of coordinate `x`.
    pub fn coord_expr(&self, x: u64) -> BitExpr {
        if let Some(e) = self.memo.read().expect("block memo poisoned").get(&x) {
            return e.clone();
        }
        let e = match lowest_two(x) {
            None => BitExpr::seed(SeedId::new(SeedTag::Block, x as i64)),
            Some(k) => self.coord_expr(x - 2 * pow3(k)).xor(&self.coord_expr(x - pow3(k))),
        };
        self.memo.write().expect("block memo poisoned").insert(x, e.clone());
        e
    }

    pub fn coord_exprs(&self, start: u64, len: usize) -> Vec<BitExpr> {
        (start..start + len as u64).map(|x| self.coord_expr(x)).collect()
    }

    /// Exact law of `xi_start .. xi_{start+len-1}`.
    pub fn window_distribution_1d(&self, start: u64, len: usize) -> Result<JointDist> {
        check_len(len)?;
        joint_distribution(&self.coord_exprs(start, len))
    }

    /// Expressions of k-block number `b` (counted from 0).
    pub fn block_exprs(&self, k: u32, b: u64) -> Vec<BitExpr> {
        self.coord_exprs(b * pow3(k), pow3(k) as usize)
    }

    /// Whether the k-blocks listed in `a`, taken together, are independent
    /// of those listed in `b`.
    pub fn blocks_independent(&self, k: u32, a: &[u64], b: &[u64]) -> bool {
        let ea: Vec<BitExpr> = a.iter().flat_map(|&x| self.block_exprs(k, x)).collect();
        let eb: Vec<BitExpr> = b.iter().flat_map(|&x| self.block_exprs(k, x)).collect();
        rank_independent(&ea, &eb)
    }
}

impl LinearField for BlockProcess {
    type Site = i64;

    fn site_expr(&self, site: i64) -> BitExpr {
        assert!(site >= 0, "block process is indexed by nonnegative integers, got {site}");
        self.coord_expr(site as u64)
    }
}

/// Outcome of a family of rank independence checks.
#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub k: u32,
    pub pairs_checked: usize,
    /// Start coordinates of the offending pairs.
    pub dependent: Vec<(u64, u64)>,
}

impl PairReport {
    pub fn passed(&self) -> bool {
        self.dependent.is_empty()
    }
}

/// Every two distinct k-blocks inside the first (k+2)-block are independent.
pub fn block_independence_check(g: &BlockProcess, k: u32) -> PairReport {
    let blocks: Vec<Vec<BitExpr>> = (0..9).map(|b| g.block_exprs(k, b)).collect();
    let mut report = PairReport { k, pairs_checked: 0, dependent: Vec::new() };
    for a in 0..9 {
        for b in a + 1..9 {
            report.pairs_checked += 1;
            if !rank_independent(&blocks[a], &blocks[b]) {
                report.dependent.push((a as u64 * pow3(k), b as u64 * pow3(k)));
            }
        }
    }
    report
}

/// Every k-overlapping (the last (k-1)-block of one k-block followed by the
/// first of the next) is independent of every pair of consecutive
/// (k-1)-blocks lying in other k-blocks, over the first (k+2)-block.
pub fn overlap_independence_check(g: &BlockProcess, k: u32) -> PairReport {
    let mut report = PairReport { k, pairs_checked: 0, dependent: Vec::new() };
    if k == 0 {
        return report;
    }
    let sub = pow3(k - 1);
    let units = 27u64;
    let pair_exprs = |c: u64| -> Vec<BitExpr> { g.coord_exprs(c * sub, 2 * sub as usize) };
    let k_block = |c: u64| c / 3;
    for c in (2..units - 1).step_by(3) {
        let overlap = pair_exprs(c);
        let used = [k_block(c), k_block(c + 1)];
        for m in 0..units - 1 {
            if used.contains(&k_block(m)) || used.contains(&k_block(m + 1)) {
                continue;
            }
            report.pairs_checked += 1;
            if !rank_independent(&overlap, &pair_exprs(m)) {
                report.dependent.push((c * sub, m * sub));
            }
        }
    }
    report
}

/// Exact TV distance between the law of two windows and the product of
/// their marginals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MixingRow {
    pub gap: u64,
    #[serde(serialize_with = "crate::law::serialize_ratio")]
    pub tv_distance: BigRational,
}

/// For each gap `p`: distance of `(xi_0^{l-1}, xi_p^{p+l-1})` from product form.
pub fn mixing_profile_1d(g: &BlockProcess, len: usize, gaps: &[u64]) -> Result<Vec<MixingRow>> {
    check_len(len)?;
    gaps.iter()
        .map(|&gap| {
            let mut exprs = g.coord_exprs(0, len);
            exprs.extend(g.coord_exprs(gap, len));
            let joint = joint_distribution(&exprs)?.with_blocks(vec![len, len]);
            Ok(MixingRow { gap, tv_distance: joint.independence_defect() })
        })
        .collect()
}

/// Gap beyond which windows of length `len` are independent: `3^k` for the
/// least `k >= 1` with `3^(k-1) >= len`.
pub fn mixing_threshold(len: usize) -> u64 {
    let mut k = 1;
    while pow3(k - 1) < len as u64 {
        k += 1;
    }
    pow3(k)
}

/// Lazily tossed coins of one realization of the block process.
#[derive(Default)]
pub(crate) struct LazyBlock {
    coins: Vec<(u64, u8)>,
}

impl LazyBlock {
    pub(crate) fn value(&mut self, x: u64, rng: &mut ChaCha8Rng) -> u8 {
        match lowest_two(x) {
            Some(k) => self.value(x - 2 * pow3(k), rng) ^ self.value(x - pow3(k), rng),
            None => {
                if let Some(&(_, b)) = self.coins.iter().find(|(y, _)| *y == x) {
                    return b;
                }
                let b = letter(rng, 2);
                self.coins.push((x, b));
                b
            }
        }
    }
}

/// Sampler for windows of the block process.
#[derive(Clone, Copy, Debug, Default)]
pub struct BlockSampler;

impl WindowSampler for BlockSampler {
    fn alphabet(&self) -> u8 {
        2
    }

    fn sample_window(&self, start: i64, len: usize, rng: &mut ChaCha8Rng) -> Result<Word> {
        if start < 0 {
            return Err(Error::InvalidArgument(format!("block process window starts at {start} < 0")));
        }
        let mut lazy = LazyBlock::default();
        Ok((0..len as u64).map(|t| lazy.value(start as u64 + t, rng)).collect())
    }
}

/// True when every row of the profile is exactly zero.
pub fn profile_is_zero(rows: &[MixingRow]) -> bool {
    rows.iter().all(|r| r.tv_distance.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{five_sigma, sample_law};
    use num_bigint::BigInt;
    use num_traits::One;
    use proptest::prelude::*;

    fn b(x: i64) -> SeedId {
        SeedId::new(SeedTag::Block, x)
    }

    /// Closed form: replace every digit 2 of `x` by 0 or 1 in all ways and
    /// add the coins at the resulting positions.
    fn digit_oracle(x: u64) -> BitExpr {
        let mut digits = Vec::new();
        let mut y = x;
        while y > 0 {
            digits.push(y % 3);
            y /= 3;
        }
        let mut positions = vec![0u64];
        for (k, &d) in digits.iter().enumerate() {
            let p = pow3(k as u32);
            positions = match d {
                2 => positions.iter().flat_map(|&q| [q, q + p]).collect(),
                d => positions.iter().map(|&q| q + d * p).collect(),
            };
        }
        BitExpr::from_seeds(positions.into_iter().map(|q| b(q as i64)), false)
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_coordinates() {
        let g = BlockProcess::new();
        assert_eq!(g.coord_expr(2), BitExpr::from_seeds([b(0), b(1)], false));
        assert_eq!(g.coord_expr(6), &g.coord_expr(0) ^ &g.coord_expr(3));
        assert_eq!(g.coord_expr(4), BitExpr::seed(b(4)));
    }

    #[test]
    fn matches_digit_oracle() {
        let g = BlockProcess::new();
        for x in 0..3u64.pow(7) {
            assert_eq!(g.coord_expr(x), digit_oracle(x), "x = {x}");
        }
    }

    #[test]
    fn triple_identity_all_offsets() {
        let g = BlockProcess::new();
        for k in 0..=7 {
            for j in 0..pow3(k) {
                let s = g.coord_expr(j) ^ g.coord_expr(pow3(k) + j) ^ g.coord_expr(2 * pow3(k) + j);
                assert!(s.is_zero(), "k = {k}, j = {j}");
            }
        }
    }

    #[test]
    fn pattern_111() {
        let g = BlockProcess::new();
        let d0 = g.window_distribution_1d(0, 3).unwrap();
        assert!(d0.prob(&[1, 1, 1]).is_zero());
        let d1 = g.window_distribution_1d(1, 3).unwrap();
        assert_eq!(d1.prob(&[1, 1, 1]), ratio(1, 8));
        // seeds xi0, xi1 free, xi2 forced
        let parity = JointDist::uniform_on(2, vec![3], vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        assert_eq!(d0, parity);
    }

    #[test]
    fn block_independence() {
        let g = BlockProcess::new();
        for k in 0..=3 {
            let r = block_independence_check(&g, k);
            assert_eq!(r.pairs_checked, 36);
            assert!(r.passed(), "{r:?}");
        }
        assert!(g.blocks_independent(0, &[0], &[2]));
        assert!(g.blocks_independent(1, &[0], &[2]));
        assert!(!g.blocks_independent(1, &[0, 1], &[2]));
    }

    #[test]
    fn block_independence_distribution_form() {
        // product check on the exact tables for k <= 2
        let g = BlockProcess::new();
        for k in 0..=2u32 {
            let n = pow3(k) as usize;
            for a in 0..9u64 {
                for c in a + 1..9u64 {
                    let mut e = g.block_exprs(k, a);
                    e.extend(g.block_exprs(k, c));
                    let d = joint_distribution(&e).unwrap().with_blocks(vec![n, n]);
                    assert!(d.independence_defect().is_zero(), "k={k} blocks {a},{c}");
                }
            }
        }
    }

    #[test]
    fn all_blocks_share_one_law() {
        let g = BlockProcess::new();
        for k in 0..=2u32 {
            let n = pow3(k) as usize;
            let first = g.window_distribution_1d(0, n).unwrap();
            for slot in 1..3 {
                assert_eq!(g.window_distribution_1d(slot * pow3(k), n).unwrap(), first);
            }
        }
    }

    #[test]
    fn overlaps() {
        let g = BlockProcess::new();
        assert!(overlap_independence_check(&g, 0).passed());
        assert_eq!(overlap_independence_check(&g, 0).pairs_checked, 0);
        for k in 1..=3 {
            let r = overlap_independence_check(&g, k);
            assert!(r.pairs_checked > 0);
            assert!(r.passed(), "{r:?}");
        }
        let pair = |x: u64| g.coord_exprs(x, 2);
        assert!(rank_independent(&pair(2), &pair(6)));
    }

    #[test]
    fn mixing_profile_examples() {
        let g = BlockProcess::new();
        let rows = mixing_profile_1d(&g, 1, &[4]).unwrap();
        assert!(profile_is_zero(&rows));
        let gaps: Vec<u64> = (0..=6).map(|k| 2 * pow3(k)).collect();
        assert!(profile_is_zero(&mixing_profile_1d(&g, 1, &gaps).unwrap()));
        let far: Vec<u64> = (10..=40).collect();
        assert!(profile_is_zero(&mixing_profile_1d(&g, 3, &far).unwrap()));
        // overlapping windows are dependent
        let rows = mixing_profile_1d(&g, 2, &[1]).unwrap();
        assert!(!rows[0].tv_distance.is_zero());
        assert_eq!(mixing_threshold(1), 3);
        assert_eq!(mixing_threshold(2), 9);
        assert_eq!(mixing_threshold(3), 9);
        assert_eq!(mixing_threshold(4), 27);
    }

    #[test]
    fn sampler_matches_exact_window() {
        let g = BlockProcess::new();
        let n = 200_000;
        for start in [0u64, 1, 5] {
            let exact = g.window_distribution_1d(start, 3).unwrap();
            let emp = sample_law(2, 3, n, 17, start as u32, |rng| BlockSampler.sample_window(start as i64, 3, rng)).unwrap();
            for m in 0..8u8 {
                let w = vec![m & 1, (m >> 1) & 1, (m >> 2) & 1];
                let p = crate::law::ratio_to_f64(&exact.prob(&w));
                assert!((emp.freq(&w) - p).abs() <= five_sigma(p, n).max(1e-12), "start {start} word {w:?}");
            }
        }
        assert!(BlockSampler.sample_window(-1, 2, &mut crate::sampling::stream_rng(0, 0)).is_err());
    }

    proptest! {
        #[test]
        fn rule_at_every_level(x in 0u64..3u64.pow(12)) {
            let g = BlockProcess::new();
            // every digit-2 position gives the same decomposition
            let mut y = x;
            let mut k = 0;
            while y > 0 {
                if y % 3 == 2 {
                    let s = g.coord_expr(x) ^ g.coord_expr(x - pow3(k)) ^ g.coord_expr(x - 2 * pow3(k));
                    prop_assert!(s.is_zero());
                }
                y /= 3;
                k += 1;
            }
            prop_assert_eq!(g.coord_expr(x), digit_oracle(x));
        }
    }

    #[test]
    fn total_is_one() {
        let g = BlockProcess::new();
        assert_eq!(g.window_distribution_1d(7, 5).unwrap().total(), BigRational::one());
    }
}
