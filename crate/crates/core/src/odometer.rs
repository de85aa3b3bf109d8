//! Stationarization of the block process over the 3-adic odometer.
//!
//! The skeleton digit `S_k` says which slot (0, 1 or 2) of its (k+1)-block the
//! k-block holding `xi_0` occupies, so `xi_0` sits at offset
//! `S_0 + 3 S_1 + 9 S_2 + ...` of its K-block. Shifting the process by one
//! coordinate adds 1 to that 3-adic number.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::block::{lowest_two, pow3, BlockProcess, LazyBlock};
use crate::error::{Error, Result};
use crate::gf2::SeedTag;
use crate::law::{format_word, EmpiricalDist, JointDist, Word};
use crate::sampling::{five_sigma, five_sigma_diff, sample_law, stream_rng};
use crate::source::{check_len, WindowSampler};

/// Hard cap on skeleton length; `3^40` still fits in a `u64`.
pub const MAX_DIGITS: usize = 40;

/// Upper `10^-6` quantile of the chi-square law with 3 degrees of freedom.
pub const CHI2_3DOF_CRITICAL: f64 = 30.66;

/// Finite prefix `(S_0, .., S_{K-1})` of a skeleton sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SkeletonState {
    digits: Vec<u8>,
}

impl SkeletonState {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d > 2) {
            return Err(Error::InvalidArgument(format!("skeleton digit {d} is not in 0..=2")));
        }
        if digits.len() > MAX_DIGITS {
            return Err(Error::TruncationLimit { limit: MAX_DIGITS });
        }
        Ok(Self { digits })
    }

    pub fn zeros(k: usize) -> Self {
        Self { digits: vec![0; k] }
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// Truncation level K.
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Length `3^K` of the block the prefix describes.
    pub fn block_len(&self) -> u64 {
        pow3(self.digits.len() as u32)
    }

    /// Whether coordinates `start..start+len` (relative to `xi_0`) fall
    /// inside the K-block.
    pub fn covers(&self, start: i64, len: usize) -> bool {
        let lo = position_of_origin(self) as i128 + start as i128;
        lo >= 0 && lo + len as i128 <= self.block_len() as i128
    }

    fn push(&mut self, digit: u8) -> Result<()> {
        if self.digits.len() == MAX_DIGITS {
            return Err(Error::TruncationLimit { limit: MAX_DIGITS });
        }
        self.digits.push(digit);
        Ok(())
    }

    /// Index of the state among the `3^K` prefixes of its length.
    pub fn index(&self) -> u64 {
        position_of_origin(self)
    }

    /// The prefix of length `k` whose offset is `index`.
    pub fn from_index(index: u64, k: usize) -> Self {
        let mut x = index;
        let digits = (0..k)
            .map(|_| {
                let d = (x % 3) as u8;
                x /= 3;
                d
            })
            .collect();
        Self { digits }
    }
}

/// K i.i.d. uniform digits drawn from `rng`.
pub fn skeleton_from_rng(k: usize, rng: &mut ChaCha8Rng) -> Result<SkeletonState> {
    SkeletonState::new((0..k).map(|_| rng.gen_range(0..3u8)).collect())
}

/// K i.i.d. uniform digits, deterministic in `rng_seed`.
pub fn skeleton_sample(k: usize, rng_seed: u64) -> Result<SkeletonState> {
    skeleton_from_rng(k, &mut stream_rng(rng_seed, 0))
}

/// Adds 1 to the 3-adic number; errors when every digit is 2.
pub fn shift_skeleton(s: &SkeletonState) -> Result<SkeletonState> {
    let mut digits = s.digits.clone();
    for d in digits.iter_mut() {
        if *d < 2 {
            *d += 1;
            return Ok(SkeletonState { digits });
        }
        *d = 0;
    }
    Err(Error::CarryOverflow { digits: s.digits.len() })
}

/// Adds 1 modulo `3^K` (the carry out of the top digit is dropped).
pub fn shift_truncated(s: &SkeletonState) -> SkeletonState {
    shift_skeleton(s).unwrap_or_else(|_| SkeletonState::zeros(s.len()))
}

/// Offset of `xi_0` inside its K-block: `sum S_k 3^k`.
pub fn position_of_origin(s: &SkeletonState) -> u64 {
    s.digits.iter().rev().fold(0u64, |acc, &d| acc * 3 + d as u64)
}

/// Extends `s` with digits from `rng` until it covers the window.
fn extend_to_cover(s: &mut SkeletonState, start: i64, len: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    while !s.covers(start, len) {
        s.push(rng.gen_range(0..3u8))?;
    }
    Ok(())
}

/// The stationary process, optionally conditioned on a skeleton prefix.
/// Missing digits are drawn lazily, each fresh and uniform.
#[derive(Clone, Debug, Default)]
pub struct StationaryProcess {
    pub skeleton: Option<SkeletonState>,
}

impl StationaryProcess {
    pub fn unconditioned() -> Self {
        Self { skeleton: None }
    }

    pub fn conditioned(skeleton: SkeletonState) -> Self {
        Self { skeleton: Some(skeleton) }
    }

    /// Draws the coordinates at `sites` (relative to `xi_0`) jointly.
    pub fn sample_sites(&self, sites: &[i64], rng: &mut ChaCha8Rng) -> Result<Word> {
        let Some((&lo, &hi)) = sites.iter().min().zip(sites.iter().max()) else {
            return Ok(Vec::new());
        };
        let mut s = self.skeleton.clone().unwrap_or_default();
        extend_to_cover(&mut s, lo, (hi - lo + 1) as usize, rng)?;
        let o = position_of_origin(&s) as i64;
        let mut lazy = LazyBlock::default();
        Ok(sites.iter().map(|&t| lazy.value((o + t) as u64, rng)).collect())
    }
}

impl WindowSampler for StationaryProcess {
    fn alphabet(&self) -> u8 {
        2
    }

    fn sample_window(&self, start: i64, len: usize, rng: &mut ChaCha8Rng) -> Result<Word> {
        check_len(len)?;
        let sites: Vec<i64> = (start..start + len as i64).collect();
        self.sample_sites(&sites, rng)
    }
}

/// One reproducible window draw.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StationarySampleSpec {
    pub start: i64,
    pub len: usize,
    pub rng_seed: u64,
    pub skeleton: Option<SkeletonState>,
}

pub fn sample_window(spec: &StationarySampleSpec) -> Result<Word> {
    let p = StationaryProcess { skeleton: spec.skeleton.clone() };
    p.sample_window(spec.start, spec.len, &mut stream_rng(spec.rng_seed, 0))
}

/// Exact law of the stationary window `start..start+len`, as the average
/// over all `3^K` offsets of the block law with `S_K = 1`.
///
/// Needs `-3^K <= start` and `start + len <= 3^K + 1` so every window stays
/// inside the (K+1)-block.
pub fn mixture_window_law(g: &BlockProcess, start: i64, len: usize, k: u32) -> Result<JointDist> {
    check_len(len)?;
    let n = pow3(k) as i64;
    if start < -n || start + len as i64 > n + 1 {
        return Err(Error::InvalidArgument(format!(
            "window {start}:{len} does not fit the level-{k} mixture; raise the level"
        )));
    }
    let mut acc: BTreeMap<Word, BigRational> = BTreeMap::new();
    for o in 0..n {
        let law = g.window_distribution_1d((o + n + start) as u64, len)?;
        for (w, p) in law.iter() {
            *acc.entry(w.clone()).or_insert_with(BigRational::zero) += p;
        }
    }
    let scale = BigRational::from_integer(BigInt::from(n));
    Ok(JointDist::new(2, vec![len], acc.into_iter().map(|(w, p)| (w, p / &scale))))
}

/// Least mixture level that accepts the window.
pub fn mixture_level(start: i64, len: usize) -> u32 {
    let mut k = 0;
    while start < -(pow3(k) as i64) || start + len as i64 > pow3(k) as i64 + 1 {
        k += 1;
    }
    k
}

/// Empirical word laws at several starts, compared against start 0.
#[derive(Clone, Debug)]
pub struct StationarityReport {
    pub len: usize,
    pub samples: u64,
    pub tables: Vec<(i64, EmpiricalDist)>,
    /// Largest TV distance from the start-0 table.
    pub max_tv: f64,
    /// Largest `|f_s(w) - f_0(w)| / tolerance` over cells.
    pub worst_ratio: f64,
    pub passed: bool,
}

impl StationarityReport {
    /// CSV with columns `start,word,freq`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("start,word,freq\n");
        for (start, table) in &self.tables {
            for (w, _) in table.iter() {
                let _ = writeln!(out, "{start},{},{}", format_word(w, &[self.len]), table.freq(w));
            }
        }
        out
    }
}

pub const STATIONARITY_STARTS: [i64; 4] = [0, 1, 2, 3];

/// Draws `n` windows of length `len` at each start in `{0, 1, 2, 3}` and
/// compares each table with start 0, cell by cell, at five standard errors
/// of the difference of two frequencies.
pub fn stationarity_check<S: WindowSampler>(sampler: &S, len: usize, n: u64, rng_seed: u64) -> Result<StationarityReport> {
    check_len(len)?;
    if len > 6 {
        return Err(Error::InvalidArgument(format!("window length {len} exceeds 6")));
    }
    let mut tables = Vec::new();
    for (family, &start) in STATIONARITY_STARTS.iter().enumerate() {
        let t = sample_law(sampler.alphabet(), len, n, rng_seed, family as u32, |rng| {
            sampler.sample_window(start, len, rng)
        })?;
        tables.push((start, t));
    }
    let base = &tables[0].1;
    let mut max_tv: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for (_, t) in &tables[1..] {
        max_tv = max_tv.max(t.tv_between(base));
        let words: std::collections::BTreeSet<&Word> = t.iter().chain(base.iter()).map(|(w, _)| w).collect();
        for w in words {
            let (f0, fs) = (base.freq(w), t.freq(w));
            let tol = five_sigma_diff((f0 + fs) / 2.0, n);
            let ratio = if tol > 0.0 { (fs - f0).abs() / tol } else { 0.0 };
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    Ok(StationarityReport { len, samples: n, tables, max_tv, worst_ratio, passed: worst_ratio <= 1.0 })
}

/// Conditioned triple check at level k.
#[derive(Clone, Debug, Serialize)]
pub struct TripleCheckReport {
    pub k: u32,
    pub samples: u64,
    pub parity_violations: u64,
    /// Chi-square statistics of the pairs (0,1), (0,2), (1,2) against the
    /// uniform law on four cells.
    pub chi2_pairs: [f64; 3],
    /// Largest cell deviation over the pairs, in units of five standard errors.
    pub worst_ratio: f64,
    pub passed: bool,
}

impl TripleCheckReport {
    /// CSV with columns `k,parity_violations,chi2_pairs`.
    pub fn to_csv(&self) -> String {
        let chi = self.chi2_pairs.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(";");
        format!("k,parity_violations,chi2_pairs\n{},{},{}\n", self.k, self.parity_violations, chi)
    }
}

/// With the skeleton fixed, samples the coordinates `anchor`,
/// `anchor + 3^k`, `anchor + 2*3^k` (relative to `xi_0`), which must fill
/// the three k-block slots of one (k+1)-block inside the skeleton's K-block.
pub fn conditional_triple_check(
    k: u32,
    skeleton: &SkeletonState,
    anchor: i64,
    n: u64,
    rng_seed: u64,
) -> Result<TripleCheckReport> {
    let step = pow3(k) as i64;
    let x = position_of_origin(skeleton) as i64 + anchor;
    let bad = |reason: String| Error::BadAlignment { k, offset: x, reason };
    if x < 0 {
        return Err(bad("triple starts before the K-block".into()));
    }
    if x % (3 * step) >= step {
        return Err(bad(format!("first coordinate is not in slot 0 of its {}-block", k + 1)));
    }
    if x + 2 * step >= skeleton.block_len() as i64 {
        return Err(bad("triple leaves the skeleton's K-block".into()));
    }
    let sites = [anchor, anchor + step, anchor + 2 * step];
    let p = StationaryProcess::conditioned(skeleton.clone());
    let law = sample_law(2, 3, n, rng_seed, 0, |rng| p.sample_sites(&sites, rng))?;

    let parity_violations = law.iter().filter(|(w, _)| w[0] ^ w[1] ^ w[2] == 1).map(|(_, c)| c).sum();
    let mut chi2_pairs = [0.0; 3];
    let mut worst_ratio: f64 = 0.0;
    let tol = five_sigma(0.25, n);
    for (slot, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let mut cells = [0u64; 4];
        for (w, c) in law.iter() {
            cells[(w[a] * 2 + w[b]) as usize] += c;
        }
        let expect = n as f64 / 4.0;
        chi2_pairs[slot] = cells.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        for &c in &cells {
            worst_ratio = worst_ratio.max((c as f64 / n as f64 - 0.25).abs() / tol);
        }
    }
    let passed = parity_violations == 0 && worst_ratio <= 1.0 && chi2_pairs.iter().all(|&c| c < CHI2_3DOF_CRITICAL);
    Ok(TripleCheckReport { k, samples: n, parity_violations, chi2_pairs, worst_ratio, passed })
}

/// How `xi_0` is read off earlier coordinates when some digit is 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PastDetermination {
    /// Lowest level with `S_k = 2`.
    pub level: u32,
    /// Offset of `xi_0` in the K-block.
    pub origin: u64,
    /// First coordinate of the k-block holding `xi_0`.
    pub block_start: u64,
    /// Largest coin position in the expression of `xi_0`.
    pub max_seed: u64,
}

impl PastDetermination {
    /// Every coin behind `xi_0` lies before its k-block.
    pub fn from_past(&self) -> bool {
        self.max_seed < self.block_start
    }
}

/// For a skeleton with some `S_k = 2`, the coins that determine `xi_0`.
pub fn past_determination(g: &BlockProcess, s: &SkeletonState) -> Option<PastDetermination> {
    let origin = position_of_origin(s);
    let level = lowest_two(origin)?;
    let block_start = origin - origin % pow3(level);
    let expr = g.coord_expr(origin);
    let max_seed = expr
        .support()
        .iter()
        .map(|id| {
            debug_assert_eq!(id.tag, SeedTag::Block);
            id.index as u64
        })
        .max()
        .unwrap_or(0);
    Some(PastDetermination { level, origin, block_start, max_seed })
}
