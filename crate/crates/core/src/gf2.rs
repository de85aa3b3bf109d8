//! Affine GF(2) expressions over independent fair coins.
//!
//! Every coordinate of the Ledrappier field and of the block process is an
//! affine functional `c + s_1 + .. + s_m (mod 2)` of named coin tosses. For
//! such functionals, the probability of any system of constraints is either
//! 0 or `2^-rank`, and independence of two groups is a rank identity. This
//! module computes both exactly.

use std::fmt;
use std::ops::BitXor;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::law::{JointDist, Word};

/// Default cap on the number of coordinates of an exact joint table.
pub const DEFAULT_LENGTH_BOUND: usize = 24;

/// Where a coin toss comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SeedTag {
    /// Cell `(i, 0)` of the plane.
    Horizontal,
    /// Cell `(0, j)`, `j < 0`, of the plane.
    Vertical,
    /// Free position of the 1-D block process.
    Block,
    /// Anonymous coins (reference processes, tests).
    Coin,
}

/// Name of one fair coin. Equal ids are the same toss.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SeedId {
    pub tag: SeedTag,
    pub index: i64,
}

impl SeedId {
    pub const fn new(tag: SeedTag, index: i64) -> Self {
        Self { tag, index }
    }

    pub const fn coin(index: i64) -> Self {
        Self::new(SeedTag::Coin, index)
    }
}

impl fmt::Display for SeedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.tag {
            SeedTag::Horizontal => "h",
            SeedTag::Vertical => "v",
            SeedTag::Block => "b",
            SeedTag::Coin => "s",
        };
        write!(f, "{tag}{}", self.index)
    }
}

/// `constant XOR (XOR of the seeds in support)`, kept in canonical form:
/// the support is sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitExpr {
    support: Vec<SeedId>,
    constant: bool,
}

impl BitExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(bit: bool) -> Self {
        Self { support: Vec::new(), constant: bit }
    }

    pub fn seed(id: SeedId) -> Self {
        Self { support: vec![id], constant: false }
    }

    /// Sum of the given seeds; a seed listed twice cancels.
    pub fn from_seeds(seeds: impl IntoIterator<Item = SeedId>, constant: bool) -> Self {
        let mut all: Vec<SeedId> = seeds.into_iter().collect();
        all.sort_unstable();
        let mut support = Vec::with_capacity(all.len());
        let mut i = 0;
        while i < all.len() {
            let mut j = i;
            while j < all.len() && all[j] == all[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                support.push(all[i]);
            }
            i = j;
        }
        Self { support, constant }
    }

    /// Builds from an already sorted, duplicate-free support.
    pub(crate) fn from_sorted(support: Vec<SeedId>, constant: bool) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        Self { support, constant }
    }

    pub fn support(&self) -> &[SeedId] {
        &self.support
    }

    pub fn constant_term(&self) -> bool {
        self.constant
    }

    /// The identically-zero expression.
    pub fn is_zero(&self) -> bool {
        self.support.is_empty() && !self.constant
    }

    /// True when the expression does not depend on any seed.
    pub fn is_constant(&self) -> bool {
        self.support.is_empty()
    }

    pub fn xor(&self, other: &BitExpr) -> BitExpr {
        let (a, b) = (&self.support, &other.support);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        BitExpr { support: out, constant: self.constant ^ other.constant }
    }

    /// Value under a concrete assignment of the seeds.
    pub fn evaluate(&self, mut value: impl FnMut(SeedId) -> bool) -> bool {
        self.support.iter().fold(self.constant, |acc, &s| acc ^ value(s))
    }
}

/// `a XOR b` with cancellation of shared seeds.
pub fn xor(a: &BitExpr, b: &BitExpr) -> BitExpr {
    a.xor(b)
}

impl BitXor for &BitExpr {
    type Output = BitExpr;
    fn bitxor(self, rhs: &BitExpr) -> BitExpr {
        self.xor(rhs)
    }
}

impl BitXor for BitExpr {
    type Output = BitExpr;
    fn bitxor(self, rhs: BitExpr) -> BitExpr {
        self.xor(&rhs)
    }
}

impl fmt::Debug for BitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for BitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "{}", u8::from(self.constant));
        }
        for (n, s) in self.support.iter().enumerate() {
            if n > 0 {
                write!(f, "+")?;
            }
            write!(f, "{s}")?;
        }
        if self.constant {
            write!(f, "+1")?;
        }
        Ok(())
    }
}

/// Exact probability `num / 2^log2_den`, normalized so `num` is odd (or the
/// value is zero).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Dyadic {
    num: u128,
    log2_den: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, log2_den: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, log2_den: 0 };

    pub fn new(num: u128, log2_den: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let shift = num.trailing_zeros().min(log2_den);
        Self { num: num >> shift, log2_den: log2_den - shift }
    }

    /// `2^-r`.
    pub fn pow2_neg(r: u32) -> Self {
        Self { num: 1, log2_den: r }
    }

    pub fn num(&self) -> u128 {
        self.num
    }

    pub fn log2_den(&self) -> u32 {
        self.log2_den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::one() << self.log2_den as usize)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 * (-(self.log2_den as f64)).exp2()
    }

    /// The dyadic value of `r`, if its reduced denominator is a power of two
    /// and its numerator fits.
    pub fn from_ratio(r: &BigRational) -> Option<Self> {
        if r.is_zero() {
            return Some(Self::ZERO);
        }
        let den = r.denom();
        let bits = den.bits();
        if bits == 0 || (den.clone() & (den - BigInt::one())) != BigInt::zero() {
            return None;
        }
        let num: u128 = r.numer().try_into().ok()?;
        Some(Self::new(num, (bits - 1) as u32))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_ratio().cmp(&other.to_ratio())
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log2_den == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.log2_den)
        }
    }
}

/// Constraints `expr = bit`, jointly imposed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AffineSystem {
    rows: Vec<(BitExpr, bool)>,
}

impl AffineSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: Vec<(BitExpr, bool)>) -> Self {
        Self { rows }
    }

    pub fn push(&mut self, expr: BitExpr, required: bool) {
        self.rows.push((expr, required));
    }

    pub fn with(mut self, expr: BitExpr, required: bool) -> Self {
        self.push(expr, required);
        self
    }

    pub fn rows(&self) -> &[(BitExpr, bool)] {
        &self.rows
    }

    pub fn probability(&self) -> Dyadic {
        system_probability(self)
    }
}

/// Dense row over GF(2), 64 columns per word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub(crate) fn zeros(cols: usize) -> Self {
        Self { words: vec![0; cols.div_ceil(64)] }
    }

    pub(crate) fn set(&mut self, col: usize) {
        self.words[col / 64] |= 1 << (col % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn lowest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

/// Row-echelon basis keyed by each row's lowest set column.
///
/// Reducing by the row owning the lowest bit only introduces higher bits, so
/// insertion terminates after at most `rank` reductions.
pub(crate) struct EchelonBasis {
    rows: Vec<BitRow>,
    pivot_owner: Vec<Option<usize>>,
}

impl EchelonBasis {
    pub(crate) fn new(cols: usize) -> Self {
        Self { rows: Vec::new(), pivot_owner: vec![None; cols] }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the basis; returns the residual's pivot, if any.
    fn reduce(&self, row: &mut BitRow) -> Option<usize> {
        while let Some(p) = row.lowest_one() {
            match self.pivot_owner[p] {
                Some(owner) => row.xor_assign(&self.rows[owner]),
                None => return Some(p),
            }
        }
        None
    }

    /// Inserts a row; returns the pivot of the independent residual, or
    /// `None` when the row was already in the span.
    pub(crate) fn insert(&mut self, mut row: BitRow) -> Option<usize> {
        let pivot = self.reduce(&mut row)?;
        self.pivot_owner[pivot] = Some(self.rows.len());
        self.rows.push(row);
        Some(pivot)
    }
}

/// Sorted, duplicate-free list of the seeds used by `exprs`.
fn seed_universe<'a>(exprs: impl IntoIterator<Item = &'a BitExpr>) -> Vec<SeedId> {
    let mut seeds: Vec<SeedId> = exprs.into_iter().flat_map(|e| e.support.iter().copied()).collect();
    seeds.sort_unstable();
    seeds.dedup();
    seeds
}

fn homogeneous_row(expr: &BitExpr, universe: &[SeedId], cols: usize) -> BitRow {
    let mut row = BitRow::zeros(cols);
    for s in &expr.support {
        let col = universe.binary_search(s).expect("seed missing from universe");
        row.set(col);
    }
    row
}

/// Exact probability that every row of `sys` holds: 0 if the system is
/// inconsistent, `2^-rank` otherwise.
pub fn system_probability(sys: &AffineSystem) -> Dyadic {
    let universe = seed_universe(sys.rows.iter().map(|(e, _)| e));
    let n = universe.len();
    // column n carries the right-hand side
    let mut basis = EchelonBasis::new(n + 1);
    for (expr, required) in &sys.rows {
        let mut row = homogeneous_row(expr, &universe, n + 1);
        if expr.constant ^ required {
            row.set(n);
        }
        if basis.insert(row) == Some(n) {
            return Dyadic::ZERO;
        }
    }
    Dyadic::pow2_neg(basis.rank() as u32)
}

/// GF(2) rank of the homogeneous parts.
pub fn rank(exprs: &[BitExpr]) -> usize {
    let universe = seed_universe(exprs);
    let mut basis = EchelonBasis::new(universe.len());
    for e in exprs {
        basis.insert(homogeneous_row(e, &universe, universe.len()));
    }
    basis.rank()
}

/// Exact joint law of `exprs` with the default length bound.
pub fn joint_distribution(exprs: &[BitExpr]) -> Result<JointDist> {
    joint_distribution_bounded(exprs, DEFAULT_LENGTH_BOUND)
}

/// Exact joint law of `exprs`: uniform on the affine image of the seed
/// space, each support point with probability `2^-rank`.
///
/// The table holds one entry per support point, so memory grows as
/// `2^rank`; `bound` caps the number of expressions.
pub fn joint_distribution_bounded(exprs: &[BitExpr], bound: usize) -> Result<JointDist> {
    let k = exprs.len();
    if k > bound || k > 63 {
        return Err(Error::LengthBound { len: k, bound: bound.min(63) });
    }
    let universe = seed_universe(exprs);
    // column of seed s: which outputs contain it
    let mut columns = vec![0u64; universe.len()];
    for (t, e) in exprs.iter().enumerate() {
        for s in &e.support {
            let col = universe.binary_search(s).expect("seed missing from universe");
            columns[col] |= 1 << t;
        }
    }
    let offset: u64 = exprs
        .iter()
        .enumerate()
        .filter(|(_, e)| e.constant)
        .fold(0, |acc, (t, _)| acc | (1 << t));

    let basis = span_basis(&columns);
    let r = basis.len();
    let p = Dyadic::pow2_neg(r as u32).to_ratio();
    let mut entries: Vec<(Word, BigRational)> = Vec::with_capacity(1 << r);
    for mask in 0u64..(1u64 << r) {
        let mut y = offset;
        for (b, v) in basis.iter().enumerate() {
            if (mask >> b) & 1 == 1 {
                y ^= v;
            }
        }
        let word: Word = (0..k).map(|t| ((y >> t) & 1) as u8).collect();
        entries.push((word, p.clone()));
    }
    Ok(JointDist::new(2, vec![k], entries))
}

/// Basis of the span of packed vectors.
fn span_basis(vectors: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vectors {
        let mut x = v;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

/// Independence of two groups of expressions (bounded jointly by the
/// default length bound).
pub fn are_independent(a: &[BitExpr], b: &[BitExpr]) -> Result<bool> {
    are_independent_bounded(a, b, DEFAULT_LENGTH_BOUND)
}

pub fn are_independent_bounded(a: &[BitExpr], b: &[BitExpr], bound: usize) -> Result<bool> {
    if a.len() + b.len() > bound {
        return Err(Error::LengthBound { len: a.len() + b.len(), bound });
    }
    Ok(rank_independent(a, b))
}

/// `rank(A u B) == rank(A) + rank(B)`, with no length bound.
pub fn rank_independent(a: &[BitExpr], b: &[BitExpr]) -> bool {
    let both: Vec<BitExpr> = a.iter().chain(b).cloned().collect();
    rank(&both) == rank(a) + rank(b)
}
