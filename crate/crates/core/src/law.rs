//! Finite joint laws over tuples of words.
//!
//! A [`JointDist`] is an exact probability table; an [`EmpiricalDist`] is a
//! table of sample counts. Both group their coordinates into *components*
//! (one per word of a joining), so a 3-fold joining of windows of length
//! `l` has `blocks == [l, l, l]` and outcomes of length `3 * l`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A word over a finite alphabet `{0, .., alphabet - 1}`.
pub type Word = Vec<u8>;

/// Renders a word as concatenated letters, components separated by `|`.
pub fn format_word(word: &[u8], blocks: &[usize]) -> String {
    let mut out = String::with_capacity(word.len() + blocks.len());
    let mut pos = 0;
    for (b, &len) in blocks.iter().enumerate() {
        if b > 0 {
            out.push('|');
        }
        for &letter in &word[pos..pos + len] {
            out.push(char::from_digit(u32::from(letter), 36).unwrap_or('?'));
        }
        pos += len;
    }
    out
}

/// Parses a plain word such as `"0110"`.
pub fn parse_word(text: &str) -> Result<Word> {
    text.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as u8)
                .ok_or_else(|| Error::InvalidArgument(format!("bad letter {c:?} in word {text:?}")))
        })
        .collect()
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `num/2^k` when the denominator is a power of two, `num/den` otherwise.
pub fn format_ratio(r: &BigRational) -> String {
    let den = r.denom();
    if r.is_zero() {
        return "0".into();
    }
    let bits = den.bits();
    if bits > 0 && (den.clone() & (den - BigInt::one())).is_zero() {
        if bits == 1 {
            r.numer().to_string()
        } else {
            format!("{}/2^{}", r.numer(), bits - 1)
        }
    } else {
        format!("{}/{}", r.numer(), den)
    }
}

pub(crate) fn serialize_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(r))
}

/// Exact finite probability table.
#[derive(Clone, PartialEq, Eq)]
pub struct JointDist {
    alphabet: u8,
    blocks: Vec<usize>,
    table: BTreeMap<Word, BigRational>,
}

impl JointDist {
    /// Builds a table; zero entries are dropped and repeated outcomes merged.
    ///
    /// Panics if an outcome length disagrees with `blocks` or uses a letter
    /// outside the alphabet.
    pub fn new(
        alphabet: u8,
        blocks: Vec<usize>,
        entries: impl IntoIterator<Item = (Word, BigRational)>,
    ) -> Self {
        let width: usize = blocks.iter().sum();
        let mut table: BTreeMap<Word, BigRational> = BTreeMap::new();
        for (word, p) in entries {
            assert_eq!(word.len(), width, "outcome length does not match blocks");
            assert!(word.iter().all(|&l| l < alphabet), "letter outside alphabet");
            if p.is_zero() {
                continue;
            }
            let slot = table.entry(word).or_insert_with(BigRational::zero);
            *slot += p;
        }
        table.retain(|_, p| !p.is_zero());
        Self { alphabet, blocks, table }
    }

    pub fn point_mass(alphabet: u8, blocks: Vec<usize>, word: Word) -> Self {
        Self::new(alphabet, blocks, [(word, BigRational::one())])
    }

    /// The uniform law on `words`, which must be distinct.
    pub fn uniform_on(alphabet: u8, blocks: Vec<usize>, words: Vec<Word>) -> Self {
        let p = BigRational::new(BigInt::one(), BigInt::from(words.len()));
        Self::new(alphabet, blocks, words.into_iter().map(|w| (w, p.clone())))
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn arity(&self) -> usize {
        self.blocks.len()
    }

    pub fn width(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn prob(&self, outcome: &[u8]) -> BigRational {
        self.table.get(outcome).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.table.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Word> {
        self.table.keys()
    }

    pub fn support_len(&self) -> usize {
        self.table.len()
    }

    pub fn total(&self) -> BigRational {
        self.table.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// True when every support outcome has the same probability.
    pub fn is_uniform(&self) -> bool {
        let mut values = self.table.values();
        match values.next() {
            None => true,
            Some(first) => values.all(|p| p == first),
        }
    }

    /// Regroups the coordinates into new components of the same total width.
    pub fn with_blocks(mut self, blocks: Vec<usize>) -> Self {
        assert_eq!(blocks.iter().sum::<usize>(), self.width(), "regrouping must keep the width");
        self.blocks = blocks;
        self
    }

    fn block_range(&self, idx: usize) -> std::ops::Range<usize> {
        let start: usize = self.blocks[..idx].iter().sum();
        start..start + self.blocks[idx]
    }

    /// Marginal law of the flat coordinates `positions`, as a single component.
    pub fn marginal_positions(&self, positions: &[usize]) -> JointDist {
        let entries = self.table.iter().map(|(w, p)| {
            let sub: Word = positions.iter().map(|&i| w[i]).collect();
            (sub, p.clone())
        });
        JointDist::new(self.alphabet, vec![positions.len()], entries)
    }

    /// Marginal law of one component.
    pub fn component(&self, idx: usize) -> JointDist {
        let positions: Vec<usize> = self.block_range(idx).collect();
        self.marginal_positions(&positions)
    }

    /// Joint law of a subset of components, keeping their grouping.
    pub fn components(&self, indices: &[usize]) -> JointDist {
        let positions: Vec<usize> = indices.iter().flat_map(|&i| self.block_range(i)).collect();
        let blocks = indices.iter().map(|&i| self.blocks[i]).collect();
        self.marginal_positions(&positions).with_blocks(blocks)
    }

    /// Independent product; components are concatenated in order.
    pub fn product(parts: &[&JointDist]) -> JointDist {
        let alphabet = parts.iter().map(|p| p.alphabet).max().unwrap_or(2);
        let blocks: Vec<usize> = parts.iter().flat_map(|p| p.blocks.iter().copied()).collect();
        let mut acc: Vec<(Word, BigRational)> = vec![(Vec::new(), BigRational::one())];
        for part in parts {
            let mut next = Vec::with_capacity(acc.len() * part.support_len());
            for (w, p) in &acc {
                for (v, q) in part.iter() {
                    let mut joined = w.clone();
                    joined.extend_from_slice(v);
                    next.push((joined, p * q));
                }
            }
            acc = next;
        }
        JointDist::new(alphabet, blocks, acc)
    }

    /// Product of this law's own component marginals.
    pub fn product_of_components(&self) -> JointDist {
        let parts: Vec<JointDist> = (0..self.arity()).map(|i| self.component(i)).collect();
        let refs: Vec<&JointDist> = parts.iter().collect();
        JointDist::product(&refs)
    }

    /// Half the l1 distance between two tables over the same outcome space.
    pub fn tv_distance(&self, other: &JointDist) -> BigRational {
        assert_eq!(self.width(), other.width(), "tv between laws of different width");
        let mut sum = BigRational::zero();
        for (w, p) in &self.table {
            sum += (p - other.prob(w)).abs();
        }
        for (w, q) in &other.table {
            if !self.table.contains_key(w) {
                sum += q.clone();
            }
        }
        sum / BigRational::from_integer(BigInt::from(2))
    }

    /// Distance to the product of the component marginals (0 iff mutually independent).
    pub fn independence_defect(&self) -> BigRational {
        self.tv_distance(&self.product_of_components())
    }

    /// Largest independence defect among all pairs of components.
    pub fn max_pairwise_defect(&self) -> BigRational {
        let mut worst = BigRational::zero();
        for a in 0..self.arity() {
            for b in a + 1..self.arity() {
                let d = self.components(&[a, b]).independence_defect();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

impl fmt::Debug for JointDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (w, p) in &self.table {
            map.entry(&format_word(w, &self.blocks), &format_args!("{p}"));
        }
        map.finish()
    }
}

/// Table of sample counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDist {
    alphabet: u8,
    blocks: Vec<usize>,
    counts: BTreeMap<Word, u64>,
    samples: u64,
}

impl EmpiricalDist {
    pub fn new(alphabet: u8, blocks: Vec<usize>) -> Self {
        Self { alphabet, blocks, counts: BTreeMap::new(), samples: 0 }
    }

    pub fn record(&mut self, word: Word) {
        debug_assert_eq!(word.len(), self.blocks.iter().sum::<usize>());
        *self.counts.entry(word).or_insert(0) += 1;
        self.samples += 1;
    }

    pub fn merge(&mut self, other: EmpiricalDist) {
        assert_eq!(self.blocks, other.blocks);
        for (w, c) in other.counts {
            *self.counts.entry(w).or_insert(0) += c;
        }
        self.samples += other.samples;
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn count(&self, word: &[u8]) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn freq(&self, word: &[u8]) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.count(word) as f64 / self.samples as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, u64)> {
        self.counts.iter().map(|(w, &c)| (w, c))
    }

    /// Regroups the coordinates into components of the given lengths.
    pub fn with_blocks(mut self, blocks: Vec<usize>) -> Self {
        assert_eq!(blocks.iter().sum::<usize>(), self.blocks.iter().sum::<usize>());
        self.blocks = blocks;
        self
    }

    pub fn component(&self, idx: usize) -> EmpiricalDist {
        let start: usize = self.blocks[..idx].iter().sum();
        let len = self.blocks[idx];
        let mut out = EmpiricalDist::new(self.alphabet, vec![len]);
        for (w, &c) in &self.counts {
            *out.counts.entry(w[start..start + len].to_vec()).or_insert(0) += c;
        }
        out.samples = self.samples;
        out
    }

    /// Total variation distance to an exact law.
    pub fn tv_to(&self, exact: &JointDist) -> f64 {
        let mut sum = 0.0;
        for w in self.counts.keys() {
            sum += (self.freq(w) - ratio_to_f64(&exact.prob(w))).abs();
        }
        for (w, p) in exact.iter() {
            if !self.counts.contains_key(w) {
                sum += ratio_to_f64(p);
            }
        }
        sum / 2.0
    }

    /// Total variation distance between two empirical tables.
    pub fn tv_between(&self, other: &EmpiricalDist) -> f64 {
        let mut sum = 0.0;
        for w in self.counts.keys() {
            sum += (self.freq(w) - other.freq(w)).abs();
        }
        for w in other.counts.keys() {
            if !self.counts.contains_key(w) {
                sum += other.freq(w);
            }
        }
        sum / 2.0
    }
}

/// Read access shared by exact and empirical tables.
pub trait Law {
    fn alphabet(&self) -> u8;
    fn blocks(&self) -> &[usize];
    /// Support outcomes with their probabilities.
    fn weighted_outcomes(&self) -> Vec<(Word, f64)>;
}

impl Law for JointDist {
    fn alphabet(&self) -> u8 {
        self.alphabet
    }
    fn blocks(&self) -> &[usize] {
        &self.blocks
    }
    fn weighted_outcomes(&self) -> Vec<(Word, f64)> {
        self.table.iter().map(|(w, p)| (w.clone(), ratio_to_f64(p))).collect()
    }
}

impl Law for EmpiricalDist {
    fn alphabet(&self) -> u8 {
        self.alphabet
    }
    fn blocks(&self) -> &[usize] {
        &self.blocks
    }
    fn weighted_outcomes(&self) -> Vec<(Word, f64)> {
        self.counts.keys().map(|w| (w.clone(), self.freq(w))).collect()
    }
}

/// Finitely many `(coordinate, letter)` constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderEvent<C: Ord> {
    constraints: BTreeMap<C, u8>,
}

impl<C: Ord + Copy + fmt::Debug> CylinderEvent<C> {
    pub fn new() -> Self {
        Self { constraints: BTreeMap::new() }
    }

    /// Adds a constraint; conflicting letters on one coordinate are rejected.
    pub fn require(mut self, coord: C, letter: u8) -> Result<Self> {
        match self.constraints.get(&coord) {
            Some(&prev) if prev != letter => Err(Error::InvalidArgument(format!(
                "coordinate {coord:?} constrained to both {prev} and {letter}"
            ))),
            _ => {
                self.constraints.insert(coord, letter);
                Ok(self)
            }
        }
    }

    /// The event `coords[t] = word[t]` for every t.
    pub fn from_word(coords: &[C], word: &[u8]) -> Result<Self> {
        if coords.len() != word.len() {
            return Err(Error::InvalidArgument("coordinate and word lengths differ".into()));
        }
        coords.iter().zip(word).try_fold(Self::new(), |ev, (&c, &l)| ev.require(c, l))
    }

    pub fn constraints(&self) -> impl Iterator<Item = (C, u8)> + '_ {
        self.constraints.iter().map(|(&c, &l)| (c, l))
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

impl<C: Ord + Copy + fmt::Debug> Default for CylinderEvent<C> {
    fn default() -> Self {
        Self::new()
    }
}
