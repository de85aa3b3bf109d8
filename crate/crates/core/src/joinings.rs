//! Shifted diagonal self-joinings and the cylinder distance between joinings.
//!
//! `delta_p` is the law of `(xi_W, xi_{W+p})` and `delta_pq` the law of
//! `(xi_W, xi_{W+p}, xi_{W+p+q})` for the window `W` anchored at the origin.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::law::{ratio_to_f64, EmpiricalDist, JointDist, Law};
use crate::sampling::sample_law;
use crate::source::{blocks_law, check_len, ExactProcess, Site, WindowSampler};

/// Windows `W + offset` for each offset, `W` the origin window of side `len`.
pub fn shifted_windows<S: Site>(offsets: &[S], len: usize) -> Vec<Vec<S>> {
    let w = S::window(len);
    offsets.iter().map(|&o| w.iter().map(|&s| s.shift(o)).collect()).collect()
}

/// Law of `(xi_W, xi_{W+p})`.
pub fn delta_p<P: ExactProcess + ?Sized>(source: &P, p: P::Site, len: usize) -> Result<JointDist> {
    check_len(len)?;
    blocks_law(source, &shifted_windows(&[P::Site::origin(), p], len))
}

/// Law of `(xi_W, xi_{W+p}, xi_{W+p+q})`.
pub fn delta_pq<P: ExactProcess + ?Sized>(source: &P, p: P::Site, q: P::Site, len: usize) -> Result<JointDist> {
    check_len(len)?;
    blocks_law(source, &shifted_windows(&[P::Site::origin(), p, p.shift(q)], len))
}

/// Empirical joint law of windows at the given starts, drawn as one
/// contiguous window per sample.
pub fn delta_sampled<S: WindowSampler>(
    sampler: &S,
    starts: &[i64],
    len: usize,
    n: u64,
    rng_seed: u64,
) -> Result<EmpiricalDist> {
    check_len(len)?;
    let lo = *starts.iter().min().ok_or_else(|| Error::InvalidArgument("no windows".into()))?;
    let hi = *starts.iter().max().unwrap() + len as i64;
    let span = (hi - lo) as usize;
    let total = sample_law(sampler.alphabet(), len * starts.len(), n, rng_seed, 0, |rng| {
        let w = sampler.sample_window(lo, span, rng)?;
        Ok(starts.iter().flat_map(|&s| w[(s - lo) as usize..(s - lo) as usize + len].iter().copied()).collect())
    })?;
    Ok(total.with_blocks(vec![len; starts.len()]))
}

/// Cylinders anchored at the origin, ordered by length then
/// lexicographically, starting with the words of length 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CylinderIndexing {
    pub alphabet: u8,
}

impl CylinderIndexing {
    pub fn new(alphabet: u8) -> Self {
        assert!(alphabet >= 1, "empty alphabet");
        Self { alphabet }
    }

    fn count(&self, len: u32) -> u128 {
        (self.alphabet as u128).pow(len)
    }

    /// First index of the words of length `len >= 1`.
    fn first_index(&self, len: u32) -> u128 {
        (1..len).map(|l| self.count(l)).sum()
    }

    /// Word of cylinder `n`.
    pub fn word(&self, n: u64) -> Vec<u8> {
        let mut n = n as u128;
        let mut len = 1;
        while n >= self.count(len) {
            n -= self.count(len);
            len += 1;
        }
        let a = self.alphabet as u128;
        let mut word = vec![0u8; len as usize];
        for slot in word.iter_mut().rev() {
            *slot = (n % a) as u8;
            n /= a;
        }
        word
    }

    /// Index of the cylinder fixing the nonempty `word`.
    pub fn index(&self, word: &[u8]) -> u64 {
        assert!(!word.is_empty(), "cylinders fix at least one letter");
        let a = self.alphabet as u128;
        let value = word.iter().fold(0u128, |acc, &c| acc * a + c as u128);
        (self.first_index(word.len() as u32) + value) as u64
    }

    /// Length of the longest cylinder with index below `depth`.
    pub fn max_len(&self, depth: u64) -> usize {
        if depth == 0 {
            0
        } else {
            self.word(depth - 1).len()
        }
    }
}

/// Truncated cylinder distance and the mass of the dropped terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JoiningDistance {
    pub depth: u64,
    pub value: f64,
    /// Upper bound on the omitted part of the full double (or triple) sum.
    pub trunc_bound: f64,
}

/// `2^r - (2 - 2^(1-depth))^r`: the total weight of index tuples with some
/// index at or beyond `depth`.
pub fn truncation_bound(arity: usize, depth: u64) -> f64 {
    let kept = 2.0 - 2f64.powi(1 - depth.min(1100) as i32);
    2f64.powi(arity as i32) - kept.powi(arity as i32)
}

/// For each component, the indices below `depth` of the cylinders the
/// component's word lies in.
fn cylinder_hits(word: &[u8], blocks: &[usize], ix: &CylinderIndexing, depth: u64) -> Vec<Vec<usize>> {
    let mut start = 0;
    blocks
        .iter()
        .map(|&b| {
            let comp = &word[start..start + b];
            start += b;
            (1..=b)
                .map(|l| ix.index(&comp[..l]))
                .take_while(|&n| n < depth)
                .map(|n| n as usize)
                .collect()
        })
        .collect()
}

/// Adds `weight` to every cell of the `depth^r` table hit by the word.
fn scatter<T: Clone + std::ops::AddAssign<T>>(table: &mut [T], hits: &[Vec<usize>], depth: usize, weight: &T) {
    fn rec<T: Clone + std::ops::AddAssign<T>>(
        table: &mut [T],
        hits: &[Vec<usize>],
        depth: usize,
        acc: usize,
        weight: &T,
    ) {
        match hits.split_first() {
            None => table[acc] += weight.clone(),
            Some((first, rest)) => {
                for &n in first {
                    rec(table, rest, depth, acc * depth + n, weight);
                }
            }
        }
    }
    rec(table, hits, depth, 0, weight);
}

fn check_compatible(a_blocks: &[usize], b_blocks: &[usize], ix: &CylinderIndexing, depth: u64) -> Result<()> {
    if a_blocks.len() != b_blocks.len() {
        return Err(Error::InvalidArgument(format!(
            "joinings of arity {} and {} cannot be compared",
            a_blocks.len(),
            b_blocks.len()
        )));
    }
    let need = ix.max_len(depth);
    let have = a_blocks.iter().chain(b_blocks).copied().min().unwrap_or(0);
    if have < need {
        return Err(Error::WordTooShort { have, need });
    }
    Ok(())
}

/// Weight `2^-(n_1 + .. + n_r)` of a flattened index tuple.
fn tuple_exponent(mut flat: usize, depth: usize, arity: usize) -> u64 {
    let mut e = 0;
    for _ in 0..arity {
        e += (flat % depth) as u64;
        flat /= depth;
    }
    e
}

/// `sum 2^-(n_1+..+n_r) |a(C_n1 x .. x C_nr) - b(C_n1 x .. x C_nr)|` over
/// indices below `depth`, computed exactly.
pub fn joining_distance(a: &JointDist, b: &JointDist, depth: u64) -> Result<JoiningDistance> {
    let ix = CylinderIndexing::new(a.alphabet().max(b.alphabet()));
    check_compatible(a.blocks(), b.blocks(), &ix, depth)?;
    let r = a.arity();
    let d = depth as usize;
    let cells = d.pow(r as u32);
    let mut diff = vec![BigRational::zero(); cells];
    for (w, p) in a.iter() {
        scatter(&mut diff, &cylinder_hits(w, a.blocks(), &ix, depth), d, p);
    }
    for (w, p) in b.iter() {
        scatter(&mut diff, &cylinder_hits(w, b.blocks(), &ix, depth), d, &-p.clone());
    }
    let mut total = BigRational::zero();
    for (flat, v) in diff.iter().enumerate() {
        if !v.is_zero() {
            let e = tuple_exponent(flat, d, r);
            total += v.abs() / BigRational::from_integer(BigInt::from(1u8) << e as usize);
        }
    }
    Ok(JoiningDistance { depth, value: total.to_f64().unwrap_or(f64::NAN), trunc_bound: truncation_bound(r, depth) })
}

/// The same distance for any pair of tables, in floating point.
pub fn joining_distance_f64<A: Law, B: Law>(a: &A, b: &B, depth: u64) -> Result<JoiningDistance> {
    let ix = CylinderIndexing::new(a.alphabet().max(b.alphabet()));
    check_compatible(a.blocks(), b.blocks(), &ix, depth)?;
    let r = a.blocks().len();
    let d = depth as usize;
    let mut diff = vec![0.0f64; d.pow(r as u32)];
    for (w, p) in a.weighted_outcomes() {
        scatter(&mut diff, &cylinder_hits(&w, a.blocks(), &ix, depth), d, &p);
    }
    for (w, p) in b.weighted_outcomes() {
        scatter(&mut diff, &cylinder_hits(&w, b.blocks(), &ix, depth), d, &-p);
    }
    let value = diff
        .iter()
        .enumerate()
        .map(|(flat, v)| v.abs() * (-(tuple_exponent(flat, d, r) as f64)).exp2())
        .sum();
    Ok(JoiningDistance { depth, value, trunc_bound: truncation_bound(r, depth) })
}

/// One row of the pairwise/triple independence profile.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub p: String,
    pub q: String,
    #[serde(serialize_with = "crate::law::serialize_ratio")]
    pub pairwise_tv_max: BigRational,
    #[serde(serialize_with = "crate::law::serialize_ratio")]
    pub triple_tv: BigRational,
    pub d_truncated: f64,
    pub trunc_bound: f64,
}

impl ProfileRow {
    pub fn csv_header() -> &'static str {
        "p,q,pairwise_tv_max,triple_tv,d_truncated,trunc_bound"
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.p,
            self.q,
            ratio_to_f64(&self.pairwise_tv_max),
            ratio_to_f64(&self.triple_tv),
            self.d_truncated,
            self.trunc_bound
        )
    }
}

/// Text form of a site for tables.
pub fn site_label<S: Site>(s: S) -> String {
    format!("{s:?}").replace(", ", ";").replace(['(', ')'], "")
}

/// For each `(p, q)`: the largest pairwise TV distance of `delta_pq` from
/// the product of two marginals, its TV distance from the product of all
/// three, and the cylinder distance to that product truncated at `depth`
/// (computed on windows long enough to hold every cylinder below `depth`).
pub fn product_distance_profile<P>(source: &P, len: usize, pairs: &[(P::Site, P::Site)], depth: u64) -> Result<Vec<ProfileRow>>
where
    P: ExactProcess + ?Sized,
{
    check_len(len)?;
    let d_len = CylinderIndexing::new(source.alphabet()).max_len(depth).max(1);
    pairs
        .par_iter()
        .map(|&(p, q)| {
            let law = delta_pq(source, p, q, len)?;
            let d_law = if d_len == len { law.clone() } else { delta_pq(source, p, q, d_len)? };
            let d = joining_distance(&d_law, &d_law.product_of_components(), depth)?;
            Ok(ProfileRow {
                p: site_label(p),
                q: site_label(q),
                pairwise_tv_max: law.max_pairwise_defect(),
                triple_tv: law.independence_defect(),
                d_truncated: d.value,
                trunc_bound: d.trunc_bound,
            })
        })
        .collect()
}
