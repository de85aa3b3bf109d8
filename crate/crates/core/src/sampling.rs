//! Reproducible Monte Carlo plumbing.
//!
//! All randomness comes from one 64-bit seed. Work is cut into fixed chunks
//! of `CHUNK` draws; chunk `c` of stream `s` uses a ChaCha8 generator seeded
//! with the run seed and positioned on stream `s * 2^32 + c`. Results do not
//! depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::law::{EmpiricalDist, Word};

/// Draws per parallel work unit.
pub const CHUNK: u64 = 4096;

/// Generator for sub-stream `stream` of the run seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id of chunk `chunk` inside the family `family`.
pub fn chunk_stream(family: u32, chunk: u64) -> u64 {
    ((family as u64) << 32) | (chunk & 0xffff_ffff)
}

/// Runs `draw` `n` times in parallel chunks and tallies the words.
pub fn sample_law<F>(
    alphabet: u8,
    len: usize,
    n: u64,
    seed: u64,
    family: u32,
    draw: F,
) -> Result<EmpiricalDist>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Word> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<EmpiricalDist>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, chunk_stream(family, c));
            let take = CHUNK.min(n - c * CHUNK);
            let mut dist = EmpiricalDist::new(alphabet, vec![len]);
            for _ in 0..take {
                dist.record(draw(&mut rng)?);
            }
            Ok(dist)
        })
        .collect();
    let mut total = EmpiricalDist::new(alphabet, vec![len]);
    for part in parts {
        total.merge(part?);
    }
    Ok(total)
}

/// Runs `draw` `n` times with the same chunked streams as [`sample_law`]
/// and keeps the words in draw order.
pub fn sample_words<F>(n: u64, seed: u64, family: u32, draw: F) -> Result<Vec<Word>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Word> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<Word>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, chunk_stream(family, c));
            (0..CHUNK.min(n - c * CHUNK)).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n as usize);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Uniform letter in `0..alphabet`.
pub fn letter(rng: &mut ChaCha8Rng, alphabet: u8) -> u8 {
    rng.gen_range(0..alphabet)
}

/// Five standard errors of a frequency estimate of `p` from `n` draws.
pub fn five_sigma(p: f64, n: u64) -> f64 {
    5.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Five standard errors of the difference of two independent frequency
/// estimates of a common `p`, each from `n` draws.
pub fn five_sigma_diff(p: f64, n: u64) -> f64 {
    5.0 * (2.0 * p * (1.0 - p) / n as f64).sqrt()
}
