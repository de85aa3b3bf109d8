//! Admissible-word counts `p_m`, extension ratios `a_m = p_{m+1} / p_m`, and
//! the periodic / positive-entropy dichotomy read off them at a finite
//! horizon.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::law::{format_word, JointDist};
use crate::source::ExactProcess;

#[derive(Clone, Debug, Serialize)]
pub struct CensusRow {
    pub m: usize,
    pub p_m: u64,
    /// Common probability of every admissible word.
    #[serde(serialize_with = "crate::law::serialize_ratio")]
    pub prob: BigRational,
    /// `p_{m+1} / p_m`; absent at the horizon.
    pub a_m: Option<f64>,
    pub uniform: bool,
    pub entropy_lb_bits: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WordCensus {
    pub anchor: i64,
    pub rows: Vec<CensusRow>,
    #[serde(skip)]
    pub laws: Vec<JointDist>,
}

impl WordCensus {
    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.p_m).collect()
    }

    /// Whether `a_{m+1} <= a_m` for every ratio in range, compared exactly.
    pub fn ratios_nonincreasing(&self) -> bool {
        let p = self.counts();
        p.windows(3).all(|w| (w[2] as u128) * (w[0] as u128) <= (w[1] as u128) * (w[1] as u128))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,p_m,a_m,uniform,entropy_lb_bits\n");
        for r in &self.rows {
            let a = r.a_m.map(|a| a.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{}\n", r.m, r.p_m, a, r.uniform, r.entropy_lb_bits));
        }
        out
    }
}

/// Census of the windows `anchor .. anchor + m` for `m = 1 ..= m_max`.
///
/// Every admissible word must carry the same probability; otherwise the
/// first offending word is reported.
pub fn word_census<P>(source: &P, m_max: usize, anchor: i64) -> Result<WordCensus>
where
    P: ExactProcess<Site = i64> + ?Sized,
{
    if m_max == 0 {
        return Err(Error::InvalidArgument("census needs m_max >= 1".into()));
    }
    let mut rows: Vec<CensusRow> = Vec::with_capacity(m_max);
    let mut laws = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let sites: Vec<i64> = (anchor..anchor + m as i64).collect();
        let law = source.law(&sites)?;
        let first = law.iter().next().expect("laws have nonempty support").1.clone();
        if let Some((w, _)) = law.iter().find(|(_, p)| **p != first) {
            return Err(Error::NonUniform { len: m, word: format_word(w, law.blocks()) });
        }
        let p_m = law.support_len() as u64;
        if let Some(prev) = rows.last_mut() {
            prev.a_m = Some(p_m as f64 / prev.p_m as f64);
        }
        rows.push(CensusRow {
            m,
            p_m,
            prob: first,
            a_m: None,
            uniform: true,
            entropy_lb_bits: (p_m as f64).log2() / m as f64,
        });
        laws.push(law);
    }
    Ok(WordCensus { anchor, rows, laws })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Dichotomy {
    /// `a_m = 1` for all `m0 <= m < horizon`.
    Periodic { horizon: usize, m0: usize, entropy_bound_bits: f64 },
    /// `p_1 >= 2` and `a_m >= 2` for every computed ratio.
    EntropyAtLeastLog2 { horizon: usize, entropy_bound_bits: f64 },
    /// Some `a_{m+1} > a_m`: the source is not stationary and the dichotomy
    /// does not apply.
    NonStationaryCaveat { horizon: usize, first_increase: usize },
    Undecided { horizon: usize },
}

impl Dichotomy {
    pub fn label(&self) -> &'static str {
        match self {
            Dichotomy::Periodic { .. } => "periodic",
            Dichotomy::EntropyAtLeastLog2 { .. } => "entropy >= log 2",
            Dichotomy::NonStationaryCaveat { .. } => "non-stationary caveat",
            Dichotomy::Undecided { .. } => "undecided",
        }
    }
}

pub fn classify_dichotomy(c: &WordCensus) -> Dichotomy {
    let horizon = c.horizon();
    let p = c.counts();
    if let Some(k) = p.windows(3).position(|w| (w[2] as u128) * (w[0] as u128) > (w[1] as u128) * (w[1] as u128)) {
        // a_{k+2} > a_{k+1} in 1-based ratio indexing
        return Dichotomy::NonStationaryCaveat { horizon, first_increase: k + 2 };
    }
    if horizon < 2 {
        return Dichotomy::Undecided { horizon };
    }
    // ratios a_1 .. a_{M-1}
    let ones_from = (1..horizon).rev().take_while(|&m| p[m] == p[m - 1]).last();
    if let Some(m0) = ones_from {
        return Dichotomy::Periodic { horizon, m0, entropy_bound_bits: 0.0 };
    }
    if p[0] >= 2 && p.windows(2).all(|w| w[1] >= 2 * w[0]) {
        let bound = (p[horizon - 1] as f64).log2() / horizon as f64;
        return Dichotomy::EntropyAtLeastLog2 { horizon, entropy_bound_bits: bound };
    }
    Dichotomy::Undecided { horizon }
}
