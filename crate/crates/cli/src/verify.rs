//! `verify`: exact checks grouped in suites, one row per check.

use std::fmt::Write;

use num_traits::Zero;
use serde::Serialize;
use serde_json::Value;

use threedot::block::{mixing_threshold, pow3, profile_is_zero};
use threedot::lemma::{mod3_triple, xor_triple};
use threedot::odometer::{mixture_window_law, shift_truncated};
use threedot::source::FieldLine;
use threedot::{
    block_independence_check, check_lemma_instance, classify_dichotomy, mixing_profile_1d,
    overlap_independence_check, position_of_origin, region_independence_check, search_lemma_counterexample,
    shift_skeleton, stationarity_check, triple_dependence_witness, word_census, BlockProcess, BlockSampler,
    Dichotomy, Error, IidProcess, LedrappierField, LemmaStatus, Rot3Process, SearchMode, SkeletonState,
    StationaryProcess, Window2D,
};

use crate::config::{CliError, Flags, Format, Suite};
use crate::sample::pretty;
use crate::Report;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Value>,
}

struct Rows {
    suite: &'static str,
    rows: Vec<CheckRow>,
}

impl Rows {
    fn new(suite: &'static str) -> Self {
        Self { suite, rows: Vec::new() }
    }

    fn push(&mut self, check: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.rows.push(CheckRow { suite: self.suite, check: check.into(), passed, detail: detail.into(), verdict: None });
    }

    /// Records the check; errors other than resource bounds count as failures.
    fn run(&mut self, check: &str, f: impl FnOnce() -> Result<(bool, String), Error>) -> Result<(), CliError> {
        match f() {
            Ok((passed, detail)) => self.push(check, passed, detail),
            Err(e @ (Error::LengthBound { .. } | Error::TruncationLimit { .. })) => return Err(e.into()),
            Err(e) => self.push(check, false, e.to_string()),
        }
        Ok(())
    }
}

pub fn verify(f: &Flags) -> Result<Report, CliError> {
    let suite = f.suite.ok_or_else(|| CliError::Usage("--suite is required".into()))?;
    let suites: Vec<Suite> = match suite {
        Suite::All => vec![Suite::Field, Suite::Block, Suite::Regions, Suite::Odometer, Suite::Lemma, Suite::Dichotomy],
        s => vec![s],
    };
    let mut rows = Vec::new();
    for s in suites {
        rows.extend(match s {
            Suite::Field => field_suite(f)?,
            Suite::Block => block_suite(f)?,
            Suite::Regions => region_suite(f)?,
            Suite::Odometer => odometer_suite()?,
            Suite::Stationarity => stationarity_suite(f)?,
            Suite::Lemma => lemma_suite(f)?,
            Suite::Dichotomy => dichotomy_suite(f)?,
            Suite::All => unreachable!(),
        });
    }
    let passed = rows.iter().all(|r| r.passed);
    let body = match f.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("suite,check,passed,detail\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{}", r.suite, r.check, r.passed, r.detail.replace(',', ";"));
            }
            out
        }
        Format::Json => pretty(&serde_json::json!({ "passed": passed, "checks": rows })),
        Format::Pbm => return Err(CliError::Usage("verification reports are csv or json".into())),
    };
    Ok(Report { body, passed })
}

fn field_suite(f: &Flags) -> Result<Vec<CheckRow>, CliError> {
    let nmax = f.nmax.unwrap_or(10);
    if nmax > 30 {
        return Err(CliError::Usage(format!("--nmax {nmax} exceeds 30")));
    }
    let field = LedrappierField::new();
    let mut r = Rows::new("field");
    r.run("scale_identity", || {
        for n in 0..=nmax {
            let s = 1i64 << n;
            for i in -8..=8 {
                for j in -8..=8 {
                    let e = field.cell_expr(i, j).xor(&field.cell_expr(i + s, j)).xor(&field.cell_expr(i, j + s));
                    if !e.is_zero() {
                        return Ok((false, format!("n={n} at ({i};{j}) leaves {e}")));
                    }
                }
            }
        }
        Ok((true, format!("n<={nmax} on |i|;|j|<=8")))
    })?;
    r.run("uniform_windows", || {
        let mut count = 0;
        for w in 1..=4 {
            for h in 1..=4 {
                for corner in [(-5, -5), (-2, 3), (0, 0), (3, -4)] {
                    let d = field.window_distribution(&Window2D::new(corner, w, h))?;
                    if !d.is_uniform() || d.support_len() != 1 << (w + h - 1) {
                        return Ok((false, format!("{w}x{h} at {corner:?}: support {}", d.support_len())));
                    }
                    count += 1;
                }
            }
        }
        Ok((true, format!("{count} rectangles with support 2^(w+h-1)")))
    })?;
    r.run("pairwise_not_triple", || {
        for n in 0..=nmax.min(4) {
            let t = triple_dependence_witness(&field, n);
            if !t.pairwise_independent || t.mutually_independent {
                return Ok((false, format!("n={n}")));
            }
        }
        Ok((true, "cells (0;0) (2^n;0) (0;2^n) pairwise but not mutually independent".into()))
    })?;
    Ok(r.rows)
}

fn block_suite(f: &Flags) -> Result<Vec<CheckRow>, CliError> {
    let kmax = f.k.unwrap_or(10);
    if kmax > 30 {
        return Err(CliError::Usage(format!("--k {kmax} exceeds 30")));
    }
    let g = BlockProcess::new();
    let mut r = Rows::new("block");
    r.run("pattern_111", || {
        let p0 = g.window_distribution_1d(0, 3)?.prob(&[1, 1, 1]);
        let p1 = g.window_distribution_1d(1, 3)?.prob(&[1, 1, 1]);
        let ok = p0.is_zero() && p1 == num_rational::BigRational::new(1.into(), 8.into());
        Ok((ok, format!("P(111) at 0 = {p0}; at 1 = {p1}")))
    })?;
    r.run("triple_identity", || {
        for k in 0..=kmax {
            let s = pow3(k);
            if !g.coord_expr(0).xor(&g.coord_expr(s)).xor(&g.coord_expr(2 * s)).is_zero() {
                return Ok((false, format!("k={k}")));
            }
        }
        Ok((true, format!("x_0 + x_(3^k) + x_(2*3^k) = 0 for k<={kmax}")))
    })?;
    for k in 1..=kmax.min(3) {
        r.run(&format!("block_independence_k{k}"), || {
            let rep = block_independence_check(&g, k);
            Ok((rep.passed(), format!("{} pairs; {} dependent", rep.pairs_checked, rep.dependent.len())))
        })?;
        r.run(&format!("overlap_independence_k{k}"), || {
            let rep = overlap_independence_check(&g, k);
            Ok((rep.passed(), format!("{} pairs; {} dependent", rep.pairs_checked, rep.dependent.len())))
        })?;
    }
    r.run("mixing_beyond_threshold", || {
        for len in 1..=3 {
            let gaps: Vec<u64> = (mixing_threshold(len) + 1..=100).collect();
            if !profile_is_zero(&mixing_profile_1d(&g, len, &gaps)?) {
                return Ok((false, format!("len={len}")));
            }
        }
        Ok((true, "TV 0 for every gap in (threshold; 100] and len<=3".into()))
    })?;
    Ok(r.rows)
}

fn region_suite(f: &Flags) -> Result<Vec<CheckRow>, CliError> {
    let radius = f.radius.unwrap_or(8);
    if !(1..=16).contains(&radius) {
        return Err(CliError::Usage(format!("--radius {radius} outside 1..=16")));
    }
    let field = LedrappierField::new();
    let mut r = Rows::new("regions");
    for side in 1..=2 {
        r.run(&format!("side_{side}"), || {
            let rep = region_independence_check(&field, side, radius)?;
            Ok((
                rep.passed(),
                format!(
                    "{} pairs over windows {:?}; {} dependent",
                    rep.pairs_checked,
                    rep.windows,
                    rep.dependent.len()
                ),
            ))
        })?;
    }
    Ok(r.rows)
}

fn odometer_suite() -> Result<Vec<CheckRow>, CliError> {
    let mut r = Rows::new("odometer");
    r.run("digit0_period_3", || {
        let mut s = SkeletonState::zeros(8);
        for t in 1..=60u64 {
            let next = shift_skeleton(&s)?;
            if next.digits()[0] as u64 != t % 3 || position_of_origin(&next) != position_of_origin(&s) + 1 {
                return Ok((false, format!("step {t}")));
            }
            s = next;
        }
        Ok((true, "S_0 cycles 0;1;2 and the origin advances by 1".into()))
    })?;
    r.run("shift_preserves_uniform", || {
        for k in 1..=6 {
            let states = pow3(k as u32);
            let mut hits = vec![0u8; states as usize];
            for idx in 0..states {
                hits[shift_truncated(&SkeletonState::from_index(idx, k)).index() as usize] += 1;
            }
            if hits.iter().any(|&h| h != 1) {
                return Ok((false, format!("K={k}")));
            }
        }
        Ok((true, "shift is a bijection of the 3^K states for K<=6".into()))
    })?;
    r.run("exact_stationarity", || {
        let g = BlockProcess::new();
        for len in 1..=3 {
            let base = mixture_window_law(&g, 0, len, 2)?;
            for start in 1..=3 {
                if mixture_window_law(&g, start, len, 2)? != base {
                    return Ok((false, format!("len={len} start={start}")));
                }
            }
        }
        Ok((true, "window laws at starts 0..3 agree exactly for len<=3".into()))
    })?;
    Ok(r.rows)
}

fn stationarity_suite(f: &Flags) -> Result<Vec<CheckRow>, CliError> {
    let seed = f.require_seed()?;
    let len = f.len.unwrap_or(3);
    let n = f.samples.unwrap_or(1_000_000);
    if len == 0 || len > 6 || n == 0 {
        return Err(CliError::Usage("stationarity needs 1 <= --len <= 6 and -N >= 1".into()));
    }
    let mut r = Rows::new("stationarity");
    let st = stationarity_check(&StationaryProcess::unconditioned(), len, n, seed)?;
    r.push(
        "stationary_source",
        st.passed,
        format!("max TV {:.5}; worst cell {:.3} x 5 sigma", st.max_tv, st.worst_ratio),
    );
    let bl = stationarity_check(&BlockSampler, len, n, seed)?;
    r.push(
        "block_source_rejected",
        !bl.passed,
        format!("max TV {:.5}; worst cell {:.3} x 5 sigma", bl.max_tv, bl.worst_ratio),
    );
    Ok(r.rows)
}

fn lemma_suite(f: &Flags) -> Result<Vec<CheckRow>, CliError> {
    let a = f.alphabet.unwrap_or(3);
    let grid = f.grid.unwrap_or(12);
    if !(1..=4).contains(&a) || !(1..=24).contains(&grid) {
        return Err(CliError::Usage("lemma search needs 1 <= --alphabet <= 4 and 1 <= --grid <= 24".into()));
    }
    let mode = if a <= 3 { SearchMode::Exhaustive } else { SearchMode::Pruned };
    let mut r = Rows::new("lemma");
    let rep = search_lemma_counterexample(a, grid, mode)?;
    r.push(
        format!("search_a{a}"),
        !rep.found(),
        format!(
            "{} tables; {} feasible supports; {} grid hits; counterexample {}",
            rep.functions,
            rep.feasible_supports,
            rep.grid_hits,
            if rep.found() { "FOUND" } else { "none" }
        ),
    );
    for (name, t) in [("xor_triple", xor_triple()), ("mod3_triple", mod3_triple())] {
        let v = check_lemma_instance(&t);
        r.push(name, v.status == LemmaStatus::Confirmed, format!("{:?}", v.status));
        r.rows.last_mut().unwrap().verdict = serde_json::to_value(&v).ok();
    }
    Ok(r.rows)
}

fn dichotomy_suite(f: &Flags) -> Result<Vec<CheckRow>, CliError> {
    let m = f.horizon.unwrap_or(12);
    if !(2..=20).contains(&m) {
        return Err(CliError::Usage(format!("--horizon {m} outside 2..=20")));
    }
    let mut r = Rows::new("dichotomy");
    r.run("rot3_periodic", || {
        let d = classify_dichotomy(&word_census(&Rot3Process, m, 0)?);
        Ok((matches!(d, Dichotomy::Periodic { entropy_bound_bits, .. } if entropy_bound_bits == 0.0), d.label().into()))
    })?;
    r.run("iid_entropy", || {
        let d = classify_dichotomy(&word_census(&IidProcess, m, 0)?);
        let ok = matches!(d, Dichotomy::EntropyAtLeastLog2 { entropy_bound_bits, .. } if entropy_bound_bits >= 1.0);
        Ok((ok, format!("{d:?}")))
    })?;
    let field = LedrappierField::new();
    r.run("stationary_ratios_nonincreasing", || {
        for (name, c) in [
            ("field row 0", word_census(&FieldLine::horizontal(&field, 0), m, -3)?),
            ("field row 5", word_census(&FieldLine::horizontal(&field, 5), m, 0)?),
            ("field column 0", word_census(&FieldLine::vertical(&field, 0), m, 0)?),
            ("iid", word_census(&IidProcess, m, 0)?),
            ("rot3", word_census(&Rot3Process, m, 0)?),
        ] {
            if !c.ratios_nonincreasing() {
                return Ok((false, format!("{name}: {:?}", c.counts())));
            }
        }
        Ok((true, "field lines; iid; rot3".into()))
    })?;
    // reported, not judged: the block process is not stationary
    let block = word_census(&BlockProcess::new(), m, 0)?;
    let d = classify_dichotomy(&block);
    r.push("block_reported", true, format!("{}: counts {:?}", d.label(), block.counts()));
    Ok(r.rows)
}
