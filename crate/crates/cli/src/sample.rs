//! `sample` and `law`: random realizations and exact window laws.

use std::fmt::Write;

use serde::Serialize;
use serde_json::json;

use threedot::law::{format_ratio, format_word, ratio_to_f64};
use threedot::odometer::{mixture_level, mixture_window_law};
use threedot::sampling::sample_words;
use threedot::{
    sample_field, BlockProcess, BlockSampler, ExactProcess, IidProcess, JointDist, LedrappierField, Rot3Process,
    StationaryProcess, WindowSampler, Word,
};

use crate::config::{CliError, Flags, Format, SourceKind};
use crate::Report;

/// Largest mixture level the exact stationary law is computed at.
const MAX_MIXTURE_LEVEL: u32 = 9;

pub fn sample(f: &Flags) -> Result<Report, CliError> {
    let source = f.require_source()?;
    let seed = f.require_seed()?;
    if source == SourceKind::Field {
        return sample_rect(f, seed);
    }
    let (start, len) = f.window()?.ok_or_else(|| CliError::Usage("--window START:LEN is required".into()))?;
    let n = f.samples.unwrap_or(1);
    let words = match source {
        SourceKind::Block => draw(&BlockSampler, start, len, n, seed)?,
        SourceKind::Stationary => {
            let p = match f.skeleton()? {
                Some(s) => StationaryProcess::conditioned(s),
                None => StationaryProcess::unconditioned(),
            };
            draw(&p, start, len, n, seed)?
        }
        SourceKind::Iid => draw(&IidProcess, start, len, n, seed)?,
        SourceKind::Rot3 => draw(&Rot3Process, start, len, n, seed)?,
        SourceKind::Field => unreachable!(),
    };
    let body = match f.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("index,word\n");
            for (i, w) in words.iter().enumerate() {
                let _ = writeln!(out, "{i},{}", format_word(w, &[len]));
            }
            out
        }
        Format::Json => {
            let words: Vec<String> = words.iter().map(|w| format_word(w, &[len])).collect();
            let v = json!({ "source": source.to_string(), "start": start, "len": len, "seed": seed, "words": words });
            pretty(&v)
        }
        Format::Pbm => {
            if source == SourceKind::Rot3 {
                return Err(CliError::Usage("pbm output needs a binary source".into()));
            }
            let mut out = format!("P1\n{} {}\n", len, words.len());
            for w in &words {
                let row: Vec<String> = w.iter().map(|b| b.to_string()).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
            out
        }
    };
    Ok(Report::ok(body))
}

fn draw<S: WindowSampler>(s: &S, start: i64, len: usize, n: u64, seed: u64) -> Result<Vec<Word>, CliError> {
    Ok(sample_words(n, seed, 0, |rng| s.sample_window(start, len, rng))?)
}

fn sample_rect(f: &Flags, seed: u64) -> Result<Report, CliError> {
    let rect = f.rect()?.ok_or_else(|| CliError::Usage("--rect WIDTHxHEIGHT is required for the field".into()))?;
    let m = sample_field(&rect, seed)?;
    let violations = m.rule_violations();
    let body = match f.format.unwrap_or(Format::Pbm) {
        Format::Pbm => m.to_pbm(),
        Format::Csv => {
            let mut out = String::from("i,j,value\n");
            for ((i, j), b) in rect.cells().into_iter().zip(&m.bits) {
                let _ = writeln!(out, "{i},{j},{b}");
            }
            out
        }
        Format::Json => {
            let (i0, j0) = rect.corner;
            let rows: Vec<String> = (j0..j0 + rect.height as i64)
                .rev()
                .map(|j| (i0..i0 + rect.width as i64).map(|i| char::from(b'0' + m.get(i, j))).collect())
                .collect();
            pretty(&json!({
                "corner": [i0, j0],
                "width": rect.width,
                "height": rect.height,
                "seed": seed,
                "rule_violations": violations,
                "rows_top_down": rows,
            }))
        }
    };
    if violations > 0 {
        eprintln!("sampled field breaks the 3-dot rule at {violations} places");
    }
    Ok(Report { body, passed: violations == 0 })
}

#[derive(Serialize)]
struct LawRow {
    config: String,
    probability: String,
    probability_log2: f64,
}

/// Exact law of a window, as `config,probability_num,probability_log2`.
pub fn law(f: &Flags) -> Result<Report, CliError> {
    let source = f.require_source()?;
    let d: JointDist = if source == SourceKind::Field {
        let rect = f.rect()?.ok_or_else(|| CliError::Usage("--rect WIDTHxHEIGHT is required for the field".into()))?;
        LedrappierField::new().window_distribution(&rect)?
    } else {
        let (start, len) = f.window()?.ok_or_else(|| CliError::Usage("--window START:LEN is required".into()))?;
        let sites: Vec<i64> = (start..start + len as i64).collect();
        match source {
            SourceKind::Block => {
                if start < 0 {
                    return Err(CliError::Usage("the block process starts at coordinate 0".into()));
                }
                BlockProcess::new().law(&sites)?
            }
            SourceKind::Iid => IidProcess.law(&sites)?,
            SourceKind::Rot3 => Rot3Process.law(&sites)?,
            SourceKind::Stationary => {
                threedot::source::check_len(len)?;
                let level = mixture_level(start, len);
                if level > MAX_MIXTURE_LEVEL {
                    return Err(CliError::Resource(format!(
                        "window {start}:{len} needs mixture level {level} > {MAX_MIXTURE_LEVEL}"
                    )));
                }
                mixture_window_law(&BlockProcess::new(), start, len, level)?
            }
            SourceKind::Field => unreachable!(),
        }
    };
    let rows: Vec<LawRow> = d
        .iter()
        .map(|(w, p)| LawRow {
            config: format_word(w, d.blocks()),
            probability: format_ratio(p),
            probability_log2: ratio_to_f64(p).log2(),
        })
        .collect();
    let body = match f.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("config,probability_num,probability_log2\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{}", r.config, r.probability, r.probability_log2);
            }
            out
        }
        Format::Json => pretty(&json!({ "source": source.to_string(), "support": rows.len(), "rows": rows })),
        Format::Pbm => return Err(CliError::Usage("laws are written as csv or json".into())),
    };
    Ok(Report::ok(body))
}

pub fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}
