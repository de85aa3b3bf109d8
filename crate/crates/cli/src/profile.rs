//! `profile`: figure-ready tables of exact independence defects.

use std::fmt::Write;

use serde::Serialize;

use threedot::block::pow3;
use threedot::law::{format_ratio, ratio_to_f64};
use threedot::{
    delta_p, mixing_profile_1d, product_distance_profile, BlockProcess, ExactProcess, IidProcess, LedrappierField,
    ProfileRow, Rot3Process, Site,
};

use crate::config::{CliError, Flags, Format, SourceKind};
use crate::sample::pretty;
use crate::Report;

#[derive(Serialize)]
struct GapRow {
    gap: u64,
    tv_distance: f64,
    tv_exact: String,
}

pub fn profile(f: &Flags) -> Result<Report, CliError> {
    let source = f.require_source()?;
    if source == SourceKind::Stationary {
        return Err(CliError::Usage("profiles need an exact source: field, block, iid or rot3".into()));
    }
    let format = f.format.unwrap_or(Format::Csv);
    if format == Format::Pbm {
        return Err(CliError::Usage("profiles are csv or json".into()));
    }
    let len = f.len.unwrap_or(1);
    let body = match (f.triples()?, f.pairs()?) {
        (Some(range), None) => {
            let depth = f.depth.unwrap_or(6);
            if depth == 0 || depth > 64 {
                return Err(CliError::Usage(format!("--depth {depth} outside 1..=64")));
            }
            triple_table(triple_rows(source, range, len, depth)?, format)
        }
        (None, Some((a, b))) => gap_table(gap_rows(source, a as u64, b as u64, len)?, format),
        _ => return Err(CliError::Usage("give exactly one of --triples A..B and --pairs gaps=A..B".into())),
    };
    Ok(Report::ok(body))
}

/// Shifts `p = q = 3^n` (block), `2^n` apart (field), or `n` (others).
fn triple_rows(source: SourceKind, (a, b): (u32, u32), len: usize, depth: u64) -> Result<Vec<ProfileRow>, CliError> {
    let rows = match source {
        SourceKind::Block => {
            if b > 30 {
                return Err(CliError::Usage("--triples exponents above 30 overflow".into()));
            }
            let pairs: Vec<(i64, i64)> = (a..=b).map(|n| (pow3(n) as i64, pow3(n) as i64)).collect();
            product_distance_profile(&BlockProcess::new(), len, &pairs, depth)?
        }
        SourceKind::Field => {
            if b > 40 {
                return Err(CliError::Usage("--triples exponents above 40 overflow".into()));
            }
            // cells (0,0), (0,2^n), (2^n,0)
            let pairs: Vec<((i64, i64), (i64, i64))> =
                (a..=b).map(|n| 1i64 << n).map(|s| ((0, s), (s, -s))).collect();
            product_distance_profile(&LedrappierField::new(), len, &pairs, depth)?
        }
        SourceKind::Iid => product_distance_profile(&IidProcess, len, &linear(a, b), depth)?,
        SourceKind::Rot3 => product_distance_profile(&Rot3Process, len, &linear(a, b), depth)?,
        SourceKind::Stationary => unreachable!(),
    };
    Ok(rows)
}

fn linear(a: u32, b: u32) -> Vec<(i64, i64)> {
    (a..=b).map(|n| (n as i64, n as i64)).collect()
}

fn gap_rows(source: SourceKind, a: u64, b: u64, len: usize) -> Result<Vec<GapRow>, CliError> {
    let gaps: Vec<u64> = (a..=b).collect();
    let exact = match source {
        SourceKind::Block => mixing_profile_1d(&BlockProcess::new(), len, &gaps)?
            .into_iter()
            .map(|r| (r.gap, r.tv_distance))
            .collect(),
        SourceKind::Field => generic_gaps(&LedrappierField::new(), &gaps, len, |g| (g as i64, 0))?,
        SourceKind::Iid => generic_gaps(&IidProcess, &gaps, len, |g| g as i64)?,
        SourceKind::Rot3 => generic_gaps(&Rot3Process, &gaps, len, |g| g as i64)?,
        SourceKind::Stationary => unreachable!(),
    };
    Ok(exact
        .into_iter()
        .map(|(gap, tv)| GapRow { gap, tv_distance: ratio_to_f64(&tv), tv_exact: format_ratio(&tv) })
        .collect())
}

fn generic_gaps<P: ExactProcess>(
    p: &P,
    gaps: &[u64],
    len: usize,
    shift: impl Fn(u64) -> P::Site,
) -> Result<Vec<(u64, num_rational::BigRational)>, CliError>
where
    P::Site: Site,
{
    gaps.iter().map(|&g| Ok((g, delta_p(p, shift(g), len)?.independence_defect()))).collect()
}

fn triple_table(rows: Vec<ProfileRow>, format: Format) -> String {
    match format {
        Format::Json => pretty(&rows),
        _ => {
            let mut out = format!("{}\n", ProfileRow::csv_header());
            for r in &rows {
                let _ = writeln!(out, "{}", r.csv_line());
            }
            out
        }
    }
}

fn gap_table(rows: Vec<GapRow>, format: Format) -> String {
    match format {
        Format::Json => pretty(&rows),
        _ => {
            let mut out = String::from("gap,tv_distance,tv_exact\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{}", r.gap, r.tv_distance, r.tv_exact);
            }
            out
        }
    }
}
