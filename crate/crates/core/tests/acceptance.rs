//! Acceptance run: ten criteria, one PASS/FAIL line each, executed in order
//! so the wall-clock limits are meaningful.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use threedot::block::{mixing_threshold, pow3, profile_is_zero, BlockSampler};
use threedot::lemma::{linear_triples, mod3_triple, xor_triple};
use threedot::odometer::shift_truncated;
use threedot::source::FieldLine;
use threedot::*;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn scale_identity() -> Outcome {
    let f = LedrappierField::new();
    for n in 0..=10u32 {
        let s = 1i64 << n;
        for i in -8..=8 {
            for j in -8..=8 {
                let e = f.cell_expr(i, j).xor(&f.cell_expr(i + s, j)).xor(&f.cell_expr(i, j + s));
                if !e.is_zero() {
                    return fail(format!("n={n} at ({i},{j}): {e}"));
                }
            }
        }
    }
    pass("11 scales x 289 cells")
}

fn uniform_windows() -> Outcome {
    let f = LedrappierField::new();
    let corners = [-6i64, -3, -1, 0, 2, 5];
    let mut checked = 0;
    for w in 1..=4usize {
        for h in 1..=4usize {
            for &ci in &corners {
                for &cj in &corners {
                    let rect = Window2D::new((ci, cj), w, h);
                    let d = match f.window_distribution(&rect) {
                        Ok(d) => d,
                        Err(e) => return fail(format!("{rect:?}: {e}")),
                    };
                    let expect = 1usize << (w + h - 1);
                    if !d.is_uniform() || d.support_len() != expect {
                        return fail(format!("{rect:?}: support {} uniform {}", d.support_len(), d.is_uniform()));
                    }
                    checked += 1;
                }
            }
        }
    }
    pass(format!("{checked} rectangles"))
}

fn block_identities() -> Outcome {
    let g = BlockProcess::new();
    let p0 = g.window_distribution_1d(0, 3).unwrap().prob(&[1, 1, 1]);
    let p1 = g.window_distribution_1d(1, 3).unwrap().prob(&[1, 1, 1]);
    if !p0.is_zero() || p1 != ratio(1, 8) {
        return fail(format!("P(111) at 0: {p0}, at 1: {p1}"));
    }
    for k in 0..=10 {
        let s = pow3(k);
        let e = g.coord_expr(0).xor(&g.coord_expr(s)).xor(&g.coord_expr(2 * s));
        if !e.is_zero() {
            return fail(format!("k={k}: {e}"));
        }
    }
    pass("P(111)=0 at 0, 1/8 at 1; triple identity k<=10")
}

/// TV distance between the even-parity law on three bits and the uniform
/// law on eight words, by listing the eight words.
fn parity_tv_oracle() -> BigRational {
    let mut l1 = BigRational::zero();
    for m in 0u8..8 {
        let p = if m.count_ones() % 2 == 0 { ratio(1, 4) } else { BigRational::zero() };
        l1 += (p - ratio(1, 8)).abs();
    }
    l1 / BigRational::from_integer(BigInt::from(2))
}

fn pairwise_not_triple() -> Outcome {
    let g = BlockProcess::new();
    let oracle = parity_tv_oracle();
    for k in 0..=6 {
        let s = pow3(k) as i64;
        let d = delta_pq(&g, s, s, 1).unwrap();
        if !d.max_pairwise_defect().is_zero() {
            return fail(format!("k={k}: pairwise TV {}", d.max_pairwise_defect()));
        }
        if d.independence_defect() != oracle {
            return fail(format!("k={k}: triple TV {} vs oracle {oracle}", d.independence_defect()));
        }
    }
    let note = if oracle != ratio(1, 4) { "; the quoted constant 1/4 disagrees with this oracle" } else { "" };
    pass(format!("pairwise TV 0, triple TV {oracle} = enumeration oracle for k<=6{note}"))
}

fn mixing_mechanics() -> Outcome {
    let g = BlockProcess::new();
    let mut rows = 0;
    for len in 1..=3usize {
        let t = mixing_threshold(len);
        let gaps: Vec<u64> = (t + 1..=100).collect();
        let profile = mixing_profile_1d(&g, len, &gaps).unwrap();
        if !profile_is_zero(&profile) {
            let bad = profile.iter().find(|r| !r.tv_distance.is_zero()).unwrap();
            return fail(format!("len={len} gap={} tv={}", bad.gap, bad.tv_distance));
        }
        rows += profile.len();
    }
    pass(format!("{rows} gaps beyond the threshold, all exactly 0"))
}

fn region_independence() -> Outcome {
    let f = LedrappierField::new();
    let mut pairs = 0;
    for side in 1..=2 {
        let r = region_independence_check(&f, side, 8).unwrap();
        if !r.passed() {
            return fail(format!("side {side}: {} dependent pairs of {}", r.dependent.len(), r.pairs_checked));
        }
        pairs += r.pairs_checked;
    }
    pass(format!("{pairs} cross-region pairs independent at radius 8"))
}

fn stationarity_contrast() -> Outcome {
    let n = 1_000_000;
    let st = stationarity_check(&StationaryProcess::unconditioned(), 3, n, 7).unwrap();
    let bl = stationarity_check(&BlockSampler, 3, n, 7).unwrap();
    let detail = format!(
        "stationary worst ratio {:.3} (pass {}), block worst ratio {:.1} (pass {})",
        st.worst_ratio, st.passed, bl.worst_ratio, bl.passed
    );
    if st.passed && !bl.passed {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn odometer_behavior() -> Outcome {
    let mut s = skeleton_sample(12, 3).unwrap();
    let start = s.digits()[0];
    for t in 1..=30u64 {
        let next = shift_skeleton(&s).unwrap();
        if position_of_origin(&next) != position_of_origin(&s) + 1 {
            return fail(format!("position did not advance at step {t}"));
        }
        if (next.digits()[0] as u64) != (start as u64 + t) % 3 {
            return fail(format!("S_0 orbit broken at step {t}"));
        }
        s = next;
    }
    for k in 1..=6usize {
        let states = pow3(k as u32);
        let mut hits = vec![0u32; states as usize];
        for idx in 0..states {
            hits[shift_truncated(&SkeletonState::from_index(idx, k)).index() as usize] += 1;
        }
        if hits.iter().any(|&h| h != 1) {
            return fail(format!("K={k}: shift is not a bijection of the {states} states"));
        }
    }
    pass("S_0 period 3; origin advances by 1; uniform law invariant for K<=6")
}

fn lemma_exhaustiveness() -> Outcome {
    for a in [2, 3] {
        let r = search_lemma_counterexample(a, 12, SearchMode::Exhaustive).unwrap();
        if r.found() {
            return fail(format!("A={a}: {:?}", r.counterexample));
        }
    }
    for (name, t) in [("xor", xor_triple()), ("mod3", mod3_triple())] {
        if check_lemma_instance(&t).status != LemmaStatus::Confirmed {
            return fail(format!("{name} triple not confirmed"));
        }
    }
    let mut total = 0;
    let mut confirmed = 0;
    for (len, pool) in [(1, 3), (2, 2), (3, 2)] {
        for d in linear_triples(len, pool) {
            let v = check_lemma_instance(&FiniteTriple::from_joint(&d).unwrap());
            if v.status == LemmaStatus::Counterexample || !v.uniform {
                return fail(format!("linear triple {d:?}: {v:?}"));
            }
            total += 1;
            confirmed += (v.status == LemmaStatus::Confirmed) as usize;
        }
    }
    pass(format!("no counterexample for A in {{2,3}}; {total} linear triples, {confirmed} meeting the hypotheses"))
}

fn dichotomy() -> Outcome {
    let rot = classify_dichotomy(&word_census(&Rot3Process, 10, 0).unwrap());
    if !matches!(rot, Dichotomy::Periodic { entropy_bound_bits, .. } if entropy_bound_bits == 0.0) {
        return fail(format!("rot3: {rot:?}"));
    }
    let iid = classify_dichotomy(&word_census(&IidProcess, 16, 0).unwrap());
    if !matches!(iid, Dichotomy::EntropyAtLeastLog2 { entropy_bound_bits, .. } if entropy_bound_bits == 1.0) {
        return fail(format!("iid: {iid:?}"));
    }
    let f = LedrappierField::new();
    let stationary: Vec<(&str, WordCensus)> = vec![
        ("rot3", word_census(&Rot3Process, 10, 0).unwrap()),
        ("iid", word_census(&IidProcess, 16, 3).unwrap()),
        ("field row 0", word_census(&FieldLine::horizontal(&f, 0), 12, -5).unwrap()),
        ("field row 7", word_census(&FieldLine::horizontal(&f, 7), 12, 0).unwrap()),
        ("field row -4", word_census(&FieldLine::horizontal(&f, -4), 12, 2).unwrap()),
        ("field column 0", word_census(&FieldLine::vertical(&f, 0), 12, 0).unwrap()),
    ];
    for (name, c) in &stationary {
        if !c.ratios_nonincreasing() {
            return fail(format!("{name}: counts {:?}", c.counts()));
        }
    }
    pass("rot3 periodic (bound 0), iid entropy >= log 2 (bound 1 bit), ratios nonincreasing on 6 stationary lines")
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, u64);
    let criteria: [Criterion; 10] = [
        ("scale-2^n identity", scale_identity, 10),
        ("uniform window law", uniform_windows, 10),
        ("block identities", block_identities, 5),
        ("pairwise-not-triple signature", pairwise_not_triple, 10),
        ("2-fold mixing mechanics", mixing_mechanics, 30),
        ("region independence", region_independence, 30),
        ("stationarity contrast", stationarity_contrast, 120),
        ("odometer behavior", odometer_behavior, 5),
        ("lemma exhaustiveness", lemma_exhaustiveness, 120),
        ("dichotomy instantiation", dichotomy, 10),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = run();
        let elapsed = t0.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let ok = out.ok && in_time;
        if !ok {
            failures += 1;
        }
        let timing = if in_time { String::new() } else { format!(" [over the {limit} s limit]") };
        println!(
            "criterion {:>2} {}: {} ({:.2} s) {}{}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail,
            timing
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
