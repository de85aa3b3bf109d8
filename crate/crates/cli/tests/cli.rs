use std::process::{Command, Output};

use tempfile::tempdir;

fn threedot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_threedot")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Rows of a plain PBM, top row first.
fn parse_pbm(text: &str) -> Vec<Vec<u8>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("P1"));
    let dims: Vec<usize> = lines.next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
    let rows: Vec<Vec<u8>> = lines.map(|l| l.split(' ').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), dims[1]);
    assert!(rows.iter().all(|r| r.len() == dims[0]));
    rows
}

#[test]
fn field_sample_obeys_rule() {
    let o = threedot(&["sample", "--source", "field", "--rect", "64x64", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let rows = parse_pbm(&stdout(&o));
    // row r is above row r + 1
    for r in 1..rows.len() {
        for i in 0..rows[r].len() - 1 {
            assert_eq!(rows[r][i] ^ rows[r][i + 1] ^ rows[r - 1][i], 0, "row {r} col {i}");
        }
    }
    assert!(rows.iter().flatten().any(|&b| b == 1));
}

#[test]
fn stationary_words() {
    let o = threedot(&["sample", "--source", "stationary", "--window", "0:4", "--seed", "7", "-N", "1000"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,word"));
    let words: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(words.len(), 1000);
    assert!(words.iter().all(|w| w.len() == 4 && w.chars().all(|c| c == '0' || c == '1')));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&threedot(&["sample", "--source", "stationary", "--window", "0:0", "--seed", "7"])), 2);
    assert_eq!(code(&threedot(&["sample", "--source", "stationary", "--window", "0:3"])), 2);
    assert_eq!(code(&threedot(&["sample", "--source", "nowhere"])), 2);
    assert_eq!(code(&threedot(&["profile", "--source", "block"])), 2);
    assert_eq!(code(&threedot(&[])), 2);
}

#[test]
fn length_bound_exits_3() {
    let o = threedot(&["law", "--source", "block", "--window", "0:40"]);
    assert_eq!(code(&o), 3);
    let o = threedot(&["profile", "--source", "iid", "--pairs", "gaps=1..2", "--len", "20"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "3", "1"].iter().enumerate() {
        let path = dir.path().join(format!("run{k}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_threedot"))
            .env("THREEDOT_THREADS", threads)
            .args(["sample", "--source", "block", "--window", "5:6", "--seed", "11", "-N", "20000", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let other = threedot(&["sample", "--source", "block", "--window", "5:6", "--seed", "12", "-N", "20000"]);
    assert_ne!(other.stdout, outputs[0]);
}

#[test]
fn bad_thread_count_is_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_threedot"))
        .env("THREEDOT_THREADS", "zero")
        .args(["verify", "--suite", "odometer"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_suites() {
    let o = threedot(&["verify", "--suite", "field", "--nmax", "10"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = threedot(&["verify", "--suite", "lemma", "--alphabet", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks[1]["verdict"]["status"], "confirmed");
    for suite in ["block", "regions", "odometer", "dichotomy"] {
        assert_eq!(code(&threedot(&["verify", "--suite", suite])), 0, "{suite}");
    }
}

#[test]
fn stationarity_contrast() {
    let o = threedot(&["verify", "--suite", "stationarity", "--len", "3", "-N", "1000000", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("stationarity,stationary_source,true"));
    assert!(text.contains("stationarity,block_source_rejected,true"));
    // far too few samples to see the block defect: the gate fails
    let o = threedot(&["verify", "--suite", "stationarity", "--len", "3", "-N", "20", "--seed", "7"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn block_triple_profile() {
    let o = threedot(&["profile", "--source", "block", "--triples", "1..6"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,q,pairwise_tv_max,triple_tv,d_truncated,trunc_bound"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 6);
    for (n, r) in rows.iter().enumerate() {
        assert_eq!(r[0], 3u64.pow(n as u32 + 1).to_string());
        assert_eq!(r[2], "0");
        assert_eq!(r[3], "0.5");
    }
}

#[test]
fn pair_profiles() {
    let o = threedot(&["profile", "--source", "block", "--pairs", "gaps=1..30", "--len", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",0,0")));
    // windows of length 2 overlap at gap 1 and are disjoint afterwards
    let o = threedot(&["profile", "--source", "iid", "--pairs", "gaps=1..10", "--len", "2"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows[0], "1,0.5,1/2^1");
    assert!(rows[1..].iter().all(|l| l.ends_with(",0,0")));
    let o = threedot(&["profile", "--source", "block", "--pairs", "gaps=2..2", "--len", "3"]);
    assert_ne!(stdout(&o).lines().nth(1).unwrap(), "2,0,0");
}

#[test]
fn exact_laws() {
    let o = threedot(&["law", "--source", "field", "--rect", "2x3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.ends_with(",1/2^4,-4")));
    let o = threedot(&["law", "--source", "rot3", "--window", "0:2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["support"], 3);
    assert_eq!(v["rows"][0]["probability"], "1/3");
}

#[test]
fn config_file_supplies_keys() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("profile.csv");
    std::fs::write(
        &cfg,
        format!("command = \"profile\"\nsource = \"block\"\ntriples = \"1..2\"\nout = {:?}\n", out.display().to_string()),
    )
    .unwrap();
    let o = threedot(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let from_file = std::fs::read_to_string(&out).unwrap();
    assert_eq!(from_file.lines().count(), 3);
    let direct = threedot(&["profile", "--source", "block", "--triples", "1..2"]);
    assert_eq!(stdout(&direct), from_file);
    // a flag overrides the file
    let o = threedot(&["profile", "--triples", "1..1", "--format", "json", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    std::fs::write(&cfg, "sauce = \"block\"\n").unwrap();
    assert_eq!(code(&threedot(&["--config", cfg.to_str().unwrap()])), 2);
}
