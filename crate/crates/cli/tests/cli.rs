use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn demseq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_demseq"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn letters(jsonl: &str) -> Vec<u64> {
    jsonl
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            assert_eq!(v["n"], (i + 1) as u64);
            v["letter"].as_u64().unwrap()
        })
        .collect()
}

#[test]
fn gen_thirds() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("w.txt"), "# thirds\n2/3\n1/3\n").unwrap();
    let o = demseq(&["gen", "--weights", "w.txt", "--terms", "9"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(letters(&stdout(&o)), vec![1, 2, 1, 1, 2, 1, 1, 2, 1]);
}

#[test]
fn gen_uses_input_labels() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("w.txt"), "1/3\n2/3\n").unwrap();
    let o = demseq(&["gen", "--weights", "w.txt", "--terms", "6", "--mode", "exact"], dir.path());
    assert_eq!(letters(&stdout(&o)), vec![2, 1, 2, 2, 1, 2]);
}

#[test]
fn gen_rejects_weights_summing_to_nine_tenths() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("w.txt"), "0.5\n0.4\n").unwrap();
    for mode in ["float", "exact"] {
        let o = demseq(&["gen", "--weights", "w.txt", "--terms", "9", "--mode", mode], dir.path());
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains("SumNotOne residual=1/10"), "{}", stderr(&o));
    }
}

#[test]
fn gen_with_joker_prefix_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = demseq(
        &["gen", "--geometric", "10", "--terms", "100", "--prefix", "J", "--mode", "exact", "--out", "s.jsonl", "--trace", "t.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let seq = letters(&fs::read_to_string(dir.path().join("s.jsonl")).unwrap());
    assert_eq!(seq.len(), 100);
    assert_eq!(seq[0], 0);
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,max_abs_deviation,sum_deficits,sum_excesses,argmax_letter"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("1,1/1,"));
    assert!(rows[2].starts_with("100,"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["gen", "--terms", "5"],
        vec!["gen", "--geometric", "2"],
        vec!["gen", "--geometric", "2", "--terms", "5", "--mode", "quad"],
        vec!["numer", "--terms", "5"],
        vec!["beta", "--geometric", "3", "--terms", "5"],
        vec!["gen", "--geometric", "1", "--terms", "5"],
        vec![],
    ] {
        let o = demseq(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn unknown_prefix_letter_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("w.txt"), "1/2\n1/2\n").unwrap();
    let o = demseq(&["gen", "--weights", "w.txt", "--terms", "5", "--prefix", "3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_file_is_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = demseq(&["gen", "--weights", "nope.txt", "--terms", "5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numer_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = demseq(&["numer", "--base", "2", "--terms", "5000"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "EQUAL n=5000\n");

    let o = demseq(&["numer", "--base", "10", "--terms", "5000"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o), "MISMATCH at n=7: dem=2 counter=1 subst=1\n");
}

#[test]
fn diag_prints_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("w.txt"), "2/3\n1/3\n").unwrap();
    let o = demseq(&["diag", "--weights", "w.txt", "--terms", "1000"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("N,max_abs_deviation,sum_deficits,sum_excesses,argmax_letter\n1,1/3,"));
    assert!(out.contains("\n1000,1/3000,"));
    assert!(out.contains("slope="));
    assert!(out.contains("ledger=0 selection=0"));
}

#[test]
fn beta_writes_certified_witness() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("p.txt"),
        "# quarters\n0 1/4 0.4\n1/4 1/2 0.3\n1/2 3/4 0.2\n3/4 1 0.1\n",
    )
    .unwrap();
    let o = demseq(&["beta", "--partition", "p.txt", "--terms", "30", "--out", "w.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("certified m=1..=30"));
    let w: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(w["N"], 30);
    assert_eq!(w["intervals"][0], serde_json::json!(["0/1", "1/4"]));
    assert!(w["beta_lo_hex"].as_str().unwrap().starts_with("0x1."));
    assert_eq!(w["integer_parts"].as_array().unwrap().len(), 30);
}

#[test]
fn beta_rejects_bad_partition() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.txt"), "0 1/2 0.5\n1/3 1 0.5\n").unwrap();
    let o = demseq(&["beta", "--partition", "p.txt", "--terms", "5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stamp_only_touches_reports() {
    let dir = tempfile::tempdir().unwrap();
    let plain = demseq(&["gen", "--geometric", "3", "--terms", "50"], dir.path());
    let stamped = demseq(&["gen", "--geometric", "3", "--terms", "50", "--stamp"], dir.path());
    assert_eq!(plain.stdout, stamped.stdout);
    assert!(stderr(&stamped).starts_with("stamp unix="));
}
