use std::fs;
use std::process::{Command, Output};

fn vntree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vntree")).args(args).output().expect("spawn vntree")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn build_writes_bit_exact_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k2.txt");
    let o = vntree(&["build", "--k", "2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&path).unwrap(), "k=2 entries=6\n0001 H\n001 T\n01 H\n10 T\n110 H\n1110 T\n");
}

#[test]
fn build_k10_entry_count() {
    let o = vntree(&["build", "--k", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("k=10 entries=39366\n"));
    assert_eq!(text.lines().count(), 39367);
}

#[test]
fn build_rejects_bad_order() {
    assert!(!vntree(&["build", "--k", "0"]).status.success());
    assert!(!vntree(&["build", "--k", "99"]).status.success());
}

#[test]
fn extract_ascii_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    let out = dir.path().join("out.txt");
    let report = dir.path().join("report.txt");
    fs::write(&input, "0110").unwrap();
    let o = vntree(&[
        "extract", "--k", "1", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap(),
        "--report", report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap(), "10");
    let report = fs::read_to_string(&report).unwrap();
    assert!(report.contains("bits_emitted=2\n"));
    assert!(report.contains("leftover_len=0\n"));
}

#[test]
fn extract_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty");
    fs::write(&input, "").unwrap();
    let o = vntree(&["extract", "--k", "3", "--in", input.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let report = String::from_utf8(o.stderr).unwrap();
    assert!(report.contains("bits_emitted=0\n"));
    assert!(report.contains("mean_depth=undefined\n"));
}

#[test]
fn extract_packed_mirrors_format_and_codebook_file() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.txt");
    assert!(vntree(&["build", "--k", "1", "--out", cb.to_str().unwrap()]).status.success());
    let input = dir.path().join("in.bin");
    // 01 10 01 10 -> H T H T -> 1010
    fs::write(&input, [0b0110_0110]).unwrap();
    let o = vntree(&["extract", "--codebook", cb.to_str().unwrap(), "--in", input.to_str().unwrap(), "--format", "packed"]);
    assert!(o.status.success());
    assert_eq!(o.stdout, vec![0b1010_0000]);
}

#[test]
fn extract_simulated_fair_mean_depth() {
    let o = vntree(&["extract", "--k", "10", "--simulate", "1/2,2^16,1", "--format", "packed"]);
    assert!(o.status.success());
    let report = String::from_utf8(o.stderr).unwrap();
    let depth: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("mean_depth="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((depth - 3.10).abs() <= 0.10, "{depth}");
}

#[test]
fn extract_is_deterministic() {
    let a = vntree(&["extract", "--k", "4", "--simulate", "0.6,5000,9"]);
    let b = vntree(&["extract", "--k", "4", "--simulate", "0.6,5000,9"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn extract_rejects_bad_ascii() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "01x").unwrap();
    let o = vntree(&["extract", "--k", "1", "--in", input.to_str().unwrap()]);
    assert!(!o.status.success());
}

fn last_value(table: &str) -> String {
    table.lines().last().unwrap().split('\t').nth(1).unwrap().to_string()
}

#[test]
fn analyze_tables() {
    let o = vntree(&["analyze", "--p", "0.5", "--kmax", "5"]);
    assert_eq!(last_value(&stdout(&o)), "3.1022065");
    let o = vntree(&["analyze", "--p", "0.51", "--kmax", "5", "--mode", "rational"]);
    assert_eq!(last_value(&stdout(&o)), "3.1038984");
    let o = vntree(&["analyze", "--p", "1/sqrt2", "--kmax", "6", "--digits", "7"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("k\tE(Y_k)\tdelta"));
    assert_eq!(last_value(&text), "3.966602");
}

#[test]
fn analyze_distribution_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("dist.csv");
    let o = vntree(&["analyze", "--p", "1/2", "--kmax", "1", "--mode", "rational", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&csv).unwrap(), "depth,probability\n2,0.5\n");
}

#[test]
fn bench_csv() {
    let o = vntree(&["bench", "--p", "0.51,1/2", "--n", "2^16", "--k", "8", "--seeds", "1,2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,seed,input_len,output_len,elapsed_ms,mean_depth");
    assert_eq!(lines.len(), 5);
    for line in &lines[3..] {
        let f: Vec<&str> = line.split(',').collect();
        let ratio = f[3].parse::<f64>().unwrap() / f[2].parse::<f64>().unwrap();
        assert!((ratio - 1.0 / 3.1022).abs() <= 0.01, "{line}");
    }
}

#[test]
fn selftest_passes_and_rejects_flipped_label() {
    let o = vntree(&["selftest", "--kmax", "8"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("selftest pass=true\n"));

    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.txt");
    assert!(vntree(&["build", "--k", "3", "--out", cb.to_str().unwrap()]).status.success());
    let text = fs::read_to_string(&cb).unwrap().replacen(" H\n", " T\n", 1);
    fs::write(&cb, text).unwrap();
    let o = vntree(&["selftest", "--codebook", cb.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.to_lowercase().contains("alternation"), "{out}");
}
