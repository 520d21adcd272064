use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn subval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subval")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = path(dir, name);
    fs::write(&p, text).unwrap();
    p
}

const PAIR: &str = "SUBVAL 1\nK 2\n0 0\n1 0\n2 0\n3 10\n";

#[test]
fn generated_files_check_and_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.txt"), path(&dir, "b.txt"));
    for out in [&a, &b] {
        let o = subval(&["gen", "--goods", "5", "--model", "sumuniform:4", "--seed", "11", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let o = subval(&["check", &a, "--oracle-trials", "40", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("substitute: true"));
    assert!(stdout(&o).contains("oracle: PASS"));
}

#[test]
fn gen_batches_with_stats() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "batch");
    let o = subval(&[
        "gen", "--goods", "4", "--model", "uniform:3", "--seed", "7", "--count", "3", "--jobs", "2",
        "--out", &out, "--stats",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    for (n, line) in lines.iter().enumerate() {
        let json: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(json["seed"], 7 + n as u64);
        assert_eq!(json["phases"].as_array().unwrap().len(), 2);
        assert!(Path::new(&out).join(format!("seed-{}.txt", 7 + n)).exists());
    }
}

#[test]
fn complementary_pair_is_rejected_with_delta_named() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "pair.txt", PAIR);
    let o = subval(&["check", &f]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("δ_{1,2|A} = -10 < 0 at A={}"), "{text}");
    assert!(text.contains("witness prices"));
}

#[test]
fn malformed_input_is_a_usage_error_with_line_number() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.txt", "SUBVAL 1\nK 1\n0 1\n1 5\n");
    let o = subval(&["check", &f]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3: v(∅) must be 0"), "{err}");
    assert_eq!(subval(&["check"]).status.code(), Some(2));
    assert_eq!(subval(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn census_reports_seventy_five_ten_dimensional_polyhedrons() {
    let o = subval(&["census4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().last(), Some("75 polyhedrons, dimension 10"));
    assert_eq!(text.matches("equality rank 6, sampled dimension 10").count(), 75);
}

#[test]
fn classify_three_and_four_goods() {
    let dir = TempDir::new().unwrap();
    let k3 = write(&dir, "k3.txt", "SUBVAL 1\nK 3\n0 0\n1 2\n2 3\n3 4\n4 3\n5 4\n6 4\n7 4\n");
    let o = subval(&["classify", &k3]);
    assert_eq!(stdout(&o), "δ12=δ13\n");
    let lin = write(&dir, "lin.txt", &linear4());
    let o = subval(&["classify", &lin]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("75 polyhedrons\nassignment: yes\n"));
    let pair = write(&dir, "pair.txt", PAIR);
    assert_eq!(subval(&["classify", &pair]).status.code(), Some(2));
}

fn linear4() -> String {
    let mut s = String::from("SUBVAL 1\nK 4\n");
    for mask in 0..16u32 {
        s.push_str(&format!("{mask} {}\n", mask.count_ones()));
    }
    s
}

#[test]
fn assignment_commands() {
    let dir = TempDir::new().unwrap();
    let w = write(&dir, "w.txt", "ASSIGNW 1\n2 3\n5 4 1\n3 3 2\n");
    let o = subval(&["assign", "eval", &w, "--bundle", "3"]);
    assert_eq!(stdout(&o), "value 8\nassignment 1->1 2->2\n");
    let table = path(&dir, "t.txt");
    assert_eq!(subval(&["assign", "table", &w, "--out", &table]).status.code(), Some(0));
    let text = fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("SUBVAL 1\nK 3\n0 0\n1 5\n2 4\n3 8\n"), "{text}");
}

#[test]
fn satiate_aggregate_and_dimension() {
    let dir = TempDir::new().unwrap();
    let lin = write(&dir, "lin.txt", &linear4());
    let sat = path(&dir, "sat.txt");
    assert_eq!(subval(&["satiate", &lin, "--level", "2", "--out", &sat]).status.code(), Some(0));
    assert!(fs::read_to_string(&sat).unwrap().ends_with("15 2\n"));
    let agg = path(&dir, "agg.txt");
    assert_eq!(subval(&["aggregate", &sat, &sat, "--out", &agg]).status.code(), Some(0));
    // Two copies of the 2-satiated count function rebuild the count function.
    assert_eq!(fs::read_to_string(&agg).unwrap(), linear4());
    assert_eq!(stdout(&subval(&["dim", &lin, &sat, &agg])), "1\n");
    let pos = write(&dir, "pos.txt", &linear4().replace("1 1\n", "1 2\n").replace("3 2\n", "3 3\n"));
    assert_eq!(stdout(&subval(&["dim", &lin, &sat, &pos])), "2\n");
}

#[test]
fn speckle_with_default_and_supplied_codes() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.txt");
    assert_eq!(subval(&["speckle", "--goods", "6", "--seed", "2", "--out", &a]).status.code(), Some(0));
    assert_eq!(subval(&["check", &a]).status.code(), Some(0));
    let code = write(&dir, "code.txt", "SUBCODE 1\nK 6\n3\n12\n48\n");
    let b = path(&dir, "b.txt");
    let o = subval(&["speckle", "--goods", "6", "--seed", "2", "--code", &code, "--out", &b]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(subval(&["check", &b]).status.code(), Some(0));
    let bad = write(&dir, "bad.txt", "SUBCODE 1\nK 6\n3\n5\n");
    let o = subval(&["speckle", "--goods", "6", "--seed", "2", "--code", &bad, "--out", &b]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn auction_writes_a_stable_transcript() {
    let dir = TempDir::new().unwrap();
    let v1 = write(&dir, "v1.txt", "SUBVAL 1\nK 1\n0 0\n1 5\n");
    let v2 = write(&dir, "v2.txt", "SUBVAL 1\nK 1\n0 0\n1 3\n");
    let (t1, t2) = (path(&dir, "t1.txt"), path(&dir, "t2.txt"));
    let o1 = subval(&["auction", &v1, &v2, "--seed", "4", "--transcript", &t1]);
    let o2 = subval(&["auction", &v1, &v2, "--seed", "4", "--transcript", &t2]);
    assert_eq!(o1.status.code(), Some(0));
    assert_eq!(stdout(&o1), stdout(&o2));
    assert!(stdout(&o1).contains("buyer 1 gets {1}"));
    assert!(stdout(&o1).contains("optimal welfare 5"));
    let transcript = fs::read_to_string(&t1).unwrap();
    assert_eq!(transcript, fs::read_to_string(&t2).unwrap());
    assert!(transcript.starts_with("round 0: bids 1:{} 2:{} awards [] prices (0) owners ("));
}
