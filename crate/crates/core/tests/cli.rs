//! End-to-end runs of the binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use toric_splitting::bundle_data::{cp2_fan, cp2_rank2, euler_hirzebruch};
use toric_splitting::fan::hirzebruch;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toric-splitting"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn assert_single_line_error(args: &[&str]) -> String {
    let out = run(args);
    assert!(!out.status.success(), "{args:?} should fail");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
    err
}

#[test]
fn surfaces_small_k() {
    assert_eq!(
        stdout(&["surfaces", "--k", "0"]),
        "# 1 surfaces with 0 blowups\n1,1,1\n"
    );
    assert_eq!(
        stdout(&["surfaces", "--k", "1"]),
        "# 1 surfaces with 1 blowups\n-1,0,1,0\n"
    );
    let k3 = stdout(&["surfaces", "--k", "3"]);
    assert!(k3.lines().any(|l| l == "-1,-1,-1,-1,-1,-1"));
    let tsv = stdout(&["--format", "tsv", "surfaces", "--k", "2"]);
    assert!(tsv.lines().all(|l| l.starts_with("2\t")));
}

#[test]
fn tangent_split_cp2() {
    let expected = "\
splitting numbers
tau(1): 2 1
tau(2): 2 1
tau(3): 2 1

augmented intersection matrix
        D1  D2  D3
tau(1)   1   1   1
tau(2)   1   1   1
tau(3)   1   1   1

splitting types: 1
type 1
  R' = (2,1) (2,1) (2,1)
  L1: X = (2,0,0)  class = (2,0,0)  positive
  L2: X = (1,0,0)  class = (1,0,0)  positive
";
    assert_eq!(stdout(&["tangent-split", "--graph", "1,1,1"]), expected);
}

#[test]
fn tangent_split_hirzebruch() {
    assert!(stdout(&["tangent-split", "--graph", "0,2,0,-2"]).ends_with("no splitting type\n"));
    let f0 = stdout(&["tangent-split", "--graph", "0,0,0,0"]);
    assert!(f0.contains("class = (2,2,0,0)"), "{f0}");
    assert!(f0.contains("class = (0,0,0,0)  zero"), "{f0}");
    let strict = stdout(&["--strict-signs", "tangent-split", "--graph", "0,0,0,0"]);
    assert!(strict.contains("splitting types: 1\n"), "{strict}");
}

#[test]
fn q_matrix_from_fan_file() {
    let fan = fixture("f2.fan", &hirzebruch(2).to_text());
    let out = stdout(&["q-matrix", "--fan", fan.to_str().unwrap()]);
    let graph = stdout(&["q-matrix", "--graph", "0,2,0,-2"]);
    assert_eq!(out.lines().count(), 5);
    assert_eq!(out.lines().next(), graph.lines().next());
}

#[test]
fn bundle_split_rank_two() {
    let fan = fixture("cp2.fan", &cp2_fan().to_text());
    let fan = fan.to_str().unwrap();
    let equal = fixture("e111.bundle", &cp2_rank2(1, 1, 1).unwrap().to_text());
    let out = stdout(&[
        "bundle-split",
        "--bundle",
        equal.to_str().unwrap(),
        "--fan",
        fan,
    ]);
    assert!(out.contains("splitting types: 1\n"), "{out}");
    assert!(
        out.contains("class = (2,0,0)") && out.contains("class = (1,0,0)"),
        "{out}"
    );

    let unequal = fixture("e211.bundle", &cp2_rank2(2, 1, 1).unwrap().to_text());
    let out = stdout(&[
        "bundle-split",
        "--bundle",
        unequal.to_str().unwrap(),
        "--fan",
        fan,
    ]);
    assert!(out.ends_with("no splitting type\n"), "{out}");
}

#[test]
fn bundle_split_section_file() {
    let fan = fixture("f0.fan", &hirzebruch(0).to_text());
    let spec = fixture(
        "f0_1212.bundle",
        &euler_hirzebruch(0, [1, 2, 1, 2]).unwrap().to_text(),
    );
    let out = stdout(&[
        "bundle-split",
        "--bundle",
        spec.to_str().unwrap(),
        "--fan",
        fan.to_str().unwrap(),
    ]);
    assert!(out.starts_with("splitting numbers\n"), "{out}");
    assert!(out.contains("splitting types: "), "{out}");
}

#[test]
fn table_rows() {
    let out = stdout(&["table41", "--k", "6"]);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3, "{out}");
    assert_eq!(
        rows[0],
        "k=3  w=(-1,-1,-1,-1,-1,-1)  type=((2,4,4,2),(-1,-2,-2,-1))"
    );
}

#[test]
fn errors_are_single_lines() {
    assert!(assert_single_line_error(&["surfaces", "--k", "13"]).contains("12"));
    assert_single_line_error(&["tangent-split", "--graph", "1,1"]);
    assert_single_line_error(&["tangent-split", "--graph", "1,1,2"]);
    assert_single_line_error(&["tangent-split"]);
    assert_single_line_error(&["no-such-command"]);
    let bad = fixture("bad.fan", "dim 2\nray 1 0\nray 0 1\ncone 0 7\n");
    let err = assert_single_line_error(&["tangent-split", "--fan", bad.to_str().unwrap()]);
    assert!(err.contains("line"), "{err}");
    let missing = assert_single_line_error(&["tangent-split", "--fan", "/nonexistent/x.fan"]);
    assert!(missing.contains("x.fan"), "{missing}");
}

#[test]
fn output_is_deterministic() {
    let args = ["table41", "--k", "5"];
    let first = stdout(&args);
    for _ in 0..2 {
        assert_eq!(stdout(&args), first);
    }
    let threads = bin()
        .args(args)
        .env("RAYON_NUM_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(threads.stdout).unwrap(), first);
}
