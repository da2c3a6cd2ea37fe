//! End-to-end tests of the binary: every subcommand, every exit-code path.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use seifert_core::format::{f64_from_hex, f64_to_hex};

const TWO_BLOCK: &str = "\
block a genus 2 free 0
block b genus 2 free 0
edge a b glue 2 1 5 2
";

/// Same shape with glue [[1,1],[2,1]]: determinant −1, but |charge| = 1 ties
/// the reciprocal sum instead of beating it.
const NON_SDD: &str = "\
block a genus 2 free 0
block b genus 2 free 0
edge a b glue 1 1 2 1
";

const PATH3: &str = "\
block a genus 2 free 1
block b genus 2 free 0
block c genus 2 free 1
edge a b glue 2 1 5 2
edge b c glue 0 1 1 0
";

const TRIANGLE: &str = "\
block a genus 2 free 0
block b genus 2 free 0
block c genus 2 free 0
edge a b glue 2 1 5 2
edge a c glue 1 1 2 1
edge b c glue 0 1 1 0
";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seifert-obstruct"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seifert-obstruct"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn write_file(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).expect("write input");
    path.to_str().expect("utf-8 path").to_owned()
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

#[test]
fn validate_accepts_a_good_manifold() {
    let dir = tempdir();
    let m = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let out = run(&["validate", &m]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "ok: 2 blocks, 1 edge\n");
}

#[test]
fn validate_reports_violations_with_exit_1() {
    let dir = tempdir();
    let m = write_file(
        dir.path(),
        "bad.manifold",
        "block a genus 2 free 0\nblock b genus 2 free 0\nedge a b glue 3 1 2 1\n",
    );
    let out = run(&["validate", &m]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.starts_with("invalid:"), "got: {text}");
    assert!(
        text.contains("a-b") && text.contains("determinant"),
        "got: {text}"
    );
}

#[test]
fn syntax_errors_exit_2_with_line_numbers() {
    let dir = tempdir();
    let m = write_file(
        dir.path(),
        "junk.manifold",
        "block a genus 2 free 0\nblok b genus 2 free 0\n",
    );
    let out = run(&["validate", &m]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "got: {}", stderr(&out));

    let m = write_file(
        dir.path(),
        "loop.manifold",
        "block a genus 2 free 2\nedge a a glue 2 1 5 2\n",
    );
    let out = run(&["invariants", &m]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(
        err.contains("line 2") && err.contains("itself"),
        "got: {err}"
    );

    let out = run(&["validate", "/nonexistent/path.manifold"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn invariants_prints_exact_rationals() {
    let dir = tempdir();
    let m = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let out = run(&["invariants", &m]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "block a: genus 2, free boundaries 0, charge -2, reciprocal sum 1, strictly dominant\n\
         block b: genus 2, free boundaries 0, charge 2, reciprocal sum 1, strictly dominant\n\
         edge a-b: intersection index 1\n\
         SDD: yes\n"
    );
}

#[test]
fn sdd_verdict_drives_the_exit_code() {
    let dir = tempdir();
    let good = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let out = run(&["sdd", &good]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "SDD: yes\n");

    let bad = write_file(dir.path(), "nonsdd.manifold", NON_SDD);
    let out = run(&["sdd", &bad]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "SDD: no\n");
}

#[test]
fn cover_of_a_cycle_connects_and_round_trips() {
    let dir = tempdir();
    let m = write_file(dir.path(), "tri.manifold", TRIANGLE);
    let cover_path = dir.path().join("tri.cover.manifold");
    let out = run(&[
        "cover",
        &m,
        "--cut",
        "a-b",
        "--out",
        cover_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("connected (6 blocks, 6 edges)"),
        "got: {text}"
    );
    assert!(text.contains("invariants preserved: yes"), "got: {text}");

    let out = run(&["validate", cover_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "ok: 6 blocks, 6 edges\n");
}

#[test]
fn cover_of_a_tree_cut_disconnects_with_exit_1() {
    let dir = tempdir();
    let m = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let out = run(&["cover", &m, "--cut", "a-b"]);
    assert_eq!(code(&out), 1);
    assert!(
        stdout(&out).contains("disconnected"),
        "got: {}",
        stdout(&out)
    );

    // No cut at all: two disjoint copies.
    let out = run(&["cover", &m]);
    assert_eq!(code(&out), 1);
}

#[test]
fn cover_rejects_unknown_cut_edges() {
    let dir = tempdir();
    let m = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let out = run(&["cover", &m, "--cut", "a-z"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("a-z"), "got: {}", stderr(&out));
}

#[test]
fn certify_replays_through_check() {
    let dir = tempdir();
    let m = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let cert = dir.path().join("two.cert.json");
    let out = run(&["certify", &m, "--out", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("exhaustive"), "got: {}", stdout(&out));

    let out = run(&["check", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).starts_with("check passed:"),
        "got: {}",
        stdout(&out)
    );
}

#[test]
fn check_flags_a_tampered_certificate() {
    let dir = tempdir();
    let m = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let cert = dir.path().join("two.cert.json");
    assert_eq!(
        code(&run(&["certify", &m, "--out", cert.to_str().unwrap()])),
        0
    );

    let text = fs::read_to_string(&cert).unwrap();
    let tampered = text.replacen("\"determinant\": \"-2\"", "\"determinant\": \"-3\"", 1);
    assert_ne!(text, tampered, "expected a determinant to tamper with");
    fs::write(&cert, tampered).unwrap();

    let out = run(&["check", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(
        stdout(&out).starts_with("check failed:"),
        "got: {}",
        stdout(&out)
    );
}

#[test]
fn check_rejects_unusable_documents_with_exit_2() {
    let dir = tempdir();
    let garbage = write_file(dir.path(), "garbage.json", "{ not json");
    let out = run(&["check", &garbage]);
    assert_eq!(code(&out), 2);

    let m = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let cert = dir.path().join("two.cert.json");
    assert_eq!(
        code(&run(&["certify", &m, "--out", cert.to_str().unwrap()])),
        0
    );
    let text = fs::read_to_string(&cert).unwrap();
    let wrong_kind = text.replacen("no-vertex-faithful-representation", "some-other-claim", 1);
    let path = write_file(dir.path(), "wrong-kind.json", &wrong_kind);
    let out = run(&["check", &path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("kind"), "got: {}", stderr(&out));
}

#[test]
fn certify_requires_a_closed_manifold() {
    let dir = tempdir();
    let m = write_file(
        dir.path(),
        "open.manifold",
        "block a genus 2 free 1\nblock b genus 2 free 0\nedge a b glue 2 1 5 2\n",
    );
    let out = run(&["certify", &m]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not closed"), "got: {}", stderr(&out));
}

#[test]
fn certify_refuses_non_sdd_with_exit_1() {
    let dir = tempdir();
    let m = write_file(dir.path(), "nonsdd.manifold", NON_SDD);
    let out = run(&["certify", &m]);
    assert_eq!(code(&out), 1);
    assert!(
        stdout(&out).contains("not strictly diagonally dominant"),
        "got: {}",
        stdout(&out)
    );
}

#[test]
fn build_rep_verifies_and_round_trips() {
    let dir = tempdir();
    let m = write_file(dir.path(), "path3.manifold", PATH3);
    let rep = dir.path().join("path3.rep.json");
    let out = run(&[
        "build-rep",
        &m,
        "--root",
        "a",
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for check in [
        "relation",
        "fiber-centralized",
        "edge-compatibility",
        "abelian-blocks",
        "root-faithfulness",
    ] {
        assert!(text.contains(&format!("PASS {check}")), "got: {text}");
    }

    let out = run(&["verify-rep", rep.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(
        stdout(&out).matches("PASS").count(),
        5,
        "got: {}",
        stdout(&out)
    );
}

#[test]
fn verify_rep_flags_a_perturbed_matrix() {
    let dir = tempdir();
    let m = write_file(dir.path(), "path3.manifold", PATH3);
    let rep = dir.path().join("path3.rep.json");
    assert_eq!(
        code(&run(&[
            "build-rep",
            &m,
            "--root",
            "a",
            "--out",
            rep.to_str().unwrap()
        ])),
        0
    );

    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    let entry = &mut doc["blocks"][0]["surface"][0];
    let old = f64_from_hex(entry["matrix"][0].as_str().unwrap()).unwrap();
    let bumped = old + 1e-3;
    entry["matrix"][0] = serde_json::json!(f64_to_hex(bumped));
    entry["matrix_readable"][0] = serde_json::json!(bumped);
    fs::write(&rep, serde_json::to_string(&doc).unwrap()).unwrap();

    let out = run(&["verify-rep", rep.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"), "got: {}", stdout(&out));
}

#[test]
fn verify_rep_rejects_unusable_documents() {
    let dir = tempdir();
    let garbage = write_file(dir.path(), "garbage.json", "[1, 2, 3]");
    let out = run(&["verify-rep", &garbage]);
    assert_eq!(code(&out), 2);

    let m = write_file(dir.path(), "path3.manifold", PATH3);
    let rep = dir.path().join("path3.rep.json");
    assert_eq!(
        code(&run(&[
            "build-rep",
            &m,
            "--root",
            "a",
            "--out",
            rep.to_str().unwrap()
        ])),
        0
    );
    let text = fs::read_to_string(&rep).unwrap();
    let wrong = text.replacen("tree-representation", "something-else", 1);
    let path = write_file(dir.path(), "wrong-kind.json", &wrong);
    let out = run(&["verify-rep", &path]);
    assert_eq!(code(&out), 2);
}

#[test]
fn build_rep_rejects_bad_arguments() {
    let dir = tempdir();
    let m = write_file(dir.path(), "path3.manifold", PATH3);

    let out = run(&["build-rep", &m, "--root", "zzz"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("zzz"), "got: {}", stderr(&out));

    let out = run(&["build-rep", &m, "--root", "a", "--fiber-central", "0"]);
    assert_eq!(code(&out), 2);

    let tri = write_file(dir.path(), "tri.manifold", TRIANGLE);
    let out = run(&["build-rep", &tri, "--root", "a"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("tree"), "got: {}", stderr(&out));
}

#[test]
fn build_rep_refuses_an_insufficient_spread() {
    let dir = tempdir();
    let m = write_file(dir.path(), "path3.manifold", PATH3);
    let out = run(&["build-rep", &m, "--root", "a", "--spread", "1.5"]);
    assert_eq!(code(&out), 1);
    assert!(
        stdout(&out).starts_with("refused:"),
        "got: {}",
        stdout(&out)
    );
}

#[test]
fn thread_cap_env_is_honored_and_validated() {
    let dir = tempdir();
    let m = write_file(dir.path(), "two.manifold", TWO_BLOCK);
    let out = run_with_env(&["certify", &m], "SEIFERT_OBSTRUCT_THREADS", "1");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let out = run_with_env(&["certify", &m], "SEIFERT_OBSTRUCT_THREADS", "0");
    assert_eq!(code(&out), 2);
    let out = run_with_env(&["certify", &m], "SEIFERT_OBSTRUCT_THREADS", "many");
    assert_eq!(code(&out), 2);
}

#[test]
fn rep_documents_round_trip_bit_for_bit() {
    let dir = tempdir();
    let m = write_file(dir.path(), "path3.manifold", PATH3);
    let rep: PathBuf = dir.path().join("path3.rep.json");
    assert_eq!(
        code(&run(&[
            "build-rep",
            &m,
            "--root",
            "a",
            "--out",
            rep.to_str().unwrap()
        ])),
        0
    );
    let first = fs::read_to_string(&rep).unwrap();
    // Rebuilding is deterministic: same manifold, same document, byte for byte.
    assert_eq!(
        code(&run(&[
            "build-rep",
            &m,
            "--root",
            "a",
            "--out",
            rep.to_str().unwrap()
        ])),
        0
    );
    let second = fs::read_to_string(&rep).unwrap();
    assert_eq!(first, second);
}
