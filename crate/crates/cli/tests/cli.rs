//! End-to-end runs of the `ipweave` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ipweave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipweave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Materializes the bundled replica dataset into a temp dir and returns
/// (dir guard, dataset path, fspec path).
fn replica() -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("replica");
    let out = ipweave(&[
        "check",
        "--write-replica",
        dataset.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let fspec = dataset.join("jaas.fspec");
    assert!(fspec.is_file());
    (dir, dataset, fspec)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_weaves_the_baseline_task_and_writes_reports() {
    let (dir, dataset, fspec) = replica();
    let out_dir = dir.path().join("woven");
    let out = ipweave(&[
        "synth",
        "--program",
        arg(&dataset.join("t01")),
        "--fspec",
        arg(&fspec),
        "--out",
        arg(&out_dir),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let rec = std::fs::read_to_string(out_dir.join("report.rec")).unwrap();
    assert!(rec.contains("placement #Initialization Sample.mj "), "{rec}");
    assert!(rec.contains("score cas="), "{rec}");
    assert!(rec.contains("channel #Initialization #Logging_In returnValue"), "{rec}");

    let woven = std::fs::read_to_string(out_dir.join("Sample.mj")).unwrap();
    assert!(woven.contains("new javax.security.auth.login.LoginContext(moduleName,"), "{woven}");
    assert!(woven.contains("return "), "{woven}");
    assert!(woven.contains(".getPrincipals()"), "{woven}");
    assert!(out_dir.join("report.txt").is_file());
}

#[test]
fn synth_accepts_a_config_file() {
    let (dir, dataset, fspec) = replica();
    let config = dir.path().join("tuned.conf");
    std::fs::write(&config, "cCQS = 0.5\nlistCap = 10\ntau = 3\n").unwrap();
    let out = ipweave(&[
        "synth",
        "--program",
        arg(&dataset.join("t01")),
        "--fspec",
        arg(&fspec),
        "--out",
        arg(&dir.path().join("woven")),
        "--config",
        arg(&config),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn infeasible_programs_exit_with_code_two() {
    let (dir, _dataset, fspec) = replica();
    let bare = dir.path().join("bare");
    std::fs::create_dir_all(&bare).unwrap();
    std::fs::write(bare.join("Empty.mj"), "package p;\nclass Empty {\n}\n").unwrap();
    let out = ipweave(&[
        "synth",
        "--program",
        arg(&bare),
        "--fspec",
        arg(&fspec),
        "--out",
        arg(&dir.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn bad_inputs_exit_with_code_one() {
    let (dir, dataset, fspec) = replica();

    let missing = ipweave(&[
        "synth",
        "--program",
        arg(&dataset.join("t01")),
        "--fspec",
        arg(&dir.path().join("nosuch.fspec")),
        "--out",
        arg(&dir.path().join("x")),
    ]);
    assert_eq!(missing.status.code(), Some(1));

    let bad_rank = ipweave(&[
        "synth",
        "--program",
        arg(&dataset.join("t01")),
        "--fspec",
        arg(&fspec),
        "--out",
        arg(&dir.path().join("x")),
        "--rank",
        "9999",
    ]);
    assert_eq!(bad_rank.status.code(), Some(1));

    let config = dir.path().join("bad.conf");
    std::fs::write(&config, "cMax = 1\n").unwrap();
    let bad_config = ipweave(&[
        "score",
        "--program",
        arg(&dataset.join("t01")),
        "--fspec",
        arg(&fspec),
        "--config",
        arg(&config),
    ]);
    assert_eq!(bad_config.status.code(), Some(1));
    assert!(stderr(&bad_config).contains("unknown key"), "{}", stderr(&bad_config));
}

#[test]
fn score_prints_the_ranked_table() {
    let (_dir, dataset, fspec) = replica();
    let out = ipweave(&[
        "score",
        "--program",
        arg(&dataset.join("t01")),
        "--fspec",
        arg(&fspec),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("rank 1 cas="), "{text}");
    assert!(text.contains("cds=1"), "{text}");
    assert!(text.contains("#Initialization Sample.mj:"), "{text}");
    assert!(text.contains("mns="), "{text}");
    assert!(text.contains("vas="), "{text}");
    assert!(text.contains("cls="), "{text}");
}

#[test]
fn sketch_prints_typed_holes_per_cluster() {
    let (_dir, _dataset, fspec) = replica();
    let out = ipweave(&["sketch", "--fspec", arg(&fspec), "--branch", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("cluster 0 #Initialization"), "{text}");
    assert!(text.contains("?1:java.lang.String"), "{text}");
    assert!(text.contains("?2:javax.security.auth.login.LoginContext"), "{text}");

    let out_of_range = ipweave(&["sketch", "--fspec", arg(&fspec), "--branch", "99"]);
    assert_eq!(out_of_range.status.code(), Some(1));
}

#[test]
fn resolve_prints_clauses_and_the_assignment() {
    let (_dir, dataset, fspec) = replica();
    let out = ipweave(&[
        "resolve",
        "--program",
        arg(&dataset.join("t01")),
        "--fspec",
        arg(&fspec),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("clause or hole=1:"), "{text}");
    assert!(text.contains("assign hole=1 var="), "{text}");
    assert!(text.contains("distinct "), "{text}");
}

#[test]
fn analyze_lists_scopes_variables_and_the_graph() {
    let (_dir, dataset, _fspec) = replica();
    let out = ipweave(&["analyze", arg(&dataset.join("t01"))]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("scope 0 name=sample.auth.Sample.initializeLC#0"), "{text}");
    assert!(text.contains("var scope=0 name=moduleName type=String kind=local init=yes"), "{text}");
    assert!(text.contains("\nnode 0\n"), "{text}");
    assert!(text.contains("edge control "), "{text}");
}

#[test]
fn eval_writes_the_record_file_with_perfect_replica_scores() {
    let (dir, dataset, fspec) = replica();
    let out_dir = dir.path().join("evalout");
    let out = ipweave(&[
        "eval",
        "--dataset",
        arg(&dataset),
        "--fspec",
        arg(&fspec),
        "--out",
        arg(&out_dir),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rec = std::fs::read_to_string(out_dir.join("eval.rec")).unwrap();
    assert!(rec.contains("hr k=1 value=100.0\n"), "{rec}");
    assert!(rec.contains("hr k=100 value=100.0\n"), "{rec}");
    assert!(rec.contains("mrr value=1.0000\n"), "{rec}");
    for t in 1..=10 {
        let line = format!("task t{t:02} rank=1 syntax=ok semantic=ok conf=1.0000\n");
        assert!(rec.contains(&line), "{rec}");
    }
}

#[test]
fn check_validates_fspec_program_and_dataset() {
    let (_dir, dataset, fspec) = replica();
    let out = ipweave(&[
        "check",
        "--fspec",
        arg(&fspec),
        "--program",
        arg(&dataset.join("t01")),
        "--dataset",
        arg(&dataset),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("fspec jaas-authentication nodes=6 edges=6 branches=3"), "{text}");
    assert!(text.contains("program files=1 methods=4"), "{text}");
    assert!(text.contains("dataset "), "{text}");
    assert!(text.contains("tasks=10 ok"), "{text}");

    let nothing = ipweave(&["check"]);
    assert_eq!(nothing.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_deterministic() {
    let (dir, dataset, fspec) = replica();
    let mut recs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = ipweave(&[
            "synth",
            "--program",
            arg(&dataset.join("t01")),
            "--fspec",
            arg(&fspec),
            "--out",
            arg(&out_dir),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        recs.push((
            std::fs::read_to_string(out_dir.join("report.rec")).unwrap(),
            std::fs::read_to_string(out_dir.join("Sample.mj")).unwrap(),
        ));
    }
    assert_eq!(recs[0], recs[1]);
}
