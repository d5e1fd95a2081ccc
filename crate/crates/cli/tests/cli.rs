//! Command-line contract tests: exit codes, determinism, sorted outputs, and
//! the pipelining equivalence between fused and staged runs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scimob(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scimob"));
    cmd.args(args);
    cmd.env_remove("SCIMOB_WINDOW");
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("spawn scimob")
}

fn summary(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("one-line JSON summary on stdout")
}

fn write_corpus(path: &Path, lines: &[String]) {
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

fn record_line(pub_id: &str, year: i32, author: &str, countries: &[&str]) -> String {
    let countries = countries
        .iter()
        .map(|c| format!("\"{c}\""))
        .collect::<Vec<_>>()
        .join(",");
    format!(
        r#"{{"pub_id":"{pub_id}","year":{year},"doc_type":"article","field":"F","citations":0,"authors":[{{"id":"{author}","countries":[{countries}]}}]}}"#
    )
}

#[test]
fn usage_errors_exit_2() {
    let out = scimob(&["classify", "--no-such-flag"], &[]);
    assert_eq!(out.status.code(), Some(2));

    let out = scimob(&["aggregate", "--out", "/tmp/x.csv"], &[]);
    assert_eq!(out.status.code(), Some(2), "a source is required");

    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &[record_line("p1", 2010, "a", &["ES"])]);
    let out = scimob(
        &[
            "aggregate",
            "--input",
            corpus.to_str().unwrap(),
            "--researchers",
            corpus.to_str().unwrap(),
            "--out",
            dir.path().join("o.csv").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2), "sources are mutually exclusive");

    let out = scimob(
        &[
            "perturb",
            "--input",
            corpus.to_str().unwrap(),
            "--out",
            dir.path().join("p.jsonl").to_str().unwrap(),
            "--split-prob",
            "1.5",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn data_errors_exit_1() {
    let out = scimob(
        &["classify", "--input", "/nonexistent.jsonl", "--out", "/tmp/never.csv"],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn strict_mode_aborts_with_line_number_and_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(
        &corpus,
        &[
            record_line("p1", 2010, "a", &["ES"]),
            "this is not json".to_string(),
            record_line("p2", 2011, "a", &["ES"]),
        ],
    );
    let out_csv = dir.path().join("r.csv");
    let out = scimob(
        &[
            "classify",
            "--input",
            corpus.to_str().unwrap(),
            "--out",
            out_csv.to_str().unwrap(),
            "--strict",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr was: {stderr}");

    // Lenient run on the same corpus succeeds and counts the skip.
    let out = scimob(
        &[
            "classify",
            "--input",
            corpus.to_str().unwrap(),
            "--out",
            out_csv.to_str().unwrap(),
        ],
        &[],
    );
    let summary = summary(&out);
    assert_eq!(summary["skipped_violations"], 1);
    assert_eq!(summary["researchers"], 1);
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |corpus: &Path, truth: &Path| {
        vec![
            "synth".to_string(),
            "--n".into(),
            "1000".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            corpus.to_str().unwrap().into(),
            "--truth".into(),
            truth.to_str().unwrap().into(),
        ]
    };
    let (c1, t1) = (dir.path().join("c1.jsonl"), dir.path().join("t1.csv"));
    let (c2, t2) = (dir.path().join("c2.jsonl"), dir.path().join("t2.csv"));
    let out1 = scimob(
        &args(&c1, &t1).iter().map(String::as_str).collect::<Vec<_>>(),
        &[],
    );
    let out2 = scimob(
        &args(&c2, &t2).iter().map(String::as_str).collect::<Vec<_>>(),
        &[],
    );
    assert!(out1.status.success() && out2.status.success());
    assert_eq!(out1.stdout, out2.stdout);
    assert_eq!(fs::read(&c1).unwrap(), fs::read(&c2).unwrap());
    assert_eq!(fs::read(&t1).unwrap(), fs::read(&t2).unwrap());
    assert!(!fs::read(&c1).unwrap().is_empty());
}

#[test]
fn classify_then_aggregate_matches_fused_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let out = scimob(
        &[
            "synth",
            "--n",
            "800",
            "--seed",
            "21",
            "--mix",
            "0.7,0.1,0.1,0.1",
            "--out",
            corpus.to_str().unwrap(),
            "--truth",
            dir.path().join("t.csv").to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());

    let researchers = dir.path().join("r.csv");
    assert!(scimob(
        &[
            "classify",
            "--input",
            corpus.to_str().unwrap(),
            "--out",
            researchers.to_str().unwrap(),
        ],
        &[],
    )
    .status
    .success());

    for (mode, min_pubs) in [("linkage", "0"), ("roles", "0"), ("linkage", "5")] {
        let fused = dir.path().join(format!("fused_{mode}_{min_pubs}.csv"));
        let staged = dir.path().join(format!("staged_{mode}_{min_pubs}.csv"));
        assert!(scimob(
            &[
                "aggregate",
                "--input",
                corpus.to_str().unwrap(),
                "--out",
                fused.to_str().unwrap(),
                "--counting",
                mode,
                "--min-pubs",
                min_pubs,
            ],
            &[],
        )
        .status
        .success());
        assert!(scimob(
            &[
                "aggregate",
                "--researchers",
                researchers.to_str().unwrap(),
                "--out",
                staged.to_str().unwrap(),
                "--counting",
                mode,
                "--min-pubs",
                min_pubs,
            ],
            &[],
        )
        .status
        .success());
        assert_eq!(
            fs::read(&fused).unwrap(),
            fs::read(&staged).unwrap(),
            "mode {mode} min_pubs {min_pubs}"
        );
    }
}

#[test]
fn outputs_are_stable_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    // Authors and years deliberately out of order.
    write_corpus(
        &corpus,
        &[
            record_line("p1", 2012, "zz", &["GB"]),
            record_line("p2", 2010, "aa", &["ES"]),
            record_line("p3", 2011, "mm", &["FR"]),
            record_line("p4", 2009, "aa", &["ES"]),
        ],
    );
    let researchers = dir.path().join("r.csv");
    assert!(scimob(
        &[
            "classify",
            "--input",
            corpus.to_str().unwrap(),
            "--out",
            researchers.to_str().unwrap(),
        ],
        &[],
    )
    .status
    .success());
    let text = fs::read_to_string(&researchers).unwrap();
    let ids: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(ids, ["aa", "mm", "zz"]);

    let agg = dir.path().join("agg.csv");
    assert!(scimob(
        &[
            "aggregate",
            "--researchers",
            researchers.to_str().unwrap(),
            "--out",
            agg.to_str().unwrap(),
            "--wide",
        ],
        &[],
    )
    .status
    .success());
    let text = fs::read_to_string(&agg).unwrap();
    let countries: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(countries, ["ES", "FR", "GB"]);
}

#[test]
fn window_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(
        &corpus,
        &[
            record_line("p1", 2010, "a", &["ES"]),
            record_line("p2", 2016, "a", &["GB"]),
        ],
    );
    let out_csv = dir.path().join("r.csv");
    let args = [
        "classify",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        out_csv.to_str().unwrap(),
    ];

    // Default window drops the 2016 record: single country, not mobile.
    let s = summary(&scimob(&args, &[]));
    assert_eq!(s["not_mobile"], 1);
    assert_eq!(s["migrant"], 0);

    // Widened via environment: the author becomes a migrant.
    let s = summary(&scimob(&args, &[("SCIMOB_WINDOW", "2008-2016")]));
    assert_eq!(s["migrant"], 1);

    // Flag beats environment.
    let mut with_flag = args.to_vec();
    with_flag.extend(["--window", "2008-2015"]);
    let s = summary(&scimob(&with_flag, &[("SCIMOB_WINDOW", "2008-2016")]));
    assert_eq!(s["not_mobile"], 1);

    let out = scimob(&args, &[("SCIMOB_WINDOW", "busted")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn max_gap_flag_downgrades_distant_moves() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(
        &corpus,
        &[
            record_line("p1", 2008, "a", &["ES"]),
            record_line("p2", 2013, "a", &["GB"]),
        ],
    );
    let out_csv = dir.path().join("r.csv");
    let base = [
        "classify",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        out_csv.to_str().unwrap(),
    ];
    let s = summary(&scimob(&base, &[]));
    assert_eq!(s["migrant"], 1, "next tracked year counts by default");

    let mut capped = base.to_vec();
    capped.extend(["--max-gap", "1"]);
    let s = summary(&scimob(&capped, &[]));
    assert_eq!(s["migrant"], 0);
    assert_eq!(s["not_mobile"], 1);
}

#[test]
fn validate_writes_counter_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(
        &corpus,
        &[
            record_line("p1", 2010, "a", &["ES"]),
            record_line("p1", 2011, "a", &["ES"]),
            record_line("p2", 2003, "a", &["ES"]),
            "{broken".to_string(),
        ],
    );
    let report = dir.path().join("report.json");
    let s = summary(&scimob(
        &[
            "validate",
            "--input",
            corpus.to_str().unwrap(),
            "--out",
            report.to_str().unwrap(),
        ],
        &[],
    ));
    assert_eq!(s["records_valid"], 1);
    assert_eq!(s["violations"], 3);

    let counters: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(counters["duplicate_pub_id"], 1);
    assert_eq!(counters["out_of_window"], 1);
    assert_eq!(counters["syntax"], 1);
    assert_eq!(counters["empty_countries"], 0);
}

#[test]
fn perturb_at_zero_probability_preserves_content() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    assert!(scimob(
        &[
            "synth",
            "--n",
            "50",
            "--seed",
            "3",
            "--out",
            corpus.to_str().unwrap(),
            "--truth",
            dir.path().join("t.csv").to_str().unwrap(),
        ],
        &[],
    )
    .status
    .success());
    let perturbed = dir.path().join("p.jsonl");
    let s = summary(&scimob(
        &[
            "perturb",
            "--input",
            corpus.to_str().unwrap(),
            "--out",
            perturbed.to_str().unwrap(),
            "--split-prob",
            "0.0",
            "--seed",
            "1",
        ],
        &[],
    ));
    assert_eq!(s["split_authors"], 0);
    assert_eq!(fs::read(&corpus).unwrap(), fs::read(&perturbed).unwrap());
}

#[test]
fn classify_jsonl_format_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(
        &corpus,
        &[
            record_line("p1", 2010, "a", &["ES"]),
            record_line("p2", 2011, "a", &["GB"]),
        ],
    );
    let out_jsonl = dir.path().join("r.jsonl");
    assert!(scimob(
        &[
            "classify",
            "--input",
            corpus.to_str().unwrap(),
            "--out",
            out_jsonl.to_str().unwrap(),
            "--format",
            "jsonl",
        ],
        &[],
    )
    .status
    .success());
    let text = fs::read_to_string(&out_jsonl).unwrap();
    let row: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(row["author_id"], "a");
    assert_eq!(row["class"], "migrant");
    assert_eq!(row["roles"][0], "emigrant_from:ES");
}
