use std::fs;
use std::path::Path;

use ebmt_core::archive_io::archive_to_jsonl;
use ebmt_core::cli::run;
use ebmt_core::synth::{self, CorpusSpec};

fn ebmt(args: &[&str], stdin: &str) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ebmt").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn workspace(dir: &Path) {
    let lex = synth::lexicons();
    fs::write(dir.join("fw.tsv"), synth::FUNCTION_WORDS).unwrap();
    fs::write(dir.join("tags.tsv"), synth::TAGS).unwrap();
    let entries = synth::corpus(&CorpusSpec::standard(80, 2), &lex).unwrap();
    fs::write(dir.join("a.jsonl"), archive_to_jsonl(&entries)).unwrap();
    let tests: String = synth::sentences(&CorpusSpec::standard(10, 3)).iter().map(|s| s.source.clone() + "\n").collect();
    fs::write(dir.join("test.txt"), tests).unwrap();
}

#[test]
fn learn_query_evaluate_stats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d);
    let p = |f: &str| d.join(f).to_string_lossy().into_owned();
    let lexflags = ["--fw", &p("fw.tsv"), "--tags", &p("tags.tsv")].map(String::from);
    let with = |rest: &[&str]| -> Vec<String> {
        rest.iter().map(|s| s.to_string()).chain(lexflags.iter().cloned()).collect()
    };
    let call = |args: Vec<String>, stdin: &str| ebmt(&args.iter().map(String::as_str).collect::<Vec<_>>(), stdin);

    let (code, out, err) = call(with(&["learn", "--archive", &p("a.jsonl"), "--k", "4", "--out", &p("m.json")]), "");
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("iteration 1:"));
    assert!(d.join("m.json").exists());

    let sentence = synth::sentences(&CorpusSpec::standard(80, 2))[5].source.clone();
    let (code, out, _) = call(with(&["query", "--model", &p("m.json"), "--sentence", &sentence]), "");
    assert_eq!(code, 0);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let (last, proposals) = lines.split_last().unwrap();
    assert!(last["summary"]["comparisons"].as_u64().unwrap() > 0);
    assert!(!proposals.is_empty());
    for key in ["score", "input_span", "entry_id", "entry_span", "target", "provenance"] {
        assert!(proposals[0].get(key).is_some(), "{key}");
    }

    // stdin streaming, deterministic across runs and thread counts
    let stdin = format!("{sentence}\nthe levy of rice thereof\n");
    let (_, a, _) = call(with(&["query", "--model", &p("m.json")]), &stdin);
    let (_, b, _) = call(with(&["query", "--model", &p("m.json"), "--jobs", "2"]), &stdin);
    assert_eq!(a, b);
    assert_eq!(a.lines().filter(|l| l.starts_with("{\"summary\"")).count(), 2);

    let (code, out, _) = call(with(&["evaluate", "--model", &p("m.json"), "--test", &p("test.txt"), "--clusters", "1,4"]), "");
    assert_eq!(code, 0);
    assert!(out.lines().next().unwrap().contains("MISSED BY"));
    assert_eq!(out.lines().count(), 3);
    let (code, out, _) = call(with(&["evaluate", "--json", "--model", &p("m.json"), "--test", &p("test.txt")]), "");
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["report"]["queries"], 10);

    let (code, out, _) = call(with(&["stats", "--model", &p("m.json")]), "");
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["clusters"], 4);

    let (code, out, _) = call(with(&["encode", "--sentence", "the export of rice"]), "");
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["fw_slots"], serde_json::json!([0, 2]));
}

#[test]
fn config_file_precedence_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d);
    let p = |f: &str| d.join(f).to_string_lossy().into_owned();
    fs::write(
        d.join("c.toml"),
        format!("[paths]\nfw = {:?}\ntags = {:?}\n\n[learn]\nk_target = 3\n", p("fw.tsv"), p("tags.tsv")),
    )
    .unwrap();
    let (code, _, err) = ebmt(&["learn", "--config", &p("c.toml"), "--archive", &p("a.jsonl"), "--out", &p("m3.json")], "");
    assert_eq!(code, 0, "{err}");
    let (_, out, _) = ebmt(&["stats", "--config", &p("c.toml"), "--model", &p("m3.json")], "");
    assert!(out.contains("\"clusters\": 3"));
    let (code, _, _) =
        ebmt(&["learn", "--config", &p("c.toml"), "--k", "2", "--archive", &p("a.jsonl"), "--out", &p("m2.json")], "");
    assert_eq!(code, 0);
    let (_, out, _) = ebmt(&["stats", "--config", &p("c.toml"), "--model", &p("m2.json")], "");
    assert!(out.contains("\"clusters\": 2"));

    fs::write(d.join("bad.toml"), "[learn]\nk_targt = 3\n").unwrap();
    let (code, _, err) = ebmt(&["stats", "--config", &p("bad.toml"), "--archive", &p("a.jsonl")], "");
    assert_eq!(code, 1);
    assert!(err.contains("k_targt"), "{err}");

    let (code, _, err) = ebmt(&["query", "--config", &p("c.toml"), "--cover-threshold", "0.2", "--model", &p("m3.json")], "");
    assert_eq!(code, 1, "{err}");
}

#[test]
fn usage_and_component_errors() {
    assert_eq!(ebmt(&["translate"], "").0, 2);
    assert_eq!(ebmt(&["query", "--no-such-flag"], "").0, 2);
    assert_eq!(ebmt(&["query", "--sentence", "x"], "").0, 2);
    let (code, _, err) = ebmt(&["encode", "--fw", "/nonexistent/fw.tsv", "--tags", "/nonexistent/t.tsv", "--sentence", "x"], "");
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent/fw.tsv"));
    let (code, out, _) = ebmt(&["--help"], "");
    assert_eq!(code, 0);
    for sub in ["encode", "learn", "query", "evaluate", "stats"] {
        assert!(out.contains(sub));
    }
}
