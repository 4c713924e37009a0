use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn fixeval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixeval")).args(args).env_remove("FIXEVAL_API_KEY").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn score_prints_two_decimal_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let (c, r) = (dir.path().join("c.py"), dir.path().join("r.py"));
    std::fs::write(&c, "paths = [ipython_dir, get_ipython_package_dir()]\n").unwrap();
    std::fs::write(&r, "paths = [ipython_dir]\n").unwrap();
    let out = fixeval(&["score", "--lang", "python", "--cand", path_str(&c), "--ref", path_str(&r)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in ["bleu            31.56", "weighted_bleu   70.71", "kwop_bleu        9.55", "literal_sim      0.00", "elrm            14.34"] {
        assert!(text.contains(line), "{line:?} missing from\n{text}");
    }
    let json = fixeval(&["score", "--format", "json", "--lang", "python", "--cand", path_str(&c), "--ref", path_str(&r)]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["elrm"], 14.34);
}

#[test]
fn eval_writes_records_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.jsonl");
    let out = fixeval(&[
        "eval",
        "--dataset",
        path_str(&data("dataset.jsonl")),
        "--outputs",
        path_str(&data("outputs.jsonl")),
        "--judgments",
        path_str(&data("judgments.jsonl")),
        "--records",
        path_str(&records),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&records).unwrap().lines().count(), 10);
    let text = stdout(&out);
    assert!(text.contains("ELRM") && text.contains("pearson r") && text.contains("Cohen's kappa"));

    // the report command rebuilds the same report from the records file
    let again = fixeval(&["report", "--records", path_str(&records), "--judgments", path_str(&data("judgments.jsonl"))]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn eval_output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for threads in ["1", "8"] {
        let records = dir.path().join(format!("r{threads}.jsonl"));
        let out = fixeval(&[
            "eval",
            "--format",
            "json",
            "--parallelism",
            threads,
            "--dataset",
            path_str(&data("dataset.jsonl")),
            "--outputs",
            path_str(&data("outputs.jsonl")),
            "--records",
            path_str(&records),
        ]);
        assert_eq!(out.status.code(), Some(0));
        seen.push((out.stdout, std::fs::read(&records).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn broken_generation_is_flagged_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let outputs = dir.path().join("outputs.jsonl");
    let good = std::fs::read_to_string(data("outputs.jsonl")).unwrap();
    let broken = good.replace(r#""strcpy(dst, src""#, r#""strcpy(dst, \"src);""#);
    assert_ne!(good, broken);
    std::fs::write(&outputs, broken).unwrap();
    let records = dir.path().join("records.jsonl");
    let out = fixeval(&[
        "eval",
        "--format",
        "json",
        "--dataset",
        path_str(&data("dataset.jsonl")),
        "--outputs",
        path_str(&outputs),
        "--records",
        path_str(&records),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["records"], 10);
    assert_eq!(report["scored"], 9);
    assert_eq!(report["errors"][0]["id"], "cpp-copy");
}

#[test]
fn transform_emits_renamed_variants() {
    let dir = tempfile::tempdir().unwrap();
    let (out_path, maps) = (dir.path().join("renamed.jsonl"), dir.path().join("maps.jsonl"));
    let out = fixeval(&[
        "transform",
        "--dataset",
        path_str(&data("dataset.jsonl")),
        "--out",
        path_str(&out_path),
        "--maps",
        path_str(&maps),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let written = std::fs::read_to_string(&out_path).unwrap();
    let variants: Vec<serde_json::Value> = written.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // the one already renamed instance is skipped
    assert_eq!(variants.len(), 4);
    assert!(variants.iter().all(|v| v["id"].as_str().unwrap().ends_with("-renamed")));
    assert_eq!(variants[4 - 1]["transform"], "renamed_restructured");
    assert_eq!(std::fs::read_to_string(&maps).unwrap().lines().count(), 4);

    // the output is itself a valid dataset
    let records = dir.path().join("records.jsonl");
    let eval = fixeval(&["eval", "--dataset", path_str(&out_path), "--records", path_str(&records)]);
    assert_eq!(eval.status.code(), Some(0), "{}", String::from_utf8_lossy(&eval.stderr));
}

#[test]
fn judge_replays_recorded_answers() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("replay.jsonl");
    let ids = ["py-path", "py-form", "java-sql", "cpp-copy", "rb-xss"];
    let lines: Vec<String> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let answer = if i < 3 { "Good" } else { "Poor" };
            serde_json::json!({"key": format!("{id}/planqul/tagger/reference_based"), "response": answer}).to_string()
        })
        .collect();
    std::fs::write(&replay, lines.join("\n")).unwrap();
    let log = dir.path().join("calls.jsonl");
    let out = fixeval(&[
        "judge",
        "--format",
        "csv",
        "--dataset",
        path_str(&data("dataset.jsonl")),
        "--outputs",
        path_str(&data("outputs.jsonl")),
        "--model",
        "model-a",
        "--dimensions",
        "planqul",
        "--replay",
        path_str(&replay),
        "--log",
        path_str(&log),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("PLanQul,Poor,2,40.0,Good,3,60.0,0"), "{}", stdout(&out));
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 5);
}

#[test]
fn judge_without_key_is_a_config_error() {
    let out = fixeval(&["judge", "--dataset", path_str(&data("dataset.jsonl")), "--dimensions", "planqul"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FIXEVAL_API_KEY"));
}

#[test]
fn exit_codes() {
    assert_eq!(fixeval(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fixeval(&["report", "--bogus"]).status.code(), Some(2));
    assert_eq!(fixeval(&["report", "--records", "/no/such/file"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad_config = dir.path().join("c.toml");
    std::fs::write(&bad_config, "[metric.weights]\nalpha = 0.9\n").unwrap();
    let out = fixeval(&["--config", path_str(&bad_config), "eval", "--dataset", path_str(&data("dataset.jsonl"))]);
    assert_eq!(out.status.code(), Some(2));

    let bad_data = dir.path().join("d.jsonl");
    std::fs::write(&bad_data, "{\"id\": \"x\"}\n").unwrap();
    let out = fixeval(&["eval", "--dataset", path_str(&bad_data), "--records", path_str(&dir.path().join("r.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let ok = fixeval(&["--seed", "7", "--help"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn config_file_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(&config, "[dimensions]\nthreshold = 99.0\n\n[run]\nformat = \"json\"\n").unwrap();
    let records = dir.path().join("r.jsonl");
    let out = fixeval(&[
        "--config",
        path_str(&config),
        "eval",
        "--dataset",
        path_str(&data("dataset.jsonl")),
        "--outputs",
        path_str(&data("outputs.jsonl")),
        "--records",
        path_str(&records),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["dimensions"]["threshold"], 99.0);
}
