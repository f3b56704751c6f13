mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stqa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_scene(dir: &Path, name: &str, figure: &str) -> String {
    let fig = common::figures()
        .into_iter()
        .find(|(n, _)| n == figure)
        .unwrap()
        .1;
    let path = dir.join(name);
    fs::write(&path, fig.scene().to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&stqa(&[])), 2);
    assert_eq!(code(&stqa(&["frobnicate"])), 2);
    assert_eq!(
        code(&stqa(&["execute", "--out", "x", "--scene", "s.json"])),
        2
    );
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_scene(dir.path(), "good.json", "fig07");
    let o = stqa(&["validate", &good]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains(": ok"));

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"frame_count": 3, "static": [{"frame": 5, "subject": "person", "relation": "holding", "object": "unicorn"}], "dynamic": []}"#,
    )
    .unwrap();
    let o = stqa(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("unicorn"));

    // A directory is checked file by file.
    assert_eq!(code(&stqa(&["validate", dir.path().to_str().unwrap()])), 1);
    assert_eq!(code(&stqa(&["validate", "/nonexistent/scene.json"])), 3);
}

#[test]
fn execute_writes_traces_and_answers() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "scene.json", "fig09");
    let programs = dir.path().join("programs.txt");
    fs::write(
        &programs,
        "# first and last\n\
         object_equals(query_first(query_relation(filter_relation(scene, holding))), query_last(query_relation(filter_relation(scene, touching))))\n\
         \n\
         query_object(filter_object(scene, dish))\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = stqa(&[
        "execute",
        "--scene",
        &scene,
        "--programs",
        programs.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let answers = fs::read_to_string(out.join("answers.jsonl")).unwrap();
    let roots: Vec<serde_json::Value> = answers
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .filter(|r: &serde_json::Value| r["program"].is_string())
        .collect();
    assert_eq!(roots.len(), 2);
    assert_eq!(roots[0]["predicted"], "yes");
    assert_eq!(roots[1]["predicted"], "yes");

    let trace = fs::read_to_string(out.join("traces/scene/q0.txt")).unwrap();
    assert!(trace.ends_with("answer: yes\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("traces/scene/q0.json")).unwrap())
            .unwrap();
    assert_eq!(json["steps"].as_array().unwrap().len(), 7);
    assert!(out.join("traces/scene/q1.txt").exists());
}

#[test]
fn execute_rejects_unparseable_programs() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "scene.json", "fig07");
    let programs = dir.path().join("programs.txt");
    fs::write(&programs, "query_last(query_relation(filter_relation(scene, holding)))\nquery_object(filter_object(scene, unicorn))\n").unwrap();
    let out = dir.path().join("run");
    let o = stqa(&[
        "execute",
        "--scene",
        &scene,
        "--programs",
        programs.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unicorn"));
}

#[test]
fn metrics_on_the_hand_fixture() {
    let path = common::fixtures_dir().join("hand_metrics.jsonl");
    let o = stqa(&["metrics", path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["records"], 12);
    let o = stqa(&["metrics", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("RWR"));
    assert_eq!(code(&stqa(&["metrics", "/nonexistent.jsonl"])), 3);

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.jsonl");
    fs::write(&broken, "{\"video_id\": \"v\"}\n").unwrap();
    assert_eq!(code(&stqa(&["metrics", broken.to_str().unwrap()])), 1);
}

#[test]
fn synth_is_deterministic_and_checks_its_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"seed": 3, "scenes": 5}"#).unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = extra.to_vec();
        args.extend([
            "synth",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&stqa(&args)), 0);
        fs::read(out.join("manifest.jsonl")).unwrap()
    };
    let a = run("a", &[]);
    assert!(!a.is_empty());
    assert_eq!(a, run("b", &[]));
    assert_ne!(a, run("c", &["--seed", "4"]));

    fs::write(&config, r#"{"seeds": 3}"#).unwrap();
    assert_eq!(
        code(&stqa(&[
            "synth",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("d").to_str().unwrap()
        ])),
        1
    );
}

#[test]
fn rules_lists_the_registry() {
    let o = stqa(&["rules", "--json"]);
    assert_eq!(code(&o), 0);
    let rows: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 29);
}
