use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/mobile-data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn adfd(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = adfd_cli::run(
        std::iter::once("adfd").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn catalog(pattern: &str) -> String {
    serde_json::json!({
        "rules": [{
            "id": "T1",
            "title": "test rule",
            "threat_type": "Information Disclosure",
            "impact": 2,
            "likelihood": 3,
            "pattern": pattern,
        }]
    })
    .to_string()
}

#[test]
fn validate_spec() {
    let ok = adfd(&["validate-spec", "--spec", &fixture("spec.json")]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert!(ok.stdout.contains("10 element types"));

    let dir = tempfile::tempdir().unwrap();
    let three_levels = write(
        &dir,
        "spec.json",
        r#"{"element_types": [{"name": "A"}, {"name": "B", "parent": "A"}, {"name": "C", "parent": "B"}]}"#,
    );
    let r = adfd(&["validate-spec", "--spec", &three_levels]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("SUBTYPE_WITH_CHILDREN"), "{}", r.stderr);

    let missing = dir.path().join("nope.json");
    assert_eq!(adfd(&["validate-spec", "--spec", missing.to_str().unwrap()]).code, 1);
    let broken = write(&dir, "broken.json", "{ \"element_types\": [");
    assert_eq!(adfd(&["validate-spec", "--spec", &broken]).code, 1);
}

#[test]
fn validate_model() {
    let ok = adfd(&["validate-model", "--spec", &fixture("spec.json"), "--model", &fixture("model.json")]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert!(ok.stdout.contains("model conforms"));

    let dir = tempfile::tempdir().unwrap();
    let mut model: Value = serde_json::from_str(&std::fs::read_to_string(fixture("model.json")).unwrap()).unwrap();
    model["elements"][2]["properties"] = serde_json::json!({ "Encrypted": "Yes" });
    let bad = write(&dir, "model.json", &model.to_string());
    let r = adfd(&["validate-model", "--spec", &fixture("spec.json"), "--model", &bad]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("KEY_NOT_ALLOWED"), "{}", r.stdout);
    assert!(r.stdout.contains("element n3"), "{}", r.stdout);

    let s = adfd(&["validate-model", "--spec", &fixture("spec.json"), "--model", &bad, "--format", "structured"]);
    let v: Value = serde_json::from_str(&s.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"][0]["code"], "KEY_NOT_ALLOWED");
    assert_eq!(v["violations"][0]["subject"]["component"]["id"], "n3");

    let malformed = write(&dir, "m.json", "not json");
    assert_eq!(adfd(&["validate-model", "--spec", &fixture("spec.json"), "--model", &malformed]).code, 1);

    model["connectors"][0]["target"] = "n99".into();
    let dangling = write(&dir, "d.json", &model.to_string());
    let r = adfd(&["validate-model", "--spec", &fixture("spec.json"), "--model", &dangling]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("DANGLING_ENDPOINT"), "{}", r.stderr);
}

#[test]
fn check_rules() {
    let ok = adfd(&["check-rules", "--spec", &fixture("spec.json"), "--rules", &fixture("rules.json")]);
    assert_eq!(ok.code, 0, "{}", ok.stdout);
    assert_eq!(ok.stdout.matches("PASS").count(), 5);

    let dir = tempfile::tempdir().unwrap();
    let unknown = write(&dir, "u.json", &catalog("Element : \"Toaster\""));
    let r = adfd(&["check-rules", "--spec", &fixture("spec.json"), "--rules", &unknown]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("FAIL T1") && r.stdout.contains("UNKNOWN_TYPE"), "{}", r.stdout);

    let syntax = write(&dir, "s.json", &catalog("Element { Holds Element }"));
    let r = adfd(&["check-rules", "--spec", &fixture("spec.json"), "--rules", &syntax]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("at 1:17"), "{}", r.stdout);

    let dup = write(
        &dir,
        "dup.json",
        r#"{"rules": [
            {"id": "A", "title": "a", "threat_type": "x", "impact": 1, "likelihood": 1, "pattern": "Element"},
            {"id": "A", "title": "b", "threat_type": "x", "impact": 1, "likelihood": 1, "pattern": "Element"}]}"#,
    );
    let r = adfd(&["check-rules", "--spec", &fixture("spec.json"), "--rules", &dup]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("DUPLICATE_RULE_ID"));
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let rules = write(&dir, "r.json", &catalog("Asset { \"Encrypted\" = \"No\" }"));
    let base = ["analyze", "--spec", &fixture("spec.json"), "--model", &fixture("model.json"), "--rules", &rules];

    let mut args = base.to_vec();
    args.push("--fail-on-match");
    let r = adfd(&args);
    assert_eq!(r.code, 3);
    assert!(r.stdout.contains("match y1: {y1}"), "{}", r.stdout);

    let r = adfd(&base);
    assert_eq!(r.code, 0);

    let none = write(&dir, "n.json", &catalog("Element : \"Toaster\" & Element"));
    let r = adfd(&["analyze", "--spec", &fixture("spec.json"), "--model", &fixture("model.json"), "--rules", &none, "--fail-on-match"]);
    assert_eq!(r.code, 0, "invalid rules do not count as matches");
    assert!(r.stdout.contains("rule_invalid"));

    let mut model: Value = serde_json::from_str(&std::fs::read_to_string(fixture("model.json")).unwrap()).unwrap();
    model["elements"][0]["type"] = "Toaster".into();
    let bad = write(&dir, "model.json", &model.to_string());
    let r = adfd(&["analyze", "--spec", &fixture("spec.json"), "--model", &bad, "--rules", &rules]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("UNKNOWN_TYPE"));
}

fn report_args(format: &str) -> Vec<String> {
    ["analyze", "--spec", &fixture("spec.json"), "--model", &fixture("model.json"), "--rules", &fixture("rules.json"), "--format", format]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[test]
fn structured_report_matches_schema_and_round_trips() {
    let args = report_args("structured");
    let r = adfd(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(r.code, 0);
    let value: Value = serde_json::from_str(&r.stdout).unwrap();
    let validator = jsonschema::validator_for(&schema("report.schema.json")).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");

    let report: adfd_core::ThreatReport = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(adfd_core::io::to_json(&report), r.stdout);
    for input in ["spec", "model", "rules"] {
        assert!(report.metadata.inputs[input].starts_with("sha256:"));
    }
}

#[test]
fn text_and_structured_reports_agree() {
    let text = adfd(&report_args("text").iter().map(String::as_str).collect::<Vec<_>>()).stdout;
    let structured = adfd(&report_args("structured").iter().map(String::as_str).collect::<Vec<_>>()).stdout;
    let report: adfd_core::ThreatReport = serde_json::from_str(&structured).unwrap();
    for rule in &report.rules {
        let header = text
            .lines()
            .position(|l| l.starts_with(&format!("{} ", rule.rule_id)))
            .unwrap();
        let lines: Vec<&str> = text.lines().skip(header + 1).take_while(|l| l.starts_with("  ")).collect();
        let matches: Vec<&str> = lines.iter().filter_map(|l| l.strip_prefix("  match ")).collect();
        assert_eq!(matches.len(), rule.matches.len(), "{}", rule.rule_id);
        for (line, m) in matches.iter().zip(&rule.matches) {
            let focus = m.focus.as_ref().map_or("_".to_owned(), |f| f.to_string());
            assert!(line.starts_with(&format!("{focus}: ")), "{line}");
            for a in &m.affected {
                assert!(line.contains(&a.to_string()), "{line} lacks {a}");
            }
        }
    }
}

#[test]
fn input_schemas_accept_fixtures() {
    for (schema_name, file) in [
        ("spec.schema.json", "spec.json"),
        ("model.schema.json", "model.json"),
        ("catalog.schema.json", "rules.json"),
    ] {
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture(file)).unwrap()).unwrap();
        let validator = jsonschema::validator_for(&schema(schema_name)).unwrap();
        assert!(validator.is_valid(&doc), "{file}");
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut args = report_args("structured");
    args.extend(["--out".to_owned(), out.to_string_lossy().into_owned()]);
    let r = adfd(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.contains("\"rule_id\": \"R1\""));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_adfd");
    let status = |args: &[&str]| Command::new(bin)
            .args(args)
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status().unwrap().code();
    assert_eq!(status(&["validate-spec", "--spec", &fixture("spec.json")]), Some(0));
    assert_eq!(status(&["no-such-command"]), Some(1));
    assert_eq!(status(&["validate-spec"]), Some(1));
    assert_eq!(status(&["--help"]), Some(0));
}
