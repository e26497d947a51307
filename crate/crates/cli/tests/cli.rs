use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn orfoil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orfoil")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn learn(task: &str, extra: &[&str]) -> Output {
    let kb = data("example1.okb");
    let ex = data(&format!("{task}.oex"));
    let bias = data(&format!("{task}.obias"));
    let mut args = vec!["learn", "--kb", &kb, "--examples", &ex, "--bias", &bias];
    args.extend_from_slice(extra);
    orfoil(&args)
}

fn rule_lines(text: &str) -> Vec<String> {
    text.lines().filter(|l| !l.starts_with('%') && !l.trim().is_empty()).map(str::to_string).collect()
}

#[test]
fn learn_loner_and_likes() {
    let o = learn("loner", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rule_lines(&stdout(&o)), ["LONER(X) :- famous(X), UNMARRIED(X)."]);

    let o = learn("likes", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rule_lines(&stdout(&o)), ["LIKES(X,Y) :- meets(X,Z,Y), RICH(Z)."]);
}

#[test]
fn text_output_is_a_rule_file() {
    use orfoil::parser::{parse_kb, parse_rule};
    let kb = parse_kb(&std::fs::read_to_string(data("example1.okb")).unwrap()).unwrap();
    let out = stdout(&learn("likes", &[]));
    for line in rule_lines(&out) {
        parse_rule(&line, &kb.signature).unwrap();
    }
    assert!(out.contains("% pos 2 neg 0"));
}

#[test]
fn json_report_matches_schema_and_text() {
    let schema: Value = serde_json::from_str(include_str!("../schema/run-report.schema.json")).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    for task in ["loner", "likes"] {
        let o = learn(task, &["--format", "json"]);
        assert_eq!(o.status.code(), Some(0));
        let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(compiled.is_valid(&report), "{report}");
        let rules: Vec<String> =
            report["rules"].as_array().unwrap().iter().map(|r| r["rule"].as_str().unwrap().to_string()).collect();
        assert_eq!(rules, rule_lines(&stdout(&learn(task, &[]))));
    }
}

#[test]
fn json_report_is_deterministic_apart_from_timing() {
    let run = |jobs: &str| {
        let mut v: Value =
            serde_json::from_str(&stdout(&learn("likes", &["--format", "json", "--jobs", jobs]))).unwrap();
        v.as_object_mut().unwrap().remove("timing_ms");
        v["params"].as_object_mut().unwrap().remove("jobs");
        v
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("4"));
}

#[test]
fn out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.orl");
    let p = path.display().to_string();
    let o = learn("loner", &["--out", &p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("LONER(X) :- famous(X), UNMARRIED(X)."));
}

#[test]
fn partial_result_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let ex = dir.path().join("hard.oex");
    // with only famous/1 available nothing separates Mary from Joe
    std::fs::write(&ex, "+ LONER(Mary)\n- LONER(Joe)\n").unwrap();
    let bias = dir.path().join("b.obias");
    std::fs::write(&bias, "datalog+ = famous/1\n").unwrap();
    let kb = data("example1.okb");
    let o =
        orfoil(&["learn", "--kb", &kb, "--examples", &ex.display().to_string(), "--bias", &bias.display().to_string()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("% uncovered LONER(Mary)"));
    assert!(stderr(&o).contains("LONER(Mary)"));
}

#[test]
fn malformed_kb_exits_1_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("bad.okb");
    std::fs::write(&kb, "pred p/1.\n#facts\np(a,b).\n").unwrap();
    let kb = kb.display().to_string();
    let o = orfoil(&["learn", "--kb", &kb, "--examples", &data("loner.oex"), "--bias", &data("loner.obias")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!("{kb}:3:1:")), "{}", stderr(&o));
}

#[test]
fn missing_file_and_bad_arguments_exit_1() {
    let o = learn("nonexistent", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(orfoil(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(orfoil(&["--help"]).status.code(), Some(0));
}

#[test]
fn budget_exceeded_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("even.okb");
    std::fs::write(&kb, "pred p/1.\npred q/1.\npred d/1.\n#rules\np(X) :- d(X), not q(X).\nq(X) :- d(X), not p(X).\n#facts\nd(a). d(b). d(c).\n").unwrap();
    let kb = kb.display().to_string();
    let o = orfoil(&["query", "--kb", &kb, "--atom", "p(a)", "--choice-budget", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = orfoil(&["query", "--kb", &kb, "--atom", "p(a)"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "not-entailed"));
}

fn check(rule: &str, example: &str) -> Output {
    orfoil(&["check", "--kb", &data("example1.okb"), "--rule", rule, "--example", example])
}

#[test]
fn check_verdicts() {
    assert_eq!(stdout(&check("LONER(X) :- famous(X).", "LONER(Mary)")).trim(), "covers");
    let o = check("LONER(X) :- famous(X), UNMARRIED(X).", "LONER(Paul)");
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "does-not-cover"));
    let o = check("LONER(X) :- rich(X).", "LONER(Mary)");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--rule:1:13"), "{}", stderr(&o));
    assert_eq!(check("LONER(X) :- famous(Y).", "LONER(Mary)").status.code(), Some(1));
}

fn compare(r1: &str, r2: &str) -> String {
    stdout(&orfoil(&["compare", "--kb", &data("example1.okb"), "--rule1", r1, "--rule2", r2])).trim().to_string()
}

#[test]
fn compare_verdicts() {
    let h1 = "LONER(X) :- famous(X).";
    let h2 = "LONER(X) :- famous(X), UNMARRIED(X).";
    let h3 = "LONER(X) :- famous(X), not happy(X).";
    assert_eq!(compare(h1, h2), "strictly-more-general");
    assert_eq!(compare(h2, h1), "strictly-less-general");
    assert_eq!(compare(h2, h3), "incomparable");
    assert_eq!(compare(h3, h3), "equivalent");
}

fn refine(bias: &str, rule: &str, depth: &str) -> Vec<String> {
    let o = orfoil(&["refine", "--kb", &data("example1.okb"), "--bias", bias, "--rule", rule, "--depth", depth]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    stdout(&o).lines().map(str::to_string).collect()
}

#[test]
fn refine_listing() {
    let lines = refine(&data("likes.obias"), "LIKES(X,Y) :- meets(X,Z,Y).", "1");
    assert_eq!(lines[0], "LIKES(X,Y) :- meets(X,Z,Y).");
    for (label, child) in [
        ("AddDataLit_B+", "LIKES(X,Y) :- meets(X,Z,Y), happy(X)."),
        ("AddOntoLit_B", "LIKES(X,Y) :- meets(X,Z,Y), RICH(Z)."),
        ("AddOntoLit_B", "LIKES(X,Y) :- meets(X,Z,Y), LOVES(X,Z)."),
        ("AddOntoLit_B", "LIKES(X,Y) :- meets(X,Z,Y), WANTS-TO-MARRY(X,Z)."),
    ] {
        assert!(
            lines.iter().any(|l| l.split_whitespace().next() == Some(label) && l.ends_with(child)),
            "missing {label} {child}"
        );
    }
    let from_h4 = refine(&data("likes.obias"), "LIKES(X,Y) :- meets(X,Z,Y), LOVES(X,Z).", "1");
    assert!(from_h4.iter().any(|l| l.trim_start().starts_with("SpecOntoLit_B") && l.ends_with("WANTS-TO-MARRY(X,Z).")));

    assert_eq!(refine(&data("likes.obias"), "LIKES(X,Y).", "0"), ["LIKES(X,Y)."]);
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.obias");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(refine(&empty.display().to_string(), "LIKES(X,Y).", "2"), ["LIKES(X,Y)."]);
}

#[test]
fn query_verdicts() {
    let q = |atom: &str| orfoil(&["query", "--kb", &data("example1.okb"), "--atom", atom]);
    assert_eq!(stdout(&q("famous(Mary)")).trim(), "entailed");
    assert_eq!(stdout(&q("scientist(Mary)")).trim(), "not-entailed");
    // every model gives Mary an anonymous suitor, so `happy` follows from the rule
    assert_eq!(stdout(&q("happy(Mary)")).trim(), "entailed");
    assert_eq!(stdout(&q("happy(Joe)")).trim(), "not-entailed");
    assert_eq!(q("LONER(Mary)").status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("incons.okb");
    std::fs::write(&kb, "pred p/1.\npred d/1.\n#rules\np(X) :- d(X), not p(X).\n#facts\nd(a).\n").unwrap();
    let o = orfoil(&["query", "--kb", &kb.display().to_string(), "--atom", "d(a)"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "inconsistent-kb"));
}
