use std::path::PathBuf;
use std::process::Command;

use bnformat::corpus::load_all;
use bnformat::Outcome;
use bnformat_cli::{default_bounds, run_command};

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn bin(args: &[&str]) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_bnformat"))
        .args(args)
        .env_remove("BNFORMAT_BOUNDS")
        .output()
        .expect("binary runs");
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("bnformat").chain(args.iter().copied());
    let code = run_command(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn subst_is_image_finite() {
    let f = corpus("microchocs_subst.tss");
    let (code, out, err) = bin(&["check", &f, "--kind", "d4.id", "--strat", "Ssub"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("rule-format: pass"));
    assert!(out.contains("image finite"));
}

#[test]
fn axiom_with_free_label_fails() {
    let f = corpus("sigma0_axiom_fx.tss");
    let (code, out, _) = bin(&["check", &f, "--kind", "d1.id", "--strat", "S0"]);
    assert_eq!(code, 1);
    assert!(out.contains("bn-format: fail"));
}

#[test]
fn json_verdict() {
    let f = corpus("ex6_stratification.tss");
    let (code, out, _) = bin(&["--format", "json", "check", &f, "--kind", "d1.id", "--strat", "S0"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["outcome"], "pass");
}

#[test]
fn class_of_finitely_branching() {
    let (code, out, _) = bin(&["lattice", "--class", "i"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines, ["(i)", "(xii) ∧ (vi)", "(vii) ∧ (iv)", "(xii) ∧ (vii)"]);
}

#[test]
fn class_of_primitive_property_is_an_error() {
    let (code, _, err) = run(&["lattice", "--class", "iv"]);
    assert_eq!(code, 3);
    assert!(err.starts_with("error:"));
}

#[test]
fn lattice_lists_properties_and_edges() {
    let (code, out, _) = run(&["lattice"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.contains('[')).count(), 12);
    assert_eq!(out.lines().filter(|l| l.contains(" -> ")).count(), 12);
    let (_, json, _) = run(&["lattice", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 12);
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(run(&["bogus"]).0, 3);
    assert_eq!(run(&["check", "x.tss", "--kind", "d9.id", "--strat", "S"]).0, 3);
    let (code, _, err) = run(&["check", "/nonexistent.tss", "--kind", "d1.id", "--strat", "S"]);
    assert_eq!(code, 3);
    assert!(err.contains("cannot read"));
    assert_eq!(run(&["check", &corpus("family_premises.tss"), "--kind", "d1.id", "--strat", "Nope"]).0, 3);
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.tss");
    std::fs::write(&p, "signature { f: 1; }\nrule R: |- f(x, x) -[a]-> x;\n").unwrap();
    let (code, _, err) = run(&["check", p.to_str().unwrap(), "--kind", "d1.id", "--strat", "S"]);
    assert_eq!(code, 3);
    assert!(err.contains("bad.tss:2:"), "{err}");
}

#[test]
fn universe_limit_is_inconclusive() {
    let (code, out, err) = bin(&["derive", &corpus("microchocs_subst.tss")]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("universe too large"));
}

#[test]
fn derive_then_props() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("ex6.tsv");
    let f = corpus("ex6_stratification.tss");
    let (code, _, err) = run(&["derive", &f, "--height", "2", "--labels", "2", "-o", tsv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = run(&["props", tsv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 12);
    assert!(out.lines().next().unwrap().starts_with("(i) finitely branching: max "));
}

#[test]
fn transform_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("ex6_d4.tss");
    let (code, _, _) =
        run(&["transform", &corpus("ex6_stratification.tss"), "--kind", "d4.id", "-o", d.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&d).unwrap();
    let spec = bnformat::spec_file::parse_spec_file(&text).unwrap();
    assert_eq!(spec.tss.shape, bnformat::Shape::Dyadic("d4.id".parse().unwrap()));
}

#[test]
fn bounds_from_environment() {
    let b = default_bounds(Some("2,1,7")).unwrap();
    assert_eq!((b.height, b.labels, b.rounds), (2, 1, 7));
    let d = default_bounds(None).unwrap();
    assert_eq!((d.height, d.labels, d.rounds), (3, 3, 50));
    assert!(default_bounds(Some("3,3")).is_err());
    let o = Command::new(env!("CARGO_BIN_EXE_bnformat"))
        .args(["derive", &corpus("ex6_stratification.tss")])
        .env("BNFORMAT_BOUNDS", "x")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn every_registered_example_reproduces() {
    for case in load_all().unwrap() {
        let f = corpus(&format!("{}.tss", case.name));
        let e = &case.expected;
        let (code, out, err) = run(&["check", &f, "--kind", &e.kind, "--strat", &e.strat]);
        let want = match e.outcome {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 2,
        };
        assert_eq!(code, want, "{}: {out}{err}", case.name);
        if let Some(s) = &e.summary {
            assert!(out.lines().next().unwrap().contains(s.as_str()), "{}: {out}", case.name);
        }
        if let Some(l) = &e.legacy {
            let (code, out, _) = run(&["legacy", &f, "--eta", &l.eta, "--strat", &e.strat]);
            assert_eq!(code, if l.outcome == Outcome::Pass { 0 } else { 1 }, "{} legacy: {out}", case.name);
        }
    }
}
