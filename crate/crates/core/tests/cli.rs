mod common;

use std::process::Command;

use common::fixture_path;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn tfsd(args: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_tfsd"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: o.status.code().expect("exit code"),
        out: String::from_utf8(o.stdout).unwrap(),
        err: String::from_utf8(o.stderr).unwrap(),
    }
}

fn hier() -> String {
    fixture_path("paper.hier")
}

fn avm(name: &str) -> String {
    fixture_path(&format!("paper/{name}.avm"))
}

fn disc(name: &str) -> String {
    fixture_path(&format!("discourse/{name}.disc"))
}

fn op(args: &[&str]) -> Run {
    let h = hier();
    let mut all = vec!["--hierarchy", h.as_str(), "op"];
    all.extend_from_slice(args);
    tfsd(&all)
}

#[test]
fn check_reports_the_hierarchy() {
    let r = tfsd(&["--hierarchy", &hier(), "check"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out, "ok: 27 types, 4 features, 378 generalization entries\n");

    let r = tfsd(&["--hierarchy", &hier(), "check", "--dump"]);
    assert!(r.out.contains("\nhate like -> emot_att\n"));
    assert!(r.out.contains("\nhannah jessy -> female\n"));
    let lines: Vec<_> = r.out.lines().skip(1).collect();
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);

    let r = tfsd(&["--hierarchy", &hier(), "--json", "check"]);
    assert_eq!(
        r.out,
        "{\"features\":4,\"gen_entries\":378,\"op\":\"check\",\"types\":27}\n"
    );
}

#[test]
fn check_rejects_bad_hierarchies() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.hier");
    std::fs::write(&dup, "top sub [a, b].\na intro [f:top].\nb intro [f:top].\n").unwrap();
    let r = tfsd(&["--hierarchy", dup.to_str().unwrap(), "check"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("feature F introduced by both `a` and `b`"), "{}", r.err);

    let gen = dir.path().join("gen.hier");
    std::fs::write(&gen, "top sub [x, y].\nx sub [a, b].\ny sub [a, b].\n").unwrap();
    let r = tfsd(&["--hierarchy", gen.to_str().unwrap(), "check"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("`a` and `b` have no unique generalization"), "{}", r.err);

    let r = tfsd(&["--hierarchy", "/nonexistent/x.hier", "check"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("/nonexistent/x.hier"));
}

#[test]
fn punion_on_the_strict_sloppy_pair() {
    let r = op(&["punion", &avm("ex15_target"), &avm("ex15_source")]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains(
        "2 results\n\
         [1] [like AGENT:#1[hannah] PATIENT:[brother BROTHER-OF:#1]]\n\
         [2] [like AGENT:[hannah] PATIENT:[brother BROTHER-OF:[jessy]]]\n"
    ));
    let r = op(&["punion", &avm("ex15_target"), &avm("ex15_source"), "--count-only"]);
    assert_eq!(r.out, "2\n");
}

#[test]
fn other_operations() {
    let r = op(&["gen", &avm("ex28"), &avm("ex29")]);
    assert!(r.out.ends_with("[1] [agentive AGENT:[female]]\n"), "{}", r.out);
    let r = op(&["unify", &avm("ex05a"), &avm("ex05a")]);
    assert!(r.out.ends_with("[1] [like AGENT:[hannah] PATIENT:[beetle]]\n"));
    let r = op(&["unify", &avm("ex05a"), &avm("ex05d")]);
    assert_eq!(r.code, 0);
    assert!(r.out.ends_with("FAIL\n"));
    let r = op(&["mscd", &avm("ex05a"), &avm("ex05d")]);
    assert!(r.out.ends_with("[1] [emot_att AGENT:[human] PATIENT:[beetle]]\n"));
    let r = op(&["skeptical", &avm("ex15_target"), &avm("ex15_source")]);
    assert!(r
        .out
        .ends_with("[1] [like AGENT:[hannah] PATIENT:[brother BROTHER-OF:[female]]]\n"));
    let r = op(&["unify", "[hate AGENT:[thomas]]", "[emot_att PATIENT:[beetle]]"]);
    assert!(r.out.ends_with("[1] [hate AGENT:[thomas] PATIENT:[beetle]]\n"));
}

#[test]
fn atoms_and_json_records() {
    let r = op(&["punion", &avm("ex05b"), &avm("ex05a"), "--atoms"]);
    assert!(r.out.ends_with(
        "[1] [like AGENT:[thomas] PATIENT:[beetle]]\n      (*/like)\n      (AGENT/thomas)\n      (PATIENT/beetle)\n"
    ));
    let h = hier();
    let r = tfsd(&[
        "--hierarchy", &h, "--json", "op", "punion", &avm("ex15_target"), &avm("ex15_source"), "--atoms",
    ]);
    let lines: Vec<serde_json::Value> = r.out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["op"], "punion");
    assert_eq!(lines[0]["index"], 1);
    assert_eq!(lines[0]["avm"], "[like AGENT:#1[hannah] PATIENT:[brother BROTHER-OF:#1]]");
    assert_eq!(lines[0]["atoms"][3], "AGENT = PATIENT|BROTHER-OF");
    assert_eq!(lines[1]["index"], 2);
    assert_eq!(lines[2]["count"], 2);
}

#[test]
fn decompose_prints_atoms() {
    let h = hier();
    let r = tfsd(&["--hierarchy", &h, "decompose", &avm("ex15_source")]);
    assert_eq!(
        r.out,
        "[like AGENT:#1[jessy] PATIENT:[brother BROTHER-OF:#1]]\n4 atoms\n  (*/like)\n  (AGENT/jessy)\n  (PATIENT/brother)|(BROTHER-OF/jessy)\n  AGENT = PATIENT|BROTHER-OF\n"
    );
    let r = tfsd(&["--hierarchy", &h, "decompose", "[bot]"]);
    assert_eq!(r.out, "[bot]\n0 atoms\n");
    let r = tfsd(&["--hierarchy", &h, "--json", "decompose", &avm("ex05a")]);
    assert_eq!(
        r.out,
        "{\"atoms\":[\"(*/like)\",\"(AGENT/hannah)\",\"(PATIENT/beetle)\"],\"avm\":\"[like AGENT:[hannah] PATIENT:[beetle]]\",\"index\":0,\"op\":\"decompose\"}\n"
    );
}

#[test]
fn parse_fixture_discourses() {
    for (name, resolved) in [
        ("1a", "[like AGENT:[thomas] PATIENT:[beetle]]"),
        ("1b", "[like AGENT:[hannah] PATIENT:[caterpillar]]"),
        ("1c", "[hate AGENT:[thomas] PATIENT:[beetle]]"),
    ] {
        let r = tfsd(&["parse", &disc(name)]);
        assert_eq!(r.code, 0);
        assert!(r.out.starts_with("1 reading\n\nreading 1: list(1, 2)\n"), "{name}: {}", r.out);
        assert!(r.out.contains(&format!("  2 {}: {resolved}\n", match name {
            "1a" => "so_does_thomas",
            "1b" => "she_also_likes_caterpillars",
            _ => "thomas_hates_them",
        })));
    }
    let r = tfsd(&["parse", &disc("14")]);
    assert!(r.out.starts_with("2 readings\n"));

    let r = tfsd(&["parse", &disc("8")]);
    assert!(!r.out.contains("list(1, contrast(2, 3))"));
    let r = tfsd(&["parse", &disc("8"), "--all-trees"]);
    assert!(r.out.contains(
        "reading 2: list(1, contrast(2, 3))\n  list(1, contrast(2, 3))\n    consem: [hate AGENT:[jessy] PATIENT:[bee]]\n    schema: [emot_att AGENT:[human] PATIENT:[insect]]\n"
    ), "{}", r.out);
    let r = tfsd(&["parse", &disc("8"), "--all-trees", "--mscd-schema"]);
    assert!(r.out.contains("    schema: [like AGENT:[hannah] PATIENT:[insect]]\n"));
}

#[test]
fn parse_options() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("odd.lex"),
        "a \"Thomas likes ants.\" := [like AGENT:[thomas] PATIENT:[ant]] .\n\
         b \"Jessy laughs.\" := [laugh AGENT:[jessy]] .\n",
    )
    .unwrap();
    let d = dir.path().join("odd.disc");
    std::fs::write(&d, format!("use hierarchy {};\nuse lexicon odd.lex;\na\nb @and\n", hier())).unwrap();
    let r = tfsd(&["parse", d.to_str().unwrap()]);
    assert_eq!((r.code, r.out.as_str()), (0, "0 readings\n"));
    let r = tfsd(&["parse", d.to_str().unwrap(), "--permissive-schema"]);
    assert!(r.out.starts_with("1 reading\n"));

    let r = tfsd(&["parse", &disc("19"), "--cascade"]);
    assert!(r.out.starts_with("6 readings\n"));
    let r = tfsd(&["--json", "parse", &disc("19"), "--cascade"]);
    assert_eq!(r.out.lines().last(), Some("{\"count\":6,\"op\":\"cascade\"}"));

    // An explicit lexicon overrides the discourse file's own.
    let lex = fixture_path("paper_examples.lex");
    let r = tfsd(&["--lexicon", &lex, "parse", d.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("clause `a` is not in the lexicon"), "{}", r.err);
}

#[test]
fn json_parse_is_deterministic() {
    let first = tfsd(&["--json", "parse", &disc("8"), "--all-trees"]).out;
    assert!(first.lines().count() > 1);
    for _ in 0..4 {
        assert_eq!(tfsd(&["--json", "parse", &disc("8"), "--all-trees"]).out, first);
    }
}

#[test]
fn exit_codes() {
    let r = op(&["punion", &avm("ex05b"), &avm("ex05a"), "--count-only"]);
    assert_eq!(r.code, 0);
    let h = hier();
    let r = tfsd(&["--hierarchy", &h, "--max-atoms", "2", "op", "punion", &avm("ex05b"), &avm("ex05a")]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("3 atoms exceed the search limit of 2"));
    let r = op(&["punion", "/no/such.avm", &avm("ex05a")]);
    assert_eq!(r.code, 1);
    let r = op(&["punion", "[like AGENT:[nobody]]", &avm("ex05a")]);
    assert_eq!(r.code, 1);
    let r = tfsd(&["parse", "/no/such.disc"]);
    assert_eq!(r.code, 1);
    let r = tfsd(&["bogus"]);
    assert_eq!(r.code, 1);
}

#[test]
fn timing_goes_to_stderr() {
    let h = hier();
    let plain = tfsd(&["--hierarchy", &h, "check"]);
    let timed = tfsd(&["--hierarchy", &h, "check", "--timing"]);
    assert_eq!(plain.out, timed.out);
    assert!(timed.err.starts_with("elapsed: "));
    assert!(plain.err.is_empty());
}
