use deslok::format::{parse_model, serialize_model};
use deslok::models::transfer_line;
use deslok::report::Report;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn deslok(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deslok"))
        .args(args)
        .env("DESLOK_COLOR", "0")
        .output()
        .unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fx(rel: &str) -> String {
    fixtures().join(rel).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn demo_reports_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    for case in ["sharedresource", "guideway", "transferline"] {
        let report = dir.path().join(format!("{case}.json"));
        let o = deslok(&["demo", case, "--report", report.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let got = std::fs::read_to_string(&report).unwrap();
        let want = std::fs::read_to_string(fixtures().join(format!("{case}.report.json"))).unwrap();
        assert_eq!(got, want, "{case}");
        let parsed = Report::from_json(&got).unwrap();
        assert_eq!(parsed.schema, deslok::report::SCHEMA_VERSION);
        assert_eq!(parsed.to_json(), got);
    }
}

#[test]
fn assert_expected_exit_codes() {
    let o = deslok(&["demo", "guideway", "--assert-expected"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("verdict: stateLocalizable=false eventLocalizable=true"));

    // every expected transfer-line result is reproduced except the
    // non-decomposability claim
    let o = deslok(&["demo", "transferline", "--assert-expected"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("verdict: stateLocalizable=true eventLocalizable=true"));
    let failing: Vec<&str> = out.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failing, vec!["FAIL decomposable: got true, expected false"]);

    let o = deslok(&["demo", "sharedresource", "--assert-expected"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("PASS stateLocalizable"));
}

#[test]
fn output_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4", "4"] {
        let report = dir.path().join(format!("r{}.json", outputs.len()));
        let o = Command::new(env!("CARGO_BIN_EXE_deslok"))
            .args(["demo", "transferline", "--report", report.to_str().unwrap()])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        outputs.push((o.stdout, std::fs::read(&report).unwrap()));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn pipeline_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cs = transfer_line(3, 1).unwrap();
    let mut parts = Vec::new();
    for c in &cs.components {
        let p = d.join(format!("{}.des", c.name()));
        std::fs::write(&p, serialize_model(c)).unwrap();
        parts.push(p.display().to_string());
    }
    let out = d.join("out");
    let out_s = out.to_str().unwrap();
    let mut args = vec!["sync", "--name", "plant", "--out", out_s];
    args.extend(parts.iter().map(String::as_str));
    assert_eq!(deslok(&args).status.code(), Some(0));
    let plant = out.join("plant.des").display().to_string();

    let o = deslok(&["supcon", &plant, &fx("transferline/transferline_spec.des"), "--out", out_s]);
    assert!(stdout(&o).contains("28 states, 65 transitions"), "{}", stderr(&o));
    let sup = out.join("plant_sup.des").display().to_string();
    let o = deslok(&["check", "equivalence", &sup, &fx("transferline/transferline_sup.des")]);
    assert_eq!(stdout(&o).trim(), "true");
    let o = deslok(&["check", "controllability", &plant, &sup, "--assert-expected"]);
    assert_eq!(o.status.code(), Some(0));

    let o = deslok(&["supreduce", &plant, &sup, "--out", out_s]);
    assert!(stdout(&o).contains("8 states (from 28)"));
    let o = deslok(&["localize", &plant, &sup, "--out", out_s]);
    assert!(stdout(&o).contains("LOC_TU: 2 states"));
    let tu = parse_model(&std::fs::read_to_string(out.join("loc_TU.des")).unwrap()).unwrap();
    assert_eq!(tu.automaton.state_count(), 2);

    let report = d.join("eventred.json");
    let o = deslok(&["eventred", &plant, &sup, "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = Report::from_json(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r.state_counts["RSUP"], 8);
    assert_eq!(r.relevant["LOC_M1"].len(), 3);
}

#[test]
fn check_predicates() {
    let plant = fx("guideway/guideway_plant.des");
    let sup = fx("guideway/guideway_sup.des");
    let ok = |args: &[&str]| stdout(&deslok(args)).trim().to_owned();
    let observable = "10,11,12,14,15,20,21,22,24,25";
    let spec = fx("guideway/guideway_spec.des");
    let dir = tempfile::tempdir().unwrap();
    let o = deslok(&["sync", "--name", "c", "--out", dir.path().to_str().unwrap(), &plant, &spec]);
    assert_eq!(o.status.code(), Some(0));
    let c = dir.path().join("c.des").display().to_string();
    assert_eq!(
        ok(&["check", "observability", &plant, &sup, "--observable", observable, "--mode", "relative", "--ambient", &c]),
        "true"
    );
    assert_eq!(ok(&["check", "observability", &plant, &sup, "--observable", observable]), "true");
    assert_eq!(
        ok(&["check", "decomposability", &plant, &sup, "--alphabets", "11,13,14,15,20,21,22,24,25;10,11,12,14,15,21,23,24,25"]),
        "true"
    );
    let o = deslok(&["check", "normality", &plant, &sup, "--observable", "11", "--assert-expected"]);
    assert_eq!(stdout(&o).trim(), "false");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.des");
    std::fs::write(&bad, "des bad\nstates 2\ninitial 0\nevent 1 c\ntrans 0 7 1\n").unwrap();
    let o = deslok(&["supcon", bad.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 5") && err.contains("event 7"), "{err}");

    assert_eq!(deslok(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(deslok(&["randtest", "--seeds", "9..3"]).status.code(), Some(2));
    assert_eq!(deslok(&["demo", "transferline", "--caps", "0,1"]).status.code(), Some(2));
    assert_eq!(deslok(&["--help"]).status.code(), Some(0));
}

#[test]
fn randtest_orders_by_seed() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = deslok(&["randtest", "--seeds", "0..16", "--report", report.to_str().unwrap()]);
    // seed 17 is the first reduction theorem counterexample
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("17 seeds"));
    let r = Report::from_json(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.seed.map(|s| (s.start, s.end)), Some((0, 16)));
    let seeds: Vec<u64> = r.extra["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, (0..=16).collect::<Vec<_>>());

    let o = deslok(&["randtest", "--seeds", "17..17"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("seed 17: 1 reduction theorem counterexample"));
}

#[test]
fn odd_convention_warning_on_stderr() {
    let o = deslok(&["check", "equivalence", &fx("transferline_plain.des"), &fx("transferline/transferline_plant.des")]);
    assert_eq!(stdout(&o).trim(), "true");
    assert_eq!(stderr(&o).matches("no c/u flag").count(), 7);
}
