use std::io::Write;

use dexp_harness::checks;
use dexp_harness::emit::{parse_json, write_csv, write_json, CSV_COLUMNS};
use dexp_harness::{audit, audit_all, run, Algorithm, Error, ScenarioSpec, Trace};

const SQUARE: &str = r#"
horizon = 200
seed = 42

[game]
kind = "square"

[discount]
type = "random"
lo = 0.5
hi = 1.0

[[experts]]
type = "noisy-oracle"
count = 3

[[experts]]
type = "switching-oracle"
period = 20
count = 2

[reality]
type = "adversarial"
"#;

fn spec(text: &str) -> ScenarioSpec {
    ScenarioSpec::from_toml_str(text).unwrap()
}

fn json_bytes(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::new();
    write_json(trace, Some(&audit_all(trace)), &mut out).unwrap();
    out
}

#[test]
fn fixed_seed_replays_byte_for_byte() {
    for algo in [Algorithm::Aad, Algorithm::Convex] {
        let a = run(&spec(SQUARE), algo).unwrap();
        let b = run(&spec(SQUARE), algo).unwrap();
        assert_eq!(json_bytes(&a), json_bytes(&b));
    }
    let mut other = spec(SQUARE);
    other.seed = 43;
    assert_ne!(
        json_bytes(&run(&spec(SQUARE), Algorithm::Aad).unwrap()),
        json_bytes(&run(&other, Algorithm::Aad).unwrap())
    );
}

#[test]
fn horizon_one_gives_one_record() {
    let s = spec(&SQUARE.replace("horizon = 200", "horizon = 1"));
    let trace = run(&s, Algorithm::Aad).unwrap();
    assert_eq!(trace.records.len(), 1);
    assert_eq!(trace.records[0].t, 1);
    assert_eq!(trace.records[0].b_over_beta, 1.0);
}

#[test]
fn symmetric_experts_give_the_midpoint_first() {
    let text = r#"
        horizon = 1
        [game]
        kind = "square"
        [[experts]]
        type = "constant"
        value = 0.0
        [[experts]]
        type = "constant"
        value = 1.0
    "#;
    let trace = run(&spec(text), Algorithm::Aad).unwrap();
    assert!((trace.records[0].prediction - 0.5).abs() < 1e-12);
}

#[test]
fn every_engine_passes_its_own_audit() {
    let fdfd = SQUARE.replace("kind = \"square\"", "kind = \"square\"\nbinary = true");
    for (text, algo) in [
        (SQUARE.to_string(), Algorithm::Aad),
        (SQUARE.to_string(), Algorithm::Convex),
        (fdfd, Algorithm::Fdfd),
    ] {
        let summary = audit_all(&run(&spec(&text), algo).unwrap());
        assert!(!summary.is_empty());
        assert!(summary.passed(), "{algo}: {summary}");
    }
}

#[test]
fn corrupted_weight_is_reported_at_its_step() {
    let text = format!("{SQUARE}\n[fault]\nstep = 120\nexpert = 0\ndelta = 5.0\n");
    let summary = audit_all(&run(&spec(&text), Algorithm::Aad).unwrap());
    assert!(!summary.passed());
    let weights = summary.get(checks::AAD_WEIGHTS).unwrap();
    assert_eq!(weights.first_violation, Some(120));
    assert_eq!(
        summary.get(checks::AAD_IDENTITY).unwrap().first_violation,
        Some(120)
    );

    let summary = audit_all(&run(&spec(&text), Algorithm::Convex).unwrap());
    assert_eq!(
        summary
            .get(checks::CONVEX_IDENTITY)
            .unwrap()
            .first_violation,
        Some(120)
    );
}

#[test]
fn audit_selects_checks() {
    let trace = run(&spec(SQUARE), Algorithm::Aad).unwrap();
    assert!(audit(&trace, &[]).is_empty());
    let one = audit(&trace, &[checks::AAD_BOUND]);
    assert_eq!(one.theorems.len(), 1);
    assert_eq!(one.theorems[0].checks, 200);
    assert!(one.theorems[0].min_slack >= -1e-9);
    let missing = audit(&trace, &["no-such-check"]);
    assert_eq!(missing.theorems[0].checks, 0);
}

#[test]
fn incompatible_pairings_are_configuration_errors() {
    let absolute = SQUARE.replace("kind = \"square\"", "kind = \"absolute\"");
    assert!(matches!(
        run(&spec(&absolute), Algorithm::Aad),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        run(&spec(SQUARE), Algorithm::Fdfd),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        run(&spec(SQUARE), Algorithm::Linreg),
        Err(Error::Config(_))
    ));
    let log = SQUARE.replace("kind = \"square\"", "kind = \"log\"");
    assert!(matches!(
        run(&spec(&log), Algorithm::Convex),
        Err(Error::Config(_))
    ));
    assert!(run(&spec(&log), Algorithm::Aad).is_ok());
}

#[test]
fn csv_has_the_fixed_header_and_one_row_per_step() {
    let trace = run(&spec(SQUARE), Algorithm::Convex).unwrap();
    let mut out = Vec::new();
    write_csv(&trace, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_COLUMNS.join(","));
    assert_eq!(
        lines[0],
        "t,alpha,beta,B_over_beta,learner_loss,best_expert_loss,bound,slack"
    );
    assert_eq!(lines.len(), 201);

    let empty = Trace {
        algorithm: Algorithm::Aad,
        seed: 0,
        records: Vec::new(),
    };
    let mut out = Vec::new();
    write_csv(&empty, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 1);
}

#[test]
fn json_round_trip_reproduces_the_trace() {
    let trace = run(&spec(SQUARE), Algorithm::Aad).unwrap();
    let doc = parse_json(std::str::from_utf8(&json_bytes(&trace)).unwrap()).unwrap();
    assert_eq!(doc.schema_version, "1");
    assert_eq!(doc.trace, trace);
    assert_eq!(doc.summary.unwrap(), audit_all(&trace));
    assert!(parse_json(
        &String::from_utf8(json_bytes(&trace))
            .unwrap()
            .replace("\"schema_version\": \"1\"", "\"schema_version\": \"2\"")
    )
    .is_err());
}

#[test]
fn non_finite_values_survive_json() {
    let text = r#"
        horizon = 3
        [game]
        kind = "log"
        [[experts]]
        type = "constant"
        value = 0.0
        [[experts]]
        type = "constant"
        value = 0.5
        [reality]
        type = "adversarial"
    "#;
    let trace = run(&spec(text), Algorithm::Aad).unwrap();
    assert!(trace
        .records
        .iter()
        .any(|r| r.comparator_losses[0].is_infinite()));
    let doc = parse_json(std::str::from_utf8(&json_bytes(&trace)).unwrap()).unwrap();
    assert_eq!(doc.trace, trace);
}

#[test]
fn regression_reads_csv_streams() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("stream.csv");
    let mut f = std::fs::File::create(&data).unwrap();
    writeln!(f, "x1,x2,y,alpha").unwrap();
    for t in 0..40 {
        let x1 = (t as f64 * 0.37).sin();
        let x2 = (t as f64 * 0.11).cos();
        let y = (0.5 + 0.3 * x1 - 0.2 * x2).clamp(0.0, 1.0);
        writeln!(f, "{x1},{x2},{y},{}", if t % 10 == 9 { 0.3 } else { 0.95 }).unwrap();
    }
    drop(f);
    let config = dir.path().join("scenario.toml");
    std::fs::write(
        &config,
        "horizon = 40\n[game]\nkind = \"square\"\n[reality]\ntype = \"csv\"\npath = \"stream.csv\"\n[regression]\nridge = 1.0\ncomparators = 10\n",
    )
    .unwrap();
    let s = ScenarioSpec::load(&config).unwrap();
    for algo in [Algorithm::Linreg, Algorithm::MixedA] {
        let trace = run(&s, algo).unwrap();
        assert_eq!(trace.records.len(), 40);
        assert_eq!(trace.records[9].alpha, 0.3);
        assert!(audit_all(&trace).passed());
    }

    let mut short = s.clone();
    short.horizon = 41;
    assert!(matches!(
        run(&short, Algorithm::Linreg),
        Err(Error::Config(_))
    ));

    std::fs::write(&data, "x1,z,y\n1,2,0.5\n").unwrap();
    assert!(run(&s, Algorithm::Linreg).is_err());
}

#[test]
fn sparse_regression_audits_keep_the_last_step() {
    let text = r#"
        horizon = 25
        [game]
        kind = "square"
        [regression]
        dim = 2
        ridge = 0.5
        kernel = { type = "rbf", sigma = 1.0 }
        audit_every = 10
    "#;
    let trace = run(&spec(text), Algorithm::Kernreg).unwrap();
    let audited: Vec<usize> = trace
        .records
        .iter()
        .filter(|r| !r.checks.is_empty())
        .map(|r| r.t)
        .collect();
    assert_eq!(audited, vec![10, 20, 25]);
    assert!(audit_all(&trace).passed());
}
