use std::path::PathBuf;
use std::process::{Command, Output};

use matchcert::examples;
use matchcert::io::parse_market;
use matchcert::market::{break_ties, tie_broken_ordinal};
use matchcert::rational::frac;
use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "data",
        "markets",
        &format!("{name}.json"),
    ]
    .iter()
    .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    });
    (out.status.code().expect("exited"), v)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn shipped_market_files_match_the_library() {
    let load = |name: &str| parse_market(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
    assert_eq!(load("transfers-needed").cardinal(), Some(&examples::transfers_needed()));
    assert_eq!(load("tu-not-ntu").cardinal(), Some(&examples::tu_not_ntu()));
    assert_eq!(load("ntu-not-ex-ante").cardinal(), Some(&examples::ntu_not_ex_ante()));
    assert_eq!(load("ex-ante-not-tu").cardinal(), Some(&examples::ex_ante_not_tu()));
    assert_eq!(load("no-weight-repair").cardinal(), Some(&examples::no_weight_repair()));
    assert_eq!(
        load("mutual-first-choices").cardinal(),
        Some(&examples::mutual_first_choices(3))
    );
    let perturbed = break_ties(&examples::no_weight_repair(), &frac(1, 1000)).unwrap();
    assert_eq!(load("no-weight-repair-perturbed").cardinal(), Some(&perturbed));
    let ordinal = tie_broken_ordinal(&examples::transfers_needed());
    assert_eq!(load("transfers-needed-ordinal").ordinal(), Some(&ordinal));
}

#[test]
fn certify_reports_the_reference_patterns() {
    for (file, pattern) in [
        ("transfers-needed", "FTTTT"),
        ("tu-not-ntu", "FFTTT"),
        ("ntu-not-ex-ante", "FTFFT"),
        ("ex-ante-not-tu", "FFFTT"),
    ] {
        let (code, v) = json(&["certify", &data(file), "--matching", "identity"]);
        assert_eq!(code, 0, "{file}");
        assert_eq!(v["result"]["pattern"], pattern, "{file}");
        assert_eq!(v["result"]["verdicts"].as_array().unwrap().len(), 5);
        assert!(v["result"]["verdicts"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x["verified"] == true));
        assert_eq!(v["result"]["implication_violations"].as_array().unwrap().len(), 0);
        assert!(v["input_digest"].as_str().unwrap().starts_with("sha256:"));
    }
}

#[test]
fn deferred_acceptance_matchings_are_ntu_stable() {
    for file in [
        "tu-not-ntu",
        "ntu-not-ex-ante",
        "ex-ante-not-tu",
        "no-weight-repair-perturbed",
        "mutual-first-choices",
    ] {
        for side in ["da-men", "da-women"] {
            let (code, v) = json(&["certify", &data(file), "-m", side, "-c", "ntu"]);
            assert_eq!(code, 0, "{file} {side}");
            let verdicts = v["result"]["verdicts"].as_array().unwrap();
            assert_eq!(verdicts.len(), 1);
            assert_eq!(verdicts[0]["holds"], true, "{file} {side}");
        }
    }
}

#[test]
fn ties_need_an_explicit_rule() {
    let out = run(&["certify", &data("transfers-needed"), "-m", "da-men"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("--tie-break"));
    let (code, v) = json(&[
        "--tie-break",
        "lower-index",
        "certify",
        &data("transfers-needed"),
        "-m",
        "da-men",
    ]);
    assert_eq!(code, 0);
    assert!(v["notes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n.as_str().unwrap().contains("tie-breaking applied")));
    let out = run(&["enumerate-stable", &data("no-weight-repair")]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn parse_and_matching_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "U": [[0, 1], [1]], "V": [[0, 0], [0, 0]]}"#).unwrap();
    let out = run(&["certify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`U[2]`"), "{}", stderr(&out));

    let out = run(&["certify", &data("tu-not-ntu"), "-m", "1 1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("--matching"));
    let out = run(&["certify", &data("tu-not-ntu"), "-m", "1 2 3"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["certify", &data("tu-not-ntu"), "-c", "fairness"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--concepts"));
}

#[test]
fn enumerate_flags_isolated_and_optimal_members() {
    let (code, v) = json(&["enumerate-stable", &data("no-weight-repair-perturbed")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 1);
    let only = &v["result"]["stable"][0];
    assert_eq!(only["matching"], serde_json::json!([3, 4, 1, 2]));
    assert_eq!(only["isolated"], true);
    assert_eq!(only["man_optimal"], true);

    let (_, v) = json(&["enumerate-stable", &data("mutual-first-choices")]);
    assert_eq!(v["result"]["count"], 1);
}

#[test]
fn generated_gap_market_has_one_stable_matching() {
    let dir = tempfile::tempdir().unwrap();
    let market = dir.path().join("poa6.json");
    let (code, _) = json(&["poa", "--n", "6", "--market", market.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, v) = json(&["enumerate-stable", market.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 1);
}

#[test]
fn represent_no_trade_writes_a_certifying_market() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.json");
    let (code, v) = json(&[
        "represent",
        &data("transfers-needed-ordinal"),
        "--mode",
        "no-trade",
        "-m",
        "identity",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["checks"]["represents"], true);
    assert_eq!(v["result"]["checks"]["no_trade"][0]["holds"], true);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["provenance"]["construction"], "no-trade");
    assert_eq!(written["provenance"]["parameters"]["t"], "1");

    // The written file certifies on its own.
    let (code, v) = json(&["certify", out.to_str().unwrap(), "-c", "no-trade"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["verdicts"][0]["holds"], true);
}

#[test]
fn represent_refuses_unstable_targets() {
    let out = run(&[
        "represent",
        &data("transfers-needed-ordinal"),
        "--mode",
        "no-trade",
        "-m",
        "2 1 3",
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn represent_isolated_covers_every_isolated_matching() {
    let (code, v) = json(&["represent", &data("no-weight-repair-perturbed"), "--mode", "isolated"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["checks"]["represents"], true);
    let rows = v["result"]["checks"]["no_trade"].as_array().unwrap();
    assert!(!rows.is_empty());
    for row in rows.iter().filter(|r| r["isolated"] == true) {
        assert_eq!(row["holds"], true);
    }
}

#[test]
fn poa_single_size_meets_the_bound() {
    let (code, v) = json(&["poa", "--n", "4", "--g", "2", "--K", "10", "--epsilon", "1/100"]);
    assert_eq!(code, 0);
    let row = &v["result"]["rows"][0];
    assert_eq!(row["meets_bound"], true);
    assert_eq!(row["unique_stable"], true);
    assert_eq!(row["lower_bound"], "8/5");
}

#[test]
fn poa_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("gap.csv");
    let (code, v) = json(&["poa", "--n-list", "4,6,8", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 3);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("n,lower_bound,ratio"));
}

#[test]
fn poa_rejects_odd_sizes() {
    let out = run(&["poa", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n must be even"));
}

#[test]
fn audit_two_couples() {
    let (code, v) = json(&["audit-implications", "--n", "2", "--trials", "1000", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["violations"].as_array().unwrap().len(), 0);
    let total: u64 = v["result"]["patterns"]
        .as_object()
        .unwrap()
        .values()
        .map(|c| c.as_u64().unwrap())
        .sum();
    assert_eq!(total, 1000);
    let post_ante = v["result"]["conditionals"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["implication"] == "ex-post => ex-ante")
        .unwrap();
    assert_eq!(post_ante["antecedent_true"], post_ante["both_true"]);
    assert!(post_ante["antecedent_true"].as_u64().unwrap() > 0);
}

#[test]
fn audit_three_couples() {
    let (code, v) = json(&["audit-implications", "--n", "3", "--trials", "1000", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn audit_with_no_trials_is_empty() {
    let (code, v) = json(&["audit-implications", "--trials", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["patterns"].as_object().unwrap().len(), 0);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec!["--json", "certify", &data("ntu-not-ex-ante")],
        vec![
            "--json",
            "audit-implications",
            "--n",
            "3",
            "--trials",
            "200",
            "--seed",
            "11",
        ],
        vec!["--json", "poa", "--n-list", "4,6"],
        vec!["represent", &data("mutual-first-choices"), "--mode", "isolated"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn digest_tracks_the_input_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("copy.json");
    let original = std::fs::read_to_string(data("tu-not-ntu")).unwrap();
    std::fs::write(&copy, format!("{original}\n")).unwrap();
    let (_, a) = json(&["certify", &data("tu-not-ntu")]);
    let (_, b) = json(&["certify", copy.to_str().unwrap()]);
    assert_ne!(a["input_digest"], b["input_digest"]);
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn text_output_is_human_readable() {
    let out = run(&["certify", &data("ex-ante-not-tu")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("pattern FFFTT"));
    assert!(text
        .lines()
        .any(|l| l.starts_with("ex-ante") && l.contains("afriat-witness")));
}
