//! One function per subcommand. Each returns an [`Outcome`]; `main` owns
//! printing, `--out` and the exit status.

use std::fmt::Write as _;
use std::path::Path;

use matchcert::audit::audit_implications;
use matchcert::certify::{applicable_implications, certify_all, Concept};
use matchcert::io::{market_json, parse_market, MarketDoc};
use matchcert::market::{ordinal_of, tie_broken_ordinal};
use matchcert::poa::{gap_growth_table, generate_poa_market, GrowthRow, PoaConfig};
use matchcert::rational::{parse as parse_rational, to_f64, to_text};
use matchcert::represent::{isolated_representation, no_trade_representation};
use matchcert::stable::{deferred_acceptance, enumerate_stable, is_isolated, Side};
use matchcert::verify::verify_verdict;
use matchcert::{CardinalMarket, Matching, OrdinalMarket, Rational};
use serde_json::{json, Value};

use crate::report::{digest, CliError, CliResult, ExitCode, Outcome};

pub struct Loaded {
    pub doc: MarketDoc,
    pub digest: String,
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let bytes = std::fs::read(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let text =
        String::from_utf8(bytes.clone()).map_err(|_| CliError::parse(format!("{} is not UTF-8", path.display())))?;
    Ok(Loaded {
        doc: parse_market(&text)?,
        digest: digest(&bytes),
    })
}

/// Strict ordinal reading of the document, breaking ties only when asked.
fn ordinal(doc: &MarketDoc, tie_break: bool, notes: &mut Vec<String>) -> CliResult<OrdinalMarket> {
    if let Some(o) = doc.ordinal() {
        return Ok(o.clone());
    }
    let m = doc.cardinal().expect("documents carry one reading at least");
    match ordinal_of(m) {
        Ok(o) => Ok(o),
        Err(e) if tie_break => {
            notes.push(format!("tie-breaking applied (lower index preferred): {e}"));
            Ok(tie_broken_ordinal(m))
        }
        Err(e) => Err(e.into()),
    }
}

fn one_based(m: &Matching) -> String {
    m.one_based()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Resolves `identity`, `da-men`, `da-women` or a 1-based permutation such
/// as `"1 3 2"` (commas also accepted).
fn resolve_matching(spec: &str, doc: &MarketDoc, tie_break: bool, notes: &mut Vec<String>) -> CliResult<Matching> {
    let n = doc.n();
    let m = match spec.trim() {
        "identity" => Matching::identity(n),
        "da-men" => deferred_acceptance(&ordinal(doc, tie_break, notes)?, Side::Men),
        "da-women" => deferred_acceptance(&ordinal(doc, tie_break, notes)?, Side::Women),
        list => {
            let partners = list
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::matching(format!("`--matching`: `{spec}` is not a list of 1-based indices")))?;
            if partners.len() != n {
                return Err(CliError::matching(format!(
                    "`--matching` names {} partners, the market has n = {n}",
                    partners.len()
                )));
            }
            Matching::from_one_based(&partners)
                .map_err(|_| CliError::matching(format!("`--matching`: `{spec}` is not a permutation of 1..{n}")))?
        }
    };
    if spec.trim().starts_with("da-") {
        notes.push(format!(
            "matching `{}` computed by deferred acceptance: {}",
            spec.trim(),
            one_based(&m)
        ));
    }
    Ok(m)
}

fn parse_concepts(spec: &str) -> CliResult<Vec<Concept>> {
    if spec == "all" {
        return Ok(Concept::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim) {
        let c = Concept::from_name(name).ok_or_else(|| {
            CliError::parse(format!(
                "`--concepts`: unknown concept `{name}` (expected all, no-trade, ntu, tu, ex-ante, ex-post)"
            ))
        })?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Compact one-line rendering of a serialized certificate.
fn describe(cert: &Value) -> String {
    let Value::Object(map) = cert else {
        return cert.to_string();
    };
    let kind = map.get("kind").and_then(Value::as_str).unwrap_or("?");
    let rest: Vec<String> = map
        .iter()
        .filter(|(k, _)| k.as_str() != "kind")
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    if rest.is_empty() {
        kind.to_string()
    } else {
        format!("{kind} {}", rest.join(" "))
    }
}

fn cardinal(doc: &MarketDoc, command: &str) -> CliResult<CardinalMarket> {
    doc.cardinal().cloned().ok_or_else(|| {
        CliError::parse(format!(
            "{command} needs cardinal utilities: fields `U` and `V` are missing"
        ))
    })
}

pub fn certify(file: &Path, matching: &str, concepts: &str, tie_break: bool) -> CliResult<Outcome> {
    let loaded = load(file)?;
    let concepts = parse_concepts(concepts)?;
    let market = cardinal(&loaded.doc, "certify")?;
    let mut notes = Vec::new();
    let mu = resolve_matching(matching, &loaded.doc, tie_break, &mut notes)?;
    let cert = certify_all(&market, &mu)?;
    let mut verdicts = Vec::new();
    let mut text = format!("matching: {}\n", one_based(&mu));
    for v in cert.verdicts.iter().filter(|v| concepts.contains(&v.concept)) {
        let verified = verify_verdict(&market, &mu, v);
        if let Err(why) = &verified {
            return Err(CliError {
                code: ExitCode::Failure,
                message: format!("internal error: {} certificate failed verification: {why}", v.concept),
            });
        }
        let mut value = serde_json::to_value(v).expect("verdicts serialize");
        value["verified"] = json!(true);
        let _ = writeln!(
            text,
            "{:<9} {:<5} [{}] {}",
            v.concept.name(),
            v.holds,
            value["method"].as_str().unwrap_or(""),
            describe(&value["certificate"])
        );
        verdicts.push(value);
    }
    let implications: Vec<String> = applicable_implications(market.n(), cert.strict_market)
        .iter()
        .map(|(a, b)| format!("{a} => {b}"))
        .collect();
    let _ = writeln!(
        text,
        "pattern {} (no-trade, ntu, tu, ex-ante, ex-post); {} implications checked, none violated",
        cert.pattern.code(),
        cert.implications_checked
    );
    if !cert.strict_market {
        notes.push("market has ties; two-couple implications are not audited".into());
    }
    Ok(Outcome {
        input_digest: loaded.digest,
        notes,
        result: json!({
            "matching": mu.one_based(),
            "verdicts": verdicts,
            "pattern": cert.pattern.code(),
            "implications": implications,
            "implication_violations": [],
        }),
        text,
        artifact: None,
        exit: ExitCode::Ok,
    })
}

pub fn enumerate(file: &Path, tie_break: bool) -> CliResult<Outcome> {
    let loaded = load(file)?;
    let mut notes = Vec::new();
    let market = ordinal(&loaded.doc, tie_break, &mut notes)?;
    let stable = enumerate_stable(&market)?;
    let men_opt = deferred_acceptance(&market, Side::Men);
    let women_opt = deferred_acceptance(&market, Side::Women);
    let mut rows = Vec::new();
    let mut text = format!("{} stable matching(s)\n", stable.len());
    for m in stable.matchings() {
        let isolated = is_isolated(m, &stable)?;
        let mut tags = Vec::new();
        if *m == men_opt {
            tags.push("man-optimal");
        }
        if *m == women_opt {
            tags.push("woman-optimal");
        }
        if isolated {
            tags.push("isolated");
        }
        let _ = writeln!(text, "  {}  {}", one_based(m), tags.join(", "));
        rows.push(json!({
            "matching": m.one_based(),
            "isolated": isolated,
            "man_optimal": *m == men_opt,
            "woman_optimal": *m == women_opt,
        }));
    }
    Ok(Outcome {
        input_digest: loaded.digest,
        notes,
        result: json!({ "count": stable.len(), "stable": rows }),
        text,
        artifact: None,
        exit: ExitCode::Ok,
    })
}

pub fn represent(file: &Path, mode: &str, matching: &str, tie_break: bool) -> CliResult<Outcome> {
    let loaded = load(file)?;
    let mut notes = Vec::new();
    let ord = ordinal(&loaded.doc, tie_break, &mut notes)?;
    let labels = loaded.doc.labels.as_ref();
    let ntu_holds = |m: &CardinalMarket, mu: &Matching| -> CliResult<bool> {
        Ok(matchcert::certify::is_no_trade_stable(m, mu)?.holds)
    };
    let (market, provenance, checks, text) = match mode {
        "no-trade" => {
            let mu = resolve_matching(matching, &loaded.doc, tie_break, &mut notes)?;
            let rep = no_trade_representation(&ord, &mu)?;
            let no_trade = ntu_holds(&rep.market, &mu)?;
            let represents = matchcert::market::represents(&rep.market, &ord);
            notes.push(format!(
                "construction no-trade: t = {}, {} Taylor terms, seed utilities {}",
                to_text(&rep.t),
                rep.exp_terms,
                rep.seed
            ));
            let provenance = json!({
                "construction": "no-trade",
                "matching": mu.one_based(),
                "parameters": rep,
            });
            let text = format!(
                "no-trade representation for matching {}\n  represents input preferences: {represents}\n  matching is no-trade stable: {no_trade}\n",
                one_based(&mu)
            );
            let checks =
                json!({ "represents": represents, "no_trade": [{ "matching": mu.one_based(), "holds": no_trade }] });
            (rep.market, provenance, checks, text)
        }
        "isolated" => {
            let rep = isolated_representation(&ord)?;
            let represents = matchcert::market::represents(&rep.market, &ord);
            let mut rows = Vec::new();
            let mut text = format!(
                "isolated representation (delta = {}), {} stable matching(s)\n  represents input preferences: {represents}\n",
                to_text(&rep.delta),
                rep.k()
            );
            for (idx, m) in rep.stable.matchings().iter().enumerate() {
                let isolated = rep.isolated.contains(&idx);
                let holds = ntu_holds(&rep.market, m)?;
                let status = if isolated {
                    format!("no-trade {holds}")
                } else {
                    "not isolated; not covered by the construction".to_string()
                };
                let _ = writeln!(text, "  {}  {status}", one_based(m));
                rows.push(json!({ "matching": m.one_based(), "isolated": isolated, "holds": holds }));
            }
            notes.push(format!("construction isolated: delta = {}", to_text(&rep.delta)));
            let provenance = json!({ "construction": "isolated", "parameters": rep });
            let checks = json!({ "represents": represents, "no_trade": rows });
            (rep.market, provenance, checks, text)
        }
        other => {
            return Err(CliError::parse(format!(
                "`--mode`: expected no-trade or isolated, got `{other}`"
            )));
        }
    };
    let doc = market_json(&market, Some(&ord), labels, Some(provenance));
    let artifact = serde_json::to_string_pretty(&doc).expect("markets serialize") + "\n";
    Ok(Outcome {
        input_digest: loaded.digest,
        notes,
        result: json!({ "checks": checks, "market": doc }),
        text,
        artifact: Some(artifact),
        exit: ExitCode::Ok,
    })
}

pub struct PoaArgs {
    pub n: Option<usize>,
    pub n_list: Option<String>,
    pub g: u32,
    pub k: String,
    pub epsilon: String,
    pub market_out: Option<std::path::PathBuf>,
}

fn rational_flag(flag: &str, text: &str) -> CliResult<Rational> {
    parse_rational(text).map_err(|e| CliError::parse(format!("`{flag}`: {e}")))
}

fn csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from(
        "n,lower_bound,ratio,ratio_approx,numerator,denominator,stable_count,unique_stable,closed_forms_hold,meets_bound\n",
    );
    for r in rows {
        let ratio = r.report.ratio.as_ref();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            to_text(&r.lower_bound),
            ratio.map_or("".into(), to_text),
            ratio.map_or("".into(), |x| format!("{:.6}", to_f64(x))),
            to_text(&r.report.numerator),
            to_text(&r.report.denominator),
            r.report.stable_count,
            r.unique_stable,
            r.closed_forms_hold,
            r.meets_bound
        );
    }
    out
}

pub fn poa(args: &PoaArgs) -> CliResult<Outcome> {
    let n_list: Vec<usize> = match (&args.n, &args.n_list) {
        (Some(n), None) => vec![*n],
        (None, Some(list)) => list
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::parse(format!("`--n-list`: `{list}` is not a comma-separated list of sizes")))?,
        (None, None) => return Err(CliError::parse("give --n or --n-list")),
        (Some(_), Some(_)) => return Err(CliError::parse("--n and --n-list are exclusive")),
    };
    let k = rational_flag("--K", &args.k)?;
    let epsilon = rational_flag("--epsilon", &args.epsilon)?;
    // Validate every size up front so errors do not depend on scheduling.
    for &n in &n_list {
        PoaConfig::new(n, args.g, k.clone(), epsilon.clone())?;
    }
    let rows = gap_growth_table(args.g, &k, &epsilon, &n_list)?;
    let canonical = format!(
        "poa n={:?} g={} K={} epsilon={}",
        n_list,
        args.g,
        to_text(&k),
        to_text(&epsilon)
    );
    let mut notes = vec![format!(
        "utilities: rank-1 partner yields K = {}, rank r yields (n - r)/n^{}",
        to_text(&k),
        args.g
    )];
    if let Some(path) = &args.market_out {
        if n_list.len() != 1 {
            return Err(CliError::parse("--market needs a single --n"));
        }
        let cfg = PoaConfig::new(n_list[0], args.g, k.clone(), epsilon.clone())?;
        let market = generate_poa_market(&cfg)?;
        let doc = market_json(
            &market,
            None,
            None,
            Some(json!({ "construction": "poa", "parameters": cfg })),
        );
        std::fs::write(
            path,
            serde_json::to_string_pretty(&doc).expect("markets serialize") + "\n",
        )
        .map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))?;
        notes.push(format!("generated market written to {}", path.display()));
    }
    let mut text = String::from("    n  ratio        bound   unique  closed-forms  meets-bound\n");
    for r in &rows {
        let _ = writeln!(
            text,
            "{:>5}  {:<11}  {:<6}  {:<6}  {:<12}  {}",
            r.n,
            r.report
                .ratio
                .as_ref()
                .map_or("-".into(), |x| format!("{:.6}", to_f64(x))),
            format!("{:.3}", to_f64(&r.lower_bound)),
            r.unique_stable,
            r.closed_forms_hold,
            r.meets_bound
        );
    }
    let all_ok = rows
        .iter()
        .all(|r| r.meets_bound && r.unique_stable && r.closed_forms_hold);
    if !all_ok {
        notes.push("some rows miss the lower bound or the closed forms".into());
    }
    Ok(Outcome {
        input_digest: digest(canonical.as_bytes()),
        notes,
        result: json!({ "g": args.g, "K": to_text(&k), "epsilon": to_text(&epsilon), "rows": rows }),
        artifact: Some(csv(&rows)),
        text,
        exit: ExitCode::Ok,
    })
}

pub fn audit(n: usize, trials: u64, seed: u64) -> CliResult<Outcome> {
    let report = audit_implications(n, trials, seed)?;
    let conditionals: Vec<Value> = applicable_implications(n, true)
        .into_iter()
        .map(|(a, b)| {
            let (with_a, with_both) = report.conditional(a, b);
            json!({ "implication": format!("{a} => {b}"), "antecedent_true": with_a, "both_true": with_both })
        })
        .collect();
    let mut text = format!("{} trials, n = {n}, seed = {seed}\n", report.trials);
    for (code, count) in &report.patterns {
        let _ = writeln!(text, "  {code}  {count}");
    }
    let _ = writeln!(text, "{} violation(s)", report.violations.len());
    for v in &report.violations {
        let _ = writeln!(
            text,
            "  trial {} pattern {}: {}",
            v.trial,
            v.pattern,
            v.broken.join(", ")
        );
    }
    let exit = if report.ok() { ExitCode::Ok } else { ExitCode::Failure };
    let mut result = serde_json::to_value(&report).expect("reports serialize");
    result["conditionals"] = json!(conditionals);
    Ok(Outcome {
        input_digest: digest(format!("audit-implications n={n} trials={trials} seed={seed}").as_bytes()),
        notes: vec!["random strict markets, entries k/1000 in [-2, 2]; certified matching is the identity".into()],
        result,
        text,
        artifact: None,
        exit,
    })
}
