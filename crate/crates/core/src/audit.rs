//! Randomized audit of the implication lattice.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{applicable_implications, implication_violations, Concept, VerdictPattern};
use crate::error::{Error, Result};
use crate::market::Matching;
use crate::random::{random_strict_market, rng_for};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub trial: u64,
    pub pattern: String,
    pub broken: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// Implications checked, e.g. `"tu => ex-ante"`.
    pub implications: Vec<String>,
    /// Frequency of each verdict pattern, keyed in concept order
    /// (no-trade, ntu, tu, ex-ante, ex-post).
    pub patterns: BTreeMap<String, u64>,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Trials where `a` held, and how many of those also had `b`.
    pub fn conditional(&self, a: Concept, b: Concept) -> (u64, u64) {
        let idx = |c: Concept| Concept::ALL.iter().position(|&x| x == c).expect("listed");
        let (ia, ib) = (idx(a), idx(b));
        self.patterns.iter().fold((0, 0), |(with_a, with_both), (code, count)| {
            let bytes = code.as_bytes();
            let has_a = bytes[ia] == b'T';
            let has_b = bytes[ib] == b'T';
            (
                with_a + u64::from(has_a) * count,
                with_both + u64::from(has_a && has_b) * count,
            )
        })
    }
}

/// Certifies the identity matching of `trials` seeded strict random
/// markets of size `n` and checks every verdict pattern against the lattice.
/// Certificates from `certify_all` are not re-verified here; the raw
/// pattern is checked directly so that violations are reported rather than
/// raised.
pub fn audit_implications(n: usize, trials: u64, seed: u64) -> Result<AuditReport> {
    if n < 2 {
        return Err(Error::InvalidConfig("the audit needs n ≥ 2".into()));
    }
    let sigma = Matching::identity(n);
    let results: Vec<(u64, VerdictPattern)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let market = random_strict_market(n, &mut rng_for(seed, trial));
            let verdicts = Concept::ALL
                .into_iter()
                .map(|c| crate::certify::certify(c, &market, &sigma))
                .collect::<Result<Vec<_>>>()?;
            Ok((trial, VerdictPattern::from_verdicts(&verdicts)))
        })
        .collect::<Result<_>>()?;
    let mut patterns = BTreeMap::new();
    let mut violations = Vec::new();
    for (trial, pattern) in results {
        *patterns.entry(pattern.code()).or_insert(0) += 1;
        let broken = implication_violations(&pattern, n, true);
        if !broken.is_empty() {
            violations.push(Violation {
                trial,
                pattern: pattern.code(),
                broken,
            });
        }
    }
    Ok(AuditReport {
        n,
        trials,
        seed,
        implications: applicable_implications(n, true)
            .into_iter()
            .map(|(a, b)| format!("{a} => {b}"))
            .collect(),
        patterns,
        violations,
    })
}
