//! Certifiers for the five solution concepts.
//!
//! Each certifier returns a [`ConceptVerdict`] carrying a certificate that
//! [`crate::verify::verify_verdict`] can re-check by substitution. All work
//! happens in identity coordinates (women relabeled so the matching under
//! test is the identity); certificates are translated back to the market's
//! own labels before they are returned.
//!
//! With `R` and `S` the surplus differences of [`SurplusDeltas`]:
//!
//! | concept  | holds iff |
//! |----------|-----------|
//! | no-trade | `R + S ≥ 0` on every pair |
//! | NTU      | `max(R, S) ≥ 0` on every pair |
//! | TU       | some `T` has `T_j - T_i ≤ R_ij + S_ij` |
//! | ex-ante  | some `v`, `λ, μ > 0` have `v_j - v_i ≤ λ_i R_ij + μ_j S_ij` |
//! | ex-post  | `max(R, S)` is cyclically consistent |

use std::collections::VecDeque;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{
    difference_constraints_solve, lp_feasible, maximize, DifferenceConstraintGraph, DifferenceSolution,
    FeasibilityVerdict, LinearSystem, LpOutcome, Relation,
};
use crate::market::{matched_payoffs, surplus_deltas, CardinalMarket, FractionalMatching, Matching, SurplusDeltas};
use crate::rational::Rational;
use crate::report::{ser_index, ser_indices, ser_lottery, ser_opt_vec, ser_rational, ser_vec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Concept {
    NoTrade,
    Ntu,
    Tu,
    ExAnte,
    ExPost,
}

impl Concept {
    pub const ALL: [Concept; 5] = [
        Concept::NoTrade,
        Concept::Ntu,
        Concept::Tu,
        Concept::ExAnte,
        Concept::ExPost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Concept::NoTrade => "no-trade",
            Concept::Ntu => "ntu",
            Concept::Tu => "tu",
            Concept::ExAnte => "ex-ante",
            Concept::ExPost => "ex-post",
        }
    }

    pub fn from_name(name: &str) -> Option<Concept> {
        Concept::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PairScan,
    DifferenceConstraints,
    AfriatLp,
    PrimalLp,
    CyclicalConsistency,
}

/// Indices are 0-based in memory and 1-based once serialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Transfers `T_i` from woman `σ(i)` to man `i` and the payoffs they
    /// induce. `woman_payoffs` is indexed by woman.
    TransferVector {
        #[serde(serialize_with = "ser_vec")]
        transfers: Vec<Rational>,
        #[serde(serialize_with = "ser_vec")]
        man_payoffs: Vec<Rational>,
        #[serde(serialize_with = "ser_vec")]
        woman_payoffs: Vec<Rational>,
    },
    /// `v` and `lambda` are indexed by man (i.e. by couple), `mu` by woman.
    /// `mu` is absent for the ex-post system.
    AfriatWitness {
        #[serde(serialize_with = "ser_vec")]
        v: Vec<Rational>,
        #[serde(serialize_with = "ser_vec")]
        lambda: Vec<Rational>,
        #[serde(serialize_with = "ser_opt_vec")]
        mu: Option<Vec<Rational>>,
        normalization: &'static str,
    },
    BlockingPair {
        #[serde(serialize_with = "ser_index")]
        man: usize,
        #[serde(serialize_with = "ser_index")]
        woman: usize,
    },
    /// A pair whose joint surplus exceeds what the two currently get.
    PairViolation {
        #[serde(serialize_with = "ser_index")]
        man: usize,
        #[serde(serialize_with = "ser_index")]
        woman: usize,
        #[serde(serialize_with = "ser_rational")]
        joint_surplus: Rational,
        #[serde(serialize_with = "ser_rational")]
        current_sum: Rational,
    },
    DominatingLottery {
        #[serde(serialize_with = "ser_lottery")]
        lottery: FractionalMatching,
    },
    /// Man `men[t]` moves to woman `women[t]`, the current wife of
    /// `men[t + 1]` (cyclically); everyone else keeps their partner.
    ImprovingCycle {
        #[serde(serialize_with = "ser_indices")]
        men: Vec<usize>,
        #[serde(serialize_with = "ser_indices")]
        women: Vec<usize>,
    },
    /// Every pair was scanned and none blocks.
    NoBlockingPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptVerdict {
    pub concept: Concept,
    pub holds: bool,
    pub certificate: Certificate,
    pub method: Method,
}

fn verdict(concept: Concept, holds: bool, certificate: Certificate, method: Method) -> ConceptVerdict {
    ConceptVerdict {
        concept,
        holds,
        certificate,
        method,
    }
}

const UNIT_NORMALIZATION: &str = "multipliers >= 1";

fn cycle_certificate(matching: &Matching, men: Vec<usize>) -> Certificate {
    let women = (0..men.len())
        .map(|t| matching.partner_of_man(men[(t + 1) % men.len()]))
        .collect();
    Certificate::ImprovingCycle { men, women }
}

/// Holds iff no pair's joint surplus exceeds the sum of their current
/// payoffs. Reports the lexicographically first violating pair otherwise.
pub fn is_no_trade_stable(market: &CardinalMarket, matching: &Matching) -> Result<ConceptVerdict> {
    let d = surplus_deltas(market, matching)?;
    let n = d.n();
    for i in 0..n {
        for j in 0..n {
            if (d.r(i, j) + d.s(i, j)).is_negative() {
                let husband = matching.partner_of_woman(j);
                return Ok(verdict(
                    Concept::NoTrade,
                    false,
                    Certificate::PairViolation {
                        man: i,
                        woman: j,
                        joint_surplus: market.u(i, j) + market.v(i, j),
                        current_sum: market.u(i, matching.partner_of_man(i)) + market.v(husband, j),
                    },
                    Method::PairScan,
                ));
            }
        }
    }
    let (men, women) = matched_payoffs(market, matching);
    Ok(verdict(
        Concept::NoTrade,
        true,
        Certificate::TransferVector {
            transfers: vec![Rational::zero(); n],
            man_payoffs: men,
            woman_payoffs: women,
        },
        Method::PairScan,
    ))
}

/// Gale–Shapley stability; equal utilities never block.
pub fn is_ntu_stable(market: &CardinalMarket, matching: &Matching) -> Result<ConceptVerdict> {
    let d = surplus_deltas(market, matching)?;
    let n = d.n();
    for i in 0..n {
        for j in 0..n {
            if d.r(i, j).is_negative() && d.s(i, j).is_negative() {
                return Ok(verdict(
                    Concept::Ntu,
                    false,
                    Certificate::BlockingPair { man: i, woman: j },
                    Method::PairScan,
                ));
            }
        }
    }
    Ok(verdict(
        Concept::Ntu,
        true,
        Certificate::NoBlockingPair,
        Method::PairScan,
    ))
}

/// Edge weights `R + S` in identity coordinates.
pub fn tu_graph(d: &SurplusDeltas) -> DifferenceConstraintGraph {
    let n = d.n();
    DifferenceConstraintGraph::new(
        (0..n)
            .map(|i| (0..n).map(|k| d.rel_r(i, k) + d.rel_s(i, k)).collect())
            .collect(),
    )
}

pub fn is_tu_stable(market: &CardinalMarket, matching: &Matching) -> Result<ConceptVerdict> {
    let d = surplus_deltas(market, matching)?;
    Ok(match difference_constraints_solve(&tu_graph(&d)) {
        DifferenceSolution::Feasible(t) => {
            let n = d.n();
            let man_payoffs = (0..n)
                .map(|i| market.u(i, matching.partner_of_man(i)) + &t[i])
                .collect();
            let mut woman_payoffs = vec![Rational::zero(); n];
            for i in 0..n {
                let j = matching.partner_of_man(i);
                woman_payoffs[j] = market.v(i, j) - &t[i];
            }
            verdict(
                Concept::Tu,
                true,
                Certificate::TransferVector {
                    transfers: t,
                    man_payoffs,
                    woman_payoffs,
                },
                Method::DifferenceConstraints,
            )
        }
        DifferenceSolution::NegativeCycle(cycle) => verdict(
            Concept::Tu,
            false,
            cycle_certificate(matching, cycle),
            Method::DifferenceConstraints,
        ),
    })
}

/// Afriat system for ex-ante efficiency over `(v, λ, μ)`, laid out as
/// `v = 0..n`, `λ = n..2n`, `μ = 2n..3n` in identity coordinates, with the
/// strict positivity of the multipliers normalized to `λ, μ ≥ 1`.
pub fn ex_ante_afriat_system(d: &SurplusDeltas) -> LinearSystem {
    let n = d.n();
    let mut sys = LinearSystem::new(3 * n);
    for k in n..3 * n {
        sys.set_lower_bound(k, Rational::one());
    }
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            // v_k - v_i - λ_i R_ik - μ_k S_ik ≤ 0
            sys.add_sparse(
                &[
                    (k, Rational::one()),
                    (i, -Rational::one()),
                    (n + i, -d.rel_r(i, k).clone()),
                    (2 * n + k, -d.rel_s(i, k).clone()),
                ],
                Relation::Le,
                Rational::zero(),
            );
        }
    }
    sys
}

/// Afriat system for ex-post efficiency over `(v, λ)` with `Q = max(R, S)`.
pub fn ex_post_afriat_system(d: &SurplusDeltas) -> LinearSystem {
    let n = d.n();
    let mut sys = LinearSystem::new(2 * n);
    for k in n..2 * n {
        sys.set_lower_bound(k, Rational::one());
    }
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            let q = d.rel_r(i, k).max(d.rel_s(i, k)).clone();
            sys.add_sparse(
                &[(k, Rational::one()), (i, -Rational::one()), (n + i, -q)],
                Relation::Le,
                Rational::zero(),
            );
        }
    }
    sys
}

/// Maximum total utility gain over lotteries that leave nobody worse off,
/// with an optimal lottery in original labels. Zero iff ex-ante efficient.
pub fn ex_ante_primal(d: &SurplusDeltas) -> (Rational, FractionalMatching) {
    let n = d.n();
    let var = |i: usize, k: usize| i * n + k;
    let mut sys = LinearSystem::new(n * n);
    for x in 0..n * n {
        sys.set_lower_bound(x, Rational::zero());
    }
    for i in 0..n {
        let row: Vec<_> = (0..n).map(|k| (var(i, k), Rational::one())).collect();
        sys.add_sparse(&row, Relation::Eq, Rational::one());
        let col: Vec<_> = (0..n).map(|k| (var(k, i), Rational::one())).collect();
        sys.add_sparse(&col, Relation::Eq, Rational::one());
    }
    let mut objective = vec![Rational::zero(); n * n];
    for i in 0..n {
        // Man i's gain: -Σ_k π_ik R_ik ≥ 0.
        let gain: Vec<_> = (0..n).map(|k| (var(i, k), -d.rel_r(i, k).clone())).collect();
        sys.add_sparse(&gain, Relation::Ge, Rational::zero());
        // Gain of the woman married to man i.
        let gain: Vec<_> = (0..n).map(|m| (var(m, i), -d.rel_s(m, i).clone())).collect();
        sys.add_sparse(&gain, Relation::Ge, Rational::zero());
    }
    for i in 0..n {
        for k in 0..n {
            objective[var(i, k)] = -(d.rel_r(i, k) + d.rel_s(i, k));
        }
    }
    match maximize(&sys, &objective) {
        LpOutcome::Optimal { x, value } => {
            let sigma = d.matching();
            let mut pi = vec![vec![Rational::zero(); n]; n];
            for i in 0..n {
                for k in 0..n {
                    pi[i][sigma.partner_of_man(k)] = x[var(i, k)].clone();
                }
            }
            (value, FractionalMatching::new(pi).expect("LP rows force bistochastic"))
        }
        other => unreachable!("identity lottery is feasible and the polytope bounded: {other:?}"),
    }
}

pub fn is_ex_ante_pareto(market: &CardinalMarket, matching: &Matching) -> Result<ConceptVerdict> {
    let d = surplus_deltas(market, matching)?;
    let n = d.n();
    match lp_feasible(&ex_ante_afriat_system(&d)) {
        FeasibilityVerdict::Feasible(x) => {
            let mut mu = vec![Rational::zero(); n];
            for k in 0..n {
                mu[matching.partner_of_man(k)] = x[2 * n + k].clone();
            }
            Ok(verdict(
                Concept::ExAnte,
                true,
                Certificate::AfriatWitness {
                    v: x[..n].to_vec(),
                    lambda: x[n..2 * n].to_vec(),
                    mu: Some(mu),
                    normalization: UNIT_NORMALIZATION,
                },
                Method::AfriatLp,
            ))
        }
        FeasibilityVerdict::Infeasible(_) => {
            let (value, lottery) = ex_ante_primal(&d);
            debug_assert!(value.is_positive(), "strong duality");
            Ok(verdict(
                Concept::ExAnte,
                false,
                Certificate::DominatingLottery { lottery },
                Method::PrimalLp,
            ))
        }
    }
}

/// Cyclical consistency of `Q = max(R, S)`: `Ok` if consistent, otherwise
/// the men of a cycle along `Q ≤ 0` edges with at least one `Q < 0` edge.
pub fn ex_post_cycle(d: &SurplusDeltas) -> std::result::Result<(), Vec<usize>> {
    let n = d.n();
    let q = |i: usize, k: usize| d.rel_r(i, k).max(d.rel_s(i, k)).clone();
    let weak: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|k| i != k && !q(i, k).is_positive()).collect())
        .collect();
    for i in 0..n {
        for k in 0..n {
            if i != k && q(i, k).is_negative() {
                if let Some(path) = shortest_path(&weak, k, i) {
                    // path runs k → … → i; close it with the edge i → k.
                    let mut men = vec![i];
                    men.extend(&path[..path.len() - 1]);
                    return Err(men);
                }
            }
        }
    }
    Ok(())
}

fn shortest_path(adj: &[Vec<bool>], from: usize, to: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut prev = vec![usize::MAX; n];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for y in 0..n {
            if adj[x][y] && prev[y] == usize::MAX {
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    None
}

pub fn is_ex_post_pareto(market: &CardinalMarket, matching: &Matching) -> Result<ConceptVerdict> {
    let d = surplus_deltas(market, matching)?;
    let n = d.n();
    match ex_post_cycle(&d) {
        Err(men) => Ok(verdict(
            Concept::ExPost,
            false,
            cycle_certificate(matching, men),
            Method::CyclicalConsistency,
        )),
        Ok(()) => match lp_feasible(&ex_post_afriat_system(&d)) {
            FeasibilityVerdict::Feasible(x) => Ok(verdict(
                Concept::ExPost,
                true,
                Certificate::AfriatWitness {
                    v: x[..n].to_vec(),
                    lambda: x[n..].to_vec(),
                    mu: None,
                    normalization: UNIT_NORMALIZATION,
                },
                Method::CyclicalConsistency,
            )),
            FeasibilityVerdict::Infeasible(_) => unreachable!("cyclically consistent Q always admits Afriat numbers"),
        },
    }
}

pub fn certify(concept: Concept, market: &CardinalMarket, matching: &Matching) -> Result<ConceptVerdict> {
    match concept {
        Concept::NoTrade => is_no_trade_stable(market, matching),
        Concept::Ntu => is_ntu_stable(market, matching),
        Concept::Tu => is_tu_stable(market, matching),
        Concept::ExAnte => is_ex_ante_pareto(market, matching),
        Concept::ExPost => is_ex_post_pareto(market, matching),
    }
}

/// Truth values of the five concepts in [`Concept::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VerdictPattern {
    pub no_trade: bool,
    pub ntu: bool,
    pub tu: bool,
    pub ex_ante: bool,
    pub ex_post: bool,
}

impl VerdictPattern {
    pub fn from_verdicts(verdicts: &[ConceptVerdict]) -> Self {
        let get = |c| verdicts.iter().find(|v| v.concept == c).is_some_and(|v| v.holds);
        Self {
            no_trade: get(Concept::NoTrade),
            ntu: get(Concept::Ntu),
            tu: get(Concept::Tu),
            ex_ante: get(Concept::ExAnte),
            ex_post: get(Concept::ExPost),
        }
    }

    /// Compact `TFTTT` rendering in [`Concept::ALL`] order.
    pub fn code(&self) -> String {
        [self.no_trade, self.ntu, self.tu, self.ex_ante, self.ex_post]
            .iter()
            .map(|&b| if b { 'T' } else { 'F' })
            .collect()
    }
}

/// Implications that hold in every market: no-trade ⇒ TU ⇒ ex-ante ⇒
/// ex-post and no-trade ⇒ NTU ⇒ ex-post.
pub const GENERAL_IMPLICATIONS: [(Concept, Concept); 5] = [
    (Concept::NoTrade, Concept::Tu),
    (Concept::Tu, Concept::ExAnte),
    (Concept::ExAnte, Concept::ExPost),
    (Concept::NoTrade, Concept::Ntu),
    (Concept::Ntu, Concept::ExPost),
];

/// Extra implications for strict two-couple markets.
pub const TWO_COUPLE_IMPLICATIONS: [(Concept, Concept); 2] =
    [(Concept::ExPost, Concept::ExAnte), (Concept::Ntu, Concept::ExAnte)];

/// Implications applicable to a market of size `n`. The two-couple extras
/// rely on every off-diagonal surplus difference being nonzero, so they are
/// only included for strict markets.
pub fn applicable_implications(n: usize, strict: bool) -> Vec<(Concept, Concept)> {
    let mut all = GENERAL_IMPLICATIONS.to_vec();
    if n == 2 && strict {
        all.extend(TWO_COUPLE_IMPLICATIONS);
    }
    all
}

/// Names of the implications `pattern` breaks.
pub fn implication_violations(pattern: &VerdictPattern, n: usize, strict: bool) -> Vec<String> {
    let value = |c| match c {
        Concept::NoTrade => pattern.no_trade,
        Concept::Ntu => pattern.ntu,
        Concept::Tu => pattern.tu,
        Concept::ExAnte => pattern.ex_ante,
        Concept::ExPost => pattern.ex_post,
    };
    applicable_implications(n, strict)
        .into_iter()
        .filter(|&(a, b)| value(a) && !value(b))
        .map(|(a, b)| format!("{a} => {b}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certification {
    pub verdicts: Vec<ConceptVerdict>,
    pub pattern: VerdictPattern,
    pub strict_market: bool,
    pub implications_checked: usize,
}

/// Runs all five certifiers and audits the verdicts against the
/// implication lattice. `ImplicationViolation` indicates a bug.
pub fn certify_all(market: &CardinalMarket, matching: &Matching) -> Result<Certification> {
    let verdicts = Concept::ALL
        .into_iter()
        .map(|c| certify(c, market, matching))
        .collect::<Result<Vec<_>>>()?;
    let pattern = VerdictPattern::from_verdicts(&verdicts);
    let strict = market.is_strict();
    let violations = implication_violations(&pattern, market.n(), strict);
    if !violations.is_empty() {
        return Err(Error::ImplicationViolation(violations.join(", ")));
    }
    Ok(Certification {
        verdicts,
        pattern,
        strict_market: strict,
        implications_checked: applicable_implications(market.n(), strict).len(),
    })
}
