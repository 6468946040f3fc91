//! Price of no transfers: a family of markets whose unique stable matching
//! leaves almost all surplus on the table, and the weighted-welfare ratio
//! between the best lottery and the best stable matching.
//!
//! Agents are 0-based here; `c = n - 1` of each side sit on a cycle and the
//! last man and woman (`n - 1`) are the cycle breakers that pin down a
//! single stable matching at the middle of everyone's list.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Agent, Error, Result};
use crate::feasibility::assignment::assignment_value;
use crate::feasibility::{max_weight_assignment, minimize, LinearSystem, LpOutcome, Relation};
use crate::market::{matched_payoffs, ordinal_of, CardinalMarket, FractionalMatching, Matching, Matrix};
use crate::rational::{frac, int, pow, Rational};
use crate::report::{ser_matching, ser_rational, ser_vec};
use crate::stable::{enumerate_stable, is_stable, BRUTE_FORCE_LIMIT};

/// Upper bound on the number of stable matchings `welfare_gap` will scan.
pub const STABLE_SET_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoaConfig {
    pub n: usize,
    pub g: u32,
    #[serde(serialize_with = "ser_rational")]
    pub k: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: Rational,
}

impl PoaConfig {
    pub fn new(n: usize, g: u32, k: Rational, epsilon: Rational) -> Result<Self> {
        let cfg = Self { n, g, k, epsilon };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `n^g`.
    pub fn scale(&self) -> Rational {
        pow(&int(self.n as i64), self.g as i32)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !self.n.is_multiple_of(2) {
            return bad("n must be even");
        }
        if self.n < 4 {
            return bad("n must be at least 4");
        }
        // The top partner must stay strictly above the rank-2 value.
        if self.k <= int(self.n as i64 - 1) / self.scale() {
            return bad("K must exceed (n - 1) / n^g");
        }
        if !self.epsilon.is_positive() {
            return bad("epsilon must be positive");
        }
        if int(2 * self.n as i64) * &self.epsilon > int(1) {
            return bad("2 n epsilon must not exceed 1");
        }
        Ok(())
    }
}

/// Preference lists (best first) of the generated family.
pub fn poa_preferences(n: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let c = n - 1;
    let half = n / 2;
    let list = |start: usize, breaker: usize| -> Vec<usize> {
        let mut l: Vec<usize> = (0..half).map(|t| (start + t) % c).collect();
        l.push(breaker);
        l.extend((half..c).map(|t| (start + t) % c));
        l
    };
    let men = (0..n).map(|l| list(if l < c { l } else { c - 1 }, c)).collect();
    let women = (0..n)
        .map(|l| list(if l < c { (l + 1) % c } else { c - 1 }, c))
        .collect();
    (men, women)
}

/// The unique stable matching: man `l < n - 1` marries woman
/// `(l + n/2 - 1) mod (n - 1)`, the last couple marry each other.
pub fn expected_stable_matching(n: usize) -> Matching {
    let c = n - 1;
    let partner = (0..n).map(|l| if l < c { (l + n / 2 - 1) % c } else { c }).collect();
    Matching::new(partner).expect("rotation of 0..c")
}

fn utility(rank: usize, cfg: &PoaConfig) -> Rational {
    // 1-based rank r yields (n - r) / n^g; the favourite yields exactly K.
    let r = rank + 1;
    if r == 1 {
        cfg.k.clone()
    } else {
        int((cfg.n - r) as i64) / cfg.scale()
    }
}

/// Builds the market. Utilities lie in `[0, K]` and only the favourite
/// partner reaches `K`.
///
/// ```
/// use matchcert::poa::{generate_poa_market, PoaConfig};
/// use matchcert::rational::{frac, int};
///
/// let cfg = PoaConfig::new(4, 2, int(10), frac(1, 100)).unwrap();
/// let m = generate_poa_market(&cfg).unwrap();
/// assert_eq!(m.u(0, 0), &int(10));
/// ```
pub fn generate_poa_market(cfg: &PoaConfig) -> Result<CardinalMarket> {
    cfg.validate()?;
    let n = cfg.n;
    let (men, women) = poa_preferences(n);
    let mut u = vec![vec![Rational::zero(); n]; n];
    let mut v = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for (r, &j) in men[i].iter().enumerate() {
            u[i][j] = utility(r, cfg);
        }
    }
    for j in 0..n {
        for (r, &i) in women[j].iter().enumerate() {
            v[i][j] = utility(r, cfg);
        }
    }
    CardinalMarket::new(u, v)
}

/// Closed-form stable payoffs `(1 / (2 n^{g-1}), (n/2 - 1) / n^g)` of the
/// cycle agents and of the breakers.
pub fn closed_form_payoffs(cfg: &PoaConfig) -> (Rational, Rational) {
    let n = int(cfg.n as i64);
    let cycle = &n / (int(2) * cfg.scale());
    let breaker = int(cfg.n as i64 / 2 - 1) / cfg.scale();
    (cycle, breaker)
}

/// `(ε n K / 2) / max{1 / (2 n^{g-1}), (n/2 - 1) / n^g}`.
pub fn gap_lower_bound(cfg: &PoaConfig) -> Rational {
    let (a, b) = closed_form_payoffs(cfg);
    &cfg.epsilon * int(cfg.n as i64) * &cfg.k / int(2) / a.max(b)
}

/// Half-half lottery over "every cycle man gets his favourite" and "every
/// cycle woman gets her favourite"; the breakers marry each other in both.
pub fn transfer_lottery(n: usize) -> FractionalMatching {
    let c = n - 1;
    let men_top = Matching::new((0..n).map(|l| if l < c { l } else { c }).collect()).expect("identity");
    let women_top = Matching::new((0..n).map(|l| if l < c { (l + c - 1) % c } else { c }).collect()).expect("rotation");
    FractionalMatching::uniform_over(&[men_top, women_top]).expect("two matchings")
}

/// Stable matchings of a cardinal market: strict markets go through the
/// ordinal engine, markets with ties are filtered by brute force (equal
/// utilities never block).
pub fn cardinal_stable_matchings(market: &CardinalMarket) -> Result<Vec<Matching>> {
    if market.is_strict() {
        let ord = ordinal_of(market)?;
        return Ok(enumerate_stable(&ord)?.matchings().to_vec());
    }
    if market.n() > BRUTE_FORCE_LIMIT {
        let (agent, pair) = market.first_tie().expect("not strict");
        return Err(Error::TiesPresent { agent, pair });
    }
    let n = market.n();
    Ok(Matching::all(n)
        .filter(|m| {
            (0..n).all(|i| {
                (0..n).all(|j| {
                    !(market.u(i, j) > market.u(i, m.partner_of_man(i))
                        && market.v(i, j) > market.v(m.partner_of_woman(j), j))
                })
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    /// `min` over `Δ^ε` of the best weighted welfare of any lottery.
    #[serde(serialize_with = "ser_rational")]
    pub numerator: Rational,
    /// `max` over `Δ^ε` and stable matchings of weighted welfare.
    #[serde(serialize_with = "ser_rational")]
    pub denominator: Rational,
    /// `None` when the denominator is not positive.
    #[serde(serialize_with = "crate::report::ser_opt_rational")]
    pub ratio: Option<Rational>,
    /// Minimizing weights for the numerator (men, then women).
    #[serde(serialize_with = "ser_vec")]
    pub alpha: Vec<Rational>,
    #[serde(serialize_with = "ser_vec")]
    pub beta: Vec<Rational>,
    /// A welfare-maximizing matching at `(alpha, beta)`.
    #[serde(serialize_with = "ser_matching")]
    pub numerator_matching: Matching,
    /// Stable matching and heavily weighted agent attaining the denominator.
    #[serde(serialize_with = "ser_matching")]
    pub denominator_matching: Matching,
    pub denominator_agent: Agent,
    pub stable_count: usize,
}

/// Weighted welfare `Σ α_i u_i + Σ β_j v_j` of a matching.
pub fn weighted_welfare(market: &CardinalMarket, m: &Matching, alpha: &[Rational], beta: &[Rational]) -> Rational {
    let (u, v) = matched_payoffs(market, m);
    u.iter().zip(alpha).chain(v.iter().zip(beta)).map(|(p, w)| p * w).sum()
}

/// Solves `min_{(α,β) ∈ Δ^ε} max_π Σ α_i U(i,π) + β_j V(π,j)` as one LP by
/// dualizing the inner assignment problem:
/// minimize `Σ a + Σ b` s.t. `a_i + b_j ≥ α_i U_ij + β_j V_ij`.
fn numerator_lp(market: &CardinalMarket, epsilon: &Rational) -> (Rational, Vec<Rational>, Vec<Rational>) {
    let n = market.n();
    // Layout: a = 0..n, b = n..2n, α = 2n..3n, β = 3n..4n.
    let mut sys = LinearSystem::new(4 * n);
    for k in 2 * n..4 * n {
        sys.set_lower_bound(k, epsilon.clone());
    }
    for i in 0..n {
        for j in 0..n {
            sys.add_sparse(
                &[
                    (i, Rational::one()),
                    (n + j, Rational::one()),
                    (2 * n + i, -market.u(i, j).clone()),
                    (3 * n + j, -market.v(i, j).clone()),
                ],
                Relation::Ge,
                Rational::zero(),
            );
        }
    }
    let simplex: Vec<_> = (2 * n..4 * n).map(|k| (k, Rational::one())).collect();
    sys.add_sparse(&simplex, Relation::Eq, Rational::one());
    let mut objective = vec![Rational::zero(); 4 * n];
    for c in objective.iter_mut().take(2 * n) {
        *c = Rational::one();
    }
    match minimize(&sys, &objective) {
        LpOutcome::Optimal { x, value } => (value, x[2 * n..3 * n].to_vec(), x[3 * n..].to_vec()),
        other => unreachable!("weights exist when 2nε ≤ 1 and the dual is bounded below: {other:?}"),
    }
}

/// Computes the welfare gap of `market` over weights `Δ^ε`.
pub fn welfare_gap(market: &CardinalMarket, epsilon: &Rational) -> Result<GapReport> {
    let n = market.n();
    if !epsilon.is_positive() || int(2 * n as i64) * epsilon > int(1) {
        return Err(Error::InvalidConfig(
            "epsilon must be positive with 2 n epsilon ≤ 1".into(),
        ));
    }
    let stable = cardinal_stable_matchings(market)?;
    if stable.len() > STABLE_SET_LIMIT {
        return Err(Error::StableSetTooLarge {
            limit: STABLE_SET_LIMIT,
        });
    }

    let (numerator, alpha, beta) = numerator_lp(market, epsilon);
    let weights: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| &alpha[i] * market.u(i, j) + &beta[j] * market.v(i, j))
                .collect()
        })
        .collect();
    let (numerator_matching, best) = max_weight_assignment(&weights);
    assert_eq!(best, numerator, "assignment value must match the dualized LP");
    debug_assert_eq!(assignment_value(&weights, &numerator_matching), numerator);

    // Linear in the weights, so the max sits at a vertex of Δ^ε: one agent
    // gets 1 - (2n - 1)ε, everyone else ε.
    let heavy = int(1) - int(2 * n as i64 - 1) * epsilon;
    let mut denominator: Option<(Rational, Matching, Agent)> = None;
    for m in &stable {
        let (u, v) = matched_payoffs(market, m);
        let base: Rational = u.iter().chain(&v).sum::<Rational>() * epsilon;
        let agents = (0..n)
            .map(|i| (Agent::Man(i), &u[i]))
            .chain((0..n).map(|j| (Agent::Woman(j), &v[j])));
        for (agent, p) in agents {
            let value = &base + (&heavy - epsilon) * p;
            if denominator.as_ref().is_none_or(|(best, _, _)| value > *best) {
                denominator = Some((value, m.clone(), agent));
            }
        }
    }
    let (denominator, denominator_matching, denominator_agent) = denominator.expect("stable set is never empty");
    let ratio = denominator.is_positive().then(|| &numerator / &denominator);
    Ok(GapReport {
        numerator,
        denominator,
        ratio,
        alpha,
        beta,
        numerator_matching,
        denominator_matching,
        denominator_agent,
        stable_count: stable.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    #[serde(serialize_with = "ser_rational")]
    pub lower_bound: Rational,
    pub unique_stable: bool,
    pub closed_forms_hold: bool,
    pub meets_bound: bool,
    pub report: GapReport,
}

/// Whether every stable payoff of the generated market equals its closed form.
pub fn closed_forms_hold(cfg: &PoaConfig, market: &CardinalMarket) -> bool {
    let (cycle, breaker) = closed_form_payoffs(cfg);
    let (u, v) = matched_payoffs(market, &expected_stable_matching(cfg.n));
    let c = cfg.n - 1;
    (0..c).all(|l| u[l] == cycle && v[l] == cycle) && u[c] == breaker && v[c] == breaker
}

/// One row per `n`: the gap report plus the checks against the closed
/// forms and the lower bound. Rows are computed in parallel and returned in
/// the order of `n_list`.
pub fn gap_growth_table(g: u32, k: &Rational, epsilon: &Rational, n_list: &[usize]) -> Result<Vec<GrowthRow>> {
    n_list
        .par_iter()
        .map(|&n| {
            let cfg = PoaConfig::new(n, g, k.clone(), epsilon.clone())?;
            let market = generate_poa_market(&cfg)?;
            let report = welfare_gap(&market, epsilon)?;
            let lower_bound = gap_lower_bound(&cfg);
            let expected = expected_stable_matching(n);
            Ok(GrowthRow {
                n,
                meets_bound: report.ratio.as_ref().is_some_and(|r| *r >= lower_bound),
                unique_stable: report.stable_count == 1 && is_stable(&ordinal_of(&market)?, &expected),
                closed_forms_hold: closed_forms_hold(&cfg, &market),
                lower_bound,
                report,
            })
        })
        .collect()
}

/// Whether computed ratios strictly increase along the table.
pub fn strictly_increasing(rows: &[GrowthRow]) -> bool {
    rows.windows(2).all(|w| match (&w[0].report.ratio, &w[1].report.ratio) {
        (Some(a), Some(b)) => a < b,
        _ => false,
    })
}

/// Default weight floor.
pub fn default_epsilon() -> Rational {
    frac(1, 100)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{lottery_payoffs, represents};
    use crate::stable::{deferred_acceptance, Side};

    fn cfg(n: usize, g: u32, k: i64) -> PoaConfig {
        PoaConfig::new(n, g, int(k), frac(1, 100)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(PoaConfig::new(5, 2, int(10), frac(1, 100)).is_err());
        assert!(PoaConfig::new(2, 2, int(10), frac(1, 100)).is_err());
        assert!(PoaConfig::new(4, 2, int(10), frac(1, 4)).is_err());
        assert!(PoaConfig::new(4, 0, int(3), frac(1, 100)).is_err());
        assert!(PoaConfig::new(4, 0, int(4), frac(1, 8)).is_ok());
    }

    #[test]
    fn preferences_are_permutations_and_unique_stable() {
        for n in (4..=16).step_by(2) {
            let (men, women) = poa_preferences(n);
            let ord = crate::market::OrdinalMarket::new(men, women).unwrap();
            let expected = expected_stable_matching(n);
            assert_eq!(deferred_acceptance(&ord, Side::Men), expected, "n = {n}");
            assert_eq!(deferred_acceptance(&ord, Side::Women), expected, "n = {n}");
            let m = generate_poa_market(&cfg(n, 2, 10)).unwrap();
            assert!(represents(&m, &ord));
        }
    }

    #[test]
    fn small_instance_payoffs() {
        let c = cfg(4, 2, 10);
        let m = generate_poa_market(&c).unwrap();
        assert_eq!(
            cardinal_stable_matchings(&m).unwrap(),
            vec![expected_stable_matching(4)]
        );
        let (u, _) = matched_payoffs(&m, &expected_stable_matching(4));
        assert_eq!(u[0], frac(1, 8));
        assert_eq!(u[3], frac(1, 16));
        assert!(closed_forms_hold(&c, &m));
        let c = cfg(6, 1, 1);
        assert_eq!(closed_form_payoffs(&c).0, frac(1, 2));
        assert!(closed_forms_hold(&c, &generate_poa_market(&c).unwrap()));
    }

    #[test]
    fn utilities_are_bounded_by_k() {
        let c = cfg(6, 2, 10);
        let m = generate_poa_market(&c).unwrap();
        for i in 0..6 {
            assert_eq!(m.u_matrix()[i].iter().filter(|x| **x == int(10)).count(), 1);
            assert!(m.u_matrix()[i]
                .iter()
                .chain(&m.v_matrix()[i])
                .all(|x| !x.is_negative() && *x <= int(10)));
        }
    }

    #[test]
    fn lottery_gives_cycle_agents_half_of_k() {
        let m = generate_poa_market(&cfg(6, 2, 10)).unwrap();
        let (u, v) = lottery_payoffs(&m, &transfer_lottery(6));
        for l in 0..5 {
            assert!(u[l] >= int(5) && v[l] >= int(5));
        }
    }

    #[test]
    fn uniform_market_has_unit_ratio() {
        let m = {
            let row: &[i64] = &[3, 3, 3];
            CardinalMarket::from_integers(&[row; 3], &[row; 3])
        }
        .unwrap();
        let r = welfare_gap(&m, &frac(1, 100)).unwrap();
        assert_eq!(r.ratio, Some(int(1)));
        assert_eq!(r.stable_count, 6);
    }

    #[test]
    fn gap_beats_the_bound_at_n4() {
        let rows = gap_growth_table(2, &int(10), &frac(1, 100), &[4]).unwrap();
        assert!(rows[0].meets_bound && rows[0].unique_stable && rows[0].closed_forms_hold);
        let direct = welfare_gap(&generate_poa_market(&cfg(4, 2, 10)).unwrap(), &frac(1, 100)).unwrap();
        assert_eq!(rows[0].report, direct);
    }
}
