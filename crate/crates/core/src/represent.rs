//! Cardinal representations that make stable matchings no-trade stable, and
//! the weight-rescaling test for a given cardinal market.
//!
//! Conventions: surplus differences elsewhere in the crate are "how much
//! better the current partner is" (`R = U(i, σ(i)) - U(i, j)`). The
//! exponential construction below is naturally phrased with the opposite
//! sign, `R̄ = U(i, j) - U(i, σ(i))`; it negates internally.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::certify::is_no_trade_stable;
use crate::error::{Error, Result};
use crate::feasibility::{positive_solution_exists, PositiveSolution};
use crate::market::{represents, surplus_deltas, CardinalMarket, Matching, Matrix, OrdinalMarket};
use crate::rational::{frac, int, Rational};
use crate::stable::{blocking_pair, enumerate_stable, is_isolated, StableSet};

/// Default number of Taylor terms used to bound `e^k`.
pub const DEFAULT_EXP_TERMS: u32 = 12;

/// Default band width for partners ranked between two stable partners.
pub fn default_delta() -> Rational {
    frac(1, 4)
}

/// Rational lower bound on `e^k` for integer `k ≥ 0`: the Taylor partial
/// sum `Σ_{m<terms} k^m / m!`. For `k < 0` the reciprocal of the bound for
/// `-k` is returned, which is an upper bound. Partial sums with a fixed
/// number of terms are strictly increasing in `k`, so the ordering of the
/// true exponentials is preserved exactly.
pub fn exp_bound(k: i64, terms: u32) -> Rational {
    let x = int(k.abs());
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for m in 0..terms {
        sum += &term;
        term = term * &x / int(m as i64 + 1);
    }
    if k < 0 {
        sum.recip()
    } else {
        sum
    }
}

/// A no-trade representation together with the parameters that built it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NoTradeRepresentation {
    #[serde(skip)]
    pub market: CardinalMarket,
    /// Exponent scale; rank gaps are integers ≥ 1 and `1 > ln 2`.
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub t: Rational,
    pub exp_terms: u32,
    pub seed: &'static str,
}

fn require_stable(market: &OrdinalMarket, mu: &Matching) -> Result<()> {
    if mu.n() != market.n() {
        return Err(Error::InvalidMatching(format!(
            "matching has {} couples, market has {}",
            mu.n(),
            market.n()
        )));
    }
    match blocking_pair(market, mu) {
        Some((man, woman)) => Err(Error::NotStable { man, woman }),
        None => Ok(()),
    }
}

/// Builds `Ū(i, j) = 1/2 - e^{-R̄_ij}` and symmetrically `V̄`, with zero on
/// the couples of `mu`, from the rank seed `utility = n - 1 - rank`.
///
/// Every off-couple entry is positive exactly when the agent prefers that
/// partner to their spouse, so the output represents `market`; stability
/// means no pair has both entries positive, and then
/// `Ū + V̄ = 1 - e^{a} - e^{-b} < 0` with `a ≥ 1`.
///
/// ```
/// use matchcert::examples::mutual_first_choices;
/// use matchcert::market::{ordinal_of, Matching};
/// use matchcert::represent::no_trade_representation;
///
/// let ord = ordinal_of(&mutual_first_choices(3)).unwrap();
/// let rep = no_trade_representation(&ord, &Matching::identity(3)).unwrap();
/// assert!(matchcert::certify::is_no_trade_stable(&rep.market, &Matching::identity(3)).unwrap().holds);
/// ```
pub fn no_trade_representation(market: &OrdinalMarket, mu: &Matching) -> Result<NoTradeRepresentation> {
    no_trade_representation_with(market, mu, DEFAULT_EXP_TERMS)
}

/// As [`no_trade_representation`] with an explicit Taylor length (≥ 3).
pub fn no_trade_representation_with(
    market: &OrdinalMarket,
    mu: &Matching,
    exp_terms: u32,
) -> Result<NoTradeRepresentation> {
    require_stable(market, mu)?;
    if exp_terms < 3 {
        return Err(Error::InvalidConfig(
            "at least 3 Taylor terms are needed to bound e above 2".into(),
        ));
    }
    let n = market.n();
    let seed = market.rank_utilities();
    let half = frac(1, 2);
    let entry = |gain: &Rational| -> Rational {
        // Seed gaps are integers.
        let k = gain.to_integer();
        let k = i64::try_from(&k).expect("rank gaps fit in i64");
        &half - exp_bound(-k, exp_terms)
    };
    let husband = mu.inverse();
    let mut u = vec![vec![Rational::zero(); n]; n];
    let mut v = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if mu.partner_of_man(i) != j {
                u[i][j] = entry(&(seed.u(i, j) - seed.u(i, mu.partner_of_man(i))));
            }
            if husband[j] != i {
                v[i][j] = entry(&(seed.v(i, j) - seed.v(husband[j], j)));
            }
        }
    }
    let out = CardinalMarket::new(u, v)?;
    debug_assert!(represents(&out, market));
    debug_assert!(is_no_trade_stable(&out, mu).map(|v| v.holds).unwrap_or(false));
    Ok(NoTradeRepresentation {
        market: out,
        t: Rational::one(),
        exp_terms,
        seed: "n - 1 - rank",
    })
}

/// Counting utilities over the stable set `μ¹…μᴷ`:
/// `Û(i, j) = #{k : j ≥_i μᵏ(i)}` and `V̂(i, j) = #{k : i >_j μᵏ(j)}`.
pub fn stable_count_utilities(market: &OrdinalMarket, stable: &StableSet) -> (Matrix, Matrix) {
    let n = market.n();
    let mut u_hat = vec![vec![Rational::zero(); n]; n];
    let mut v_hat = vec![vec![Rational::zero(); n]; n];
    let husbands: Vec<Vec<usize>> = stable.matchings().iter().map(Matching::inverse).collect();
    for i in 0..n {
        for j in 0..n {
            let u = stable
                .matchings()
                .iter()
                .filter(|m| market.man_rank(i, j) <= market.man_rank(i, m.partner_of_man(i)))
                .count();
            let v = husbands.iter().filter(|h| market.woman_prefers(j, i, h[j])).count();
            u_hat[i][j] = int(u as i64);
            v_hat[i][j] = int(v as i64);
        }
    }
    (u_hat, v_hat)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsolatedRepresentation {
    #[serde(skip)]
    pub market: CardinalMarket,
    #[serde(skip)]
    pub stable: StableSet,
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub u_hat: Matrix,
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub v_hat: Matrix,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub delta: Rational,
    /// Indices into `stable` of the isolated members.
    #[serde(serialize_with = "crate::report::ser_indices")]
    pub isolated: Vec<usize>,
}

impl IsolatedRepresentation {
    pub fn k(&self) -> usize {
        self.stable.len()
    }
}

/// Fills one agent's utilities: `counts[x]` is the count utility of
/// partner `x`, `list` the agent's preferences best first, and
/// `is_stable_partner[x]` whether `x` is ever a stable partner.
fn fill_agent(list: &[usize], counts: &[Rational], is_stable_partner: &[bool], delta: &Rational) -> Vec<Rational> {
    let n = list.len();
    let mut out = vec![Rational::zero(); n];
    // Scan worst to best so each group of non-stable partners knows the
    // stable partner just below it.
    let worst_stable = list
        .iter()
        .rposition(|&x| is_stable_partner[x])
        .expect("someone is a stable partner");
    for (p, &x) in list.iter().enumerate().skip(worst_stable + 1) {
        out[x] = int(-((p - worst_stable) as i64));
    }
    let mut below = worst_stable;
    loop {
        // group = positions (start..below) of non-stable partners.
        let start = list[..below]
            .iter()
            .rposition(|&x| is_stable_partner[x])
            .map_or(0, |s| s + 1);
        let base = &counts[list[below]];
        let size = below - start;
        for (offset, &x) in list[start..below].iter().enumerate() {
            // Best of the group gets the largest value inside (base, base + δ).
            let step = int((size - offset) as i64) / int(size as i64 + 1);
            out[x] = base + delta * step;
        }
        if start == 0 {
            break;
        }
        below = start - 1;
    }
    for &x in list {
        if is_stable_partner[x] {
            out[x] = counts[x].clone();
        }
    }
    out
}

/// Builds utilities under which every isolated stable matching is no-trade
/// stable. Stable partners receive their count utilities `Û`, `V̂`;
/// partners ranked between stable ones get evenly spaced values in
/// `(val, val + δ)` above the next stable partner below them; partners worse
/// than every stable partner get `-1, -2, …`.
pub fn isolated_representation(market: &OrdinalMarket) -> Result<IsolatedRepresentation> {
    isolated_representation_with(market, &default_delta())
}

pub fn isolated_representation_with(market: &OrdinalMarket, delta: &Rational) -> Result<IsolatedRepresentation> {
    if !delta.is_positive() || *delta >= frac(1, 2) {
        return Err(Error::InvalidConfig("delta must lie in (0, 1/2)".into()));
    }
    let n = market.n();
    let stable = enumerate_stable(market)?;
    let (u_hat, v_hat) = stable_count_utilities(market, &stable);
    let mut man_stable = vec![vec![false; n]; n];
    let mut woman_stable = vec![vec![false; n]; n];
    for m in stable.matchings() {
        for i in 0..n {
            man_stable[i][m.partner_of_man(i)] = true;
            woman_stable[m.partner_of_man(i)][i] = true;
        }
    }
    let mut u = vec![vec![Rational::zero(); n]; n];
    let mut v = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        u[i] = fill_agent(&market.men_prefs()[i], &u_hat[i], &man_stable[i], delta);
    }
    for j in 0..n {
        let counts: Vec<Rational> = (0..n).map(|i| v_hat[i][j].clone()).collect();
        let col = fill_agent(&market.women_prefs()[j], &counts, &woman_stable[j], delta);
        for i in 0..n {
            v[i][j] = col[i].clone();
        }
    }
    let isolated = stable
        .matchings()
        .iter()
        .enumerate()
        .filter(|(_, m)| is_isolated(m, &stable).unwrap_or(false))
        .map(|(k, _)| k)
        .collect();
    Ok(IsolatedRepresentation {
        market: CardinalMarket::new(u, v)?,
        stable,
        u_hat,
        v_hat,
        delta: delta.clone(),
        isolated,
    })
}

/// Outcome of the search for positive weights `λ` (men) and `μ` (women)
/// with `λ_i R_ij + μ_j S_ij ≥ 0` on every pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum WeightSearch {
    Feasible {
        #[serde(serialize_with = "crate::report::ser_vec")]
        lambda: Vec<Rational>,
        #[serde(serialize_with = "crate::report::ser_vec")]
        mu: Vec<Rational>,
    },
    /// Motzkin alternative: `y ≥ 0` on the rows of [`weight_matrix`],
    /// `z = -y·A ≥ 0` and nonzero (columns: men, then women).
    Infeasible {
        #[serde(serialize_with = "crate::report::ser_vec")]
        y: Vec<Rational>,
        #[serde(serialize_with = "crate::report::ser_vec")]
        z: Vec<Rational>,
    },
}

/// Row `i·n + j` has `R_ij` in column `i` and `S_ij` in column `n + j`.
pub fn weight_matrix(market: &CardinalMarket, matching: &Matching) -> Result<Matrix> {
    let d = surplus_deltas(market, matching)?;
    let n = d.n();
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![Rational::zero(); 2 * n];
            row[i] = d.r(i, j).clone();
            row[n + j] += d.s(i, j);
            a.push(row);
        }
    }
    Ok(a)
}

/// Decides whether rescaling each agent's utility by a positive weight can
/// make an NTU-stable `matching` no-trade stable.
pub fn weighted_no_trade_weights(market: &CardinalMarket, matching: &Matching) -> Result<WeightSearch> {
    let a = weight_matrix(market, matching)?;
    let d = surplus_deltas(market, matching)?;
    let n = market.n();
    for i in 0..n {
        for j in 0..n {
            if d.r(i, j).is_negative() && d.s(i, j).is_negative() {
                return Err(Error::NotStable { man: i, woman: j });
            }
        }
    }
    Ok(match positive_solution_exists(&a, 2 * n) {
        PositiveSolution::Feasible(x) => WeightSearch::Feasible {
            lambda: x[..n].to_vec(),
            mu: x[n..].to_vec(),
        },
        PositiveSolution::Infeasible { y, z } => WeightSearch::Infeasible { y, z },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::market::{break_ties, ordinal_of, tie_broken_ordinal};
    use crate::stable::{deferred_acceptance, Side};
    use crate::verify::{verify_motzkin, verify_positive_solution};

    #[test]
    fn exp_bounds_bracket_e() {
        let e = exp_bound(1, DEFAULT_EXP_TERMS);
        assert!(e > frac(2718, 1000) && e < frac(2719, 1000));
        assert!(exp_bound(-1, 3) < frac(1, 2));
        assert_eq!(exp_bound(0, 5), int(1));
    }

    #[test]
    fn mutual_first_choices_get_nonpositive_pair_sums() {
        let ord = ordinal_of(&examples::mutual_first_choices(4)).unwrap();
        let rep = no_trade_representation(&ord, &Matching::identity(4)).unwrap();
        for i in 0..4 {
            assert!(rep.market.u(i, i).is_zero());
            for j in 0..4 {
                assert!(!(rep.market.u(i, j) + rep.market.v(i, j)).is_positive());
            }
        }
    }

    #[test]
    fn transfer_example_is_repaired() {
        let ord = tie_broken_ordinal(&examples::transfers_needed());
        let sigma = Matching::identity(3);
        assert!(!is_no_trade_stable(&examples::transfers_needed(), &sigma).unwrap().holds);
        let rep = no_trade_representation(&ord, &sigma).unwrap();
        assert!(represents(&rep.market, &ord));
        assert!(is_no_trade_stable(&rep.market, &sigma).unwrap().holds);
    }

    #[test]
    fn unstable_target_is_rejected() {
        let ord = tie_broken_ordinal(&examples::transfers_needed());
        let bad = Matching::new(vec![1, 0, 2]).unwrap();
        assert!(matches!(
            no_trade_representation(&ord, &bad),
            Err(Error::NotStable { .. })
        ));
    }

    #[test]
    fn unique_stable_matching_sums_to_one() {
        let ord = ordinal_of(&examples::mutual_first_choices(3)).unwrap();
        let rep = isolated_representation(&ord).unwrap();
        assert_eq!(rep.k(), 1);
        for i in 0..3 {
            assert_eq!(rep.market.u(i, i) + rep.market.v(i, i), int(1));
            for j in 0..3 {
                assert!(&rep.u_hat[i][j] + &rep.v_hat[i][j] <= int(1));
            }
        }
        assert!(represents(&rep.market, &ord));
    }

    #[test]
    fn weight_repair_example_is_isolated_and_repaired() {
        let strict = break_ties(&examples::no_weight_repair(), &frac(1, 1000)).unwrap();
        let ord = ordinal_of(&strict).unwrap();
        let rep = isolated_representation(&ord).unwrap();
        assert_eq!(rep.stable.matchings(), &[examples::no_weight_repair_matching()]);
        assert_eq!(rep.isolated, vec![0]);
        assert!(represents(&rep.market, &ord));
        assert!(
            is_no_trade_stable(&rep.market, &examples::no_weight_repair_matching())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn weight_repair_example_has_no_weights() {
        let m = examples::no_weight_repair();
        let sigma = examples::no_weight_repair_matching();
        let a = weight_matrix(&m, &sigma).unwrap();
        match weighted_no_trade_weights(&m, &sigma).unwrap() {
            WeightSearch::Infeasible { y, z } => assert!(verify_motzkin(&a, &y, &z)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn no_trade_stable_matching_accepts_unit_weights() {
        let m = examples::mutual_first_choices(3);
        let sigma = Matching::identity(3);
        match weighted_no_trade_weights(&m, &sigma).unwrap() {
            WeightSearch::Feasible { lambda, mu } => {
                assert!(lambda.iter().chain(&mu).all(|w| *w == int(1)));
                let x: Vec<_> = lambda.into_iter().chain(mu).collect();
                assert!(verify_positive_solution(&weight_matrix(&m, &sigma).unwrap(), &x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn band_values_sit_between_stable_partners() {
        let ord = OrdinalMarket::new(
            vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
            vec![vec![1, 2, 0], vec![2, 0, 1], vec![0, 1, 2]],
        )
        .unwrap();
        let rep = isolated_representation(&ord).unwrap();
        assert_eq!(rep.k(), 3);
        assert!(represents(&rep.market, &ord));
        let top = deferred_acceptance(&ord, Side::Men);
        assert!(rep.stable.contains(&top));
        for &k in &rep.isolated {
            assert!(
                is_no_trade_stable(&rep.market, &rep.stable.matchings()[k])
                    .unwrap()
                    .holds
            );
        }
    }
}
