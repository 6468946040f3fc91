//! Independent re-checking of certificates.
//!
//! Nothing here calls a solver: every check substitutes the certificate into
//! the defining inequalities and compares exactly. The certifiers are tested
//! against these functions, so keep them dumb.

use num_traits::{Signed, Zero};

use crate::certify::{Certificate, Concept, ConceptVerdict};
use crate::feasibility::{DifferenceConstraintGraph, FarkasCertificate, LinearSystem, Relation};
use crate::market::{lottery_payoffs, matched_payoffs, CardinalMarket, Matching, Matrix};
use crate::rational::Rational;

/// Checks a Farkas certificate against the convention documented on
/// [`FarkasCertificate`].
pub fn verify_farkas(system: &LinearSystem, cert: &FarkasCertificate) -> bool {
    let rows = system.rows();
    if cert.multipliers.len() != rows.len() {
        return false;
    }
    let mut c = vec![Rational::zero(); system.num_vars()];
    let mut d = Rational::zero();
    for (row, y) in rows.iter().zip(&cert.multipliers) {
        let sign = match row.relation {
            Relation::Le => 1,
            Relation::Ge => -1,
            Relation::Eq => 0,
        };
        if sign != 0 && y.is_negative() {
            return false;
        }
        let y = if sign < 0 { -y.clone() } else { y.clone() };
        for (ck, a) in c.iter_mut().zip(&row.coefficients) {
            *ck += &y * a;
        }
        d += &y * &row.rhs;
    }
    let mut floor = Rational::zero();
    for (ck, lb) in c.iter().zip(system.lower_bounds()) {
        match lb {
            None if !ck.is_zero() => return false,
            None => {}
            Some(_) if ck.is_negative() => return false,
            Some(l) => floor += ck * l,
        }
    }
    floor > d
}

/// `x ≫ 0` and `A·x ≥ 0`.
pub fn verify_positive_solution(a: &Matrix, x: &[Rational]) -> bool {
    x.iter().all(|v| v.is_positive())
        && a.iter()
            .all(|row| row.len() == x.len() && !row.iter().zip(x).map(|(p, q)| p * q).sum::<Rational>().is_negative())
}

/// `y ≥ 0`, `z ≥ 0`, `z ≠ 0` and `y·A + z = 0`.
pub fn verify_motzkin(a: &Matrix, y: &[Rational], z: &[Rational]) -> bool {
    if y.len() != a.len() || y.iter().chain(z).any(|v| v.is_negative()) || z.iter().all(|v| v.is_zero()) {
        return false;
    }
    (0..z.len()).all(|k| {
        let col: Rational = a.iter().zip(y).map(|(row, yr)| &row[k] * yr).sum();
        (col + &z[k]).is_zero()
    })
}

/// `t_j - t_i ≤ w(i, j)` for every ordered pair of distinct nodes.
pub fn verify_difference_solution(graph: &DifferenceConstraintGraph, t: &[Rational]) -> bool {
    let n = graph.n();
    t.len() == n && (0..n).all(|i| (0..n).all(|j| i == j || &t[j] - &t[i] <= *graph.weight(i, j)))
}

/// `cycle` is simple, has length ≥ 2 and negative total weight.
pub fn verify_negative_cycle(graph: &DifferenceConstraintGraph, cycle: &[usize]) -> bool {
    distinct_in_range(cycle, graph.n())
        && cycle.len() >= 2
        && (0..cycle.len())
            .map(|t| graph.weight(cycle[t], cycle[(t + 1) % cycle.len()]).clone())
            .sum::<Rational>()
            .is_negative()
}

fn distinct_in_range(xs: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    xs.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Re-checks a verdict produced for `matching` in `market`.
///
/// Positive certificates are checked as witnesses of the concept's defining
/// (or dual) inequalities; negative ones are checked as concrete deviations.
/// [`Certificate::NoBlockingPair`] is checked by rescanning.
pub fn verify_verdict(market: &CardinalMarket, matching: &Matching, verdict: &ConceptVerdict) -> Result<(), String> {
    let n = market.n();
    ensure(matching.n() == n, || "matching size differs from market".into())?;
    let (u, v) = (|i, j| market.u(i, j), |i, j| market.v(i, j));
    let sigma = |i| matching.partner_of_man(i);
    let husband = |j| matching.partner_of_woman(j);
    let (cur_m, cur_w) = matched_payoffs(market, matching);
    let concept = verdict.concept;
    match &verdict.certificate {
        Certificate::TransferVector {
            transfers,
            man_payoffs,
            woman_payoffs,
        } => {
            ensure(verdict.holds, || "transfer vector attached to a failing verdict".into())?;
            ensure(matches!(concept, Concept::NoTrade | Concept::Tu), || {
                format!("transfer vector cannot certify {concept}")
            })?;
            ensure(
                [transfers, man_payoffs, woman_payoffs].iter().all(|x| x.len() == n),
                || "payoff vectors have the wrong length".into(),
            )?;
            if concept == Concept::NoTrade {
                ensure(transfers.iter().all(Zero::is_zero), || {
                    "no-trade requires zero transfers".into()
                })?;
            }
            for i in 0..n {
                ensure(man_payoffs[i] == u(i, sigma(i)) + &transfers[i], || {
                    format!("man {} payoff mismatch", i + 1)
                })?;
                ensure(woman_payoffs[sigma(i)] == v(i, sigma(i)) - &transfers[i], || {
                    format!("woman {} payoff mismatch", sigma(i) + 1)
                })?;
            }
            for i in 0..n {
                for j in 0..n {
                    ensure(&man_payoffs[i] + &woman_payoffs[j] >= u(i, j) + v(i, j), || {
                        format!("pair ({}, {}) can do better", i + 1, j + 1)
                    })?;
                }
            }
            Ok(())
        }
        Certificate::PairViolation {
            man,
            woman,
            joint_surplus,
            current_sum,
        } => {
            let (i, j) = (*man, *woman);
            ensure(!verdict.holds && concept == Concept::NoTrade, || {
                "misplaced pair violation".into()
            })?;
            ensure(i < n && j < n, || "agent out of range".into())?;
            ensure(*joint_surplus == u(i, j) + v(i, j), || "joint surplus mismatch".into())?;
            ensure(*current_sum == &cur_m[i] + &cur_w[j], || {
                "current payoff mismatch".into()
            })?;
            ensure(joint_surplus > current_sum, || "pair does not gain by trading".into())
        }
        Certificate::BlockingPair { man, woman } => {
            let (i, j) = (*man, *woman);
            ensure(!verdict.holds && concept == Concept::Ntu, || {
                "misplaced blocking pair".into()
            })?;
            ensure(i < n && j < n, || "agent out of range".into())?;
            ensure(u(i, j) > u(i, sigma(i)) && v(i, j) > v(husband(j), j), || {
                format!("({}, {}) does not block", i + 1, j + 1)
            })
        }
        Certificate::NoBlockingPair => {
            ensure(verdict.holds && concept == Concept::Ntu, || {
                "misplaced no-blocking-pair claim".into()
            })?;
            for i in 0..n {
                for j in 0..n {
                    ensure(!(u(i, j) > u(i, sigma(i)) && v(i, j) > v(husband(j), j)), || {
                        format!("({}, {}) blocks", i + 1, j + 1)
                    })?;
                }
            }
            Ok(())
        }
        Certificate::ImprovingCycle { men, women } => {
            ensure(!verdict.holds, || {
                "improving cycle attached to a holding verdict".into()
            })?;
            let len = men.len();
            ensure(len >= 2 && women.len() == len && distinct_in_range(men, n), || {
                "malformed cycle".into()
            })?;
            for t in 0..len {
                ensure(women[t] == sigma(men[(t + 1) % len]), || {
                    "cycle women do not follow the matching".into()
                })?;
            }
            // Gains of man men[t] and of woman women[t] from the reassignment.
            let gains: Vec<(Rational, Rational)> = (0..len)
                .map(|t| {
                    let (i, j) = (men[t], women[t]);
                    (u(i, j) - u(i, sigma(i)), v(i, j) - v(husband(j), j))
                })
                .collect();
            match concept {
                Concept::Tu => ensure(gains.iter().map(|(a, b)| a + b).sum::<Rational>().is_positive(), || {
                    "reassignment does not raise total surplus".into()
                }),
                Concept::ExPost => {
                    ensure(gains.iter().all(|(a, b)| !a.is_negative() && !b.is_negative()), || {
                        "someone loses in the reassignment".into()
                    })?;
                    ensure(gains.iter().any(|(a, b)| a.is_positive() || b.is_positive()), || {
                        "nobody gains in the reassignment".into()
                    })
                }
                _ => Err(format!("improving cycle cannot refute {concept}")),
            }
        }
        Certificate::DominatingLottery { lottery } => {
            ensure(!verdict.holds && concept == Concept::ExAnte, || {
                "misplaced dominating lottery".into()
            })?;
            ensure(lottery.n() == n, || "lottery size mismatch".into())?;
            let (lm, lw) = lottery_payoffs(market, lottery);
            let diffs: Vec<Rational> = lm
                .iter()
                .zip(&cur_m)
                .chain(lw.iter().zip(&cur_w))
                .map(|(a, b)| a - b)
                .collect();
            ensure(diffs.iter().all(|d| !d.is_negative()), || {
                "lottery hurts someone".into()
            })?;
            ensure(diffs.iter().any(|d| d.is_positive()), || "lottery helps nobody".into())
        }
        Certificate::AfriatWitness {
            v: vals, lambda, mu, ..
        } => {
            ensure(verdict.holds, || "Afriat witness attached to a failing verdict".into())?;
            ensure(vals.len() == n && lambda.len() == n, || {
                "witness has the wrong length".into()
            })?;
            ensure(lambda.iter().all(|l| l.is_positive()), || {
                "lambda must be positive".into()
            })?;
            let r = |i: usize, j: usize| u(i, sigma(i)) - u(i, j);
            let s = |i: usize, j: usize| v(husband(j), j) - v(i, j);
            match (concept, mu) {
                (Concept::ExAnte, Some(mu)) => {
                    ensure(mu.len() == n && mu.iter().all(|m| m.is_positive()), || {
                        "mu must be positive".into()
                    })?;
                    for i in 0..n {
                        for k in 0..n {
                            let j = sigma(k);
                            ensure(
                                i == k || &vals[k] - &vals[i] <= &lambda[i] * r(i, j) + &mu[j] * s(i, j),
                                || format!("Afriat inequality fails for ({}, {})", i + 1, k + 1),
                            )?;
                        }
                    }
                    Ok(())
                }
                (Concept::ExPost, None) => {
                    for i in 0..n {
                        for k in 0..n {
                            let j = sigma(k);
                            ensure(
                                i == k || &vals[k] - &vals[i] <= &lambda[i] * r(i, j).max(s(i, j)),
                                || format!("Afriat inequality fails for ({}, {})", i + 1, k + 1),
                            )?;
                        }
                    }
                    Ok(())
                }
                _ => Err(format!("Afriat witness has the wrong shape for {concept}")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::FarkasCertificate;
    use crate::rational::int;

    #[test]
    fn farkas_rejects_wrong_signs() {
        let mut sys = LinearSystem::new(1);
        sys.add_sparse(&[(0, int(1))], Relation::Ge, int(1));
        sys.add_sparse(&[(0, int(1))], Relation::Le, int(0));
        assert!(verify_farkas(
            &sys,
            &FarkasCertificate {
                multipliers: vec![int(1), int(1)]
            }
        ));
        assert!(!verify_farkas(
            &sys,
            &FarkasCertificate {
                multipliers: vec![int(-1), int(1)]
            }
        ));
        assert!(!verify_farkas(
            &sys,
            &FarkasCertificate {
                multipliers: vec![int(1), int(0)]
            }
        ));
    }

    #[test]
    fn motzkin_needs_nonzero_z() {
        let a = vec![vec![int(0)]];
        assert!(!verify_motzkin(&a, &[int(1)], &[int(0)]));
    }

    #[test]
    fn negative_cycle_must_be_simple() {
        let g = DifferenceConstraintGraph::new(vec![vec![int(0), int(-1)], vec![int(-1), int(0)]]);
        assert!(verify_negative_cycle(&g, &[0, 1]));
        assert!(!verify_negative_cycle(&g, &[0, 0]));
        assert!(!verify_difference_solution(&g, &[int(0), int(0)]));
    }
}
