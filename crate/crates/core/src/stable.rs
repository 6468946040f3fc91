//! Deferred acceptance, enumeration of stable matchings, lattice operations
//! and isolation.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::{Matching, OrdinalMarket};

/// Markets up to this size are enumerated by filtering all permutations.
pub const BRUTE_FORCE_LIMIT: usize = 8;
/// Largest market the rotation path accepts.
pub const ROTATION_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Men,
    Women,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Brute force up to [`BRUTE_FORCE_LIMIT`], rotations above.
    #[default]
    Auto,
    BruteForce,
    Rotations,
}

/// Lexicographically sorted, duplicate-free list of all stable matchings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSet {
    matchings: Vec<Matching>,
}

impl StableSet {
    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    pub fn contains(&self, m: &Matching) -> bool {
        self.matchings.binary_search(m).is_ok()
    }
}

/// First blocking pair `(man, woman)` in lexicographic order.
pub fn blocking_pair(market: &OrdinalMarket, matching: &Matching) -> Option<(usize, usize)> {
    let n = market.n();
    let husband = matching.inverse();
    for i in 0..n {
        let wife = matching.partner_of_man(i);
        for j in 0..n {
            if market.man_prefers(i, j, wife) && market.woman_prefers(j, i, husband[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

pub fn is_stable(market: &OrdinalMarket, matching: &Matching) -> bool {
    blocking_pair(market, matching).is_none()
}

/// Gale–Shapley with the given side proposing; returns the proposing
/// side's optimal stable matching.
pub fn deferred_acceptance(market: &OrdinalMarket, proposing: Side) -> Matching {
    let n = market.n();
    let prop_prefs = match proposing {
        Side::Men => market.men_prefs(),
        Side::Women => market.women_prefs(),
    };
    // Whether the receiver prefers the new proposer to the one held.
    let accepts = |r: usize, new: usize, old: usize| match proposing {
        Side::Men => market.woman_prefers(r, new, old),
        Side::Women => market.man_prefers(r, new, old),
    };
    let mut next_choice = vec![0usize; n];
    let mut held: Vec<Option<usize>> = vec![None; n];
    let mut free: VecDeque<usize> = (0..n).collect();
    while let Some(p) = free.pop_front() {
        let target = prop_prefs[p][next_choice[p]];
        next_choice[p] += 1;
        match held[target] {
            None => held[target] = Some(p),
            Some(current) if accepts(target, p, current) => {
                held[target] = Some(p);
                free.push_back(current);
            }
            Some(_) => free.push_back(p),
        }
    }
    // held[x] is the proposer matched to receiver x.
    let mut partner = vec![0; n];
    for (receiver, prop) in held.iter().enumerate() {
        let prop = prop.expect("complete lists give a perfect matching");
        match proposing {
            Side::Men => partner[prop] = receiver,
            Side::Women => partner[receiver] = prop,
        }
    }
    Matching::new(partner).expect("deferred acceptance yields a permutation")
}

pub fn enumerate_stable(market: &OrdinalMarket) -> Result<StableSet> {
    enumerate_stable_with(market, Strategy::Auto)
}

pub fn enumerate_stable_with(market: &OrdinalMarket, strategy: Strategy) -> Result<StableSet> {
    let n = market.n();
    let use_brute = match strategy {
        Strategy::BruteForce => {
            if n > BRUTE_FORCE_LIMIT {
                return Err(Error::SizeLimit {
                    n,
                    limit: BRUTE_FORCE_LIMIT,
                });
            }
            true
        }
        Strategy::Rotations => false,
        Strategy::Auto => n <= BRUTE_FORCE_LIMIT,
    };
    if !use_brute && n > ROTATION_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: ROTATION_LIMIT,
        });
    }
    let mut matchings = if use_brute {
        brute_force(market)
    } else {
        by_rotations(market)
    };
    matchings.sort();
    Ok(StableSet { matchings })
}

fn brute_force(market: &OrdinalMarket) -> Vec<Matching> {
    let n = market.n();
    // Fan out over the first man's partner; each prefix is independent.
    (0..n)
        .into_par_iter()
        .flat_map_iter(|first| {
            Matching::all(n)
                .filter(move |m| m.partner_of_man(0) == first)
                .filter(|m| is_stable(market, m))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Breadth-first search from the man-optimal matching, eliminating every
/// exposed rotation at each step.
fn by_rotations(market: &OrdinalMarket) -> Vec<Matching> {
    let start = deferred_acceptance(market, Side::Men);
    let mut seen = BTreeSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::from([start]);
    while let Some(current) = queue.pop_front() {
        for rotation in exposed_rotations(market, &current) {
            let next = eliminate_rotation(&current, &rotation);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen.into_iter().collect()
}

/// Exposed rotations of a stable matching, each listed as the men in it.
pub fn exposed_rotations(market: &OrdinalMarket, matching: &Matching) -> Vec<Vec<usize>> {
    let n = market.n();
    let husband = matching.inverse();
    // successor[m]: husband of the first woman after m's wife who prefers m.
    let successor: Vec<Option<usize>> = (0..n)
        .map(|m| {
            let start = market.man_rank(m, matching.partner_of_man(m)) + 1;
            market.men_prefs()[m][start..]
                .iter()
                .find(|&&w| market.woman_prefers(w, m, husband[w]))
                .map(|&w| husband[w])
        })
        .collect();
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on current path, 2 done
    let mut rotations = Vec::new();
    for s in 0..n {
        if state[s] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = Some(s);
        while let Some(m) = cur {
            if state[m] == 2 {
                break;
            }
            if state[m] == 1 {
                let pos = path.iter().position(|&x| x == m).expect("on path");
                rotations.push(path[pos..].to_vec());
                break;
            }
            state[m] = 1;
            path.push(m);
            cur = successor[m];
        }
        for m in path {
            state[m] = 2;
        }
    }
    rotations
}

/// Each man in the rotation takes the wife of the next man.
fn eliminate_rotation(matching: &Matching, rotation: &[usize]) -> Matching {
    let mut partner = matching.as_slice().to_vec();
    let k = rotation.len();
    for t in 0..k {
        partner[rotation[t]] = matching.partner_of_man(rotation[(t + 1) % k]);
    }
    Matching::new(partner).expect("rotation permutes wives")
}

fn check_stable(market: &OrdinalMarket, m: &Matching) -> Result<()> {
    if m.n() != market.n() || !is_stable(market, m) {
        return Err(Error::NotStableInput);
    }
    Ok(())
}

/// Every man gets the better of his two partners.
pub fn lattice_join(a: &Matching, b: &Matching, market: &OrdinalMarket) -> Result<Matching> {
    check_stable(market, a)?;
    check_stable(market, b)?;
    let partner = (0..market.n())
        .map(|i| {
            let (x, y) = (a.partner_of_man(i), b.partner_of_man(i));
            if market.man_prefers(i, y, x) {
                y
            } else {
                x
            }
        })
        .collect();
    Matching::new(partner).map_err(|_| Error::NotStableInput)
}

/// Every man gets the worse of his two partners.
pub fn lattice_meet(a: &Matching, b: &Matching, market: &OrdinalMarket) -> Result<Matching> {
    check_stable(market, a)?;
    check_stable(market, b)?;
    let partner = (0..market.n())
        .map(|i| {
            let (x, y) = (a.partner_of_man(i), b.partner_of_man(i));
            if market.man_prefers(i, y, x) {
                x
            } else {
                y
            }
        })
        .collect();
    Matching::new(partner).map_err(|_| Error::NotStableInput)
}

/// No other stable matching shares a couple with `mu`.
pub fn is_isolated(mu: &Matching, stable_set: &StableSet) -> Result<bool> {
    if !stable_set.contains(mu) {
        return Err(Error::NotMember);
    }
    Ok(stable_set
        .matchings()
        .iter()
        .filter(|m| *m != mu)
        .all(|other| (0..mu.n()).all(|i| other.partner_of_man(i) != mu.partner_of_man(i))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::market::{ordinal_of, tie_broken_ordinal};

    fn market(men: &[&[usize]], women: &[&[usize]]) -> OrdinalMarket {
        OrdinalMarket::new(
            men.iter().map(|l| l.to_vec()).collect(),
            women.iter().map(|l| l.to_vec()).collect(),
        )
        .unwrap()
    }

    // Latin-square market with three stable matchings.
    fn three_stable() -> OrdinalMarket {
        market(
            &[&[0, 1, 2], &[1, 2, 0], &[2, 0, 1]],
            &[&[1, 2, 0], &[2, 0, 1], &[0, 1, 2]],
        )
    }

    #[test]
    fn mutual_first_choices_give_identity() {
        let ord = ordinal_of(&examples::mutual_first_choices(4)).unwrap();
        assert_eq!(deferred_acceptance(&ord, Side::Men), Matching::identity(4));
        assert_eq!(deferred_acceptance(&ord, Side::Women), Matching::identity(4));
        assert_eq!(enumerate_stable(&ord).unwrap().matchings(), &[Matching::identity(4)]);
    }

    #[test]
    fn transfer_example_has_a_unique_stable_matching() {
        let ord = tie_broken_ordinal(&examples::transfers_needed());
        let set = enumerate_stable(&ord).unwrap();
        assert_eq!(set.matchings(), &[Matching::identity(3)]);
        assert!(is_isolated(&Matching::identity(3), &set).unwrap());
    }

    #[test]
    fn latin_square_has_three_disjoint_stable_matchings() {
        let ord = three_stable();
        let set = enumerate_stable(&ord).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(deferred_acceptance(&ord, Side::Men), Matching::identity(3));
        assert_eq!(set, enumerate_stable_with(&ord, Strategy::Rotations).unwrap());
        for m in set.matchings() {
            assert!(is_isolated(m, &set).unwrap());
        }
    }

    #[test]
    fn join_and_meet_reach_the_extremes() {
        let ord = three_stable();
        let set = enumerate_stable(&ord).unwrap();
        let top = deferred_acceptance(&ord, Side::Men);
        let bottom = deferred_acceptance(&ord, Side::Women);
        for a in set.matchings() {
            assert_eq!(lattice_join(a, a, &ord).unwrap(), *a);
            assert_eq!(lattice_join(&top, a, &ord).unwrap(), top);
            assert_eq!(lattice_meet(&bottom, a, &ord).unwrap(), bottom);
        }
    }

    #[test]
    fn lattice_rejects_unstable_inputs() {
        let ord = tie_broken_ordinal(&examples::transfers_needed());
        let bad = Matching::new(vec![1, 0, 2]).unwrap();
        assert_eq!(
            lattice_join(&bad, &Matching::identity(3), &ord),
            Err(Error::NotStableInput)
        );
    }

    #[test]
    fn isolation_requires_membership() {
        let ord = three_stable();
        let set = enumerate_stable(&ord).unwrap();
        let outsider = Matching::new(vec![0, 2, 1]).unwrap();
        assert!(!set.contains(&outsider));
        assert_eq!(is_isolated(&outsider, &set), Err(Error::NotMember));
    }

    #[test]
    fn brute_force_refuses_large_markets() {
        let n = BRUTE_FORCE_LIMIT + 1;
        let ord = ordinal_of(&examples::mutual_first_choices(n)).unwrap();
        assert!(matches!(
            enumerate_stable_with(&ord, Strategy::BruteForce),
            Err(Error::SizeLimit { .. })
        ));
        assert_eq!(enumerate_stable(&ord).unwrap().len(), 1);
    }
}
