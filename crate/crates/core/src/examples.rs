//! Small reference markets that separate the solution concepts.
//!
//! Each constructor documents the verdict pattern of the identity matching
//! (or, for [`no_weight_repair`], of its unique stable matching).

use crate::market::{CardinalMarket, Matching};
use crate::rational::{frac, int, Rational};

/// 3×3 market where the identity is the only NTU stable and the only TU
/// stable matching, yet it needs transfers: man 1 and woman 2 have joint
/// surplus 3 against current payoffs 0 + 2.
pub fn transfers_needed() -> CardinalMarket {
    CardinalMarket::from_integers(
        &[&[0, 2, 1], &[1, 2, 0], &[1, 0, 2]],
        &[&[2, 1, 0], &[1, 2, 0], &[0, 1, 2]],
    )
    .expect("static market")
}

/// 2×2 market: identity is TU stable but blocked by man 2 and woman 1.
pub fn tu_not_ntu() -> CardinalMarket {
    CardinalMarket::from_integers(&[&[0, -2], &[1, 0]], &[&[0, -2], &[1, 0]]).expect("static market")
}

/// 3×3 cyclic market: identity is NTU stable but a fair lottery over all six
/// matchings gives every agent 1/3 instead of 0.
pub fn ntu_not_ex_ante() -> CardinalMarket {
    CardinalMarket::from_integers(
        &[&[0, 2, -1], &[-1, 0, 2], &[2, -1, 0]],
        &[&[0, -1, 2], &[2, 0, -1], &[-1, 2, 0]],
    )
    .expect("static market")
}

/// 2×2 market: identity is ex-ante efficient but neither TU nor NTU stable.
pub fn ex_ante_not_tu() -> CardinalMarket {
    CardinalMarket::from_integers(&[&[0, 1], &[-2, 0]], &[&[0, 1], &[3, 0]]).expect("static market")
}

/// Payoff bonus man 1 gets from woman 1 in [`no_weight_repair`].
pub fn no_weight_repair_delta() -> Rational {
    frac(1, 100)
}

/// 4×4 market (with ties in two women's columns) whose unique stable
/// matching `m1-w3, m2-w4, m3-w1, m4-w2` cannot be made no-trade stable by
/// any positive reweighting of the agents' utilities.
pub fn no_weight_repair() -> CardinalMarket {
    let h = || frac(1, 2);
    let u = vec![
        vec![int(1) + no_weight_repair_delta(), int(0), h(), int(-1)],
        vec![int(0), int(1), int(-1), h()],
        vec![h(), frac(1, 5), frac(1, 3), frac(1, 4)],
        vec![frac(1, 5), h(), frac(1, 3), frac(1, 4)],
    ];
    let v = vec![
        vec![int(0), int(1), h(), int(-1)],
        vec![int(1), int(0), int(-1), h()],
        vec![h(), frac(1, 5), frac(1, 3), frac(1, 4)],
        vec![frac(1, 5), h(), frac(1, 3), frac(1, 4)],
    ];
    CardinalMarket::new(u, v).expect("static market")
}

/// The stable matching of [`no_weight_repair`].
pub fn no_weight_repair_matching() -> Matching {
    Matching::new(vec![2, 3, 0, 1]).expect("static matching")
}

/// Market in which every man's favourite woman is the woman of the same
/// index and she likes him best too.
pub fn mutual_first_choices(n: usize) -> CardinalMarket {
    // Off-diagonal entries are distinct negative cyclic offsets.
    let m = |a: usize, b: usize| {
        if a == b {
            int(n as i64)
        } else {
            int(-(((b + n - a) % n) as i64))
        }
    };
    let u = (0..n).map(|i| (0..n).map(|j| m(i, j)).collect()).collect();
    let v = (0..n).map(|i| (0..n).map(|j| m(j, i)).collect()).collect();
    CardinalMarket::new(u, v).expect("square by construction")
}
