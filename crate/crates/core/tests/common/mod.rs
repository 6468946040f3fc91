//! Proptest strategies shared by the property suites.
#![allow(dead_code)]

use matchcert::market::{CardinalMarket, Matching, OrdinalMarket};
use matchcert::rational::frac;
use proptest::prelude::*;

/// Entries `k/1000` with `|k| ≤ 2000`, as in the random-market generator.
pub fn entry() -> impl Strategy<Value = i64> {
    -2000i64..=2000
}

pub fn market(n: usize) -> impl Strategy<Value = CardinalMarket> {
    proptest::collection::vec(entry(), 2 * n * n).prop_map(move |raw| {
        let m = |off: usize| {
            (0..n)
                .map(|i| (0..n).map(|j| frac(raw[off + i * n + j], 1000)).collect())
                .collect()
        };
        CardinalMarket::new(m(0), m(n * n)).expect("square")
    })
}

/// Markets on a coarse grid so that ties actually occur.
pub fn coarse_market(n: usize) -> impl Strategy<Value = CardinalMarket> {
    proptest::collection::vec(-2i64..=2, 2 * n * n).prop_map(move |raw| {
        let m = |off: usize| {
            (0..n)
                .map(|i| (0..n).map(|j| frac(raw[off + i * n + j], 1)).collect())
                .collect()
        };
        CardinalMarket::new(m(0), m(n * n)).expect("square")
    })
}

pub fn strict_market(n: usize) -> impl Strategy<Value = CardinalMarket> {
    market(n).prop_filter("strict", CardinalMarket::is_strict)
}

pub fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

pub fn matching(n: usize) -> impl Strategy<Value = Matching> {
    permutation(n).prop_map(|p| Matching::new(p).expect("permutation"))
}

pub fn ordinal(n: usize) -> impl Strategy<Value = OrdinalMarket> {
    (
        proptest::collection::vec(permutation(n), n),
        proptest::collection::vec(permutation(n), n),
    )
        .prop_map(|(m, w)| OrdinalMarket::new(m, w).expect("permutations"))
}

/// A market of size `lo..=hi` paired with a matching of the same size.
pub fn market_and_matching(lo: usize, hi: usize) -> impl Strategy<Value = (CardinalMarket, Matching)> {
    (lo..=hi).prop_flat_map(|n| (market(n), matching(n)))
}
