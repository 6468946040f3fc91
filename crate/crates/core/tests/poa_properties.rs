use matchcert::market::lottery_payoffs;
use matchcert::market::ordinal_of;
use matchcert::poa::{gap_lower_bound, generate_poa_market, transfer_lottery, welfare_gap, PoaConfig};
use matchcert::rational::{frac, int};
use matchcert::stable::enumerate_stable;
use proptest::prelude::*;

fn config() -> impl Strategy<Value = PoaConfig> {
    (2usize..=4, 1u32..=3, 2i64..=20).prop_filter_map("valid", |(half, g, k)| {
        PoaConfig::new(2 * half, g, int(k), frac(1, 100)).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_utilities_are_bounded_with_one_top(cfg in config()) {
        let m = generate_poa_market(&cfg).unwrap();
        let n = cfg.n;
        for i in 0..n {
            prop_assert_eq!((0..n).filter(|&j| *m.u(i, j) == cfg.k).count(), 1);
            prop_assert_eq!((0..n).filter(|&j| *m.v(j, i) == cfg.k).count(), 1);
            for j in 0..n {
                prop_assert!(*m.u(i, j) >= int(0) && *m.u(i, j) <= cfg.k);
                prop_assert!(*m.v(i, j) >= int(0) && *m.v(i, j) <= cfg.k);
            }
        }
    }

    #[test]
    fn generated_market_has_one_stable_matching(cfg in config()) {
        let m = generate_poa_market(&cfg).unwrap();
        prop_assert_eq!(enumerate_stable(&ordinal_of(&m).unwrap()).unwrap().len(), 1);
    }

    #[test]
    fn transfer_lottery_gives_half_the_top(cfg in config()) {
        let m = generate_poa_market(&cfg).unwrap();
        let (u, v) = lottery_payoffs(&m, &transfer_lottery(cfg.n));
        let half = &cfg.k / int(2);
        for l in 0..cfg.n - 1 {
            prop_assert!(u[l] >= half && v[l] >= half);
        }
    }
}

#[test]
fn ratio_meets_the_lower_bound_for_small_sizes() {
    for n in [4, 6] {
        for g in [1, 2] {
            let cfg = PoaConfig::new(n, g, int(10), frac(1, 100)).unwrap();
            let m = generate_poa_market(&cfg).unwrap();
            let gap = welfare_gap(&m, &cfg.epsilon).unwrap();
            assert!(gap.ratio.unwrap() >= gap_lower_bound(&cfg), "n={n} g={g}");
        }
    }
}
