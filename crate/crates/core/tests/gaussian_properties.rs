use ic_capacity::expr::{BoundStructure, DecodeOrder};
use ic_capacity::gaussian::{
    best_certified_bound, check_proportional_degradation, classify_three_user, outer_bound, psi,
    successive_decoding_sum_rate, GaussianIC, Regime,
};
use proptest::prelude::*;

fn gain() -> impl Strategy<Value = f64> {
    -3.0f64..3.0
}

fn channel(k: usize) -> impl Strategy<Value = GaussianIC> {
    (
        prop::collection::vec(prop::collection::vec(gain(), k), k),
        prop::collection::vec(0.0f64..10.0, k),
    )
        .prop_map(|(mut g, p)| {
            for (i, row) in g.iter_mut().enumerate() {
                if row[i].abs() < 0.1 {
                    row[i] = 1.0;
                }
            }
            GaussianIC::new(g, p).unwrap()
        })
}

/// Members of the three-user family with strong links into receiver 1 and
/// proportional gains; the power condition may or may not hold.
fn regime_family() -> impl Strategy<Value = GaussianIC> {
    (
        1.0f64..2.5,
        1.0f64..2.5,
        0.0f64..1.0,
        0.0f64..2.0,
        prop::collection::vec(0.0f64..5.0, 3),
    )
        .prop_map(|(a12, a23, a31, a21, p)| {
            GaussianIC::new(
                vec![
                    vec![1.0, a12, a12 * a23],
                    vec![a21, 1.0, a23],
                    vec![a31, a31 * a12, 1.0],
                ],
                p,
            )
            .unwrap()
        })
}

fn subsets(k: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>, usize)> {
    (prop::collection::vec(0u8..3, k), 0..k).prop_map(move |(lab, j)| {
        let s = (0..k).filter(|&i| lab[i] == 1).collect();
        let t = (0..k).filter(|&i| lab[i] == 2).collect();
        (s, t, j)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn psi_is_increasing_and_concave(x in 0.0f64..100.0, y in 0.0f64..100.0) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        prop_assert!(psi(lo).unwrap() <= psi(hi).unwrap());
        let mid = psi(0.5 * (lo + hi)).unwrap();
        prop_assert!(mid + 1e-12 >= 0.5 * (psi(lo).unwrap() + psi(hi).unwrap()));
    }

    #[test]
    fn normalization_preserves_rates(ch in channel(3), (s, t, j) in subsets(3)) {
        let n = ch.normalize().unwrap();
        prop_assert!(n.is_normalized());
        let a = ch.cmi(&s, &t, j).unwrap();
        let b = n.cmi(&s, &t, j).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
    }

    #[test]
    fn cmi_monotone_in_conditioning(ch in channel(3), (s, t, j) in subsets(3)) {
        // decoding more users never lowers the rate
        let mut more = s.clone();
        more.extend(t.iter().copied());
        let a = ch.cmi(&s, &[], j).unwrap();
        prop_assert!(ch.cmi(&more, &[], j).unwrap() + 1e-12 >= a);
    }

    #[test]
    fn power_condition_matches_direct_evaluation(
        a12 in 0.0f64..2.0, a21 in 0.0f64..2.0, a23 in 0.0f64..2.0,
        p in prop::collection::vec(0.01f64..10.0, 3),
    ) {
        let predicate = p[0] + 1.0 - a12 * a12 * (a21 * a21 * p[0] + 1.0);
        prop_assume!(predicate.abs() > 1e-9);
        let ch = GaussianIC::new(
            vec![vec![1.0, a12, a12 * a23], vec![a21, 1.0, a23], vec![0.3, 0.3 * a12, 1.0]],
            p,
        ).unwrap();
        let first = ch.cmi(&[1], &[2], 1).unwrap() - ch.cmi(&[1], &[2], 0).unwrap();
        prop_assert_eq!(first >= 0.0, predicate >= 0.0);
        // with a13 = a12 a23 the second inequality reduces to the same predicate
        if a23 > 0.1 && predicate.abs() > 1e-6 {
            let second = ch.cmi(&[2], &[], 1).unwrap() - ch.cmi(&[2], &[], 0).unwrap();
            prop_assert_eq!(second >= 0.0, predicate >= 0.0);
        }
    }

    #[test]
    fn degradation_orders_gaussian_rates(ch in channel(3), (s, t, _j) in subsets(3), w in 0usize..3, st in 0usize..3) {
        prop_assume!(!s.is_empty() && w != st);
        if let Some(alpha) = check_proportional_degradation(&ch, (w, st), &s, &t).unwrap() {
            prop_assert!(alpha.abs() <= 1.0 + 1e-9);
            prop_assert!(ch.cmi(&s, &t, w).unwrap() <= ch.cmi(&s, &t, st).unwrap() + 1e-12);
        }
    }

    #[test]
    fn successive_decoding_below_certified_bounds(ch in regime_family()) {
        let sd = successive_decoding_sum_rate(&ch, &DecodeOrder::canonical(3)).unwrap();
        if let Some(bound) = best_certified_bound(&ch).unwrap() {
            prop_assert!(sd <= bound + 1e-9, "sd {} bound {}", sd, bound);
        }
    }

    #[test]
    fn successive_decoding_below_certified_bounds_random(ch in channel(3)) {
        let sd = successive_decoding_sum_rate(&ch, &DecodeOrder::canonical(3)).unwrap();
        if let Some(bound) = best_certified_bound(&ch).unwrap() {
            prop_assert!(sd <= bound + 1e-9);
        }
    }

    #[test]
    fn certified_capacity_is_achieved_and_matches_bounds(ch in regime_family()) {
        let r = classify_three_user(&ch).unwrap();
        if r.regime == Regime::ThreeUserSuccessive {
            let c = r.certified_capacity.unwrap();
            let sd = successive_decoding_sum_rate(&ch, &DecodeOrder::canonical(3)).unwrap();
            prop_assert!((c - sd).abs() < 1e-9, "capacity {} sd {}", c, sd);
            let b1 = outer_bound(&ch, &BoundStructure::PermutationCuts { perm: vec![1, 0, 2], cuts: vec![2, 3] }).unwrap();
            let b2 = outer_bound(&ch, &BoundStructure::PermutationCuts { perm: vec![2, 1, 0], cuts: vec![3] }).unwrap();
            prop_assert!(b1.certified && b2.certified);
            prop_assert!((b1.value.min(b2.value) - c).abs() < 1e-9);
        } else {
            prop_assert!(r.certified_capacity.is_none());
        }
    }
}
