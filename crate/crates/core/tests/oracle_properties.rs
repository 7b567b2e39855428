use ic_capacity::discrete::{maximize_expression, SearchConfig};
use ic_capacity::exec::Exec;
use ic_capacity::expr::{DecodeOrder, Expression};
use ic_capacity::oracle::{
    brute_force_sum_capacity, conditioning_with, degradation_equivalence_check,
    nletter_inequality_check, random_degraded_pair, ConditioningKind, ConditioningSpec,
    GaussianSystem, RandomCode, SLACK,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nletter_residual_respects_degradation(seed: u64, n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_degraded_pair(&mut rng).unwrap();
        let sizes = [rng.random_range(1..=4), rng.random_range(1..=4)];
        let code = RandomCode::random(&[2, 2], n, &sizes, &mut rng).unwrap();
        for (om1, om2) in [(&[1][..], &[][..]), (&[0, 1][..], &[][..]), (&[0][..], &[1][..])] {
            // receiver 2 is the degraded one
            let r = nletter_inequality_check(&ch, &code, (om1, om2), (1, 0)).unwrap();
            prop_assert!(r <= SLACK, "{r}");
        }
    }

    #[test]
    fn degradation_construction_is_exact(seed: u64, mu1 in 1usize..=3, mu2 in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sys, alpha) = GaussianSystem::random_proportional(mu1, mu2, &mut rng);
        let ratio = sys.ratio();
        if let Some(r) = ratio {
            prop_assert!((r - alpha).abs() < 1e-9);
            prop_assert!(degradation_equivalence_check(&sys, r).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn ratio_rejects_non_proportional_rows(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut b = a.clone();
        b[0] *= 1.5;
        b[1] *= 0.5;
        prop_assume!(a[0].abs() > 1e-3 && a[1].abs() > 1e-3);
        let sys = GaussianSystem::new(a, b, 2).unwrap();
        prop_assert!(sys.ratio().is_none());
    }
}

fn spec(kind: ConditioningKind, decoded: Vec<usize>, conditioned: Vec<usize>) -> ConditioningSpec {
    ConditioningSpec {
        kind,
        decoded,
        conditioned,
        weak: 1,
        strong: 0,
        d_card: 2,
        u_card: 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conditioning_never_breaks_degradation(seed: u64) {
        let ch = random_degraded_pair(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for s in [
            spec(ConditioningKind::Inputs, vec![0, 1], vec![]),
            spec(ConditioningKind::Inputs, vec![0], vec![1]),
            spec(ConditioningKind::Auxiliary, vec![0], vec![1]),
            spec(ConditioningKind::PartialInputs { omega: vec![0] }, vec![0, 1], vec![]),
        ] {
            let v = conditioning_with(&ch, &s, 200, seed, Exec::default()).unwrap();
            prop_assert!(v.is_none(), "{:?}", v);
        }
    }

    #[test]
    fn grid_never_beats_search(seed: u64) {
        let ch = random_degraded_pair(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let cfg = SearchConfig { restarts: 12, ..Default::default() };
        for e in [
            Expression::interference_as_noise(2),
            Expression::successive_decoding(&DecodeOrder::canonical(2)),
        ] {
            let grid = brute_force_sum_capacity(&ch, &e, 12).unwrap();
            let search = maximize_expression(&ch, &e, &cfg).unwrap();
            prop_assert!(grid.value <= search.value + 1e-9, "{} > {}", grid.value, search.value);
        }
    }
}
