use crowdc_core::metrics::kendall_tau;
use crowdc_core::types::{ItemId, ScoreFlavor, ScoreVector};
use proptest::prelude::*;

fn distinct_scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-1000i32..1000, 2..40)
        .prop_map(|s| s.into_iter().map(f64::from).collect::<Vec<_>>())
        .prop_shuffle()
}

fn vector(values: &[f64]) -> ScoreVector {
    ScoreVector::from_pairs(
        ScoreFlavor::Final,
        values.iter().enumerate().map(|(i, &v)| (ItemId(i as u32 + 1), v)),
    )
}

proptest! {
    #[test]
    fn own_order_gives_one(values in distinct_scores()) {
        let x = vector(&values);
        prop_assert_eq!(kendall_tau(&x, &x.ascending_order()).unwrap().tau, 1.0);
    }

    #[test]
    fn increasing_transform_is_invisible(values in distinct_scores()) {
        let x = vector(&values);
        let y = vector(&values.iter().map(|v| (v / 500.0).exp() * 3.0 + 1.0).collect::<Vec<_>>());
        let truth: Vec<ItemId> = x.items().collect();
        prop_assert_eq!(kendall_tau(&x, &truth).unwrap(), kendall_tau(&y, &truth).unwrap());
    }

    #[test]
    fn reversing_truth_negates(values in distinct_scores()) {
        let x = vector(&values);
        let truth: Vec<ItemId> = x.items().collect();
        let reversed: Vec<ItemId> = truth.iter().rev().copied().collect();
        let a = kendall_tau(&x, &truth).unwrap();
        let b = kendall_tau(&x, &reversed).unwrap();
        prop_assert!((a.tau + b.tau).abs() < 1e-12);
        prop_assert_eq!(a.concordant + a.discordant, a.n_pairs);
    }
}
