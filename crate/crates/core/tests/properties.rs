use mcl_core::decision::check_lipschitz;
use mcl_core::domain::{distance, sample_points, DomainKind};
use mcl_core::{DecisionFunction, DomainSpec};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = DomainSpec> {
    (0usize..4, 2usize..40).prop_map(|(k, d)| DomainSpec::new(DomainKind::ALL[k], d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(spec in spec_strategy(), seed in any::<u64>()) {
        let pts = sample_points(&spec, seed, 3);
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        let xy = distance(&spec, x, y).unwrap();
        prop_assert_eq!(distance(&spec, x, x).unwrap(), 0.0);
        prop_assert_eq!(xy, distance(&spec, y, x).unwrap());
        prop_assert!(xy >= 0.0);
        let xz = distance(&spec, x, z).unwrap();
        let yz = distance(&spec, y, z).unwrap();
        prop_assert!(xz <= xy + yz + 1e-12);
        if let Some(diam) = spec.diameter() {
            prop_assert!(xy <= diam + 1e-12);
        }
    }

    #[test]
    fn decision_functions_are_lipschitz(spec in spec_strategy(), seed in any::<u64>(), r in 0.0f64..1.0) {
        let pts = sample_points(&spec, seed, 2);
        prop_assume!(pts[0] != pts[1]);
        let fs = [
            DecisionFunction::vantage_pair(&spec, pts[0].clone(), pts[1].clone()).unwrap(),
            DecisionFunction::ball(&spec, pts[0].clone(), r).unwrap(),
            DecisionFunction::pivot(&spec, pts[1].clone(), r - 0.5).unwrap(),
        ];
        for f in &fs {
            prop_assert!(check_lipschitz(f, &spec, seed ^ 1, 500).unwrap() <= 1e-9);
            let w = &sample_points(&spec, seed ^ 2, 1)[0];
            prop_assert_eq!(f.evaluate(&spec, w).unwrap(), f.evaluate(&spec, w).unwrap());
        }
    }
}
