use std::sync::Arc;

use proptest::prelude::*;
use satreconf::discretization::{discretize, IntervalSpec, Qual};
use satreconf::hybrid_model::StateVector;

fn single(v: f64) -> StateVector {
    let ids: Arc<[String]> = vec!["x".to_string()].into();
    StateVector::new(ids, vec![v]).unwrap()
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (-1e3f64..1e3, 0f64..1e3).prop_map(|(lb, w)| (lb, lb + w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn exactly_one_predicate_holds((lb, ub) in interval(), v in -3e3f64..3e3) {
        let spec = IntervalSpec::new("x", lb, ub).unwrap();
        let obs = discretize(&single(v), &[spec]).unwrap();
        let atoms = obs.atom_values();
        let low = atoms["low(x)"];
        let ok = atoms["ok(x)"];
        let high = atoms["high(x)"];
        prop_assert_eq!(u8::from(low) + u8::from(ok) + u8::from(high), 1);
        prop_assert_eq!(low, v < lb);
        prop_assert_eq!(high, v > ub);
        prop_assert_eq!(ok, lb <= v && v <= ub);
    }

    #[test]
    fn bounds_map_to_ok((lb, ub) in interval()) {
        let spec = IntervalSpec::new("x", lb, ub).unwrap();
        prop_assert_eq!(spec.classify(lb), Qual::Ok);
        prop_assert_eq!(spec.classify(ub), Qual::Ok);
        prop_assert_eq!(spec.classify(spec.midpoint()), Qual::Ok);
        prop_assert_eq!(spec.classify(lb.next_down()), Qual::Low);
        prop_assert_eq!(spec.classify(ub.next_up()), Qual::High);
    }

    #[test]
    fn classification_is_monotone((lb, ub) in interval(), a in -3e3f64..3e3, b in -3e3f64..3e3) {
        let spec = IntervalSpec::new("x", lb, ub).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(spec.classify(lo) <= spec.classify(hi));
    }
}

#[test]
fn non_finite_state_is_a_numeric_error() {
    let ids: Arc<[String]> = vec!["x".to_string()].into();
    for v in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
        assert!(matches!(StateVector::new(ids.clone(), vec![v]), Err(satreconf::Error::Numeric(_))));
    }
}
