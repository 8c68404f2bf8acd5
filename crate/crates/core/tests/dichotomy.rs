//! Solver-based validity against direct evaluation of the ground constraints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satreconf::discretization::{discretize, Qual, QualitativeObservation};
use satreconf::hybrid_model::{build_three_tank, build_two_tank, BinaryAssignment, Configuration, TankSystem};
use satreconf::system_model::{build_system_model, SystemModel, Validity};

fn random_observation(rng: &mut ChaCha8Rng, sys: &TankSystem) -> QualitativeObservation {
    QualitativeObservation::from_pairs(
        sys.specs
            .iter()
            .map(|s| {
                let q = match rng.gen_range(0..6) {
                    0 => Qual::Low,
                    1 => Qual::High,
                    _ => Qual::Ok,
                };
                (s.state.clone(), q)
            })
            .collect(),
    )
}

fn random_inputs(rng: &mut ChaCha8Rng, sys: &TankSystem) -> BinaryAssignment {
    let n = sys.initial_inputs.len();
    // mostly near the commanded inputs, sometimes uniform
    let values = if rng.gen_bool(0.5) {
        sys.initial_inputs.values().iter().map(|&v| v ^ rng.gen_bool(0.15)).collect()
    } else {
        (0..n).map(|_| rng.gen_bool(0.5)).collect()
    };
    BinaryAssignment::new(sys.initial_inputs.ids().into(), values).unwrap()
}

/// Each constraint read literally: the guard is a conjunction of observation
/// atoms; the consequence is evaluated over the inputs.
fn ground_truth(sm: &SystemModel, q: &QualitativeObservation, inputs: &BinaryAssignment) -> bool {
    let is_atom_true = |a: &str| -> bool {
        let (pred, rest) = a.split_once('(').unwrap();
        let state = rest.trim_end_matches(')');
        q.get(state).map(|v| v.as_str() == pred).unwrap()
    };
    sm.constraints().iter().all(|c| {
        !c.guard.iter().all(|a| is_atom_true(a))
            || c.consequence.eval(&|name| inputs.get(name).expect("consequence mentions only inputs"))
    })
}

fn check_system(sys: TankSystem, seed: u64) -> (usize, usize) {
    let sm = build_system_model(&sys).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut valid, mut invalid) = (0, 0);
    for _ in 0..500 {
        let q = random_observation(&mut rng, &sys);
        let inputs = random_inputs(&mut rng, &sys);
        let config = Configuration { states: sys.initial_state(), inputs: inputs.clone() };
        let verdict = sm.check_validity(&config, &q).unwrap();
        let expected = ground_truth(&sm, &q, &inputs);
        assert_eq!(verdict == Validity::Valid, expected, "{q} under {:?}", inputs.to_map());
        assert_eq!(sm.holds(&q, &inputs).unwrap(), expected);
        if expected {
            valid += 1;
        } else {
            invalid += 1;
        }
    }
    (valid, invalid)
}

#[test]
fn three_tank_validity_matches_direct_evaluation() {
    let (valid, invalid) = check_system(build_three_tank(), 23);
    assert!(valid > 50 && invalid > 50, "{valid} valid / {invalid} invalid");
}

#[test]
fn two_tank_validity_matches_direct_evaluation() {
    let (valid, invalid) = check_system(build_two_tank(), 29);
    assert!(valid > 50 && invalid > 50, "{valid} valid / {invalid} invalid");
}

#[test]
fn all_ok_observation_is_valid_for_every_input_assignment() {
    for sys in [build_three_tank(), build_two_tank()] {
        let sm = build_system_model(&sys).unwrap();
        let q = discretize(&sys.initial_state(), &sys.specs).unwrap();
        assert!(q.is_all_ok());
        let n = sys.initial_inputs.len();
        for code in 0u32..1 << n {
            let values = (0..n).map(|i| code >> i & 1 == 1).collect();
            let inputs = BinaryAssignment::new(sys.initial_inputs.ids().into(), values).unwrap();
            let config = Configuration { states: sys.initial_state(), inputs };
            assert_eq!(sm.check_validity(&config, &q).unwrap(), Validity::Valid);
        }
        assert!(sm.constraints().iter().all(|c| c.guard.iter().any(|a| !a.starts_with("ok("))));
    }
}
