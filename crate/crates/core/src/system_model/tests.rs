use super::*;
use crate::discretization::discretize;
use crate::hybrid_model::{build_three_tank, build_two_tank};

fn three_sm_with(constraints: &[(&str, &str)]) -> (TankSystem, SystemModel) {
    let sys = build_three_tank();
    let mut sm = SystemModel::for_automaton(&sys.automaton, &sys.specs).unwrap();
    for (g, t) in constraints {
        sm.push(ReconfConstraint::parse(g, t, "").unwrap()).unwrap();
    }
    (sys, sm)
}

fn inputs(sys: &TankSystem, on: &[&str]) -> BinaryAssignment {
    sys.automaton
        .binary_assignment(sys.automaton.inputs().iter().map(|i| on.contains(&i.id.as_str())).collect())
        .unwrap()
}

fn config(sys: &TankSystem, x: &[f64], on: &[&str]) -> (Configuration, QualitativeObservation) {
    let states = sys.automaton.state_vector(x.to_vec()).unwrap();
    let q = discretize(&states, &sys.specs).unwrap();
    (Configuration { states, inputs: inputs(sys, on) }, q)
}

#[test]
fn leak_constraint_decides_validity() {
    let (sys, sm) = three_sm_with(&[("low(x1)", "!v12b | ext_T1")]);
    let (c, q) = config(&sys, &[4.0, 15.0, 15.0], &["p1", "v12b"]);
    assert_eq!(sm.check_validity(&c, &q).unwrap(), Validity::Invalid);
    let (c, q) = config(&sys, &[4.0, 15.0, 15.0], &["p1"]);
    assert_eq!(sm.check_validity(&c, &q).unwrap(), Validity::Valid);
    let (c, q) = config(&sys, &[4.0, 15.0, 15.0], &["p1", "v12b", "ext_T1"]);
    assert_eq!(sm.check_validity(&c, &q).unwrap(), Validity::Valid);
    // all ok: vacuous
    let (c, q) = config(&sys, &[15.0, 15.0, 15.0], &["v12b"]);
    assert_eq!(sm.check_validity(&c, &q).unwrap(), Validity::Valid);
}

#[test]
fn vocabulary_split_enforced() {
    let (_, mut sm) = three_sm_with(&[]);
    let bad_guard = ReconfConstraint::parse("v12b", "ext_T1", "").unwrap();
    assert!(matches!(sm.push(bad_guard), Err(Error::Authoring(_))));
    let bad_then = ReconfConstraint::parse("low(x1)", "high(x2)", "").unwrap();
    assert!(matches!(sm.push(bad_then), Err(Error::Authoring(_))));
    let unknown = ReconfConstraint::parse("low(x9)", "ext_T1", "").unwrap();
    assert!(matches!(sm.push(unknown), Err(Error::Authoring(_))));
    let unknown = ReconfConstraint::parse("low(x1)", "v99", "").unwrap();
    assert!(matches!(sm.push(unknown), Err(Error::Authoring(_))));
    assert!(ReconfConstraint::parse("low(x1) | low(x2)", "ext_T1", "").is_err());
    assert!(sm.constraints().is_empty());
}

#[test]
fn contradictory_pair_is_unsat() {
    let (sys, sm) = three_sm_with(&[("low(x1)", "p1"), ("low(x2)", "!p1")]);
    let (_, q) = config(&sys, &[4.0, 4.0, 15.0], &[]);
    let cnf = sm.instantiate_cnf(&q).unwrap();
    assert_eq!(sat::sat(&cnf), Verdict::Unsat);
    // one guard alone is satisfiable
    let (_, q) = config(&sys, &[4.0, 15.0, 15.0], &[]);
    assert_eq!(sat::sat(&sm.instantiate_cnf(&q).unwrap()), Verdict::Sat);
}

#[test]
fn instantiate_requires_full_observation() {
    let (_, sm) = three_sm_with(&[]);
    let partial = QualitativeObservation::from_pairs(vec![("x1".into(), Qual::Low)]);
    assert!(matches!(sm.instantiate(&partial), Err(Error::Config(_))));
}

#[test]
fn at_most_formula_counts() {
    let atoms: Vec<String> = (0..4).map(|i| format!("a{i}")).collect();
    for k in 0..=4 {
        let f = at_most_formula(&atoms, k);
        let mut models = 0;
        for code in 0u32..16 {
            let val = |a: &str| code >> a[1..].parse::<u32>().unwrap() & 1 == 1;
            if f.eval(&val) {
                assert!(code.count_ones() as usize <= k);
                models += 1;
            }
        }
        let expect: usize = (0..=k).map(|i| [1, 4, 6, 4, 1][i]).sum();
        assert_eq!(models, expect, "k = {k}");
    }
}

#[test]
fn shipped_models_validate() {
    for sm in [build_three_tank_sm(), build_two_tank_sm()] {
        assert!(sm.validate().is_empty(), "{}: {:?}", sm.system(), sm.validate());
        assert_eq!(sm.spares(), Some(1));
        assert!(sm.constraints().iter().any(|c| c.generated));
    }
}

#[test]
fn three_tank_ships_the_leak_constraint() {
    let sm = build_three_tank_sm();
    let leak = sm
        .authored()
        .find(|c| c.guard == ["low(x1)"])
        .expect("leak constraint present");
    assert_eq!(leak.consequence, Formula::parse("!v12b | ext_T1").unwrap());
}

#[test]
fn document_round_trip() {
    let sys = build_two_tank();
    let sm = build_two_tank_sm();
    let doc = ModelDocument::from_model(&sm);
    let again = load_model(&doc.to_toml(), &sys).unwrap();
    assert_eq!(again.constraints(), sm.constraints());
    assert!(load_model(&doc.to_toml(), &build_three_tank()).is_err());
    let wrong = doc.to_toml().replace(MODEL_SCHEMA, "satreconf-model/9");
    assert!(matches!(load_model(&wrong, &sys), Err(Error::Schema(_))));
}

#[test]
fn holds_matches_check_validity() {
    let sys = build_two_tank();
    let sm = build_two_tank_sm();
    let (c, q) = config(&sys, &[25.0, 70.0, 35.0, 15.0], &["v10", "v20", "ext_T1"]);
    assert!(sm.holds(&q, &c.inputs).unwrap());
    assert_eq!(sm.check_validity(&c, &q).unwrap(), Validity::Valid);
    let (c, q) = config(&sys, &[25.0, 70.0, 35.0, 15.0], &["v10", "v20"]);
    assert!(!sm.holds(&q, &c.inputs).unwrap());
    assert_eq!(sm.check_validity(&c, &q).unwrap(), Validity::Invalid);
}
