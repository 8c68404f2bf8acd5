use super::*;
use crate::discretization::discretize;

fn three() -> TankSystem {
    build_three_tank()
}

fn two() -> TankSystem {
    build_two_tank()
}

fn mode(sys: &TankSystem, on: &[&str]) -> Mode {
    Mode::from_bits(
        sys.automaton
            .automaton_inputs()
            .map(|i| on.contains(&i.id.as_str()))
            .collect(),
    )
}

#[test]
fn input_counts() {
    assert_eq!(three().automaton.inputs().len(), 9);
    assert_eq!(three().automaton.num_automaton_inputs(), 6);
    assert_eq!(two().automaton.inputs().len(), 8);
    assert_eq!(two().automaton.num_automaton_inputs(), 6);
    assert_eq!(three().automaton.modes().count(), 64);
}

#[test]
fn closed_three_tank_only_drains_t2() {
    let sys = three();
    let x = sys.automaton.state_vector(vec![12.0, 17.0, 19.0]).unwrap();
    let d = sys.automaton.flow(&mode(&sys, &[]), &x, &Disturbance::none()).unwrap();
    assert_eq!(d[0], 0.0);
    assert_eq!(d[2], 0.0);
    assert!(d[1] < 0.0);
}

#[test]
fn upper_valve_needs_head_above_its_height() {
    let sys = three();
    let m = mode(&sys, &["v12a"]);
    let below = sys.automaton.state_vector(vec![25.0, 5.0, 15.0]).unwrap();
    let out = ThreeTankParams::default().outlet_coeff * 5.0;
    let d = sys.automaton.flow(&m, &below, &Disturbance::none()).unwrap();
    assert_eq!(d[0], 0.0);
    assert!((d[1] + out).abs() < 1e-12);
    let above = sys.automaton.state_vector(vec![35.0, 5.0, 15.0]).unwrap();
    let d = sys.automaton.flow(&m, &above, &Disturbance::none()).unwrap();
    assert!(d[0] < 0.0);
}

#[test]
fn constant_inflow_closed_form() {
    // pump into T1 with everything else shut: x1(t) = x1(0) + r t exactly under Euler
    let p = ThreeTankParams::default();
    let sys = three();
    let m = mode(&sys, &["p1"]);
    let mut x = sys.initial_state();
    let dt = 0.1;
    for _ in 0..50 {
        x = sys.automaton.step(&m, &x, dt).unwrap();
    }
    let expect = 15.0 + p.pump_rate * p.nominal_aperture * 5.0;
    assert!((x.get("x1").unwrap() - expect).abs() < 1e-9);
}

#[test]
fn two_tank_pump_signs() {
    let sys = two();
    let x = sys.initial_state();
    let d = sys.automaton.flow(&mode(&sys, &["p12"]), &x, &Disturbance::none()).unwrap();
    let d0 = sys.automaton.flow(&mode(&sys, &[]), &x, &Disturbance::none()).unwrap();
    assert!(d[0] < d0[0] && d[2] > d0[2]);
    let d = sys.automaton.flow(&mode(&sys, &["p21"]), &x, &Disturbance::none()).unwrap();
    assert!(d[0] > d0[0] && d[2] < d0[2]);
}

#[test]
fn two_tank_mass_balance() {
    // with supply and product closed, pumping conserves total volume
    let sys = two();
    let x = sys.automaton.state_vector(vec![33.0, 70.0, 37.0, 15.0]).unwrap();
    for on in [&["p12"][..], &["p21"], &["p12", "p21"]] {
        let d = sys.automaton.flow(&mode(&sys, on), &x, &Disturbance::none()).unwrap();
        assert!((d[0] + d[2]).abs() < 1e-9);
    }
}

#[test]
fn three_tank_mass_balance() {
    let sys = three();
    let p = ThreeTankParams::default();
    let x = sys.automaton.state_vector(vec![31.0, 14.0, 40.0]).unwrap();
    for m in sys.automaton.modes() {
        let a = sys.automaton.apertures(&m, &Disturbance::none());
        let d = sys.automaton.flow(&m, &x, &Disturbance::none()).unwrap();
        let pumps = p.pump_rate * (a[0] + a[1]);
        let outlet = p.outlet_coeff * 14.0;
        assert!((d.iter().sum::<f64>() - (pumps - outlet)).abs() < 1e-9);
    }
}

#[test]
fn events_are_involutions() {
    for sys in [two(), three()] {
        let x = sys.initial_state();
        for m in sys.automaton.modes().step_by(7) {
            for e in sys.automaton.events() {
                let (m1, x1) = sys.automaton.apply_event(e, &m, &x).unwrap();
                assert_ne!(m1, m);
                assert_eq!(x1, x);
                let (m2, _) = sys.automaton.apply_event(e, &m1, &x1).unwrap();
                assert_eq!(m2, m);
            }
        }
    }
}

#[test]
fn undeclared_event_rejected() {
    let sys = three();
    let bogus = Event { id: "toggle_zz".into(), target: "zz".into() };
    let m = mode(&sys, &[]);
    assert!(matches!(
        sys.automaton.apply_event(&bogus, &m, &sys.initial_state()),
        Err(Error::Model(_))
    ));
    let short = Mode::from_bits(vec![true]);
    assert!(sys.automaton.step(&short, &sys.initial_state(), 0.1).is_err());
}

#[test]
fn exchange_resets_to_midpoints() {
    let sys = two();
    let x = sys.automaton.state_vector(vec![5.0, 40.0, 80.0, 60.0]).unwrap();
    let m = mode(&sys, &[]);
    let (m1, x1) = sys.automaton.apply_exchange("ext_T1", &m, &x, &sys.specs).unwrap();
    assert_eq!(m1, m);
    assert_eq!(x1.values(), &[35.0, 70.0, 80.0, 60.0]);
    let (_, x2) = sys.automaton.apply_exchange("ext_T2", &m, &x, &sys.specs).unwrap();
    assert_eq!(x2.values(), &[5.0, 40.0, 35.0, 15.0]);

    let t = three();
    let y = t.automaton.state_vector(vec![1.0, 2.0, 3.0]).unwrap();
    let (_, y1) = t.automaton.apply_exchange("ext_T3", &mode(&t, &[]), &y, &t.specs).unwrap();
    assert_eq!(y1.values(), &[1.0, 2.0, 15.0]);
    assert!(t.automaton.apply_exchange("p1", &mode(&t, &[]), &y, &t.specs).is_err());
}

#[test]
fn levels_clamped_at_zero() {
    let sys = three();
    let x = sys.automaton.state_vector(vec![0.0, 0.01, 0.0]).unwrap();
    let mut d = Disturbance::none();
    d.extra_rate.insert("x1".into(), -5.0);
    let next = sys.automaton.step_disturbed(&mode(&sys, &[]), &x, 1.0, &d).unwrap();
    assert!(next.values().iter().all(|&v| v >= 0.0));
}

#[test]
fn bad_step_size() {
    let sys = three();
    let m = mode(&sys, &[]);
    for dt in [0.0, -0.1, f64::NAN, f64::INFINITY] {
        assert!(matches!(sys.automaton.step(&m, &sys.initial_state(), dt), Err(Error::Numeric(_))));
    }
}

#[test]
fn simulation_is_deterministic() {
    let run = || {
        let sys = two();
        let m = mode(&sys, &["v01", "v10", "p12"]);
        let mut x = sys.initial_state();
        for _ in 0..300 {
            x = sys.automaton.step(&m, &x, DEFAULT_DT).unwrap();
        }
        x
    };
    assert_eq!(run(), run());
}

#[test]
fn nominal_plants_hold_their_bands() {
    // bang-bang controller from the initial inputs keeps every state ok
    for sys in [two(), three()] {
        let mut inputs = sys.initial_inputs.clone();
        let mut x = sys.initial_state();
        for _ in 0..3000 {
            for l in &sys.loops {
                let spec = sys.specs.iter().find(|s| s.state == l.state).unwrap();
                inputs.set(&l.input, x.get(&l.state).unwrap() < spec.midpoint()).unwrap();
            }
            let m = sys.automaton.mode_of(&inputs);
            x = sys.automaton.step(&m, &x, DEFAULT_DT).unwrap();
            let obs = discretize(&x, &sys.specs).unwrap();
            assert!(obs.is_all_ok(), "{}: {obs} at {:?}", sys.kind, x.values());
        }
    }
}

#[test]
fn parameters_round_trip() {
    let p = ModelParameters::default();
    let text = p.to_toml();
    assert_eq!(ModelParameters::from_toml(&text).unwrap(), p);
    let bumped = text.replace("version = 1", "version = 99");
    assert!(ModelParameters::from_toml(&bumped).is_err());
}
