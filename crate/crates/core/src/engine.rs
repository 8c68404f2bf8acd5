//! Minimal-cardinality reconfiguration by ascending flip bound.

use std::fmt;

use crate::discretization::QualitativeObservation;
use crate::error::{Error, Result};
use crate::hybrid_model::{BinaryAssignment, Configuration, StateVector};
use crate::sat::{
    encode_at_most_k, encode_flip_literals, CnfFormula, Lit, SequentialCounter, SolveResult, Solver,
    SolverConfig,
};
use crate::system_model::{SystemModel, Validity};

/// Largest |B| the enumeration oracles accept.
pub const ORACLE_MAX_INPUTS: usize = 20;

#[derive(Debug, Clone)]
pub struct ReconfProblem<'a> {
    pub sm: &'a SystemModel,
    pub observation: QualitativeObservation,
    pub observed: BinaryAssignment,
}

impl<'a> ReconfProblem<'a> {
    pub fn new(sm: &'a SystemModel, observation: QualitativeObservation, observed: BinaryAssignment) -> Result<Self> {
        if observed.ids() != sm.inputs() {
            return Err(Error::Config(format!(
                "observed inputs {:?} do not match model inputs {:?}",
                observed.ids(),
                sm.inputs()
            )));
        }
        for s in sm.specs() {
            if observation.get(&s.state).is_none() {
                return Err(Error::Config(format!("observation does not cover `{}`", s.state)));
            }
        }
        Ok(ReconfProblem { sm, observation, observed })
    }

    pub fn num_inputs(&self) -> usize {
        self.observed.len()
    }

    /// SM ∧ observation with fresh flip literals, before any bound.
    fn base(&self) -> Result<(CnfFormula, Vec<Lit>)> {
        let cnf = self.sm.instantiate_cnf(&self.observation)?;
        let flips = encode_flip_literals(self.observed.values(), &self.sm.input_vars())?;
        Ok((cnf, flips))
    }

    /// Self-contained CNF for "SM ∧ observation ∧ at most `k` flips".
    pub fn bound_instance(&self, k: usize) -> Result<CnfFormula> {
        let (mut cnf, flips) = self.base()?;
        encode_at_most_k(&flips, k.min(flips.len()), &mut cnf)?;
        Ok(cnf)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconfiguration {
    /// New assignment to B.
    pub inputs: BinaryAssignment,
    /// Inputs whose value differs from the observation, in input order.
    pub flips: Vec<String>,
    /// Bound at which the solver first answered SAT.
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReconfResult {
    Success(Reconfiguration),
    NoReconfigurationExists,
}

impl ReconfResult {
    pub fn is_success(&self) -> bool {
        matches!(self, ReconfResult::Success(_))
    }

    pub fn reconfiguration(&self) -> Option<&Reconfiguration> {
        match self {
            ReconfResult::Success(r) => Some(r),
            ReconfResult::NoReconfigurationExists => None,
        }
    }
}

impl fmt::Display for ReconfResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReconfResult::Success(r) if r.flips.is_empty() => write!(f, "success (no change, bound {})", r.bound),
            ReconfResult::Success(r) => write!(f, "success: flip {} (bound {})", r.flips.join(", "), r.bound),
            ReconfResult::NoReconfigurationExists => f.write_str("no reconfiguration exists"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EngineOptions {
    pub solver: SolverConfig,
}

/// Called once per bound with the self-contained instance for that bound.
pub type BoundObserver<'o> = &'o mut dyn FnMut(usize, &CnfFormula) -> Result<()>;

pub fn sat_reconf(p: &ReconfProblem) -> Result<ReconfResult> {
    sat_reconf_with(p, &EngineOptions::default(), None)
}

/// Bound schedule 1, 2, ..., |B|. One solver holds SM ∧ observation and a
/// sequential counter over the flip literals; each bound is an assumption.
pub fn sat_reconf_with(
    p: &ReconfProblem,
    options: &EngineOptions,
    mut observer: Option<BoundObserver<'_>>,
) -> Result<ReconfResult> {
    let (mut cnf, flips) = p.base()?;
    let counter = SequentialCounter::encode(&flips, &mut cnf)?;
    let mut solver = Solver::from_cnf(&cnf, options.solver);
    for (var, &value) in p.sm.input_vars().iter().zip(p.observed.values()) {
        solver.set_phase(*var, value);
    }
    let n = p.num_inputs();
    let mut bound = 1;
    while bound <= n {
        if let Some(obs) = observer.as_mut() {
            obs(bound, &p.bound_instance(bound)?)?;
        }
        let assumptions: Vec<Lit> = counter.at_most(bound).into_iter().collect();
        match solver.solve_with_assumptions(&assumptions) {
            SolveResult::Sat(model) => {
                if !cnf.is_satisfied_by(&model) {
                    return Err(Error::Contract("solver model fails clause check".into()));
                }
                let values: Vec<bool> = p.sm.input_vars().iter().map(|v| model[v.slot()]).collect();
                let mut inputs = BinaryAssignment::new(p.observed.ids().into(), values)?;
                // at bound 1 the model may carry a flip the observation does not need
                if bound == 1 && inputs != p.observed && p.sm.holds(&p.observation, &p.observed)? {
                    inputs = p.observed.clone();
                }
                let changed = p.observed.diff(&inputs);
                if changed.len() > bound {
                    return Err(Error::Contract(format!(
                        "{} flips exceed bound {bound}",
                        changed.len()
                    )));
                }
                if !p.sm.holds(&p.observation, &inputs)? {
                    return Err(Error::Contract("reconfigured inputs violate the system model".into()));
                }
                return Ok(ReconfResult::Success(Reconfiguration {
                    inputs,
                    flips: changed,
                    bound,
                }));
            }
            SolveResult::Unsat => bound += 1,
        }
    }
    Ok(ReconfResult::NoReconfigurationExists)
}

/// Fresh solve of the bound-`k` instance.
pub fn sat_at_bound(p: &ReconfProblem, k: usize, config: SolverConfig) -> Result<bool> {
    let cnf = p.bound_instance(k)?;
    Ok(Solver::from_cnf(&cnf, config).solve().is_sat())
}

fn check_scope(p: &ReconfProblem) -> Result<()> {
    if p.num_inputs() > ORACLE_MAX_INPUTS {
        return Err(Error::OracleScope(format!(
            "{} inputs exceed the enumeration limit of {ORACLE_MAX_INPUTS}",
            p.num_inputs()
        )));
    }
    Ok(())
}

/// Fewest flips of any assignment satisfying SM ∧ observation, by
/// enumeration; `None` when no assignment does.
pub fn minimum_flips(p: &ReconfProblem) -> Result<Option<usize>> {
    check_scope(p)?;
    let n = p.num_inputs();
    let observed = p.observed.values();
    let mut best: Option<usize> = None;
    for code in 0u64..1 << n {
        let values: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
        let flips = values.iter().zip(observed).filter(|(a, b)| a != b).count();
        if best.is_some_and(|b| flips >= b) {
            continue;
        }
        let inputs = BinaryAssignment::new(p.observed.ids().into(), values)?;
        if p.sm.holds(&p.observation, &inputs)? {
            best = Some(flips);
        }
    }
    Ok(best)
}

/// True iff `result` is what exhaustive enumeration says it should be: a
/// valid assignment with the fewest possible flips, or no reconfiguration
/// exactly when none exists.
pub fn minimality_oracle(p: &ReconfProblem, result: &ReconfResult) -> Result<bool> {
    let min = minimum_flips(p)?;
    Ok(match result {
        ReconfResult::Success(r) => {
            p.sm.holds(&p.observation, &r.inputs)? && Some(r.flips.len()) == min
        }
        ReconfResult::NoReconfigurationExists => min.is_none(),
    })
}

/// Re-check of a success through the solver with every input pinned.
pub fn verify_success(p: &ReconfProblem, r: &Reconfiguration, states: &StateVector) -> Result<Validity> {
    let config = Configuration {
        states: states.clone(),
        inputs: r.inputs.clone(),
    };
    p.sm.check_validity(&config, &p.observation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Qual;
    use crate::hybrid_model::build_three_tank;
    use crate::system_model::{single_deviation, ReconfConstraint};

    fn leak_only() -> (crate::hybrid_model::TankSystem, SystemModel) {
        let sys = build_three_tank();
        let mut sm = SystemModel::for_automaton(&sys.automaton, &sys.specs).unwrap();
        sm.push(ReconfConstraint::parse("low(x1)", "!v12b | ext_T1", "").unwrap())
            .unwrap();
        (sys, sm)
    }

    #[test]
    fn valid_configuration_needs_no_flip() {
        let (sys, sm) = leak_only();
        let q = single_deviation(&sys.specs, "x1", Qual::Ok);
        let p = ReconfProblem::new(&sm, q, sys.initial_inputs.clone()).unwrap();
        let r = sat_reconf(&p).unwrap();
        let rc = r.reconfiguration().unwrap();
        assert!(rc.flips.is_empty());
        assert_eq!(rc.bound, 1);
        assert_eq!(rc.inputs, sys.initial_inputs);
        assert!(minimality_oracle(&p, &r).unwrap());
    }

    #[test]
    fn leak_takes_one_flip() {
        let (sys, sm) = leak_only();
        let q = single_deviation(&sys.specs, "x1", Qual::Low);
        let p = ReconfProblem::new(&sm, q, sys.initial_inputs.clone()).unwrap();
        let r = sat_reconf(&p).unwrap();
        let rc = r.reconfiguration().unwrap();
        assert_eq!(rc.flips.len(), 1);
        assert!(rc.flips == ["v12b"] || rc.flips == ["ext_T1"]);
        assert!(minimality_oracle(&p, &r).unwrap());
    }

    #[test]
    fn contradiction_has_no_reconfiguration() {
        let sys = build_three_tank();
        let mut sm = SystemModel::for_automaton(&sys.automaton, &sys.specs).unwrap();
        sm.push(ReconfConstraint::parse("low(x1)", "p1 & ext_T1", "").unwrap()).unwrap();
        sm.push(ReconfConstraint::parse("low(x1)", "!p1", "").unwrap()).unwrap();
        let q = single_deviation(&sys.specs, "x1", Qual::Low);
        let p = ReconfProblem::new(&sm, q, sys.initial_inputs.clone()).unwrap();
        assert_eq!(sat_reconf(&p).unwrap(), ReconfResult::NoReconfigurationExists);
        assert_eq!(minimum_flips(&p).unwrap(), None);
        for k in 0..=p.num_inputs() {
            assert!(!sat_at_bound(&p, k, SolverConfig::default()).unwrap());
        }
    }

    #[test]
    fn observer_sees_every_bound_tried() {
        let sys = build_three_tank();
        let mut sm = SystemModel::for_automaton(&sys.automaton, &sys.specs).unwrap();
        // needs three flips from the initial inputs
        sm.push(ReconfConstraint::parse("low(x2)", "!p1 & !p2 & ext_T2", "").unwrap())
            .unwrap();
        let q = single_deviation(&sys.specs, "x2", Qual::Low);
        let p = ReconfProblem::new(&sm, q, sys.initial_inputs.clone()).unwrap();
        let mut seen = Vec::new();
        let mut obs = |k: usize, cnf: &CnfFormula| {
            seen.push((k, cnf.num_vars()));
            Ok(())
        };
        let r = sat_reconf_with(&p, &EngineOptions::default(), Some(&mut obs)).unwrap();
        assert_eq!(r.reconfiguration().unwrap().bound, 3);
        assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), [1, 2, 3]);
        assert!(minimality_oracle(&p, &r).unwrap());
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let (sys, sm) = leak_only();
        let q = single_deviation(&sys.specs, "x1", Qual::Low);
        let other = crate::hybrid_model::build_two_tank().initial_inputs;
        assert!(matches!(ReconfProblem::new(&sm, q, other), Err(Error::Config(_))));
    }
}
