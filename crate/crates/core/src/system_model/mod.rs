//! Reconfiguration system model: guarded constraints from qualitative
//! predicates to formulas over the binary inputs, and validity checking.

mod document;

use std::collections::BTreeSet;
use std::fmt;

use crate::discretization::{predicate_atoms, IntervalSpec, Qual, QualitativeObservation};
use crate::error::{Error, Result};
use crate::hybrid_model::{BinaryAssignment, Configuration, HybridAutomaton, SystemKind, TankSystem};
use crate::sat::{self, add_formula, AtomTable, CnfFormula, Formula, Var, Verdict};

pub use document::{ConstraintDoc, ModelDocument, MODEL_SCHEMA};

/// `guard -> consequence`, with the guard a conjunction of predicate atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconfConstraint {
    pub guard: Vec<String>,
    pub consequence: Formula,
    pub rationale: String,
    /// Added by the model itself (spare limit) rather than authored.
    pub generated: bool,
}

impl ReconfConstraint {
    pub fn new(guard: Vec<String>, consequence: Formula, rationale: impl Into<String>) -> Self {
        ReconfConstraint {
            guard,
            consequence,
            rationale: rationale.into(),
            generated: false,
        }
    }

    /// Parses `guard` (atom or `&`-conjunction of atoms) and `consequence`.
    pub fn parse(guard: &str, consequence: &str, rationale: impl Into<String>) -> Result<Self> {
        let g = Formula::parse(guard)?;
        let atoms = match &g {
            Formula::Atom(a) => vec![a.clone()],
            Formula::And(parts) if !parts.is_empty() => parts
                .iter()
                .map(|p| match p {
                    Formula::Atom(a) => Ok(a.clone()),
                    other => Err(Error::Authoring(format!(
                        "guard `{guard}` has non-atomic conjunct `{other}`"
                    ))),
                })
                .collect::<Result<_>>()?,
            _ => {
                return Err(Error::Authoring(format!(
                    "guard `{guard}` must be an atom or a conjunction of atoms"
                )))
            }
        };
        Ok(ReconfConstraint::new(atoms, Formula::parse(consequence)?, rationale))
    }

    pub fn guard_formula(&self) -> Formula {
        match self.guard.as_slice() {
            [one] => Formula::atom(one.clone()),
            many => Formula::And(many.iter().cloned().map(Formula::atom).collect()),
        }
    }

    pub fn as_formula(&self) -> Formula {
        Formula::implies(self.guard_formula(), self.consequence.clone())
    }

    pub fn guard_text(&self) -> String {
        self.guard.join(" & ")
    }

    pub fn guard_holds(&self, q: &QualitativeObservation) -> bool {
        let atoms = q.atom_values();
        self.guard.iter().all(|a| atoms.get(a).copied().unwrap_or(false))
    }
}

impl fmt::Display for ReconfConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.guard_text(), self.consequence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid,
}

/// Constraint base over one atom table. Atom order: predicate atoms (per
/// state low, ok, high), then automaton inputs, then exchange flags.
#[derive(Debug, Clone)]
pub struct SystemModel {
    system: String,
    specs: Vec<IntervalSpec>,
    table: AtomTable,
    predicates: Vec<String>,
    inputs: Vec<String>,
    exchange_flags: Vec<String>,
    spares: Option<usize>,
    constraints: Vec<ReconfConstraint>,
}

impl SystemModel {
    /// Empty model. `inputs` is all of B in order (automaton inputs first);
    /// `exchange_flags` names the members of B^EXT.
    pub fn new(
        system: impl Into<String>,
        specs: &[IntervalSpec],
        inputs: Vec<String>,
        exchange_flags: Vec<String>,
    ) -> Result<Self> {
        for flag in &exchange_flags {
            if !inputs.contains(flag) {
                return Err(Error::Authoring(format!("exchange flag `{flag}` is not an input")));
            }
        }
        let predicates = predicate_atoms(specs);
        let mut table = AtomTable::new();
        for name in predicates.iter().chain(&inputs) {
            if table.var(name).is_some() {
                return Err(Error::Authoring(format!("atom `{name}` declared twice")));
            }
            table.declare(name.clone());
        }
        Ok(SystemModel {
            system: system.into(),
            specs: specs.to_vec(),
            table,
            predicates,
            inputs,
            exchange_flags,
            spares: None,
            constraints: Vec::new(),
        })
    }

    pub fn for_automaton(automaton: &HybridAutomaton, specs: &[IntervalSpec]) -> Result<Self> {
        SystemModel::new(
            automaton.name(),
            specs,
            automaton.inputs().iter().map(|i| i.id.clone()).collect(),
            automaton.exchange_flags().map(|i| i.id.clone()).collect(),
        )
    }

    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn specs(&self) -> &[IntervalSpec] {
        &self.specs
    }

    pub fn table(&self) -> &AtomTable {
        &self.table
    }

    pub fn predicates(&self) -> &[String] {
        &self.predicates
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn exchange_flags(&self) -> &[String] {
        &self.exchange_flags
    }

    pub fn spares(&self) -> Option<usize> {
        self.spares
    }

    pub fn constraints(&self) -> &[ReconfConstraint] {
        &self.constraints
    }

    pub fn authored(&self) -> impl Iterator<Item = &ReconfConstraint> {
        self.constraints.iter().filter(|c| !c.generated)
    }

    /// Solver variables of B, in input order.
    pub fn input_vars(&self) -> Vec<Var> {
        self.inputs
            .iter()
            .map(|i| self.table.var(i).expect("inputs are declared"))
            .collect()
    }

    fn check_vocabulary(&self, c: &ReconfConstraint) -> Result<()> {
        if c.guard.is_empty() {
            return Err(Error::Authoring(format!("constraint `{c}` has an empty guard")));
        }
        for a in &c.guard {
            if self.inputs.contains(a) {
                return Err(Error::Authoring(format!("guard of `{c}` mentions input `{a}`")));
            }
            if !self.predicates.contains(a) {
                return Err(Error::Authoring(format!("guard of `{c}` mentions undeclared atom `{a}`")));
            }
        }
        for a in c.consequence.atoms() {
            if self.predicates.iter().any(|p| p == a) {
                return Err(Error::Authoring(format!(
                    "consequence of `{c}` mentions predicate `{a}`"
                )));
            }
            if !self.inputs.iter().any(|i| i == a) {
                return Err(Error::Authoring(format!(
                    "consequence of `{c}` mentions undeclared atom `{a}`"
                )));
            }
        }
        Ok(())
    }

    /// Appends a constraint after checking the guard/consequence vocabulary split.
    pub fn push(&mut self, c: ReconfConstraint) -> Result<()> {
        self.check_vocabulary(&c)?;
        self.constraints.push(c);
        Ok(())
    }

    pub fn add_constraint(mut self, c: ReconfConstraint) -> Result<Self> {
        self.push(c)?;
        Ok(self)
    }

    /// Limits exchanges to `spares` under every authored guard, by adding one
    /// generated constraint per distinct guard.
    pub fn limit_spares(&mut self, spares: usize) -> Result<()> {
        if self.spares.is_some() {
            return Err(Error::Authoring("spare limit set twice".into()));
        }
        self.spares = Some(spares);
        let limit = at_most_formula(&self.exchange_flags, spares);
        if limit == Formula::truth() {
            return Ok(());
        }
        let mut seen = BTreeSet::new();
        let guards: Vec<Vec<String>> = self
            .authored()
            .filter(|c| seen.insert(c.guard.clone()))
            .map(|c| c.guard.clone())
            .collect();
        for guard in guards {
            let mut c = ReconfConstraint::new(
                guard,
                limit.clone(),
                format!("at most {spares} spare component(s) can be swapped in"),
            );
            c.generated = true;
            self.push(c)?;
        }
        Ok(())
    }

    /// Conjunction of the constraint base.
    pub fn formula(&self) -> Formula {
        Formula::And(self.constraints.iter().map(ReconfConstraint::as_formula).collect())
    }

    fn check_observation(&self, q: &QualitativeObservation) -> Result<()> {
        for s in &self.specs {
            if q.get(&s.state).is_none() {
                return Err(Error::Config(format!("observation does not cover `{}`", s.state)));
            }
        }
        Ok(())
    }

    /// SM conjoined with a unit fact for every predicate atom under `q`.
    pub fn instantiate(&self, q: &QualitativeObservation) -> Result<Formula> {
        self.check_observation(q)?;
        let mut parts = vec![self.formula()];
        for s in &self.specs {
            let v = q.get(&s.state).expect("checked above");
            for p in Qual::ALL {
                parts.push(Formula::literal(p.atom(&s.state), p == v));
            }
        }
        Ok(Formula::And(parts))
    }

    /// CNF of [`instantiate`](Self::instantiate) in this model's numbering.
    pub fn instantiate_cnf(&self, q: &QualitativeObservation) -> Result<CnfFormula> {
        let f = self.instantiate(q)?;
        let mut cnf = CnfFormula::new(self.table.len() as u32);
        add_formula(&mut cnf, &f, &self.table)?;
        Ok(cnf)
    }

    fn check_inputs(&self, inputs: &BinaryAssignment) -> Result<()> {
        if inputs.ids() != self.inputs.as_slice() {
            return Err(Error::Config(format!(
                "input assignment over {:?} does not match model inputs {:?}",
                inputs.ids(),
                self.inputs
            )));
        }
        Ok(())
    }

    /// Valid iff the instantiated model with every input pinned is satisfiable.
    pub fn check_validity(&self, config: &Configuration, q: &QualitativeObservation) -> Result<Validity> {
        self.check_inputs(&config.inputs)?;
        let mut cnf = self.instantiate_cnf(q)?;
        for (var, &value) in self.input_vars().iter().zip(config.inputs.values()) {
            cnf.add_clause([sat::Lit::new(*var, value)])?;
        }
        Ok(match sat::sat(&cnf) {
            Verdict::Sat => Validity::Valid,
            Verdict::Unsat => Validity::Invalid,
        })
    }

    /// Direct evaluation of the ground model; no solver involved.
    pub fn holds(&self, q: &QualitativeObservation, inputs: &BinaryAssignment) -> Result<bool> {
        self.check_observation(q)?;
        self.check_inputs(inputs)?;
        let atoms = q.atom_values();
        let lookup = |a: &str| atoms.get(a).copied().or_else(|| inputs.get(a)).unwrap_or(false);
        Ok(self.formula().eval(&lookup))
    }

    /// Authoring checks: every guard contains a non-ok atom (so all-ok
    /// observations are vacuous) and every single-state deviation has at
    /// least one constraint and a satisfying input assignment.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        for c in self.authored() {
            if c.guard.iter().all(|a| a.starts_with("ok(")) {
                issues.push(format!("guard of `{c}` can hold in an all-ok observation"));
            }
        }
        for s in &self.specs {
            for q in [Qual::Low, Qual::High] {
                let atom = q.atom(&s.state);
                if !self.authored().any(|c| c.guard == [atom.clone()]) {
                    issues.push(format!("no constraint guarded by `{atom}` alone"));
                }
                let obs = single_deviation(&self.specs, &s.state, q);
                match self.instantiate_cnf(&obs) {
                    Ok(cnf) if sat::sat(&cnf) == Verdict::Sat => {}
                    Ok(_) => issues.push(format!("`{atom}` alone admits no input assignment")),
                    Err(e) => issues.push(e.to_string()),
                }
            }
        }
        issues
    }
}

/// Observation with one state at `q` and all others ok.
pub fn single_deviation(specs: &[IntervalSpec], state: &str, q: Qual) -> QualitativeObservation {
    QualitativeObservation::from_pairs(
        specs
            .iter()
            .map(|s| (s.state.clone(), if s.state == state { q } else { Qual::Ok }))
            .collect(),
    )
}

/// "At most `k` of `atoms` are true" as a conjunction of forbidden
/// `(k + 1)`-subsets; `true` when `k >= atoms.len()`.
pub fn at_most_formula(atoms: &[String], k: usize) -> Formula {
    if k >= atoms.len() {
        return Formula::truth();
    }
    let mut parts = Vec::new();
    let mut idx: Vec<usize> = (0..=k).collect();
    loop {
        parts.push(Formula::not(Formula::And(
            idx.iter().map(|&i| Formula::atom(atoms[i].clone())).collect(),
        )));
        // next combination in lexicographic order
        let n = atoms.len();
        let mut i = k + 1;
        while i > 0 && idx[i - 1] == n - (k + 1) + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..=k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Formula::And(parts)
}

const THREE_TANK_MODEL: &str = include_str!("../../models/three_tank.toml");
const TWO_TANK_MODEL: &str = include_str!("../../models/two_tank.toml");

/// Shipped model document text for a system.
pub fn shipped_document(kind: SystemKind) -> &'static str {
    match kind {
        SystemKind::ThreeTank => THREE_TANK_MODEL,
        SystemKind::TwoTank => TWO_TANK_MODEL,
    }
}

/// Loads a model document against a built plant.
pub fn load_model(text: &str, system: &TankSystem) -> Result<SystemModel> {
    let doc = ModelDocument::parse(text)?;
    doc.build(system)
}

pub fn build_system_model(system: &TankSystem) -> Result<SystemModel> {
    load_model(shipped_document(system.kind), system)
}

pub fn build_three_tank_sm() -> SystemModel {
    build_system_model(&crate::hybrid_model::build_three_tank()).expect("shipped model loads")
}

pub fn build_two_tank_sm() -> SystemModel {
    build_system_model(&crate::hybrid_model::build_two_tank()).expect("shipped model loads")
}

#[cfg(test)]
mod tests;
