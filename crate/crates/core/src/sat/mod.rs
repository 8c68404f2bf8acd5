//! Propositional layer: formulas, CNF, cardinality encodings and the solver.

pub mod cardinality;
pub mod cnf;
pub mod formula;
pub mod solver;

pub use cardinality::{encode_at_most_k, encode_flip_literals, SequentialCounter};
pub use cnf::{CnfFormula, Lit, Var};
pub use formula::{add_formula, to_cnf, AtomTable, Formula};
pub use solver::{SolveResult, Solver, SolverConfig};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
}

/// A total truth assignment over `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, var: Var) -> bool {
        self.values[var.slot()]
    }

    pub fn lit(&self, lit: Lit) -> bool {
        lit.eval(&self.values)
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn satisfies(&self, formula: &CnfFormula) -> bool {
        formula.is_satisfied_by(&self.values)
    }
}

pub fn sat(formula: &CnfFormula) -> Verdict {
    match Solver::from_cnf(formula, SolverConfig::default()).solve() {
        SolveResult::Sat(_) => Verdict::Sat,
        SolveResult::Unsat => Verdict::Unsat,
    }
}

/// Satisfying assignment for `formula`, re-checked clause by clause.
pub fn assign(formula: &CnfFormula) -> Result<Model> {
    assign_with(formula, SolverConfig::default())
}

pub fn assign_with(formula: &CnfFormula, config: SolverConfig) -> Result<Model> {
    match Solver::from_cnf(formula, config).solve() {
        SolveResult::Sat(values) => {
            let model = Model { values };
            if !model.satisfies(formula) {
                return Err(Error::Contract("solver model fails clause check".into()));
            }
            Ok(model)
        }
        SolveResult::Unsat => Err(Error::Contract("assign called on an unsatisfiable formula".into())),
    }
}

impl From<Vec<bool>> for Model {
    fn from(values: Vec<bool>) -> Self {
        Model { values }
    }
}
