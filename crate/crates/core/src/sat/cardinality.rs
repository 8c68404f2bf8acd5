//! Flip literals and sequential-counter cardinality constraints.

use super::cnf::{CnfFormula, Lit, Var};
use crate::error::{Error, Result};

/// One literal per input that is true exactly when the solver's value for that
/// input differs from the observed one. Since the observation is a constant,
/// `observed XOR var` collapses to `!var` (observed true) or `var` (observed false).
pub fn encode_flip_literals(observed: &[bool], decision_vars: &[Var]) -> Result<Vec<Lit>> {
    if observed.len() != decision_vars.len() {
        return Err(Error::Encoding(format!(
            "{} observed values for {} decision variables",
            observed.len(),
            decision_vars.len()
        )));
    }
    Ok(observed
        .iter()
        .zip(decision_vars)
        .map(|(&obs, &var)| if obs { var.neg() } else { var.pos() })
        .collect())
}

/// Sinz sequential counter restricted to "at most `k` of `lits` are true".
/// Auxiliary variables are appended to `cnf`.
pub fn encode_at_most_k(lits: &[Lit], k: usize, cnf: &mut CnfFormula) -> Result<()> {
    let n = lits.len();
    if k > n {
        return Err(Error::Encoding(format!("bound {k} exceeds {n} literals")));
    }
    if k == n {
        return Ok(());
    }
    if k == 0 {
        for &l in lits {
            cnf.add_clause([!l])?;
        }
        return Ok(());
    }
    // s[i][j]: at least j+1 of lits[0..=i] are true (only implied upward)
    let s: Vec<Vec<Lit>> = (0..n - 1)
        .map(|_| (0..k).map(|_| cnf.fresh_var().pos()).collect())
        .collect();
    cnf.add_clause([!lits[0], s[0][0]])?;
    for &r in &s[0][1..] {
        cnf.add_clause([!r])?;
    }
    for i in 1..n - 1 {
        cnf.add_clause([!lits[i], s[i][0]])?;
        cnf.add_clause([!s[i - 1][0], s[i][0]])?;
        for j in 1..k {
            cnf.add_clause([!lits[i], !s[i - 1][j - 1], s[i][j]])?;
            cnf.add_clause([!s[i - 1][j], s[i][j]])?;
        }
        cnf.add_clause([!lits[i], !s[i - 1][k - 1]])?;
    }
    cnf.add_clause([!lits[n - 1], !s[n - 2][k - 1]])?;
    Ok(())
}

/// Unbounded sequential counter whose outputs let a caller pick the bound per
/// solve call. `at_least(j)` is forced true whenever `j` or more inputs are true,
/// so assuming `!at_least(k + 1)` enforces "at most k".
#[derive(Debug, Clone)]
pub struct SequentialCounter {
    /// outputs[j - 1] is the "at least j" register of the last row.
    outputs: Vec<Lit>,
}

impl SequentialCounter {
    pub fn encode(lits: &[Lit], cnf: &mut CnfFormula) -> Result<Self> {
        let n = lits.len();
        let mut prev: Vec<Lit> = Vec::new();
        for (i, &x) in lits.iter().enumerate() {
            let width = i + 1;
            let row: Vec<Lit> = (0..width).map(|_| cnf.fresh_var().pos()).collect();
            cnf.add_clause([!x, row[0]])?;
            for j in 0..width {
                if j < prev.len() {
                    cnf.add_clause([!prev[j], row[j]])?;
                }
                if j >= 1 {
                    cnf.add_clause([!x, !prev[j - 1], row[j]])?;
                }
            }
            prev = row;
        }
        debug_assert_eq!(prev.len(), n);
        Ok(SequentialCounter { outputs: prev })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Assumption literal enforcing "at most `k`", or `None` when `k` does
    /// not restrict anything.
    pub fn at_most(&self, k: usize) -> Option<Lit> {
        self.outputs.get(k).map(|&l| !l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_literal_polarity() {
        let vars = [Var::new(1), Var::new(2)];
        let flips = encode_flip_literals(&[true, false], &vars).unwrap();
        assert_eq!(flips, vec![Var::new(1).neg(), Var::new(2).pos()]);
        // a model equal to the observation makes every flip literal false
        let model = [true, false];
        assert!(flips.iter().all(|l| !l.eval(&model)));
        assert!(encode_flip_literals(&[true], &vars).is_err());
    }

    #[test]
    fn k_zero_is_units() {
        let mut cnf = CnfFormula::new(3);
        let lits: Vec<Lit> = (1..=3).map(|v| Var::new(v).pos()).collect();
        encode_at_most_k(&lits, 0, &mut cnf).unwrap();
        assert_eq!(cnf.len(), 3);
        assert!(cnf.clauses().iter().all(|c| c.len() == 1 && !c[0].is_positive()));
        assert_eq!(cnf.num_vars(), 3);
    }

    #[test]
    fn bound_above_length_rejected() {
        let mut cnf = CnfFormula::new(1);
        assert!(encode_at_most_k(&[Var::new(1).pos()], 2, &mut cnf).is_err());
    }

    #[test]
    fn counter_has_no_bound_past_length() {
        let mut cnf = CnfFormula::new(2);
        let lits = [Var::new(1).pos(), Var::new(2).pos()];
        let c = SequentialCounter::encode(&lits, &mut cnf).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.at_most(0).is_some());
        assert!(c.at_most(2).is_none());
    }
}
