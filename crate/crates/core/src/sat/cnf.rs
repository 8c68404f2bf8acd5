//! Literals, clause databases and the DIMACS exchange format.

use std::fmt;
use std::ops::Not;

use crate::error::{Error, Result};

/// A propositional variable, numbered from 1 as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    /// Panics on 0; DIMACS has no variable zero.
    pub fn new(index: u32) -> Self {
        assert!(index > 0, "variables are numbered from 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based slot for dense per-variable arrays.
    pub(crate) fn slot(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

/// A signed variable. Packed as `2 * slot + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit((var.slot() as u32) << 1 | u32::from(!positive))
    }

    /// From a nonzero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Result<Self> {
        if value == 0 || value.unsigned_abs() > u64::from(u32::MAX >> 1) {
            return Err(Error::Encoding(format!("invalid DIMACS literal {value}")));
        }
        Ok(Lit::new(Var::new(value.unsigned_abs() as u32), value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().index());
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var((self.0 >> 1) + 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    /// Truth value of this literal under a total assignment indexed by slot.
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var().slot()] == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Clause database over variables `1..=num_vars`.
///
/// Clauses are kept sorted and duplicate-free; tautologies are dropped on
/// insertion. An empty clause is kept and makes the formula UNSAT.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> Self {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Allocates a fresh variable past the current range.
    pub fn fresh_var(&mut self) -> Var {
        self.num_vars += 1;
        Var::new(self.num_vars)
    }

    /// Grows the variable range; never shrinks it.
    pub fn reserve_vars(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    /// Adds a clause. Returns `false` if it was a tautology and was dropped.
    pub fn add_clause<I: IntoIterator<Item = Lit>>(&mut self, lits: I) -> Result<bool> {
        let mut clause: Vec<Lit> = lits.into_iter().collect();
        if let Some(bad) = clause.iter().find(|l| l.var().index() > self.num_vars) {
            return Err(Error::Encoding(format!(
                "literal {bad} outside variable range 1..={}",
                self.num_vars
            )));
        }
        clause.sort_unstable();
        clause.dedup();
        // sorted by code, so v and -v are adjacent
        if clause.windows(2).any(|w| w[0] == !w[1]) {
            return Ok(false);
        }
        self.clauses.push(clause);
        Ok(true)
    }

    /// Appends every clause of `other`, widening the variable range if needed.
    pub fn extend(&mut self, other: &CnfFormula) {
        self.reserve_vars(other.num_vars);
        self.clauses.extend(other.clauses.iter().cloned());
    }

    /// Clause-by-clause check of a total assignment (indexed by slot).
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() >= self.num_vars as usize
            && self
                .clauses
                .iter()
                .all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }

    /// Parses `p cnf` text. Comment lines (`c ...`) and `%` trailers are skipped;
    /// clauses may span lines. The clause count must match the header.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(u32, usize)> = None;
        let mut formula = CnfFormula::default();
        let mut current = Vec::new();
        let mut seen = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(Error::Schema(format!("line {}: duplicate header", lineno + 1)));
                }
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(Error::Schema(format!("line {}: bad header `{line}`", lineno + 1)));
                }
                let vars = parts[2]
                    .parse::<u32>()
                    .map_err(|e| Error::Schema(format!("variable count: {e}")))?;
                let clauses = parts[3]
                    .parse::<usize>()
                    .map_err(|e| Error::Schema(format!("clause count: {e}")))?;
                formula.num_vars = vars;
                header = Some((vars, clauses));
                continue;
            }
            if header.is_none() {
                return Err(Error::Schema("clause before `p cnf` header".into()));
            }
            for tok in line.split_whitespace() {
                let value = tok
                    .parse::<i64>()
                    .map_err(|e| Error::Schema(format!("line {}: {e}", lineno + 1)))?;
                if value == 0 {
                    formula.add_clause(std::mem::take(&mut current))?;
                    seen += 1;
                } else {
                    current.push(Lit::from_dimacs(value)?);
                }
            }
        }
        if !current.is_empty() {
            formula.add_clause(current)?;
            seen += 1;
        }
        match header {
            None => Err(Error::Schema("missing `p cnf` header".into())),
            Some((_, clauses)) if clauses != seen => Err(Error::Schema(format!(
                "header announces {clauses} clauses, found {seen}"
            ))),
            Some(_) => Ok(formula),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Lit {
        Lit::from_dimacs(v).unwrap()
    }

    #[test]
    fn literal_packing() {
        let l = lit(-3);
        assert_eq!(l.var().index(), 3);
        assert!(!l.is_positive());
        assert_eq!((!l).to_dimacs(), 3);
        assert!(Lit::from_dimacs(0).is_err());
    }

    #[test]
    fn tautologies_dropped_and_duplicates_merged() {
        let mut f = CnfFormula::new(3);
        assert!(!f.add_clause([lit(1), lit(2), lit(-1)]).unwrap());
        assert!(f.add_clause([lit(2), lit(2), lit(-3)]).unwrap());
        assert_eq!(f.len(), 1);
        assert_eq!(f.clauses()[0].len(), 2);
    }

    #[test]
    fn out_of_range_literal_rejected() {
        let mut f = CnfFormula::new(2);
        assert!(matches!(f.add_clause([lit(3)]), Err(Error::Encoding(_))));
    }

    #[test]
    fn dimacs_parse_and_print() {
        let text = "c example\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n";
        let f = CnfFormula::parse_dimacs(text).unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.len(), 2);
        let again = CnfFormula::parse_dimacs(&f.to_dimacs()).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn dimacs_requires_header() {
        assert!(CnfFormula::parse_dimacs("1 2 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("p dnf 1 1\n").is_err());
    }
}
