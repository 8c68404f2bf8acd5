//! Interval abstraction of continuous states into low / ok / high.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid_model::StateVector;

/// Closed ok interval `[lb, ub]` for one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub state: String,
    pub lb: f64,
    pub ub: f64,
}

impl IntervalSpec {
    pub fn new(state: impl Into<String>, lb: f64, ub: f64) -> Result<Self> {
        let state = state.into();
        if !(lb.is_finite() && ub.is_finite()) || lb > ub {
            return Err(Error::Config(format!(
                "interval for `{state}` must satisfy lb <= ub, got [{lb}, {ub}]"
            )));
        }
        Ok(IntervalSpec { state, lb, ub })
    }

    pub fn midpoint(&self) -> f64 {
        (self.lb + self.ub) / 2.0
    }

    pub fn classify(&self, value: f64) -> Qual {
        if value < self.lb {
            Qual::Low
        } else if value > self.ub {
            Qual::High
        } else {
            Qual::Ok
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qual {
    Low,
    Ok,
    High,
}

impl Qual {
    pub const ALL: [Qual; 3] = [Qual::Low, Qual::Ok, Qual::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Qual::Low => "low",
            Qual::Ok => "ok",
            Qual::High => "high",
        }
    }

    /// Predicate atom name, e.g. `low(x1)`.
    pub fn atom(self, state: &str) -> String {
        format!("{}({state})", self.as_str())
    }
}

impl fmt::Display for Qual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One qualitative value per state, in the order of the specs used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualitativeObservation {
    values: Vec<(String, Qual)>,
}

impl QualitativeObservation {
    /// Builds an observation directly, e.g. from a document or a test.
    pub fn from_pairs(values: Vec<(String, Qual)>) -> Self {
        QualitativeObservation { values }
    }

    pub fn get(&self, state: &str) -> Option<Qual> {
        self.values.iter().find(|(s, _)| s == state).map(|&(_, q)| q)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Qual)> {
        self.values.iter().map(|(s, q)| (s.as_str(), *q))
    }

    pub fn is_all_ok(&self) -> bool {
        self.values.iter().all(|&(_, q)| q == Qual::Ok)
    }

    /// States outside their interval.
    pub fn deviations(&self) -> Vec<(&str, Qual)> {
        self.iter().filter(|&(_, q)| q != Qual::Ok).collect()
    }

    /// Truth value of every predicate atom: exactly one of low/ok/high per state.
    pub fn atom_values(&self) -> BTreeMap<String, bool> {
        let mut out = BTreeMap::new();
        for (s, q) in self.iter() {
            for p in Qual::ALL {
                out.insert(p.atom(s), p == q);
            }
        }
        out
    }

    pub fn to_map(&self) -> BTreeMap<String, Qual> {
        self.values.iter().cloned().collect()
    }
}

impl fmt::Display for QualitativeObservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, q)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{q}({s})")?;
        }
        Ok(())
    }
}

fn check_specs(specs: &[IntervalSpec]) -> Result<()> {
    for (i, s) in specs.iter().enumerate() {
        if !(s.lb.is_finite() && s.ub.is_finite()) || s.lb > s.ub {
            return Err(Error::Config(format!(
                "interval for `{}` must satisfy lb <= ub, got [{}, {}]",
                s.state, s.lb, s.ub
            )));
        }
        if specs[..i].iter().any(|o| o.state == s.state) {
            return Err(Error::Config(format!("duplicate interval for `{}`", s.state)));
        }
    }
    Ok(())
}

/// Maps every state with an interval of `x` onto low / ok / high. Bounds belong to ok.
pub fn discretize(x: &StateVector, specs: &[IntervalSpec]) -> Result<QualitativeObservation> {
    check_specs(specs)?;
    let mut values = Vec::with_capacity(specs.len());
    for s in specs {
        let v = x
            .get(&s.state)
            .ok_or_else(|| Error::Config(format!("interval given for unknown state `{}`", s.state)))?;
        if !v.is_finite() {
            return Err(Error::Numeric(format!("state `{}` is {v}", s.state)));
        }
        values.push((s.state.clone(), s.classify(v)));
    }
    Ok(QualitativeObservation { values })
}

pub fn is_all_ok(x: &StateVector, specs: &[IntervalSpec]) -> Result<bool> {
    Ok(discretize(x, specs)?.is_all_ok())
}

/// Atom names in canonical order: per state, low, ok, high.
pub fn predicate_atoms(specs: &[IntervalSpec]) -> Vec<String> {
    specs
        .iter()
        .flat_map(|s| Qual::ALL.iter().map(move |q| q.atom(&s.state)))
        .collect()
}
