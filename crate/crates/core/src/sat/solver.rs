//! Conflict-driven clause learning solver.
//!
//! - two watched literals per clause, blocker literal per watch
//! - first-UIP learning with non-chronological backjumping
//! - activity-ordered decisions (ties broken by lowest variable index)
//! - phase saving, seeded from caller-supplied phase hints
//! - solving under assumptions, so callers can tighten bounds without
//!   rebuilding the clause database
//! - optional Luby restarts (off by default)

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cnf::{CnfFormula, Lit, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// 0 keeps the plain index order for decisions; anything else perturbs
    /// initial activities with a seeded generator.
    pub seed: u64,
    pub restarts: bool,
    /// Conflicts per Luby unit when restarts are on.
    pub restart_base: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            restarts: false,
            restart_base: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// Total assignment indexed by variable slot (variable `v` at `v - 1`).
    Sat(Vec<bool>),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SolverStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learnt: u64,
}

type ClauseRef = usize;

#[derive(Debug, Clone, Copy)]
struct Watcher {
    clause: ClauseRef,
    blocker: Lit,
}

#[derive(Debug)]
struct Clause {
    lits: Vec<Lit>,
}

const ACTIVITY_DECAY: f64 = 0.95;
const RESCALE_LIMIT: f64 = 1e100;

pub struct Solver {
    config: SolverConfig,
    num_vars: usize,
    clauses: Vec<Clause>,
    /// Clauses as the caller handed them, used for the final model check.
    original: Vec<Vec<Lit>>,
    /// Indexed by literal code; holds clauses currently watching that literal.
    watches: Vec<Vec<Watcher>>,
    value: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    /// False once an empty clause or a level-0 conflict was derived.
    ok: bool,
    stats: SolverStats,
}

impl Solver {
    pub fn new(num_vars: u32) -> Self {
        Self::with_config(num_vars, SolverConfig::default())
    }

    pub fn with_config(num_vars: u32, config: SolverConfig) -> Self {
        let mut solver = Solver {
            config,
            num_vars: 0,
            clauses: Vec::new(),
            original: Vec::new(),
            watches: Vec::new(),
            value: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            stats: SolverStats::default(),
        };
        solver.ensure_vars(num_vars);
        solver
    }

    pub fn from_cnf(formula: &CnfFormula, config: SolverConfig) -> Self {
        let mut solver = Self::with_config(formula.num_vars(), config);
        for clause in formula.clauses() {
            solver.add_clause(clause);
        }
        solver
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars as u32
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Widens the variable range; new variables start unassigned.
    pub fn ensure_vars(&mut self, num_vars: u32) {
        let n = num_vars as usize;
        if n <= self.num_vars {
            return;
        }
        let mut rng = (self.config.seed != 0).then(|| ChaCha8Rng::seed_from_u64(self.config.seed));
        for _ in self.num_vars..n {
            self.value.push(None);
            self.level.push(0);
            self.reason.push(None);
            self.activity
                .push(rng.as_mut().map_or(0.0, |r| r.gen::<f64>() * 1e-5));
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
        }
        self.num_vars = n;
    }

    /// Preferred polarity for the first decision on `var`.
    pub fn set_phase(&mut self, var: Var, positive: bool) {
        self.ensure_vars(var.index());
        self.phase[var.slot()] = positive;
    }

    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value[lit.var().slot()].map(|v| v == lit.is_positive())
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause at decision level 0. Returns `false` if the solver is
    /// now known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if let Some(max) = lits.iter().map(|l| l.var().index()).max() {
            self.ensure_vars(max);
        }
        self.original.push(lits.to_vec());
        if !self.ok {
            return false;
        }
        self.backtrack(0);

        let mut clause: Vec<Lit> = lits.to_vec();
        clause.sort_unstable();
        clause.dedup();
        if clause.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        // drop literals false at level 0, skip clauses already satisfied
        if clause.iter().any(|&l| self.lit_value(l) == Some(true)) {
            return true;
        }
        clause.retain(|&l| self.lit_value(l).is_none());

        match clause.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(clause[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(clause);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>) -> ClauseRef {
        let cref = self.clauses.len();
        self.watches[(!lits[0]).code()].push(Watcher {
            clause: cref,
            blocker: lits[1],
        });
        self.watches[(!lits[1]).code()].push(Watcher {
            clause: cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause { lits });
        cref
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<ClauseRef>) {
        let slot = lit.var().slot();
        debug_assert!(self.value[slot].is_none());
        self.value[slot] = Some(lit.is_positive());
        self.level[slot] = self.decision_level();
        self.reason[slot] = reason;
        self.trail.push(lit);
    }

    /// Unit propagation over the watch lists. Returns a conflicting clause.
    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.clause;
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let kept = Watcher {
                    clause: cref,
                    blocker: first,
                };
                if first != w.blocker && self.lit_value(first) == Some(true) {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                // look for a replacement watch
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let cand = self.clauses[cref].lits[k];
                    if self.lit_value(cand) != Some(false) {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[(!cand).code()].push(kept);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = kept;
                j += 1;
                match self.lit_value(first) {
                    Some(false) => {
                        conflict = Some(cref);
                        self.qhead = self.trail.len();
                        while i < ws.len() {
                            ws[j] = ws[i];
                            j += 1;
                            i += 1;
                        }
                    }
                    None => self.enqueue(first, Some(cref)),
                    Some(true) => unreachable!("satisfied clause reached unit check"),
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, var: Var) {
        let slot = var.slot();
        self.activity[slot] += self.var_inc;
        if self.activity[slot] > RESCALE_LIMIT {
            for a in &mut self.activity {
                *a *= 1.0 / RESCALE_LIMIT;
            }
            self.var_inc *= 1.0 / RESCALE_LIMIT;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first)
    /// and the backjump level.
    fn analyze(&mut self, mut conflict: ClauseRef) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::new(Var::new(1), true)]; // placeholder for UIP
        let mut pending = 0usize;
        let mut index = self.trail.len();
        let mut p: Option<Lit> = None;
        let current = self.decision_level();

        loop {
            let lits = self.clauses[conflict].lits.clone();
            let start = usize::from(p.is_some());
            for &q in &lits[start..] {
                let slot = q.var().slot();
                if !self.seen[slot] && self.level[slot] > 0 {
                    self.seen[slot] = true;
                    self.bump(q.var());
                    if self.level[slot] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // next seen literal on the trail
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().slot()] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[lit.var().slot()] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
            conflict = self.reason[lit.var().slot()].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("conflict at positive level has a UIP");
        for l in &learnt[1..] {
            self.seen[l.var().slot()] = false;
        }

        let backjump = if learnt.len() == 1 {
            0
        } else {
            // second watch goes to the highest remaining level
            let (max_i, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(_, l)| self.level[l.var().slot()])
                .expect("non-unit learnt clause");
            learnt.swap(1, max_i);
            self.level[learnt[1].var().slot()]
        };
        (learnt, backjump)
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for lit in self.trail.drain(lim..).rev() {
            let slot = lit.var().slot();
            self.phase[slot] = lit.is_positive();
            self.value[slot] = None;
            self.reason[slot] = None;
        }
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn pick_branch(&self) -> Option<Var> {
        let mut best: Option<usize> = None;
        for slot in 0..self.num_vars {
            if self.value[slot].is_none()
                && best.is_none_or(|b| self.activity[slot] > self.activity[b])
            {
                best = Some(slot);
            }
        }
        best.map(|s| Var::new(s as u32 + 1))
    }

    pub fn solve(&mut self) -> SolveResult {
        self.solve_with_assumptions(&[])
    }

    /// Decides satisfiability with `assumptions` forced true. Learnt clauses
    /// are kept across calls; assumptions are not.
    pub fn solve_with_assumptions(&mut self, assumptions: &[Lit]) -> SolveResult {
        if let Some(max) = assumptions.iter().map(|l| l.var().index()).max() {
            self.ensure_vars(max);
        }
        if !self.ok {
            return SolveResult::Unsat;
        }
        self.backtrack(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveResult::Unsat;
        }

        let mut conflicts_since_restart = 0u64;
        let mut luby_index = 0u32;
        let mut restart_limit = luby(luby_index) * self.config.restart_base;

        loop {
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveResult::Unsat;
                }
                let (learnt, backjump) = self.analyze(conflict);
                self.backtrack(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt);
                    self.enqueue(asserting, Some(cref));
                }
                self.stats.learnt += 1;
                self.var_inc /= ACTIVITY_DECAY;
                continue;
            }

            if self.config.restarts && conflicts_since_restart >= restart_limit {
                self.stats.restarts += 1;
                conflicts_since_restart = 0;
                luby_index += 1;
                restart_limit = luby(luby_index) * self.config.restart_base;
                self.backtrack(0);
                continue;
            }

            // assumptions occupy the first decision levels
            let level = self.decision_level() as usize;
            let next = if level < assumptions.len() {
                let a = assumptions[level];
                match self.lit_value(a) {
                    Some(true) => {
                        // keep level numbering aligned with the assumption list
                        self.trail_lim.push(self.trail.len());
                        continue;
                    }
                    Some(false) => {
                        self.backtrack(0);
                        return SolveResult::Unsat;
                    }
                    None => a,
                }
            } else {
                match self.pick_branch() {
                    None => {
                        let model: Vec<bool> = self
                            .value
                            .iter()
                            .map(|v| v.expect("complete assignment"))
                            .collect();
                        assert!(
                            self.original
                                .iter()
                                .all(|c| c.iter().any(|l| l.eval(&model))),
                            "solver produced an assignment violating an input clause"
                        );
                        self.backtrack(0);
                        return SolveResult::Sat(model);
                    }
                    Some(var) => Lit::new(var, self.phase[var.slot()]),
                }
            };
            self.stats.decisions += 1;
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, None);
        }
    }
}

/// Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ...
fn luby(mut index: u32) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < u64::from(index) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = 1u64;
    while size - 1 != u64::from(index) {
        size = (size - 1) >> 1;
        seq -= 1;
        index %= size as u32;
    }
    for _ in 0..seq {
        x *= 2;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(vals: &[i64]) -> Vec<Lit> {
        vals.iter().map(|&v| Lit::from_dimacs(v).unwrap()).collect()
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn empty_formula_is_sat() {
        assert!(Solver::new(0).solve().is_sat());
        assert!(Solver::new(3).solve().is_sat());
    }

    #[test]
    fn empty_clause_is_unsat() {
        let mut s = Solver::new(2);
        assert!(!s.add_clause(&[]));
        assert_eq!(s.solve(), SolveResult::Unsat);
    }

    #[test]
    fn units_are_forced() {
        let mut s = Solver::new(2);
        s.add_clause(&lits(&[1]));
        s.add_clause(&lits(&[-2]));
        assert_eq!(s.solve(), SolveResult::Sat(vec![true, false]));
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p_{i,j}: pigeon i in hole j, var = 2*i + j + 1
        let mut s = Solver::new(6);
        for i in 0..3 {
            s.add_clause(&lits(&[2 * i + 1, 2 * i + 2]));
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in (a + 1)..3 {
                    s.add_clause(&lits(&[-(2 * a + j + 1), -(2 * b + j + 1)]));
                }
            }
        }
        assert_eq!(s.solve(), SolveResult::Unsat);
        assert!(s.stats().conflicts > 0);
    }

    #[test]
    fn assumptions_are_temporary() {
        let mut s = Solver::new(2);
        s.add_clause(&lits(&[1, 2]));
        assert_eq!(s.solve_with_assumptions(&lits(&[-1, -2])), SolveResult::Unsat);
        assert!(s.solve_with_assumptions(&lits(&[-1])).is_sat());
        assert!(s.solve().is_sat());
    }

    #[test]
    fn phase_hints_steer_free_variables() {
        let mut s = Solver::new(3);
        s.set_phase(Var::new(2), true);
        assert_eq!(s.solve(), SolveResult::Sat(vec![false, true, false]));
    }

    #[test]
    fn restarts_preserve_answers() {
        let config = SolverConfig {
            seed: 7,
            restarts: true,
            restart_base: 1,
        };
        let mut s = Solver::with_config(6, config);
        for i in 0..3 {
            s.add_clause(&lits(&[2 * i + 1, 2 * i + 2]));
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in (a + 1)..3 {
                    s.add_clause(&lits(&[-(2 * a + j + 1), -(2 * b + j + 1)]));
                }
            }
        }
        assert_eq!(s.solve(), SolveResult::Unsat);
    }
}
