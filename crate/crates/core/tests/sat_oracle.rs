//! Solver and encoders against enumeration and forward-chaining oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satreconf::sat::{to_cnf, AtomTable, CnfFormula, Formula, Lit, SolveResult, Solver, SolverConfig, Var};

/// Clause as (positive mask, negative mask) over variables 1..=n at bits 0..n.
fn masks(cnf: &CnfFormula) -> Vec<(u32, u32)> {
    cnf.clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0u32, 0u32), |(p, n), l| {
                let bit = 1u32 << (l.var().index() - 1);
                if l.is_positive() {
                    (p | bit, n)
                } else {
                    (p, n | bit)
                }
            })
        })
        .collect()
}

fn brute_sat(cnf: &CnfFormula) -> bool {
    let n = cnf.num_vars();
    assert!(n <= 24);
    let cls = masks(cnf);
    (0u32..1 << n).any(|a| cls.iter().all(|&(p, q)| a & p != 0 || !a & q != 0))
}

fn brute_count(cnf: &CnfFormula) -> u64 {
    let cls = masks(cnf);
    (0u32..1 << cnf.num_vars())
        .filter(|&a| cls.iter().all(|&(p, q)| a & p != 0 || !a & q != 0))
        .count() as u64
}

/// Random k-CNF over distinct variables per clause.
fn random_kcnf(rng: &mut ChaCha8Rng, n: u32, m: usize, k: usize) -> CnfFormula {
    let k = k.min(n as usize);
    let mut cnf = CnfFormula::new(n);
    for _ in 0..m {
        let vars = rand::seq::index::sample(rng, n as usize, k);
        let lits: Vec<Lit> = vars
            .iter()
            .map(|v| Lit::new(Var::new(v as u32 + 1), rng.gen_bool(0.5)))
            .collect();
        cnf.add_clause(lits).unwrap();
    }
    cnf
}

fn random_cnf(rng: &mut ChaCha8Rng, n: u32, m: usize, width: usize) -> CnfFormula {
    let mut cnf = CnfFormula::new(n);
    for _ in 0..m {
        let k = rng.gen_range(1..=width);
        let lits: Vec<Lit> = (0..k)
            .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen_bool(0.5)))
            .collect();
        cnf.add_clause(lits).unwrap();
    }
    cnf
}

#[test]
fn thousand_random_instances_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut sat, mut unsat) = (0, 0);
    for i in 0..1000 {
        let n = rng.gen_range(1..=20u32);
        // straddle the 3-SAT threshold so both verdicts are common
        let m = ((n as f64 * rng.gen_range(2.5..6.0)) as usize).clamp(1, 90);
        let cnf = random_kcnf(&mut rng, n, m, 3);
        let expected = brute_sat(&cnf);
        let config = SolverConfig {
            seed: i % 3,
            restarts: i % 2 == 0,
            restart_base: 8,
        };
        match Solver::from_cnf(&cnf, config).solve() {
            SolveResult::Sat(model) => {
                assert!(expected, "instance {i}: solver SAT, enumeration UNSAT");
                assert!(cnf.is_satisfied_by(&model), "instance {i}: model fails clause check");
                sat += 1;
            }
            SolveResult::Unsat => {
                assert!(!expected, "instance {i}: solver UNSAT, enumeration SAT");
                unsat += 1;
            }
        }
    }
    assert!(sat > 200 && unsat > 200, "{sat} sat / {unsat} unsat");
}

#[test]
fn assumptions_match_fresh_solves_with_units() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.gen_range(4..=14u32);
        let cnf = random_cnf(&mut rng, n, (n * 3) as usize, 3);
        let mut inc = Solver::from_cnf(&cnf, SolverConfig::default());
        // several queries on one solver, each checked against a fresh one
        for _ in 0..4 {
            let k = rng.gen_range(0..=3);
            let assumptions: Vec<Lit> = (0..k)
                .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen_bool(0.5)))
                .collect();
            let mut fixed = cnf.clone();
            for a in &assumptions {
                fixed.add_clause([*a]).unwrap();
            }
            let expected = brute_sat(&fixed);
            match inc.solve_with_assumptions(&assumptions) {
                SolveResult::Sat(model) => {
                    assert!(expected);
                    assert!(fixed.is_satisfied_by(&model));
                }
                SolveResult::Unsat => assert!(!expected),
            }
        }
    }
}

/// Least model of a Horn CNF by forward chaining; `None` when a purely
/// negative clause fires.
fn horn_least_model(cnf: &CnfFormula) -> Option<Vec<bool>> {
    let mut value = vec![false; cnf.num_vars() as usize];
    loop {
        let mut changed = false;
        for c in cnf.clauses() {
            let body_true = c
                .iter()
                .filter(|l| !l.is_positive())
                .all(|l| value[(l.var().index() - 1) as usize]);
            if !body_true {
                continue;
            }
            match c.iter().find(|l| l.is_positive()) {
                Some(h) => {
                    let slot = (h.var().index() - 1) as usize;
                    if !value[slot] {
                        value[slot] = true;
                        changed = true;
                    }
                }
                None => return None,
            }
        }
        if !changed {
            return Some(value);
        }
    }
}

#[test]
fn horn_instances_agree_with_forward_chaining() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..400 {
        let n = rng.gen_range(5..=150u32);
        let mut cnf = CnfFormula::new(n);
        for _ in 0..rng.gen_range(n..=3 * n) {
            let body = rng.gen_range(0..=3);
            let mut lits: Vec<Lit> = (0..body).map(|_| Var::new(rng.gen_range(1..=n)).neg()).collect();
            if rng.gen_bool(0.85) {
                lits.push(Var::new(rng.gen_range(1..=n)).pos());
            }
            if lits.is_empty() {
                continue;
            }
            cnf.add_clause(lits).unwrap();
        }
        let least = horn_least_model(&cnf);
        match Solver::from_cnf(&cnf, SolverConfig::default()).solve() {
            SolveResult::Sat(model) => {
                let least = least.expect("forward chaining says UNSAT");
                assert!(cnf.is_satisfied_by(&model));
                assert!(cnf.is_satisfied_by(&least));
                // every model contains the least model
                assert!(least.iter().zip(&model).all(|(l, m)| !l || *m));
            }
            SolveResult::Unsat => assert!(least.is_none()),
        }
    }
}

fn random_formula(rng: &mut ChaCha8Rng, atoms: &[&str], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..12) {
            0 => Formula::truth(),
            1 => Formula::falsity(),
            _ => Formula::atom(atoms[rng.gen_range(0..atoms.len())]),
        };
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_formula(rng, atoms, depth - 1)),
        1 => Formula::And((0..rng.gen_range(1..=3)).map(|_| random_formula(rng, atoms, depth - 1)).collect()),
        2 => Formula::Or((0..rng.gen_range(1..=3)).map(|_| random_formula(rng, atoms, depth - 1)).collect()),
        _ => Formula::implies(random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1)),
    }
}

#[test]
fn tseitin_preserves_model_counts() {
    let atoms = ["a", "b", "c", "d", "e"];
    let mut table = AtomTable::new();
    for a in atoms {
        table.declare(a);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 300 {
        let f = random_formula(&mut rng, &atoms, 4);
        let cnf = to_cnf(&f, &table).unwrap();
        if cnf.num_vars() > 20 {
            continue;
        }
        let truth_table = (0u32..32)
            .filter(|a| f.eval(&|name| a >> atoms.iter().position(|x| *x == name).unwrap() & 1 == 1))
            .count() as u64;
        // definitions are functional, so each model extends uniquely
        let extended = brute_count(&cnf) << (5 - cnf.num_vars().min(5));
        assert_eq!(extended, truth_table, "{f}");
        checked += 1;
    }
}

#[test]
fn dimacs_round_trip_preserves_clauses() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..100 {
        let n = rng.gen_range(1..=30u32);
        let m = rng.gen_range(0..60);
        let cnf = random_cnf(&mut rng, n, m, 5);
        let back = CnfFormula::parse_dimacs(&cnf.to_dimacs()).unwrap();
        assert_eq!(back.num_vars(), cnf.num_vars());
        assert_eq!(back.clauses(), cnf.clauses());
    }
    assert!(CnfFormula::parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
    assert!(CnfFormula::parse_dimacs("p cnf 2 2\n1 2 0\n").is_err());
    assert!(CnfFormula::parse_dimacs("1 2 0\n").is_err());
}
