//! Seeded generation of the shipped suites and suite execution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fault::{FaultEffect, FaultSpec, PumpPosition, ValvePosition};
use super::report::SuiteReport;
use super::run::{run_scenario, RunConfig, RunReport};
use super::scenario::{Category, Scenario, Suite};
use crate::error::Result;
use crate::hybrid_model::{SystemKind, TankSystem};
use crate::system_model::SystemModel;

/// Injection time of every generated fault.
pub const FAULT_TIME: f64 = 20.0;
/// Seed of the shipped suite files.
pub const DEFAULT_SEED: u64 = 2017;

/// Admissible discrete jump magnitudes, percent.
pub const LEVEL_JUMP_RANGE: (f64, f64) = (20.0, 70.0);
pub const TEMP_JUMP_RANGE: (f64, f64) = (7.0, 42.0);

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    round3(rng.gen_range(lo..=hi))
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn short(c: Category) -> &'static str {
    match c {
        Category::Continuous => "c",
        Category::Discrete => "d",
        Category::MultipleContinuous => "mc",
        Category::MultipleContinuousDiscrete => "mcd",
        Category::MultipleDiscrete => "md",
    }
}

fn leak(t: &str, rate: f64) -> FaultEffect {
    FaultEffect::Leak { target: t.into(), rate }
}
fn valve(t: &str, position: ValvePosition) -> FaultEffect {
    FaultEffect::ValveStuck { target: t.into(), position }
}
fn pump(t: &str, position: PumpPosition) -> FaultEffect {
    FaultEffect::PumpStuck { target: t.into(), position }
}
fn level(t: &str, percent: f64) -> FaultEffect {
    FaultEffect::LevelJump { target: t.into(), percent }
}
fn temp(t: &str, percent: f64) -> FaultEffect {
    FaultEffect::TempJump { target: t.into(), percent }
}
fn thermal(t: &str) -> FaultEffect {
    FaultEffect::ThermalFailure { target: t.into() }
}

use PumpPosition::{Blocked, Full};
use ValvePosition::{Closed, Open};

type Build<'a> = Box<dyn Fn(usize, &mut ChaCha8Rng) -> Vec<FaultEffect> + 'a>;

struct Row<'a> {
    category: Category,
    label: &'static str,
    cases: usize,
    build: Build<'a>,
}

fn row<'a>(
    category: Category,
    label: &'static str,
    cases: usize,
    build: impl Fn(usize, &mut ChaCha8Rng) -> Vec<FaultEffect> + 'a,
) -> Row<'a> {
    Row {
        category,
        label,
        cases,
        build: Box::new(build),
    }
}

fn pick<T: Copy>(items: &[T], i: usize) -> T {
    items[i % items.len()]
}

// T2 settles below the middle of its band, so it needs bigger relative rises
fn three_tank_rise(t: &str, r: &mut ChaCha8Rng) -> f64 {
    if t == "T2" {
        draw(r, 55.0, 70.0)
    } else {
        draw(r, 40.0, 70.0)
    }
}

fn three_tank_rows() -> Vec<Row<'static>> {
    use Category::*;
    const VALVES: [&str; 4] = ["v12a", "v12b", "v23a", "v23b"];
    const TANKS: [&str; 3] = ["T1", "T2", "T3"];
    vec![
        row(Continuous, "leak in one tank", 2, |i, r| vec![leak(pick(&["T1", "T3"], i), draw(r, 1.2, 2.0))]),
        row(Continuous, "valve stuck open", 4, |i, _| vec![valve(VALVES[i], Open)]),
        row(Continuous, "valve stuck close", 4, |i, _| vec![valve(VALVES[i], Closed)]),
        row(Continuous, "pump stuck full power", 2, |i, _| vec![pump(pick(&["p1", "p2"], i), Full)]),
        row(Continuous, "pump blocked", 2, |i, _| vec![pump(pick(&["p1", "p2"], i), Blocked)]),
        row(Discrete, "drop in wl (20%-70%)", 5, |i, r| vec![level(pick(&TANKS, i), -draw(r, 40.0, 70.0))]),
        row(Discrete, "rise in wl (20%-70%)", 5, |i, r| {
            let t = pick(&TANKS, i);
            vec![level(t, three_tank_rise(t, r))]
        }),
        row(MultipleContinuous, "leak in one tank + valve stuck", 4, |i, r| {
            let (t, v, p) = pick(&[("T1", "v12b", Closed), ("T1", "v12a", Open), ("T3", "v23b", Closed), ("T3", "v23a", Open)], i);
            vec![leak(t, draw(r, 1.2, 2.0)), valve(v, p)]
        }),
        row(MultipleContinuousDiscrete, "valve stuck open + drop in wl", 5, |i, r| {
            let (v, t) = pick(&[("v12a", "T1"), ("v12b", "T2"), ("v23a", "T3"), ("v23b", "T1"), ("v12a", "T2")], i);
            vec![valve(v, Open), level(t, -draw(r, 40.0, 70.0))]
        }),
        row(MultipleContinuousDiscrete, "pump blocked + rise in wl", 5, |i, r| {
            let (p, t) = pick(&[("p1", "T1"), ("p2", "T2"), ("p1", "T3"), ("p2", "T1"), ("p1", "T2")], i);
            vec![pump(p, Blocked), level(t, three_tank_rise(t, r))]
        }),
        row(MultipleDiscrete, "drop in wl in 2 tanks", 1, |_, r| {
            vec![level("T1", -draw(r, 40.0, 70.0)), level("T3", -draw(r, 40.0, 70.0))]
        }),
    ]
}

fn two_tank_rows() -> Vec<Row<'static>> {
    use Category::*;
    const VALVES: [&str; 4] = ["v01", "v10", "v02", "v20"];
    const TANKS: [&str; 2] = ["T1", "T2"];
    // T2 sits near the bottom of its band, so it needs bigger relative jumps
    fn temp_jump(t: &str, r: &mut ChaCha8Rng) -> f64 {
        if t == "T1" {
            draw(r, 8.0, 42.0)
        } else {
            draw(r, 35.0, 42.0)
        }
    }
    vec![
        row(Continuous, "leak in one tank", 2, |i, r| vec![leak(pick(&TANKS, i), draw(r, 0.5, 1.5))]),
        row(Continuous, "valve stuck open", 4, |i, _| vec![valve(VALVES[i], Open)]),
        row(Continuous, "valve stuck close", 4, |i, _| vec![valve(VALVES[i], Closed)]),
        row(Continuous, "pump stuck full", 2, |i, _| vec![pump(pick(&["p12", "p21"], i), Full)]),
        row(Continuous, "pump blocked", 2, |i, _| vec![pump(pick(&["p12", "p21"], i), Blocked)]),
        row(Continuous, "continuous temperature loss/rise", 2, |i, r| {
            vec![if i == 0 {
                FaultEffect::TempDrift { target: "T1".into(), rate: -draw(r, 0.2, 0.6) }
            } else {
                FaultEffect::TempDrift { target: "T2".into(), rate: draw(r, 0.1, 0.4) }
            }]
        }),
        row(Discrete, "drop in wl (20%-70%)", 5, |i, r| vec![level(pick(&TANKS, i), -draw(r, 20.0, 70.0))]),
        row(Discrete, "rise in wl (20%-70%)", 5, |i, r| vec![level(pick(&TANKS, i), draw(r, 20.0, 70.0))]),
        row(Discrete, "drop in temperature (7%-42%)", 6, |i, r| {
            let t = pick(&TANKS, i);
            vec![temp(t, -temp_jump(t, r))]
        }),
        row(Discrete, "rise in temperature (7%-42%)", 6, |i, r| {
            let t = pick(&TANKS, i);
            vec![temp(t, temp_jump(t, r))]
        }),
        row(MultipleContinuous, "heating failure + valve stuck", 2, |i, _| {
            vec![thermal("T1"), { let (v, p) = pick(&[("v01", Open), ("v10", Closed)], i); valve(v, p) }]
        }),
        row(MultipleContinuous, "cooler failure + valve stuck", 2, |i, _| {
            vec![thermal("T2"), { let (v, p) = pick(&[("v02", Open), ("v20", Closed)], i); valve(v, p) }]
        }),
        row(MultipleContinuousDiscrete, "heating failure + drop in wl", 5, |i, r| {
            vec![thermal("T1"), level(pick(&TANKS, i), -draw(r, 20.0, 70.0))]
        }),
        row(MultipleContinuousDiscrete, "cooler failure + rise in wl", 5, |i, r| {
            vec![thermal("T2"), level(pick(&TANKS, i), draw(r, 20.0, 70.0))]
        }),
        row(MultipleDiscrete, "drop in wl + in temperature", 5, |i, r| {
            let (l, t) = pick(&[("T1", "T1"), ("T1", "T2"), ("T2", "T1"), ("T2", "T2"), ("T1", "T1")], i);
            vec![level(l, -draw(r, 20.0, 70.0)), temp(t, -temp_jump(t, r))]
        }),
        row(MultipleDiscrete, "drop in wl in 2 tanks", 1, |_, r| {
            vec![level("T1", -draw(r, 20.0, 70.0)), level("T2", -draw(r, 20.0, 70.0))]
        }),
    ]
}

/// Deterministic suite for `kind` mirroring the row structure of the
/// reference experiment table. Same seed, same suite.
pub fn generate_suite(kind: SystemKind, seed: u64) -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = match kind {
        SystemKind::TwoTank => two_tank_rows(),
        SystemKind::ThreeTank => three_tank_rows(),
    };
    let mut suite = Suite::new(kind, seed);
    for r in rows {
        for i in 0..r.cases {
            let faults = (r.build)(i, &mut rng)
                .into_iter()
                .map(|e| FaultSpec::new(FAULT_TIME, e))
                .collect();
            suite.scenarios.push(Scenario {
                id: format!("{}-{}-{}", short(r.category), slug(r.label), i + 1),
                category: r.category,
                row: r.label.into(),
                faults,
            });
        }
    }
    suite
}

/// Text of the suite file shipped for `kind`.
pub fn shipped_suite(kind: SystemKind) -> &'static str {
    match kind {
        SystemKind::TwoTank => include_str!("../../suites/two_tank.toml"),
        SystemKind::ThreeTank => include_str!("../../suites/three_tank.toml"),
    }
}

/// Runs every scenario in file order. `threads > 1` spreads scenarios over
/// scoped threads; results are merged back in file order.
pub fn run_suite(system: &TankSystem, sm: &SystemModel, suite: &Suite, cfg: &RunConfig, threads: usize) -> Result<SuiteReport> {
    suite.validate(system)?;
    let cfg = RunConfig {
        dt: suite.dt,
        horizon: suite.horizon,
        ..cfg.clone()
    };
    let threads = threads.clamp(1, suite.scenarios.len().max(1));
    let runs: Vec<RunReport> = if threads == 1 {
        suite
            .scenarios
            .iter()
            .map(|s| run_scenario(system, sm, s, &cfg))
            .collect::<Result<_>>()?
    } else {
        let chunk = suite.scenarios.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = suite
                .scenarios
                .chunks(chunk)
                .map(|part| {
                    let cfg = &cfg;
                    scope.spawn(move || {
                        part.iter()
                            .map(|s| run_scenario(system, sm, s, cfg))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            let mut all = Vec::new();
            for h in handles {
                all.extend(h.join().expect("scenario thread panicked")?);
            }
            Ok::<_, crate::Error>(all)
        })?
    };
    Ok(SuiteReport::new(suite.system, runs))
}
