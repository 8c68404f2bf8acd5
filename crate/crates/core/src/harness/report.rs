//! Aggregation of run reports into the results table and CSV.

use std::fmt::Write as _;

use serde::Serialize;

use super::run::RunReport;
use super::scenario::Category;
use crate::hybrid_model::SystemKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Tally {
    pub cases: usize,
    pub reconfigured: usize,
    /// Cases where some state left its interval at all.
    pub detected: usize,
}

impl Tally {
    fn add(&mut self, run: &RunReport) {
        self.cases += 1;
        self.reconfigured += usize::from(run.recovered);
        self.detected += usize::from(run.detected_at.is_some());
    }

    fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.reconfigured += other.reconfigured;
        self.detected += other.detected;
    }

    /// reconfigured / cases in percent, rounded half away from zero.
    pub fn percent(&self) -> Option<u32> {
        (self.cases > 0).then(|| (100.0 * self.reconfigured as f64 / self.cases as f64).round() as u32)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RowTally {
    pub category: Category,
    pub row: String,
    pub tally: Tally,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub system: SystemKind,
    pub runs: Vec<RunReport>,
}

impl SuiteReport {
    pub fn new(system: SystemKind, runs: Vec<RunReport>) -> Self {
        SuiteReport { system, runs }
    }

    pub fn total(&self) -> Tally {
        let mut t = Tally::default();
        for r in &self.runs {
            t.add(r);
        }
        t
    }

    /// Rows in order of first appearance.
    pub fn rows(&self) -> Vec<RowTally> {
        let mut rows: Vec<RowTally> = Vec::new();
        for r in &self.runs {
            match rows.iter_mut().find(|x| x.category == r.category && x.row == r.row) {
                Some(x) => x.tally.add(r),
                None => {
                    let mut tally = Tally::default();
                    tally.add(r);
                    rows.push(RowTally {
                        category: r.category,
                        row: r.row.clone(),
                        tally,
                    });
                }
            }
        }
        rows
    }

    /// Category tallies, in canonical category order; empty categories omitted.
    pub fn categories(&self) -> Vec<(Category, Tally)> {
        Category::ALL
            .iter()
            .map(|&c| {
                let mut t = Tally::default();
                for r in self.runs.iter().filter(|r| r.category == c) {
                    t.add(r);
                }
                (c, t)
            })
            .filter(|(_, t)| t.cases > 0)
            .collect()
    }

    pub fn category(&self, c: Category) -> Tally {
        self.categories()
            .into_iter()
            .find(|(x, _)| *x == c)
            .map(|(_, t)| t)
            .unwrap_or_default()
    }

    /// Plain-text table: system total, then each category with its rows.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<44} {:>7} {:>7} {:>5} {:>8}", "kind of faults", "# cases", "reconf.", "in %", "detected");
        let _ = writeln!(out, "{}", "=".repeat(75));
        line(&mut out, &format!("{} system", self.system), self.total(), true);
        let rows = self.rows();
        for (c, t) in self.categories() {
            let _ = writeln!(out, "{}", "-".repeat(75));
            line(&mut out, c.label(), t, true);
            for r in rows.iter().filter(|r| r.category == c) {
                line(&mut out, &format!("  {}", r.row), r.tally, false);
            }
        }
        out
    }

    /// One line per scenario with outcome and timing.
    pub fn render_runs(&self) -> String {
        let mut out = String::new();
        for r in &self.runs {
            let detected = r.detected_at.map_or("-".to_string(), |t| format!("{t:.1}"));
            let _ = writeln!(
                out,
                "{:<48} detected={:<6} {:<32} recovered={}",
                r.scenario,
                detected,
                r.outcome.label(),
                r.recovered
            );
        }
        out
    }

    /// `system,level,category,row,cases,reconfigured,percent,detected`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("system,level,category,row,cases,reconfigured,percent,detected\n");
        let sys = self.system.as_str();
        csv_line(&mut out, sys, "system", "", "", self.total());
        let rows = self.rows();
        for (c, t) in self.categories() {
            csv_line(&mut out, sys, "category", c.label(), "", t);
            for r in rows.iter().filter(|r| r.category == c) {
                csv_line(&mut out, sys, "row", c.label(), &r.row, r.tally);
            }
        }
        out
    }
}

fn line(out: &mut String, label: &str, t: Tally, percent: bool) {
    let p = match (percent, t.percent()) {
        (true, Some(p)) => p.to_string(),
        _ => String::new(),
    };
    let _ = writeln!(out, "{:<44} {:>7} {:>7} {:>5} {:>8}", label, t.cases, t.reconfigured, p, t.detected);
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(out: &mut String, sys: &str, level: &str, category: &str, row: &str, t: Tally) {
    let p = t.percent().map_or(String::new(), |p| p.to_string());
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        sys,
        level,
        csv_field(category),
        csv_field(row),
        t.cases,
        t.reconfigured,
        p,
        t.detected
    );
}

/// Category tallies summed over several systems.
pub fn pooled_categories(reports: &[SuiteReport]) -> Vec<(Category, Tally)> {
    Category::ALL
        .iter()
        .map(|&c| {
            let mut t = Tally::default();
            for r in reports {
                t.merge(r.category(c));
            }
            (c, t)
        })
        .filter(|(_, t)| t.cases > 0)
        .collect()
}

/// Pooled category table appended after per-system tables.
pub fn render_pooled(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<44} {:>7} {:>7} {:>5} {:>8}", "pooled over systems", "# cases", "reconf.", "in %", "detected");
    let _ = writeln!(out, "{}", "=".repeat(75));
    for (c, t) in pooled_categories(reports) {
        line(&mut out, c.label(), t, true);
    }
    out
}
