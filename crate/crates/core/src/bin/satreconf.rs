use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use satreconf::engine::{sat_reconf_with, EngineOptions, ReconfProblem, ReconfResult};
use satreconf::harness::{
    generate_suite, render_pooled, run_scenario, run_suite, shipped_suite, ObservationDocument, RunConfig, Suite,
    SuiteReport,
};
use satreconf::hybrid_model::{build_three_tank, build_two_tank, SystemKind, TankSystem};
use satreconf::system_model::{load_model, shipped_document, SystemModel};
use satreconf::{Error, Result};

#[derive(Parser)]
#[command(name = "satreconf", version, about = "Minimal-cardinality reconfiguration of tank systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its report as JSON.
    Simulate(SimulateArgs),
    /// Run a scenario suite and print the results table.
    Suite(SuiteArgs),
    /// Generate a scenario suite from a seed.
    GenerateSuite(GenerateArgs),
    /// Solve one reconfiguration problem given by an observation file.
    Reconf(ReconfArgs),
    /// Write the CNF instance of every bound tried as DIMACS files.
    ExportDimacs(ExportArgs),
    /// Schema and vacuity checks on a system model.
    ValidateModel(ModelArgs),
}

#[derive(Args)]
struct SuiteSource {
    /// Plant; optional when the suite file names it.
    #[arg(long)]
    system: Option<SystemKind>,
    /// Suite document; defaults to the shipped suite.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Generate the suite from this seed instead of reading a file.
    #[arg(long, conflicts_with = "scenario_file")]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// System model document; defaults to the shipped model.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SuiteSource,
    /// Scenario id within the suite.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(flatten)]
    source: SuiteSource,
    /// Worker threads (results do not depend on it).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Also list every scenario's outcome.
    #[arg(long)]
    verbose: bool,
    /// Directory for table.txt, results.csv and runs.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    system: SystemKind,
    #[arg(long, default_value_t = satreconf::harness::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReconfArgs {
    /// Observation document.
    #[arg(long)]
    observation: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    observation: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output directory; files are named bound_<k>.cnf.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    system: SystemKind,
    #[arg(long)]
    model: Option<PathBuf>,
}

fn plant(kind: SystemKind) -> TankSystem {
    match kind {
        SystemKind::TwoTank => build_two_tank(),
        SystemKind::ThreeTank => build_three_tank(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn model(system: &TankSystem, path: Option<&Path>) -> Result<SystemModel> {
    match path {
        Some(p) => load_model(&read(p)?, system),
        None => load_model(shipped_document(system.kind), system),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Suites selected by the source flags; all shipped suites when nothing is named.
fn suites(src: &SuiteSource) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    if let Some(path) = &src.scenario_file {
        let suite = Suite::parse(&read(path)?)?;
        if let Some(k) = src.system {
            if k != suite.system {
                return Err(Error::Scenario(format!("--system {k} but suite is for {}", suite.system)));
            }
        }
        out.push(suite);
    } else {
        let kinds = match src.system {
            Some(k) => vec![k],
            None => vec![SystemKind::TwoTank, SystemKind::ThreeTank],
        };
        for k in kinds {
            out.push(match src.seed {
                Some(seed) => generate_suite(k, seed),
                None => Suite::parse(shipped_suite(k))?,
            });
        }
    }
    for s in &mut out {
        if let Some(dt) = src.dt {
            s.dt = dt;
        }
        if let Some(h) = src.horizon {
            s.horizon = h;
        }
        if !(s.dt > 0.0 && s.dt.is_finite() && s.horizon > 0.0 && s.horizon.is_finite()) {
            return Err(Error::Config("--dt and --horizon must be positive".into()));
        }
    }
    Ok(out)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let all = suites(&a.source)?;
    let suite = all
        .iter()
        .find(|s| s.scenario(&a.scenario).is_some())
        .ok_or_else(|| Error::Scenario(format!("no scenario `{}`", a.scenario)))?;
    let system = plant(suite.system);
    let sm = model(&system, a.source.model.as_deref())?;
    let cfg = RunConfig {
        dt: suite.dt,
        horizon: suite.horizon,
        ..RunConfig::default()
    };
    let report = run_scenario(&system, &sm, suite.scenario(&a.scenario).expect("found above"), &cfg)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    emit(&(json + "\n"), a.out.as_deref())
}

fn suite(a: &SuiteArgs) -> Result<()> {
    let mut reports: Vec<SuiteReport> = Vec::new();
    for s in suites(&a.source)? {
        let system = plant(s.system);
        let sm = model(&system, a.source.model.as_deref())?;
        reports.push(run_suite(&system, &sm, &s, &RunConfig::default(), a.threads)?);
    }
    let mut table = String::new();
    let mut csv = String::new();
    let mut runs = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            table.push('\n');
        }
        table += &r.render_table();
        let c = r.to_csv();
        csv += if i == 0 { &c[..] } else { c.split_once('\n').map_or("", |x| x.1) };
        runs += &r.render_runs();
    }
    if reports.len() > 1 {
        table.push('\n');
        table += &render_pooled(&reports);
    }
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            emit(&table, Some(&dir.join("table.txt")))?;
            emit(&csv, Some(&dir.join("results.csv")))?;
            emit(&runs, Some(&dir.join("runs.txt")))?;
            print!("{table}");
        }
        None => {
            print!("{table}");
            if a.verbose {
                print!("\n{runs}");
            }
        }
    }
    Ok(())
}

fn problem_inputs(path: &Path, model_path: Option<&Path>) -> Result<(TankSystem, SystemModel, ObservationDocument)> {
    let doc = ObservationDocument::parse(&read(path)?)?;
    let system = plant(doc.system);
    let sm = model(&system, model_path)?;
    Ok((system, sm, doc))
}

fn reconf(a: &ReconfArgs) -> Result<()> {
    let (system, sm, doc) = problem_inputs(&a.observation, a.model.as_deref())?;
    let q = doc.observation(&system)?;
    let p = ReconfProblem::new(&sm, q.clone(), doc.inputs(&system)?)?;
    let r = sat_reconf_with(&p, &EngineOptions::default(), None)?;
    let mut out = format!("observation: {q}\n{r}\n");
    if let ReconfResult::Success(rc) = &r {
        let assignment: Vec<String> = rc
            .inputs
            .ids()
            .iter()
            .zip(rc.inputs.values())
            .map(|(id, v)| format!("{id}={}", u8::from(*v)))
            .collect();
        out += &format!("inputs: {}\n", assignment.join(" "));
    }
    emit(&out, a.out.as_deref())
}

fn export_dimacs(a: &ExportArgs) -> Result<()> {
    let (system, sm, doc) = problem_inputs(&a.observation, a.model.as_deref())?;
    let p = ReconfProblem::new(&sm, doc.observation(&system)?, doc.inputs(&system)?)?;
    fs::create_dir_all(&a.out)?;
    let dir = a.out.clone();
    let mut written = Vec::new();
    let mut obs = |k: usize, cnf: &satreconf::sat::CnfFormula| -> Result<()> {
        let path = dir.join(format!("bound_{k}.cnf"));
        fs::write(&path, cnf.to_dimacs())?;
        written.push(path);
        Ok(())
    };
    let r = sat_reconf_with(&p, &EngineOptions::default(), Some(&mut obs))?;
    for path in &written {
        println!("{}", path.display());
    }
    println!("{r}");
    Ok(())
}

fn validate_model(a: &ModelArgs) -> Result<bool> {
    let system = plant(a.system);
    let sm = model(&system, a.model.as_deref())?;
    let findings = sm.validate();
    for f in &findings {
        println!("{f}");
    }
    if findings.is_empty() {
        println!("{} constraints, no findings", sm.constraints().len());
    }
    Ok(findings.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Suite(a) => suite(a).map(|_| true),
        Command::GenerateSuite(a) => emit(&generate_suite(a.system, a.seed).to_toml(), a.out.as_deref()).map(|_| true),
        Command::Reconf(a) => reconf(a).map(|_| true),
        Command::ExportDimacs(a) => export_dimacs(a).map(|_| true),
        Command::ValidateModel(a) => validate_model(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
