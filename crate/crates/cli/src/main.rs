//! `cntabs`: build counter abstractions, emit Horn problems, run a solver
//! and check abstractions against the explicit-state semantics.

mod bench;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use cntabs::chc::{emit_bounded_smt, emit_horn, parse_ground, Goal, Provenance};
use cntabs::frontend::{load_spec, parse_spec, validate};
use cntabs::oracle::{check, Bounds, CheckOptions};
use cntabs::pipeline::{build_counter_system, CounterSystem, Options};
use cntabs::qe::Policy;
use cntabs::solver::{default_solver, run_solver, SolverError, SOLVER_ENV};
use cntabs::spec::SystemSpec;
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(
    name = "cntabs",
    version,
    about = "Counter abstractions of parameterized protocols, as Horn problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the counter system and write the Horn problem.
    Build(BuildArgs),
    /// Build, then run an external Horn solver.
    Solve(SolveArgs),
    /// Compare the counter system with the explicit-state semantics.
    Check(CheckArgs),
    /// Build (and solve) every benchmark of the bundled corpus.
    Bench(bench::BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct PipelineArgs {
    /// Allow the real relaxation when an exact elimination step produces
    /// more than this many atoms (the result is flagged inexact).
    #[arg(long, value_name = "ATOMS")]
    relax: Option<usize>,
    /// Cap on the number of distinct atoms to split on.
    #[arg(long, default_value_t = 24)]
    atom_budget: usize,
    /// Cap on the number of cells.
    #[arg(long, default_value_t = 4096)]
    cell_budget: usize,
    /// Run the pipeline on one thread.
    #[arg(long)]
    sequential: bool,
}

impl PipelineArgs {
    pub fn options(&self) -> Options {
        let mut o = Options::default();
        if let Some(limit) = self.relax {
            o.policy = Policy::RelaxOnBudget(limit);
        }
        o.atom_budget = self.atom_budget;
        o.cell_budget = self.cell_budget;
        if self.sequential {
            o.exec = cntabs::par::Exec::Sequential;
        }
        o
    }
}

#[derive(Args, Debug, Clone)]
struct GoalArgs {
    /// Property name from the `properties.json` next to the input.
    #[arg(long, conflicts_with = "unsafe_")]
    prop: Option<String>,
    /// Ad-hoc bad states, overriding the spec's `unsafe:` section.
    #[arg(long = "unsafe", value_name = "FORMULA")]
    unsafe_: Option<String>,
    /// Extra constraint on the initial states.
    #[arg(long, value_name = "FORMULA")]
    init: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct BuildArgs {
    /// Specification file (`.cf`).
    input: PathBuf,
    #[command(flatten)]
    goal: GoalArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output file (standard output if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the counter system as JSON (next to the output unless a
    /// path is given).
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "")]
    emit_json: Option<String>,
    /// Emit a bounded unrolling of this depth instead of Horn clauses.
    #[arg(long, value_name = "DEPTH")]
    bmc: Option<usize>,
    /// Use an abstraction from a JSON file instead of building one.
    #[arg(long, value_name = "FILE")]
    inject_abstraction: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// Solver command; `{file}` stands for the problem path.
    #[arg(long, env = SOLVER_ENV)]
    solver: Option<String>,
    /// Seconds before the solver is killed.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    timeout: u64,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Specification file (`.cf`).
    input: PathBuf,
    /// Process counts to check (repeatable).
    #[arg(long = "n", required = true, value_parser = clap::value_parser!(u64).range(1..))]
    n: Vec<u64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Check an abstraction from a JSON file instead of building one.
    #[arg(long, value_name = "FILE")]
    inject_abstraction: Option<PathBuf>,
    /// Cap on enumerated concrete states.
    #[arg(long, default_value_t = 10_000_000)]
    state_budget: usize,
    /// Print the reports as JSON.
    #[arg(long)]
    json: bool,
}

/// A failure with its exit code: 1 a check or verdict failed, 2 the input
/// is wrong, 3 the environment is (solver missing, I/O).
#[derive(Debug)]
pub enum Failure {
    Verdict(String),
    Input(String),
    Env(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verdict(_) => 1,
            Failure::Input(_) => 2,
            Failure::Env(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verdict(m) | Failure::Input(m) | Failure::Env(m) => m,
        }
    }
}

pub fn input_err(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

pub fn env_err(e: impl std::fmt::Display) -> Failure {
    Failure::Env(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Env(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
struct PropertyFile {
    properties: Vec<PropertyEntry>,
}

#[derive(Deserialize)]
struct PropertyEntry {
    name: String,
    #[serde(rename = "unsafe")]
    unsafe_: String,
    #[serde(default)]
    init: Option<String>,
    #[serde(default)]
    spec: Option<String>,
}

/// The specification text to build, the goal, and a label for headers.
struct Job {
    source: String,
    label: String,
    bad: Option<String>,
    init: Option<String>,
}

fn job(input: &Path, goal: &GoalArgs) -> Result<Job, Failure> {
    let mut source_path = input.to_path_buf();
    let (mut bad, mut init) = (goal.unsafe_.clone(), goal.init.clone());
    if let Some(name) = &goal.prop {
        let dir = input.parent().unwrap_or(Path::new("."));
        let file = dir.join("properties.json");
        let props: PropertyFile = serde_json::from_str(&read(&file)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
        let p = props
            .properties
            .into_iter()
            .find(|p| &p.name == name)
            .ok_or_else(|| {
                Failure::Input(format!("{}: no property named `{name}`", file.display()))
            })?;
        if let Some(variant) = &p.spec {
            source_path = dir.join(variant);
        }
        bad = Some(p.unsafe_);
        if init.is_none() {
            init = p.init;
        }
    }
    Ok(Job {
        source: read(&source_path)?,
        label: source_path.display().to_string(),
        bad,
        init,
    })
}

fn system(
    spec: &SystemSpec,
    inject: Option<&Path>,
    opts: &Options,
) -> Result<(CounterSystem, Duration), Failure> {
    let start = Instant::now();
    let cs = match inject {
        Some(p) => CounterSystem::from_json(&read(p)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => build_counter_system(spec, opts).map_err(input_err)?,
    };
    Ok((cs, start.elapsed()))
}

fn stats_line(cs: &CounterSystem, elapsed: Duration) -> String {
    let s = &cs.stats;
    format!(
        "cells {}/{}, atoms {}, cubes {}, data constraints {}, disjuncts {}/{}/{}, exact {}, {} ms",
        s.init_cells,
        s.trans_cells,
        s.atoms,
        s.cubes,
        s.distinct_thetas,
        cs.invariant.len(),
        cs.init.len(),
        cs.trans.len(),
        cs.exact,
        elapsed.as_millis()
    )
}

/// Builds and writes the problem; returns its path if it was written to a file.
fn cmd_build(a: &BuildArgs) -> Result<Option<PathBuf>, Failure> {
    let job = job(&a.input, &a.goal)?;
    let spec = load_spec(&job.source).map_err(|e| Failure::Input(format!("{}: {e}", job.label)))?;
    let opts = a.pipeline.options();
    let (cs, elapsed) = system(&spec, a.inject_abstraction.as_deref(), &opts)?;
    let goal = match &job.bad {
        Some(bad) => Goal::parse(&spec, bad, job.init.as_deref(), &opts).map_err(input_err)?,
        None => Goal {
            init: job
                .init
                .as_deref()
                .map(|i| parse_ground(&spec, i, &opts))
                .transpose()
                .map_err(input_err)?,
            ..Goal::from_system(&cs)
        },
    };
    let prov = Provenance {
        source: Some(&job.source),
        label: Some(&job.label),
    };
    let text = match a.bmc {
        Some(k) => emit_bounded_smt(&cs, &goal, k, &prov).map_err(input_err)?,
        None => emit_horn(&cs, &goal, &prov).map_err(input_err)?.text,
    };
    eprintln!("{}: {}", job.label, stats_line(&cs, elapsed));
    if let Some(j) = &a.emit_json {
        let path = if j.is_empty() {
            a.output
                .as_ref()
                .map(|o| o.with_extension("json"))
                .ok_or_else(|| Failure::Input("--emit-json without a path needs --output".into()))?
        } else {
            PathBuf::from(j)
        };
        write(&path, &cs.to_json_string())?;
    }
    match &a.output {
        Some(o) => {
            write(o, &text)?;
            Ok(Some(o.clone()))
        }
        None => {
            print!("{text}");
            Ok(None)
        }
    }
}

pub fn solver_failure(e: SolverError) -> Failure {
    match e {
        SolverError::BadCommand(_) => Failure::Input(e.to_string()),
        _ => Failure::Env(e.to_string()),
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Failure> {
    let solver = a.solver.clone().or_else(default_solver).ok_or_else(|| {
        Failure::Env(format!(
            "no solver configured (use --solver or set {SOLVER_ENV})"
        ))
    })?;
    let start = Instant::now();
    let tmp;
    let path = match &a.build.output {
        Some(p) => p.clone(),
        None => {
            tmp = tempfile::Builder::new()
                .suffix(".smt2")
                .tempfile()
                .map_err(env_err)?;
            tmp.path().to_path_buf()
        }
    };
    cmd_build(&BuildArgs {
        output: Some(path.clone()),
        ..a.build.clone()
    })?;
    let build_ms = start.elapsed().as_millis();
    let run = run_solver(&solver, &path, Duration::from_secs(a.timeout)).map_err(solver_failure)?;
    println!("{}", run.verdict.meaning());
    println!(
        "build {build_ms} ms, solve {} ms, total {} ms",
        run.elapsed.as_millis(),
        start.elapsed().as_millis()
    );
    match run.verdict {
        cntabs::solver::SolverVerdict::Sat => Ok(()),
        cntabs::solver::SolverVerdict::Unsat => Err(Failure::Verdict(
            "the abstraction reaches a bad state".into(),
        )),
        cntabs::solver::SolverVerdict::Unknown => {
            Err(Failure::Env("the solver answered unknown".into()))
        }
    }
}

fn cmd_check(a: &CheckArgs) -> Result<(), Failure> {
    let source = read(&a.input)?;
    let label = a.input.display();
    // the explicit-state semantics works on the spec before desugaring
    let raw = parse_spec(&source)
        .and_then(|p| validate(&p))
        .map_err(|e| Failure::Input(format!("{label}: {e}")))?;
    let spec = load_spec(&source).map_err(|e| Failure::Input(format!("{label}: {e}")))?;
    let (cs, elapsed) = system(
        &spec,
        a.inject_abstraction.as_deref(),
        &a.pipeline.options(),
    )?;
    eprintln!("{label}: {}", stats_line(&cs, elapsed));
    let mut all_hold = true;
    let mut reports = Vec::new();
    for &n in &a.n {
        let n = n as usize;
        let mut bounds = Bounds::for_spec(&raw, n);
        bounds.state_budget = a.state_budget;
        let opts = CheckOptions {
            bounds: Some(bounds),
            ..CheckOptions::default()
        };
        let r = check(&raw, &cs, n, &opts).map_err(env_err)?;
        all_hold &= r.holds();
        if a.json {
            reports.push(r.to_json());
        } else {
            print!("{r}");
        }
    }
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&reports).expect("reports serialize")
        );
    }
    if all_hold {
        Ok(())
    } else {
        Err(Failure::Verdict("the abstraction fails a check".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let r = match &cli.command {
        Cmd::Build(a) => cmd_build(a).map(|_| ()),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Bench(a) => bench::cmd_bench(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
