//! The corpus table: build (and solve) every property of every benchmark.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::Args;
use cntabs::benchmarks::{all_fixtures, load_fixture, Fixture, Property, Verdict};
use cntabs::chc::{emit_horn, Goal, Provenance};
use cntabs::frontend::load_spec;
use cntabs::pipeline::build_counter_system;
use cntabs::solver::{default_solver, run_solver, SolverError, SolverVerdict, SOLVER_ENV};

use crate::{env_err, input_err, solver_failure, Failure, PipelineArgs};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Only these benchmarks (repeatable; default: the whole corpus).
    #[arg(long = "benchmark", value_name = "NAME")]
    benchmarks: Vec<String>,
    /// Solver command; without one only the build is timed.
    #[arg(long, env = SOLVER_ENV)]
    solver: Option<String>,
    /// Seconds before a solver run is killed.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    timeout: u64,
    /// Write the table as CSV to this file (`-` for standard output).
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Keep the Horn files in this directory.
    #[arg(long, value_name = "DIR")]
    keep: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

pub const CSV_HEADER: [&str; 7] = [
    "benchmark",
    "property",
    "build_ms",
    "solve_ms",
    "total_ms",
    "verdict",
    "exact",
];

#[derive(Debug)]
struct Row {
    benchmark: String,
    property: String,
    build_ms: u128,
    solve_ms: Option<u128>,
    total_ms: u128,
    /// `sat`, `unsat`, `unknown`, `timeout`, `error` or `built`.
    verdict: String,
    exact: bool,
    expected: Verdict,
}

impl Row {
    fn mismatch(&self) -> bool {
        match self.verdict.as_str() {
            "sat" => self.expected != Verdict::Sat,
            "unsat" => self.expected != Verdict::Unsat,
            "built" => false,
            _ => true,
        }
    }

    fn fields(&self) -> [String; 7] {
        [
            self.benchmark.clone(),
            self.property.clone(),
            self.build_ms.to_string(),
            self.solve_ms.map(|s| s.to_string()).unwrap_or_default(),
            self.total_ms.to_string(),
            self.verdict.clone(),
            self.exact.to_string(),
        ]
    }
}

fn row(
    f: &Fixture,
    p: &Property,
    solver: Option<&str>,
    a: &BenchArgs,
    dir: &std::path::Path,
) -> Result<Row, Failure> {
    let start = Instant::now();
    let source = f.spec_for(p).map_err(input_err)?;
    let spec = load_spec(source).map_err(input_err)?;
    let opts = a.pipeline.options();
    let cs = build_counter_system(&spec, &opts).map_err(input_err)?;
    let goal = Goal::parse(&spec, &p.unsafe_, p.init.as_deref(), &opts).map_err(input_err)?;
    let label = format!("{}/{}", f.name, p.name);
    let h = emit_horn(
        &cs,
        &goal,
        &Provenance {
            source: Some(source),
            label: Some(&label),
        },
    )
    .map_err(input_err)?;
    let path = dir.join(format!("{}_{}.smt2", f.name, p.name));
    std::fs::write(&path, &h.text).map_err(env_err)?;
    let build_ms = start.elapsed().as_millis();
    let (verdict, solve_ms) = match solver {
        None => ("built".to_string(), None),
        Some(cmd) => match run_solver(cmd, &path, Duration::from_secs(a.timeout)) {
            Ok(r) => (r.verdict.token().to_string(), Some(r.elapsed.as_millis())),
            Err(SolverError::SolverTimeout(t)) => ("timeout".to_string(), Some(t.as_millis())),
            Err(e @ (SolverError::SolverNotFound(_) | SolverError::BadCommand(_))) => {
                return Err(solver_failure(e))
            }
            Err(e) => {
                eprintln!("{label}: {e}");
                ("error".to_string(), None)
            }
        },
    };
    Ok(Row {
        benchmark: f.name.to_string(),
        property: p.name.clone(),
        build_ms,
        solve_ms,
        total_ms: start.elapsed().as_millis(),
        verdict,
        exact: cs.exact,
        expected: p.expected,
    })
}

fn meaning(verdict: &str) -> &str {
    match verdict {
        "sat" => SolverVerdict::Sat.meaning(),
        "unsat" => SolverVerdict::Unsat.meaning(),
        "unknown" => SolverVerdict::Unknown.meaning(),
        "timeout" => "TIMEOUT",
        "built" => "-",
        _ => "ERROR",
    }
}

pub fn cmd_bench(a: &BenchArgs) -> Result<(), Failure> {
    let fixtures = if a.benchmarks.is_empty() {
        all_fixtures().map_err(input_err)?
    } else {
        a.benchmarks
            .iter()
            .map(|n| load_fixture(n))
            .collect::<Result<_, _>>()
            .map_err(input_err)?
    };
    let solver = a.solver.clone().or_else(default_solver);
    let tmp;
    let dir = match &a.keep {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(env_err)?;
            d.clone()
        }
        None => {
            tmp = tempfile::tempdir().map_err(env_err)?;
            tmp.path().to_path_buf()
        }
    };
    let mut rows = Vec::new();
    for f in &fixtures {
        for p in &f.properties {
            rows.push(row(f, p, solver.as_deref(), a, &dir)?);
        }
    }

    let table: Vec<[String; 7]> = rows.iter().map(Row::fields).collect();
    let mut widths = CSV_HEADER.map(str::len);
    for r in &table {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    println!("{}", line(&CSV_HEADER));
    for (r, fields) in rows.iter().zip(&table) {
        let cells: Vec<&str> = fields.iter().map(String::as_str).collect();
        let mark = if r.mismatch() { "  MISMATCH" } else { "" };
        println!("{}  {}{mark}", line(&cells), meaning(&r.verdict));
    }

    if let Some(path) = &a.csv {
        let out: Box<dyn std::io::Write> = if path.as_os_str() == "-" {
            Box::new(std::io::stdout())
        } else {
            Box::new(std::fs::File::create(path).map_err(env_err)?)
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(env_err)?;
        for fields in &table {
            w.write_record(fields).map_err(env_err)?;
        }
        w.flush().map_err(env_err)?;
    }

    let bad: Vec<String> = rows
        .iter()
        .filter(|r| r.mismatch())
        .map(|r| format!("{}/{}", r.benchmark, r.property))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verdict(format!(
            "unexpected verdicts: {}",
            bad.join(", ")
        )))
    }
}
