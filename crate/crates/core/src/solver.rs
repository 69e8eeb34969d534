//! Running an external Horn solver on an emitted file.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;
use wait_timeout::ChildExt;

/// Environment variable holding the default solver command.
pub const SOLVER_ENV: &str = "CNTABS_SOLVER";

/// `{file}` in a command template is replaced by the problem path; without
/// it the path is appended as the last argument.
pub const FILE_PLACEHOLDER: &str = "{file}";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("solver command is empty or not valid shell syntax: `{0}`")]
    BadCommand(String),
    #[error("solver `{0}` not found")]
    SolverNotFound(String),
    #[error("solver did not answer within {0:?}")]
    SolverTimeout(Duration),
    #[error("cannot read solver answer: {0}")]
    UnparseableVerdict(String),
    #[error("running the solver failed: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverVerdict {
    Sat,
    Unsat,
    Unknown,
}

impl SolverVerdict {
    pub fn token(self) -> &'static str {
        match self {
            SolverVerdict::Sat => "sat",
            SolverVerdict::Unsat => "unsat",
            SolverVerdict::Unknown => "unknown",
        }
    }

    /// The reading of a Horn verdict for the protocol.
    pub fn meaning(self) -> &'static str {
        match self {
            SolverVerdict::Sat => "SAFE (invariant found)",
            SolverVerdict::Unsat => "POSSIBLY UNSAFE (abstraction reaches bad)",
            SolverVerdict::Unknown => "UNKNOWN (solver gave up)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverRun {
    pub verdict: SolverVerdict,
    pub elapsed: Duration,
    pub stdout: String,
}

/// The argument vector for `template` applied to `file`.
pub fn command_line(template: &str, file: &Path) -> Result<Vec<String>, SolverError> {
    let mut argv =
        shlex::split(template).ok_or_else(|| SolverError::BadCommand(template.into()))?;
    if argv.is_empty() {
        return Err(SolverError::BadCommand(template.into()));
    }
    let path = file.to_string_lossy();
    if argv.iter().any(|a| a.contains(FILE_PLACEHOLDER)) {
        for a in &mut argv {
            *a = a.replace(FILE_PLACEHOLDER, &path);
        }
    } else {
        argv.push(path.into_owned());
    }
    Ok(argv)
}

/// The first answer line of a solver's output.
pub fn parse_verdict(stdout: &str) -> Result<SolverVerdict, SolverError> {
    let line = stdout
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("");
    match line {
        "sat" => Ok(SolverVerdict::Sat),
        "unsat" => Ok(SolverVerdict::Unsat),
        "unknown" | "timeout" => Ok(SolverVerdict::Unknown),
        _ => Err(SolverError::UnparseableVerdict(if line.is_empty() {
            "empty output".into()
        } else {
            format!("unexpected line `{line}`")
        })),
    }
}

/// Runs the solver on `file`, killing it after `timeout`.
pub fn run_solver(
    template: &str,
    file: &Path,
    timeout: Duration,
) -> Result<SolverRun, SolverError> {
    let argv = command_line(template, file)?;
    let start = Instant::now();
    let mut child = Command::new(&argv[0])
        .args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                SolverError::SolverNotFound(argv[0].clone())
            }
            _ => SolverError::Io(e.to_string()),
        })?;
    // drain stdout concurrently so a chatty solver cannot block on a full pipe
    let mut out = child.stdout.take().expect("stdout is piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        out.read_to_string(&mut s).map(|_| s)
    });
    let status = child
        .wait_timeout(timeout)
        .map_err(|e| SolverError::Io(e.to_string()))?;
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        return Err(SolverError::SolverTimeout(timeout));
    }
    let elapsed = start.elapsed();
    let stdout = reader
        .join()
        .map_err(|_| SolverError::Io("output reader panicked".into()))?
        .map_err(|e| SolverError::Io(e.to_string()))?;
    let verdict = parse_verdict(&stdout)?;
    Ok(SolverRun {
        verdict,
        elapsed,
        stdout,
    })
}

/// The solver command from the environment, if set and nonempty.
pub fn default_solver() -> Option<String> {
    std::env::var(SOLVER_ENV)
        .ok()
        .filter(|s| !s.trim().is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_templates() {
        let p = Path::new("/tmp/a b.smt2");
        assert_eq!(command_line("z3", p).unwrap(), ["z3", "/tmp/a b.smt2"]);
        assert_eq!(
            command_line("z3 -T:5 'fp.engine=spacer' {file}", p).unwrap(),
            ["z3", "-T:5", "fp.engine=spacer", "/tmp/a b.smt2"]
        );
        assert!(command_line("  ", p).is_err());
        assert!(command_line("z3 'unclosed", p).is_err());
    }

    #[test]
    fn verdicts() {
        assert_eq!(parse_verdict("\nsat\n").unwrap(), SolverVerdict::Sat);
        assert_eq!(
            parse_verdict("unsat\n(model)").unwrap(),
            SolverVerdict::Unsat
        );
        assert_eq!(parse_verdict("unknown").unwrap(), SolverVerdict::Unknown);
        assert!(parse_verdict("").is_err());
        assert!(parse_verdict("(error \"line 1\")").is_err());
    }

    #[test]
    fn missing_binary() {
        let r = run_solver(
            "/nonexistent/solver",
            Path::new("x.smt2"),
            Duration::from_secs(1),
        );
        assert_eq!(
            r.unwrap_err(),
            SolverError::SolverNotFound("/nonexistent/solver".into())
        );
    }

    #[cfg(unix)]
    #[test]
    fn timeouts_kill_the_solver() {
        let r = run_solver("sleep 5 {file}", Path::new("0"), Duration::from_millis(100));
        // `sleep 5 0` sleeps 5 seconds
        assert!(matches!(r, Err(SolverError::SolverTimeout(_))));
        let r = run_solver(
            "sh -c 'echo sat'",
            Path::new("ignored"),
            Duration::from_secs(5),
        )
        .unwrap();
        assert_eq!(r.verdict, SolverVerdict::Sat);
    }
}
