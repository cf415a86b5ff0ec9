//! Answer-set counting: `#φ1 − #∃X φ2`, bounded enumeration, and the hybrid
//! of the two. Counting runs on the built-in counter or on an external
//! projected model counter driven through DIMACS files.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{CnfFormula, DimacsHeader, Var};
use crate::copy::{build_phi1, build_phi2_with, phi1_header, phi2_header};
use crate::depgraph::loop_atoms;
use crate::oracle::{copy_check, OracleError};
use crate::par::{self, Execution};
use crate::program::{GroundProgram, Interpretation};
use crate::sat::{self, BigCount, SatResult, Solver};

/// Name of the environment variable selecting the counting backend.
pub const BACKEND_ENV: &str = "ASPSUBCOUNT_BACKEND";

pub const DEFAULT_HYBRID_THRESHOLD: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Builtin,
    /// An executable reading one DIMACS file. Projection comes from the
    /// `c p show` line.
    External {
        executable: PathBuf,
        /// `{file}` is replaced by the instance path.
        args: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub timeout: Option<Duration>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::builtin()
    }
}

impl BackendConfig {
    pub fn builtin() -> Self {
        BackendConfig {
            kind: BackendKind::Builtin,
            timeout: None,
        }
    }

    pub fn external(executable: impl Into<PathBuf>, args: Vec<String>) -> Self {
        BackendConfig {
            kind: BackendKind::External {
                executable: executable.into(),
                args,
            },
            timeout: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }

    /// `builtin`, or a command line such as `exec:ganak --mode 0 {file}`. The
    /// `exec:` prefix is optional. Without a `{file}` argument the instance
    /// path is appended.
    pub fn parse(command: &str) -> Result<Self, BackendError> {
        let command = command.trim();
        let command = command.strip_prefix("exec:").unwrap_or(command);
        let mut words = command.split_whitespace();
        let exe = words.next().ok_or(BackendError::EmptyCommand)?;
        if exe == "builtin" && words.clone().next().is_none() {
            return Ok(BackendConfig::builtin());
        }
        let mut args: Vec<String> = words.map(String::from).collect();
        if !args.iter().any(|a| a.contains("{file}")) {
            args.push("{file}".into());
        }
        Ok(BackendConfig::external(exe, args))
    }

    pub fn label(&self) -> String {
        match &self.kind {
            BackendKind::Builtin => "builtin".into(),
            BackendKind::External { executable, .. } => {
                format!("external:{}", executable.display())
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("empty backend command")]
    EmptyCommand,
    #[error("could not start {path}: {source}")]
    Spawn {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("counter timed out after {0:?}")]
    Timeout(Duration),
    #[error("counter exited with {status}: {stderr}")]
    Failed { status: String, stderr: String },
    #[error("no model count in counter output")]
    Unparseable { stdout: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum CountError {
    #[error("surplus {surplus} exceeds overcount {overcount}")]
    Integrity {
        overcount: BigCount,
        surplus: BigCount,
    },
    #[error("hybrid threshold must be at least 1")]
    InvalidThreshold,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CountError {
    pub fn is_timeout(&self) -> bool {
        matches!(self, CountError::Backend(BackendError::Timeout(_)))
    }
}

/// Which path produced a count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "subtractive")]
    Subtractive,
    #[serde(rename = "enumeration")]
    Enumeration,
    #[serde(rename = "hybrid:enumeration")]
    HybridEnumeration,
    #[serde(rename = "hybrid:subtractive")]
    HybridSubtractive,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// `answer_sets = overcount − surplus`. In enumeration, `overcount` is the
/// number of completion models visited and `surplus` the number rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub schema: u32,
    #[serde(with = "decimal")]
    pub answer_sets: BigCount,
    #[serde(with = "decimal")]
    pub overcount: BigCount,
    #[serde(with = "decimal")]
    pub surplus: BigCount,
    pub mode: Mode,
    pub backend: String,
    /// Seconds.
    pub encode_time: f64,
    /// Seconds.
    pub count_time: f64,
    pub loop_atom_count: usize,
    /// Enumeration only: whether every answer set was seen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhausted: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountOptions {
    /// Skip `φ2` when the program is tight (its count is then 0).
    pub tight_shortcut: bool,
    /// Give `φ1` a show line restricted to the atoms when counting externally.
    pub phi1_projected: bool,
    pub execution: Execution,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            tight_shortcut: true,
            phi1_projected: false,
            execution: Execution::default(),
        }
    }
}

pub fn subtractive_count(
    program: &GroundProgram,
    backend: &BackendConfig,
) -> Result<CountReport, CountError> {
    subtractive_count_with(program, backend, &CountOptions::default())
}

pub fn subtractive_count_with(
    program: &GroundProgram,
    backend: &BackendConfig,
    opts: &CountOptions,
) -> Result<CountReport, CountError> {
    let start = Instant::now();
    let loops = loop_atoms(program);
    let phi1 = build_phi1(program);
    let phi2 = (!(opts.tight_shortcut && loops.is_empty()))
        .then(|| build_phi2_with(program, &phi1, &loops));
    let encode_time = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let (overcount, surplus) = match &backend.kind {
        BackendKind::Builtin => par::join(
            opts.execution,
            || Ok(sat::count_models(&phi1.cnf)),
            || {
                Ok(phi2.as_ref().map_or_else(BigCount::zero, |f| {
                    sat::projected_count(&f.cnf, &f.projection_out)
                }))
            },
        ),
        BackendKind::External { .. } => {
            let h1 = phi1_header(program, &phi1, opts.phi1_projected);
            par::join(
                opts.execution,
                || count_externally(&phi1.cnf, &h1, backend),
                || match &phi2 {
                    Some(f) => count_externally(&f.cnf, &phi2_header(program, f), backend),
                    None => Ok(BigCount::zero()),
                },
            )
        }
    };
    let (overcount, surplus): (BigCount, BigCount) = (overcount?, surplus?);
    let count_time = start.elapsed().as_secs_f64();
    if surplus > overcount {
        return Err(CountError::Integrity { overcount, surplus });
    }
    Ok(CountReport {
        schema: 1,
        answer_sets: &overcount - &surplus,
        overcount,
        surplus,
        mode: Mode::Subtractive,
        backend: backend.label(),
        encode_time,
        count_time,
        loop_atom_count: loops.len(),
        exhausted: None,
    })
}

fn count_externally(
    cnf: &CnfFormula,
    header: &DimacsHeader,
    backend: &BackendConfig,
) -> Result<BigCount, BackendError> {
    let mut file = tempfile::Builder::new()
        .prefix("aspsubcount-")
        .suffix(".cnf")
        .tempfile()?;
    cnf.write_dimacs(std::io::BufWriter::new(file.as_file_mut()), header)?;
    external_projected_count(file.path(), backend)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationOutcome {
    pub count: u64,
    /// Completion models visited.
    pub visited: u64,
    /// `true` iff the search ran out of candidates before reaching the limit.
    pub exhausted: bool,
    pub answer_sets: Vec<Interpretation>,
}

/// Lists completion models and keeps those passing the copy check. Stops as
/// soon as `limit` answer sets have been found.
pub fn enumerate_count(
    program: &GroundProgram,
    limit: u64,
) -> Result<EnumerationOutcome, CountError> {
    if limit == 0 {
        return Err(CountError::InvalidThreshold);
    }
    let loops = loop_atoms(program);
    let phi1 = build_phi1(program);
    let n = program.num_atoms();
    let mut solver = Solver::from_formula(&phi1.cnf);
    let mut out = EnumerationOutcome {
        count: 0,
        visited: 0,
        exhausted: false,
        answer_sets: Vec::new(),
    };
    while let Some(model) = solver.next_model() {
        out.visited += 1;
        let m = Interpretation::from_bools(model[..n].to_vec());
        let supported = !m.true_atoms().any(|a| loops.contains(a))
            || copy_check(program, &m, &loops)? == SatResult::Unsat;
        if supported {
            out.count += 1;
            out.answer_sets.push(m);
            if out.count == limit {
                return Ok(out);
            }
        }
    }
    out.exhausted = true;
    Ok(out)
}

fn enumeration_report(
    outcome: &EnumerationOutcome,
    mode: Mode,
    loop_atom_count: usize,
    elapsed: f64,
) -> CountReport {
    CountReport {
        schema: 1,
        answer_sets: outcome.count.into(),
        overcount: outcome.visited.into(),
        surplus: (outcome.visited - outcome.count).into(),
        mode,
        backend: "builtin".into(),
        encode_time: 0.0,
        count_time: elapsed,
        loop_atom_count,
        exhausted: Some(outcome.exhausted),
    }
}

/// Full enumeration as a report.
pub fn enumeration_count(program: &GroundProgram) -> Result<CountReport, CountError> {
    let start = Instant::now();
    let outcome = enumerate_count(program, u64::MAX)?;
    Ok(enumeration_report(
        &outcome,
        Mode::Enumeration,
        loop_atoms(program).len(),
        start.elapsed().as_secs_f64(),
    ))
}

/// Enumerates up to `threshold` answer sets; if the search finishes first its
/// count is returned, otherwise the subtractive count.
pub fn hybrid_count(
    program: &GroundProgram,
    threshold: u64,
    backend: &BackendConfig,
) -> Result<CountReport, CountError> {
    hybrid_count_with(program, threshold, backend, &CountOptions::default())
}

pub fn hybrid_count_with(
    program: &GroundProgram,
    threshold: u64,
    backend: &BackendConfig,
    opts: &CountOptions,
) -> Result<CountReport, CountError> {
    if threshold == 0 {
        return Err(CountError::InvalidThreshold);
    }
    let start = Instant::now();
    let outcome = enumerate_count(program, threshold)?;
    if outcome.exhausted {
        return Ok(enumeration_report(
            &outcome,
            Mode::HybridEnumeration,
            loop_atoms(program).len(),
            start.elapsed().as_secs_f64(),
        ));
    }
    let mut report = subtractive_count_with(program, backend, opts)?;
    report.mode = Mode::HybridSubtractive;
    Ok(report)
}

/// Runs an external counter on a DIMACS file and reads the count from its
/// output: `s mc N`, `c s exact arb int N`, or a final line holding only `N`.
pub fn external_projected_count(
    dimacs: &Path,
    backend: &BackendConfig,
) -> Result<BigCount, BackendError> {
    let BackendKind::External { executable, args } = &backend.kind else {
        let text = std::fs::read_to_string(dimacs)?;
        let parsed = crate::cnf::parse_dimacs(&text)
            .map_err(|e| BackendError::Io(std::io::Error::other(e.to_string())))?;
        let out: Vec<Var> = match parsed.show {
            Some(show) => (1..=parsed.formula.num_vars())
                .map(Var)
                .filter(|v| !show.contains(v))
                .collect(),
            None => Vec::new(),
        };
        return Ok(sat::projected_count(&parsed.formula, &out));
    };
    let file = dimacs.to_string_lossy();
    let mut child = Command::new(executable)
        .args(args.iter().map(|a| a.replace("{file}", &file)))
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| BackendError::Spawn {
            path: executable.clone(),
            source,
        })?;
    let drain = |mut r: Box<dyn Read + Send>| {
        std::thread::spawn(move || {
            let mut s = String::new();
            let _ = r.read_to_string(&mut s);
            s
        })
    };
    let stdout = drain(Box::new(child.stdout.take().expect("piped stdout")));
    let stderr = drain(Box::new(child.stderr.take().expect("piped stderr")));
    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if let Some(limit) = backend.timeout {
            if start.elapsed() >= limit {
                let _ = child.kill();
                let _ = child.wait();
                return Err(BackendError::Timeout(limit));
            }
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let stdout = stdout.join().unwrap_or_default();
    let stderr = stderr.join().unwrap_or_default();
    // 10 and 20 are the usual SAT/UNSAT exit codes of competition solvers
    if !matches!(status.code(), Some(0 | 10 | 20)) {
        return Err(BackendError::Failed {
            status: status.to_string(),
            stderr: stderr.trim().to_string(),
        });
    }
    parse_counter_output(&stdout).ok_or(BackendError::Unparseable { stdout })
}

pub fn parse_counter_output(stdout: &str) -> Option<BigUint> {
    let lines: Vec<&str> = stdout.lines().map(str::trim).collect();
    let after = |prefix: &str| {
        lines
            .iter()
            .filter_map(|l| l.strip_prefix(prefix))
            .find_map(|rest| rest.trim().parse::<BigUint>().ok())
    };
    after("s mc ")
        .or_else(|| after("c s exact arb int "))
        .or_else(|| {
            lines
                .iter()
                .rev()
                .find(|l| !l.is_empty())
                .and_then(|l| l.parse().ok())
        })
        .or_else(|| lines.contains(&"s UNSATISFIABLE").then(BigUint::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::count_answer_sets_bruteforce;
    use crate::program::parse_program;

    const GUARDED_CYCLE: &str = "p0 | p1. q0 | q1. q0 :- w. q1 :- w. w :- p0. w :- p1, q1. :- not w.";

    #[test]
    fn guarded_cycle_subtractive() {
        let p = parse_program(GUARDED_CYCLE).unwrap();
        let r = subtractive_count(&p, &BackendConfig::builtin()).unwrap();
        assert_eq!(r.answer_sets, 1u32.into());
        assert_eq!(r.overcount, 2u32.into());
        assert_eq!(r.surplus, 1u32.into());
        assert_eq!(r.loop_atom_count, 2);
        assert_eq!(r.mode, Mode::Subtractive);
    }

    #[test]
    fn tight_shortcut_matches_full_encoding() {
        let p = parse_program("a | b. c :- a. d :- not c.").unwrap();
        for tight_shortcut in [true, false] {
            for execution in [Execution::Sequential, Execution::Parallel] {
                let opts = CountOptions {
                    tight_shortcut,
                    execution,
                    ..CountOptions::default()
                };
                let r = subtractive_count_with(&p, &BackendConfig::builtin(), &opts).unwrap();
                assert_eq!(r.answer_sets, 2u32.into());
                assert!(r.surplus.is_zero());
            }
        }
    }

    #[test]
    fn enumeration_limits() {
        let p = parse_program("a1 | b1. a2 | b2.").unwrap();
        let e = enumerate_count(&p, 3).unwrap();
        assert_eq!((e.count, e.exhausted), (3, false));
        let e = enumerate_count(&p, 4).unwrap();
        assert_eq!((e.count, e.exhausted), (4, false));
        let e = enumerate_count(&p, 5).unwrap();
        assert_eq!((e.count, e.exhausted), (4, true));
        let p = parse_program(GUARDED_CYCLE).unwrap();
        let e = enumerate_count(&p, 10).unwrap();
        assert_eq!((e.count, e.exhausted, e.visited), (1, true, 2));
        assert!(matches!(
            enumerate_count(&p, 0),
            Err(CountError::InvalidThreshold)
        ));
    }

    #[test]
    fn hybrid_paths() {
        let p = parse_program("a1 | b1. a2 | b2. a3 | b3.").unwrap();
        let b = BackendConfig::builtin();
        let low = hybrid_count(&p, 1, &b).unwrap();
        assert_eq!(low.mode, Mode::HybridSubtractive);
        let high = hybrid_count(&p, 100, &b).unwrap();
        assert_eq!(high.mode, Mode::HybridEnumeration);
        assert_eq!(low.answer_sets, high.answer_sets);
        assert_eq!(high.answer_sets, 8u32.into());
        assert!(matches!(
            hybrid_count(&p, 0, &b),
            Err(CountError::InvalidThreshold)
        ));
    }

    #[test]
    fn enumeration_agrees_with_bruteforce_on_loops() {
        let p = parse_program("a :- b. b :- a. a :- not c. c :- not a. d | e :- a.").unwrap();
        let want = count_answer_sets_bruteforce(&p, Execution::Sequential).unwrap();
        assert_eq!(
            BigCount::from(enumeration_count(&p).unwrap().answer_sets),
            want
        );
        assert_eq!(
            subtractive_count(&p, &BackendConfig::builtin())
                .unwrap()
                .answer_sets,
            want
        );
    }

    #[test]
    fn report_json_shape() {
        let p = parse_program(GUARDED_CYCLE).unwrap();
        let r = subtractive_count(&p, &BackendConfig::builtin()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["answer_sets"], "1");
        assert_eq!(v["mode"], "subtractive");
        assert!(v.get("exhausted").is_none());
        let back: CountReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn counter_output_formats() {
        assert_eq!(parse_counter_output("c hi\ns mc 42\n"), Some(42u32.into()));
        assert_eq!(
            parse_counter_output(
                "s SATISFIABLE\nc s exact arb int 170141183460469231731687303715884105728\n"
            ),
            Some(BigUint::from(1u8) << 127)
        );
        assert_eq!(parse_counter_output("c log\n7\n"), Some(7u32.into()));
        assert_eq!(parse_counter_output("s UNSATISFIABLE\n"), Some(0u32.into()));
        assert_eq!(parse_counter_output("nothing here\n"), None);
    }

    #[test]
    fn backend_spec_parsing() {
        assert_eq!(
            BackendConfig::parse("builtin").unwrap(),
            BackendConfig::builtin()
        );
        let b = BackendConfig::parse("ganak --mode 0").unwrap();
        assert_eq!(
            b.kind,
            BackendKind::External {
                executable: "ganak".into(),
                args: vec!["--mode".into(), "0".into(), "{file}".into()]
            }
        );
        assert_eq!(
            BackendConfig::parse("exec:/opt/gpmc").unwrap(),
            BackendConfig::external("/opt/gpmc", vec!["{file}".into()])
        );
        let b = BackendConfig::parse("d4 -i {file} -m counting").unwrap();
        assert!(matches!(b.kind, BackendKind::External { ref args, .. } if args[1] == "{file}"));
        assert!(BackendConfig::parse("  ").is_err());
    }

    #[test]
    fn builtin_backend_reads_show_line() {
        let p = parse_program(GUARDED_CYCLE).unwrap();
        let loops = loop_atoms(&p);
        let phi1 = build_phi1(&p);
        let phi2 = build_phi2_with(&p, &phi1, &loops);
        let mut file = tempfile::NamedTempFile::new().unwrap();
        phi2.cnf
            .write_dimacs(file.as_file_mut(), &phi2_header(&p, &phi2))
            .unwrap();
        let n = external_projected_count(file.path(), &BackendConfig::builtin()).unwrap();
        assert_eq!(n, 1u32.into());
    }
}
