use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use aspsubcount::completion::{completion_holds, completion_model_check};
use aspsubcount::copy::{build_phi1, build_phi2_with, phi1_header, phi2_header};
use aspsubcount::counter::{
    self, external_projected_count, BackendConfig, CountError, CountOptions, CountReport,
    BACKEND_ENV, DEFAULT_HYBRID_THRESHOLD,
};
use aspsubcount::depgraph::{build_dependency_graph, loop_atoms};
use aspsubcount::oracle::{self, SubsetVerdict};
use aspsubcount::program::{parse_program, GroundProgram, Interpretation};
use aspsubcount::sat::SatResult;
use aspsubcount::Execution;

#[derive(Parser)]
#[command(
    name = "aspsubcount",
    version,
    about = "Count answer sets of ground disjunctive programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Program statistics and loop atoms.
    Analyze {
        /// Program file, or `-` for stdin.
        input: String,
        #[arg(long)]
        json: bool,
    },
    /// Write the counting formulas as DIMACS.
    Encode {
        input: String,
        /// Directory receiving phi1.cnf, phi2.cnf and phi2.json.
        #[arg(long, value_name = "DIR")]
        emit_cnf: PathBuf,
        /// Also give phi1.cnf a show line over the atoms.
        #[arg(long)]
        phi1_projected: bool,
    },
    /// Count answer sets.
    Count {
        input: String,
        #[arg(long, value_enum, default_value_t = CountMode::Subtractive)]
        mode: CountMode,
        /// Enumeration limit for hybrid mode.
        #[arg(long, default_value_t = DEFAULT_HYBRID_THRESHOLD)]
        threshold: u64,
        /// `builtin` or `exec:PATH [ARGS]`; `{file}` in ARGS is the instance.
        #[arg(long)]
        backend: Option<String>,
        /// Seconds allowed per external counter call.
        #[arg(long)]
        timeout: Option<f64>,
        /// Also write the formulas to this directory.
        #[arg(long, value_name = "DIR")]
        emit_cnf: Option<PathBuf>,
        /// Build and count phi2 even for tight programs.
        #[arg(long)]
        no_tight_shortcut: bool,
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        json: bool,
    },
    /// Brute-force answer sets (small programs only).
    Oracle {
        input: String,
        #[arg(long)]
        json: bool,
    },
    /// Run every answer-set check on one interpretation.
    Check {
        input: String,
        /// Comma-separated true atoms.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        model: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Projected model count of a DIMACS file with the built-in counter.
    #[command(hide = true)]
    Mc { dimacs: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMode {
    Subtractive,
    Enumerate,
    Hybrid,
}

enum Failure {
    Usage(String),
    Timeout(String),
    Integrity(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Usage(m) => (1, m),
            Failure::Timeout(m) => (2, m),
            Failure::Integrity(m) => (3, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

impl From<CountError> for Failure {
    fn from(e: CountError) -> Self {
        if e.is_timeout() {
            Failure::Timeout(e.to_string())
        } else if matches!(e, CountError::Integrity { .. }) {
            Failure::Integrity(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_input(input: &str) -> Result<String, Failure> {
    if input == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(usage)?;
        Ok(s)
    } else {
        fs::read_to_string(input).map_err(|e| Failure::Usage(format!("{input}: {e}")))
    }
}

fn load(input: &str) -> Result<GroundProgram, Failure> {
    let text = read_input(input)?;
    let program = parse_program(&text).map_err(|e| Failure::Usage(format!("{input}: {e}")))?;
    for lint in program.lint() {
        eprintln!("warning: {lint}");
    }
    Ok(program)
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(usage)?;
    println!("{s}");
    Ok(())
}

fn analyze(input: &str, as_json: bool) -> Result<(), Failure> {
    let p = load(input)?;
    let graph = build_dependency_graph(&p);
    let loops = graph.loop_atoms();
    let names = loops.names(&p);
    if as_json {
        return print_json(&json!({
            "schema": 1,
            "atoms": p.num_atoms(),
            "rules": p.rules().len(),
            "size": p.size(),
            "disjunctive": p.is_disjunctive(),
            "dependency_edges": graph.num_edges(),
            "loop_atoms": names,
            "tight": loops.is_empty(),
        }));
    }
    println!("atoms: {}", p.num_atoms());
    println!("rules: {}", p.rules().len());
    println!("size: {}", p.size());
    println!(
        "disjunctive: {}",
        if p.is_disjunctive() { "yes" } else { "no" }
    );
    println!("dependency edges: {}", graph.num_edges());
    if names.is_empty() {
        println!("loop atoms: 0");
    } else {
        println!("loop atoms: {} ({})", names.len(), names.join(", "));
    }
    println!(
        "{}",
        if loops.is_empty() {
            "tight"
        } else {
            "non-tight"
        }
    );
    Ok(())
}

fn emit(p: &GroundProgram, dir: &Path, phi1_projected: bool) -> Result<(), Failure> {
    let io_err = |e: io::Error| Failure::Usage(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io_err)?;
    let loops = loop_atoms(p);
    let phi1 = build_phi1(p);
    let phi2 = build_phi2_with(p, &phi1, &loops);
    let write = |name: &str, body: String| fs::write(dir.join(name), body).map_err(io_err);
    write(
        "phi1.cnf",
        phi1.cnf
            .to_dimacs_string(&phi1_header(p, &phi1, phi1_projected)),
    )?;
    write(
        "phi2.cnf",
        phi2.cnf.to_dimacs_string(&phi2_header(p, &phi2)),
    )?;
    let sidecar = serde_json::to_string_pretty(&phi2.sidecar(p)).map_err(usage)?;
    write("phi2.json", sidecar + "\n")
}

fn backend_from(flag: Option<String>, timeout: Option<f64>) -> Result<BackendConfig, Failure> {
    let command = flag.or_else(|| {
        std::env::var(BACKEND_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
    });
    let cfg = match command {
        Some(s) => BackendConfig::parse(&s).map_err(usage)?,
        None => BackendConfig::builtin(),
    };
    let timeout = match timeout {
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            return Err(Failure::Usage(format!("invalid timeout {t}")))
        }
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    Ok(cfg.with_timeout(timeout))
}

fn print_report(r: &CountReport, as_json: bool) -> Result<(), Failure> {
    if as_json {
        return print_json(r);
    }
    println!("answer sets: {}", r.answer_sets);
    println!("overcount: {}", r.overcount);
    println!("surplus: {}", r.surplus);
    println!("loop atoms: {}", r.loop_atom_count);
    println!(
        "mode: {}",
        serde_json::to_value(r.mode)
            .map_err(usage)?
            .as_str()
            .unwrap_or("?")
    );
    println!("backend: {}", r.backend);
    if let Some(ex) = r.exhausted {
        println!("exhausted: {}", if ex { "yes" } else { "no" });
    }
    println!(
        "time: encode {:.3}s, count {:.3}s",
        r.encode_time, r.count_time
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn count(
    input: &str,
    mode: CountMode,
    threshold: u64,
    backend: Option<String>,
    timeout: Option<f64>,
    emit_cnf: Option<PathBuf>,
    no_tight_shortcut: bool,
    sequential: bool,
    as_json: bool,
) -> Result<(), Failure> {
    let p = load(input)?;
    let cfg = backend_from(backend, timeout)?;
    if let Some(dir) = emit_cnf {
        emit(&p, &dir, false)?;
    }
    let opts = CountOptions {
        tight_shortcut: !no_tight_shortcut,
        execution: if sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        ..CountOptions::default()
    };
    let report = match mode {
        CountMode::Subtractive => counter::subtractive_count_with(&p, &cfg, &opts)?,
        CountMode::Enumerate => counter::enumeration_count(&p)?,
        CountMode::Hybrid => counter::hybrid_count_with(&p, threshold, &cfg, &opts)?,
    };
    print_report(&report, as_json)
}

fn run_oracle(input: &str, as_json: bool) -> Result<(), Failure> {
    let p = load(input)?;
    let sets = oracle::answer_sets_bruteforce(&p, Execution::Parallel).map_err(usage)?;
    let shown: Vec<String> = sets.iter().map(|m| m.display(&p).to_string()).collect();
    if as_json {
        return print_json(&json!({
            "schema": 1,
            "answer_sets": sets.len().to_string(),
            "models": sets
                .iter()
                .map(|m| m.true_atoms().map(|a| p.atom_name(a)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }));
    }
    for s in &shown {
        println!("{s}");
    }
    println!("answer sets: {}", sets.len());
    Ok(())
}

fn atoms_of(p: &GroundProgram, model: &[bool]) -> Interpretation {
    Interpretation::from_bools(model[..p.num_atoms()].to_vec())
}

fn check(input: &str, model: &[String], as_json: bool) -> Result<(), Failure> {
    let p = load(input)?;
    let m = p
        .interpretation(model.iter().map(|s| s.trim()).filter(|s| !s.is_empty()))
        .map_err(usage)?;
    let loops = loop_atoms(&p);
    let is_model = p.satisfied_by(&m);
    let comp = completion_model_check(&build_phi1(&p), &m);
    debug_assert_eq!(comp, completion_holds(&p, &m));

    // SAT means a proper subset of M satisfies the reduct
    let verdict = |r: Result<SatResult, oracle::OracleError>| match r {
        Ok(SatResult::Unsat) => ("unsat", None),
        Ok(SatResult::Sat(model)) => ("sat", Some(atoms_of(&p, &model))),
        Err(_) => ("n/a", None),
    };
    let (all, witness) = verdict(oracle::justification_check_all(&p, &m));
    let (looped, _) = verdict(oracle::justification_check_loops(&p, &m, &loops));
    let (copied, _) = verdict(oracle::copy_check(&p, &m, &loops));
    let subsets = match oracle::is_answer_set_by_subsets(&p, &m) {
        Ok(SubsetVerdict::AnswerSet) => "answer set".to_string(),
        Ok(SubsetVerdict::NotAModel) => "not a model".to_string(),
        Ok(SubsetVerdict::Witness(w)) => format!("witness {}", w.display(&p)),
        Err(e) => e.to_string(),
    };
    let answer_set = is_model && all == "unsat";
    if as_json {
        return print_json(&json!({
            "schema": 1,
            "model": is_model,
            "completion_model": comp,
            "answer_set": answer_set,
            "justification_all": all,
            "justification_loops": looped,
            "copy_check": copied,
            "subset_search": subsets,
            "witness": witness.map(|w| w.true_atoms().map(|a| p.atom_name(a).to_string()).collect::<Vec<_>>()),
        }));
    }
    let yn = |b: bool| if b { "yes" } else { "no" };
    println!("interpretation: {}", m.display(&p));
    println!("model: {}", yn(is_model));
    println!("completion model: {}", yn(comp));
    println!("reduct minimality: {all}");
    println!("loop justification: {looped}");
    println!("copy check: {copied}");
    println!("subset search: {subsets}");
    if let Some(w) = witness {
        println!("witness: {}", w.display(&p));
    }
    println!("answer set: {}", yn(answer_set));
    Ok(())
}

fn mc(path: &Path) -> Result<(), Failure> {
    let n = external_projected_count(path, &BackendConfig::builtin())
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    println!("s mc {n}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { input, json } => analyze(&input, json),
        Command::Encode {
            input,
            emit_cnf,
            phi1_projected,
        } => emit(&load(&input)?, &emit_cnf, phi1_projected),
        Command::Count {
            input,
            mode,
            threshold,
            backend,
            timeout,
            emit_cnf,
            no_tight_shortcut,
            sequential,
            json,
        } => count(
            &input,
            mode,
            threshold,
            backend,
            timeout,
            emit_cnf,
            no_tight_shortcut,
            sequential,
            json,
        ),
        Command::Oracle { input, json } => run_oracle(&input, json),
        Command::Check { input, model, json } => check(&input, &model, json),
        Command::Mc { dimacs } => mc(&dimacs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(cli);
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
