use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use pilot::choreography::{chor_steps, epp, Choreography, EppError, Network};
use pilot::chorl::{expand_to_pil, extract, ChorlError};
use pilot::formula::encode;
use pilot::process::{is_unambiguous, make_unambiguous, NameSupply, Process, RaceWitness};
use pilot::prover::{
    prove_bounded, prove_encoding, prove_progress, Derivation, EncodingVerdict, Judgement, Limits, ProverError,
    SearchOutcome,
};
use pilot::semantics::{execution_tree, oracle_deadlock_free, oracle_progress, oracle_race_free, ExecutionTree, Status};
use pilot::syntax::{
    parse_choreography, parse_formula, parse_process_or_network, print_choreography, print_formula, print_network,
    print_process, ProcessInput,
};

const OK: u8 = 0;
const USAGE: u8 = 1;
const NEGATIVE: u8 = 2;
const RACE: u8 = 3;
const PRIVATE_MOBILITY: u8 = 4;
const UNPROJECTABLE: u8 = 5;

const RUN_NODE_CAP: usize = 20_000;

#[derive(Parser)]
#[command(name = "pilot")]
#[command(about = "Deadlock-freedom, progress and race analysis for pi-calculus processes by proof search")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Write the derivation (JSON) to this path when one is produced
    #[arg(long, global = true)]
    emit_derivation: Option<PathBuf>,

    /// Also run the semantic oracle and fail on disagreement
    #[arg(long, global = true)]
    oracle: bool,

    /// Print reduction or search traces
    #[arg(long, global = true)]
    trace: bool,

    /// Proof search depth bound
    #[arg(long, global = true, default_value_t = 64)]
    depth: usize,

    /// Proof search node budget
    #[arg(long, global = true, default_value_t = 1_000_000)]
    nodes: usize,

    /// Worker threads when several files are given
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Decide deadlock-freedom of a race-free process or network
    Check(Input),
    /// Decide progress of a race-free process without private mobility
    Progress(Input),
    /// Look for a reachable race condition
    Races(Input),
    /// Extract a choreography from a network
    Extract(Input),
    /// Endpoint projection of a choreography
    Project(Input),
    /// Dump the labelled execution tree of a process, network or choreography
    Run(Input),
    /// Print the formula encoding a process
    Encode(Input),
    /// Search for a derivation of a sequent, one formula per line
    Prove(Input),
}

impl Command {
    fn input(&self) -> &Input {
        match self {
            Command::Check(i)
            | Command::Progress(i)
            | Command::Races(i)
            | Command::Extract(i)
            | Command::Project(i)
            | Command::Run(i)
            | Command::Encode(i)
            | Command::Prove(i) => i,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct Input {
    /// Input files; `-` reads standard input
    #[arg(required = true, value_name = "FILE")]
    files: Vec<PathBuf>,
}

struct Config {
    format: Format,
    emit_derivation: Option<PathBuf>,
    oracle: bool,
    trace: bool,
    limits: Limits,
}

struct Report {
    file: String,
    exit: u8,
    verdict: String,
    lines: Vec<String>,
    data: Value,
    derivation: Option<Value>,
}

impl Report {
    fn new(file: &str, exit: u8, verdict: impl Into<String>) -> Self {
        Report {
            file: file.to_string(),
            exit,
            verdict: verdict.into(),
            lines: Vec::new(),
            data: json!({}),
            derivation: None,
        }
    }

    fn line(mut self, s: impl Into<String>) -> Self {
        self.lines.push(s.into());
        self
    }

    fn data(mut self, v: Value) -> Self {
        self.data = v;
        self
    }

    fn to_json(&self) -> Value {
        json!({
            "file": self.file,
            "exit": self.exit,
            "verdict": self.verdict,
            "details": self.data,
            "lines": self.lines,
        })
    }
}

fn usage(file: &str, msg: impl Into<String>) -> Report {
    let msg = msg.into();
    Report::new(file, USAGE, "error").line(format!("error: {msg}")).data(json!({ "error": msg }))
}

fn read_input(path: &Path) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let files = cli.command.input().files.clone();
    if cli.depth == 0 || cli.nodes == 0 || cli.jobs == 0 {
        eprintln!("error: --depth, --nodes and --jobs must be positive");
        return ExitCode::from(USAGE);
    }
    let config = Config {
        format: cli.format,
        emit_derivation: cli.emit_derivation.clone(),
        oracle: cli.oracle,
        trace: cli.trace,
        limits: Limits {
            depth: cli.depth,
            nodes: cli.nodes,
        },
    };
    let run = |path: &PathBuf| {
        let name = path.display().to_string();
        match read_input(path) {
            Ok(text) => dispatch(&cli.command, &name, &text, &config),
            Err(e) => usage(&name, format!("cannot read {name}: {e}")),
        }
    };
    let reports: Vec<Report> = if files.len() > 1 && cli.jobs > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
            Ok(pool) => pool.install(|| files.par_iter().map(run).collect()),
            Err(e) => vec![usage("<pool>", e.to_string())],
        }
    } else {
        files.iter().map(run).collect()
    };

    if let Some(path) = &config.emit_derivation {
        let derivations: Vec<&Value> = reports.iter().filter_map(|r| r.derivation.as_ref()).collect();
        let doc = match derivations.as_slice() {
            [] => None,
            [one] => Some((*one).clone()),
            many => Some(Value::Array(many.iter().map(|v| (*v).clone()).collect())),
        };
        if let Some(doc) = doc {
            let text = serde_json::to_string_pretty(&doc).unwrap_or_default();
            if let Err(e) = fs::write(path, text + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(USAGE);
            }
        }
    }

    match config.format {
        Format::Text => {
            for r in &reports {
                if reports.len() > 1 {
                    println!("== {}", r.file);
                }
                println!("{}", r.verdict);
                for l in &r.lines {
                    println!("{l}");
                }
            }
        }
        Format::Json => {
            let doc = if reports.len() == 1 {
                reports[0].to_json()
            } else {
                Value::Array(reports.iter().map(Report::to_json).collect())
            };
            println!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
        }
    }
    ExitCode::from(reports.iter().map(|r| r.exit).max().unwrap_or(OK))
}

fn dispatch(cmd: &Command, file: &str, text: &str, config: &Config) -> Report {
    match cmd {
        Command::Check(_) => with_process(file, text, |p| cmd_check(file, p, config)),
        Command::Progress(_) => with_process(file, text, |p| cmd_progress(file, p, config)),
        Command::Races(_) => with_process(file, text, |p| cmd_races(file, p)),
        Command::Extract(_) => cmd_extract(file, text, config),
        Command::Project(_) => cmd_project(file, text),
        Command::Run(_) => cmd_run(file, text),
        Command::Encode(_) => with_process(file, text, |p| cmd_encode(file, p)),
        Command::Prove(_) => cmd_prove(file, text, config),
    }
}

fn with_process(file: &str, text: &str, f: impl FnOnce(&Process) -> Report) -> Report {
    match parse_process_or_network(text) {
        Ok(ProcessInput::Process(p)) => f(&p),
        Ok(ProcessInput::Network(n)) => f(&n.to_process()),
        Err(e) => usage(file, e.with_file(file).to_string()),
    }
}

fn race_report(file: &str, w: &RaceWitness) -> Report {
    Report::new(file, RACE, "race")
        .line(format!(
            "race on {} between {} and {}",
            w.subject,
            print_process(&w.first),
            print_process(&w.second)
        ))
        .data(json!({ "race": w }))
}

fn cmd_check(file: &str, p: &Process, config: &Config) -> Report {
    let verdict = match prove_encoding(p) {
        Ok(v) => v,
        Err(ProverError::Race(w)) => return race_report(file, &w),
        Err(e) => return usage(file, e.to_string()),
    };
    let mut report = match &verdict {
        EncodingVerdict::DeadlockFree(d) => {
            let mut r = Report::new(file, OK, "deadlock-free").data(json!({
                "deadlock_free": true,
                "derivation_size": d.size(),
            }));
            r.derivation = Some(d.to_json());
            r
        }
        EncodingVerdict::Stuck { witness, trace } => {
            let mut r = Report::new(file, NEGATIVE, "deadlock")
                .line(format!("stuck: {}", print_process(witness)))
                .data(json!({
                    "deadlock_free": false,
                    "witness": print_process(witness),
                    "trace": trace,
                }));
            if config.trace {
                for t in trace {
                    r = r.line(format!("block {t}"));
                }
            }
            r
        }
    };
    if config.oracle {
        let o = oracle_deadlock_free(p);
        if config.trace {
            if let Status::Deadlocked { trace, .. } = &o.status {
                for step in trace {
                    report = report.line(step.trace_line());
                }
            }
        }
        if o.is_deadlock_free() != verdict.is_deadlock_free() {
            return usage(file, "oracle disagrees with proof search");
        }
        report = report.line("oracle: agrees");
    }
    report
}

fn cmd_progress(file: &str, p: &Process, config: &Config) -> Report {
    let verdict = match prove_progress(p, config.limits) {
        Ok(v) => v,
        Err(ProverError::Race(w)) => return race_report(file, &w),
        Err(ProverError::PrivateMobility) => {
            return Report::new(file, PRIVATE_MOBILITY, "refused")
                .line("refused: a restricted name is sent, so progress is not characterised by provability")
                .data(json!({ "refused": "private-mobility" }))
        }
        Err(e) => return usage(file, e.to_string()),
    };
    let mut report = if verdict.progress {
        Report::new(file, OK, "progress").data(json!({ "progress": true }))
    } else {
        Report::new(file, NEGATIVE, "no progress").data(json!({ "progress": false }))
    };
    if let SearchOutcome::Proved(d) = &verdict.outcome {
        report.derivation = Some(d.to_json());
    }
    if config.oracle {
        if oracle_progress(p) != verdict.progress {
            return usage(file, "oracle disagrees with proof search");
        }
        report = report.line("oracle: agrees");
    }
    report
}

fn cmd_races(file: &str, p: &Process) -> Report {
    let p = unambiguous(p);
    match oracle_race_free(&p) {
        None => Report::new(file, OK, "race-free").data(json!({ "race_free": true })),
        Some(r) => {
            let mut report = race_report(file, &r.witness);
            for step in &r.trace {
                report = report.line(step.trace_line());
            }
            report
        }
    }
}

fn unambiguous(p: &Process) -> Process {
    if is_unambiguous(p) {
        p.clone()
    } else {
        make_unambiguous(p, &mut NameSupply::from_env())
    }
}

fn parse_network_input(file: &str, text: &str) -> Result<Network, Box<Report>> {
    match parse_process_or_network(text) {
        Ok(ProcessInput::Network(n)) => Ok(n),
        Ok(ProcessInput::Process(p)) => {
            Network::from_flat(&unambiguous(&p)).map_err(|e| Box::new(usage(file, e.to_string())))
        }
        Err(e) => Err(Box::new(usage(file, e.with_file(file).to_string()))),
    }
}

fn cmd_extract(file: &str, text: &str, config: &Config) -> Report {
    let n = match parse_network_input(file, text) {
        Ok(n) => n,
        Err(r) => return *r,
    };
    match extract(&n) {
        Ok((d, c)) => {
            let mut r = Report::new(file, OK, print_choreography(&c)).data(json!({
                "choreography": print_choreography(&c),
                "rules": d.shape(),
            }));
            if config.trace {
                r = r.line(format!("rules: {}", d.shape().join(" ")));
            }
            if config.emit_derivation.is_some() {
                match expand_to_pil(&d) {
                    Ok(pil) => r.derivation = Some(json!({ "chorl": d, "pil": pil.to_json() })),
                    Err(e) => return usage(file, e.to_string()),
                }
            }
            r
        }
        Err(ChorlError::Race(w)) => race_report(file, &w),
        Err(ChorlError::Stuck { residual, trace }) => {
            let mut r = Report::new(file, NEGATIVE, "deadlock")
                .line(format!("stuck: {}", print_network(&residual)))
                .data(json!({ "residual": print_network(&residual), "trace": trace }));
            if config.trace {
                for t in &trace {
                    r = r.line(t.clone());
                }
            }
            r
        }
        Err(e) => usage(file, e.to_string()),
    }
}

fn cmd_project(file: &str, text: &str) -> Report {
    let c = match parse_choreography(text) {
        Ok(c) => c,
        Err(e) => return usage(file, e.with_file(file).to_string()),
    };
    match epp(&c) {
        Ok(n) => Report::new(file, OK, print_network(&n)).data(json!({ "network": print_network(&n) })),
        Err(e @ EppError::MergeUndefined { .. }) => Report::new(file, UNPROJECTABLE, "unprojectable")
            .line(e.to_string())
            .data(json!({ "error": e.to_string() })),
        Err(e) => Report::new(file, UNPROJECTABLE, "unprojectable")
            .line(e.to_string())
            .data(json!({ "error": e.to_string() })),
    }
}

fn dump_tree(t: &ExecutionTree, depth: usize, out: &mut Vec<String>) {
    for (step, child) in &t.children {
        out.push(format!(
            "{}{} -> {}",
            "  ".repeat(depth),
            step.trace_line(),
            print_process(&child.root)
        ));
        dump_tree(child, depth + 1, out);
    }
}

fn dump_choreography(c: &Choreography, depth: usize, budget: &mut usize, out: &mut Vec<String>) -> bool {
    for (mu, next) in chor_steps(c) {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        out.push(format!("{}μ={} -> {}", "  ".repeat(depth), mu, print_choreography(&next)));
        if !dump_choreography(&next, depth + 1, budget, out) {
            return false;
        }
    }
    true
}

fn cmd_run(file: &str, text: &str) -> Report {
    if let Ok(input) = parse_process_or_network(text) {
        let p = match input {
            ProcessInput::Process(p) => p,
            ProcessInput::Network(n) => n.to_process(),
        };
        let p = unambiguous(&p);
        let Some(tree) = execution_tree(&p) else {
            return usage(file, format!("execution tree exceeds {RUN_NODE_CAP} nodes"));
        };
        let mut lines = Vec::new();
        dump_tree(&tree, 0, &mut lines);
        let leaves: Vec<String> = tree.leaves().into_iter().map(print_process).collect();
        let mut r = Report::new(file, OK, print_process(&p)).data(json!({
            "nodes": tree.size(),
            "leaves": leaves,
        }));
        r.lines = lines;
        return r;
    }
    match parse_choreography(text) {
        Ok(c) => {
            let mut lines = Vec::new();
            let mut budget = RUN_NODE_CAP;
            if !dump_choreography(&c, 0, &mut budget, &mut lines) {
                return usage(file, format!("execution tree exceeds {RUN_NODE_CAP} nodes"));
            }
            let mut r = Report::new(file, OK, print_choreography(&c)).data(json!({ "steps": lines.len() }));
            r.lines = lines;
            r
        }
        Err(e) => usage(file, e.with_file(file).to_string()),
    }
}

fn cmd_encode(file: &str, p: &Process) -> Report {
    match encode(&unambiguous(p)) {
        Ok(f) => Report::new(file, OK, print_formula(&f)).data(json!({ "formula": print_formula(&f) })),
        Err(e) => usage(file, e.to_string()),
    }
}

fn cmd_prove(file: &str, text: &str, config: &Config) -> Report {
    let mut sequent = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_formula(line) {
            Ok(f) => sequent.push(f),
            Err(e) => return usage(file, format!("line {}: {}", i + 1, e.with_file(file))),
        }
    }
    if sequent.is_empty() {
        return usage(file, "empty sequent");
    }
    let judgement = Judgement::new(sequent);
    let shown = judgement.to_string();
    match prove_bounded(&judgement, config.limits) {
        SearchOutcome::Proved(d) => proved(file, &shown, d),
        SearchOutcome::Unprovable => Report::new(file, NEGATIVE, "unprovable")
            .line(shown.clone())
            .data(json!({ "sequent": shown, "proved": false, "exhausted": true })),
        SearchOutcome::BudgetExhausted => Report::new(file, NEGATIVE, "unknown")
            .line(format!("search budget exhausted ({} nodes)", config.limits.nodes))
            .data(json!({ "sequent": shown, "proved": false, "exhausted": false })),
    }
}

fn proved(file: &str, shown: &str, d: Derivation) -> Report {
    let mut r = Report::new(file, OK, "proved")
        .line(shown.to_string())
        .data(json!({ "sequent": shown, "proved": true, "derivation_size": d.size() }));
    r.derivation = Some(d.to_json());
    r
}
