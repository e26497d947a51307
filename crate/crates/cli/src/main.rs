//! `orfoil`: learn, check, compare, refine and query over hybrid knowledge bases.
//!
//! The program uses no randomness, so output is the same for the same inputs
//! (apart from timing fields in JSON reports).

mod report;

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use orfoil::datalog::SolverOptions;
use orfoil::hybrid::{HybridError, Reasoner, ReasonerConfig};
use orfoil::learner::{LearnError, Learner, LearnerParams};
use orfoil::model::{validate_safeness, Atom, HybridKb, Rule};
use orfoil::parser::{parse_atom, parse_bias, parse_examples, parse_kb, parse_rule, ParseError};
use orfoil::refine::HypothesisSpace;

use report::{RunReport, Timing};

#[derive(Parser, Debug)]
#[command(name = "orfoil", version, about = "Rule learning over DL+log knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn a rule set for the target of an example file.
    Learn(LearnArgs),
    /// Print whether a rule covers an example.
    Check {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        example: String,
    },
    /// Compare two rules by generality.
    Compare {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        rule1: String,
        #[arg(long)]
        rule2: String,
    },
    /// List the refinements of a rule.
    Refine {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        bias: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Print whether a ground atom is entailed.
    Query {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        atom: String,
    },
}

#[derive(Args, Debug)]
struct KbArgs {
    #[arg(long)]
    kb: PathBuf,
    /// Largest number of undecided atoms the model search branches on.
    #[arg(long, default_value_t = orfoil::datalog::DEFAULT_MAX_CHOICE_ATOMS)]
    choice_budget: usize,
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[arg(long)]
    examples: PathBuf,
    #[arg(long)]
    bias: PathBuf,
    #[arg(long, default_value_t = 5)]
    max_body_len: usize,
    #[arg(long, default_value_t = 1)]
    beam_width: usize,
    /// Use plain precision instead of the Laplace estimate.
    #[arg(long)]
    no_laplace: bool,
    /// Fraction of covered examples allowed to be negative.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Threads used to evaluate candidates.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Budget(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Budget(m) => f.write_str(m),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<HybridError> for Failure {
    fn from(e: HybridError) -> Self {
        if e.is_budget() {
            Failure::Budget(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_kb(args: &KbArgs) -> Result<(HybridKb, Reasoner), Failure> {
    let kb = parse_kb(&read(&args.kb)?).map_err(|e| e.in_file(args.kb.display()))?;
    let config = ReasonerConfig {
        solver: SolverOptions { max_choice_atoms: args.choice_budget, ..Default::default() },
        ..Default::default()
    };
    Ok((kb.clone(), Reasoner::with_config(kb, config)))
}

fn arg_rule(flag: &str, text: &str, kb: &HybridKb) -> Result<Rule, Failure> {
    let rule = parse_rule(text, &kb.signature).map_err(|e| e.in_file(flag))?;
    validate_safeness(&rule).map_err(|e| Failure::Input(format!("{flag}: {e}")))?;
    Ok(rule)
}

fn arg_atom(flag: &str, text: &str, kb: &HybridKb, extra: Option<&Rule>) -> Result<Atom, Failure> {
    let mut sig = kb.signature.clone();
    if let Some(r) = extra {
        sig.declare(r.head.pred.clone());
    }
    Ok(parse_atom(text, &sig).map_err(|e| e.in_file(flag))?)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn learn(args: &LearnArgs) -> Result<u8, Failure> {
    let start = Instant::now();
    let (kb, reasoner) = load_kb(&args.kb)?;
    let examples = parse_examples(&read(&args.examples)?, &kb).map_err(|e| e.in_file(args.examples.display()))?;
    let bias = parse_bias(&read(&args.bias)?, &kb).map_err(|e| e.in_file(args.bias.display()))?;
    let space = HypothesisSpace::new(examples.target.clone(), bias, kb.tbox.clone())
        .map_err(|e| Failure::Input(e.to_string()))?;
    let parse = ms(start);
    if args.jobs == 0 {
        return Err(Failure::Input("--jobs must be positive".into()));
    }
    let params = LearnerParams {
        max_body_len: args.max_body_len,
        beam_width: args.beam_width,
        laplace: !args.no_laplace,
        noise_tolerance: args.noise,
    };
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().map_err(|e| Failure::Input(e.to_string()))?;
    let learn_start = Instant::now();
    let learned = pool.install(|| Learner::new(&reasoner, &space, params).learn(&examples));
    let h = match learned {
        Ok(h) => h,
        Err(LearnError::Reasoner(e)) => return Err(e.into()),
        Err(e) => return Err(Failure::Input(e.to_string())),
    };
    let timing = Timing { parse, learn: ms(learn_start), total: ms(start) };
    let report = RunReport::new(examples.target.to_string(), &h, &params, args.jobs, reasoner.stats(), timing);
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    if !h.is_complete() {
        let missing: Vec<String> = h.uncovered_positives.iter().map(|a| a.to_string()).collect();
        eprintln!("uncovered positives: {}", missing.join(", "));
        return Ok(2);
    }
    Ok(0)
}

fn refine(kb: &HybridKb, bias: &Path, text: &str, depth: usize) -> Result<(), Failure> {
    let bias = parse_bias(&read(bias)?, kb).map_err(|e| e.in_file(bias.display()))?;
    let root = parse_rule(text, &kb.signature).map_err(|e| e.in_file("--rule"))?;
    let space = HypothesisSpace::new(root.head.pred.clone(), bias, kb.tbox.clone())
        .map_err(|e| Failure::Input(e.to_string()))?;
    // a closed pipe (e.g. `| head`) ends the listing quietly
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{root}").is_err() {
        return Ok(());
    }
    let mut seen = HashSet::from([root.canonical_key()]);
    let mut level = vec![root];
    for d in 1..=depth {
        let mut next = Vec::new();
        for h in &level {
            for (child, step) in space.refine(h) {
                if seen.insert(child.canonical_key()) {
                    if writeln!(out, "{}{:<14} {}", "  ".repeat(d), step.rule_applied.as_str(), child).is_err() {
                        return Ok(());
                    }
                    next.push(child);
                }
            }
        }
        level = next;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Learn(args) => return learn(&args),
        Command::Check { kb, rule, example } => {
            let (kb, reasoner) = load_kb(&kb)?;
            let rule = arg_rule("--rule", &rule, &kb)?;
            let example = arg_atom("--example", &example, &kb, Some(&rule))?;
            if example.pred != rule.head.pred {
                return Err(Failure::Input(format!("--example: `{example}` is not an atom of `{}`", rule.head.pred)));
            }
            let covered = reasoner.covers(&rule, &example)?;
            println!("{}", if covered { "covers" } else { "does-not-cover" });
        }
        Command::Compare { kb, rule1, rule2 } => {
            let (kb, reasoner) = load_kb(&kb)?;
            let h1 = arg_rule("--rule1", &rule1, &kb)?;
            let h2 = arg_rule("--rule2", &rule2, &kb)?;
            println!("{}", reasoner.compare(&h1, &h2)?);
        }
        Command::Refine { kb, bias, rule, depth } => {
            let (kb, _) = load_kb(&kb)?;
            refine(&kb, &bias, &rule, depth)?;
        }
        Command::Query { kb, atom } => {
            let (kb, reasoner) = load_kb(&kb)?;
            let atom = arg_atom("--atom", &atom, &kb, None)?;
            let verdict = match reasoner.entails(&[], &[], &atom) {
                Ok(true) => "entailed",
                Ok(false) => "not-entailed",
                Err(HybridError::Inconsistent) => "inconsistent-kb",
                Err(e) => return Err(e.into()),
            };
            println!("{verdict}");
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
