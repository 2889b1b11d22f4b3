//! The `fdes` command-line tool.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! status with the rendered report: `0` for success or an affirmative
//! verdict, `1` for a negative verdict, `2` for usage and input errors.

mod commands;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use fuzzy_des::io::{parse_automaton, parse_inline_spec, parse_spec, Spec};
use fuzzy_des::{FuzzyState, MaxMinAutomaton, Possibility};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "fdes",
    version,
    about = "Analysis and control of fuzzy discrete-event systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Automaton document (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    automaton: Option<PathBuf>,

    /// Analysis input: a JSON document, or inline as `state:[..]`,
    /// `set:[..];[..]`, `fsfc:VALUE` or `language:WORD=DEGREE;..`.
    #[arg(long, global = true, value_name = "FILE|INLINE")]
    spec: Option<String>,

    /// Longest word examined by language-level checks.
    #[arg(long, global = true, default_value_t = 6)]
    max_len: usize,

    /// Write the report to a file instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Accessible states with their control thresholds.
    Reach,
    /// Whether a state can be reached under some controller (`--spec state`).
    Member,
    /// Successor sets within a state set (`--spec state_set`).
    Succ,
    /// Whether a state set is exactly the reachable set of some controller.
    CheckControllable,
    /// A controller whose reachable set is the given state set.
    Synthesize,
    /// Controllability and consistency of a language (`--spec language`).
    CheckLanguage,
    /// Tabulates an event-feedback supervisor from a language or a controller.
    DeriveSupervisor,
    /// Translates between state feedback and language control.
    Bridge,
    /// Cycles, least attractor and stability; `--spec` gives the legal states.
    Stability {
        /// Analyse the closed loop of this controller document.
        #[arg(long, value_name = "FILE|INLINE")]
        controller: Option<String>,
    },
    /// Checks a witness (`--spec witness`) or searches for one (`--spec state_set`).
    Stabilize {
        /// Maximum number of states explored by the search.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Replays a scripted or random event sequence.
    Simulate {
        /// Space-separated event names.
        #[arg(long)]
        events: Option<String>,
        /// Seed for a random event sequence.
        #[arg(long)]
        seed: Option<u64>,
        /// Length of a random event sequence.
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Graphviz rendering of a graph.
    ExportDot {
        #[arg(long, value_enum, default_value_t = GraphKind::Accessible)]
        graph: GraphKind,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GraphKind {
    /// The open-loop accessible graph.
    Accessible,
    /// The successor graph of a state set.
    Successors,
    /// A controllable subgraph of a state set.
    Subgraph,
    /// The closed loop of a controller.
    ClosedLoop,
}

/// What a command produced: a verdict and its renderings.
struct Report {
    positive: bool,
    text: String,
    json: serde_json::Value,
    dot: Option<String>,
}

impl Report {
    fn new(positive: bool, text: String, json: serde_json::Value) -> Self {
        Report {
            positive,
            text,
            json,
            dot: None,
        }
    }

    fn with_dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }
}

/// A failure that maps to the usage exit status.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<fuzzy_des::Error> for UsageError {
    fn from(e: fuzzy_des::Error) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<Report, UsageError>;

fn usage(message: impl Into<String>) -> UsageError {
    UsageError(message.into())
}

/// Parsed inputs shared by the commands.
struct Context {
    aut: MaxMinAutomaton,
    spec: Option<String>,
    max_len: usize,
}

impl Context {
    fn spec(&self) -> Result<Spec<Possibility>, UsageError> {
        let text = self
            .spec
            .as_deref()
            .ok_or_else(|| usage("this command needs --spec"))?;
        load_spec(&self.aut, text)
    }
}

const INLINE_KINDS: [&str; 5] = ["state:", "set:", "state_set:", "fsfc:", "language:"];

fn load_spec(aut: &MaxMinAutomaton, text: &str) -> Result<Spec<Possibility>, UsageError> {
    if INLINE_KINDS.iter().any(|k| text.starts_with(k)) {
        return Ok(parse_inline_spec(aut, text)?);
    }
    let body = read(Path::new(text))?;
    parse_spec(aut, &body).map_err(|e| usage(format!("{text}: {e}")))
}

fn read(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let code = if report.positive {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            };
            match render(&cli, report) {
                Ok(text) => match &cli.out {
                    Some(path) => match std::fs::write(path, &text) {
                        Ok(()) => (code, String::new()),
                        Err(e) => (EXIT_USAGE, format!("error: {}: {e}\n", path.display())),
                    },
                    None => (code, text),
                },
                Err(e) => (EXIT_USAGE, format!("error: {e}\n")),
            }
        }
        Err(e) => (EXIT_USAGE, format!("error: {e}\n")),
    }
}

fn render(cli: &Cli, report: Report) -> Result<String, UsageError> {
    Ok(match cli.format {
        Format::Text => report.text,
        Format::Json => {
            serde_json::to_string_pretty(&report.json).expect("reports serialize") + "\n"
        }
        Format::Dot => report
            .dot
            .ok_or_else(|| usage("this command has no DOT rendering"))?,
    })
}

fn execute(cli: &Cli) -> CmdResult {
    let path = cli
        .automaton
        .as_ref()
        .ok_or_else(|| usage("--automaton is required"))?;
    let text = read(path)?;
    let aut = parse_automaton(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let ctx = Context {
        aut,
        spec: cli.spec.clone(),
        max_len: cli.max_len,
    };
    match &cli.command {
        Command::Reach => commands::reach(&ctx),
        Command::Member => commands::member(&ctx),
        Command::Succ => commands::succ(&ctx),
        Command::CheckControllable => commands::check_controllable(&ctx),
        Command::Synthesize => commands::synthesize(&ctx),
        Command::CheckLanguage => commands::check_language(&ctx),
        Command::DeriveSupervisor => commands::derive_supervisor(&ctx),
        Command::Bridge => commands::bridge(&ctx),
        Command::Stability { controller } => commands::stability(&ctx, controller.as_deref()),
        Command::Stabilize { budget } => commands::stabilize(&ctx, *budget),
        Command::Simulate {
            events,
            seed,
            steps,
        } => commands::simulate(&ctx, events.as_deref(), *seed, *steps),
        Command::ExportDot { graph } => commands::export_dot(&ctx, *graph),
    }
}

fn state_json(q: &FuzzyState) -> serde_json::Value {
    q.components().iter().map(|c| c.to_string()).collect()
}
