use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use laf_core::graph::export_json;
use laf_core::parser::parse_literal;
use laf_core::report::{render_dot, render_json, render_text};
use laf_core::{
    build_equations, build_graph, evaluate, ground, solve, trace, EngineConfig, EngineError, GraphOptions,
    KnowledgeBase, SolverOptions, SolverStart,
};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

/// Evaluate labeled argumentation frameworks.
#[derive(Parser, Debug)]
#[command(name = "laf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a knowledge base and print labels and statuses.
    Eval {
        path: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Print a labeled DOT graph instead of the table.
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the argumentation graph.
    Graph {
        path: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// DOT output (the default); labeled when the labels can be solved.
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        /// Node and edge lists as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Explain how a claim got its labels.
    Trace {
        path: PathBuf,
        claim: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Dsl,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Start {
    Bottom,
    Top,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Input format; guessed from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Rule I-nodes act as premises of their own applications (default).
    #[arg(long, overrides_with = "no_rules_as_premises")]
    rules_as_premises: bool,
    #[arg(long)]
    no_rules_as_premises: bool,
    /// Initial value for iterated components.
    #[arg(long, value_enum, default_value = "bottom")]
    start: Start,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl RunArgs {
    fn config(&self) -> Result<EngineConfig, Failure> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Failure::new(EXIT_USAGE, "--tolerance must be a positive number"));
        }
        if self.max_iterations == 0 {
            return Err(Failure::new(EXIT_USAGE, "--max-iterations must be at least 1"));
        }
        let start = match self.start {
            Start::Bottom => SolverStart::Bottom,
            Start::Top => SolverStart::Top,
        };
        Ok(EngineConfig {
            graph: GraphOptions { rules_as_premises: !self.no_rules_as_premises },
            solver: SolverOptions { start, tolerance: self.tolerance, max_iterations: self.max_iterations },
        })
    }

    fn load(&self, path: &Path) -> Result<KnowledgeBase, Failure> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
        let format = self.format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Dsl,
        });
        let file = path.display().to_string();
        let parsed = match format {
            Format::Dsl => laf_core::parse_kb_named(&source, &file),
            Format::Json => laf_core::parse_kb_json(&source, &file),
        };
        parsed.map_err(|errors| {
            let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
            Failure::new(EXIT_INPUT, lines.join("\n"))
        })
    }
}

fn engine_failure(err: EngineError) -> Failure {
    match err {
        EngineError::Cycle(c) => Failure::new(EXIT_INPUT, c.to_string()),
        EngineError::Solver(s) => Failure::new(EXIT_SOLVER, s.to_string()),
        EngineError::Classify(c) => Failure::new(EXIT_SOLVER, c.to_string()),
    }
}

fn color_enabled() -> bool {
    std::env::var("LAF_COLOR").is_ok_and(|v| v == "1")
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Eval { path, run, dot, json } => {
            let config = run.config()?;
            let kb = run.load(&path)?;
            let eval = evaluate(&kb, &config).map_err(engine_failure)?;
            Ok(if json {
                let mut s = render_json(&eval);
                s.push('\n');
                s
            } else if dot {
                render_dot(&eval)
            } else {
                render_text(&eval, color_enabled())
            })
        }
        Command::Graph { path, run, dot: _, json } => {
            let config = run.config()?;
            let kb = run.load(&path)?;
            let gkb = ground(&kb);
            let graph = build_graph(&gkb, config.graph).map_err(|c| Failure::new(EXIT_INPUT, c.to_string()))?;
            if json {
                let mut s = export_json(&graph);
                s.push('\n');
                return Ok(s);
            }
            Ok(match evaluate(&kb, &config) {
                Ok(eval) => render_dot(&eval),
                Err(_) => laf_core::export_dot(&graph, None),
            })
        }
        Command::Trace { path, claim, run } => {
            let config = run.config()?;
            let kb = run.load(&path)?;
            let gkb = ground(&kb);
            let graph = build_graph(&gkb, config.graph).map_err(|c| Failure::new(EXIT_INPUT, c.to_string()))?;
            let sys = build_equations(&graph, kb.algebras());
            let (labeling, _) =
                solve(&sys, &config.solver).map_err(|e| Failure::new(EXIT_SOLVER, e.to_string()))?;
            // "p( a )" and "p(a)" name the same node
            let key = parse_literal(&claim).map(|l| l.key()).unwrap_or_else(|_| claim.trim().to_string());
            match trace(&sys, &labeling, &key) {
                Ok(tree) => Ok(tree.to_string()),
                Err(_) => Err(Failure::new(EXIT_INPUT, unknown_claim(&key, labeling.keys()))),
            }
        }
    }
}

fn unknown_claim(claim: &str, known: &[String]) -> String {
    let mut ranked: Vec<(f64, &String)> = known.iter().map(|k| (strsim::jaro_winkler(claim, k), k)).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let mut msg = format!("unknown claim `{claim}`");
    if ranked.is_empty() {
        msg.push_str("; the knowledge base has no claims");
        return msg;
    }
    msg.push_str("\ndid you mean:");
    for (_, k) in ranked.iter().take(3) {
        msg.push_str(&format!("\n  {k}"));
    }
    msg.push_str("\nknown claims: ");
    msg.push_str(&known.join(", "));
    msg
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("laf: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
