//! Command-line front end: run structure-definition files, run the
//! built-in demo systems, and expose the expression engine directly.
//!
//! Exit codes: 0 when every check matches its expected verdicts, 1 when
//! any check misses, 2 on parse/validation/IO errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbh_core::fixtures;
use qbh_core::sdef::{run_definition, RunReport, StructureDefinition};
use qbh_core::zero::Policy;

use qbh_cli::{output, schema};

#[derive(Parser)]
#[command(
    name = "qbh",
    version,
    about = "Symbolic verifier for Poisson tensors, quasi-bi-Hamiltonian systems, and Jacobi structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct PolicyArgs {
    /// Residual tolerance for probabilistic zero tests
    #[arg(long = "tol", default_value_t = 1e-9)]
    tolerance: f64,
    /// Number of sample points per zero test
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Seed for the deterministic sampler
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl From<PolicyArgs> for Policy {
    fn from(a: PolicyArgs) -> Policy {
        Policy {
            tolerance: a.tolerance,
            samples: a.samples,
            seed: a.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a structure-definition file
    Run {
        /// Path to the definition (TOML)
        file: PathBuf,
        /// Emit the machine-readable JSON report instead of text
        #[arg(long)]
        json: bool,
        /// Stop at the first check that misses its expectations
        #[arg(long)]
        fail_fast: bool,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Run one of the built-in demo systems
    Demo {
        /// Demo name (see list-demos)
        name: String,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        fail_fast: bool,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// List the built-in demo systems
    ListDemos,
    /// Print the JSON schema that reports validate against
    Schema,
    /// Differentiate or evaluate a single expression
    Expr {
        #[command(subcommand)]
        command: ExprCommand,
    },
}

#[derive(Subcommand)]
enum ExprCommand {
    /// Print the exact partial derivative of an expression
    Diff {
        /// The expression, over the chart coordinates
        expr: String,
        /// Coordinate to differentiate with respect to
        #[arg(long)]
        wrt: String,
        /// Comma-separated coordinate names
        #[arg(long, default_value = "x1,x2,x3")]
        coords: String,
        /// Comma-separated opaque symbol names to declare
        #[arg(long, default_value = "")]
        opaque: String,
    },
    /// Evaluate an expression at a point
    Eval {
        expr: String,
        /// Comma-separated coordinate values
        #[arg(long)]
        at: String,
        #[arg(long, default_value = "x1,x2,x3")]
        coords: String,
        #[arg(long, default_value = "")]
        opaque: String,
        /// Bindings for opaque symbols, e.g. f=square,g=const(2)
        #[arg(long, default_value = "")]
        bind: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run {
            file,
            json,
            fail_fast,
            policy,
        } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| format!("{}: {e}", file.display()))?;
            let def = StructureDefinition::parse(&text).map_err(|e| e.to_string())?;
            let report =
                run_definition(&def, &policy.into(), fail_fast).map_err(|e| e.to_string())?;
            emit(&report, json, &def.title)
        }
        Command::Demo {
            name,
            json,
            fail_fast,
            policy,
        } => {
            let fixture =
                fixtures::by_name(&name).ok_or_else(|| format!("unknown demo '{name}'"))?;
            let def = fixture.definition().map_err(|e| e.to_string())?;
            let report =
                run_definition(&def, &policy.into(), fail_fast).map_err(|e| e.to_string())?;
            emit(&report, json, fixture.name)
        }
        Command::ListDemos => {
            for f in fixtures::FIXTURES {
                println!("{:<20} {}", f.name, f.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Schema => {
            print!("{}", schema::REPORT_SCHEMA);
            Ok(ExitCode::SUCCESS)
        }
        Command::Expr { command } => expr_tool(command),
    }
}

fn emit(report: &RunReport, json: bool, title: &str) -> Result<ExitCode, String> {
    if json {
        let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
        println!("{text}");
    } else {
        output::print_human(report, title);
    }
    Ok(if report.overall_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_chart(coords: &str) -> Result<std::sync::Arc<qbh_core::Chart>, String> {
    let names: Vec<&str> = coords
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    qbh_core::Chart::boxed(&names, -1e6, 1e6).map_err(|e| e.to_string())
}

fn parse_decls(opaque: &str) -> qbh_core::Declarations {
    qbh_core::Declarations::with_opaques(
        opaque
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from),
    )
}

fn expr_tool(command: ExprCommand) -> Result<ExitCode, String> {
    match command {
        ExprCommand::Diff {
            expr,
            wrt,
            coords,
            opaque,
        } => {
            let chart = parse_chart(&coords)?;
            let decls = parse_decls(&opaque);
            let parsed = qbh_core::parse_expr_with(&expr, &chart, &decls)
                .map_err(|e| e.to_string())?;
            let var = chart
                .coord_index(&wrt)
                .ok_or_else(|| format!("'{wrt}' is not one of the chart coordinates"))?;
            let derivative = qbh_core::differentiate(&parsed, var);
            println!("{}", chart.render(&derivative));
            Ok(ExitCode::SUCCESS)
        }
        ExprCommand::Eval {
            expr,
            at,
            coords,
            opaque,
            bind,
        } => {
            let chart = parse_chart(&coords)?;
            let decls = parse_decls(&opaque);
            let parsed = qbh_core::parse_expr_with(&expr, &chart, &decls)
                .map_err(|e| e.to_string())?;
            let point: Vec<f64> = at
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| format!("--at: {e}")))
                .collect::<Result<_, _>>()?;
            if point.len() != chart.dim() {
                return Err(format!(
                    "--at has {} values for {} coordinates",
                    point.len(),
                    chart.dim()
                ));
            }
            let mut bindings = qbh_core::Bindings::empty();
            for pair in bind.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (name, selector) = pair
                    .split_once('=')
                    .ok_or_else(|| format!("--bind entry '{pair}' is not name=selector"))?;
                let f = qbh_core::OpaqueFn::from_selector(selector)
                    .ok_or_else(|| format!("unknown binding selector '{selector}'"))?;
                bindings = bindings.with_fn(name.trim(), f);
            }
            let value = parsed.eval(&point, &bindings).map_err(|e| e.to_string())?;
            println!("{value}");
            Ok(ExitCode::SUCCESS)
        }
    }
}
