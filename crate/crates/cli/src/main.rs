use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use koblab::run::RunOptions;
use koblab::{emit_reports, parse_plan, run_plan, CliError, Experiment};

/// Run one koblab experiment from a JSON plan.
#[derive(Parser, Debug)]
#[command(name = "koblab", version)]
struct Args {
    /// Experiment name; must match the plan's "experiment" field.
    experiment: String,
    #[arg(long)]
    plan: PathBuf,
    /// Output directory (overrides the plan's "out"; default "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Output bytes do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Exit 0 even when a verdict is "violated".
    #[arg(long)]
    allow_violations: bool,
    /// Lift the lattice node cap.
    #[arg(long)]
    override_grid_budget: bool,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let parse = |path: &str, message: String| CliError::Parse { path: path.into(), message };
    let Some(exp) = Experiment::parse(&args.experiment) else {
        return Err(parse("experiment", format!("unknown experiment {:?}", args.experiment)));
    };
    let text = std::fs::read_to_string(&args.plan)
        .map_err(|source| CliError::Io { path: args.plan.display().to_string(), source })?;
    let plan = parse_plan(&text)?;
    if plan.experiment != exp {
        return Err(parse("experiment", format!("plan runs {}, command line asks for {exp}", plan.experiment)));
    }
    let opts = RunOptions { override_grid_budget: args.override_grid_budget };
    let bundle = run_plan(&plan, opts)?;
    let dir = args.out.clone().or_else(|| plan.out.as_ref().map(PathBuf::from)).unwrap_or_else(|| "out".into());
    let files = emit_reports(&bundle, &dir)?;
    for r in &bundle.reports {
        println!("{}: {}", r.name, r.verdict.as_str());
    }
    for v in &bundle.visibility {
        println!("{}: {}", v.label, v.verdict.verdict.as_str());
    }
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(bundle.violated())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&args) {
        Ok(true) if !args.allow_violations => {
            eprintln!("a verdict is violated (pass --allow-violations to accept)");
            ExitCode::from(1)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
