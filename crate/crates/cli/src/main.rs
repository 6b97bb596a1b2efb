use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shadowlab::{load_config, replay, run, write_run, CliError};

#[derive(Parser)]
#[command(name = "shadowlab", version, about = "Run and replay shadowlab experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Sub {
    Entropy(RunArgs),
    Irregular(RunArgs),
    Shadow(RunArgs),
    Horseshoe(RunArgs),
    Proximal(RunArgs),
    Shred(RunArgs),
    Classify(RunArgs),
    /// Re-run a report and compare its certificates and tables.
    Replay {
        report: PathBuf,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SHADOWLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SHADOWLAB_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.into()))
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let (name, args) = match cli.command {
        Sub::Replay { report } => {
            let r = replay(&report)?;
            for m in &r.mismatches {
                eprintln!("mismatch: {m}");
            }
            println!("replay {}: {}", report.display(), if r.identical() { "identical" } else { "MISMATCH" });
            return Ok(r.identical());
        }
        Sub::Entropy(a) => ("entropy", a),
        Sub::Irregular(a) => ("irregular", a),
        Sub::Shadow(a) => ("shadow", a),
        Sub::Horseshoe(a) => ("horseshoe", a),
        Sub::Proximal(a) => ("proximal", a),
        Sub::Shred(a) => ("shred", a),
        Sub::Classify(a) => ("classify", a),
    };
    let cfg = load_config(&args.config, args.seed, args.out)?;
    if cfg.command.name() != name {
        return Err(CliError::Usage(format!("config is for `{}`, invoked as `{name}`", cfg.command.name())));
    }
    let result = run(&cfg);
    let path = write_run(&result, &cfg.out_dir())?;
    for c in &result.report.certificates {
        println!("{} {}: {}", if c.holds { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    for f in
        result.report.failures.iter().filter(|f| !result.report.certificates.iter().any(|c| f.starts_with(&c.name)))
    {
        println!("FAIL {f}");
    }
    println!("report: {}", path.display());
    Ok(result.report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
