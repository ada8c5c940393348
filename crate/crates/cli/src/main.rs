use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fundlim_core::experiment::{run_experiment, validate_config, ExperimentConfig, ExperimentKind};
use fundlim_core::Error;

/// Runs one experiment from a JSON config and prints or writes its record.
///
/// Exit status: 0 when every verdict holds, 2 when a Monte-Carlo verdict
/// holds only within three standard errors, 3 on a violation, 1 on usage,
/// configuration or I/O errors.
#[derive(Parser, Debug)]
#[command(name = "fundlim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy packing and entropy curve of the parameter ball.
    Pack(Common),
    /// Divergence sum against an auxiliary kernel, with the mutual information.
    Divergence(Common),
    /// Fano lower bound on the error probability.
    Fano(Common),
    /// Both sides of the Meta-Theorem for a finite hypothesis set.
    MetaVerify(Common),
    /// Critical-separation floor on the minimax metric error.
    Theorem2(Common),
    /// Entropy cap implied by a rate bound.
    Theorem3(Common),
    /// Identification error of a chosen identifier.
    Identify(Common),
    /// Regret curves of linear systems under a controller.
    Regret(Common),
    /// Persistent-excitation probabilities.
    Pe(Common),
    /// Empirical minimum time against its lower bound.
    MinTime(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; overrides FUNDLIM_SEED, which overrides the config.
    #[arg(long, env = "FUNDLIM_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Record path; CSV side-files are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::Pack(c) => (ExperimentKind::Packing, c),
            Command::Divergence(c) => (ExperimentKind::Divergence, c),
            Command::Fano(c) => (ExperimentKind::Fano, c),
            Command::MetaVerify(c) => (ExperimentKind::MetaVerify, c),
            Command::Theorem2(c) => (ExperimentKind::Theorem2, c),
            Command::Theorem3(c) => (ExperimentKind::Theorem3, c),
            Command::Identify(c) => (ExperimentKind::Identify, c),
            Command::Regret(c) => (ExperimentKind::ControlRegret, c),
            Command::Pe(c) => (ExperimentKind::PeCheck, c),
            Command::MinTime(c) => (ExperimentKind::MinTime, c),
        }
    }
}

fn load(kind: ExperimentKind, args: Common) -> Result<ExperimentConfig, Error> {
    let raw = match &args.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = validate_config(&raw)?;
    cfg.experiment = kind;
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(w) = args.workers {
        cfg.worker_count = w;
    }
    if let Some(o) = args.out {
        cfg.output_path = Some(o.to_string_lossy().into_owned());
    }
    let problems = cfg.problems();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(problems))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (kind, args) = cli.command.split();
    let record = load(kind, args).and_then(|cfg| run_experiment(&cfg));
    match record {
        Ok(r) => {
            match &r.config.output_path {
                Some(p) => eprintln!("wrote {p} (verdict: {:?})", r.verdict),
                None => println!("{}", r.to_json()),
            }
            ExitCode::from(r.exit_code() as u8)
        }
        Err(Error::Config(problems)) => {
            eprintln!("invalid configuration:");
            for p in problems {
                eprintln!("  {p}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
