//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 evaluation failure. MIBENCH_THREADS caps worker threads (0 = auto).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mibench::classify::Algorithm;
use mibench::config::{parse_config, RunConfig};
use mibench::data::{generate_synthetic, load_trial_set, select_channels, write_trial_set, TrialSet};
use mibench::eval::{run_design, CellOutcome, DesignKind};
use mibench::report::{render_reports, run_meta, write_reports};
use mibench::Error;

#[derive(Parser)]
#[command(name = "mibench", version, about = "Motor-imagery EEG classification benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Subject-specific sweep: train and test within each subject.
    RunSs(RunArgs),
    /// Subject-independent sweep: train and test on the pooled corpus.
    RunSi(RunArgs),
    /// Generate a synthetic corpus from the synth.* settings.
    Synth(RunArgs),
    /// Load a corpus manifest, validate it, and print a summary.
    IngestCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports or the generated corpus.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides eval.master_seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::RunSs(a) | Command::RunSi(a) | Command::Synth(a) | Command::IngestCheck(a) => a,
        }
    }
}

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_EVAL: u8 = 3;

fn exit_class(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidInput(_) => EXIT_CONFIG,
        Error::Io { .. }
        | Error::TrialFormat { .. }
        | Error::Manifest { .. }
        | Error::UnknownChannel(_) => EXIT_DATA,
        Error::Train(_) | Error::Eval(_) => EXIT_EVAL,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("mibench: {e}");
    ExitCode::from(exit_class(e))
}

/// Installs the global worker pool per MIBENCH_THREADS before any parallel
/// work runs. Unset or 0 lets the runtime pick.
fn init_threads() -> Result<(), ExitCode> {
    let Ok(raw) = std::env::var("MIBENCH_THREADS") else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) => n,
        Err(_) => {
            eprintln!("mibench: MIBENCH_THREADS expects a non-negative integer, got \"{raw}\"");
            return Err(ExitCode::from(EXIT_CONFIG));
        }
    };
    // num_threads(0) means "choose automatically" to the pool builder too.
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .expect("worker pool initialized twice");
    Ok(())
}

fn load_corpus(cfg: &RunConfig) -> Result<TrialSet, Error> {
    let Some(manifest) = &cfg.manifest else {
        return Err(Error::Config {
            line: 0,
            detail: "data.manifest is required for this subcommand".into(),
        });
    };
    let mut set = load_trial_set(manifest, cfg.protocol)?;
    if !cfg.channels.is_empty() {
        set = select_channels(&set, &cfg.channels)?;
    }
    set.validate()?;
    if set.trials.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: corpus is empty",
            manifest.display()
        )));
    }
    Ok(set)
}

fn cmd_run(kind: DesignKind, cfg: &RunConfig, args: &RunArgs) -> Result<bool, Error> {
    let set = load_corpus(cfg)?;
    let rate = set.trials[0].sampling_rate_hz;
    let pipe = cfg.pipeline_at(rate)?;
    let settings = cfg.eval_settings(kind);
    let run = run_design(&set, kind, &Algorithm::ALL, cfg.sizes(kind), &pipe, &settings)?;

    let reports = render_reports(&[&run], cfg.mode);
    let meta = run_meta(settings.master_seed, &cfg.snapshot());
    write_reports(&args.out, &reports, &meta)?;
    for name in ["summary.csv", "winners.csv", "accuracies.csv", "summary.txt", "run-meta.txt"] {
        println!("wrote {}", args.out.join(name).display());
    }

    let mut clean = true;
    for outcome in &run.outcomes {
        if let CellOutcome::Failed { cell, reason } = outcome {
            clean = false;
            eprintln!(
                "mibench: cell {}/{}/{}/n={} failed: {reason}",
                cell.design.tag(),
                cell.design.subject().unwrap_or("-"),
                cell.algorithm.as_str(),
                cell.n,
            );
        }
    }
    Ok(clean)
}

fn cmd_synth(cfg: &RunConfig, args: &RunArgs) -> Result<(), Error> {
    let set = generate_synthetic(&cfg.synth, cfg.master_seed)?;
    let manifest = write_trial_set(&args.out, &set)?;
    println!(
        "wrote {} ({} trials, {} subjects)",
        manifest.display(),
        set.trials.len(),
        set.subject_ids().len(),
    );
    Ok(())
}

fn cmd_ingest_check(cfg: &RunConfig) -> Result<(), Error> {
    let set = load_corpus(cfg)?;
    let first = &set.trials[0];
    let lefts = set
        .trials
        .iter()
        .filter(|t| t.label == mibench::data::Label::Left)
        .count();
    println!("trials: {}", set.trials.len());
    println!("subjects: {}", set.subject_ids().len());
    println!("channels: {}", first.channel_names.len());
    println!("sampling_rate_hz: {}", first.sampling_rate_hz);
    println!("samples_per_trial: {}", first.n_samples());
    println!("left: {lefts}  right: {}", set.trials.len() - lefts);

    // Prove the configured segment fits inside the stored trials.
    let epoch = mibench::preprocess::extract_mi_segment(
        first,
        &set.protocol,
        cfg.drop_head_s,
        cfg.drop_tail_s,
    )?;
    println!("analysis_window_samples: {}", epoch.samples[0].len());
    Ok(())
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<bool, Error> {
    match &cli.command {
        Command::RunSs(a) => cmd_run(DesignKind::Ss, cfg, a),
        Command::RunSi(a) => cmd_run(DesignKind::Si, cfg, a),
        Command::Synth(a) => cmd_synth(cfg, a).map(|()| true),
        Command::IngestCheck(_) => cmd_ingest_check(cfg).map(|()| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; anything else is usage.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(code) = init_threads() {
        return code;
    }
    let args = cli.command.args();
    // An unreadable or unparseable config is a configuration error no
    // matter which underlying error surfaces it.
    let mut cfg = match parse_config(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("mibench: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    match run(&cli, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("mibench: some cells failed; reports were still written");
            ExitCode::from(EXIT_EVAL)
        }
        Err(e) => fail(&e),
    }
}
