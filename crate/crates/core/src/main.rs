use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gaze_core::error::{Error, Result};
use gaze_core::features::{format_ranking, rank_features, RankMode, FEATURE_COUNT};
use gaze_core::harness::{
    calibrate, compare_reports, evaluate, head_pose_stats, load_profile, read_trace, run_suite, save_profile,
    train_profile, write_suite, write_trace, Config, EvaluationReport, Method,
};
use gaze_core::learners::{build_training_set, central_reference, LearnedModel};
use gaze_core::profile::CalibrationProfile;
use gaze_core::simulator::{generate_schedule, synthesize_calibration, synthesize_session, CalibrationProtocol, ScheduleConfig};

#[derive(Parser)]
#[command(name = "gaze", version, about = "Head-pose based gaze-region estimation toolkit")]
struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a driving session or a calibration trace.
    Simulate {
        #[arg(long, default_value = "average")]
        persona: String,
        #[arg(long, default_value = "depthcam")]
        sensor: String,
        /// session, method1, method2 or learned.
        #[arg(long, default_value = "session")]
        protocol: String,
        /// Session length in seconds (defaults to the config schedule).
        #[arg(long)]
        duration_s: Option<f64>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Fit a method-1 or method-2 profile from a calibration trace.
    Calibrate {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train a learned profile (mlp or svm) from a learned-protocol trace.
    Train {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        method: String,
        /// Comma-separated 1-based feature numbers, e.g. 1,2.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<usize>>,
        #[arg(long)]
        no_standardize: bool,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Score a profile on a labeled session trace.
    Evaluate {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        /// Defaults to the profile's own method.
        #[arg(long)]
        method: Option<String>,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Rank features by J5 separability on a learned-protocol trace.
    RankFeatures {
        #[arg(long)]
        trace: PathBuf,
        /// greedy or prefix.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Head-pose statistics of a trace.
    Stats {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Compare JSON reports side by side.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Run the persona x sensor x seed battery and check orderings.
    Suite {
        #[arg(long, short, default_value = "suite-out")]
        out: PathBuf,
    },
}

fn method(s: &str) -> Result<Method> {
    s.parse()
}

fn read_reports(path: &Path) -> Result<Vec<EvaluationReport>> {
    let text = std::fs::read_to_string(path)?;
    let malformed = |e: serde_json::Error| Error::Malformed(format!("{}: {e}", path.display()));
    if text.trim_start().starts_with('[') {
        serde_json::from_str(&text).map_err(malformed)
    } else {
        Ok(vec![serde_json::from_str(&text).map_err(malformed)?])
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::load_or_default(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.train.rng_seed = seed;
    }
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Simulate { persona, sensor, protocol, duration_s, out } => {
            let p = cfg.persona(&persona)?;
            let s = cfg.sensor(&sensor)?;
            let trace = if protocol == "session" {
                let sched_cfg = ScheduleConfig {
                    duration_ms: duration_s.map_or(cfg.schedule.duration_ms, |d| d * 1000.0),
                    ..cfg.schedule.clone()
                };
                let schedule = generate_schedule(&sched_cfg, seed)?;
                synthesize_session(p, s, &schedule, &cfg.geometry, sched_cfg.probe_period_ms, seed)?
            } else {
                let proto: CalibrationProtocol = protocol.parse()?;
                synthesize_calibration(p, s, &cfg.geometry, proto, &cfg.adapted_table, seed)?
            };
            write_trace(&trace, &out)?;
            println!("wrote {} samples, {} probes to {}", trace.len(), trace.probes.len(), out.display());
        }
        Command::Calibrate { trace, method: m, out } => {
            let m = method(&m)?;
            if !matches!(m, Method::Method1 | Method::Method2) {
                return Err(Error::InvalidInput("calibrate handles method1 and method2; use train for mlp and svm".into()));
            }
            let profile = calibrate(m, &read_trace(&trace)?, &cfg)?;
            save_profile(&profile, &out)?;
            println!("wrote {} profile to {}", profile.kind(), out.display());
        }
        Command::Train { trace, method: m, features, no_standardize, out } => {
            let m = method(&m)?;
            let subset: Vec<usize> = match features {
                Some(f) => {
                    if f.is_empty() || f.iter().any(|&i| i == 0 || i > FEATURE_COUNT) {
                        return Err(Error::InvalidInput(format!("features must be in 1..={FEATURE_COUNT}")));
                    }
                    f.iter().map(|i| i - 1).collect()
                }
                None => cfg.feature_subset(),
            };
            let standardize = cfg.eval.standardize && !no_standardize;
            let profile = train_profile(m, &read_trace(&trace)?, &subset, standardize, &cfg.train)?;
            if let CalibrationProfile::Learned(p) = &profile {
                if let LearnedModel::Svm(svm) = &p.model {
                    if !svm.converged() {
                        eprintln!("warning: SVM reached the iteration limit before converging");
                    }
                }
            }
            save_profile(&profile, &out)?;
            println!("wrote {} profile to {}", profile.kind(), out.display());
        }
        Command::Evaluate { trace, profile, method: m, json } => {
            let m = m.as_deref().map(method).transpose()?;
            let report = evaluate(&read_trace(&trace)?, &load_profile(&profile)?, m, &cfg)?;
            print!("{}", report.render());
            if let Some(path) = json {
                let body = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?;
                std::fs::write(path, body + "\n")?;
            }
        }
        Command::RankFeatures { trace, mode } => {
            let mode: RankMode = match mode {
                Some(s) => s.parse()?,
                None => cfg.eval.rank_mode,
            };
            let trace = read_trace(&trace)?;
            let set = build_training_set(&trace, central_reference(&trace)?)?;
            let all: Vec<usize> = (0..FEATURE_COUNT).collect();
            print!("{}", format_ranking(&rank_features(&set.patterns, &all, mode)?));
        }
        Command::Stats { trace } => {
            print!("{}", head_pose_stats(&read_trace(&trace)?)?.render());
        }
        Command::Report { reports } => {
            let mut all = Vec::new();
            for path in &reports {
                all.extend(read_reports(path)?);
            }
            print!("{}", compare_reports(&all)?.render());
        }
        Command::Suite { out } => {
            let outcome = run_suite(&cfg, cli.seed.unwrap_or(42))?;
            let files = write_suite(&outcome, &out)?;
            print!("{}", outcome.comparison.render());
            println!();
            print!("{}", outcome.summary.render());
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
