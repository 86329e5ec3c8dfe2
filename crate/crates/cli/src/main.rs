//! `cegb` command-line front end.

mod timer;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use cegb::ingest;
use cegb::model::{validate_session, Manifest, ParticipantGroup, Session};
use cegb::report::{self, AnalysisConfig, Report};
use cegb::synth::{self, GroundTruth, TransferGroupSpec, REPLICA_TARGETS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Debug, Parser)]
#[command(name = "cegb", version, about = "Analysis toolkit for cross-embodiment gripper benchmarks")]
struct Cli {
    /// Seed for bootstrap resampling and generators.
    #[arg(long, global = true, env = "CEGB_SEED", default_value_t = 42)]
    seed: u64,
    /// Bootstrap resamples.
    #[arg(long, global = true, default_value_t = 2000)]
    bootstrap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a session bundle against the model invariants.
    Validate { dir: PathBuf },
    /// Compute every metric family with data.
    Analyze {
        dir: PathBuf,
        #[command(flatten)]
        opts: AnalyzeOpts,
    },
    /// Re-render a saved JSON report.
    Report { report: PathBuf },
    /// Side-by-side comparison of two or more JSON reports.
    Compare {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
    },
    /// Write a synthetic bundle with its ground truth.
    Simulate(SimulateArgs),
    /// Time transfer cycles interactively and append them to a CSV file.
    Timer {
        #[arg(long)]
        group: String,
        #[arg(long)]
        participant: String,
    },
    /// CSV of raw and smoothed power with phase labels.
    Plotdata {
        dir: PathBuf,
        trace_id: String,
        /// Smoothing window, seconds.
        #[arg(long, default_value_t = 0.05)]
        smoothing: f64,
    },
}

#[derive(Debug, Args)]
struct AnalyzeOpts {
    /// Confidence level of the bootstrap intervals.
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Nominal hold duration for the energy family, seconds.
    #[arg(long)]
    t_hold_nominal: Option<f64>,
    /// Relative drop below the running maximum that marks slip.
    #[arg(long)]
    slip_drop: Option<f64>,
    /// Time a drop must persist to count as slip, seconds.
    #[arg(long)]
    slip_sustain: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["replica", "oracle", "ycb", "transfer"])))]
struct SimulateArgs {
    /// Bundle directory to create.
    dir: PathBuf,
    /// Reference fixture covering every family.
    #[arg(long)]
    replica: bool,
    /// Random small session with zero-noise traces.
    #[arg(long)]
    oracle: bool,
    /// YCB attempts only.
    #[arg(long)]
    ycb: bool,
    /// Transfer cycles only.
    #[arg(long)]
    transfer: bool,
    #[arg(long, default_value_t = 5)]
    objects: u32,
    #[arg(long, default_value_t = 2)]
    poses: u32,
    #[arg(long, default_value_t = 5)]
    attempts: u32,
    /// Per-attempt success probability for --ycb.
    #[arg(long, default_value_t = 0.7)]
    p_success: f64,
    /// Participants per group for --transfer.
    #[arg(long, default_value_t = 10)]
    participants: usize,
    /// Standard deviation of transfer times, seconds.
    #[arg(long, default_value_t = 2.0)]
    sd: f64,
    #[arg(long, default_value_t = 0.0)]
    fault_rate: f64,
}

/// Misuse detected after argument parsing; exits with status 2 like clap.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if closed_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn closed_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c
            .downcast_ref::<io::Error>()
            .or_else(|| match c.downcast_ref::<csv::Error>()?.kind() {
                csv::ErrorKind::Io(io) => Some(io),
                _ => None,
            });
        io.is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Md => with_newline(report::render_markdown(report)),
    }
}

fn read_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Report::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Validate { dir } => {
            let session = ingest::read_session(&dir)?;
            let violations = validate_session(&session);
            let text = match cli.format {
                Format::Json => with_newline(serde_json::to_string_pretty(&violations)?),
                Format::Md if violations.is_empty() => "No violations.\n".to_string(),
                Format::Md => violations.iter().map(|v| format!("- {v}\n")).collect(),
            };
            emit(out, &text)?;
            if !violations.is_empty() {
                bail!("{} violation(s) in {}", violations.len(), dir.display());
            }
        }
        Command::Analyze { dir, opts } => {
            let session = ingest::load_session(&dir)?;
            let mut cfg = AnalysisConfig::new(cli.seed, cli.bootstrap);
            cfg.bootstrap.confidence = opts.confidence;
            cfg.t_hold_nominal = opts.t_hold_nominal;
            if let Some(d) = opts.slip_drop {
                cfg.slip.drop_fraction = d;
            }
            if let Some(s) = opts.slip_sustain {
                cfg.slip.sustain_window = s;
            }
            let report = report::analyze(&session, &cfg)?;
            emit(out, &render(&report, cli.format))?;
        }
        Command::Report { report } => {
            let r = read_report(&report)?;
            emit(out, &render(&r, cli.format))?;
        }
        Command::Compare { reports } => {
            let reports = reports.iter().map(|p| read_report(p)).collect::<Result<Vec<_>>>()?;
            let c = report::compare(&reports)?;
            let text = match cli.format {
                Format::Json => with_newline(serde_json::to_string_pretty(&c)?),
                Format::Md => with_newline(report::render_comparison(&c)),
            };
            emit(out, &text)?;
        }
        Command::Simulate(args) => {
            let (session, truth) = simulate(&args, cli.seed)?;
            synth::write_bundle(&session, &truth, &args.dir)?;
            eprintln!("wrote {} bundle to {}", truth.generator, args.dir.display());
        }
        Command::Timer { group, participant } => {
            let Some(path) = out else {
                return Err(UsageError("timer needs --out <transfers.csv>".into()).into());
            };
            let mut t = timer::TransferTimer::new(timer::MonotonicClock::new(), ParticipantGroup::parse(&group), participant);
            let n = timer::run(&mut t, io::stdin().lock(), io::stderr(), path)?;
            eprintln!("{n} row(s) appended to {}", path.display());
        }
        Command::Plotdata { dir, trace_id, smoothing } => {
            let session = ingest::load_session(&dir)?;
            let phase = AnalysisConfig::default().phase;
            let data = report::plot_session_trace(&session, &trace_id, smoothing, &phase)?;
            if let Some(w) = &data.warning {
                eprintln!("warning: {w}");
            }
            match out {
                Some(path) => data.write_to(path)?,
                None => report::write_plot_csv(&data, io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn simulate(args: &SimulateArgs, seed: u64) -> Result<(Session, GroundTruth)> {
    if args.replica {
        return Ok(synth::gen_replica(seed)?);
    }
    if args.oracle {
        return Ok(synth::gen_oracle_bundle(seed)?);
    }
    if args.ycb {
        let mut table = BTreeMap::new();
        for o in 0..args.objects {
            for pose in 1..=args.poses {
                table.insert((format!("object_{o:02}"), pose), args.p_success);
            }
        }
        return Ok(synth::gen_ycb(&table, args.poses, args.attempts, seed)?);
    }
    let specs: Vec<TransferGroupSpec> = REPLICA_TARGETS
        .transfer
        .iter()
        .map(|(g, mean, _)| TransferGroupSpec::new(g.clone(), *mean, args.sd, args.participants))
        .collect();
    let (cycles, tt) = synth::gen_transfer(&specs, args.fault_rate, seed)?;
    let mut session = Session::new(Manifest::new("synthetic gripper", "synthetic platform"));
    session.transfer_cycles = cycles;
    let mut truth = GroundTruth::new("transfer", seed);
    truth.transfer = Some(tt);
    Ok((session, truth))
}
