//! Command-line front end: one subcommand per stage of the study, CSV plus a
//! manifest in the output directory, and a JSON error record on failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cvqkd::experiment::{self as ex, ArtifactWriter, ExperimentConfig, ExperimentKind};
use cvqkd::{Error, RandomSource, Result};

#[derive(Parser)]
#[command(name = "cvqkd", version, about = "Leakage-free CV-QKD link simulator and post-processing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment configuration; defaults are the 20 km operating point.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed, hex.
    #[arg(long)]
    seed: Option<String>,
    /// Multiplies frame and trial counts.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Write one frame as waveform fixtures.
    Simulate(Common),
    /// Run Bob's receiver on fixtures from `simulate`.
    Dsp {
        #[command(flatten)]
        common: Common,
        /// Directory holding the fixtures.
        #[arg(long)]
        input: PathBuf,
    },
    /// Link experiments: backtoback, e2e, fig3_acf, fig4_suppression_sweep.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<String>,
    },
    /// Code experiments: table1_threshold, table2_fer.
    Reconcile {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<String>,
    },
    /// Toeplitz privacy amplification of a packed bit file.
    Pa {
        #[command(flatten)]
        common: Common,
        /// Reconciled bits, packed LSB first; random bits when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Composable key fraction against block size (fig5_keyrate_vs_N).
    Keyrate(Common),
    /// Throughput of the heavy stages.
    Bench(Common),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    command: &'a str,
}

struct Run {
    cfg: ExperimentConfig,
    config_text: String,
    seed: String,
    src: RandomSource,
    out: ArtifactWriter,
    scale: f64,
}

fn open(c: &Common) -> Result<Run> {
    let cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if !(c.scale > 0.0 && c.scale.is_finite()) {
        return Err(Error::Config(format!("--scale {} must be positive", c.scale)));
    }
    let seed = c.seed.clone().or_else(|| cfg.seed.clone()).unwrap_or_else(|| "00".into());
    let src = RandomSource::from_hex(&seed)?;
    let config_text = cfg.to_toml()?;
    let mut out = ArtifactWriter::create(&c.out)?;
    std::fs::write(out.path("config.toml"), &config_text)?;
    out.register("config.toml", 1)?;
    Ok(Run { cfg, config_text, seed, src, out, scale: c.scale })
}

fn pick_kind(flag: &Option<String>, cfg: &ExperimentConfig, allowed: &[ExperimentKind]) -> Result<ExperimentKind> {
    let k = match flag {
        Some(s) => ExperimentKind::parse(s)?,
        None => cfg.kind.unwrap_or(allowed[0]),
    };
    if !allowed.contains(&k) {
        let names: Vec<_> = allowed.iter().map(|k| k.name()).collect();
        return Err(Error::Config(format!("kind `{}` does not belong here; expected one of {}", k.name(), names.join(", "))));
    }
    Ok(k)
}

fn finish(run: Run, command: &str, kind: Option<ExperimentKind>) -> Result<()> {
    let dir = run.out.dir().to_path_buf();
    run.out.finish(command, kind.map(|k| k.name()), &run.seed, run.scale, &run.config_text)?;
    println!("{}", dir.join("manifest.json").display());
    Ok(())
}

fn estimate(mut run: Run, kind: ExperimentKind) -> Result<()> {
    let (cfg, s, src) = (&run.cfg, run.scale, &run.src);
    match kind {
        ExperimentKind::BackToBack => {
            let st = ex::backtoback(cfg, s, src)?;
            run.out.csv("frames.csv", &st.rows)?;
            run.out.jsonl("frames.jsonl", &st.records)?;
            run.out.csv("pooled.csv", &st.pooled)?;
        }
        ExperimentKind::EndToEnd => {
            let r = ex::end_to_end(cfg, s, src)?;
            run.out.csv("frames.csv", &r.link.rows)?;
            run.out.jsonl("frames.jsonl", &r.link.records)?;
            run.out.csv("pooled.csv", &r.link.pooled)?;
            run.out.csv("key.csv", &r.keys)?;
            run.out.jsonl("key_accounting.jsonl", &r.accounting)?;
        }
        ExperimentKind::Fig3Acf => {
            let (rows, summary) = ex::acf_study(cfg, s, src)?;
            run.out.csv("acf.csv", &rows)?;
            run.out.csv("acf_summary.csv", &summary)?;
        }
        ExperimentKind::Fig4SuppressionSweep => {
            let (rows, frames) = ex::suppression_sweep(cfg, s, src)?;
            run.out.csv("suppression.csv", &rows)?;
            run.out.csv("frames.csv", &frames)?;
            run.out.note("total noise is t + u in mPNU");
        }
        _ => unreachable!("filtered by pick_kind"),
    }
    finish(run, "estimate", Some(kind))
}

fn reconcile(mut run: Run, kind: ExperimentKind) -> Result<()> {
    match kind {
        ExperimentKind::Table1Threshold => {
            let row = ex::decoding_threshold(&run.cfg)?;
            run.out.csv("threshold.csv", std::slice::from_ref(&row))?;
        }
        ExperimentKind::Table2Fer => {
            let (eff, fer) = ex::fer_table(&run.cfg, run.scale, &run.src)?;
            run.out.csv("efficiency.csv", &eff)?;
            run.out.csv("fer.csv", &fer)?;
        }
        _ => unreachable!("filtered by pick_kind"),
    }
    finish(run, "reconcile", Some(kind))
}

fn dispatch(cmd: &Command) -> Result<()> {
    use ExperimentKind::*;
    match cmd {
        Command::Simulate(c) => {
            let mut run = open(c)?;
            ex::simulate_fixtures(&run.cfg, &run.src, &mut run.out)?;
            finish(run, "simulate", None)
        }
        Command::Dsp { common, input } => {
            let mut run = open(common)?;
            ex::dsp_from_fixtures(&run.cfg, Path::new(input), &mut run.out)?;
            finish(run, "dsp", None)
        }
        Command::Estimate { common, kind } => {
            let run = open(common)?;
            let k = pick_kind(kind, &run.cfg, &[BackToBack, EndToEnd, Fig3Acf, Fig4SuppressionSweep])?;
            estimate(run, k)
        }
        Command::Reconcile { common, kind } => {
            let run = open(common)?;
            let k = pick_kind(kind, &run.cfg, &[Table1Threshold, Table2Fer])?;
            reconcile(run, k)
        }
        Command::Pa { common, input } => {
            let mut run = open(common)?;
            ex::amplify(&run.cfg, input.as_deref(), &run.src, &mut run.out)?;
            finish(run, "pa", None)
        }
        Command::Keyrate(c) => {
            let mut run = open(c)?;
            pick_kind(&None, &run.cfg, &[Fig5KeyrateVsN])?;
            let (rows, summary) = ex::keyrate_vs_n(&run.cfg)?;
            run.out.csv("keyrate.csv", &rows)?;
            run.out.csv("operating_point.csv", std::slice::from_ref(&summary))?;
            finish(run, "keyrate", Some(Fig5KeyrateVsN))
        }
        Command::Bench(c) => {
            let mut run = open(c)?;
            let rows = ex::bench(&run.cfg, run.scale, &run.src)?;
            run.out.csv("bench.csv", &rows)?;
            run.out.note("timings depend on the machine and are not reproducible");
            finish(run, "bench", None)
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Simulate(_) => "simulate",
        Command::Dsp { .. } => "dsp",
        Command::Estimate { .. } => "estimate",
        Command::Reconcile { .. } => "reconcile",
        Command::Pa { .. } => "pa",
        Command::Keyrate(_) => "keyrate",
        Command::Bench(_) => "bench",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rec = ErrorRecord { error: "usage", message: e.to_string().trim().to_string(), command: "" };
            eprintln!("{}", serde_json::to_string(&rec).expect("plain strings serialise"));
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let rec = ErrorRecord { error: e.kind(), message: e.to_string(), command: command_name(&cli.command) };
            eprintln!("{}", serde_json::to_string(&rec).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", e.kind())));
            ExitCode::from(2)
        }
    }
}
