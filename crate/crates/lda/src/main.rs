use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use lda::config::{output_dir, ConfigError, Mode, RunConfig};
use lda::dataset::{DatasetError, LossDataset};
use lda::pipeline::{run_pipeline, Stage, EXIT_VALIDATION};
use lda::qq;
use lda::study::{self, Experiment, StudyOptions};
use lda_core::likelihood::{fit_truncated, FitConfig, TruncatedSample};
use lda_core::SeverityFamily;

#[derive(Parser)]
#[command(name = "lda", version, about = "Loss distribution approach: severity selection and annual-loss capital")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every candidate severity per ORC.
    Fit(RunArgs),
    /// Fit and rank candidates per ORC.
    Select(RunArgs),
    /// Select, then simulate the annual-loss distribution of the winner.
    Simulate(RunArgs),
    /// Full pipeline with the summed capital quantile.
    Capital(RunArgs),
    /// Run one of the simulation studies.
    Study(StudyArgs),
    /// QQ pairs for one fitted family on one ORC.
    Qq(QqArgs),
    /// Write synthetic data for the reference ORCs as loss CSV files.
    Synth(SynthArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Losses CSV: orc_id,year,amount
    #[arg(long)]
    losses: PathBuf,
    /// Thresholds CSV: orc_id,threshold
    #[arg(long)]
    thresholds: PathBuf,
    /// Below-threshold counts CSV: orc_id,year,below_count
    #[arg(long)]
    below_counts: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "LDA_OUTPUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Config file, `key = value` lines or JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// AIC_AD or QS.
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated family codes.
    #[arg(long)]
    candidates: Option<String>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Use the censored likelihood where below-threshold counts exist.
    #[arg(long)]
    censored: bool,
}

#[derive(Args)]
struct StudyArgs {
    /// aic-ad, gh-vs-lsas, censoring or qs-ranking.
    experiment: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    sims: Option<usize>,
    #[arg(long)]
    years: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Comma-separated reference ORC ids (1, 2, 3).
    #[arg(long, value_delimiter = ',')]
    orcs: Option<Vec<u32>>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    reject_nonpositive: bool,
    #[arg(long, env = "LDA_OUTPUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QqArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    orc: String,
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    years: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    orcs: Vec<u32>,
    #[arg(long, env = "LDA_OUTPUT_DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e.chain().any(|c| c.is::<DatasetError>() || c.is::<ConfigError>());
            ExitCode::from(if validation { EXIT_VALIDATION as u8 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Fit(a) => pipeline(a, Stage::Fit),
        Command::Select(a) => pipeline(a, Stage::Select),
        Command::Simulate(a) => pipeline(a, Stage::Simulate),
        Command::Capital(a) => pipeline(a, Stage::Capital),
        Command::Study(a) => {
            let exp: Experiment = a.experiment.parse()?;
            let opts = StudyOptions {
                seed: a.seed,
                sims: a.sims,
                years: a.years,
                draws: a.draws,
                bootstrap: a.bootstrap,
                orcs: a.orcs,
                restarts: a.restarts,
                reject_nonpositive: a.reject_nonpositive.then_some(true),
            };
            let result = study::run(exp, &opts)?;
            let dir = output_dir(a.out).join(&result.tag);
            result.write(&dir)?;
            println!("{} written to {}", result.tag, dir.display());
            Ok(0)
        }
        Command::Qq(a) => {
            let data = load(&a.data)?;
            let tau = data.threshold(&a.orc).with_context(|| format!("no ORC {:?} in the dataset", a.orc))?;
            let family: SeverityFamily =
                a.family.parse().map_err(|_| ConfigError::Invalid(format!("unknown family {:?}", a.family)))?;
            let sample = TruncatedSample::new(data.losses(&a.orc), tau)?;
            let fit = fit_truncated(family, &sample, &FitConfig { seed: a.seed, ..FitConfig::default() })?;
            let model = fit.model.as_ref().context("fit produced no model")?;
            let points = qq::qq_points(model, &sample);
            let dir = output_dir(a.data.out).join(&a.orc);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("qq_{}.csv", family.code()));
            qq::qq_table(&points).write(&path)?;
            println!(
                "{} {}: {} points, central 98% discrepancy {:.4}, written to {}",
                a.orc,
                family.code(),
                points.len(),
                qq::qq_discrepancy(&points, 0.01),
                path.display()
            );
            Ok(0)
        }
        Command::Synth(a) => {
            let ds = study::synthetic_dataset(&a.orcs, a.years, a.seed)?;
            let dir = output_dir(a.out);
            ds.write(&dir)?;
            println!("{} losses written to {}", ds.events.len(), dir.display());
            Ok(0)
        }
    }
}

fn load(d: &DataArgs) -> anyhow::Result<LossDataset> {
    Ok(LossDataset::ingest(&d.losses, &d.thresholds, d.below_counts.as_deref())?)
}

fn pipeline(a: RunArgs, stage: Stage) -> anyhow::Result<i32> {
    let mut config = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &a.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::Invalid(format!("expected KEY=VALUE, got {kv:?}")))?;
        config.set(k.trim(), v.trim())?;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(m) = &a.mode {
        config.mode = m.parse::<Mode>()?;
    }
    if let Some(c) = &a.candidates {
        config.set("candidates", c)?;
    }
    if let Some(d) = a.draws {
        config.draws = d;
    }
    if let Some(b) = a.bootstrap {
        config.bootstrap = b;
    }
    if let Some(al) = a.alpha {
        config.alpha = al;
    }
    config.censored |= a.censored;
    config.validate()?;

    let data = load(&a.data)?;
    let out = run_pipeline(&data, &config, stage)?;
    let dir = output_dir(a.data.out);
    out.write(&dir, &config)?;
    for o in &out.orcs {
        println!(
            "{}: n={} survivors={} selected={}",
            o.orc,
            o.n_obs,
            o.survivors(),
            o.selected.map_or("none", |f| f.code())
        );
    }
    if let Some(c) = &out.capital {
        println!("capital at {}: {:.6e}", c.level, c.firm_total);
    }
    Ok(out.exit_code())
}
