use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ct2cxr::qa::ClassStats;
use ct2cxr::volume::is_volume_path;
use ct2cxr::View;
use ct2cxr_cli::commands::{self, CohortColumns, PhantomOptions, VolumeFormat};
use ct2cxr_cli::{expand_inputs, is_archive, Manifest, PipelineConfig};

#[derive(Parser)]
#[command(name = "ct2cxr", version, about = "CT to pseudo-radiograph projection and anatomical analysis")]
struct Cli {
    /// TOML pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ViewArg {
    Frontal,
    Lateral,
    Both,
}

impl ViewArg {
    fn views(self) -> Vec<View> {
        match self {
            ViewArg::Frontal => vec![View::Frontal],
            ViewArg::Lateral => vec![View::Lateral],
            ViewArg::Both => View::BOTH.to_vec(),
        }
    }
}

#[derive(Args)]
struct Io {
    /// Input files or directories.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    NiiGz,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Render pseudo-radiographs and project label volumes.
    Project {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "both")]
        view: ViewArg,
    },
    /// Add derived anatomical regions to mask archives.
    DeriveRegions {
        #[command(flatten)]
        io: Io,
    },
    /// Cohort statistics and plausibility checks over mask archives.
    Qa {
        #[command(flatten)]
        io: Io,
        /// Copy passing archives to <out>/filtered.
        #[arg(long)]
        filter: bool,
        /// Reference statistics (class_stats_<view>.json) from an earlier run.
        #[arg(long, num_args = 1..)]
        stats: Vec<PathBuf>,
    },
    /// Cardiothoracic ratio and spine-center distance per archive.
    Biomarkers {
        #[command(flatten)]
        io: Io,
    },
    /// Compare predicted archives with reference archives of the same name.
    Evaluate {
        /// Predicted archives or directories
        #[arg(long, required = true, num_args = 1..)]
        pred: Vec<PathBuf>,
        /// Reference archives or directories
        #[arg(long, required = true, num_args = 1..)]
        gt: Vec<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// t-test and ROC of a biomarker against a binary label.
    Cohort {
        /// CSV table, e.g. biomarkers.csv joined with labels
        table: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "ctr")]
        value_column: String,
        #[arg(long, default_value = "label")]
        label_column: String,
        #[arg(long, default_value = "image_id")]
        id_column: String,
        #[arg(long)]
        sex_column: Option<String>,
        #[arg(long)]
        age_column: Option<String>,
        /// Label text counted as positive.
        #[arg(long)]
        positive: Option<String>,
    },
    /// Write synthetic chest CT volumes with labels.
    Phantom {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Number of volumes
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Cube side in voxels
        #[arg(long, default_value_t = 128)]
        size: usize,
        /// Phantom spec JSON to start from.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Heart half-width in voxels
        #[arg(long)]
        heart_half_width: Option<f64>,
        /// Heart half-width increment per volume
        #[arg(long, default_value_t = 0.0)]
        heart_step: f64,
        /// Spine lateral sine amplitude in voxels
        #[arg(long, default_value_t = 0.0)]
        scoliosis: f64,
        /// Gaussian noise standard deviation in HU
        #[arg(long, default_value_t = 0.0)]
        noise_hu: f32,
        /// Noise seed of the first volume
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Add a scanner table below the body
        #[arg(long)]
        table: bool,
        #[arg(long, value_enum, default_value = "nii-gz")]
        format: FormatArg,
        #[arg(long, default_value = "phantom")]
        prefix: String,
    },
}

fn load_stats(paths: &[PathBuf]) -> anyhow::Result<BTreeMap<View, ClassStats>> {
    let mut out = BTreeMap::new();
    for p in paths {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let view = if name.contains("lateral") { View::Lateral } else { View::Frontal };
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        out.insert(
            view,
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?,
        );
    }
    Ok(out)
}

fn archives(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    expand_inputs(paths, is_archive)
}

fn summarize(m: &Manifest, out: &Path) -> ExitCode {
    let failed = m.failures();
    log::info!(
        "{}: {} items, {failed} failed; manifest in {}",
        m.command,
        m.items.len(),
        out.display()
    );
    if failed > 0 {
        eprintln!(
            "{failed} of {} items failed; see {}",
            m.items.len(),
            out.join("manifest.json").display()
        );
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    cfg.validate()?;
    Ok(match cli.command {
        Command::Project { io, view } => {
            let inputs = expand_inputs(&io.inputs, |p| is_volume_path(p) && !p.ends_with("manifest.json"))?;
            summarize(&commands::project(&cfg, &inputs, &io.out, &view.views())?, &io.out)
        }
        Command::DeriveRegions { io } => summarize(&commands::derive_regions_cmd(&cfg, &archives(&io.inputs)?, &io.out)?, &io.out),
        Command::Qa { io, filter, stats } => {
            let reference = if stats.is_empty() { None } else { Some(load_stats(&stats)?) };
            let outcome = commands::qa(&cfg, &archives(&io.inputs)?, &io.out, filter, reference.as_ref())?;
            let failed = outcome.reports.iter().flatten().filter(|r| !r.passed()).count();
            println!("{} checked, {failed} failed plausibility", outcome.reports.iter().flatten().count());
            summarize(&outcome.manifest, &io.out)
        }
        Command::Biomarkers { io } => summarize(&commands::biomarkers(&cfg, &archives(&io.inputs)?, &io.out)?, &io.out),
        Command::Evaluate { pred, gt, out } => summarize(&commands::evaluate(&cfg, &archives(&pred)?, &archives(&gt)?, &out)?, &out),
        Command::Cohort {
            table,
            out,
            value_column,
            label_column,
            id_column,
            sex_column,
            age_column,
            positive,
        } => {
            let cols = CohortColumns {
                id: id_column,
                value: value_column,
                label: label_column,
                sex: sex_column,
                age_group: age_column,
                positive,
            };
            let (m, report) = commands::cohort(&cfg, &table, &cols, &out)?;
            println!(
                "n_pos {} n_neg {}: t = {:.3}, p = {:.3e}, auc = {:.4}",
                report.n_pos, report.n_neg, report.t_test.t, report.t_test.p, report.auc
            );
            summarize(&m, &out)
        }
        Command::Phantom {
            out,
            count,
            size,
            spec,
            heart_half_width,
            heart_step,
            scoliosis,
            noise_hu,
            seed,
            table,
            format,
            prefix,
        } => {
            let spec = spec
                .map(|p| -> anyhow::Result<_> {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    Ok(serde_json::from_str(&text)?)
                })
                .transpose()?;
            let opts = PhantomOptions {
                count,
                size,
                spec,
                heart_half_width,
                heart_step,
                scoliosis_amplitude: scoliosis,
                noise_hu,
                seed,
                table,
                format: match format {
                    FormatArg::NiiGz => VolumeFormat::NiftiGz,
                    FormatArg::Json => VolumeFormat::Native,
                },
                prefix,
            };
            summarize(&commands::phantom(&cfg, &opts, &out)?, &out)
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
