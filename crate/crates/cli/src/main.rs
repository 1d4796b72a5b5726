//! `fixatons` command-line tool: list collection contents, score model
//! predictions, compute statistics and render scanpaths.

mod eval;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fixatons::dataset::DatasetError;
use fixatons::mapgen::StatsError;
use fixatons::render::{self, RenderError, RenderOptions, Rendered};
use fixatons::{compute_statistics, AucParams, DatasetCatalog, TdeMode};

use crate::eval::{evaluate, render_report, EvalSettings, Metric, ReportFormat};

#[derive(Parser)]
#[command(
    name = "fixatons",
    version,
    about = "Scanpath and saliency evaluation over fixation collections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RootArg {
    /// Collection root directory
    #[arg(env = "FIXATONS_ROOT")]
    root: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// List datasets, stimuli of a dataset, or subjects of a stimulus
    List {
        #[command(flatten)]
        root: RootArg,
        dataset: Option<String>,
        stimulus: Option<String>,
    },
    /// Score model predictions against human data
    Eval(EvalArgs),
    /// Fixation rate and mean saccade length
    Stats {
        #[command(flatten)]
        root: RootArg,
        dataset: Option<String>,
        /// Print JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Render a scanpath overlay, animation frames or a map panel
    Render(RenderArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    root: RootArg,
    dataset: String,
    /// Directory holding SCANPATHS/ and/or SALIENCY_MAPS/ of the model
    #[arg(long)]
    predictions: PathBuf,
    /// Comma-separated metric names (default: all)
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<Metric>,
    /// Report path; `.json` selects JSON, anything else CSV
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
    /// Seed of the AUC tie-breaking jitter
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid divisions per axis for string-edit
    #[arg(long, default_value_t = 5)]
    grid_n: usize,
    #[arg(long, default_value_t = 1.0)]
    substitution_cost: f64,
    /// Embedding dimension for tde
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Use the Hausdorff aggregation for tde instead of the mean
    #[arg(long)]
    hausdorff: bool,
    /// Trim scanpaths to equal length for the Euclidean distance
    #[arg(long)]
    truncate: bool,
    /// Disable AUC jitter
    #[arg(long)]
    no_jitter: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    root: RootArg,
    dataset: String,
    stimulus: String,
    /// Subject id; a seeded random subject when omitted
    #[arg(long)]
    subject: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write one PNG per fixation into the --out directory
    #[arg(long)]
    frames: bool,
    /// Longest side of the output in pixels (0 keeps the size)
    #[arg(long, default_value_t = 0)]
    max_dim: u32,
    #[arg(long)]
    no_numbers: bool,
    /// Render the stimulus/map panel instead of a scanpath
    #[arg(long)]
    map: bool,
    /// Leave the saliency map out of the panel
    #[arg(long)]
    no_saliency: bool,
    /// Add the fixation map to the panel
    #[arg(long)]
    fixmap: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Failure with its process exit code: 2 for usage/not-found, 1 otherwise.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn internal(message: impl fmt::Display) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        let code = match e {
            DatasetError::RootNotFound(_)
            | DatasetError::UnknownDataset(_)
            | DatasetError::UnknownStimulus { .. }
            | DatasetError::UnknownSubject { .. }
            | DatasetError::NoScanpaths(_)
            | DatasetError::MissingMap { .. } => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Dataset(d) => d.into(),
            StatsError::NoData => Self {
                code: 2,
                message: e.to_string(),
            },
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        let code = match e {
            RenderError::NothingToShow => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn cmd_list(root: &RootArg, dataset: Option<&str>, stimulus: Option<&str>) -> Result<(), CliError> {
    let catalog = DatasetCatalog::load(&root.root)?;
    let lines = match (dataset, stimulus) {
        (None, _) => catalog.list_datasets(),
        (Some(d), None) => catalog.list_stimuli(d)?,
        (Some(d), Some(s)) => catalog.list_subjects(d, s)?,
    };
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let catalog = DatasetCatalog::load(&args.root.root)?;
    let settings = EvalSettings {
        metrics: if args.metrics.is_empty() {
            Metric::ALL.to_vec()
        } else {
            args.metrics.clone()
        },
        grid_n: args.grid_n,
        substitution_cost: args.substitution_cost,
        k: args.k,
        mode: if args.hausdorff {
            TdeMode::Hausdorff
        } else {
            TdeMode::MeanMinimal
        },
        truncate: args.truncate,
        auc: AucParams {
            jitter: !args.no_jitter,
            seed: args.seed,
            ..AucParams::default()
        },
    };
    let rows = evaluate(&catalog, &args.dataset, &args.predictions, &settings)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!(
            "warning: {failed} of {} evaluations failed, see the error column",
            rows.len()
        );
    }
    let format = args
        .format
        .unwrap_or_else(|| ReportFormat::from_path(&args.out));
    let bytes = render_report(&rows, format).map_err(CliError::internal)?;
    std::fs::write(&args.out, bytes)
        .map_err(|e| CliError::internal(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}

fn cmd_stats(root: &RootArg, dataset: Option<&str>, json: bool) -> Result<(), CliError> {
    let catalog = DatasetCatalog::load(&root.root)?;
    let stats = compute_statistics(&catalog, dataset)?;
    if json {
        let value = serde_json::json!({
            "scope": dataset.unwrap_or("*"),
            "fixations_per_second": stats.fixations_per_second,
            "avg_saccade_length": stats.avg_saccade_length,
            "n_scanpaths": stats.n_scanpaths,
            "n_fixations": stats.n_fixations,
            "n_saccades": stats.n_saccades,
            "viewing_time": stats.viewing_time,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&value).map_err(CliError::internal)?
        );
    } else {
        println!("fixations_per_second\t{}", stats.fixations_per_second);
        println!("avg_saccade_length\t{}", stats.avg_saccade_length);
        println!("n_scanpaths\t{}", stats.n_scanpaths);
        println!("n_fixations\t{}", stats.n_fixations);
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Result<(), CliError> {
    let catalog = DatasetCatalog::load(&args.root.root)?;
    let stimulus = catalog.get_stimulus(&args.dataset, &args.stimulus)?;
    let opts = RenderOptions {
        put_numbers: !args.no_numbers,
        plot_max_dim: args.max_dim,
        as_frames: args.frames,
        ..RenderOptions::default()
    };
    if args.map {
        let saliency = if args.no_saliency {
            None
        } else {
            Some(catalog.get_saliency_map(&args.dataset, &args.stimulus)?)
        };
        let fixmap = if args.fixmap {
            Some(catalog.get_fixation_map(&args.dataset, &args.stimulus)?)
        } else {
            None
        };
        let panel = render::render_map_panel(&stimulus, saliency.as_ref(), fixmap.as_ref(), &opts)?;
        render::save_png(&panel, &args.out)?;
        return Ok(());
    }
    let scanpath = catalog.get_scanpath(
        &args.dataset,
        &args.stimulus,
        args.subject.as_deref(),
        args.seed,
    )?;
    match render::render_scanpath(&stimulus, &scanpath, &opts)? {
        Rendered::Image(img) => render::save_png(&img, &args.out)?,
        Rendered::Frames(frames) => {
            render::save_frames(&frames, &args.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List {
            root,
            dataset,
            stimulus,
        } => cmd_list(root, dataset.as_deref(), stimulus.as_deref()),
        Command::Eval(args) => cmd_eval(args),
        Command::Stats {
            root,
            dataset,
            json,
        } => cmd_stats(root, dataset.as_deref(), *json),
        Command::Render(args) => cmd_render(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
