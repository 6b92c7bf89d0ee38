//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
//! error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::ingest::{load_donor_dataset, load_person_dataset, LoadOptions};
use crate::metrics::{evaluate, EvalSet, Protocol};
use crate::pipeline::{stats, synthesize, SynthesisConfig, SynthesisManifest, MANIFEST_FILE};
use crate::pose::{Bins, DEFAULT_BIN};
use crate::preview::{parse_grid, render_preview, SheetLayout};
use crate::synthetic::KEYPOINTS_FILE;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "posepaste",
    version,
    about = "Pose-guided copy-paste synthesis for person re-identification datasets"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Composite a donor object onto every pedestrian image.
    Synthesize(SynthesizeArgs),
    /// Summarize a synthesis manifest.
    Stats(StatsArgs),
    /// Render a contact sheet of (original, composite) pairs.
    Preview(PreviewArgs),
    /// Rank-k and mAP from a distance matrix or embeddings.
    Eval(EvalArgs),
}

fn positive(text: &str) -> std::result::Result<f64, String> {
    let v: f64 = text.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bin must be positive, got {v}"))
    }
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Pedestrian image directory (Market1501 file naming).
    #[arg(long)]
    pub persons: PathBuf,
    /// Donor image directory.
    #[arg(long)]
    pub donors: PathBuf,
    /// Pedestrian keypoint file [default: <persons>/keypoints.json].
    #[arg(long)]
    pub keypoints: Option<PathBuf>,
    /// Donor keypoint file [default: <donors>/keypoints.json].
    #[arg(long)]
    pub donor_keypoints: Option<PathBuf>,
    /// Directory holding <stem>.mask.png donor masks [default: <donors>].
    #[arg(long)]
    pub masks: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Random seed (required; there is no clock-based default).
    #[arg(long)]
    pub seed: u64,
    /// Quantization step for both slope (degrees) and torso height (pixels).
    #[arg(long, default_value_t = DEFAULT_BIN, value_parser = positive)]
    pub bin: f64,
    /// Override the slope step only.
    #[arg(long, value_parser = positive)]
    pub slope_bin: Option<f64>,
    /// Override the height step only.
    #[arg(long, value_parser = positive)]
    pub height_bin: Option<f64>,
    /// Disable torso-length scale correction (scale correction is on by default).
    #[arg(long)]
    pub no_scale_correct: bool,
    /// Do not copy originals into the output (originals are included by default).
    #[arg(long)]
    pub no_originals: bool,
    /// Abort on the first bad input instead of recording a skip.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads, 0 = all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Output directory of a synthesize run.
    #[arg(long)]
    pub out: PathBuf,
    /// Print JSON instead of tab-separated text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    /// Output directory of a synthesize run; the sheet is written there.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to find originals when they were not copied to the output.
    #[arg(long)]
    pub persons: Option<PathBuf>,
    /// Grid of pairs, columns x rows.
    #[arg(long, default_value = "4x3")]
    pub contact_sheet: String,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["dist", "embeddings"])))]
pub struct EvalArgs {
    /// Distance matrix file.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    /// Embedding file.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Evaluation protocol.
    #[arg(long, default_value = "market")]
    pub protocol: String,
    /// Ranks to report.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
    pub ranks: Vec<usize>,
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();

    let result = match &cli.command {
        Command::Synthesize(a) => cmd_synthesize(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::Preview(a) => cmd_preview(a, out),
        Command::Eval(a) => cmd_eval(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidParameter(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn cmd_synthesize(a: &SynthesizeArgs, out: &mut dyn Write) -> Result<()> {
    let opts = LoadOptions { strict: a.strict };
    let person_kp = a.keypoints.clone().unwrap_or_else(|| a.persons.join(KEYPOINTS_FILE));
    let donor_kp = a.donor_keypoints.clone().unwrap_or_else(|| a.donors.join(KEYPOINTS_FILE));
    let persons = load_person_dataset(&a.persons, &person_kp, opts)?;
    let donors = load_donor_dataset(&a.donors, &donor_kp, a.masks.as_deref(), opts)?;
    for s in persons.skipped.iter().chain(&donors.skipped) {
        log::info!("skipped input {}: {}", s.file, s.reason);
    }

    let cfg = SynthesisConfig {
        bins: Bins {
            slope: a.slope_bin.unwrap_or(a.bin),
            height: a.height_bin.unwrap_or(a.bin),
        },
        seed: a.seed,
        scale_correct: !a.no_scale_correct,
        include_originals: !a.no_originals,
        output_dir: a.out.clone(),
        strict: a.strict,
        jobs: a.jobs,
    };
    let manifest = synthesize(&persons.records, &donors.records, &cfg)?;
    let report = stats(&manifest);
    let _ = writeln!(
        out,
        "persons {} (skipped {}), donors {} (skipped {}), composites {}, skipped composites {}",
        persons.records.len(),
        persons.skipped.len(),
        donors.records.len(),
        donors.skipped.len(),
        report.composites,
        report.skips
    );
    let _ = writeln!(out, "manifest {}", a.out.join(MANIFEST_FILE).display());
    Ok(())
}

fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let manifest = SynthesisManifest::load(a.out.join(MANIFEST_FILE))?;
    let report = stats(&manifest);
    let text = if a.json { report.to_json() + "\n" } else { report.to_text() };
    let _ = write!(out, "{text}");
    Ok(())
}

fn cmd_preview(a: &PreviewArgs, out: &mut dyn Write) -> Result<()> {
    let (columns, rows) = parse_grid(&a.contact_sheet)?;
    let path = render_preview(&a.out, a.persons.as_deref(), SheetLayout::new(columns, rows))?;
    let _ = writeln!(out, "{}", path.display());
    Ok(())
}

fn load_eval(dist: Option<&Path>, embeddings: Option<&Path>) -> Result<EvalSet> {
    match (dist, embeddings) {
        (Some(d), None) => EvalSet::load_distances(d),
        (None, Some(e)) => EvalSet::load_embeddings(e),
        _ => Err(Error::InvalidParameter("give exactly one of --dist or --embeddings".into())),
    }
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let protocol: Protocol = a.protocol.parse()?;
    if a.ranks.contains(&0) {
        return Err(Error::InvalidParameter("ranks start at 1".into()));
    }
    let set = load_eval(a.dist.as_deref(), a.embeddings.as_deref())?;
    let report = evaluate(&set, protocol)?;
    for &k in &a.ranks {
        let _ = writeln!(out, "Rank-{k}\t{:.4}", report.rank(k));
    }
    let _ = writeln!(out, "mAP\t{:.4}", report.mean_ap);
    let _ = writeln!(
        out,
        "queries\t{} evaluated, {} without a match",
        report.valid_queries,
        report.excluded_queries.len()
    );
    Ok(())
}
