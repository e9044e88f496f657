//! `lanedep`: lane-departure events from lane-mask sequences.

mod settings;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lanedep::classifier::events_from_jsonl;
use lanedep::evaluation::{
    confusion_from_json, mask_metrics, match_events, EvalReport, EventConfusion,
};
use lanedep::geometry::{point_line_distance, signed_center_offset, Line2D};
use lanedep::mask_io::{apply_roi, load_mask, load_sequence, RoiMask};
use lanedep::pipeline::run_pipeline;
use lanedep::synth::{generate, Preset, Scenario};
use lanedep::tracking::mask_hull;
use serde_json::json;

use settings::{Settings, Tuning};

#[derive(Debug, Parser)]
#[command(
    name = "lanedep",
    version,
    about = "Lane-departure event detection from lane segmentation masks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track a mask sequence and write offsets, events and a summary.
    Run(RunArgs),
    /// Score predicted masks and events against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic clip with ground truth.
    Synth(SynthArgs),
    /// Print the convex hull and centroid of one mask as JSON.
    Hull(HullArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Sequence manifest.
    #[arg(long, env = "LANEDEP_MANIFEST")]
    manifest: PathBuf,
    /// Region-of-interest mask (PGM).
    #[arg(long, env = "LANEDEP_ROI")]
    roi: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "LANEDEP_OUT")]
    out: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Predicted event log; repeat once per clip, paired in order with
    /// `--truth-events`.
    #[arg(long)]
    pred_events: Vec<PathBuf>,
    /// Ground-truth event log.
    #[arg(long)]
    truth_events: Vec<PathBuf>,
    /// Predicted mask sequence.
    #[arg(long, requires = "truth_manifest")]
    pred_manifest: Option<PathBuf>,
    /// Ground-truth mask sequence.
    #[arg(long, requires = "pred_manifest")]
    truth_manifest: Option<PathBuf>,
    /// Per-direction confusion counts (JSON) instead of event logs.
    #[arg(long, conflicts_with_all = ["pred_events", "truth_events"])]
    counts: Option<PathBuf>,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Scenario file (flat `key = value`).
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario: lane-keep, left-change, right-change,
    /// left-incursion, right-incursion.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long, env = "LANEDEP_SEED", default_value_t = 0)]
    seed: u64,
    /// Corner jitter sigma, pixels.
    #[arg(long)]
    jitter: Option<f64>,
    /// Per-frame dropout probability.
    #[arg(long)]
    dropout: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct HullArgs {
    /// Mask file (PGM).
    mask: PathBuf,
    #[arg(long)]
    roi: Option<PathBuf>,
    /// Output file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Hull(a) => cmd_hull(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let settings = Settings::resolve(&a.tuning)?;
    let (summary, artifacts) =
        run_pipeline(&a.manifest, a.roi.as_deref(), &a.out, &settings.pipeline)?;
    let t = summary.events;
    println!(
        "{} frames ({} valid): {} left / {} right changes, {} left / {} right incursions",
        summary.frames,
        summary.valid_frames,
        t.left_changes,
        t.right_changes,
        t.left_incursions,
        t.right_incursions
    );
    println!("events written to {}", artifacts.events.display());
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let settings = Settings::resolve(&a.tuning)?;
    if a.pred_events.len() != a.truth_events.len() {
        bail!(
            "{} prediction logs but {} truth logs",
            a.pred_events.len(),
            a.truth_events.len()
        );
    }
    let events = if let Some(path) = &a.counts {
        Some(confusion_from_json(&read(path)?).with_context(|| format!("in {}", path.display()))?)
    } else if !a.pred_events.is_empty() {
        let mut total = EventConfusion::default();
        for (p, t) in a.pred_events.iter().zip(&a.truth_events) {
            let pred =
                events_from_jsonl(&read(p)?).with_context(|| format!("in {}", p.display()))?;
            let truth =
                events_from_jsonl(&read(t)?).with_context(|| format!("in {}", t.display()))?;
            total += match_events(&pred, &truth, &settings.eval);
        }
        Some(total)
    } else {
        None
    };
    let masks = match (&a.pred_manifest, &a.truth_manifest) {
        (Some(p), Some(t)) => {
            let (_, pred) = load_sequence(p).with_context(|| format!("loading {}", p.display()))?;
            let (_, truth) =
                load_sequence(t).with_context(|| format!("loading {}", t.display()))?;
            Some(mask_metrics(&pred, &truth, &settings.eval)?)
        }
        _ => None,
    };
    if events.is_none() && masks.is_none() {
        bail!("nothing to evaluate: pass event logs, manifests or --counts");
    }
    let report = EvalReport::new(masks, events);
    write_or_print(a.out.as_deref(), &report.to_json())?;
    if a.out.is_some() {
        if let Some(m) = &report.masks {
            println!("mAP {:.4}", m.map);
        }
        if let Some(s) = report.sensitivity {
            println!("sensitivity {s:.4}");
        }
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let mut scenario = match (&a.scenario, a.preset) {
        (Some(path), _) => Scenario::parse_config(&read(path)?)
            .with_context(|| format!("in {}", path.display()))?,
        (None, Some(p)) => p.scenario(),
        (None, None) => Preset::LaneKeep.scenario(),
    };
    if let Some(j) = a.jitter {
        scenario.noise.jitter_sigma = j;
    }
    if let Some(d) = a.dropout {
        scenario.noise.dropout_prob = d;
    }
    let clip = generate(&scenario, a.seed)?;
    let manifest = clip.write_to(&a.out)?;
    println!("{}", manifest.display());
    Ok(())
}

fn cmd_hull(a: HullArgs) -> Result<()> {
    let mut mask = load_mask(&a.mask)?;
    if let Some(roi) = &a.roi {
        mask = apply_roi(&mask, &RoiMask::load(roi)?)?;
    }
    let (w, h) = (mask.width(), mask.height());
    let hull = mask_hull(&mask, &Default::default())?;
    let value = match hull {
        Some((poly, c)) => json!({
            "width": w,
            "height": h,
            "lane_pixels": mask.lane_count(),
            "vertices": poly.vertices().iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
            "area": poly.area(),
            "centroid": [c.x, c.y],
            "vertical_offset": signed_center_offset(c, w as f64 / 2.0),
            "horizontal_offset": point_line_distance(&Line2D::horizontal(h as f64), c),
        }),
        None => json!({
            "width": w,
            "height": h,
            "lane_pixels": mask.lane_count(),
            "vertices": null,
            "area": null,
            "centroid": null,
            "vertical_offset": null,
            "horizontal_offset": null,
        }),
    };
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    write_or_print(a.out.as_deref(), &text)
}
