//! Pipeline and evaluation settings: defaults, then a flat `key = value`
//! config file, then environment variables and command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::builder::BoolishValueParser;
use clap::Args;
use lanedep::evaluation::EvalConfig;
use lanedep::pipeline::PipelineConfig;
use lanedep::tracking::{Centering, PointSampling};

#[derive(Debug, Clone, Default, Args)]
pub struct Tuning {
    /// Flat `key = value` settings file.
    #[arg(long, env = "LANEDEP_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Smoother look-ahead, frames.
    #[arg(long, env = "LANEDEP_LAG")]
    pub lag: Option<usize>,
    /// Minimum peak prominence, pixels.
    #[arg(long, env = "LANEDEP_PROMINENCE")]
    pub prominence: Option<f64>,
    /// Maximum peak-to-trough spacing of a lane change, frames.
    #[arg(long, env = "LANEDEP_MAX_PAIR_DISTANCE")]
    pub max_pair_distance: Option<u64>,
    /// IoU threshold(s) for mask scoring, comma separated.
    #[arg(long, env = "LANEDEP_IOU_THRESHOLD", value_delimiter = ',')]
    pub iou_threshold: Option<Vec<f64>>,
    /// Swap the left/right convention.
    #[arg(
        long,
        env = "LANEDEP_INVERT_DIRECTION",
        num_args = 0..=1,
        default_missing_value = "true",
        value_parser = BoolishValueParser::new(),
    )]
    pub invert_direction: Option<bool>,
    /// Event matching window, frames.
    #[arg(long, env = "LANEDEP_MATCH_WINDOW")]
    pub match_window: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub pipeline: PipelineConfig,
    pub eval: EvalConfig,
}

impl Settings {
    pub fn resolve(tuning: &Tuning) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(path) = &tuning.config {
            s.apply_file(path)?;
        }
        let p = &mut s.pipeline;
        if let Some(v) = tuning.lag {
            p.kalman.lag = v;
        }
        if let Some(v) = tuning.prominence {
            p.peaks.min_prominence = v;
        }
        if let Some(v) = tuning.max_pair_distance {
            p.peaks.max_pair_distance = v;
        }
        if let Some(v) = tuning.invert_direction {
            p.peaks.invert_direction = v;
        }
        if let Some(v) = &tuning.iou_threshold {
            s.eval.iou_thresholds = v.clone();
        }
        if let Some(v) = tuning.match_window {
            s.eval.event_match_window = v;
        }
        s.pipeline.validate()?;
        s.eval.validate()?;
        Ok(s)
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_text(&text)
            .with_context(|| format!("in {}", path.display()))
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", i + 1);
            };
            self.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| anyhow::anyhow!("bad value `{v}` for `{key}`"))
        }
        let p = &mut self.pipeline;
        match key {
            "lag" => p.kalman.lag = num(key, value)?,
            "process_noise" => p.kalman.process_noise = num(key, value)?,
            "measurement_noise" => p.kalman.measurement_noise = num(key, value)?,
            "prominence" | "min_prominence" => p.peaks.min_prominence = num(key, value)?,
            "min_peak_distance" => p.peaks.min_peak_distance = num(key, value)?,
            "max_pair_distance" => p.peaks.max_pair_distance = num(key, value)?,
            "invert_direction" => p.peaks.invert_direction = num(key, value)?,
            "shallowness_ratio" => {
                p.peaks.shallowness_ratio = match value {
                    "none" | "off" => None,
                    v => Some(num(key, v)?),
                }
            }
            "centering_window" => {
                p.centering = match num::<u64>(key, value)? {
                    0 => Centering::Global,
                    window => Centering::Sliding { window },
                }
            }
            "max_points" => p.offsets.max_points = num(key, value)?,
            "sampling" => {
                p.offsets.sampling = match value {
                    "row-extremes" => PointSampling::RowExtremes,
                    "stride" => PointSampling::Stride,
                    _ => bail!("sampling must be `row-extremes` or `stride`"),
                }
            }
            "iou_threshold" | "iou_thresholds" => {
                self.eval.iou_thresholds = value
                    .split(',')
                    .map(|t| num(key, t.trim()))
                    .collect::<Result<_>>()?
            }
            "event_match_window" => self.eval.event_match_window = num(key, value)?,
            _ => bail!("unknown key `{key}`"),
        }
        Ok(())
    }
}
