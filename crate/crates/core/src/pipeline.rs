//! Clip-level orchestration: masks -> offsets -> centered -> smoothed ->
//! events, and the files written for each run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{
    detect_events, events_to_jsonl, Direction, EventKind, LaneEvent, PeakConfig,
};
use crate::error::{Error, Result};
use crate::mask_io::{load_sequence, Mask, RoiMask};
use crate::tracking::{
    center_series, compute_offsets, kalman_smooth, offsets_to_csv, Centering, KalmanConfig,
    OffsetConfig, OffsetSeries, Stage,
};

pub const OFFSETS_FILE: &str = "offsets.csv";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub offsets: OffsetConfig,
    pub centering: Centering,
    /// `max_gap_frames` is replaced by one second of frames at the clip's fps.
    pub kalman: KalmanConfig,
    pub peaks: PeakConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.kalman.validate()?;
        self.peaks.validate()?;
        if self.offsets.max_points < 3 {
            return Err(Error::InvalidConfig("max_points must be at least 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub fps: f64,
    pub raw: OffsetSeries,
    pub centered: OffsetSeries,
    pub smoothed: OffsetSeries,
    pub events: Vec<LaneEvent>,
}

/// Runs the tracker and classifier over an in-memory clip.
pub fn process_masks(
    masks: &[Mask],
    roi: Option<&RoiMask>,
    fps: f64,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(Error::InvalidConfig("fps must be positive".into()));
    }
    let raw = compute_offsets(masks, roi, &cfg.offsets)?;
    let (centered, smoothed) = match center_series(&raw, cfg.centering) {
        Ok(centered) => {
            let smoothed = kalman_smooth(&centered, &cfg.kalman.with_fps(fps))?;
            (centered, smoothed)
        }
        // Nothing detected anywhere in the clip: no offsets, no events.
        Err(Error::NoValidSamples) => (
            OffsetSeries::new(raw.samples().to_vec(), Stage::Centered)?,
            OffsetSeries::new(raw.samples().to_vec(), Stage::Smoothed)?,
        ),
        Err(e) => return Err(e),
    };
    let events = detect_events(&smoothed, &cfg.peaks)?;
    Ok(PipelineOutput {
        fps,
        raw,
        centered,
        smoothed,
        events,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTally {
    pub left_changes: usize,
    pub right_changes: usize,
    pub left_incursions: usize,
    pub right_incursions: usize,
}

impl EventTally {
    pub fn from_events(events: &[LaneEvent]) -> Self {
        let mut t = Self::default();
        for e in events {
            match (e.kind, e.direction) {
                (EventKind::Change, Direction::Left) => t.left_changes += 1,
                (EventKind::Change, Direction::Right) => t.right_changes += 1,
                (EventKind::Incursion, Direction::Left) => t.left_incursions += 1,
                (EventKind::Incursion, Direction::Right) => t.right_incursions += 1,
                (_, Direction::None) => {}
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub frames: usize,
    pub valid_frames: usize,
    pub fps: f64,
    pub width: usize,
    pub height: usize,
    pub events: EventTally,
    pub config: PipelineConfig,
}

/// Paths of the artifacts of one run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub offsets: PathBuf,
    pub events: PathBuf,
    pub summary: PathBuf,
}

/// Loads the clip behind `manifest`, runs the pipeline and writes
/// `offsets.csv`, `events.jsonl` and `summary.json` into `out_dir`.
pub fn run_pipeline(
    manifest: &Path,
    roi: Option<&Path>,
    out_dir: &Path,
    cfg: &PipelineConfig,
) -> Result<(RunSummary, RunArtifacts)> {
    cfg.validate()?;
    let (man, masks) = load_sequence(manifest)?;
    if masks.is_empty() {
        return Err(Error::EmptySequence);
    }
    let roi = roi.map(RoiMask::load).transpose()?;
    let out = process_masks(&masks, roi.as_ref(), man.fps, cfg)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let artifacts = RunArtifacts {
        offsets: out_dir.join(OFFSETS_FILE),
        events: out_dir.join(EVENTS_FILE),
        summary: out_dir.join(SUMMARY_FILE),
    };
    let summary = RunSummary {
        frames: masks.len(),
        valid_frames: out.raw.samples().iter().filter(|s| s.is_valid()).count(),
        fps: man.fps,
        width: man.width,
        height: man.height,
        events: EventTally::from_events(&out.events),
        config: PipelineConfig {
            kalman: cfg.kalman.with_fps(man.fps),
            ..cfg.clone()
        },
    };
    let write = |p: &Path, s: String| fs::write(p, s).map_err(|e| Error::io(p, e));
    write(
        &artifacts.offsets,
        offsets_to_csv(&out.raw, &out.centered, &out.smoothed)?,
    )?;
    write(&artifacts.events, events_to_jsonl(&out.events, man.fps))?;
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    write(&artifacts.summary, json)?;
    Ok((summary, artifacts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_empty_clip_yields_no_events() {
        let masks: Vec<Mask> = (0..30)
            .map(|i| Mask::empty(32, 32).unwrap().with_frame(i, 25.0))
            .collect();
        let out = process_masks(&masks, None, 25.0, &PipelineConfig::default()).unwrap();
        assert!(out.events.is_empty());
        assert!(out.smoothed.values().iter().all(Option::is_none));
    }

    #[test]
    fn rejects_bad_fps_and_config() {
        let masks = vec![Mask::empty(32, 32).unwrap()];
        assert!(process_masks(&masks, None, 0.0, &PipelineConfig::default()).is_err());
        let mut cfg = PipelineConfig::default();
        cfg.peaks.min_prominence = -1.0;
        assert!(process_masks(&masks, None, 25.0, &cfg).is_err());
    }

    #[test]
    fn tally() {
        let e = |kind, direction| LaneEvent {
            kind,
            direction,
            frame_index: 0,
            peak_frames: (0, None),
            amplitudes: (1.0, None),
        };
        let t = EventTally::from_events(&[
            e(EventKind::Change, Direction::Left),
            e(EventKind::Change, Direction::Left),
            e(EventKind::Incursion, Direction::Right),
        ]);
        assert_eq!(
            (t.left_changes, t.right_incursions, t.right_changes),
            (2, 1, 0)
        );
    }
}
