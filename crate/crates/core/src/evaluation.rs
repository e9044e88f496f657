//! Mask-level IoU / mAP and event-level confusion counts.
//!
//! `map_score` averages TP / (TP + FP + FN) over IoU thresholds, with one lane
//! object per frame. This is a Jaccard-style score, not the ranked
//! precision-recall AP used by COCO-style detectors.

use std::ops::AddAssign;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{Direction, LaneEvent};
use crate::error::{Error, Result};
use crate::mask_io::Mask;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    #[serde(default)]
    pub tp: u64,
    #[serde(default)]
    pub fp: u64,
    #[serde(default, rename = "fn")]
    pub fn_: u64,
    /// Tracked for reporting; no metric here uses it.
    #[serde(default)]
    pub tn: u64,
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
        self.tn += rhs.tn;
    }
}

/// TP / (TP + FN).
pub fn sensitivity(counts: &ConfusionCounts) -> Result<f64> {
    let denom = counts.tp + counts.fn_;
    if denom == 0 {
        return Err(Error::UndefinedMetric("sensitivity needs tp + fn > 0"));
    }
    Ok(counts.tp as f64 / denom as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub iou_thresholds: Vec<f64>,
    /// Maximum anchor-frame distance for a predicted event to match a truth
    /// event.
    pub event_match_window: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_thresholds: vec![0.5],
            event_match_window: 50,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iou_thresholds.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one IoU threshold is required".into(),
            ));
        }
        if self.iou_thresholds.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidConfig(
                "IoU thresholds must lie in (0, 1]".into(),
            ));
        }
        if self.iou_thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "IoU thresholds must be sorted and unique".into(),
            ));
        }
        Ok(())
    }
}

/// |A ∩ B| / |A ∪ B| over lane pixels. Two empty masks score 1.
pub fn iou(a: &Mask, b: &Mask) -> Result<f64> {
    a.same_shape(b.width(), b.height())?;
    let (mut inter, mut union) = (0u64, 0u64);
    for (&x, &y) in a.pixels().iter().zip(b.pixels()) {
        inter += u64::from(x && y);
        union += u64::from(x || y);
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCounts {
    pub threshold: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskMetrics {
    pub frames: usize,
    pub thresholds: Vec<ThresholdCounts>,
    pub map: f64,
}

#[derive(Debug, Clone, Copy)]
enum FrameOutcome {
    BothEmpty,
    FalseAlarm,
    Missed,
    Overlap(f64),
}

/// Per-threshold TP/FP/FN and their mean ratio. A prediction whose IoU falls
/// below the threshold counts as one FP and one FN. A threshold with nothing
/// to count (every frame empty in both) scores 1.
pub fn mask_metrics(
    predictions: &[Mask],
    truths: &[Mask],
    cfg: &EvalConfig,
) -> Result<MaskMetrics> {
    cfg.validate()?;
    if predictions.len() != truths.len() {
        return Err(Error::FrameMismatch(format!(
            "{} predicted frames vs {} truth frames",
            predictions.len(),
            truths.len()
        )));
    }
    let outcomes = predictions
        .par_iter()
        .zip(truths)
        .map(|(p, t)| {
            if p.frame_index != t.frame_index {
                return Err(Error::FrameMismatch(format!(
                    "predicted frame {} aligned with truth frame {}",
                    p.frame_index, t.frame_index
                )));
            }
            Ok(match (p.is_empty(), t.is_empty()) {
                (true, true) => FrameOutcome::BothEmpty,
                (false, true) => FrameOutcome::FalseAlarm,
                (true, false) => FrameOutcome::Missed,
                (false, false) => FrameOutcome::Overlap(iou(p, t)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let thresholds: Vec<ThresholdCounts> = cfg
        .iou_thresholds
        .iter()
        .map(|&threshold| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for o in &outcomes {
                match *o {
                    FrameOutcome::BothEmpty => {}
                    FrameOutcome::FalseAlarm => fp += 1,
                    FrameOutcome::Missed => fn_ += 1,
                    FrameOutcome::Overlap(v) if v >= threshold => tp += 1,
                    FrameOutcome::Overlap(_) => {
                        fp += 1;
                        fn_ += 1;
                    }
                }
            }
            let denom = tp + fp + fn_;
            let score = if denom == 0 {
                1.0
            } else {
                tp as f64 / denom as f64
            };
            ThresholdCounts {
                threshold,
                tp,
                fp,
                fn_,
                score,
            }
        })
        .collect();
    let map = thresholds.iter().map(|t| t.score).sum::<f64>() / thresholds.len() as f64;
    Ok(MaskMetrics {
        frames: outcomes.len(),
        thresholds,
        map,
    })
}

pub fn map_score(predictions: &[Mask], truths: &[Mask], cfg: &EvalConfig) -> Result<f64> {
    Ok(mask_metrics(predictions, truths, cfg)?.map)
}

/// Confusion counts split by event direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventConfusion {
    #[serde(default)]
    pub left: ConfusionCounts,
    #[serde(default)]
    pub right: ConfusionCounts,
    #[serde(default)]
    pub none: ConfusionCounts,
}

impl EventConfusion {
    pub fn get_mut(&mut self, d: Direction) -> &mut ConfusionCounts {
        match d {
            Direction::Left => &mut self.left,
            Direction::Right => &mut self.right,
            Direction::None => &mut self.none,
        }
    }

    pub fn combined(&self) -> ConfusionCounts {
        let mut c = self.left;
        c += self.right;
        c += self.none;
        c
    }
}

impl AddAssign for EventConfusion {
    fn add_assign(&mut self, rhs: Self) {
        self.left += rhs.left;
        self.right += rhs.right;
        self.none += rhs.none;
    }
}

/// Greedy one-to-one matching in predicted order. A prediction matches the
/// nearest unmatched truth event of the same kind and direction within the
/// window. A direction with neither truth nor predicted events scores one TN.
pub fn match_events(
    predicted: &[LaneEvent],
    truth: &[LaneEvent],
    cfg: &EvalConfig,
) -> EventConfusion {
    let mut counts = EventConfusion::default();
    let mut matched = vec![false; truth.len()];
    for p in predicted {
        let best = truth
            .iter()
            .enumerate()
            .filter(|(j, t)| {
                !matched[*j]
                    && t.kind == p.kind
                    && t.direction == p.direction
                    && t.frame_index.abs_diff(p.frame_index) <= cfg.event_match_window
            })
            .min_by_key(|(j, t)| (t.frame_index.abs_diff(p.frame_index), *j))
            .map(|(j, _)| j);
        match best {
            Some(j) => {
                matched[j] = true;
                counts.get_mut(p.direction).tp += 1;
            }
            None => counts.get_mut(p.direction).fp += 1,
        }
    }
    for (t, m) in truth.iter().zip(&matched) {
        if !m {
            counts.get_mut(t.direction).fn_ += 1;
        }
    }
    for d in [Direction::Left, Direction::Right] {
        let present = predicted.iter().chain(truth).any(|e| e.direction == d);
        if !present {
            counts.get_mut(d).tn += 1;
        }
    }
    counts
}

// ---------------------------------------------------------------------------
// Report

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionRow {
    /// Truth events in this direction (TP + FN).
    pub crossing: u64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub sensitivity: Option<f64>,
}

impl From<ConfusionCounts> for DirectionRow {
    fn from(c: ConfusionCounts) -> Self {
        Self {
            crossing: c.tp + c.fn_,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            tn: c.tn,
            sensitivity: sensitivity(&c).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTable {
    pub left: DirectionRow,
    pub right: DirectionRow,
    pub combined: DirectionRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub masks: Option<MaskMetrics>,
    pub events: Option<EventTable>,
    /// Combined event sensitivity over left and right.
    pub sensitivity: Option<f64>,
}

impl EvalReport {
    pub fn new(masks: Option<MaskMetrics>, events: Option<EventConfusion>) -> Self {
        let events = events.map(|c| EventTable {
            left: c.left.into(),
            right: c.right.into(),
            combined: c.combined().into(),
        });
        let sensitivity = events.as_ref().and_then(|t| t.combined.sensitivity);
        Self {
            masks,
            events,
            sensitivity,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("evaluation report: {e}")))
    }
}

/// Parses a counts file: `{"left": {"tp":..,"fp":..,"fn":..}, "right": {...}}`.
pub fn confusion_from_json(text: &str) -> Result<EventConfusion> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("counts file: {e}")))
}
