//! Peak/trough extraction on the smoothed offset series and classification
//! into lane changes and incursions.
//!
//! A departure shows up as an excursion away from zero that is cut short
//! when the tracked lane region snaps to the newly entered lane, leaving an
//! excursion of opposite sign that decays back to zero. With the default sign
//! convention (positive offset = lane centroid right of the image center)
//! peak-then-trough is a left change and trough-then-peak a right change. A
//! lone excursion without the opposite-sign follow-up is an incursion.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask_io::frame_timestamp_ms;
use crate::tracking::{OffsetSeries, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakConfig {
    pub min_prominence: f64,
    /// Minimum spacing between two peaks (or two troughs), frames.
    pub min_peak_distance: u64,
    /// Maximum spacing between the two extrema of a change, frames.
    pub max_pair_distance: u64,
    /// Swap the left/right convention.
    pub invert_direction: bool,
    /// Incursions must stay below this fraction of the median change
    /// amplitude when the clip has at least two changes. `None` disables.
    pub shallowness_ratio: Option<f64>,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self {
            min_prominence: 10.0,
            min_peak_distance: 12,
            max_pair_distance: 75,
            invert_direction: false,
            shallowness_ratio: Some(0.6),
        }
    }
}

impl PeakConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_prominence > 0.0 && self.min_prominence.is_finite()) {
            return Err(Error::InvalidConfig(
                "min_prominence must be positive".into(),
            ));
        }
        if self.min_peak_distance == 0 || self.max_pair_distance == 0 {
            return Err(Error::InvalidConfig(
                "peak distances must be positive".into(),
            ));
        }
        if let Some(r) = self.shallowness_ratio {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidConfig(
                    "shallowness ratio must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Peak,
    Trough,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub frame_index: u64,
    pub amplitude: f64,
    pub kind: ExtremumKind,
    pub prominence: f64,
    /// Index of the contiguous run of estimates the extremum was found in.
    pub segment: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Change,
    Incursion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
    None,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
            Direction::None => Direction::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneEvent {
    pub kind: EventKind,
    pub direction: Direction,
    /// Anchor frame: the first extremum of the event.
    pub frame_index: u64,
    pub peak_frames: (u64, Option<u64>),
    pub amplitudes: (f64, Option<f64>),
}

impl LaneEvent {
    pub fn mirrored(&self) -> Self {
        Self {
            direction: self.direction.flipped(),
            amplitudes: (-self.amplitudes.0, self.amplitudes.1.map(|a| -a)),
            ..*self
        }
    }
}

/// Pointwise negation.
pub fn mirror_series(series: &OffsetSeries) -> Result<OffsetSeries> {
    series.expect_stage(Stage::Smoothed)?;
    let negated: Vec<Option<f64>> = series.values().into_iter().map(|v| v.map(|x| -x)).collect();
    let samples = series
        .samples()
        .iter()
        .zip(negated)
        .map(|(s, v)| crate::tracking::OffsetSample {
            vertical_offset: v,
            ..*s
        })
        .collect();
    OffsetSeries::new(samples, Stage::Smoothed)
}

/// Local maxima of `x` (plateaus resolve to their middle sample, edges are
/// never maxima), each with its topographic prominence.
fn local_maxima(x: &[f64]) -> Vec<(usize, f64)> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead + 1 < n && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                let peak = (i + ahead - 1) / 2;
                out.push((peak, prominence(x, peak)));
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    out
}

fn prominence(x: &[f64], peak: usize) -> f64 {
    let h = x[peak];
    let mut left_min = h;
    for &v in x[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Keeps the tallest candidates first and drops any closer than
/// `min_distance` frames to an already kept one.
fn enforce_distance(mut cands: Vec<(u64, f64, f64)>, min_distance: u64) -> Vec<(u64, f64, f64)> {
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| cands[b].1.total_cmp(&cands[a].1).then(a.cmp(&b)));
    let mut keep = vec![false; cands.len()];
    let mut kept_frames: Vec<u64> = Vec::new();
    for i in order {
        let f = cands[i].0;
        if kept_frames.iter().all(|&k| k.abs_diff(f) >= min_distance) {
            keep[i] = true;
            kept_frames.push(f);
        }
    }
    let mut k = keep.into_iter();
    cands.retain(|_| k.next().unwrap());
    cands
}

/// Peaks of the series and of its mirror (troughs) with prominence at least
/// `min_prominence`, sorted by frame. Contiguous runs of estimates are
/// searched independently.
pub fn detect_peaks(series: &OffsetSeries, cfg: &PeakConfig) -> Result<Vec<Extremum>> {
    series.expect_stage(Stage::Smoothed)?;
    cfg.validate()?;
    let samples = series.samples();
    let mut out = Vec::new();
    let mut segment = 0;
    let mut i = 0;
    while i < samples.len() {
        if samples[i].vertical_offset.is_none() {
            i += 1;
            continue;
        }
        let start = i;
        while i < samples.len() && samples[i].vertical_offset.is_some() {
            i += 1;
        }
        let run = &samples[start..i];
        let values: Vec<f64> = run.iter().map(|s| s.vertical_offset.unwrap()).collect();
        for kind in [ExtremumKind::Peak, ExtremumKind::Trough] {
            let sign = match kind {
                ExtremumKind::Peak => 1.0,
                ExtremumKind::Trough => -1.0,
            };
            let signal: Vec<f64> = values.iter().map(|v| sign * v).collect();
            let cands: Vec<(u64, f64, f64)> = local_maxima(&signal)
                .into_iter()
                .filter(|&(idx, prom)| prom >= cfg.min_prominence && signal[idx] > 0.0)
                .map(|(idx, prom)| (run[idx].frame_index, signal[idx], prom))
                .collect();
            for (frame_index, height, prom) in enforce_distance(cands, cfg.min_peak_distance) {
                out.push(Extremum {
                    frame_index,
                    amplitude: sign * height,
                    kind,
                    prominence: prom,
                    segment,
                });
            }
        }
        segment += 1;
    }
    out.sort_by_key(|e| e.frame_index);
    Ok(out)
}

fn direction_of(kind: ExtremumKind, invert: bool) -> Direction {
    let d = match kind {
        ExtremumKind::Peak => Direction::Left,
        ExtremumKind::Trough => Direction::Right,
    };
    if invert {
        d.flipped()
    } else {
        d
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Greedy left-to-right pairing of opposite extrema into changes; unpaired
/// extrema become incursions if they pass the shallowness gate.
pub fn classify_events(extrema: &[Extremum], cfg: &PeakConfig) -> Result<Vec<LaneEvent>> {
    cfg.validate()?;
    if extrema
        .windows(2)
        .any(|w| w[1].frame_index < w[0].frame_index)
    {
        return Err(Error::FrameMismatch(
            "extrema must be sorted by frame".into(),
        ));
    }
    let mut consumed = vec![false; extrema.len()];
    let mut events: Vec<LaneEvent> = Vec::new();
    let mut lone: Vec<usize> = Vec::new();

    for i in 0..extrema.len() {
        if consumed[i] {
            continue;
        }
        let first = &extrema[i];
        let partner = (i + 1..extrema.len()).find(|&j| {
            let e = &extrema[j];
            !consumed[j]
                && e.kind != first.kind
                && e.segment == first.segment
                && e.frame_index > first.frame_index
                && e.frame_index - first.frame_index <= cfg.max_pair_distance
        });
        consumed[i] = true;
        match partner {
            Some(j) => {
                consumed[j] = true;
                let second = &extrema[j];
                events.push(LaneEvent {
                    kind: EventKind::Change,
                    direction: direction_of(first.kind, cfg.invert_direction),
                    frame_index: first.frame_index,
                    peak_frames: (first.frame_index, Some(second.frame_index)),
                    amplitudes: (first.amplitude, Some(second.amplitude)),
                });
            }
            None => lone.push(i),
        }
    }

    let ceiling = match cfg.shallowness_ratio {
        Some(ratio) if events.len() >= 2 => {
            let mut amps: Vec<f64> = events.iter().map(|e| e.amplitudes.0.abs()).collect();
            Some(ratio * median(&mut amps))
        }
        _ => None,
    };
    for i in lone {
        let e = &extrema[i];
        if ceiling.is_some_and(|c| e.amplitude.abs() >= c) {
            continue;
        }
        events.push(LaneEvent {
            kind: EventKind::Incursion,
            direction: direction_of(e.kind, cfg.invert_direction),
            frame_index: e.frame_index,
            peak_frames: (e.frame_index, None),
            amplitudes: (e.amplitude, None),
        });
    }
    events.sort_by_key(|e| e.frame_index);
    Ok(events)
}

/// `detect_peaks` followed by `classify_events`.
pub fn detect_events(series: &OffsetSeries, cfg: &PeakConfig) -> Result<Vec<LaneEvent>> {
    classify_events(&detect_peaks(series, cfg)?, cfg)
}

// ---------------------------------------------------------------------------
// Event log

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub direction: Direction,
    pub frame_index: u64,
    pub timestamp_ms: u64,
    pub peak_frames: [Option<u64>; 2],
    pub amplitudes: [Option<f64>; 2],
}

impl EventRecord {
    pub fn new(event: &LaneEvent, fps: f64) -> Self {
        Self {
            kind: event.kind,
            direction: event.direction,
            frame_index: event.frame_index,
            timestamp_ms: frame_timestamp_ms(event.frame_index, fps),
            peak_frames: [Some(event.peak_frames.0), event.peak_frames.1],
            amplitudes: [
                Some((event.amplitudes.0 * 1e4).round() / 1e4),
                event.amplitudes.1.map(|a| (a * 1e4).round() / 1e4),
            ],
        }
    }

    pub fn to_event(&self) -> Result<LaneEvent> {
        let bad = || {
            Error::Format(format!(
                "event at frame {} lacks its first extremum",
                self.frame_index
            ))
        };
        Ok(LaneEvent {
            kind: self.kind,
            direction: self.direction,
            frame_index: self.frame_index,
            peak_frames: (self.peak_frames[0].ok_or_else(bad)?, self.peak_frames[1]),
            amplitudes: (self.amplitudes[0].ok_or_else(bad)?, self.amplitudes[1]),
        })
    }
}

/// Line-delimited JSON, one object per event.
pub fn events_to_jsonl(events: &[LaneEvent], fps: f64) -> String {
    let mut out = String::new();
    for e in events {
        let line =
            serde_json::to_string(&EventRecord::new(e, fps)).expect("event record serializes");
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn events_from_jsonl(text: &str) -> Result<Vec<LaneEvent>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let rec: EventRecord = serde_json::from_str(l)
                .map_err(|e| Error::Format(format!("event log line {}: {e}", i + 1)))?;
            rec.to_event()
        })
        .collect()
}
