//! Per-frame hull centroid offsets and their centering and smoothing.
//!
//! A series moves through three stages: `Raw` (one offset per frame as
//! measured), `Centered` (clip mean removed so cameras mounted at different
//! positions share a zero line) and `Smoothed` (fixed-lag Kalman estimate).
//! Frames without a usable lane detection carry `None`.

use std::fmt::{self, Write as _};

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    point_line_distance, polygon_centroid, quickhull, signed_center_offset, Line2D, Point2D,
};
use crate::mask_io::{
    apply_roi, mask_row_extremes, mask_to_points, Mask, RoiMask, DEFAULT_MAX_POINTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Raw,
    Centered,
    Smoothed,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Centered => "centered",
            Stage::Smoothed => "smoothed",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetSample {
    pub frame_index: u64,
    /// Centroid x minus the image center line, pixels. Positive = right.
    pub vertical_offset: Option<f64>,
    /// Distance from the centroid to the bottom image edge, pixels.
    pub horizontal_offset: Option<f64>,
}

impl OffsetSample {
    pub fn valid(frame_index: u64, vertical_offset: f64, horizontal_offset: f64) -> Self {
        Self {
            frame_index,
            vertical_offset: Some(vertical_offset),
            horizontal_offset: Some(horizontal_offset),
        }
    }

    pub fn missing(frame_index: u64) -> Self {
        Self {
            frame_index,
            vertical_offset: None,
            horizontal_offset: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.vertical_offset.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetSeries {
    samples: Vec<OffsetSample>,
    stage: Stage,
}

impl OffsetSeries {
    /// Builds a series at `stage`; frame indices must strictly increase.
    pub fn new(samples: Vec<OffsetSample>, stage: Stage) -> Result<Self> {
        if samples
            .windows(2)
            .any(|w| w[1].frame_index <= w[0].frame_index)
        {
            return Err(Error::FrameMismatch(
                "frame indices must strictly increase".into(),
            ));
        }
        if samples
            .iter()
            .filter_map(|s| s.vertical_offset)
            .any(|v| !v.is_finite())
        {
            return Err(Error::DegenerateInput("non-finite offset"));
        }
        Ok(Self { samples, stage })
    }

    /// Raw series with consecutive frame indices from plain values.
    pub fn from_values(values: &[Option<f64>], stage: Stage) -> Result<Self> {
        let samples = values
            .iter()
            .enumerate()
            .map(|(i, v)| OffsetSample {
                frame_index: i as u64,
                vertical_offset: *v,
                horizontal_offset: None,
            })
            .collect();
        Self::new(samples, stage)
    }

    pub fn samples(&self) -> &[OffsetSample] {
        &self.samples
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.samples.iter().map(|s| s.vertical_offset).collect()
    }

    pub fn frame_indices(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.frame_index).collect()
    }

    pub(crate) fn expect_stage(&self, expected: Stage) -> Result<()> {
        if self.stage != expected {
            return Err(Error::StageMismatch {
                expected: expected.name(),
                found: self.stage.name(),
            });
        }
        Ok(())
    }

    fn map_values(&self, stage: Stage, values: Vec<Option<f64>>) -> Self {
        let samples = self
            .samples
            .iter()
            .zip(values)
            .map(|(s, v)| OffsetSample {
                vertical_offset: v,
                ..*s
            })
            .collect();
        Self { samples, stage }
    }
}

// ---------------------------------------------------------------------------
// Offsets

/// Which lane pixels feed the hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PointSampling {
    /// Leftmost and rightmost lane pixel of each row; same hull as all pixels.
    #[default]
    RowExtremes,
    /// Every k-th lane pixel in row-major order.
    Stride,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetConfig {
    pub max_points: usize,
    pub sampling: PointSampling,
}

impl Default for OffsetConfig {
    fn default() -> Self {
        Self {
            max_points: DEFAULT_MAX_POINTS,
            sampling: PointSampling::default(),
        }
    }
}

/// Hull and centroid of one (already ROI-filtered) mask; `None` when the mask
/// is empty or its lane pixels are collinear.
pub fn mask_hull(
    mask: &Mask,
    cfg: &OffsetConfig,
) -> Result<Option<(crate::geometry::ConvexPolygon, Point2D)>> {
    let points = match cfg.sampling {
        PointSampling::RowExtremes => mask_row_extremes(mask, cfg.max_points),
        PointSampling::Stride => mask_to_points(mask, cfg.max_points),
    };
    let points = match points {
        Ok(p) => p,
        Err(Error::EmptyMask) => return Ok(None),
        Err(e) => return Err(e),
    };
    let hull = match quickhull(&points) {
        Ok(h) => h,
        Err(Error::DegenerateInput(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    match polygon_centroid(&hull) {
        Ok(c) => Ok(Some((hull, c))),
        Err(Error::DegenerateInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn frame_offset(mask: &Mask, roi: Option<&RoiMask>, cfg: &OffsetConfig) -> Result<OffsetSample> {
    let filtered;
    let mask = match roi {
        Some(roi) => {
            filtered = apply_roi(mask, roi)?;
            &filtered
        }
        None => mask,
    };
    let Some((_, centroid)) = mask_hull(mask, cfg)? else {
        return Ok(OffsetSample::missing(mask.frame_index));
    };
    let center_x = mask.width() as f64 / 2.0;
    let bottom = Line2D::horizontal(mask.height() as f64);
    Ok(OffsetSample::valid(
        mask.frame_index,
        signed_center_offset(centroid, center_x),
        point_line_distance(&bottom, centroid),
    ))
}

/// Raw offset series: ROI filter, hull, area centroid and offsets per frame.
pub fn compute_offsets(
    masks: &[Mask],
    roi: Option<&RoiMask>,
    cfg: &OffsetConfig,
) -> Result<OffsetSeries> {
    let first = masks.first().ok_or(Error::EmptySequence)?;
    for w in masks.windows(2) {
        if w[1].frame_index <= w[0].frame_index {
            return Err(Error::FrameMismatch(format!(
                "frame {} follows frame {}",
                w[1].frame_index, w[0].frame_index
            )));
        }
    }
    for m in masks {
        m.same_shape(first.width(), first.height())
            .map_err(|e| e.at_frame(m.frame_index))?;
    }
    let samples = masks
        .par_iter()
        .map(|m| frame_offset(m, roi, cfg).map_err(|e| e.at_frame(m.frame_index)))
        .collect::<Result<Vec<_>>>()?;
    OffsetSeries::new(samples, Stage::Raw)
}

// ---------------------------------------------------------------------------
// Centering

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Centering {
    /// Subtract the mean of all valid samples in the clip.
    #[default]
    Global,
    /// Subtract the mean of valid samples within `window` frames centred on
    /// each sample.
    Sliding { window: u64 },
}

/// Removes the mean vertical offset. Invalid samples stay invalid.
pub fn center_series(series: &OffsetSeries, mode: Centering) -> Result<OffsetSeries> {
    if series.stage == Stage::Smoothed {
        return Err(Error::StageMismatch {
            expected: "raw or centered",
            found: series.stage.name(),
        });
    }
    let valid: Vec<(u64, f64)> = series
        .samples
        .iter()
        .filter_map(|s| s.vertical_offset.map(|v| (s.frame_index, v)))
        .collect();
    if valid.is_empty() {
        return Err(Error::NoValidSamples);
    }
    let values = match mode {
        Centering::Global => {
            let mean = valid.iter().map(|(_, v)| v).sum::<f64>() / valid.len() as f64;
            series
                .samples
                .iter()
                .map(|s| s.vertical_offset.map(|v| v - mean))
                .collect()
        }
        Centering::Sliding { window } => {
            if window == 0 {
                return Err(Error::InvalidConfig(
                    "centering window must be positive".into(),
                ));
            }
            let half = window / 2;
            // prefix sums over valid samples for O(n) window means
            let mut prefix = Vec::with_capacity(valid.len() + 1);
            prefix.push(0.0);
            for (_, v) in &valid {
                prefix.push(prefix.last().unwrap() + v);
            }
            series
                .samples
                .iter()
                .map(|s| {
                    s.vertical_offset.map(|v| {
                        let lo = s.frame_index.saturating_sub(half);
                        let hi = s.frame_index + half;
                        let a = valid.partition_point(|(f, _)| *f < lo);
                        let b = valid.partition_point(|(f, _)| *f <= hi);
                        v - (prefix[b] - prefix[a]) / (b - a) as f64
                    })
                })
                .collect()
        }
    };
    Ok(series.map_values(Stage::Centered, values))
}

// ---------------------------------------------------------------------------
// Fixed-lag Kalman smoothing

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KalmanConfig {
    /// Frames of look-ahead used to finalize each estimate.
    pub lag: usize,
    /// White-acceleration spectral density, px^2/frame^2.
    pub process_noise: f64,
    /// Measurement variance, px^2.
    pub measurement_noise: f64,
    /// Longer runs of missing frames split the series into independent
    /// segments.
    pub max_gap_frames: u64,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        Self {
            lag: 15,
            process_noise: 0.5,
            measurement_noise: 9.0,
            max_gap_frames: 25,
        }
    }
}

impl KalmanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lag < 1 {
            return Err(Error::InvalidConfig("lag must be >= 1".into()));
        }
        if !(self.process_noise > 0.0 && self.process_noise.is_finite()) {
            return Err(Error::InvalidConfig(
                "process_noise must be positive".into(),
            ));
        }
        if !(self.measurement_noise > 0.0 && self.measurement_noise.is_finite()) {
            return Err(Error::InvalidConfig(
                "measurement_noise must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Gap threshold of one second of video.
    pub fn with_fps(mut self, fps: f64) -> Self {
        self.max_gap_frames = fps.round().max(1.0) as u64;
        self
    }
}

/// Initial velocity variance, (px/frame)^2.
const INITIAL_VELOCITY_VAR: f64 = 25.0;

fn transition(dt: f64) -> Matrix2<f64> {
    Matrix2::new(1.0, dt, 0.0, 1.0)
}

fn process_cov(q: f64, dt: f64) -> Matrix2<f64> {
    let dt2 = dt * dt;
    Matrix2::new(dt2 * dt2 / 4.0, dt2 * dt / 2.0, dt2 * dt / 2.0, dt2) * q
}

/// Index ranges `[start, end)` of segments: each starts and ends on a valid
/// sample and contains no run of missing frames longer than `max_gap`.
pub(crate) fn segments(samples: &[OffsetSample], max_gap: u64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (i, s) in samples.iter().enumerate() {
        if !s.is_valid() {
            continue;
        }
        current = match current {
            Some((start, last)) if s.frame_index - samples[last].frame_index - 1 <= max_gap => {
                Some((start, i))
            }
            Some((start, last)) => {
                out.push(start..last + 1);
                Some((i, i))
            }
            None => Some((i, i)),
        };
    }
    if let Some((start, last)) = current {
        out.push(start..last + 1);
    }
    out
}

/// Fixed-lag smoothing of one segment. The estimate at step k conditions on
/// measurements up to step k + lag.
fn smooth_segment(frames: &[u64], z: &[Option<f64>], cfg: &KalmanConfig) -> Vec<f64> {
    let n = frames.len();
    let r = cfg.measurement_noise;

    let mut x_pred = Vec::with_capacity(n);
    let mut p_pred = Vec::with_capacity(n);
    let mut x_filt: Vec<Vector2<f64>> = Vec::with_capacity(n);
    let mut p_filt: Vec<Matrix2<f64>> = Vec::with_capacity(n);

    // The first sample of a segment is always valid.
    let z0 = z[0].expect("segment starts on a valid sample");
    let x0 = Vector2::new(z0, 0.0);
    let p0 = Matrix2::new(r, 0.0, 0.0, INITIAL_VELOCITY_VAR);
    x_pred.push(x0);
    p_pred.push(p0);
    x_filt.push(x0);
    p_filt.push(p0);

    for k in 1..n {
        let dt = (frames[k] - frames[k - 1]) as f64;
        let f = transition(dt);
        let xp = f * x_filt[k - 1];
        let pp = f * p_filt[k - 1] * f.transpose() + process_cov(cfg.process_noise, dt);
        let (xf, pf) = match z[k] {
            Some(meas) => {
                let s = pp[(0, 0)] + r;
                let gain = pp.column(0) / s;
                let xf = xp + gain * (meas - xp[0]);
                let pf = pp - gain * gain.transpose() * s;
                (xf, (pf + pf.transpose()) * 0.5)
            }
            None => (xp, pp),
        };
        x_pred.push(xp);
        p_pred.push(pp);
        x_filt.push(xf);
        p_filt.push(pf);
    }

    // Rauch-Tung-Striebel pass over each look-ahead window.
    let mut gains = Vec::with_capacity(n);
    gains.push(Matrix2::zeros());
    for k in 1..n {
        let dt = (frames[k] - frames[k - 1]) as f64;
        let inv = p_pred[k].try_inverse().unwrap_or_else(Matrix2::zeros);
        gains.push(p_filt[k - 1] * transition(dt).transpose() * inv);
    }
    (0..n)
        .map(|k| {
            let end = (k + cfg.lag).min(n - 1);
            let mut xs = x_filt[end];
            for j in (k..end).rev() {
                xs = x_filt[j] + gains[j + 1] * (xs - x_pred[j + 1]);
            }
            xs[0]
        })
        .collect()
}

/// Fixed-lag Kalman smoothing over a constant-velocity (offset, offset-rate)
/// model. Missing samples inside a segment are bridged by prediction;
/// samples outside every segment stay `None`.
pub fn kalman_smooth(series: &OffsetSeries, cfg: &KalmanConfig) -> Result<OffsetSeries> {
    cfg.validate()?;
    series.expect_stage(Stage::Centered)?;
    let mut values = vec![None; series.len()];
    for seg in segments(&series.samples, cfg.max_gap_frames) {
        let part = &series.samples[seg.clone()];
        let frames: Vec<u64> = part.iter().map(|s| s.frame_index).collect();
        let z: Vec<Option<f64>> = part.iter().map(|s| s.vertical_offset).collect();
        for (slot, v) in values[seg].iter_mut().zip(smooth_segment(&frames, &z, cfg)) {
            *slot = Some(v);
        }
    }
    Ok(series.map_values(Stage::Smoothed, values))
}

// ---------------------------------------------------------------------------
// CSV export

pub const OFFSETS_CSV_HEADER: &str = "frame_index,raw,centered,smoothed,valid,horizontal";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One line per frame: `frame_index,raw,centered,smoothed,valid,horizontal`.
/// Missing values are empty fields; `valid` is 1 when the frame had a lane
/// detection.
pub fn offsets_to_csv(
    raw: &OffsetSeries,
    centered: &OffsetSeries,
    smoothed: &OffsetSeries,
) -> Result<String> {
    if raw.frame_indices() != centered.frame_indices()
        || raw.frame_indices() != smoothed.frame_indices()
    {
        return Err(Error::FrameMismatch("offset series are not aligned".into()));
    }
    let mut out = String::from(OFFSETS_CSV_HEADER);
    out.push('\n');
    for ((r, c), s) in raw
        .samples
        .iter()
        .zip(&centered.samples)
        .zip(&smoothed.samples)
    {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.frame_index,
            fmt_opt(r.vertical_offset),
            fmt_opt(c.vertical_offset),
            fmt_opt(s.vertical_offset),
            u8::from(r.is_valid()),
            fmt_opt(r.horizontal_offset),
        );
    }
    Ok(out)
}

/// Parses the CSV written by [`offsets_to_csv`] back into (raw, centered,
/// smoothed) series.
pub fn offsets_from_csv(text: &str) -> Result<(OffsetSeries, OffsetSeries, OffsetSeries)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == OFFSETS_CSV_HEADER => {}
        _ => return Err(Error::Format("missing offsets CSV header".into())),
    }
    let parse_opt = |field: &str, lineno: usize| -> Result<Option<f64>> {
        if field.is_empty() {
            Ok(None)
        } else {
            field
                .parse()
                .map(Some)
                .map_err(|_| Error::Format(format!("offsets line {lineno}: bad number `{field}`")))
        }
    };
    let (mut raw, mut centered, mut smoothed) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(Error::Format(format!(
                "offsets line {lineno}: expected 6 fields"
            )));
        }
        let frame_index: u64 = f[0]
            .parse()
            .map_err(|_| Error::Format(format!("offsets line {lineno}: bad frame index")))?;
        let horizontal = parse_opt(f[5], lineno)?;
        let mk = |v: Option<f64>| OffsetSample {
            frame_index,
            vertical_offset: v,
            horizontal_offset: horizontal,
        };
        raw.push(mk(parse_opt(f[1], lineno)?));
        centered.push(mk(parse_opt(f[2], lineno)?));
        smoothed.push(mk(parse_opt(f[3], lineno)?));
    }
    Ok((
        OffsetSeries::new(raw, Stage::Raw)?,
        OffsetSeries::new(centered, Stage::Centered)?,
        OffsetSeries::new(smoothed, Stage::Smoothed)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn centered(values: &[Option<f64>]) -> OffsetSeries {
        OffsetSeries::from_values(values, Stage::Centered).unwrap()
    }

    fn unwrap_all(s: &OffsetSeries) -> Vec<f64> {
        s.values().into_iter().map(Option::unwrap).collect()
    }

    #[test]
    fn offsets_at_default_resolution() {
        // Rectangle [390, 410] x [290, 310] has area centroid (400, 300).
        let m = Mask::from_fn(752, 480, |x, y| {
            (390..=410).contains(&x) && (290..=310).contains(&y)
        })
        .unwrap();
        let s = compute_offsets(&[m], None, &OffsetConfig::default()).unwrap();
        let sample = s.samples()[0];
        assert_abs_diff_eq!(sample.vertical_offset.unwrap(), 24.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sample.horizontal_offset.unwrap(), 180.0, epsilon = 1e-9);
    }

    #[test]
    fn centroid_on_center_line() {
        let m = Mask::from_fn(10, 10, |x, y| (3..=7).contains(&x) && y > 4).unwrap();
        let s = compute_offsets(&[m], None, &OffsetConfig::default()).unwrap();
        assert_abs_diff_eq!(
            s.samples()[0].vertical_offset.unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_and_degenerate_frames_are_invalid() {
        let empty = Mask::empty(8, 8).unwrap().with_frame(0, 25.0);
        let line = Mask::from_fn(8, 8, |_, y| y == 3)
            .unwrap()
            .with_frame(1, 25.0);
        let good = Mask::from_fn(8, 8, |x, y| x > 2 && y > 2)
            .unwrap()
            .with_frame(2, 25.0);
        let s = compute_offsets(&[empty, line, good], None, &OffsetConfig::default()).unwrap();
        assert_eq!(
            s.samples()
                .iter()
                .map(OffsetSample::is_valid)
                .collect::<Vec<_>>(),
            vec![false, false, true]
        );
        assert!(matches!(
            compute_offsets(&[], None, &OffsetConfig::default()),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn roi_removes_detection() {
        let m = Mask::from_fn(8, 8, |x, y| x > 2 && y < 3).unwrap();
        let roi = RoiMask::below_horizon(8, 8, 4).unwrap();
        let s = compute_offsets(&[m], Some(&roi), &OffsetConfig::default()).unwrap();
        assert!(!s.samples()[0].is_valid());
    }

    #[test]
    fn unordered_frames_rejected() {
        let a = Mask::empty(4, 4).unwrap().with_frame(3, 25.0);
        let b = Mask::empty(4, 4).unwrap().with_frame(2, 25.0);
        assert!(compute_offsets(&[a, b], None, &OffsetConfig::default()).is_err());
    }

    #[test]
    fn centering_examples() {
        let raw =
            OffsetSeries::from_values(&[Some(5.0), Some(5.0), Some(5.0)], Stage::Raw).unwrap();
        assert_eq!(
            unwrap_all(&center_series(&raw, Centering::Global).unwrap()),
            vec![0.0; 3]
        );

        let raw = OffsetSeries::from_values(&[Some(1.0), None, Some(2.0), Some(3.0)], Stage::Raw)
            .unwrap();
        let c = center_series(&raw, Centering::Global).unwrap();
        assert_eq!(c.values(), vec![Some(-1.0), None, Some(0.0), Some(1.0)]);
        assert_eq!(c.stage(), Stage::Centered);

        let none = OffsetSeries::from_values(&[None, None], Stage::Raw).unwrap();
        assert!(matches!(
            center_series(&none, Centering::Global),
            Err(Error::NoValidSamples)
        ));
    }

    #[test]
    fn sliding_centering_follows_drift() {
        let raw: Vec<Option<f64>> = (0..200).map(|i| Some(0.5 * i as f64)).collect();
        let raw = OffsetSeries::from_values(&raw, Stage::Raw).unwrap();
        let c = center_series(&raw, Centering::Sliding { window: 21 }).unwrap();
        // Away from the edges a linear drift is removed exactly.
        for v in &c.values()[20..180] {
            assert_abs_diff_eq!(v.unwrap(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn smoothing_requires_centered_stage() {
        let raw = OffsetSeries::from_values(&[Some(1.0)], Stage::Raw).unwrap();
        assert!(matches!(
            kalman_smooth(&raw, &KalmanConfig::default()),
            Err(Error::StageMismatch { .. })
        ));
        let bad = KalmanConfig {
            lag: 0,
            ..Default::default()
        };
        assert!(kalman_smooth(&centered(&[Some(0.0)]), &bad).is_err());
    }

    #[test]
    fn zero_series_stays_zero() {
        let s = kalman_smooth(&centered(&vec![Some(0.0); 100]), &KalmanConfig::default()).unwrap();
        assert!(unwrap_all(&s).iter().all(|v| v.abs() < 1e-6));
        assert_eq!(s.len(), 100);
        assert_eq!(s.stage(), Stage::Smoothed);
    }

    #[test]
    fn single_sample_segment() {
        let s = kalman_smooth(&centered(&[Some(3.0)]), &KalmanConfig::default()).unwrap();
        assert_eq!(s.values(), vec![Some(3.0)]);
    }

    #[test]
    fn gap_inside_line_is_interpolated() {
        let mut values: Vec<Option<f64>> = (0..80).map(|i| Some(0.8 * i as f64 - 30.0)).collect();
        values[40] = None;
        let s = kalman_smooth(&centered(&values), &KalmanConfig::default()).unwrap();
        let est = s.values()[40].unwrap();
        assert!((est - (0.8 * 40.0 - 30.0)).abs() < 1.0, "estimate {est}");
    }

    #[test]
    fn long_gap_splits_segments() {
        let cfg = KalmanConfig::default().with_fps(25.0);
        let mut values: Vec<Option<f64>> = vec![Some(10.0); 30];
        values.extend(vec![None; 26]);
        values.extend(vec![Some(-10.0); 30]);
        let s = kalman_smooth(&centered(&values), &cfg).unwrap();
        let v = s.values();
        assert!(v[30..56].iter().all(Option::is_none));
        // Each segment restarts from its own first measurement.
        assert_abs_diff_eq!(v[29].unwrap(), 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[56].unwrap(), -10.0, epsilon = 1e-9);

        // A run of exactly max_gap missing frames is bridged.
        let mut values: Vec<Option<f64>> = vec![Some(0.0); 30];
        values.extend(vec![None; 25]);
        values.extend(vec![Some(0.0); 30]);
        let s = kalman_smooth(&centered(&values), &cfg).unwrap();
        assert!(s.values().iter().all(Option::is_some));
    }

    #[test]
    fn leading_missing_samples_stay_missing() {
        let s = kalman_smooth(
            &centered(&[None, Some(1.0), Some(1.0), None]),
            &KalmanConfig::default(),
        )
        .unwrap();
        assert_eq!(s.values()[0], None);
        assert_eq!(s.values()[3], None);
    }

    #[test]
    fn frame_spacing_is_respected() {
        // Same ramp sampled every other frame.
        let samples: Vec<OffsetSample> = (0..60)
            .map(|i| OffsetSample::valid(2 * i, 0.5 * (2 * i) as f64, 0.0))
            .collect();
        let series = OffsetSeries::new(samples, Stage::Centered).unwrap();
        let s = kalman_smooth(&series, &KalmanConfig::default()).unwrap();
        for (sample, v) in s.samples().iter().zip(s.values()).skip(30) {
            assert!((v.unwrap() - 0.5 * sample.frame_index as f64).abs() < 0.1);
        }
    }

    #[test]
    fn csv_round_trip() {
        let raw = OffsetSeries::new(
            vec![
                OffsetSample::valid(0, 3.5, 100.0),
                OffsetSample::missing(1),
                OffsetSample::valid(2, -1.25, 90.0),
            ],
            Stage::Raw,
        )
        .unwrap();
        let c = center_series(&raw, Centering::Global).unwrap();
        let s = kalman_smooth(&c, &KalmanConfig::default()).unwrap();
        let text = offsets_to_csv(&raw, &c, &s).unwrap();
        assert!(text.starts_with(OFFSETS_CSV_HEADER));
        assert!(text.contains("\n1,,,"));
        let (r2, c2, s2) = offsets_from_csv(&text).unwrap();
        assert_eq!(offsets_to_csv(&r2, &c2, &s2).unwrap(), text);
    }
}
