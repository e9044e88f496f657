//! Synthetic lane-mask clips with known maneuvers, used as ground truth for
//! the tracker and classifier.
//!
//! The lane region is a trapezoid (40% of the image wide at the bottom, 10% at
//! the top, 45% of the image tall, resting on the bottom edge) whose
//! horizontal position follows a scripted lateral trajectory:
//!
//! * lane keep: constant;
//! * change: smooth ramp out to `amplitude`, then an instantaneous re-anchor to
//!   `-amplitude` (the newly entered lane) and a smooth return to zero;
//! * incursion: smooth ramp out to `amplitude` and back, no re-anchor.
//!
//! A leftward maneuver moves the lane region to the right in the image first.
//! Rendering is exactly mirror-symmetric: a scenario whose first directional
//! maneuver is to the right is rendered as its left-handed twin and flipped,
//! so the right-handed clip is the pixel mirror of the left-handed one.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{events_to_jsonl, Direction, EventKind, LaneEvent};
use crate::error::{Error, Result};
use crate::mask_io::{save_mask, FrameEntry, Mask, SequenceManifest, DEFAULT_FPS};

pub const BOTTOM_WIDTH_FRAC: f64 = 0.40;
pub const TOP_WIDTH_FRAC: f64 = 0.10;
pub const HEIGHT_FRAC: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maneuver {
    pub kind: EventKind,
    pub direction: Direction,
    pub start_frame: u64,
    pub duration_frames: u64,
    /// Peak lateral displacement of the lane region, pixels.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    /// Gaussian sigma on every trapezoid corner coordinate, pixels.
    pub jitter_sigma: f64,
    /// Probability that a frame has no detection at all.
    pub dropout_prob: f64,
    /// Per-pixel probability of flipping the mask value.
    pub speckle_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub duration_frames: u64,
    /// Constant lateral displacement, e.g. an off-center camera mount.
    pub base_offset: f64,
    pub maneuvers: Vec<Maneuver>,
    pub noise: Noise,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            width: 752,
            height: 480,
            fps: DEFAULT_FPS,
            duration_frames: 500,
            base_offset: 0.0,
            maneuvers: Vec::new(),
            noise: Noise::default(),
        }
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

impl Maneuver {
    fn sign(&self) -> f64 {
        match self.direction {
            Direction::Right => -1.0,
            _ => 1.0,
        }
    }

    fn crossing_frame(&self) -> u64 {
        self.start_frame + self.duration_frames / 2
    }

    /// Lateral displacement at `frame`, or `None` outside the maneuver.
    fn displacement(&self, frame: u64) -> Option<f64> {
        if frame < self.start_frame || frame >= self.start_frame + self.duration_frames {
            return None;
        }
        let t = frame - self.start_frame;
        let half = (self.duration_frames / 2) as f64;
        let a = self.sign() * self.amplitude;
        Some(match self.kind {
            EventKind::Change => {
                if frame < self.crossing_frame() {
                    a * smoothstep(t as f64 / half)
                } else {
                    let rest = (self.duration_frames - self.duration_frames / 2) as f64;
                    -a * (1.0 - smoothstep((frame - self.crossing_frame()) as f64 / rest))
                }
            }
            EventKind::Incursion => {
                let u = t as f64 / self.duration_frames as f64;
                a * smoothstep(1.0 - (2.0 * u - 1.0).abs())
            }
        })
    }

    /// The event this maneuver should produce.
    pub fn truth_event(&self) -> LaneEvent {
        let a = self.sign() * self.amplitude;
        match self.kind {
            EventKind::Change => LaneEvent {
                kind: EventKind::Change,
                direction: self.direction,
                frame_index: self.start_frame,
                peak_frames: (self.crossing_frame() - 1, Some(self.crossing_frame())),
                amplitudes: (a, Some(-a)),
            },
            EventKind::Incursion => LaneEvent {
                kind: EventKind::Incursion,
                direction: self.direction,
                frame_index: self.start_frame,
                peak_frames: (self.crossing_frame(), None),
                amplitudes: (a, None),
            },
        }
    }

    fn flipped(&self) -> Self {
        Self {
            direction: self.direction.flipped(),
            ..*self
        }
    }
}

impl Scenario {
    pub fn lane_keep(duration_frames: u64) -> Self {
        Self {
            duration_frames,
            ..Default::default()
        }
    }

    pub fn single(maneuver: Maneuver, duration_frames: u64) -> Self {
        Self {
            duration_frames,
            maneuvers: vec![maneuver],
            ..Default::default()
        }
    }

    pub fn with_noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    /// Same scenario with every maneuver direction swapped.
    pub fn mirrored(&self) -> Self {
        Self {
            maneuvers: self.maneuvers.iter().map(Maneuver::flipped).collect(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.width < 16 || self.height < 16 {
            return bad(format!("image {}x{} is too small", self.width, self.height));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return bad("fps must be positive".into());
        }
        if self.duration_frames == 0 {
            return bad("duration must be positive".into());
        }
        if !self.base_offset.is_finite() {
            return bad("base offset must be finite".into());
        }
        let n = &self.noise;
        if !(n.jitter_sigma >= 0.0 && n.jitter_sigma.is_finite()) {
            return bad("jitter sigma must be >= 0".into());
        }
        for (name, p) in [("dropout", n.dropout_prob), ("speckle", n.speckle_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} probability must lie in [0, 1]"));
            }
        }
        let mut prev_end = 0;
        for (i, m) in self.maneuvers.iter().enumerate() {
            if !(m.amplitude > 0.0 && m.amplitude.is_finite()) {
                return bad(format!("maneuver {i}: amplitude must be positive"));
            }
            if m.direction == Direction::None {
                return bad(format!("maneuver {i}: direction must be left or right"));
            }
            if m.duration_frames < 4 {
                return bad(format!("maneuver {i}: duration must be at least 4 frames"));
            }
            if i > 0 && m.start_frame < prev_end {
                return bad(format!(
                    "maneuver {i} overlaps or precedes the previous one"
                ));
            }
            let end = m.start_frame + m.duration_frames;
            if end > self.duration_frames {
                return bad(format!("maneuver {i} runs past the end of the clip"));
            }
            prev_end = end;
        }
        Ok(())
    }

    /// Programmed lateral displacement of the lane region at `frame`.
    pub fn lateral(&self, frame: u64) -> f64 {
        self.base_offset
            + self
                .maneuvers
                .iter()
                .find_map(|m| m.displacement(frame))
                .unwrap_or(0.0)
    }

    pub fn truth_events(&self) -> Vec<LaneEvent> {
        self.maneuvers.iter().map(Maneuver::truth_event).collect()
    }

    // -- flat key-value config ----------------------------------------------

    /// `key = value` lines; `maneuver = <change|incursion> <left|right>
    /// <start_frame> <duration_frames> <amplitude>` may repeat. `#` starts a
    /// comment.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut sc = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::InvalidScenario(format!("line {}: {msg}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| err(&format!("bad number `{v}`")))
            };
            let int = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| err(&format!("bad integer `{v}`")))
            };
            match key {
                "width" => sc.width = int(value)? as usize,
                "height" => sc.height = int(value)? as usize,
                "fps" => sc.fps = num(value)?,
                "duration_frames" => sc.duration_frames = int(value)?,
                "base_offset" => sc.base_offset = num(value)?,
                "jitter_sigma" => sc.noise.jitter_sigma = num(value)?,
                "dropout_prob" => sc.noise.dropout_prob = num(value)?,
                "speckle_prob" => sc.noise.speckle_prob = num(value)?,
                "maneuver" => {
                    let f: Vec<&str> = value.split_whitespace().collect();
                    let [kind, dir, start, dur, amp] = f[..] else {
                        return Err(err(
                            "maneuver needs: kind direction start duration amplitude",
                        ));
                    };
                    let kind = match kind {
                        "change" => EventKind::Change,
                        "incursion" => EventKind::Incursion,
                        _ => return Err(err(&format!("unknown maneuver kind `{kind}`"))),
                    };
                    let direction = match dir {
                        "left" => Direction::Left,
                        "right" => Direction::Right,
                        _ => return Err(err(&format!("unknown direction `{dir}`"))),
                    };
                    sc.maneuvers.push(Maneuver {
                        kind,
                        direction,
                        start_frame: int(start)?,
                        duration_frames: int(dur)?,
                        amplitude: num(amp)?,
                    });
                }
                _ => return Err(err(&format!("unknown key `{key}`"))),
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_config(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "width = {}", self.width);
        let _ = writeln!(s, "height = {}", self.height);
        let _ = writeln!(s, "fps = {}", self.fps);
        let _ = writeln!(s, "duration_frames = {}", self.duration_frames);
        let _ = writeln!(s, "base_offset = {}", self.base_offset);
        let _ = writeln!(s, "jitter_sigma = {}", self.noise.jitter_sigma);
        let _ = writeln!(s, "dropout_prob = {}", self.noise.dropout_prob);
        let _ = writeln!(s, "speckle_prob = {}", self.noise.speckle_prob);
        for m in &self.maneuvers {
            let kind = match m.kind {
                EventKind::Change => "change",
                EventKind::Incursion => "incursion",
            };
            let dir = match m.direction {
                Direction::Left => "left",
                Direction::Right => "right",
                Direction::None => "none",
            };
            let _ = writeln!(
                s,
                "maneuver = {kind} {dir} {} {} {}",
                m.start_frame, m.duration_frames, m.amplitude
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub frame_index: u64,
    /// Programmed (noise-free) lateral displacement, pixels.
    pub lateral: f64,
    /// False when the frame was dropped.
    pub valid: bool,
}

#[derive(Debug, Clone)]
pub struct SyntheticClip {
    pub scenario: Scenario,
    pub masks: Vec<Mask>,
    pub truth_events: Vec<LaneEvent>,
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Scanline fill of a convex quadrilateral given relative to the image center
/// line (`u = x + 0.5 - width / 2`). Pixel centers on the boundary are lane.
fn rasterize(width: usize, height: usize, corners: &[(f64, f64); 4]) -> Vec<bool> {
    let mut pixels = vec![false; width * height];
    let half_w = width as f64 / 2.0;
    let y_min = corners.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let y_max = corners
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let row_lo = (y_min - 0.5).ceil().max(0.0) as usize;
    let row_hi = ((y_max - 0.5).floor().min(height as f64 - 1.0)).max(-1.0);
    if row_hi < 0.0 {
        return pixels;
    }
    for row in row_lo..=row_hi as usize {
        let yc = row as f64 + 0.5;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..4 {
            let (p, q) = (corners[k], corners[(k + 1) % 4]);
            if !((p.1 <= yc && yc <= q.1) || (q.1 <= yc && yc <= p.1)) {
                continue;
            }
            if p.1 == q.1 {
                // horizontal edge on the scanline
                lo = lo.min(p.0.min(q.0));
                hi = hi.max(p.0.max(q.0));
            } else {
                let u = p.0 + (yc - p.1) * (q.0 - p.0) / (q.1 - p.1);
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        if lo > hi {
            continue;
        }
        let line = &mut pixels[row * width..(row + 1) * width];
        for (x, px) in line.iter_mut().enumerate() {
            let u = x as f64 + 0.5 - half_w;
            if lo <= u && u <= hi {
                *px = true;
            }
        }
    }
    pixels
}

fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

/// Renders the clip. Deterministic for a given `(scenario, seed)`.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<SyntheticClip> {
    scenario.validate()?;
    let flip = scenario
        .maneuvers
        .first()
        .is_some_and(|m| m.direction == Direction::Right);
    let canonical = if flip {
        scenario.mirrored()
    } else {
        scenario.clone()
    };

    let (w, h) = (canonical.width, canonical.height);
    let bottom_half = BOTTOM_WIDTH_FRAC * w as f64 / 2.0;
    let top_half = TOP_WIDTH_FRAC * w as f64 / 2.0;
    let y_bottom = h as f64;
    let y_top = h as f64 * (1.0 - HEIGHT_FRAC);
    let noise = canonical.noise;
    let jitter = Normal::new(0.0, noise.jitter_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidScenario(e.to_string()))?;

    let rendered: Vec<(Mask, bool)> = (0..canonical.duration_frames)
        .into_par_iter()
        .map(|frame| {
            let mut rng = frame_rng(seed, frame);
            let dropped = noise.dropout_prob > 0.0 && rng.random::<f64>() < noise.dropout_prob;
            let mut j = || {
                if noise.jitter_sigma > 0.0 {
                    jitter.sample(&mut rng)
                } else {
                    0.0
                }
            };
            let c = canonical.lateral(frame);
            // bottom-left, bottom-right, top-right, top-left
            let corners = [
                (c - bottom_half + j(), y_bottom + j()),
                (c + bottom_half + j(), y_bottom + j()),
                (c + top_half + j(), y_top + j()),
                (c - top_half + j(), y_top + j()),
            ];
            let mut pixels = if dropped {
                vec![false; w * h]
            } else {
                rasterize(w, h, &corners)
            };
            if noise.speckle_prob > 0.0 && !dropped {
                for px in pixels.iter_mut() {
                    if rng.random::<f64>() < noise.speckle_prob {
                        *px = !*px;
                    }
                }
            }
            let mut mask = Mask::new(w, h, pixels).expect("raster matches dimensions");
            if flip {
                mask = mask.mirrored();
            }
            (mask.with_frame(frame, canonical.fps), !dropped)
        })
        .collect();

    let trajectory = rendered
        .iter()
        .map(|(m, valid)| TrajectoryPoint {
            frame_index: m.frame_index,
            lateral: scenario.lateral(m.frame_index),
            valid: *valid,
        })
        .collect();
    Ok(SyntheticClip {
        scenario: scenario.clone(),
        masks: rendered.into_iter().map(|(m, _)| m).collect(),
        truth_events: scenario.truth_events(),
        trajectory,
    })
}

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const TRUTH_EVENTS_FILE: &str = "truth_events.jsonl";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SCENARIO_FILE: &str = "scenario.cfg";

pub fn trajectory_to_csv(points: &[TrajectoryPoint]) -> String {
    let mut s = String::from("frame_index,lateral,valid\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{:.6},{}",
            p.frame_index,
            p.lateral,
            u8::from(p.valid)
        );
    }
    s
}

impl SyntheticClip {
    pub fn manifest(&self) -> SequenceManifest {
        SequenceManifest {
            fps: self.scenario.fps,
            width: self.scenario.width,
            height: self.scenario.height,
            entries: self
                .masks
                .iter()
                .map(|m| FrameEntry {
                    frame_index: m.frame_index,
                    path: PathBuf::from(format!("frames/frame_{:06}.pgm", m.frame_index)),
                })
                .collect(),
        }
    }

    /// Writes `manifest.csv`, `frames/*.pgm`, `truth_events.jsonl`,
    /// `trajectory.csv` and `scenario.cfg` under `dir`. Returns the manifest
    /// path.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        let frames = dir.join("frames");
        fs::create_dir_all(&frames).map_err(|e| Error::io(&frames, e))?;
        let manifest = self.manifest();
        self.masks
            .par_iter()
            .zip(&manifest.entries)
            .try_for_each(|(m, e)| save_mask(m, dir.join(&e.path)))?;
        let write = |name: &str, contents: String| {
            let p = dir.join(name);
            fs::write(&p, contents).map_err(|e| Error::io(&p, e))
        };
        write(
            TRUTH_EVENTS_FILE,
            events_to_jsonl(&self.truth_events, self.scenario.fps),
        )?;
        write(TRAJECTORY_FILE, trajectory_to_csv(&self.trajectory))?;
        write(SCENARIO_FILE, self.scenario.to_config())?;
        let manifest_path = dir.join(MANIFEST_FILE);
        manifest.save(&manifest_path)?;
        Ok(manifest_path)
    }
}

// -- presets ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    LaneKeep,
    LeftChange,
    RightChange,
    LeftIncursion,
    RightIncursion,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::LaneKeep,
        Preset::LeftChange,
        Preset::RightChange,
        Preset::LeftIncursion,
        Preset::RightIncursion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::LaneKeep => "lane-keep",
            Preset::LeftChange => "left-change",
            Preset::RightChange => "right-change",
            Preset::LeftIncursion => "left-incursion",
            Preset::RightIncursion => "right-incursion",
        }
    }

    /// 500-frame clip; maneuvers start at frame 180 and last 60 frames
    /// (amplitude 80 for changes, 40 for incursions).
    pub fn scenario(self) -> Scenario {
        let m = |kind, direction, amplitude| Maneuver {
            kind,
            direction,
            start_frame: 180,
            duration_frames: 60,
            amplitude,
        };
        let duration = Scenario::default().duration_frames;
        match self {
            Preset::LaneKeep => Scenario::lane_keep(duration),
            Preset::LeftChange => {
                Scenario::single(m(EventKind::Change, Direction::Left, 80.0), duration)
            }
            Preset::RightChange => {
                Scenario::single(m(EventKind::Change, Direction::Right, 80.0), duration)
            }
            Preset::LeftIncursion => {
                Scenario::single(m(EventKind::Incursion, Direction::Left, 40.0), duration)
            }
            Preset::RightIncursion => {
                Scenario::single(m(EventKind::Incursion, Direction::Right, 40.0), duration)
            }
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown preset `{s}`")))
    }
}

/// Benchmark suite: `per_class` clips each of lane keep, left change, right
/// change and incursion (alternating left and right). Timing and amplitude
/// vary with the clip index.
pub fn scenario_suite(per_class: usize, noise: Noise) -> Vec<Scenario> {
    let mut out = Vec::with_capacity(4 * per_class);
    let vary = |i: usize, kind: EventKind, direction: Direction| {
        let amplitude = match kind {
            EventKind::Change => 70.0 + 5.0 * (i % 4) as f64,
            EventKind::Incursion => 35.0 + 5.0 * (i % 3) as f64,
        };
        Scenario::single(
            Maneuver {
                kind,
                direction,
                start_frame: 120 + 20 * (i % 8) as u64,
                duration_frames: 50 + 5 * (i % 3) as u64,
                amplitude,
            },
            Scenario::default().duration_frames,
        )
    };
    for i in 0..per_class {
        out.push(Scenario::lane_keep(Scenario::default().duration_frames));
        out.push(vary(i, EventKind::Change, Direction::Left));
        out.push(vary(i, EventKind::Change, Direction::Right));
        let d = if i % 2 == 0 {
            Direction::Left
        } else {
            Direction::Right
        };
        out.push(vary(i, EventKind::Incursion, d));
    }
    out.into_iter().map(|s| s.with_noise(noise)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn left_change() -> Maneuver {
        Maneuver {
            kind: EventKind::Change,
            direction: Direction::Left,
            start_frame: 200,
            duration_frames: 60,
            amplitude: 80.0,
        }
    }

    #[test]
    fn lane_keep_has_no_truth_and_constant_masks() {
        let clip = generate(&Scenario::lane_keep(200), 1).unwrap();
        assert!(clip.truth_events.is_empty());
        assert_eq!(clip.masks.len(), 200);
        assert!(clip
            .masks
            .windows(2)
            .all(|w| w[0].pixels() == w[1].pixels()));
        assert!(clip.masks[0].lane_count() > 10_000);
    }

    #[test]
    fn truth_log_for_left_change() {
        let clip = generate(&Scenario::single(left_change(), 500), 3).unwrap();
        assert_eq!(clip.truth_events.len(), 1);
        let e = clip.truth_events[0];
        assert_eq!(
            (e.kind, e.direction, e.frame_index),
            (EventKind::Change, Direction::Left, 200)
        );
    }

    #[test]
    fn change_trajectory_shape() {
        let sc = Scenario::single(left_change(), 500);
        assert_eq!(sc.lateral(199), 0.0);
        assert!((sc.lateral(229) - 80.0).abs() < 1.0);
        assert!((sc.lateral(230) + 80.0).abs() < 1e-9);
        assert!(sc.lateral(259).abs() < 1.0);
        assert_eq!(sc.lateral(260), 0.0);
    }

    #[test]
    fn deterministic_for_seed() {
        let sc = Scenario::single(left_change(), 300).with_noise(Noise {
            jitter_sigma: 2.0,
            dropout_prob: 0.05,
            speckle_prob: 0.0,
        });
        let a = generate(&sc, 11).unwrap();
        let b = generate(&sc, 11).unwrap();
        let c = generate(&sc, 12).unwrap();
        assert_eq!(a.masks, b.masks);
        assert_ne!(a.masks, c.masks);
    }

    #[test]
    fn right_scenario_is_pixel_mirror_of_left() {
        let noise = Noise {
            jitter_sigma: 2.0,
            dropout_prob: 0.02,
            speckle_prob: 0.0,
        };
        let left = Scenario::single(left_change(), 320).with_noise(noise);
        let right = left.mirrored();
        let a = generate(&left, 5).unwrap();
        let b = generate(&right, 5).unwrap();
        for (ma, mb) in a.masks.iter().zip(&b.masks) {
            assert_eq!(&ma.mirrored(), mb);
        }
        assert_eq!(b.truth_events[0].direction, Direction::Right);
    }

    #[test]
    fn validation() {
        let mut sc = Scenario::single(left_change(), 500);
        sc.maneuvers.push(Maneuver {
            start_frame: 230,
            ..left_change()
        });
        assert!(matches!(generate(&sc, 0), Err(Error::InvalidScenario(_))));
        let sc = Scenario::single(
            Maneuver {
                amplitude: 0.0,
                ..left_change()
            },
            500,
        );
        assert!(sc.validate().is_err());
        assert!(Scenario::single(left_change(), 250).validate().is_err());
        let mut sc = Scenario::lane_keep(10);
        sc.noise.dropout_prob = 1.5;
        assert!(sc.validate().is_err());
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            p.scenario().validate().unwrap();
        }
        assert!("sideways".parse::<Preset>().is_err());
    }

    #[test]
    fn suite_shape() {
        let suite = scenario_suite(10, Noise::default());
        assert_eq!(suite.len(), 40);
        assert_eq!(suite.iter().filter(|s| s.maneuvers.is_empty()).count(), 10);
        for s in &suite {
            s.validate().unwrap();
        }
    }

    #[test]
    fn config_round_trip() {
        let mut sc = Scenario::single(left_change(), 500).with_noise(Noise {
            jitter_sigma: 2.0,
            dropout_prob: 0.01,
            speckle_prob: 0.0,
        });
        sc.maneuvers.push(Maneuver {
            kind: EventKind::Incursion,
            direction: Direction::Right,
            start_frame: 350,
            duration_frames: 50,
            amplitude: 35.5,
        });
        assert_eq!(Scenario::parse_config(&sc.to_config()).unwrap(), sc);
        assert!(Scenario::parse_config("colour = blue\n").is_err());
        assert!(Scenario::parse_config("maneuver = change up 1 2 3\n").is_err());
    }

    #[test]
    fn rasterizer_is_mirror_exact() {
        let corners = [(-100.3, 48.0), (120.7, 48.0), (30.2, 20.5), (-10.9, 21.0)];
        let mirrored = corners.map(|(u, y)| (-u, y));
        let a = Mask::new(64 * 4, 48, rasterize(64 * 4, 48, &corners)).unwrap();
        let b = Mask::new(64 * 4, 48, rasterize(64 * 4, 48, &mirrored)).unwrap();
        assert_eq!(a.mirrored(), b);
        assert!(a.lane_count() > 0);
    }
}
