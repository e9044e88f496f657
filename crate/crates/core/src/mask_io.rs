//! Lane masks: PGM decoding/encoding, ROI filtering, sequence manifests and
//! conversion of lane pixels to hull input points.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::Point2D;

pub const DEFAULT_FPS: f64 = 25.0;
pub const DEFAULT_MAX_POINTS: usize = 4096;

/// Binary lane raster for one frame. `true` marks the lane region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
    pub frame_index: u64,
    pub timestamp_ms: u64,
}

impl Mask {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format(format!(
                "invalid dimensions {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Format(format!(
                "raster has {} pixels, expected {}",
                pixels.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            frame_index: 0,
            timestamp_ms: 0,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, pixels)
    }

    /// Sets the frame index and derives the timestamp from `fps`.
    pub fn with_frame(mut self, frame_index: u64, fps: f64) -> Self {
        self.frame_index = frame_index;
        self.timestamp_ms = frame_timestamp_ms(frame_index, fps);
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn lane_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Lane pixel coordinates in row-major order.
    pub fn lane_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| (i % self.width, i / self.width))
    }

    pub fn same_shape(&self, width: usize, height: usize) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: width,
                right_height: height,
            });
        }
        Ok(())
    }

    /// Left-right flip: pixel `x` moves to `width - 1 - x`.
    pub fn mirrored(&self) -> Self {
        let mut pixels = self.pixels.clone();
        for row in pixels.chunks_mut(self.width) {
            row.reverse();
        }
        Self {
            pixels,
            ..self.clone()
        }
    }
}

pub fn frame_timestamp_ms(frame_index: u64, fps: f64) -> u64 {
    (frame_index as f64 * 1000.0 / fps).round() as u64
}

/// Static skim mask: `true` keeps a pixel, `false` conceals it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiMask {
    raster: Mask,
}

impl RoiMask {
    pub fn new(width: usize, height: usize, keep: Vec<bool>) -> Result<Self> {
        Ok(Self {
            raster: Mask::new(width, height, keep)?,
        })
    }

    /// Keeps every row at or below `horizon_row`.
    pub fn below_horizon(width: usize, height: usize, horizon_row: usize) -> Result<Self> {
        Ok(Self {
            raster: Mask::from_fn(width, height, |_, y| y >= horizon_row)?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self {
            raster: load_mask(path)?,
        })
    }

    pub fn width(&self) -> usize {
        self.raster.width
    }

    pub fn height(&self) -> usize {
        self.raster.height
    }

    pub fn keeps(&self, x: usize, y: usize) -> bool {
        self.raster.get(x, y)
    }
}

/// Pixelwise AND of `mask` and `roi`.
pub fn apply_roi(mask: &Mask, roi: &RoiMask) -> Result<Mask> {
    mask.same_shape(roi.width(), roi.height())?;
    let pixels = mask
        .pixels
        .iter()
        .zip(&roi.raster.pixels)
        .map(|(&m, &k)| m && k)
        .collect();
    Ok(Mask {
        pixels,
        ..mask.clone()
    })
}

fn stride_cap(points: Vec<Point2D>, max_points: usize) -> Result<Vec<Point2D>> {
    if max_points == 0 {
        return Err(Error::InvalidConfig("max_points must be positive".into()));
    }
    if points.len() <= max_points {
        return Ok(points);
    }
    let stride = points.len().div_ceil(max_points);
    Ok(points.into_iter().step_by(stride).collect())
}

/// Lane pixel coordinates, stride-subsampled in row-major order so that at
/// most `max_points` are returned.
pub fn mask_to_points(mask: &Mask, max_points: usize) -> Result<Vec<Point2D>> {
    let points: Vec<Point2D> = mask
        .lane_pixels()
        .map(|(x, y)| Point2D::new(x as f64, y as f64))
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyMask);
    }
    stride_cap(points, max_points)
}

/// Leftmost and rightmost lane pixel of every row. The convex hull of these
/// equals the hull of all lane pixels.
pub fn mask_row_extremes(mask: &Mask, max_points: usize) -> Result<Vec<Point2D>> {
    let mut points = Vec::with_capacity(2 * mask.height);
    for (y, row) in mask.pixels.chunks(mask.width).enumerate() {
        let first = row.iter().position(|&p| p);
        let last = row.iter().rposition(|&p| p);
        if let (Some(l), Some(r)) = (first, last) {
            points.push(Point2D::new(l as f64, y as f64));
            if r != l {
                points.push(Point2D::new(r as f64, y as f64));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyMask);
    }
    stride_cap(points, max_points)
}

// ---------------------------------------------------------------------------
// PGM

struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("{what} out of range")))
    }
}

/// Decodes an 8-bit PGM (P5 binary or P2 ASCII). Any value > 0 is lane.
pub fn decode_pgm(data: &[u8]) -> Result<Mask> {
    if data.len() < 2 {
        return Err(Error::Format("file too short for PGM magic".into()));
    }
    let binary = match &data[..2] {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(Error::Format("bad magic, expected P5 or P2".into())),
    };
    let mut rd = HeaderReader { data, pos: 2 };
    let width = rd.number("width")?;
    let height = rd.number("height")?;
    let maxval = rd.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!(
            "invalid dimensions {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;

    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        if rd.pos >= data.len() || !data[rd.pos].is_ascii_whitespace() {
            return Err(Error::Format("missing raster".into()));
        }
        let start = rd.pos + 1;
        let raster = data
            .get(start..start + n)
            .ok_or_else(|| Error::Format(format!("truncated raster: expected {n} bytes")))?;
        raster.iter().map(|&v| v > 0).collect()
    } else {
        let mut pixels = Vec::with_capacity(n);
        for _ in 0..n {
            let v = rd
                .number("pixel value")
                .map_err(|_| Error::Format("truncated ASCII raster".into()))?;
            if v > maxval {
                return Err(Error::Format(format!(
                    "pixel value {v} exceeds maxval {maxval}"
                )));
            }
            pixels.push(v > 0);
        }
        pixels
    };
    Mask::new(width, height, pixels)
}

/// Encodes as binary PGM with lane pixels at 255.
pub fn encode_pgm(mask: &Mask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
    out.extend(mask.pixels.iter().map(|&p| if p { 255u8 } else { 0 }));
    out
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&data).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(mask)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Manifest

#[derive(Debug, Clone, PartialEq)]
pub struct FrameEntry {
    pub frame_index: u64,
    pub path: PathBuf,
}

/// Frame list of one clip. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceManifest {
    pub fps: f64,
    pub width: usize,
    pub height: usize,
    pub entries: Vec<FrameEntry>,
}

impl SequenceManifest {
    /// Format: first line `fps,width,height`, then `frame_index,relative_path`
    /// per frame. Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (_, header) = lines.next().ok_or(Error::EmptySequence)?;
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        let [fps, width, height] = fields[..] else {
            return Err(Error::Format(format!(
                "manifest header `{header}`: expected fps,width,height"
            )));
        };
        let bad = |what: &str| Error::Format(format!("manifest header: invalid {what}"));
        let fps: f64 = fps.parse().map_err(|_| bad("fps"))?;
        let width: usize = width.parse().map_err(|_| bad("width"))?;
        let height: usize = height.parse().map_err(|_| bad("height"))?;
        if !(fps.is_finite() && fps > 0.0) {
            return Err(bad("fps"));
        }
        if width == 0 || height == 0 {
            return Err(bad("dimensions"));
        }

        let mut entries: Vec<FrameEntry> = Vec::new();
        for (lineno, line) in lines {
            let (idx, path) = line.split_once(',').ok_or_else(|| {
                Error::Format(format!(
                    "manifest line {}: expected frame_index,path",
                    lineno + 1
                ))
            })?;
            let frame_index: u64 = idx.trim().parse().map_err(|_| {
                Error::Format(format!("manifest line {}: bad frame index", lineno + 1))
            })?;
            if let Some(prev) = entries.last() {
                if frame_index <= prev.frame_index {
                    return Err(Error::Format(format!(
                        "manifest line {}: frame indices must strictly increase",
                        lineno + 1
                    )));
                }
            }
            entries.push(FrameEntry {
                frame_index,
                path: PathBuf::from(path.trim()),
            });
        }
        Ok(Self {
            fps,
            width,
            height,
            entries,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{},{},{}\n", self.fps, self.width, self.height);
        for e in &self.entries {
            let _ = writeln!(s, "{},{}", e.frame_index, e.path.display());
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Loads every frame listed in the manifest at `manifest_path`, checking
/// dimensions against the header.
pub fn load_sequence(manifest_path: impl AsRef<Path>) -> Result<(SequenceManifest, Vec<Mask>)> {
    use rayon::prelude::*;

    let manifest_path = manifest_path.as_ref();
    let manifest = SequenceManifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let masks = manifest
        .entries
        .par_iter()
        .map(|e| {
            let m = load_mask(base.join(&e.path)).map_err(|err| err.at_frame(e.frame_index))?;
            m.same_shape(manifest.width, manifest.height)
                .map_err(|err| err.at_frame(e.frame_index))?;
            Ok(m.with_frame(e.frame_index, manifest.fps))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, masks))
}
