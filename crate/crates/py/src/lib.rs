//! Python bindings for the lane-departure pipeline.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lanedep::classifier::{self, Direction, EventKind, LaneEvent, PeakConfig};
use lanedep::evaluation::{self, ConfusionCounts, EvalConfig};
use lanedep::geometry::{self, ConvexPolygon, Line2D, Point2D};
use lanedep::mask_io::{self, Mask};
use lanedep::pipeline::{self, PipelineConfig};
use lanedep::synth::{self, Preset, Scenario};
use lanedep::tracking::{self, Centering, KalmanConfig, OffsetSeries, Stage};

fn to_py(e: lanedep::Error) -> PyErr {
    match e {
        lanedep::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn points(pts: &[(f64, f64)]) -> Vec<Point2D> {
    pts.iter().map(|&p| p.into()).collect()
}

fn pairs(pts: &[Point2D]) -> Vec<(f64, f64)> {
    pts.iter().map(|p| (p.x, p.y)).collect()
}

// ---------------------------------------------------------------------------

/// Binary lane mask.
#[pyclass(name = "Mask", module = "lanedep", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMask {
    inner: Mask,
}

#[pymethods]
impl PyMask {
    /// Builds a mask from rows of values; nonzero means lane.
    #[new]
    fn new(rows: Vec<Vec<i64>>) -> PyResult<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(PyValueError::new_err("rows must have equal length"));
        }
        let pixels = rows.into_iter().flatten().map(|v| v > 0).collect();
        Ok(Self {
            inner: Mask::new(width, height, pixels).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: mask_io::load_mask(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        mask_io::save_mask(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn frame_index(&self) -> u64 {
        self.inner.frame_index
    }

    #[getter]
    fn lane_count(&self) -> usize {
        self.inner.lane_count()
    }

    fn to_rows(&self) -> Vec<Vec<bool>> {
        self.inner
            .pixels()
            .chunks(self.inner.width())
            .map(<[bool]>::to_vec)
            .collect()
    }

    fn mirrored(&self) -> Self {
        Self {
            inner: self.inner.mirrored(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Mask({}x{}, lane_count={}, frame_index={})",
            self.inner.width(),
            self.inner.height(),
            self.inner.lane_count(),
            self.inner.frame_index
        )
    }
}

fn masks(list: &[PyRef<'_, PyMask>]) -> Vec<Mask> {
    list.iter().map(|m| m.inner.clone()).collect()
}

/// One detected or ground-truth event.
#[pyclass(
    name = "LaneEvent",
    module = "lanedep",
    frozen,
    get_all,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyLaneEvent {
    kind: &'static str,
    direction: &'static str,
    frame_index: u64,
    peak_frames: (u64, Option<u64>),
    amplitudes: (f64, Option<f64>),
}

impl From<&LaneEvent> for PyLaneEvent {
    fn from(e: &LaneEvent) -> Self {
        Self {
            kind: match e.kind {
                EventKind::Change => "change",
                EventKind::Incursion => "incursion",
            },
            direction: match e.direction {
                Direction::Left => "left",
                Direction::Right => "right",
                Direction::None => "none",
            },
            frame_index: e.frame_index,
            peak_frames: e.peak_frames,
            amplitudes: e.amplitudes,
        }
    }
}

#[pymethods]
impl PyLaneEvent {
    fn __repr__(&self) -> String {
        format!(
            "LaneEvent(kind={:?}, direction={:?}, frame_index={})",
            self.kind, self.direction, self.frame_index
        )
    }
}

fn py_events(events: &[LaneEvent]) -> Vec<PyLaneEvent> {
    events.iter().map(PyLaneEvent::from).collect()
}

/// Synthetic clip with ground truth.
#[pyclass(
    name = "SyntheticClip",
    module = "lanedep",
    frozen,
    skip_from_py_object
)]
struct PySyntheticClip {
    inner: synth::SyntheticClip,
}

#[pymethods]
impl PySyntheticClip {
    #[getter]
    fn masks(&self) -> Vec<PyMask> {
        self.inner
            .masks
            .iter()
            .map(|m| PyMask { inner: m.clone() })
            .collect()
    }

    #[getter]
    fn truth_events(&self) -> Vec<PyLaneEvent> {
        py_events(&self.inner.truth_events)
    }

    #[getter]
    fn fps(&self) -> f64 {
        self.inner.scenario.fps
    }

    /// Programmed lateral displacement per frame.
    #[getter]
    fn lateral(&self) -> Vec<f64> {
        self.inner.trajectory.iter().map(|t| t.lateral).collect()
    }

    /// Writes the clip under `directory`; returns the manifest path.
    fn write_to(&self, directory: PathBuf) -> PyResult<PathBuf> {
        self.inner.write_to(directory).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.masks.len()
    }
}

// ---------------------------------------------------------------------------
// geometry

#[pyfunction]
fn quickhull(pts: Vec<(f64, f64)>) -> PyResult<Vec<(f64, f64)>> {
    let hull = geometry::quickhull(&points(&pts)).map_err(to_py)?;
    Ok(pairs(hull.vertices()))
}

/// Area centroid of a convex polygon given counter-clockwise.
#[pyfunction]
fn polygon_centroid(vertices: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    let poly = ConvexPolygon::new(points(&vertices)).map_err(to_py)?;
    let c = geometry::polygon_centroid(&poly).map_err(to_py)?;
    Ok((c.x, c.y))
}

/// Distance from `point` to the line `a*x + b*y + c = 0`.
#[pyfunction]
fn point_line_distance(a: f64, b: f64, c: f64, point: (f64, f64)) -> PyResult<f64> {
    let line = Line2D::new(a, b, c).map_err(to_py)?;
    Ok(geometry::point_line_distance(&line, point.into()))
}

/// Hull vertices and centroid of a mask, or `None` when it has no usable
/// lane pixels.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn mask_hull(mask: PyRef<'_, PyMask>) -> PyResult<Option<(Vec<(f64, f64)>, (f64, f64))>> {
    let hull = tracking::mask_hull(&mask.inner, &Default::default()).map_err(to_py)?;
    Ok(hull.map(|(poly, c)| (pairs(poly.vertices()), (c.x, c.y))))
}

// ---------------------------------------------------------------------------
// tracking and classification

fn series(values: &[Option<f64>], stage: Stage) -> PyResult<OffsetSeries> {
    OffsetSeries::from_values(values, stage).map_err(to_py)
}

/// Raw per-frame vertical offsets; `None` where a frame has no lane.
#[pyfunction]
fn compute_offsets(masks_: Vec<PyRef<'_, PyMask>>) -> PyResult<Vec<Option<f64>>> {
    let s = tracking::compute_offsets(&masks(&masks_), None, &Default::default()).map_err(to_py)?;
    Ok(s.values())
}

/// Subtracts the clip mean, or a centred moving mean over `window` frames.
#[pyfunction]
#[pyo3(signature = (values, window=None))]
fn center_offsets(values: Vec<Option<f64>>, window: Option<u64>) -> PyResult<Vec<Option<f64>>> {
    let mode = window.map_or(Centering::Global, |window| Centering::Sliding { window });
    Ok(tracking::center_series(&series(&values, Stage::Raw)?, mode)
        .map_err(to_py)?
        .values())
}

/// Fixed-lag smoothing of a centered offset series.
#[pyfunction]
#[pyo3(signature = (values, lag=15, process_noise=0.5, measurement_noise=9.0, max_gap_frames=25))]
fn kalman_smooth(
    values: Vec<Option<f64>>,
    lag: usize,
    process_noise: f64,
    measurement_noise: f64,
    max_gap_frames: u64,
) -> PyResult<Vec<Option<f64>>> {
    let cfg = KalmanConfig {
        lag,
        process_noise,
        measurement_noise,
        max_gap_frames,
    };
    Ok(
        tracking::kalman_smooth(&series(&values, Stage::Centered)?, &cfg)
            .map_err(to_py)?
            .values(),
    )
}

fn peak_config(
    min_prominence: f64,
    min_peak_distance: u64,
    max_pair_distance: u64,
    invert_direction: bool,
) -> PeakConfig {
    PeakConfig {
        min_prominence,
        min_peak_distance,
        max_pair_distance,
        invert_direction,
        ..Default::default()
    }
}

/// Lane events in a smoothed offset series.
#[pyfunction]
#[pyo3(signature = (values, min_prominence=10.0, min_peak_distance=12, max_pair_distance=75, invert_direction=false))]
fn detect_events(
    values: Vec<Option<f64>>,
    min_prominence: f64,
    min_peak_distance: u64,
    max_pair_distance: u64,
    invert_direction: bool,
) -> PyResult<Vec<PyLaneEvent>> {
    let cfg = peak_config(
        min_prominence,
        min_peak_distance,
        max_pair_distance,
        invert_direction,
    );
    let events =
        classifier::detect_events(&series(&values, Stage::Smoothed)?, &cfg).map_err(to_py)?;
    Ok(py_events(&events))
}

/// Runs the whole chain over in-memory masks. Returns a dict with `raw`,
/// `centered`, `smoothed` and `events`.
#[pyfunction]
#[pyo3(signature = (masks_, fps=25.0, lag=15, min_prominence=10.0, max_pair_distance=75, invert_direction=false))]
fn process_masks<'py>(
    py: Python<'py>,
    masks_: Vec<PyRef<'py, PyMask>>,
    fps: f64,
    lag: usize,
    min_prominence: f64,
    max_pair_distance: u64,
    invert_direction: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = PipelineConfig::default();
    cfg.kalman.lag = lag;
    cfg.peaks = PeakConfig {
        min_prominence,
        max_pair_distance,
        invert_direction,
        ..cfg.peaks
    };
    let ms = masks(&masks_);
    let out = py
        .detach(|| pipeline::process_masks(&ms, None, fps, &cfg))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("raw", out.raw.values())?;
    d.set_item("centered", out.centered.values())?;
    d.set_item("smoothed", out.smoothed.values())?;
    d.set_item("events", py_events(&out.events))?;
    Ok(d)
}

/// Runs the pipeline on a manifest and writes the artifacts into `out_dir`.
/// Returns the run summary as a dict.
#[pyfunction]
#[pyo3(signature = (manifest, out_dir, roi=None, lag=15, min_prominence=10.0, max_pair_distance=75, invert_direction=false))]
#[allow(clippy::too_many_arguments)]
fn run_pipeline<'py>(
    py: Python<'py>,
    manifest: PathBuf,
    out_dir: PathBuf,
    roi: Option<PathBuf>,
    lag: usize,
    min_prominence: f64,
    max_pair_distance: u64,
    invert_direction: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = PipelineConfig::default();
    cfg.kalman.lag = lag;
    cfg.peaks = PeakConfig {
        min_prominence,
        max_pair_distance,
        invert_direction,
        ..cfg.peaks
    };
    let (summary, artifacts) = py
        .detach(|| pipeline::run_pipeline(&manifest, roi.as_deref(), &out_dir, &cfg))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("frames", summary.frames)?;
    d.set_item("valid_frames", summary.valid_frames)?;
    d.set_item("fps", summary.fps)?;
    d.set_item("left_changes", summary.events.left_changes)?;
    d.set_item("right_changes", summary.events.right_changes)?;
    d.set_item("left_incursions", summary.events.left_incursions)?;
    d.set_item("right_incursions", summary.events.right_incursions)?;
    d.set_item("offsets_path", artifacts.offsets)?;
    d.set_item("events_path", artifacts.events)?;
    d.set_item("summary_path", artifacts.summary)?;
    Ok(d)
}

/// Reads an event log written by `run_pipeline` or `SyntheticClip.write_to`.
#[pyfunction]
fn load_events(path: PathBuf) -> PyResult<Vec<PyLaneEvent>> {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
    Ok(py_events(
        &classifier::events_from_jsonl(&text).map_err(to_py)?,
    ))
}

// ---------------------------------------------------------------------------
// evaluation

#[pyfunction]
fn iou(a: PyRef<'_, PyMask>, b: PyRef<'_, PyMask>) -> PyResult<f64> {
    evaluation::iou(&a.inner, &b.inner).map_err(to_py)
}

/// Mean over thresholds of TP / (TP + FP + FN), frames paired in order.
#[pyfunction]
#[pyo3(signature = (predictions, truths, thresholds=vec![0.5]))]
fn map_score(
    predictions: Vec<PyRef<'_, PyMask>>,
    truths: Vec<PyRef<'_, PyMask>>,
    thresholds: Vec<f64>,
) -> PyResult<f64> {
    let cfg = EvalConfig {
        iou_thresholds: thresholds,
        ..Default::default()
    };
    evaluation::map_score(&masks(&predictions), &masks(&truths), &cfg).map_err(to_py)
}

/// TP / (TP + FN).
#[pyfunction]
#[pyo3(signature = (tp, fn_))]
fn sensitivity(tp: u64, fn_: u64) -> PyResult<f64> {
    evaluation::sensitivity(&ConfusionCounts {
        tp,
        fn_,
        ..Default::default()
    })
    .map_err(to_py)
}

// ---------------------------------------------------------------------------
// synthesis

/// Renders a synthetic clip from a preset name or a scenario config text.
#[pyfunction]
#[pyo3(signature = (preset=None, config=None, seed=0, jitter=None, dropout=None))]
fn generate(
    py: Python<'_>,
    preset: Option<&str>,
    config: Option<&str>,
    seed: u64,
    jitter: Option<f64>,
    dropout: Option<f64>,
) -> PyResult<PySyntheticClip> {
    let mut scenario = match (preset, config) {
        (Some(_), Some(_)) => {
            return Err(PyValueError::new_err(
                "pass either preset or config, not both",
            ))
        }
        (_, Some(text)) => Scenario::parse_config(text).map_err(to_py)?,
        (Some(name), None) => name.parse::<Preset>().map_err(to_py)?.scenario(),
        (None, None) => Preset::LaneKeep.scenario(),
    };
    if let Some(j) = jitter {
        scenario.noise.jitter_sigma = j;
    }
    if let Some(d) = dropout {
        scenario.noise.dropout_prob = d;
    }
    let clip = py
        .detach(|| synth::generate(&scenario, seed))
        .map_err(to_py)?;
    Ok(PySyntheticClip { inner: clip })
}

#[pymodule(name = "lanedep")]
fn lanedep_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMask>()?;
    m.add_class::<PyLaneEvent>()?;
    m.add_class::<PySyntheticClip>()?;
    m.add_function(wrap_pyfunction!(quickhull, m)?)?;
    m.add_function(wrap_pyfunction!(polygon_centroid, m)?)?;
    m.add_function(wrap_pyfunction!(point_line_distance, m)?)?;
    m.add_function(wrap_pyfunction!(mask_hull, m)?)?;
    m.add_function(wrap_pyfunction!(compute_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(center_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(kalman_smooth, m)?)?;
    m.add_function(wrap_pyfunction!(detect_events, m)?)?;
    m.add_function(wrap_pyfunction!(process_masks, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(load_events, m)?)?;
    m.add_function(wrap_pyfunction!(iou, m)?)?;
    m.add_function(wrap_pyfunction!(map_score, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
