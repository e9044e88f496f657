use std::collections::HashSet;

use lanedep::classifier::{
    classify_events, detect_events, detect_peaks, mirror_series, Direction, EventKind, LaneEvent,
    PeakConfig,
};
use lanedep::pipeline::{process_masks, PipelineConfig};
use lanedep::synth::{generate, Maneuver, Noise, Scenario};
use lanedep::tracking::{kalman_smooth, KalmanConfig, OffsetSeries, Stage};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn smoothed(values: &[f64]) -> OffsetSeries {
    let v: Vec<Option<f64>> = values.iter().copied().map(Some).collect();
    OffsetSeries::from_values(&v, Stage::Smoothed).unwrap()
}

fn bumps(n: usize, shape: &[(f64, f64)]) -> Vec<f64> {
    (0..n)
        .map(|t| {
            shape
                .iter()
                .map(|&(c, a)| a * (-((t as f64 - c) / 5.0).powi(2) / 2.0).exp())
                .sum()
        })
        .collect()
}

fn pipeline_events(
    kind: EventKind,
    direction: Direction,
    amplitude: f64,
    seed: u64,
) -> Vec<LaneEvent> {
    let sc = Scenario::single(
        Maneuver {
            kind,
            direction,
            start_frame: 150,
            duration_frames: 60,
            amplitude,
        },
        400,
    )
    .with_noise(Noise {
        jitter_sigma: 2.0,
        dropout_prob: 0.01,
        speckle_prob: 0.0,
    });
    let clip = generate(&sc, seed).unwrap();
    process_masks(&clip.masks, None, sc.fps, &PipelineConfig::default())
        .unwrap()
        .events
}

#[test]
fn synthetic_left_change() {
    let ev = pipeline_events(EventKind::Change, Direction::Left, 80.0, 1);
    assert_eq!(ev.len(), 1, "{ev:?}");
    assert_eq!(
        (ev[0].kind, ev[0].direction),
        (EventKind::Change, Direction::Left)
    );
    assert!(ev[0].frame_index.abs_diff(150) <= 50);
}

#[test]
fn synthetic_right_change() {
    let ev = pipeline_events(EventKind::Change, Direction::Right, 80.0, 2);
    assert_eq!(ev.len(), 1, "{ev:?}");
    assert_eq!(
        (ev[0].kind, ev[0].direction),
        (EventKind::Change, Direction::Right)
    );
    assert!(ev[0].frame_index.abs_diff(150) <= 50);
}

#[test]
fn synthetic_incursion() {
    let ev = pipeline_events(EventKind::Incursion, Direction::Left, 40.0, 3);
    assert_eq!(ev.len(), 1, "{ev:?}");
    assert_eq!(
        (ev[0].kind, ev[0].direction),
        (EventKind::Incursion, Direction::Left)
    );
    assert!(ev[0].frame_index.abs_diff(150) <= 50);
}

#[test]
fn lane_keep_noise_raises_no_alarm() {
    let cfg = PeakConfig::default();
    let noise = Normal::new(0.0, cfg.min_prominence / 4.0).unwrap();
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<Option<f64>> = (0..500).map(|_| Some(noise.sample(&mut rng))).collect();
        let s = kalman_smooth(
            &OffsetSeries::from_values(&v, Stage::Centered).unwrap(),
            &KalmanConfig::default(),
        )
        .unwrap();
        let ev = detect_events(&s, &cfg).unwrap();
        assert!(ev.is_empty(), "seed {seed}: {ev:?}");
    }
}

fn bump_layout() -> impl Strategy<Value = Vec<(f64, f64)>> {
    // Up to six bumps at least 30 frames apart with random sign and size.
    prop::collection::vec((30u32..60, 20.0f64..60.0, any::<bool>()), 0..6).prop_map(|v| {
        let mut t = 20.0;
        v.into_iter()
            .map(|(gap, a, neg)| {
                t += gap as f64;
                (t, if neg { -a } else { a })
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn mirroring_swaps_directions(layout in bump_layout(), noise_seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let n = Normal::new(0.0, 1.0).unwrap();
        let v: Vec<f64> = bumps(420, &layout).into_iter().map(|x| x + n.sample(&mut rng)).collect();
        let s = smoothed(&v);
        let cfg = PeakConfig::default();
        let ev = detect_events(&s, &cfg).unwrap();
        let mirrored = detect_events(&mirror_series(&s).unwrap(), &cfg).unwrap();
        prop_assert_eq!(ev.len(), mirrored.len());
        for (a, b) in ev.iter().zip(&mirrored) {
            prop_assert_eq!(a.kind, b.kind);
            prop_assert_eq!(a.frame_index, b.frame_index);
            prop_assert_eq!(a.direction.flipped(), b.direction);
        }
    }

    #[test]
    fn scaling_preserves_events(layout in bump_layout(), k in 0.6f64..5.0) {
        let cfg = PeakConfig::default();
        let v = bumps(420, &layout);
        let scaled: Vec<f64> = v.iter().map(|x| k * x).collect();
        let a = detect_events(&smoothed(&v), &cfg).unwrap();
        let b = detect_events(&smoothed(&scaled), &cfg).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!((x.kind, x.direction, x.frame_index), (y.kind, y.direction, y.frame_index));
        }
    }

    #[test]
    fn extrema_used_at_most_once(layout in bump_layout()) {
        let cfg = PeakConfig { shallowness_ratio: None, ..Default::default() };
        let extrema = detect_peaks(&smoothed(&bumps(420, &layout)), &cfg).unwrap();
        let events = classify_events(&extrema, &cfg).unwrap();
        let mut used = HashSet::new();
        for e in &events {
            prop_assert!(used.insert(e.peak_frames.0));
            if let Some(second) = e.peak_frames.1 {
                prop_assert!(used.insert(second));
            }
        }
        // without the shallowness gate every extremum lands in exactly one event
        prop_assert_eq!(used.len(), extrema.len());
    }
}
