mod common;

use common::{brute_force_hull, in_convex, sorted};
use lanedep::geometry::{
    point_line_distance, polygon_centroid, quickhull, signed_center_offset, ConvexPolygon, Line2D,
    Point2D,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point2D> {
    (0..n)
        .map(|_| Point2D::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
        .collect()
}

#[test]
fn fifty_random_points_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let pts = random_points(&mut rng, 50);
    let hull = quickhull(&pts).unwrap();
    assert_eq!(
        sorted(hull.vertices().to_vec()),
        sorted(brute_force_hull(&pts))
    );
}

#[test]
fn small_random_sets_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let n = rng.random_range(3..=50);
        let pts = random_points(&mut rng, n);
        let hull = quickhull(&pts).unwrap();
        assert_eq!(
            sorted(hull.vertices().to_vec()),
            sorted(brute_force_hull(&pts))
        );
    }
}

#[test]
fn centroid_matches_monte_carlo() {
    // Irregular convex pentagon: vertices on an ellipse at uneven angles.
    let angles: [f64; 5] = [0.1, 1.3, 2.0, 3.9, 5.2];
    let verts: Vec<Point2D> = angles
        .iter()
        .map(|a| Point2D::new(20.0 + 4.0 * a.cos(), 35.0 + 2.5 * a.sin()))
        .collect();
    let poly = ConvexPolygon::new(verts.clone()).unwrap();
    let c = polygon_centroid(&poly).unwrap();

    let (x0, x1) = (15.5, 24.5);
    let (y0, y1) = (32.0, 38.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let (mut sx, mut sy, mut hits) = (0.0, 0.0, 0u64);
    for _ in 0..1_000_000 {
        let p = Point2D::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if in_convex(&verts, p) {
            sx += p.x;
            sy += p.y;
            hits += 1;
        }
    }
    let (mx, my) = (sx / hits as f64, sy / hits as f64);
    assert!((c.x - mx).abs() < 0.01, "x {} vs {}", c.x, mx);
    assert!((c.y - my).abs() < 0.01, "y {} vs {}", c.y, my);
    // and it is not the vertex mean
    let vx = verts.iter().map(|p| p.x).sum::<f64>() / 5.0;
    assert!((vx - mx).abs() > 0.1, "vertex mean {vx}");
}

fn general_position_points() -> impl Strategy<Value = Vec<Point2D>> {
    prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 3..50)
        .prop_map(|v| v.into_iter().map(Point2D::from).collect())
}

proptest! {
    #[test]
    fn hull_contains_inputs_and_is_idempotent(pts in general_position_points()) {
        let Ok(hull) = quickhull(&pts) else { return Ok(()) };
        for p in &pts {
            prop_assert!(hull.contains(*p));
        }
        let again = quickhull(hull.vertices()).unwrap();
        prop_assert_eq!(sorted(again.vertices().to_vec()), sorted(hull.vertices().to_vec()));
        prop_assert!(hull.area() > 0.0);
    }

    #[test]
    fn hull_matches_oracle(pts in general_position_points()) {
        let Ok(hull) = quickhull(&pts) else { return Ok(()) };
        prop_assert_eq!(sorted(hull.vertices().to_vec()), sorted(brute_force_hull(&pts)));
    }

    #[test]
    fn rigid_motion_equivariance(
        pts in general_position_points(),
        theta in 0.0f64..std::f64::consts::TAU,
        tx in -500.0f64..500.0,
        ty in -500.0f64..500.0,
    ) {
        let Ok(hull) = quickhull(&pts) else { return Ok(()) };
        let (s, c) = theta.sin_cos();
        let mv = |p: Point2D| Point2D::new(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty);
        let moved: Vec<Point2D> = pts.iter().copied().map(mv).collect();
        let Ok(hull2) = quickhull(&moved) else { return Ok(()) };

        let scale = 700.0;
        let expected: Vec<Point2D> = hull.vertices().iter().copied().map(mv).collect();
        prop_assert_eq!(hull2.len(), expected.len());
        for e in &expected {
            prop_assert!(hull2.vertices().iter().any(|v| (v.x - e.x).hypot(v.y - e.y) <= 1e-9 * scale));
        }
        let c1 = mv(polygon_centroid(&hull).unwrap());
        let c2 = polygon_centroid(&hull2).unwrap();
        prop_assert!((c1.x - c2.x).hypot(c1.y - c2.y) <= 1e-9 * scale);
    }

    #[test]
    fn signed_offset_magnitude_is_line_distance(x in -1e4f64..1e4, y in -1e4f64..1e4, cx in -1e4f64..1e4) {
        let p = Point2D::new(x, y);
        prop_assert_eq!(signed_center_offset(p, cx).abs(), point_line_distance(&Line2D::vertical(cx), p));
    }
}
