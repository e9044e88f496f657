#![allow(dead_code)]

use lanedep::geometry::Point2D;

fn orient(o: Point2D, a: Point2D, b: Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn strictly_inside_triangle(p: Point2D, a: Point2D, b: Point2D, c: Point2D) -> bool {
    let d1 = orient(a, b, p);
    let d2 = orient(b, c, p);
    let d3 = orient(c, a, p);
    (d1 > 0.0 && d2 > 0.0 && d3 > 0.0) || (d1 < 0.0 && d2 < 0.0 && d3 < 0.0)
}

/// Hull vertices by exhaustion: a point is kept unless it lies strictly inside
/// a triangle of three other points. Exact for point sets in general position.
pub fn brute_force_hull(points: &[Point2D]) -> Vec<Point2D> {
    let n = points.len();
    let mut keep = Vec::new();
    'outer: for i in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if a == i || b == i || c == i {
                        continue;
                    }
                    if strictly_inside_triangle(points[i], points[a], points[b], points[c]) {
                        continue 'outer;
                    }
                }
            }
        }
        keep.push(points[i]);
    }
    keep
}

pub fn sorted(mut v: Vec<Point2D>) -> Vec<Point2D> {
    v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    v
}

/// Inside-or-on test for a convex polygon of either orientation.
pub fn in_convex(poly: &[Point2D], p: Point2D) -> bool {
    let n = poly.len();
    let mut pos = false;
    let mut neg = false;
    for i in 0..n {
        let d = orient(poly[i], poly[(i + 1) % n], p);
        pos |= d > 0.0;
        neg |= d < 0.0;
    }
    !(pos && neg)
}
