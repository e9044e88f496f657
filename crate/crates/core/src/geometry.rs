//! Planar primitives used by the tracker: convex hull (QuickHull), polygon
//! area centroid and point-to-line distance.
//!
//! Coordinates are `f64` pixels. The hull is returned counter-clockwise in the
//! usual y-up sense (positive signed area); in image coordinates, where y grows
//! downwards, the same list traverses clockwise on screen.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Point2D {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Twice the signed area of the triangle `o, a, b`. Positive when `b` lies to
/// the left of the directed line `o -> a`.
#[inline]
pub fn cross(o: Point2D, a: Point2D, b: Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Line in implicit form `a*x + b*y + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line2D {
    a: f64,
    b: f64,
    c: f64,
}

impl Line2D {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::DegenerateInput("line coefficients must be finite"));
        }
        if a == 0.0 && b == 0.0 {
            return Err(Error::DegenerateInput("line has a = b = 0"));
        }
        Ok(Self { a, b, c })
    }

    /// The line `x = x0`.
    pub fn vertical(x0: f64) -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: -x0,
        }
    }

    /// The line `y = y0`.
    pub fn horizontal(y0: f64) -> Self {
        Self {
            a: 0.0,
            b: 1.0,
            c: -y0,
        }
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }
}

/// Euclidean distance from `p` to `line`: `|a*x0 + b*y0 + c| / sqrt(a^2 + b^2)`.
pub fn point_line_distance(line: &Line2D, p: Point2D) -> f64 {
    (line.a * p.x + line.b * p.y + line.c).abs() / line.a.hypot(line.b)
}

/// Signed horizontal displacement of `p` from the vertical line `x = center_x`.
/// Positive to the right.
pub fn signed_center_offset(p: Point2D, center_x: f64) -> f64 {
    p.x - center_x
}

/// Strictly convex polygon, vertices counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point2D>,
}

impl ConvexPolygon {
    /// Validates that `vertices` form a strictly convex counter-clockwise ring.
    pub fn new(vertices: Vec<Point2D>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateInput("polygon needs at least 3 vertices"));
        }
        if !vertices.iter().all(Point2D::is_finite) {
            return Err(Error::DegenerateInput("non-finite vertex"));
        }
        let n = vertices.len();
        for i in 0..n {
            let turn = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if turn <= 0.0 {
                return Err(Error::DegenerateInput(
                    "vertices are not strictly convex and counter-clockwise",
                ));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point2D] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn edges(&self) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        let origin = self.vertices[0];
        self.vertices
            .windows(2)
            .map(|w| cross(origin, w[0], w[1]))
            .sum::<f64>()
            / 2.0
    }

    /// Inside-or-on-boundary test.
    pub fn contains(&self, p: Point2D) -> bool {
        self.edges().all(|(a, b)| cross(a, b, p) >= 0.0)
    }
}

/// Convex hull of `points` by QuickHull.
///
/// Duplicate points and points lying on hull edges are dropped. Ties for the
/// farthest point from a dividing line go to the lowest input index, so the
/// output is fully determined by the input order.
pub fn quickhull(points: &[Point2D]) -> Result<ConvexPolygon> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(
            "convex hull needs at least 3 points",
        ));
    }
    if !points.iter().all(Point2D::is_finite) {
        return Err(Error::DegenerateInput("non-finite point"));
    }

    let mut left = 0;
    let mut right = 0;
    for (i, p) in points.iter().enumerate() {
        let l = points[left];
        let r = points[right];
        if p.x < l.x || (p.x == l.x && p.y < l.y) {
            left = i;
        }
        if p.x > r.x || (p.x == r.x && p.y > r.y) {
            right = i;
        }
    }
    let a = points[left];
    let b = points[right];

    let mut below = Vec::new();
    let mut above = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        let side = cross(a, b, p);
        if side < 0.0 {
            below.push(i);
        } else if side > 0.0 {
            above.push(i);
        }
    }
    if below.is_empty() && above.is_empty() {
        return Err(Error::DegenerateInput("all points are collinear"));
    }

    let mut hull = Vec::with_capacity(16);
    hull.push(a);
    find_hull(points, &below, a, b, &mut hull);
    hull.push(b);
    find_hull(points, &above, b, a, &mut hull);

    Ok(ConvexPolygon { vertices: hull })
}

/// Appends, in order from `p` to `q`, the hull vertices among `candidates`
/// (all strictly right of the directed line `p -> q`).
fn find_hull(
    points: &[Point2D],
    candidates: &[usize],
    p: Point2D,
    q: Point2D,
    hull: &mut Vec<Point2D>,
) {
    let Some(&first) = candidates.first() else {
        return;
    };
    let mut farthest = first;
    let mut best = -cross(p, q, points[first]);
    for &i in &candidates[1..] {
        let d = -cross(p, q, points[i]);
        if d > best {
            best = d;
            farthest = i;
        }
    }
    let c = points[farthest];

    let right_of_pc: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| cross(p, c, points[i]) < 0.0)
        .collect();
    let right_of_cq: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| cross(c, q, points[i]) < 0.0)
        .collect();

    find_hull(points, &right_of_pc, p, c, hull);
    hull.push(c);
    find_hull(points, &right_of_cq, c, q, hull);
}

/// Area centroid of the polygon (not the vertex mean).
pub fn polygon_centroid(poly: &ConvexPolygon) -> Result<Point2D> {
    let v = poly.vertices();
    let origin = v[0];
    let mut twice_area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    // Fan triangulation relative to the first vertex keeps magnitudes small
    // for polygons far from the origin.
    for w in v[1..].windows(2) {
        let (ax, ay) = (w[0].x - origin.x, w[0].y - origin.y);
        let (bx, by) = (w[1].x - origin.x, w[1].y - origin.y);
        let t = ax * by - ay * bx;
        twice_area += t;
        cx += (ax + bx) * t;
        cy += (ay + by) * t;
    }
    if twice_area == 0.0 || !twice_area.is_finite() {
        return Err(Error::DegenerateInput("polygon has zero area"));
    }
    Ok(Point2D::new(
        origin.x + cx / (3.0 * twice_area),
        origin.y + cy / (3.0 * twice_area),
    ))
}
