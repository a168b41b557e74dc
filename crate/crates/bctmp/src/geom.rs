//! Planar geometry: SE(2) poses, points, segments, and convex polygons.
//!
//! All distances are exact (no sampling). Obstacles are convex polygons with
//! counter-clockwise winding; arm links are capsules, i.e. segments tested
//! against polygons with a clearance radius.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Wraps an angle into `(-PI, PI]`.
#[must_use]
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// A point or displacement in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[must_use]
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[must_use]
    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    #[must_use]
    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    #[must_use]
    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    #[must_use]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// Z component of the cross product `self x o`.
    #[must_use]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[must_use]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[must_use]
    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }

    /// Unit vector at angle `a` from the +x axis.
    #[must_use]
    pub fn unit(a: f64) -> Point {
        Point::new(a.cos(), a.sin())
    }
}

/// An SE(2) pose: position plus heading, with `theta` kept in `(-PI, PI]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    #[must_use]
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2 {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    #[must_use]
    pub fn identity() -> Self {
        Pose2::new(0.0, 0.0, 0.0)
    }

    #[must_use]
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Group composition: applies `other` in this pose's frame.
    #[must_use]
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )
    }

    /// Group inverse: `p.compose(&p.inverse())` is the identity.
    #[must_use]
    pub fn inverse(&self) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2::new(
            -(c * self.x + s * self.y),
            -(-s * self.x + c * self.y),
            -self.theta,
        )
    }

    /// Maps a point from this pose's frame into the parent frame.
    #[must_use]
    pub fn transform_point(&self, p: Point) -> Point {
        let (s, c) = self.theta.sin_cos();
        Point::new(self.x + c * p.x - s * p.y, self.y + s * p.x + c * p.y)
    }
}

/// Distance from point `p` to segment `ab`.
#[must_use]
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) - 1e-12
        && p.x <= a.x.max(b.x) + 1e-12
        && p.y >= a.y.min(b.y) - 1e-12
        && p.y <= a.y.max(b.y) + 1e-12
}

/// Whether segments `ab` and `cd` intersect (endpoints and collinear overlap
/// count as intersection).
#[must_use]
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Minimum distance between segments `ab` and `cd`; zero when they intersect.
#[must_use]
pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// A convex polygon with counter-clockwise winding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConvexPolygon {
    verts: Vec<Point>,
}

/// Why a vertex list was rejected as a convex obstacle.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not strictly convex with CCW winding at vertex {0}")]
    NotConvexCcw(usize),
}

impl ConvexPolygon {
    /// Validates winding and convexity. Every consecutive edge pair must turn
    /// strictly left, which also rejects repeated and collinear vertices.
    pub fn new(verts: Vec<Point>) -> Result<Self, PolygonError> {
        if verts.len() < 3 {
            return Err(PolygonError::TooFewVertices(verts.len()));
        }
        let n = verts.len();
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let c = verts[(i + 2) % n];
            if orient(a, b, c) <= 0.0 {
                return Err(PolygonError::NotConvexCcw((i + 1) % n));
            }
        }
        Ok(ConvexPolygon { verts })
    }

    /// Axis-aligned rectangle helper.
    pub fn rect(cx: f64, cy: f64, half_w: f64, half_h: f64) -> Self {
        ConvexPolygon::new(vec![
            Point::new(cx - half_w, cy - half_h),
            Point::new(cx + half_w, cy - half_h),
            Point::new(cx + half_w, cy + half_h),
            Point::new(cx - half_w, cy + half_h),
        ])
        .expect("rectangle with positive extents is convex")
    }

    #[must_use]
    pub fn vertices(&self) -> &[Point] {
        &self.verts
    }

    /// Point containment; boundary points count as inside.
    #[must_use]
    pub fn contains(&self, p: Point) -> bool {
        let n = self.verts.len();
        for i in 0..n {
            if orient(self.verts[i], self.verts[(i + 1) % n], p) < 0.0 {
                return false;
            }
        }
        true
    }

    /// Exact distance from segment `ab` to this polygon; zero when the
    /// segment touches or enters it.
    #[must_use]
    pub fn segment_distance(&self, a: Point, b: Point) -> f64 {
        if self.contains(a) || self.contains(b) {
            return 0.0;
        }
        let n = self.verts.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let d = segment_segment_distance(a, b, self.verts[i], self.verts[(i + 1) % n]);
            if d < best {
                best = d;
            }
            if best == 0.0 {
                break;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn wrap_angle_hits_half_open_interval() {
        let cases = [
            (0.0, 0.0),
            (PI, PI),
            (-PI, PI),
            (3.0 * PI, PI),
            (2.0 * PI, 0.0),
            (-PI / 2.0, -PI / 2.0),
            (5.0 * PI / 2.0, PI / 2.0),
            (-7.0 * PI / 2.0, PI / 2.0),
        ];
        for (input, want) in cases {
            assert_relative_eq!(wrap_angle(input), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn pose_transform_matches_hand_computation() {
        let p = Pose2::new(1.0, 2.0, PI / 2.0);
        let q = p.transform_point(Point::new(3.0, 0.0));
        assert_relative_eq!(q.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(q.y, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn point_segment_distance_table() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 0.0);
        let cases = [
            (Point::new(1.0, 1.0), 1.0),
            (Point::new(-1.0, 0.0), 1.0),
            (Point::new(3.0, 4.0), (1.0f64 + 16.0).sqrt()),
            (Point::new(1.5, 0.0), 0.0),
        ];
        for (p, want) in cases {
            assert_relative_eq!(point_segment_distance(p, a, b), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn segment_distance_table() {
        let cases = [
            // crossing
            (
                (Point::new(-1.0, 0.0), Point::new(1.0, 0.0)),
                (Point::new(0.0, -1.0), Point::new(0.0, 1.0)),
                0.0,
            ),
            // parallel
            (
                (Point::new(0.0, 0.0), Point::new(1.0, 0.0)),
                (Point::new(0.0, 0.5), Point::new(1.0, 0.5)),
                0.5,
            ),
            // endpoint to interior
            (
                (Point::new(0.0, 0.0), Point::new(1.0, 0.0)),
                (Point::new(2.0, -1.0), Point::new(2.0, 1.0)),
                1.0,
            ),
            // touching at an endpoint
            (
                (Point::new(0.0, 0.0), Point::new(1.0, 0.0)),
                (Point::new(1.0, 0.0), Point::new(2.0, 1.0)),
                0.0,
            ),
        ];
        for ((a, b), (c, d), want) in cases {
            assert_relative_eq!(segment_segment_distance(a, b, c, d), want, epsilon = 1e-12);
            assert_relative_eq!(segment_segment_distance(c, d, a, b), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn polygon_validation() {
        assert_eq!(
            ConvexPolygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]),
            Err(PolygonError::TooFewVertices(2))
        );
        // clockwise square
        let cw = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ];
        assert!(matches!(
            ConvexPolygon::new(cw),
            Err(PolygonError::NotConvexCcw(_))
        ));
        // dart (non-convex)
        let dart = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.5, 0.5),
            Point::new(0.0, 2.0),
        ];
        assert!(matches!(
            ConvexPolygon::new(dart),
            Err(PolygonError::NotConvexCcw(_))
        ));
        assert!(ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .is_ok());
    }

    #[test]
    fn polygon_containment_and_distance() {
        let sq = ConvexPolygon::rect(0.0, 0.0, 1.0, 1.0);
        assert!(sq.contains(Point::new(0.0, 0.0)));
        assert!(sq.contains(Point::new(1.0, 1.0))); // boundary
        assert!(!sq.contains(Point::new(1.0 + 1e-9, 0.0)));

        // segment fully outside, parallel to an edge
        assert_relative_eq!(
            sq.segment_distance(Point::new(-2.0, 1.5), Point::new(2.0, 1.5)),
            0.5,
            epsilon = 1e-12
        );
        // segment crossing straight through
        assert_relative_eq!(
            sq.segment_distance(Point::new(-2.0, 0.0), Point::new(2.0, 0.0)),
            0.0,
            epsilon = 1e-12
        );
        // segment with one endpoint inside
        assert_relative_eq!(
            sq.segment_distance(Point::new(0.5, 0.5), Point::new(3.0, 0.0)),
            0.0,
            epsilon = 1e-12
        );
        // diagonal approach toward a corner
        let d = sq.segment_distance(Point::new(2.0, 2.0), Point::new(3.0, 2.0));
        assert_relative_eq!(d, Point::new(2.0, 2.0).dist(Point::new(1.0, 1.0)), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn pose_group_laws(
            ax in -10.0..10.0f64, ay in -10.0..10.0f64, at in -10.0..10.0f64,
            bx in -10.0..10.0f64, by in -10.0..10.0f64, bt in -10.0..10.0f64,
            cx in -10.0..10.0f64, cy in -10.0..10.0f64, ct in -10.0..10.0f64,
        ) {
            let a = Pose2::new(ax, ay, at);
            let b = Pose2::new(bx, by, bt);
            let c = Pose2::new(cx, cy, ct);

            let assoc_l = a.compose(&b).compose(&c);
            let assoc_r = a.compose(&b.compose(&c));
            prop_assert!((assoc_l.x - assoc_r.x).abs() < 1e-9);
            prop_assert!((assoc_l.y - assoc_r.y).abs() < 1e-9);
            prop_assert!(wrap_angle(assoc_l.theta - assoc_r.theta).abs() < 1e-9);

            let id = a.compose(&a.inverse());
            prop_assert!(id.x.abs() < 1e-9);
            prop_assert!(id.y.abs() < 1e-9);
            prop_assert!(wrap_angle(id.theta).abs() < 1e-9);

            let id2 = a.inverse().compose(&a);
            prop_assert!(id2.x.abs() < 1e-9);
            prop_assert!(id2.y.abs() < 1e-9);
            prop_assert!(wrap_angle(id2.theta).abs() < 1e-9);

            let e = Pose2::identity();
            let left = e.compose(&a);
            prop_assert!((left.x - a.x).abs() < 1e-12);
            prop_assert!((left.y - a.y).abs() < 1e-12);
        }

        #[test]
        fn wrap_angle_is_idempotent_and_in_range(a in -100.0..100.0f64) {
            let w = wrap_angle(a);
            prop_assert!(w > -PI && w <= PI);
            prop_assert!((wrap_angle(w) - w).abs() < 1e-15);
            // same direction
            prop_assert!((w.sin() - a.sin()).abs() < 1e-9);
            prop_assert!((w.cos() - a.cos()).abs() < 1e-9);
        }

        #[test]
        fn segment_distance_translation_invariant(
            ax in -5.0..5.0f64, ay in -5.0..5.0f64,
            bx in -5.0..5.0f64, by in -5.0..5.0f64,
            cx in -5.0..5.0f64, cy in -5.0..5.0f64,
            dx in -5.0..5.0f64, dy in -5.0..5.0f64,
            tx in -3.0..3.0f64, ty in -3.0..3.0f64,
        ) {
            let t = Point::new(tx, ty);
            let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
            let (c, d) = (Point::new(cx, cy), Point::new(dx, dy));
            let d0 = segment_segment_distance(a, b, c, d);
            let d1 = segment_segment_distance(a.add(t), b.add(t), c.add(t), d.add(t));
            prop_assert!((d0 - d1).abs() < 1e-9);
            // symmetry
            let d2 = segment_segment_distance(c, d, a, b);
            prop_assert!((d0 - d2).abs() < 1e-12);
        }
    }
}
