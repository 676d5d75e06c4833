//! Exact 2D primitives used by the region algebra: half-planes, convex
//! polygons, half-plane clipping, shoelace areas and tangent lines from a
//! point to a unit circle.
//!
//! Polygons are stored counter-clockwise and strictly convex. Vertices closer
//! than [`MERGE_TOL`] are merged and collinear vertices dropped, so anything
//! that degenerates to a point or a segment becomes the empty polygon with
//! area exactly `0.0`.

use crate::error::{Error, Result};

/// Vertices closer than this (absolute, scenario units) are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// Relative tolerance for the collinearity test on consecutive edges.
const COLLINEAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Reflection across the x-axis.
    pub fn mirror(&self) -> Point2 {
        Point2::new(self.x, -self.y)
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    fn lerp(self, o: Point2, t: f64) -> Point2 {
        Point2::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

fn cross(a: Point2, b: Point2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// The closed half-plane `{(x, y) : a·x + b·y ≤ c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    a: f64,
    b: f64,
    c: f64,
}

impl HalfPlane {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Domain("half-plane coefficients must be finite".into()));
        }
        if a == 0.0 && b == 0.0 {
            return Err(Error::Domain("half-plane normal must be nonzero".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `a·x + b·y − c`; non-positive inside.
    pub fn eval(&self, p: Point2) -> f64 {
        self.a * p.x + self.b * p.y - self.c
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.eval(p) <= 0.0
    }

    /// The closed complement, sharing the boundary line.
    pub fn complement(&self) -> HalfPlane {
        HalfPlane {
            a: -self.a,
            b: -self.b,
            c: -self.c,
        }
    }
}

/// A strictly convex polygon with counter-clockwise vertices, or the empty
/// polygon.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a polygon from vertices in either orientation. Near-duplicate
    /// and collinear vertices are removed; fewer than three remaining
    /// vertices give the empty polygon. Reflex vertices are rejected.
    pub fn from_vertices(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("polygon vertices must be finite".into()));
        }
        let poly = Self::normalized(vertices);
        let n = poly.vertices.len();
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            let c = poly.vertices[(i + 2) % n];
            if cross(b.sub(a), c.sub(b)) <= 0.0 {
                return Err(Error::Domain("polygon is not convex".into()));
            }
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self::normalized(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        polygon_area(self)
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point2) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return false;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            cross(b.sub(a), p.sub(a)) >= 0.0
        })
    }

    pub fn clip(&self, h: &HalfPlane) -> ConvexPolygon {
        clip_convex(self, h)
    }

    fn normalized(mut pts: Vec<Point2>) -> Self {
        dedup_ring(&mut pts);
        if pts.len() < 3 {
            return Self::empty();
        }
        if signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        // Drop collinear vertices until stable.
        loop {
            let n = pts.len();
            if n < 3 {
                return Self::empty();
            }
            let drop = (0..n).find(|&i| {
                let prev = pts[(i + n - 1) % n];
                let cur = pts[i];
                let next = pts[(i + 1) % n];
                let e1 = cur.sub(prev);
                let e2 = next.sub(cur);
                cross(e1, e2).abs() <= COLLINEAR_TOL * e1.norm() * e2.norm()
            });
            match drop {
                Some(i) => {
                    pts.remove(i);
                }
                None => break,
            }
        }
        if signed_area(&pts) <= 0.0 {
            return Self::empty();
        }
        // Canonical start: lowest y, then lowest x.
        let start = (0..pts.len())
            .min_by(|&i, &j| {
                let (p, q) = (pts[i], pts[j]);
                p.y.total_cmp(&q.y).then(p.x.total_cmp(&q.x))
            })
            .unwrap_or(0);
        pts.rotate_left(start);
        Self { vertices: pts }
    }
}

fn dedup_ring(pts: &mut Vec<Point2>) {
    let mut out: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter() {
        if out.last().is_none_or(|q: &Point2| q.dist(p) > MERGE_TOL) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= MERGE_TOL {
        out.pop();
    }
    *pts = out;
}

fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum();
    twice / 2.0
}

/// Shoelace area; `0.0` for the empty polygon.
pub fn polygon_area(p: &ConvexPolygon) -> f64 {
    if p.is_empty() {
        0.0
    } else {
        signed_area(&p.vertices).max(0.0)
    }
}

/// `p ∩ h` by single-plane Sutherland–Hodgman clipping. A polygon entirely
/// inside `h` is returned unchanged.
pub fn clip_convex(p: &ConvexPolygon, h: &HalfPlane) -> ConvexPolygon {
    let n = p.vertices.len();
    if n == 0 {
        return ConvexPolygon::empty();
    }
    let d: Vec<f64> = p.vertices.iter().map(|&v| h.eval(v)).collect();
    if d.iter().all(|&x| x <= 0.0) {
        return p.clone();
    }
    if d.iter().all(|&x| x > 0.0) {
        return ConvexPolygon::empty();
    }
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (cur, next) = (p.vertices[i], p.vertices[j]);
        let (dc, dn) = (d[i], d[j]);
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
            out.push(cur.lerp(next, dc / (dc - dn)));
        }
    }
    ConvexPolygon::normalized(out)
}

/// `bound ∩ ⋂ hs` by successive clipping.
pub fn halfplane_intersection(hs: &[HalfPlane], bound: &ConvexPolygon) -> ConvexPolygon {
    let mut acc = bound.clone();
    for h in hs {
        if acc.is_empty() {
            break;
        }
        acc = clip_convex(&acc, h);
    }
    acc
}

/// The two non-vertical tangent lines `y = k·x + b` through `p` touching the
/// unit circle at `center`. `k1` is the larger slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentLines {
    pub k1: f64,
    pub k2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl TangentLines {
    pub fn mirror(&self) -> TangentLines {
        TangentLines {
            k1: -self.k2,
            k2: -self.k1,
            b1: -self.b2,
            b2: -self.b1,
        }
    }
}

pub fn tangents_to_unit_circle(center: Point2, p: Point2) -> Result<TangentLines> {
    if !center.is_finite() || !p.is_finite() {
        return Err(Error::Domain("tangent inputs must be finite".into()));
    }
    let a = center.x - p.x;
    let w = p.y - center.y;
    let scale = (a * a + w * w).max(1.0);
    let disc = a * a + w * w - 1.0;
    if disc.abs() <= 1e-12 * scale {
        return Err(Error::DegenerateTangent);
    }
    if disc < 0.0 {
        return Err(Error::InsideCircle);
    }
    let denom = a * a - 1.0;
    if denom.abs() <= 1e-12 * scale {
        return Err(Error::VerticalTangent);
    }
    let root = disc.sqrt();
    let ka = (-w * a + root) / denom;
    let kb = (-w * a - root) / denom;
    let (k1, k2) = if ka >= kb { (ka, kb) } else { (kb, ka) };
    Ok(TangentLines {
        k1,
        k2,
        b1: p.y - k1 * p.x,
        b2: p.y - k2 * p.x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::rect(0.0, 1.0, 0.0, 1.0)
    }

    #[test]
    fn areas() {
        assert_eq!(polygon_area(&unit_square()), 1.0);
        assert_eq!(polygon_area(&ConvexPolygon::empty()), 0.0);
        let tri = ConvexPolygon::from_vertices(vec![
            Point2::new(-0.1, -1.4),
            Point2::new(-0.1, -30.0),
            Point2::new((0.7 - 30.0) / 7.0, -30.0),
        ])
        .unwrap();
        // (y_lim − kδ − b)² / 2k with k = 7, b = 0.7
        let expected = (30.0_f64 - 0.7 - 0.7).powi(2) / 14.0;
        assert_relative_eq!(tri.area(), expected, max_relative = 1e-12);
        assert_relative_eq!(tri.area(), 58.426, epsilon = 1e-3);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let cw = ConvexPolygon::from_vertices(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(cw, unit_square());
    }

    #[test]
    fn collinear_and_duplicate_vertices_removed() {
        let p = ConvexPolygon::from_vertices(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 1.0 + 1e-14),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(p.vertices().len(), 4);
        let seg = ConvexPolygon::from_vertices(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 2.0),
        ])
        .unwrap();
        assert!(seg.is_empty());
    }

    #[test]
    fn non_convex_rejected() {
        let r = ConvexPolygon::from_vertices(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.5),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn clipping() {
        let half = clip_convex(&unit_square(), &HalfPlane::new(1.0, 0.0, 0.5).unwrap());
        assert_relative_eq!(half.area(), 0.5, max_relative = 1e-15);

        let inside = clip_convex(&unit_square(), &HalfPlane::new(1.0, 0.0, 5.0).unwrap());
        assert_eq!(inside, unit_square());

        let outside = clip_convex(&unit_square(), &HalfPlane::new(1.0, 0.0, -1.0).unwrap());
        assert!(outside.is_empty());
        assert_eq!(outside.area(), 0.0);

        // Touching a single vertex yields nothing of positive area.
        let touch = clip_convex(&unit_square(), &HalfPlane::new(1.0, 1.0, 0.0).unwrap());
        assert!(touch.is_empty());
    }

    #[test]
    fn halfplane_intersections() {
        let bound = ConvexPolygon::rect(-500.0, 500.0, -500.0, 500.0);
        assert_eq!(halfplane_intersection(&[], &bound), bound);

        let opposing = [
            HalfPlane::new(1.0, 0.0, -1.0).unwrap(),
            HalfPlane::new(-1.0, 0.0, -1.0).unwrap(),
        ];
        assert!(halfplane_intersection(&opposing, &bound).is_empty());

        let hs = [
            HalfPlane::new(0.0, 1.0, 30.0).unwrap(),
            HalfPlane::new(0.0, -1.0, 30.0).unwrap(),
            HalfPlane::new(1.0, 0.0, -0.1).unwrap(),
            // y ≤ 7x − 0.7
            HalfPlane::new(-7.0, 1.0, -0.7).unwrap(),
        ];
        let tri = halfplane_intersection(&hs, &bound);
        assert_eq!(tri.vertices().len(), 3);
        assert_relative_eq!(tri.area(), 28.6_f64.powi(2) / 14.0, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_halfplane_rejected() {
        assert!(HalfPlane::new(0.0, 0.0, 1.0).is_err());
        assert!(HalfPlane::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn tangent_slopes_from_origin() {
        let t = tangents_to_unit_circle(Point2::new(100.0, 0.0), Point2::new(0.0, 0.0)).unwrap();
        let expected = 1.0 / 9999.0_f64.sqrt();
        assert_relative_eq!(t.k1, expected, max_relative = 1e-12);
        assert_relative_eq!(t.k2, -expected, max_relative = 1e-12);
        assert_eq!(t.b1, 0.0);
    }

    #[test]
    fn tangent_errors() {
        let c = Point2::new(100.0, 0.0);
        assert_eq!(
            tangents_to_unit_circle(c, Point2::new(99.0, 0.0)),
            Err(Error::DegenerateTangent)
        );
        assert_eq!(
            tangents_to_unit_circle(c, Point2::new(99.5, 0.0)),
            Err(Error::InsideCircle)
        );
        assert_eq!(
            tangents_to_unit_circle(c, Point2::new(99.0, 5.0)),
            Err(Error::VerticalTangent)
        );
    }

    #[test]
    fn symmetric_point_gives_opposite_slopes() {
        let t = tangents_to_unit_circle(Point2::new(100.0, 0.0), Point2::new(-37.0, 0.0)).unwrap();
        assert_eq!(t.k1, -t.k2);
    }
}
