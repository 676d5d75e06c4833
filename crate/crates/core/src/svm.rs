//! The hard-margin linear SVM trained on two unit-disk clusters plus a single
//! hidden point of the `+` class.
//!
//! The minus cluster is the unit disk at `(−c, 0)`, the plus cluster the unit
//! disk at `(c, 0)`. The trained separator bisects, perpendicularly, the
//! shortest segment between the minus disk and `conv(plus disk ∪ {h})`.
//! [`boundary_from_hidden`] evaluates that segment in closed form;
//! [`oracle_boundary`] finds it by direct numeric minimization and shares no
//! formulas with the closed form.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{tangents_to_unit_circle, HalfPlane, Point2, TangentLines};

/// `|w|` below this is treated as lying on the x-axis.
pub const AXIS_TOL: f64 = 1e-12;

pub const DEFAULT_ORACLE_RESOLUTION: usize = 100_000;

/// Geometry of the two-cluster world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    /// x-coordinate of the plus centroid; the minus centroid is at `−c`.
    pub c: f64,
    /// Task margin: `X₋ = {x ≤ −δ} ∪ {0 ≤ x < δ}`.
    pub delta: f64,
    /// Half-height of the strip `|y| ≤ y_lim`.
    pub y_lim: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            c: 100.0,
            delta: 0.1,
            y_lim: 30.0,
        }
    }
}

impl ScenarioConfig {
    pub fn new(c: f64, delta: f64, y_lim: f64) -> Result<Self> {
        let s = Self { c, delta, y_lim };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidScenario(m.to_string()));
        if !(self.c.is_finite() && self.delta.is_finite() && self.y_lim.is_finite()) {
            return bad("parameters must be finite");
        }
        if self.c <= 1.0 {
            return bad("c must exceed 1");
        }
        if self.delta <= 0.0 {
            return bad("delta must be positive");
        }
        if self.delta >= self.c / 10.0 {
            return bad("delta must be below c/10");
        }
        if self.y_lim <= 0.0 {
            return bad("y_lim must be positive");
        }
        Ok(())
    }

    pub fn plus_centroid(&self) -> Point2 {
        Point2::new(self.c, 0.0)
    }

    pub fn minus_centroid(&self) -> Point2 {
        Point2::new(-self.c, 0.0)
    }
}

/// The hidden feature point `h = (v, w)` added to the plus class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenPoint {
    pub v: f64,
    pub w: f64,
}

impl HiddenPoint {
    pub const fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    pub fn point(&self) -> Point2 {
        Point2::new(self.v, self.w)
    }

    pub fn mirror(&self) -> HiddenPoint {
        HiddenPoint::new(self.v, -self.w)
    }

    /// Checks `|v| < c − 1` and `|w| ≤ y_lim`. Inside that band the point is
    /// automatically outside both training disks.
    pub fn check_feasible(&self, s: &ScenarioConfig) -> Result<()> {
        if !(self.v.is_finite() && self.w.is_finite()) {
            return Err(Error::Infeasible("coordinates must be finite".into()));
        }
        if self.v.abs() >= s.c - 1.0 {
            return Err(Error::Infeasible(format!(
                "v = {} outside |v| < c−1 = {}",
                self.v,
                s.c - 1.0
            )));
        }
        if self.w.abs() > s.y_lim {
            return Err(Error::Infeasible(format!(
                "w = {} outside |w| ≤ y_lim = {}",
                self.w, s.y_lim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Plus,
    Minus,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Plus => "+",
            Label::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Line {
    /// `y = k·x + b`, `k ≠ 0`.
    Sloped { k: f64, b: f64 },
    /// `x = x0`.
    Vertical { x0: f64 },
}

impl Line {
    /// Positive on one side, negative on the other, zero on the line.
    fn eval(&self, p: Point2) -> f64 {
        match *self {
            Line::Sloped { k, b } => k * p.x + b - p.y,
            Line::Vertical { x0 } => p.x - x0,
        }
    }
}

/// A linear separator together with its plus side. The plus side is derived
/// at construction as the side containing `(c, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionBoundary {
    line: Line,
    plus_positive: bool,
}

impl DecisionBoundary {
    /// Requires `(c, 0)` and `(−c, 0)` strictly on opposite sides.
    pub fn new(s: &ScenarioConfig, line: Line) -> Result<Self> {
        match line {
            Line::Sloped { k, b } => {
                if !(k.is_finite() && b.is_finite()) {
                    return Err(Error::Domain("boundary parameters must be finite".into()));
                }
                if k == 0.0 {
                    return Err(Error::Domain("sloped boundary needs k ≠ 0".into()));
                }
            }
            Line::Vertical { x0 } => {
                if !x0.is_finite() {
                    return Err(Error::Domain("boundary parameters must be finite".into()));
                }
            }
        }
        let at_plus = line.eval(s.plus_centroid());
        let at_minus = line.eval(s.minus_centroid());
        if (at_plus * at_minus).is_nan() || at_plus * at_minus >= 0.0 {
            return Err(Error::Domain(
                "line does not separate the cluster centroids".into(),
            ));
        }
        Ok(Self {
            line,
            plus_positive: at_plus > 0.0,
        })
    }

    pub fn sloped(s: &ScenarioConfig, k: f64, b: f64) -> Result<Self> {
        Self::new(s, Line::Sloped { k, b })
    }

    pub fn vertical(s: &ScenarioConfig, x0: f64) -> Result<Self> {
        Self::new(s, Line::Vertical { x0 })
    }

    pub fn line(&self) -> Line {
        self.line
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self.line, Line::Vertical { .. })
    }

    /// `(k, b)` for a sloped boundary.
    pub fn slope_intercept(&self) -> Option<(f64, f64)> {
        match self.line {
            Line::Sloped { k, b } => Some((k, b)),
            Line::Vertical { .. } => None,
        }
    }

    /// Where the boundary meets the x-axis.
    pub fn x_intercept(&self) -> f64 {
        match self.line {
            Line::Sloped { k, b } => -b / k,
            Line::Vertical { x0 } => x0,
        }
    }

    /// Points on the line itself are `+`.
    pub fn classify(&self, p: Point2) -> Label {
        let e = self.line.eval(p);
        let plus = if self.plus_positive { e >= 0.0 } else { e <= 0.0 };
        if plus {
            Label::Plus
        } else {
            Label::Minus
        }
    }

    /// The closed half-plane classified `+`.
    pub fn plus_halfplane(&self) -> HalfPlane {
        // e(p) = a·x + b·y − c' with the same sign convention as Line::eval.
        let (a, b, c) = match self.line {
            Line::Sloped { k, b } => (k, -1.0, -b),
            Line::Vertical { x0 } => (1.0, 0.0, x0),
        };
        let h = if self.plus_positive {
            // e ≥ 0  ⇔  −a·x − b·y ≤ −c
            HalfPlane::new(-a, -b, -c)
        } else {
            HalfPlane::new(a, b, c)
        };
        h.expect("boundary coefficients are finite with nonzero normal")
    }

    pub fn minus_halfplane(&self) -> HalfPlane {
        self.plus_halfplane().complement()
    }

    /// Reflection across the x-axis (the scenario is symmetric about it).
    pub fn mirror(&self) -> DecisionBoundary {
        let line = match self.line {
            Line::Sloped { k, b } => Line::Sloped { k: -k, b: -b },
            v @ Line::Vertical { .. } => v,
        };
        DecisionBoundary {
            line,
            plus_positive: match self.line {
                // e'(x, y) = −k·x − b + y = −e(x, −y)
                Line::Sloped { .. } => !self.plus_positive,
                Line::Vertical { .. } => self.plus_positive,
            },
        }
    }
}

impl fmt::Display for DecisionBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Line::Sloped { k, b } => write!(f, "y = {k}x + {b}"),
            Line::Vertical { x0 } => write!(f, "x = {x0}"),
        }
    }
}

pub fn classify(bd: &DecisionBoundary, p: Point2) -> Label {
    bd.classify(p)
}

/// Which closed-form branch produced a boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCase {
    WZero,
    WPosTangent,
    WPosDirect,
    WNegTangent,
    WNegDirect,
}

impl BoundaryCase {
    pub fn tag(&self) -> &'static str {
        match self {
            BoundaryCase::WZero => "w_zero",
            BoundaryCase::WPosTangent => "w_pos_tangent",
            BoundaryCase::WPosDirect => "w_pos_direct",
            BoundaryCase::WNegTangent => "w_neg_tangent",
            BoundaryCase::WNegDirect => "w_neg_direct",
        }
    }

    pub fn is_tangent(&self) -> bool {
        matches!(self, BoundaryCase::WPosTangent | BoundaryCase::WNegTangent)
    }
}

impl fmt::Display for BoundaryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDerivation {
    pub case: BoundaryCase,
    /// Tangents from `h` to the plus disk.
    pub tangents: TangentLines,
    /// Shortest connection: `(point on the plus hull, point on the minus disk)`.
    pub support_segment: (Point2, Point2),
}

/// Closed-form separator for hidden point `h`.
///
/// * `w = 0`: vertical line `x = (−c + v + 1)/2`.
/// * `w > 0`: the hull edge facing the minus disk is the lower tangent
///   (slope `k2`). When the foot of the perpendicular from `(−c, 0)` onto it
///   lies right of `h` the boundary is parallel to that tangent, otherwise it
///   is the perpendicular bisector between `h` and the minus disk.
/// * `w < 0`: mirror image using the upper tangent (slope `k1`).
pub fn boundary_from_hidden(
    s: &ScenarioConfig,
    h: HiddenPoint,
) -> Result<(DecisionBoundary, BoundaryDerivation)> {
    s.validate()?;
    h.check_feasible(s)?;
    let (c, v, w) = (s.c, h.v, h.w);
    let tangents = tangents_to_unit_circle(s.plus_centroid(), h.point())?;

    if w.abs() < AXIS_TOL {
        let bd = DecisionBoundary::vertical(s, (-c + v + 1.0) / 2.0)?;
        let deriv = BoundaryDerivation {
            case: BoundaryCase::WZero,
            tangents,
            support_segment: (Point2::new(v, 0.0), Point2::new(1.0 - c, 0.0)),
        };
        return Ok((bd, deriv));
    }

    let upper = w > 0.0;
    let k = if upper { tangents.k2 } else { tangents.k1 };
    let kk = k * k + 1.0;
    let root = kk.sqrt();
    let foot = Point2::new((k * k * v - k * w - c) / kk, (-k * c - k * v + w) / kk);

    if foot.x >= v {
        // Midline between the plus-hull edge and the parallel tangent of the
        // minus disk.
        let (r, b) = if upper {
            (
                Point2::new(-k / root - c, 1.0 / root),
                (k * c - k * v + w + root) / 2.0,
            )
        } else {
            (
                Point2::new(k / root - c, -1.0 / root),
                (k * c - k * v + w - root) / 2.0,
            )
        };
        let case = if upper {
            BoundaryCase::WPosTangent
        } else {
            BoundaryCase::WNegTangent
        };
        let bd = DecisionBoundary::sloped(s, k, b)?;
        return Ok((
            bd,
            BoundaryDerivation {
                case,
                tangents,
                support_segment: (foot, r),
            },
        ));
    }

    let len = (c + v).hypot(w);
    let r = Point2::new((c + v) / len - c, w / len);
    let slope = -(c + v) / w;
    let b = (-c * c + v * v + w * w + len) / (2.0 * w);
    let case = if upper {
        BoundaryCase::WPosDirect
    } else {
        BoundaryCase::WNegDirect
    };
    let bd = DecisionBoundary::sloped(s, slope, b)?;
    Ok((
        bd,
        BoundaryDerivation {
            case,
            tangents,
            support_segment: (h.point(), r),
        },
    ))
}

/// Closest point to `o` on the segment `[a, b]`.
fn closest_on_segment(o: Point2, a: Point2, b: Point2) -> Point2 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return a;
    }
    let t = (((o.x - a.x) * dx + (o.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    Point2::new(a.x + t * dx, a.y + t * dy)
}

/// Numeric separator for hidden point `h`.
///
/// `conv(plus disk ∪ {h})` is the union of segments from `h` to points of the
/// plus circle. The closest such segment to `(−c, 0)` is located on a grid of
/// `resolution` circle angles and refined by golden-section search; the
/// boundary is then the perpendicular bisector of the shortest connection.
pub fn oracle_boundary(
    s: &ScenarioConfig,
    h: HiddenPoint,
    resolution: usize,
) -> Result<DecisionBoundary> {
    s.validate()?;
    h.check_feasible(s)?;
    if resolution < 3 {
        return Err(Error::Domain("oracle resolution must be at least 3".into()));
    }
    let o = s.minus_centroid();
    let hp = h.point();
    let circle = |theta: f64| Point2::new(s.c + theta.cos(), theta.sin());
    let cost = |theta: f64| {
        let q = closest_on_segment(o, hp, circle(theta));
        let (dx, dy) = (q.x - o.x, q.y - o.y);
        dx * dx + dy * dy
    };

    let step = TAU / resolution as f64;
    let best = (0..resolution)
        .map(|i| (i, cost(i as f64 * step)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-15 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = cost(x2);
        }
    }
    let theta = if f1 <= f2 { x1 } else { x2 };
    let q = closest_on_segment(o, hp, circle(theta));

    let d = q.dist(o);
    let r = Point2::new(o.x + (q.x - o.x) / d, o.y + (q.y - o.y) / d);
    let n = Point2::new(q.x - r.x, q.y - r.y);
    let m = Point2::new((q.x + r.x) / 2.0, (q.y + r.y) / 2.0);
    let line = if n.y.abs() <= 1e-12 * n.x.abs() {
        Line::Vertical { x0: m.x }
    } else {
        let k = -n.x / n.y;
        Line::Sloped { k, b: m.y - k * m.x }
    };
    DecisionBoundary::new(s, line)
}
