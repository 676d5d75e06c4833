//! Attackable regions and transferability.
//!
//! `X₋ ∩ strip` is two bands: `[−G, −δ] × [−y_lim, y_lim]` and
//! `[0, δ] × [−y_lim, y_lim]`, where `G` is a guard abscissa far enough left
//! that every valid separator's region ends before it. Inside a band,
//! membership in a region is membership in one half-plane, so unions and
//! intersections of regions reduce to convex half-plane intersections:
//!
//! * `⋂ ARᵢ ∩ band = band ∩ ⋂ plusᵢ`
//! * `⋃ ARᵢ ∩ band = band \ (band ∩ ⋂ minusᵢ)`

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{halfplane_intersection, ConvexPolygon, HalfPlane, Point2};
use crate::svm::{DecisionBoundary, Label, Line, ScenarioConfig};

/// Areas at or below this count as zero when deciding whether a ratio is
/// defined.
pub const AREA_EPS: f64 = 1e-12;

/// Samples per generator stream in [`mc_transferability`].
const MC_CHUNK: u64 = 4096;

/// Left guard abscissa (as a positive distance) for one boundary.
fn guard(s: &ScenarioConfig, bd: &DecisionBoundary) -> f64 {
    match bd.line() {
        Line::Sloped { k, b } => (2.0 * s.c).max((b.abs() + s.y_lim) / k.abs() + s.c),
        Line::Vertical { .. } => 2.0 * s.c,
    }
}

fn common_guard<'a>(s: &ScenarioConfig, bds: impl IntoIterator<Item = &'a DecisionBoundary>) -> f64 {
    bds.into_iter().map(|b| guard(s, b)).fold(2.0 * s.c, f64::max)
}

fn bands(s: &ScenarioConfig, g: f64) -> [ConvexPolygon; 2] {
    [
        ConvexPolygon::rect(-g, -s.delta, -s.y_lim, s.y_lim),
        ConvexPolygon::rect(0.0, s.delta, -s.y_lim, s.y_lim),
    ]
}

/// `Σ_bands area(band ∩ ⋂ hs)`, with bit-identical half-planes collapsed.
fn band_area(s: &ScenarioConfig, g: f64, hs: &[HalfPlane]) -> f64 {
    let mut uniq: Vec<HalfPlane> = Vec::with_capacity(hs.len());
    for h in hs {
        if !uniq.contains(h) {
            uniq.push(*h);
        }
    }
    bands(s, g)
        .iter()
        .map(|band| halfplane_intersection(&uniq, band).area())
        .sum()
}

/// Points of `X₋ ∩ strip` that a model classifies `+`, one convex piece per
/// band (either may be empty).
#[derive(Debug, Clone, PartialEq)]
pub struct AttackableRegion {
    scenario: ScenarioConfig,
    boundary: DecisionBoundary,
    pieces: Vec<ConvexPolygon>,
}

impl AttackableRegion {
    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    pub fn boundary(&self) -> &DecisionBoundary {
        &self.boundary
    }

    /// `[left band piece, right band piece]`.
    pub fn pieces(&self) -> &[ConvexPolygon] {
        &self.pieces
    }

    pub fn area(&self) -> f64 {
        self.pieces.iter().map(ConvexPolygon::area).sum()
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.pieces.iter().any(|piece| piece.contains(p))
    }
}

pub fn build_attackable_region(s: &ScenarioConfig, bd: &DecisionBoundary) -> Result<AttackableRegion> {
    s.validate()?;
    let g = guard(s, bd);
    let plus = bd.plus_halfplane();
    let pieces: Vec<ConvexPolygon> = bands(s, g).iter().map(|band| band.clip(&plus)).collect();
    let slack = 1e-9 * g;
    if pieces[0].vertices().iter().any(|p| p.x <= -g + slack) {
        return Err(Error::Unbounded(format!("{bd} reaches the guard at x = {}", -g)));
    }
    Ok(AttackableRegion {
        scenario: *s,
        boundary: *bd,
        pieces,
    })
}

/// Triangle plus trapezoid area of the region for `y = k·x − b`, valid for
/// `k > 0`, `b > 0` and `(b − y_lim)/k ≤ −δ`.
pub fn closed_form_ar_area(s: &ScenarioConfig, k: f64, b: f64) -> Result<f64> {
    s.validate()?;
    let (d, y) = (s.delta, s.y_lim);
    if !(k.is_finite() && b.is_finite()) || k <= 0.0 || b <= 0.0 {
        return Err(Error::Domain("closed form needs finite k > 0 and b > 0".into()));
    }
    if (b - y) / k > -d + 1e-12 * d.max(1.0) {
        return Err(Error::Domain(
            "closed form needs (b − y_lim)/k ≤ −δ; use the polygon path".into(),
        ));
    }
    let tri = (y - k * d - b).powi(2) / (2.0 * k);
    let trap = d * (y - b + k * d / 2.0);
    Ok(tri + trap)
}

/// A ratio of areas, or undefined when the denominator region is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferabilityScore {
    pub value: f64,
    pub defined: bool,
}

impl TransferabilityScore {
    fn ratio(num: f64, den: f64) -> Self {
        if den <= AREA_EPS {
            Self {
                value: 0.0,
                defined: false,
            }
        } else {
            Self {
                value: (num / den).clamp(0.0, 1.0),
                defined: true,
            }
        }
    }

    pub fn get(&self) -> Option<f64> {
        self.defined.then_some(self.value)
    }
}

impl fmt::Display for TransferabilityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.get() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("NA"),
        }
    }
}

fn shared_scenario<'a>(regions: impl IntoIterator<Item = &'a AttackableRegion>) -> ScenarioConfig {
    let mut it = regions.into_iter();
    let first = *it.next().expect("at least one region").scenario();
    for r in it {
        assert_eq!(*r.scenario(), first, "regions built under different scenarios");
    }
    first
}

/// `S(AR₁ ∩ AR₂) / S(AR₁)`.
pub fn directional_transferability(ar1: &AttackableRegion, ar2: &AttackableRegion) -> TransferabilityScore {
    let s = shared_scenario([ar1, ar2]);
    let g = common_guard(&s, [ar1.boundary(), ar2.boundary()]);
    let p1 = ar1.boundary().plus_halfplane();
    let p2 = ar2.boundary().plus_halfplane();
    let den = band_area(&s, g, &[p1]);
    let num = band_area(&s, g, &[p1, p2]);
    TransferabilityScore::ratio(num, den)
}

/// Area of `⋃ priors`, via the complement identity.
pub fn union_area(priors: &[AttackableRegion]) -> f64 {
    if priors.is_empty() {
        return 0.0;
    }
    let s = shared_scenario(priors);
    let g = common_guard(&s, priors.iter().map(|r| r.boundary()));
    let minus: Vec<HalfPlane> = priors.iter().map(|r| r.boundary().minus_halfplane()).collect();
    let full: f64 = bands(&s, g).iter().map(ConvexPolygon::area).sum();
    full - band_area(&s, g, &minus)
}

/// `S(target ∩ ⋃ priors) / S(⋃ priors)` (ensemble attacker).
pub fn compound_transferability(priors: &[AttackableRegion], target: &AttackableRegion) -> TransferabilityScore {
    assert!(!priors.is_empty(), "compound transferability needs at least one prior");
    let s = shared_scenario(priors.iter().chain([target]));
    let g = common_guard(&s, priors.iter().chain([target]).map(|r| r.boundary()));
    let minus: Vec<HalfPlane> = priors.iter().map(|r| r.boundary().minus_halfplane()).collect();
    let full: f64 = bands(&s, g).iter().map(ConvexPolygon::area).sum();
    let union = full - band_area(&s, g, &minus);

    let mut with_target = vec![target.boundary().plus_halfplane()];
    let target_area = band_area(&s, g, &with_target);
    with_target.extend(minus);
    let outside = band_area(&s, g, &with_target);
    TransferabilityScore::ratio(target_area - outside, union)
}

/// `S(target ∩ ⋂ priors) / S(⋂ priors)` (cautious attacker).
pub fn cautious_transferability(priors: &[AttackableRegion], target: &AttackableRegion) -> TransferabilityScore {
    assert!(!priors.is_empty(), "cautious transferability needs at least one prior");
    let s = shared_scenario(priors.iter().chain([target]));
    let g = common_guard(&s, priors.iter().chain([target]).map(|r| r.boundary()));
    let mut hs: Vec<HalfPlane> = priors.iter().map(|r| r.boundary().plus_halfplane()).collect();
    let den = band_area(&s, g, &hs);
    hs.push(target.boundary().plus_halfplane());
    let num = band_area(&s, g, &hs);
    TransferabilityScore::ratio(num, den)
}

/// Sufficient condition for zero transfer between two sloped boundaries:
/// opposite slope signs and an intersection at `x_I ≥ δ`.
pub fn check_zero_transfer(bd1: &DecisionBoundary, bd2: &DecisionBoundary, s: &ScenarioConfig) -> Result<bool> {
    let (Some((k1, b1)), Some((k2, b2))) = (bd1.slope_intercept(), bd2.slope_intercept()) else {
        return Err(Error::Domain("zero-transfer test needs two sloped boundaries".into()));
    };
    if k1.signum() * k2.signum() >= 0.0 {
        return Ok(false);
    }
    let x_i = (b2 - b1) / (k1 - k2);
    Ok(x_i >= s.delta - 1e-12 * s.delta.max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttackMode {
    /// Attack instances that succeed on at least one breached version.
    #[default]
    Ensemble,
    /// Attack instances that succeed on every breached version.
    Cautious,
}

impl AttackMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttackMode::Ensemble => "ensemble",
            AttackMode::Cautious => "cautious",
        }
    }
}

impl std::str::FromStr for AttackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ensemble" => Ok(AttackMode::Ensemble),
            "cautious" => Ok(AttackMode::Cautious),
            other => Err(Error::Domain(format!("unknown attack mode {other:?}"))),
        }
    }
}

/// Sampling configuration. `n_samples = 0` asks callers that support it for
/// exact area ratios instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackSampleConfig {
    pub mode: AttackMode,
    pub n_samples: u64,
    pub seed: u64,
}

impl Default for AttackSampleConfig {
    fn default() -> Self {
        Self {
            mode: AttackMode::Ensemble,
            n_samples: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    /// Half-width of the 95% normal-approximation binomial interval.
    pub half_width: f64,
    /// Samples that passed the attacker-mode filter.
    pub accepted: u64,
    pub samples: u64,
}

impl McEstimate {
    pub fn std_error(&self) -> f64 {
        self.half_width / 1.96
    }
}

/// Exact transferability score matching a sampling mode.
pub fn exact_transferability(
    mode: AttackMode,
    priors: &[AttackableRegion],
    target: &AttackableRegion,
) -> TransferabilityScore {
    match mode {
        AttackMode::Ensemble => compound_transferability(priors, target),
        AttackMode::Cautious => cautious_transferability(priors, target),
    }
}

/// Rejection-sampling estimate of transferability from `priors` to `target`.
///
/// Samples are drawn uniformly over both bands with counts proportional to
/// band area. Sample `i` is drawn from generator stream `i / 4096`, so the
/// result does not depend on how chunks are spread over threads.
pub fn mc_transferability(
    s: &ScenarioConfig,
    priors: &[DecisionBoundary],
    target: &DecisionBoundary,
    cfg: &AttackSampleConfig,
) -> Result<McEstimate> {
    s.validate()?;
    if cfg.n_samples == 0 {
        return Err(Error::Domain("Monte Carlo needs at least one sample".into()));
    }
    if priors.is_empty() {
        return Err(Error::Domain("Monte Carlo needs at least one prior".into()));
    }
    let g = common_guard(s, priors.iter().chain([target]));
    let n = cfg.n_samples;
    let left_area = (g - s.delta) * 2.0 * s.y_lim;
    let right_area = s.delta * 2.0 * s.y_lim;
    let n_left = ((n as f64) * left_area / (left_area + right_area)).round() as u64;
    let n_left = n_left.min(n);

    let n_chunks = n.div_ceil(MC_CHUNK);
    let (accepted, hits) = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(chunk);
            let (mut acc, mut hit) = (0u64, 0u64);
            let end = ((chunk + 1) * MC_CHUNK).min(n);
            for i in chunk * MC_CHUNK..end {
                let x = if i < n_left {
                    rng.random_range(-g..-s.delta)
                } else {
                    rng.random_range(0.0..s.delta)
                };
                let y = rng.random_range(-s.y_lim..s.y_lim);
                let p = Point2::new(x, y);
                let pass = match cfg.mode {
                    AttackMode::Ensemble => priors.iter().any(|b| b.classify(p) == Label::Plus),
                    AttackMode::Cautious => priors.iter().all(|b| b.classify(p) == Label::Plus),
                };
                if pass {
                    acc += 1;
                    if target.classify(p) == Label::Plus {
                        hit += 1;
                    }
                }
            }
            (acc, hit)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let p_accept = accepted as f64 / n as f64;
    if accepted == 0 || p_accept < 1e-6 {
        return Err(Error::UndefinedEstimate(p_accept));
    }
    let value = hits as f64 / accepted as f64;
    let half_width = 1.96 * (value * (1.0 - value) / accepted as f64).sqrt();
    Ok(McEstimate {
        value,
        half_width,
        accepted,
        samples: n,
    })
}
