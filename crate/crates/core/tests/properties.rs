use hidver::geometry::{clip_convex, polygon_area, tangents_to_unit_circle};
use hidver::regions::{
    build_attackable_region, cautious_transferability, check_zero_transfer, closed_form_ar_area,
    compound_transferability, directional_transferability, mc_transferability,
};
use hidver::svm::{boundary_from_hidden, oracle_boundary, DEFAULT_ORACLE_RESOLUTION};
use hidver::versioning::{
    check_boundary_feasibility, plan_sequence, reconstruct_hidden_point, verify_plan,
};
use hidver::{
    AttackMode, AttackSampleConfig, ConvexPolygon, DecisionBoundary, HalfPlane, HiddenPoint, Label, Line,
    Point2, ScenarioConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sc() -> ScenarioConfig {
    ScenarioConfig::default()
}

fn hidden() -> impl Strategy<Value = HiddenPoint> {
    let s = sc();
    (-(s.c - 1.0) + 1e-9..s.c - 1.0 - 1e-9, -s.y_lim..=s.y_lim)
        .prop_map(|(v, w)| HiddenPoint::new(v, w))
        .prop_filter("needs a closed-form boundary", |h| boundary_from_hidden(&sc(), *h).is_ok())
}

fn polygon() -> impl Strategy<Value = ConvexPolygon> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..12).prop_filter_map("degenerate", |pts| {
        let pts: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
        let hull = convex_hull(pts);
        (hull.len() >= 3)
            .then(|| ConvexPolygon::from_vertices(hull).ok())
            .flatten()
            .filter(|p| p.area() > 1e-3)
    })
}

/// Monotone chain hull, used only to feed valid polygons to the library.
fn convex_hull(mut pts: Vec<Point2>) -> Vec<Point2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let cross = |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn halfplane() -> impl Strategy<Value = HalfPlane> {
    (0.0..std::f64::consts::TAU, -12.0..12.0f64).prop_map(|(t, c)| HalfPlane::new(t.cos(), t.sin(), c).unwrap())
}

fn line_value(bd: &DecisionBoundary, p: Point2) -> f64 {
    match bd.line() {
        Line::Sloped { k, b } => (k * p.x + b - p.y) / k.hypot(1.0),
        Line::Vertical { x0 } => p.x - x0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn clipping_never_grows_area(p in polygon(), h in halfplane()) {
        let clipped = clip_convex(&p, &h);
        prop_assert!(polygon_area(&clipped) <= polygon_area(&p) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn clipping_by_superset_is_identity(p in polygon(), t in 0.0..std::f64::consts::TAU) {
        // Every vertex has |x|, |y| < 10, so this half-plane holds them all.
        let h = HalfPlane::new(t.cos(), t.sin(), 20.0).unwrap();
        prop_assert_eq!(clip_convex(&p, &h), p);
    }

    #[test]
    fn tangent_lines_touch_once(x in -60.0..60.0f64, y in -40.0..40.0f64) {
        let center = Point2::new(3.0, -1.0);
        let p = Point2::new(x, y);
        prop_assume!(p.dist(center) > 1.01 && (center.x - x).abs() > 1.01);
        let t = tangents_to_unit_circle(center, p).unwrap();
        for (k, b) in [(t.k1, t.b1), (t.k2, t.b2)] {
            // (x − cx)² + (kx + b − cy)² = 1
            let d = b - center.y;
            let qa = 1.0 + k * k;
            let qb = 2.0 * (k * d - center.x);
            let qc = center.x * center.x + d * d - 1.0;
            let disc = qb * qb - 4.0 * qa * qc;
            prop_assert!(disc.abs() / (qb * qb + 4.0 * (qa * qc).abs()) < 1e-9, "disc {}", disc);
        }
    }

    #[test]
    fn tangent_slopes_mirror(x in -60.0..60.0f64, y in -40.0..40.0f64) {
        let center = Point2::new(100.0, 0.0);
        let p = Point2::new(x, y);
        let t = tangents_to_unit_circle(center, p).unwrap();
        let m = tangents_to_unit_circle(center, p.mirror()).unwrap();
        prop_assert!((t.k1 + m.k2).abs() <= 1e-12 * t.k1.abs().max(1.0));
        prop_assert!((t.k2 + m.k1).abs() <= 1e-12 * t.k2.abs().max(1.0));
    }

    #[test]
    fn support_segment_is_bisected(h in hidden()) {
        let (bd, d) = boundary_from_hidden(&sc(), h).unwrap();
        let (p, q) = d.support_segment;
        let mid = Point2::new((p.x + q.x) / 2.0, (p.y + q.y) / 2.0);
        let len = p.dist(q);
        prop_assert!(line_value(&bd, mid).abs() <= 1e-9 * len.max(1.0));
        let (dx, dy) = (q.x - p.x, q.y - p.y);
        let along = match bd.line() {
            Line::Sloped { k, .. } => (dx + k * dy) / k.hypot(1.0),
            Line::Vertical { .. } => dy,
        };
        prop_assert!(along.abs() <= 1e-9 * len);
    }

    #[test]
    fn margin_separates_disks(h in hidden()) {
        let s = sc();
        let (bd, _) = boundary_from_hidden(&s, h).unwrap();
        prop_assert_eq!(bd.classify(h.point()), Label::Plus);
        for i in 0..256 {
            let t = i as f64 * std::f64::consts::TAU / 256.0;
            let (cx, sy) = (t.cos(), t.sin());
            prop_assert_eq!(bd.classify(Point2::new(-s.c + cx, sy)), Label::Minus);
            prop_assert_eq!(bd.classify(Point2::new(s.c + cx, sy)), Label::Plus);
        }
    }

    #[test]
    fn boundary_mirrors_with_hidden_point(h in hidden()) {
        let s = sc();
        let (bd, d) = boundary_from_hidden(&s, h).unwrap();
        let (bm, dm) = boundary_from_hidden(&s, h.mirror()).unwrap();
        match (bd.mirror().line(), bm.line()) {
            (Line::Sloped { k: k1, b: b1 }, Line::Sloped { k: k2, b: b2 }) => {
                prop_assert!((k1 - k2).abs() <= 1e-12 * k1.abs().max(1.0));
                prop_assert!((b1 - b2).abs() <= 1e-9 * b1.abs().max(1.0));
            }
            (Line::Vertical { x0: a }, Line::Vertical { x0: b }) => prop_assert_eq!(a, b),
            other => prop_assert!(false, "{:?}", other),
        }
        prop_assert_eq!(d.case.is_tangent(), dm.case.is_tangent());
    }

    #[test]
    fn boundary_is_deterministic(h in hidden()) {
        let s = sc();
        prop_assert_eq!(boundary_from_hidden(&s, h).unwrap(), boundary_from_hidden(&s, h).unwrap());
    }

    #[test]
    fn round_trip_recovers_separator(k in 0.1..50.0f64, frac in 0.0..1.0f64, neg in any::<bool>()) {
        let s = sc();
        let b = k * s.c * frac;
        let (k, b) = if neg { (-k, -b) } else { (k, b) };
        prop_assume!(check_boundary_feasibility(&s, k, b).unwrap().feasible);
        let h = reconstruct_hidden_point(&s, k, b).unwrap();
        let (k2, b2) = boundary_from_hidden(&s, h).unwrap().0.slope_intercept().unwrap();
        prop_assert!((k - k2).abs() <= 1e-6 * k.abs().max(1.0));
        prop_assert!((b - b2).abs() <= 1e-6 * b.abs().max(1.0));
    }

    #[test]
    fn scores_are_ratios_and_mirror_invariant(hs in prop::collection::vec(hidden(), 2..6)) {
        let s = sc();
        let bds: Vec<DecisionBoundary> = hs.iter().map(|h| boundary_from_hidden(&s, *h).unwrap().0).collect();
        let ars: Vec<_> = bds.iter().map(|b| build_attackable_region(&s, b).unwrap()).collect();
        let mirrored: Vec<_> = bds.iter().map(|b| build_attackable_region(&s, &b.mirror()).unwrap()).collect();
        let n = ars.len();
        let pairs = [
            (directional_transferability(&ars[0], &ars[1]), directional_transferability(&mirrored[0], &mirrored[1])),
            (compound_transferability(&ars[..n - 1], &ars[n - 1]), compound_transferability(&mirrored[..n - 1], &mirrored[n - 1])),
            (cautious_transferability(&ars[..n - 1], &ars[n - 1]), cautious_transferability(&mirrored[..n - 1], &mirrored[n - 1])),
        ];
        for (a, m) in pairs {
            prop_assert_eq!(a.defined, m.defined);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&a.value));
            prop_assert!((a.value - m.value).abs() <= 1e-9);
        }
        let own = directional_transferability(&ars[0], &ars[0]);
        prop_assert!((own.value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn nested_regions_give_area_ratio(k in 0.5..40.0f64, b in 0.5..10.0f64, extra in 0.0..10.0f64) {
        let s = sc();
        let outer = build_attackable_region(&s, &DecisionBoundary::sloped(&s, k, -b).unwrap()).unwrap();
        let inner = build_attackable_region(&s, &DecisionBoundary::sloped(&s, k, -b - extra).unwrap()).unwrap();
        prop_assume!(outer.area() > 0.0);
        let at = directional_transferability(&outer, &inner).value;
        prop_assert!((at - inner.area() / outer.area()).abs() <= 1e-9);
    }

    #[test]
    fn closed_form_matches_polygons(k in 0.5..80.0f64, b in 0.01..29.0f64) {
        let s = sc();
        prop_assume!((b - s.y_lim) / k <= -s.delta);
        let cf = closed_form_ar_area(&s, k, b).unwrap();
        let poly = build_attackable_region(&s, &DecisionBoundary::sloped(&s, k, -b).unwrap()).unwrap().area();
        prop_assert!((cf - poly).abs() <= 1e-9 * cf.max(poly));
    }

    #[test]
    fn zero_transfer_test_is_sound(
        x_i in 0.1..10.0f64,
        y_i in -30.0..30.0f64,
        k1 in 0.5..60.0f64,
        k2 in 0.5..60.0f64,
    ) {
        let s = sc();
        let b1 = DecisionBoundary::sloped(&s, k1, y_i - k1 * x_i);
        let b2 = DecisionBoundary::sloped(&s, -k2, y_i + k2 * x_i);
        let (Ok(b1), Ok(b2)) = (b1, b2) else { return Ok(()) };
        prop_assert!(check_zero_transfer(&b1, &b2, &s).unwrap());
        let (a1, a2) = (build_attackable_region(&s, &b1).unwrap(), build_attackable_region(&s, &b2).unwrap());
        prop_assert_eq!(directional_transferability(&a1, &a2).value, 0.0);
        prop_assert_eq!(directional_transferability(&a2, &a1).value, 0.0);
    }

    #[test]
    fn alpha_grows_with_sequence_length(k in 1.0..20.0f64, b_max in 1.0..50.0f64) {
        let s = sc();
        let mut prev = 0.0;
        for n in 2..=10 {
            let plan = plan_sequence(&s, n, k, b_max).unwrap();
            if n == 2 {
                prop_assert_eq!(plan.alpha, 0.0);
            }
            prop_assert!(plan.alpha >= prev);
            prev = plan.alpha;
            let r = verify_plan(&plan).unwrap();
            prop_assert!(r.passed(), "{:?}", r);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_matches_closed_form(h in hidden()) {
        let s = sc();
        let (closed, _) = boundary_from_hidden(&s, h).unwrap();
        let oracle = oracle_boundary(&s, h, DEFAULT_ORACLE_RESOLUTION).unwrap();
        match (closed.line(), oracle.line()) {
            (Line::Sloped { k: k1, .. }, Line::Sloped { k: k2, .. }) => {
                prop_assert!((k1 - k2).abs() <= 1e-6 * k1.abs().max(1.0));
            }
            (Line::Vertical { x0: a }, Line::Vertical { x0: b }) => prop_assert!((a - b).abs() <= 1e-6),
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

#[test]
fn polygon_area_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let polys = [
        ConvexPolygon::rect(-1.0, 2.0, 0.5, 3.0),
        ConvexPolygon::from_vertices(vec![Point2::new(0.0, 0.0), Point2::new(4.0, 1.0), Point2::new(1.0, 3.0)]).unwrap(),
        ConvexPolygon::from_vertices(vec![
            Point2::new(0.0, -2.0),
            Point2::new(3.0, -1.0),
            Point2::new(3.5, 2.0),
            Point2::new(0.5, 3.0),
            Point2::new(-1.5, 0.5),
        ])
        .unwrap(),
    ];
    let n = 1_000_000u64;
    for p in &polys {
        let (x0, x1) = (-2.0, 5.0);
        let (y0, y1) = (-3.0, 4.0);
        let box_area = (x1 - x0) * (y1 - y0);
        let hits = (0..n)
            .filter(|_| p.contains(Point2::new(rng.random_range(x0..x1), rng.random_range(y0..y1))))
            .count() as f64;
        let frac = p.area() / box_area;
        let sigma = (frac * (1.0 - frac) / n as f64).sqrt();
        assert!((hits / n as f64 - frac).abs() <= 3.0 * sigma, "{p:?}");
    }
}

#[test]
fn sampling_does_not_depend_on_thread_count() {
    let s = sc();
    let priors = [
        DecisionBoundary::sloped(&s, 7.0, -0.7).unwrap(),
        DecisionBoundary::sloped(&s, -7.0, 0.7).unwrap(),
    ];
    let target = DecisionBoundary::sloped(&s, 7.0, -4.7).unwrap();
    let cfg = AttackSampleConfig {
        mode: AttackMode::Ensemble,
        n_samples: 200_000,
        seed: 9,
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_transferability(&s, &priors, &target, &cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}
