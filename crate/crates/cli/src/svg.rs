//! Self-contained SVG figure of a plan, drawn in scenario units.

use std::fmt::Write;

use hidver::{AttackableRegion, DecisionBoundary, Line, ScenarioConfig};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Part of the line inside `[x0, x1] × [−y_lim, y_lim]`.
fn strip_segment(bd: &DecisionBoundary, x0: f64, x1: f64, y_lim: f64) -> Option<(f64, f64, f64, f64)> {
    match bd.line() {
        Line::Vertical { x0: x } => (x0..=x1).contains(&x).then_some((x, -y_lim, x, y_lim)),
        Line::Sloped { k, b } => {
            let (a, c) = ((-y_lim - b) / k, (y_lim - b) / k);
            let (lo, hi) = (a.min(c).max(x0), a.max(c).min(x1));
            (lo <= hi).then_some((lo, k * lo + b, hi, k * hi + b))
        }
    }
}

pub fn plan_figure(s: &ScenarioConfig, boundaries: &[DecisionBoundary], regions: &[AttackableRegion]) -> String {
    let margin = 1.5;
    let (x0, x1) = (-s.c - margin, s.c + margin);
    let (w, h) = (x1 - x0, 2.0 * s.y_lim);
    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {} {w} {h}" width="1200" height="{}" preserveAspectRatio="none">"#,
        -s.y_lim,
        (1200.0 * h / w).round().max(200.0)
    );
    let _ = writeln!(o, r#"<g transform="scale(1,-1)" stroke-width="1" vector-effect="non-scaling-stroke">"#);
    let _ = writeln!(
        o,
        r##"<rect class="strip" x="{x0}" y="{}" width="{w}" height="{h}" fill="#fafafa" stroke="#999" vector-effect="non-scaling-stroke"/>"##,
        -s.y_lim
    );
    // X₋ bands
    let _ = writeln!(
        o,
        r##"<rect class="band" x="{x0}" y="{}" width="{}" height="{h}" fill="#eee"/>"##,
        -s.y_lim,
        -s.delta - x0
    );
    let _ = writeln!(
        o,
        r##"<rect class="band" x="0" y="{}" width="{}" height="{h}" fill="#eee"/>"##,
        -s.y_lim,
        s.delta
    );
    for (i, ar) in regions.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for piece in ar.pieces().iter().filter(|p| !p.is_empty()) {
            let pts: Vec<String> = piece.vertices().iter().map(|p| format!("{},{}", p.x, p.y)).collect();
            let _ = writeln!(
                o,
                r#"<polygon class="ar" data-version="{}" points="{}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#,
                i + 1,
                pts.join(" ")
            );
        }
    }
    let _ = writeln!(o, r##"<circle class="cluster minus" cx="{}" cy="0" r="1" fill="#555"/>"##, -s.c);
    let _ = writeln!(o, r##"<circle class="cluster plus" cx="{}" cy="0" r="1" fill="#c33"/>"##, s.c);
    for (i, bd) in boundaries.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let Some((ax, ay, bx, by)) = strip_segment(bd, x0, x1, s.y_lim) {
            let _ = writeln!(
                o,
                r#"<line class="boundary" data-version="{}" x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" stroke="{color}" vector-effect="non-scaling-stroke"/>"#,
                i + 1
            );
        }
    }
    o.push_str("</g>\n</svg>\n");
    o
}
