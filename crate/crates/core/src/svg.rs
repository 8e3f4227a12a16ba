//! Self-contained SVG plots written as plain text.

use std::fmt::Write as _;

use crate::corpus::TalkType;
use crate::metrics::CaseTrace;
use crate::report::REPORT_VERSION;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn color(t: TalkType) -> &'static str {
    match t {
        TalkType::Change => "#2ca02c",
        TalkType::Neutral => "#bbbbbb",
        TalkType::Sustain => "#d62728",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, "<!-- scopemh.plot v{REPORT_VERSION} -->");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
}

/// Maps data coordinates into the plot frame.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, b, t) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(out, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (self.x0 + f * (self.x1 - self.x0), self.y0 + f * (self.y1 - self.y0));
            let (x, y) = (self.px(xv), self.py(yv));
            let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{xv:.2}</text>"#, b + 16.0);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.2}</text>"#, l - 6.0, y + 4.0);
        }
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 14.0, escape(xlabel));
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(ylabel)
        );
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], stroke: &str, dashed: bool) {
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y))).collect();
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="2"{dash}/>"#, path.join(" "));
    }
}

fn legend(out: &mut String, entries: &[(String, &str)]) {
    for (i, (label, c)) in entries.iter().enumerate() {
        let y = MARGIN + 8.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN - 170.0;
        let _ = writeln!(out, r#"<rect x="{x}" y="{:.1}" width="12" height="4" fill="{c}"/>"#, y - 4.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, x + 18.0, escape(label));
    }
}

/// Per-turn talk-type strip with the half boundary and sustain runs marked.
pub fn timeline(trace: &CaseTrace) -> String {
    let n = trace.talk_type_sequence.len().max(1);
    let cell = ((WIDTH - 2.0 * MARGIN) / n as f64).min(24.0);
    let height = 170.0;
    let mut out = String::new();
    open(&mut out, WIDTH, height, &format!("Conversation {}: client talk-type timeline", trace.conversation_id));
    let y = 50.0;
    for (i, t) in trace.talk_type_sequence.iter().enumerate() {
        let x = MARGIN + i as f64 * cell;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y}" width="{:.2}" height="30" fill="{}"><title>turn {}: {}</title></rect>"#,
            (cell - 1.0).max(0.5),
            color(*t),
            i + 1,
            t
        );
    }
    let mid = MARGIN + trace.half_lengths.0 as f64 * cell - 0.5;
    let _ = writeln!(out, r#"<line x1="{mid:.2}" y1="{}" x2="{mid:.2}" y2="{}" stroke="black" stroke-dasharray="3 2"/>"#, y - 8.0, y + 38.0);
    for (start, len) in &trace.sustain_runs {
        if *len >= 2 {
            let x = MARGIN + (*start - 1) as f64 * cell;
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{}" x2="{:.2}" y2="{}" stroke="{}" stroke-width="3"/>"#,
                y + 36.0,
                x + *len as f64 * cell - 1.0,
                y + 36.0,
                color(TalkType::Sustain)
            );
        }
    }
    let (s1, s2) = trace.sustain_ratios_by_half;
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="115">sustain ratio {s1:.2} → {s2:.2}; longest sustain streak {}</text>"#,
        trace.s_max
    );
    for (i, t) in TalkType::ALL.iter().enumerate() {
        let x = MARGIN + 110.0 * i as f64;
        let _ = writeln!(out, r#"<rect x="{x}" y="135" width="12" height="12" fill="{}"/>"#, color(*t));
        let _ = writeln!(out, r#"<text x="{}" y="146">{t}</text>"#, x + 16.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Mean first- to second-half ratios per group, one line per series.
/// `groups` holds `(label, [c̄1, c̄2, s̄1, s̄2])`.
pub fn change_arcs(groups: &[(String, [f64; 4])]) -> String {
    let frame = Frame { x0: 0.0, x1: 1.0, y0: 0.0, y1: 0.5 };
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, "Talk-type ratios across conversation halves");
    frame.axes(&mut out, "half (0 = first, 1 = second)", "mean ratio");
    let mut entries = Vec::new();
    for (i, (label, r)) in groups.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        frame.polyline(&mut out, &[(0.0, r[0]), (1.0, r[1])], c, false);
        frame.polyline(&mut out, &[(0.0, r[2]), (1.0, r[3])], c, true);
        entries.push((format!("{label} change"), c));
        entries.push((format!("{label} sustain (dashed)"), c));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// One or more ROC or PR curves on the unit square. `diagonal` draws the
/// chance line.
pub fn curves(title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)], diagonal: bool) -> String {
    let frame = Frame { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    frame.axes(&mut out, xlabel, ylabel);
    if diagonal {
        frame.polyline(&mut out, &[(0.0, 0.0), (1.0, 1.0)], "#999999", true);
    }
    let mut entries = Vec::new();
    for (i, (label, pts)) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        frame.polyline(&mut out, pts, c, false);
        entries.push((label.clone(), c));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// Detection and false-alarm rates against threshold, with the chosen
/// threshold marked. Points are `(θ, detection rate, false-alarm rate)`.
pub fn threshold_sensitivity(title: &str, points: &[(f64, f64, f64)], chosen: Option<f64>) -> String {
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (x0, x1) = if lo.is_finite() && hi > lo { (lo, hi) } else { (-1.0, 0.0) };
    let frame = Frame { x0, x1, y0: 0.0, y1: 1.0 };
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    frame.axes(&mut out, "threshold", "rate");
    let det: Vec<_> = points.iter().map(|p| (p.0, p.1)).collect();
    let fa: Vec<_> = points.iter().map(|p| (p.0, p.2)).collect();
    frame.polyline(&mut out, &det, PALETTE[0], false);
    frame.polyline(&mut out, &fa, PALETTE[1], false);
    if let Some(t) = chosen.filter(|t| *t >= x0 && *t <= x1) {
        let x = frame.px(t);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{}" stroke="#555555" stroke-dasharray="3 2"/>"##, HEIGHT - MARGIN);
    }
    legend(&mut out, &[("detection rate".into(), PALETTE[0]), ("false-alarm rate".into(), PALETTE[1])]);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed_enough() {
        let svg = curves("ROC", "fpr", "tpr", &[("a<b".into(), vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)])], true);
        assert!(svg.contains("scopemh.plot v1"));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("<svg").count(), 1);
        assert!(svg.trim_end().ends_with("</svg>"));
        let s = threshold_sensitivity("t", &[(-0.5, 0.1, 0.0), (-0.05, 0.9, 0.6)], Some(-0.15));
        assert!(s.contains("stroke-dasharray"));
    }
}
