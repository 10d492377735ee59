//! Minimal SVG rendering of confidence bands.

use std::fmt::Write;

use vbpbb::Band;

const W: f64 = 720.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

struct Frame {
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        PAD + (W - 2.0 * PAD) * if self.x_max > 0.0 { t / self.x_max } else { 0.0 }
    }

    fn y(&self, v: f64) -> f64 {
        let span = self.y_max - self.y_min;
        let f = if span > 0.0 { (v - self.y_min) / span } else { 0.5 };
        H - PAD - (H - 2.0 * PAD) * f
    }
}

fn polyline(out: &mut String, frame: &Frame, ys: &[f64], step: f64, style: &str) {
    let pts: Vec<String> = ys
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{:.2},{:.2}", frame.x(i as f64 * step), frame.y(v)))
        .collect();
    let _ = writeln!(out, r#"<polyline fill="none" {style} points="{}"/>"#, pts.join(" "));
}

fn area(out: &mut String, frame: &Frame, lo: &[f64], hi: &[f64], step: f64, fill: &str) {
    let mut pts: Vec<String> = hi
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{:.2},{:.2}", frame.x(i as f64 * step), frame.y(v)))
        .collect();
    pts.extend(
        lo.iter()
            .enumerate()
            .rev()
            .map(|(i, &v)| format!("{:.2},{:.2}", frame.x(i as f64 * step), frame.y(v))),
    );
    let _ = writeln!(out, r#"<polygon fill="{fill}" fill-opacity="0.25" stroke="none" points="{}"/>"#, pts.join(" "));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// VBPBB band in blue, optional PBB band in red, over one period.
pub fn band_svg(title: &str, vbpbb: &dyn Band, pbb: Option<&dyn Band>, step_hours: f64) -> String {
    let bands: Vec<&dyn Band> = std::iter::once(vbpbb).chain(pbb).collect();
    let (mut y_min, mut y_max) = (0.0f64, 0.0f64);
    let mut x_max = 0.0f64;
    for b in &bands {
        for v in b.lower().iter().chain(b.upper()) {
            y_min = y_min.min(*v);
            y_max = y_max.max(*v);
        }
        x_max = x_max.max(b.period_samples().saturating_sub(1) as f64 * step_hours);
    }
    let frame = Frame { x_max, y_min, y_max };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{PAD}" y="24" font-size="14">{}</text>"#, escape(title));
    let zero = frame.y(0.0);
    let _ = writeln!(
        out,
        r##"<line x1="{PAD}" x2="{:.2}" y1="{zero:.2}" y2="{zero:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        W - PAD
    );
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for (v, anchor) in [(y_max, PAD), (y_min, H - PAD)] {
        let _ = writeln!(out, r#"<text x="{}" y="{anchor:.2}" text-anchor="end">{v:.4e}</text>"#, PAD - 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{x_max} h</text>"#, W - PAD, H - PAD + 16.0);

    let colours = [("#1f4fd1", "VBPBB"), ("#d12a1f", "PBB")];
    for (b, (colour, name)) in bands.iter().zip(colours) {
        area(&mut out, &frame, b.lower(), b.upper(), step_hours, colour);
        polyline(&mut out, &frame, b.median(), step_hours, &format!(r#"stroke="{colour}" stroke-width="1.5""#));
        let y = if name == "VBPBB" { 24.0 } else { 38.0 };
        let _ = writeln!(out, r#"<text x="{}" y="{y}" fill="{colour}" text-anchor="end">{name}</text>"#, W - PAD);
    }
    out.push_str("</svg>\n");
    out
}
