//! SVG drawing of one realized class: labelled points, edges styled by
//! distance label, and a legend below the figure.

use std::fmt::Write;

use crescent_core::solver::ClassVerdict;

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const DASHES: [&str; 4] = ["", "6 3", "2 2", "8 3 2 3"];

fn style(label: u8) -> (&'static str, &'static str) {
    let k = usize::from(label).saturating_sub(1);
    (COLORS[k % COLORS.len()], DASHES[k % DASHES.len()])
}

/// `None` when the class has no witness.
pub fn render_class(v: &ClassVerdict) -> Option<String> {
    let pts = v.coordinates.as_ref()?;
    let a = v.assignment.as_ref()?;
    let m = &v.representative;

    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        // SVG y grows downwards
        y0 = y0.min(-p[1]);
        y1 = y1.max(-p[1]);
    }
    let extent = (x1 - x0).max(y1 - y0).max(1e-9);
    let margin = 0.1 * extent;
    let r = 0.025 * extent;
    let font = 0.05 * extent;
    let stroke = 0.008 * extent;
    let line = 1.4 * font;
    let labels = a.values().len();
    let legend_top = y1 + margin + line;
    let width = x1 - x0 + 2.0 * margin;
    let height = y1 - y0 + 2.0 * margin + line * (labels as f64 + 1.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="480" height="{:.0}">"#,
        x0 - margin,
        y0 - margin,
        width,
        height,
        480.0 * height / width
    );
    let _ = writeln!(s, r#"<title>class {}: {}</title>"#, v.class_id, m);
    let _ = writeln!(s, r#"<rect x="{:.6}" y="{:.6}" width="{width:.6}" height="{height:.6}" fill="white"/>"#, x0 - margin, y0 - margin);
    let _ = writeln!(s, r#"<g stroke-width="{stroke:.6}" stroke-linecap="round">"#);
    for (i, j, l) in m.edges() {
        let (color, dash) = style(l);
        let dash = if dash.is_empty() {
            String::new()
        } else {
            let scaled: Vec<String> = dash.split(' ').map(|d| format!("{:.6}", d.parse::<f64>().unwrap_or(1.0) * stroke)).collect();
            format!(r#" stroke-dasharray="{}""#, scaled.join(" "))
        };
        let _ = writeln!(
            s,
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="{color}"{dash}><title>d{l}</title></line>"#,
            pts[i][0], -pts[i][1], pts[j][0], -pts[j][1]
        );
    }
    s.push_str("</g>\n<g>\n");
    for (i, p) in pts.iter().enumerate() {
        let _ = writeln!(s, r#"<circle cx="{:.6}" cy="{:.6}" r="{r:.6}" fill="black"/>"#, p[0], -p[1]);
        let _ = writeln!(
            s,
            r#"<text x="{:.6}" y="{:.6}" font-size="{font:.6}" font-family="sans-serif">{}</text>"#,
            p[0] + 1.2 * r,
            -p[1] - 1.2 * r,
            i + 1
        );
    }
    s.push_str("</g>\n<g font-family=\"sans-serif\">\n");
    for (k, d) in a.values().iter().enumerate() {
        let label = (k + 1) as u8;
        let (color, _) = style(label);
        let y = legend_top + line * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="{color}" stroke-width="{stroke:.6}"/>"#,
            x0,
            y - 0.35 * font,
            x0 + 3.0 * font,
            y - 0.35 * font
        );
        let _ = writeln!(s, r#"<text x="{:.6}" y="{y:.6}" font-size="{font:.6}">d{label} = {d:.6}</text>"#, x0 + 3.6 * font);
    }
    s.push_str("</g>\n</svg>\n");
    Some(s)
}
