//! Minimal SVG heatmap: one rectangle per grid point, alpha left to right,
//! h bottom to top, linear colour scale between the metric's min and max.

use std::fmt::Write;

const CELL: f64 = 12.0;
const MARGIN: f64 = 50.0;
const LEGEND: f64 = 90.0;
const MISSING: &str = "#bbbbbb";
// dark blue -> teal -> yellow
const STOPS: [(f64, [f64; 3]); 3] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = if t <= STOPS[1].0 { 0 } else { 1 };
    let (t0, c0) = STOPS[k];
    let (t1, c1) = STOPS[k + 1];
    let u = (t - t0) / (t1 - t0);
    let mix = |i: usize| (c0[i] + u * (c1[i] - c0[i])).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

/// `values[i * fields.len() + j]` belongs to `(alphas[i], fields[j])`.
pub fn heatmap(title: &str, alphas: &[f64], fields: &[f64], values: &[Option<f64>]) -> String {
    assert_eq!(values.len(), alphas.len() * fields.len());
    let finite = values.iter().flatten().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (w, h) = (alphas.len() as f64 * CELL, fields.len() as f64 * CELL);
    let width = w + 2.0 * MARGIN + LEGEND;
    let height = h + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-size="13">{title}</text>"#,
        MARGIN - 20.0
    );
    for (i, _) in alphas.iter().enumerate() {
        for (j, _) in fields.iter().enumerate() {
            let fill = match values[i * fields.len() + j] {
                Some(v) if v.is_finite() => colour((v - lo) / span),
                _ => MISSING.to_string(),
            };
            let x = MARGIN + i as f64 * CELL;
            let y = MARGIN + h - (j as f64 + 1.0) * CELL;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"/>"#
            );
        }
    }
    let (a0, a1) = (alphas[0], alphas[alphas.len() - 1]);
    let (h0, h1) = (fields[0], fields[fields.len() - 1]);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}">alpha {a0}</text>"#, MARGIN + h + 15.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{a1}</text>"#,
        MARGIN + w,
        MARGIN + h + 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">h {h0}</text>"#,
        MARGIN - 4.0,
        MARGIN + h
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{h1}</text>"#,
        MARGIN - 4.0,
        MARGIN + 10.0
    );
    // legend bar
    let lx = MARGIN + w + 20.0;
    let steps = 32;
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let y = MARGIN + h - (k as f64 + 1.0) * h / steps as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{y}" width="14" height="{}" fill="{}"/>"#,
            h / steps as f64 + 0.5,
            colour(t)
        );
    }
    let (lo_txt, hi_txt) = if lo.is_finite() {
        (format!("{lo:.4e}"), format!("{hi:.4e}"))
    } else {
        ("n/a".into(), "n/a".into())
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">max {hi_txt}</text>"#,
        lx + 18.0,
        MARGIN + 10.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}">min {lo_txt}</text>"#, lx + 18.0, MARGIN + h);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cell_per_point_and_legend_range() {
        let a = [0.0, 1.0, 2.0];
        let f = [0.0, 0.5];
        let v = [Some(0.0), Some(1.0), Some(2.0), None, Some(4.0), Some(5.0)];
        let s = heatmap("test", &a, &f, &v);
        let cells = s.matches(&format!(r#"width="{CELL}""#)).count();
        assert_eq!(cells, 6);
        assert!(s.contains("max 5.0000e0") && s.contains("min 0.0000e0"));
        assert!(s.contains(MISSING));
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }

    #[test]
    fn colour_endpoints() {
        assert_eq!(colour(0.0), "#440154");
        assert_eq!(colour(1.0), "#fde725");
        assert_eq!(colour(2.0), colour(1.0));
    }
}
