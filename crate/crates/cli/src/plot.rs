//! Minimal SVG rendering of step-function curves.

use std::fmt::Write;

use crate::io::CurveTable;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Render every curve of the table as a right-continuous step polyline on a
/// shared `[0, t_max] × [0, 1]` frame.
pub fn render_svg(table: &CurveTable, title: &str) -> String {
    let t_max = table.time.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE) * 1.05;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |t: f64| MARGIN_LEFT + t / t_max * plot_w;
    let y = |v: f64| MARGIN_TOP + (1.0 - v.clamp(0.0, 1.0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );

    // axes, ticks and labels
    let (x0, y0) = (x(0.0), y(0.0));
    let _ = writeln!(
        svg,
        r#"<path d="M{x0:.1},{:.1} V{y0:.1} H{:.1}" fill="none" stroke="black"/>"#,
        y(1.0),
        x(t_max)
    );
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{x0:.1}" y2="{:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#,
            x0 - 5.0,
            y(v),
            y(v),
            x0 - 8.0,
            y(v) + 4.0
        );
        let t = t_max * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{y0:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x(t),
            x(t),
            y0 + 5.0,
            x(t),
            y0 + 20.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">cumulative distribution</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (k, (name, values)) in table.curves.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut d = format!("M{:.2},{:.2}", x(0.0), y(0.0));
        let mut level = 0.0;
        for (&t, &v) in table.time.iter().zip(values) {
            let _ = write!(d, " H{:.2}", x(t));
            if v != level {
                let _ = write!(d, " V{:.2}", y(v));
                level = v;
            }
        }
        let _ = write!(d, " H{:.2}", x(t_max));
        let _ = writeln!(
            svg,
            r#"<polyline class="curve" data-name="{}" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            escape(name),
            path_to_points(&d)
        );
        let ly = MARGIN_TOP + 20.0 * k as f64 + 10.0;
        let lx = WIDTH - MARGIN_RIGHT + 20.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Expand an `M/H/V` path into explicit polyline points.
fn path_to_points(d: &str) -> String {
    let mut points = Vec::new();
    let (mut cx, mut cy) = (0.0f64, 0.0f64);
    for token in d.split_whitespace() {
        let (cmd, rest) = token.split_at(1);
        match cmd {
            "M" => {
                let mut it = rest.split(',').map(|s| s.parse::<f64>().unwrap_or(0.0));
                cx = it.next().unwrap_or(0.0);
                cy = it.next().unwrap_or(0.0);
            }
            "H" => cx = rest.parse().unwrap_or(cx),
            "V" => cy = rest.parse().unwrap_or(cy),
            _ => continue,
        }
        points.push(format!("{cx:.2},{cy:.2}"));
    }
    points.join(" ")
}

fn tick_label(t: f64) -> String {
    if t == 0.0 {
        "0".into()
    } else if t >= 100.0 {
        format!("{t:.0}")
    } else if t >= 1.0 {
        format!("{t:.1}")
    } else {
        format!("{t:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_curve() {
        let table = CurveTable {
            time: vec![1.0, 2.0, 3.0],
            curves: vec![("F1".into(), vec![0.2, 0.6, 1.0]), ("K2".into(), vec![0.05, 0.4, 1.0])],
        };
        let svg = render_svg(&table, "estimates");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">F1<") && svg.contains(">K2<"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn steps_are_horizontal_then_vertical() {
        let table = CurveTable {
            time: vec![1.0],
            curves: vec![("F".into(), vec![1.0])],
        };
        let svg = render_svg(&table, "t");
        let start = svg.find("points=\"").unwrap() + 8;
        let points: Vec<&str> = svg[start..].split('"').next().unwrap().split(' ').collect();
        // origin, run to t = 1, jump to 1, run to the right edge
        assert_eq!(points.len(), 4);
        let parse = |p: &str| -> (f64, f64) {
            let mut it = p.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        };
        let (a, b, c) = (parse(points[0]), parse(points[1]), parse(points[2]));
        assert_eq!(a.1, b.1);
        assert_eq!(b.0, c.0);
        assert!(c.1 < b.1);
    }

    #[test]
    fn titles_are_escaped() {
        let table = CurveTable {
            time: vec![1.0],
            curves: vec![("a<b".into(), vec![1.0])],
        };
        assert!(render_svg(&table, "x & y").contains("x &amp; y"));
    }
}
