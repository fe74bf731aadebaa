use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::graph::{EdgeKind, GroupedGraph, ROOT};
use super::{LayoutResult, Rect};
use crate::export::xml_escape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SvgStyle {
    pub labels: bool,
    pub font_size: f64,
    /// Stroke width per unit of `ln(1 + weight)`.
    pub edge_width: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            labels: true,
            font_size: 9.0,
            edge_width: 1.2,
        }
    }
}

/// Fixed three-decimal rendering, trailing zeros and negative zero removed.
fn num(v: f64) -> String {
    let mut s = format!("{:.3}", v);
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

const FILLS: [&str; 4] = ["#f4f6fb", "#e6ecf7", "#d8e2f2", "#cad8ed"];

fn write_groups(out: &mut String, g: &GroupedGraph, r: &LayoutResult, style: &SvgStyle, group: usize) {
    for &c in g.child_groups(group) {
        let rect: Rect = r.groups[c];
        let depth = g.group_depth(c);
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"6\" ry=\"6\" fill=\"{}\" stroke=\"#7a8aa6\"/>",
            num(rect.x),
            num(rect.y),
            num(rect.width),
            num(rect.height),
            FILLS[(depth - 1) % FILLS.len()]
        );
        if style.labels {
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" class=\"group\">{}</text>",
                num(rect.x + 4.0),
                num(rect.y + style.font_size + 2.0),
                xml_escape(&g.groups()[c].id)
            );
        }
        write_groups(out, g, r, style, c);
    }
}

/// Point where the segment from the ellipse centre `c` towards `to` leaves it.
fn ellipse_exit(c: [f64; 2], to: [f64; 2], rx: f64, ry: f64) -> [f64; 2] {
    let (dx, dy) = (to[0] - c[0], to[1] - c[1]);
    let t = 1.0 / ((dx / rx).powi(2) + (dy / ry).powi(2)).sqrt();
    if !t.is_finite() || t >= 1.0 {
        return c;
    }
    [c[0] + dx * t, c[1] + dy * t]
}

fn short_label(id: &str) -> &str {
    id.rsplit('.').next().unwrap_or(id)
}

/// Renders a layout as SVG: group rectangles nested in tree order, one path
/// per edge (dashed for dataflow), one ellipse per leaf. Coordinates are
/// rounded to three decimals.
pub fn render_svg(g: &GroupedGraph, r: &LayoutResult, style: &SvgStyle) -> String {
    let c = r.canvas;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"{}\" style=\"background:#ffffff\">",
        num(c.x),
        num(c.y),
        num(c.width),
        num(c.height),
        num(c.width),
        num(c.height),
        num(style.font_size)
    );
    out.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"7\" markerHeight=\"7\" \
         orient=\"auto-start-reverse\"><polygon points=\"0,0 10,5 0,10\" fill=\"#333\"/></marker></defs>\n",
    );
    out.push_str("<g class=\"groups\">\n");
    write_groups(&mut out, g, r, style, ROOT);
    out.push_str("</g>\n<g class=\"edges\" fill=\"none\" stroke=\"#333\">\n");
    let (rx, ry) = (r.leaf_width / 2.0, r.leaf_height / 2.0);
    for e in g.edges() {
        let (a, b) = (r.leaves[e.from], r.leaves[e.to]);
        let width = style.edge_width * (1.0 + e.weight.max(1) as f64).ln();
        let dash = if e.kind == EdgeKind::Dataflow {
            " stroke-dasharray=\"4 3\""
        } else {
            ""
        };
        let d = if e.from == e.to {
            let start = [a[0] + rx * 0.5, a[1] - ry * 0.85];
            let end = [a[0] + rx * 0.95, a[1] - ry * 0.3];
            format!(
                "M {} {} C {} {} {} {} {} {}",
                num(start[0]),
                num(start[1]),
                num(start[0] + rx * 0.6),
                num(start[1] - ry * 2.0),
                num(end[0] + rx * 1.2),
                num(end[1] - ry * 0.6),
                num(end[0]),
                num(end[1])
            )
        } else {
            let p = ellipse_exit(a, b, rx, ry);
            let q = ellipse_exit(b, a, rx, ry);
            format!("M {} {} L {} {}", num(p[0]), num(p[1]), num(q[0]), num(q[1]))
        };
        let _ = writeln!(
            out,
            "<path d=\"{d}\" stroke-width=\"{}\"{dash} marker-end=\"url(#arrow)\"/>",
            num(width)
        );
    }
    out.push_str("</g>\n<g class=\"leaves\">\n");
    for (i, leaf) in g.leaves().iter().enumerate() {
        let p = r.leaves[i];
        let _ = writeln!(
            out,
            "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"#fffbe6\" stroke=\"#8a6d00\"><title>{}</title></ellipse>",
            num(p[0]),
            num(p[1]),
            num(rx),
            num(ry),
            xml_escape(&leaf.id)
        );
        if style.labels {
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                num(p[0]),
                num(p[1] + style.font_size / 3.0),
                xml_escape(short_label(&leaf.id))
            );
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}
