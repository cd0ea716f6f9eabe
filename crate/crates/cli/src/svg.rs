//! Deterministic SVG output. Coordinates are printed with a fixed number of
//! decimals so identical inputs give identical bytes.

use carpet_core::geometry::{BBox, CarpetConfig, Point, Side};
use carpet_core::layout::SquareLayout;
use std::fmt::Write as _;

const CANVAS: f64 = 800.0;
const PAD: f64 = 20.0;

pub const SIDE_COLORS: [(Side, &str); 4] = [
    (Side::Left, "#d62728"),
    (Side::Bottom, "#1f77b4"),
    (Side::Right, "#2ca02c"),
    (Side::Top, "#ff7f0e"),
];

/// World-to-canvas map with the y axis pointing up.
struct View {
    min: Point,
    max_y: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl View {
    fn new(bb: BBox) -> View {
        let span = bb.width().max(bb.height()).max(f64::MIN_POSITIVE);
        let scale = CANVAS / span;
        View {
            min: bb.min,
            max_y: bb.max.y,
            scale,
            width: bb.width() * scale + 2.0 * PAD,
            height: bb.height() * scale + 2.0 * PAD,
        }
    }

    fn x(&self, x: f64) -> f64 {
        (x - self.min.x) * self.scale + PAD
    }

    fn y(&self, y: f64) -> f64 {
        (self.max_y - y) * self.scale + PAD
    }

    fn points(&self, pts: &[Point]) -> String {
        pts.iter()
            .map(|p| format!("{:.3},{:.3}", self.x(p.x), self.y(p.y)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn header(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n",
            w = self.width,
            h = self.height
        )
    }
}

/// Disks in gray, the four sides in their colors, one polyline per level.
pub fn render_input(config: &CarpetConfig, levels: &[(f64, Vec<Point>)]) -> String {
    let view = View::new(BBox::of(&config.outer));
    let mut out = view.header();
    let _ = writeln!(
        out,
        "<polygon class=\"outer\" points=\"{}\" fill=\"#ffffff\" stroke=\"none\"/>",
        view.points(&config.outer)
    );
    for d in &config.disks {
        let _ = writeln!(
            out,
            "<polygon class=\"disk\" data-id=\"{}\" points=\"{}\" fill=\"#bbbbbb\" stroke=\"#555555\" stroke-width=\"0.5\"/>",
            d.id,
            view.points(&d.polygon)
        );
    }
    for (side, color) in SIDE_COLORS {
        let _ = writeln!(
            out,
            "<path class=\"side\" data-side=\"{side:?}\" d=\"M {}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"3\"/>",
            view.points(&config.side_polyline(side)).replace(' ', " L ")
        );
    }
    for (t, path) in levels {
        let _ = writeln!(
            out,
            "<polyline class=\"level\" data-t=\"{t}\" points=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>",
            view.points(path)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn id_color(id: u64) -> String {
    // FNV-1a over the id bytes, folded into a hue
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("hsl({},{}%,{}%)", h % 360, 45 + (h >> 16) % 30, 55 + (h >> 32) % 20)
}

/// One `<rect>` per non-degenerate square and the image rectangle as a frame.
pub fn render_layout(layout: &SquareLayout) -> String {
    let frame = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, layout.d),
        Point::new(0.0, layout.d),
    ];
    let view = View::new(BBox::of(&frame));
    let mut out = view.header();
    for q in &layout.squares {
        if layout.degenerate.contains(&q.id) {
            continue;
        }
        let _ = writeln!(
            out,
            "<rect data-id=\"{}\" x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\" stroke=\"#333333\" stroke-width=\"0.5\"/>",
            q.id,
            view.x(q.x),
            view.y(q.y + q.s),
            q.s * view.scale,
            q.s * view.scale,
            id_color(q.id)
        );
    }
    let _ = writeln!(
        out,
        "<polygon class=\"frame\" points=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>",
        view.points(&frame)
    );
    out.push_str("</svg>\n");
    out
}
