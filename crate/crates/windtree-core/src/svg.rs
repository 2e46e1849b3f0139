//! Deterministic SVG rendering: scatterer field, trajectory polyline and
//! nested cocycle boxes. Output is byte-stable for fixed input apart from the
//! constant version header.

use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct BoxOverlay {
    pub level: usize,
    /// In cell coordinates, min corner then max corner.
    pub rect: (f64, f64, f64, f64),
}

#[derive(Clone, Debug)]
pub struct RenderScene {
    pub a: f64,
    pub b: f64,
    /// World window (xmin, ymin, xmax, ymax) in table coordinates.
    pub window: (f64, f64, f64, f64),
    pub polyline: Vec<(f64, f64)>,
    pub boxes: Vec<BoxOverlay>,
}

const VIEW_SIZE: f64 = 800.0;
const BOX_STYLES: [&str; 4] = ["#c0392b", "#2980b9", "#27ae60", "#8e44ad"];

fn fnum(v: f64) -> String {
    format!("{v:.4}")
}

/// Render the scene to an SVG document string.
pub fn render_svg(scene: &RenderScene) -> String {
    let (x0, y0, x1, y1) = scene.window;
    let w = (x1 - x0).max(1e-9);
    let h = (y1 - y0).max(1e-9);
    let scale = VIEW_SIZE / w.max(h);
    let width = w * scale;
    let height = h * scale;
    // world -> viewport, y axis flipped
    let tx = |x: f64| (x - x0) * scale;
    let ty = |y: f64| height - (y - y0) * scale;

    let mut out = String::new();
    out.push_str("<!-- windtree/1 -->\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fnum(width),
        fnum(height),
        fnum(width),
        fnum(height)
    );
    let _ = writeln!(out, "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>", fnum(width), fnum(height));

    // scatterers with centers inside the (slightly padded) window
    let ha = scene.a / 2.0;
    let hb = scene.b / 2.0;
    let i_lo = (x0 - 1.0).floor() as i64;
    let i_hi = (x1 + 1.0).ceil() as i64;
    let j_lo = (y0 - 1.0).floor() as i64;
    let j_hi = (y1 + 1.0).ceil() as i64;
    out.push_str("<g fill=\"#444444\">\n");
    for i in i_lo..=i_hi {
        for j in j_lo..=j_hi {
            let cx = i as f64;
            let cy = j as f64;
            if cx + ha < x0 || cx - ha > x1 || cy + hb < y0 || cy - hb > y1 {
                continue;
            }
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                fnum(tx(cx - ha)),
                fnum(ty(cy + hb)),
                fnum(scene.a * scale),
                fnum(scene.b * scale)
            );
        }
    }
    out.push_str("</g>\n");

    for (slot, overlay) in scene.boxes.iter().enumerate() {
        let (bx0, by0, bx1, by1) = overlay.rect;
        let color = BOX_STYLES[slot % BOX_STYLES.len()];
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" data-level=\"{}\"/>",
            fnum(tx(bx0)),
            fnum(ty(by1)),
            fnum((bx1 - bx0) * scale),
            fnum((by1 - by0) * scale),
            color,
            fnum(1.0 + slot as f64 * 0.5),
            overlay.level
        );
    }

    if scene.polyline.len() >= 2 {
        let mut path = String::new();
        for (k, (x, y)) in scene.polyline.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{}{} {} ", cmd, fnum(tx(*x)), fnum(ty(*y)));
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>",
            path.trim_end()
        );
    }

    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> RenderScene {
        RenderScene {
            a: 0.5,
            b: 0.5,
            window: (-1.0, -1.0, 6.0, 6.0),
            polyline: vec![(0.5, 0.6), (1.2, 0.9), (2.0, 1.4)],
            boxes: vec![
                BoxOverlay { level: 4, rect: (0.0, 0.0, 5.0, 1.0) },
                BoxOverlay { level: 6, rect: (0.0, 0.0, 13.0, 5.0) },
            ],
        }
    }

    #[test]
    fn deterministic_output() {
        let s1 = render_svg(&scene());
        let s2 = render_svg(&scene());
        assert_eq!(s1, s2);
        assert!(s1.starts_with("<!-- windtree/1 -->"));
        assert!(s1.contains("<svg"));
        assert!(s1.contains("data-level=\"4\""));
        assert!(s1.contains("<path"));
    }

    #[test]
    fn empty_polyline_still_renders_scatterers() {
        let mut sc = scene();
        sc.polyline.clear();
        sc.boxes.clear();
        let s = render_svg(&sc);
        assert!(!s.contains("<path"));
        assert!(s.matches("<rect").count() > 10);
    }
}
