//! Minimal SVG output: score scatter plots and level-set maps with
//! marching-squares contours.

use std::fmt::Write as _;

use christoffel::cdkernel::{GridSpec, LevelField};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// Red at 0, blue at 1.
pub fn ramp(s: f64) -> String {
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 1.0 };
    let r = (255.0 * (1.0 - s)).round() as u8;
    let b = (255.0 * s).round() as u8;
    format!("#{r:02x}00{b:02x}")
}

/// Affine map from data coordinates to the drawing area, `y` pointing up.
#[derive(Clone, Copy, Debug)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn around(points: &[(f64, f64)]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return Frame { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 };
        }
        // Square window so the plot keeps the aspect ratio of the data.
        let half = 0.525 * (x1 - x0).max(y1 - y0).max(1e-9);
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        Frame { x0: cx - half, x1: cx + half, y0: cy - half, y1: cy + half }
    }

    fn px(&self, x: f64) -> f64 {
        let w = self.x1 - self.x0;
        if w > 0.0 {
            MARGIN + (x - self.x0) / w * (SIZE - 2.0 * MARGIN)
        } else {
            SIZE / 2.0
        }
    }

    fn py(&self, y: f64) -> f64 {
        let h = self.y1 - self.y0;
        if h > 0.0 {
            SIZE - MARGIN - (y - self.y0) / h * (SIZE - 2.0 * MARGIN)
        } else {
            SIZE / 2.0
        }
    }

    fn border(&self, out: &mut String) {
        let _ = writeln!(
            out,
            r#"<rect x="{m}" y="{m}" width="{w}" height="{w}" fill="none" stroke="black" stroke-width="1"/>"#,
            m = MARGIN,
            w = SIZE - 2.0 * MARGIN
        );
        let _ = writeln!(
            out,
            r#"<text x="{m}" y="{b:.1}" font-size="11">x: [{:.3}, {:.3}]  y: [{:.3}, {:.3}]</text>"#,
            self.x0,
            self.x1,
            self.y0,
            self.y1,
            m = MARGIN,
            b = SIZE - 12.0
        );
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = SIZE
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="24" font-size="14">{}</text>"#, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Points colored by score; flagged points get a black ring.
pub fn scatter(points: &[(f64, f64)], scores: &[f64], flagged: &[bool], title: &str) -> String {
    let frame = Frame::around(points);
    let mut out = String::new();
    header(&mut out, title);
    frame.border(&mut out);
    // Draw in increasing score order so high scores stay visible.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    for i in order {
        let (x, y) = points[i];
        let stroke = if flagged[i] { r#" stroke="black" stroke-width="1.5""# } else { "" };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"{stroke}/>"#,
            frame.px(x),
            frame.py(y),
            ramp(scores[i])
        );
    }
    out.push_str("</svg>\n");
    out
}

type Segment = ((f64, f64), (f64, f64));

/// Marching-squares segments of `{f = level}` on a row-major (`y` outer)
/// grid. Interpolation is done on `ln f` since kernel values grow
/// exponentially; saddles are split using the cell-centre average.
pub fn contour_segments(grid: &GridSpec, values: &[f64], level: f64) -> Vec<Segment> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut segs = Vec::new();
    if nx < 2 || ny < 2 || level <= 0.0 {
        return segs;
    }
    let f = |i: usize, j: usize| values[j * nx + i].max(f64::MIN_POSITIVE).ln() - level.ln();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // Corners counter-clockwise from bottom-left.
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let fv: Vec<f64> = corners.iter().map(|&(a, b)| f(a, b)).collect();
            let pos: Vec<(f64, f64)> = corners.iter().map(|&(a, b)| (grid.x(a), grid.y(b))).collect();
            let case = fv.iter().enumerate().fold(0u8, |acc, (k, &v)| acc | (u8::from(v > 0.0) << k));
            // Edge k joins corner k and corner k+1.
            let edge = |k: usize| {
                let (a, b) = (k, (k + 1) % 4);
                let t = fv[a] / (fv[a] - fv[b]);
                (pos[a].0 + t * (pos[b].0 - pos[a].0), pos[a].1 + t * (pos[b].1 - pos[a].1))
            };
            let centre_above = fv.iter().sum::<f64>() > 0.0;
            let pairs: &[(usize, usize)] = match case {
                0 | 15 => &[],
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 if centre_above => &[(0, 1), (2, 3)],
                5 => &[(3, 0), (1, 2)],
                10 if centre_above => &[(3, 0), (1, 2)],
                10 => &[(0, 1), (2, 3)],
                _ => unreachable!("four corners give a 4-bit case"),
            };
            for &(a, b) in pairs {
                segs.push((edge(a), edge(b)));
            }
        }
    }
    segs
}

/// Heat map of `ln K` over the grid, the contour `K = threshold`, and the atoms.
pub fn level_map(field: &LevelField, atoms: &[(f64, f64)], title: &str) -> String {
    let g = field.grid;
    let frame = Frame { x0: g.x0, x1: g.x1, y0: g.y0, y1: g.y1 };
    let mut out = String::new();
    header(&mut out, title);
    let logs: Vec<f64> = field.values.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let inner = SIZE - 2.0 * MARGIN;
    let cw = inner / g.nx as f64;
    let ch = inner / g.ny as f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let s = (logs[j * g.nx + i] - lo) / span;
            let x = MARGIN + i as f64 * cw;
            let y = SIZE - MARGIN - (j + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.55"/>"#,
                cw + 0.05,
                ch + 0.05,
                ramp(s)
            );
        }
    }
    // Nodes sit at cell centres in the heat map, so contours use a frame
    // shrunk by half a cell.
    let node_frame = if g.nx > 1 && g.ny > 1 {
        let hx = (g.x1 - g.x0) / (g.nx - 1) as f64 / 2.0;
        let hy = (g.y1 - g.y0) / (g.ny - 1) as f64 / 2.0;
        Frame { x0: g.x0 - hx, x1: g.x1 + hx, y0: g.y0 - hy, y1: g.y1 + hy }
    } else {
        frame
    };
    let segs = contour_segments(&g, &field.values, field.threshold);
    if !segs.is_empty() {
        let mut d = String::new();
        for ((x0, y0), (x1, y1)) in segs {
            let _ = write!(
                d,
                "M{:.2} {:.2}L{:.2} {:.2}",
                node_frame.px(x0),
                node_frame.py(y0),
                node_frame.px(x1),
                node_frame.py(y1)
            );
        }
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="black" stroke-width="1.5"/>"#);
    }
    for &(x, y) in atoms {
        if x >= g.x0 && x <= g.x1 && y >= g.y0 && y <= g.y1 {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="black"/>"#,
                node_frame.px(x),
                node_frame.py(y)
            );
        }
    }
    node_frame.border(&mut out);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize) -> GridSpec {
        GridSpec { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0, nx, ny }
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#ff0000");
        assert_eq!(ramp(1.0), "#0000ff");
        assert_eq!(ramp(2.0), "#0000ff");
    }

    #[test]
    fn circle_contour_points_lie_on_level() {
        // f = exp(x^2 + y^2): the level e^{1/4} is the circle of radius 1/2,
        // and ln f is exactly linear along grid edges only approximately,
        // so allow the interpolation error of the grid spacing.
        let g = grid(41, 41);
        let values: Vec<f64> = g.nodes().iter().map(|z| z.norm_sqr().exp()).collect();
        let segs = contour_segments(&g, &values, 0.25f64.exp());
        assert!(segs.len() > 20);
        for (a, b) in segs {
            for (x, y) in [a, b] {
                assert!(((x * x + y * y).sqrt() - 0.5).abs() < 0.01, "({x}, {y})");
            }
        }
    }

    #[test]
    fn saddle_cells_give_two_segments() {
        let g = grid(2, 2);
        // Bottom-left and top-right above the level.
        let segs = contour_segments(&g, &[4.0, 0.5, 0.5, 4.0], 1.0);
        assert_eq!(segs.len(), 2);
        let flat = contour_segments(&g, &[2.0; 4], 1.0);
        assert!(flat.is_empty());
    }

    #[test]
    fn single_node_grid_has_no_contour() {
        assert!(contour_segments(&grid(1, 1), &[3.0], 1.0).is_empty());
    }
}
