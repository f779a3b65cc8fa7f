//! SVG heatmap of a density on a partition: one filled path per cell plus a
//! stroked domain outline, grayscale mapped linearly from the minimum to the
//! maximum density (dark = high). Output bytes depend only on the inputs.

use ulam2d::geometry::{Point2, Polygon};
use ulam2d::ulam::{DensityVector, UlamPartition};

const MARGIN: f64 = 20.0;
const SCALE: f64 = 400.0;

fn to_px(p: Point2) -> (f64, f64) {
    // Domain y points up, SVG y points down.
    (MARGIN + p.x * SCALE, MARGIN + (1.0 - p.y) * SCALE)
}

fn path_data(poly: &Polygon) -> String {
    let mut d = String::new();
    for (k, &v) in poly.vertices().iter().enumerate() {
        let (x, y) = to_px(v);
        let cmd = if k == 0 { 'M' } else { 'L' };
        d.push_str(&format!("{cmd}{x:.3},{y:.3} "));
    }
    d.push('Z');
    d
}

/// Renders the heatmap as an SVG string with exactly `cells + 1` path
/// elements (cells first, then the domain outline).
pub fn render_svg_heatmap(part: &UlamPartition, rho: &DensityVector) -> String {
    let min = rho.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = rho.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;

    let width = MARGIN * 2.0 + 2.0 * SCALE;
    let height = MARGIN * 2.0 + SCALE;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    for (i, cell) in part.cells().iter().enumerate() {
        let norm = if range > 0.0 {
            (rho.values[i] - min) / range
        } else {
            0.5
        };
        let gray = (255.0 * (1.0 - norm)).round().clamp(0.0, 255.0) as u8;
        out.push_str(&format!(
            "<path d=\"{}\" fill=\"#{gray:02x}{gray:02x}{gray:02x}\" stroke=\"none\"/>\n",
            path_data(cell)
        ));
    }
    out.push_str(&format!(
        "<path d=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n",
        path_data(part.omega())
    ));
    out.push_str("</svg>\n");
    out
}
