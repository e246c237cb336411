//! Minimal SVG rendering of persistence diagrams.

use zigrips::persistence::PersistenceDiagram;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 70.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Scatter of (birth, death) per dimension with the diagonal drawn; points
/// with infinite death sit on a marked band above the finite range.
pub fn render_svg(diagram: &PersistenceDiagram) -> String {
    let finite_max = diagram
        .points()
        .iter()
        .flat_map(|p| {
            let d = if p.is_infinite() { p.birth } else { p.death };
            [p.birth, d]
        })
        .fold(0.0f64, f64::max);
    let max = if finite_max > 0.0 {
        finite_max * 1.08
    } else {
        1.0
    };
    let span = SIZE - 2.0 * MARGIN;
    let x = |v: f64| MARGIN + v / max * span;
    // SVG y grows downward.
    let y = |v: f64| SIZE - MARGIN - v / max * span;
    let inf_y = MARGIN * 0.55;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n"
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = SIZE - MARGIN,
        r = SIZE - MARGIN
    ));
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{m}\" y2=\"{t}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = SIZE - MARGIN,
        t = MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\">birth</text>\n",
        SIZE / 2.0 - 18.0,
        SIZE - MARGIN / 3.0
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" transform=\"rotate(-90 {} {})\">death</text>\n",
        MARGIN / 3.0,
        SIZE / 2.0,
        MARGIN / 3.0,
        SIZE / 2.0
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\">0</text>\n",
        MARGIN - 12.0,
        SIZE - MARGIN + 14.0
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\">{:.3}</text>\n",
        SIZE - MARGIN - 14.0,
        SIZE - MARGIN + 14.0,
        max
    ));
    // Diagonal.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
        x(0.0),
        y(0.0),
        x(max),
        y(max)
    ));
    // Infinity band.
    if diagram.points().iter().any(|p| p.is_infinite()) {
        svg.push_str(&format!(
            "<line x1=\"{m}\" y1=\"{iy}\" x2=\"{r}\" y2=\"{iy}\" stroke=\"#555\" stroke-dasharray=\"2 4\"/>\n",
            m = MARGIN,
            r = SIZE - MARGIN,
            iy = inf_y
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">inf</text>\n",
            SIZE - MARGIN + 8.0,
            inf_y + 4.0
        ));
    }
    // Points and a small legend.
    let mut dims: Vec<usize> = diagram.points().iter().map(|p| p.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    for (slot, dim) in dims.iter().enumerate() {
        let color = PALETTE[dim % PALETTE.len()];
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/><text x=\"{}\" y=\"{}\" font-size=\"12\">H{dim}</text>\n",
            SIZE - MARGIN - 52.0,
            MARGIN + 16.0 * slot as f64,
            SIZE - MARGIN - 42.0,
            MARGIN + 16.0 * slot as f64 + 4.0
        ));
    }
    for p in diagram.points() {
        let color = PALETTE[p.dim % PALETTE.len()];
        let py = if p.is_infinite() { inf_y } else { y(p.death) };
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\" fill-opacity=\"0.75\"/>\n",
            x(p.birth),
            py
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
