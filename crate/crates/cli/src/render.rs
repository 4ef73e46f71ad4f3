//! Figures: lifted fields, filmstrips of contour paths and particle
//! trajectories.

use shapeflow::tangent::TangentVector;
use shapeflow::{Contour, Vec2};

use crate::svg::{diverging, sequential, Canvas, Svg};
use crate::RenderOptions;

const MAX_ARROWS: usize = 400;
const MAX_FRAMES: usize = 9;

fn outline(svg: &mut Svg, c: &Contour, colour: &str, opts: &RenderOptions) {
    svg.polygon(
        c.points(),
        &format!("fill:none;stroke:{colour};stroke-width:{:.2}", opts.stroke),
    );
}

pub fn contour_svg(c: &Contour, opts: &RenderOptions) -> String {
    let mut svg = Svg::new(Canvas::fit(c.points(), opts.width));
    svg.polygon(
        c.points(),
        &format!(
            "fill:#eef2fa;stroke:#1e3ca0;stroke-width:{:.2}",
            opts.stroke
        ),
    );
    svg.finish()
}

/// Potential shading, gradient arrows on a strided subset of triangles and
/// the contour on top.
pub fn lift_svg(c: &Contour, alpha: &TangentVector, opts: &RenderOptions) -> String {
    let mesh = &alpha.mesh;
    let mut svg = Svg::new(Canvas::fit(c.points(), opts.width));
    let u = alpha.potential.values();
    let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for tri in mesh.triangles() {
        let mean = (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
        let colour = diverging(if umax > 0.0 { mean / umax } else { 0.0 });
        let pts = tri.map(|v| mesh.vertices()[v]);
        svg.polygon(
            &pts,
            &format!("fill:{colour};stroke:{colour};stroke-width:0.4"),
        );
    }
    let grads = alpha.grad.vectors();
    let gmax = grads.iter().fold(0.0f64, |m, g| m.max(g.norm()));
    let stride = mesh.triangle_count().div_ceil(MAX_ARROWS).max(1);
    let spacing = (mesh.total_area() * stride as f64 / mesh.triangle_count() as f64).sqrt();
    if gmax > 0.0 {
        let k = opts.arrow_scale * 0.8 * spacing / gmax;
        for t in (0..mesh.triangle_count()).step_by(stride) {
            svg.arrow(
                mesh.centroid(t),
                grads[t] * k,
                "fill:none;stroke:#222222;stroke-width:0.8",
            );
        }
    }
    outline(&mut svg, c, "#111111", opts);
    svg.finish()
}

/// Indices of at most `MAX_FRAMES` evenly spaced frames, ends included.
pub fn frame_indices(n: usize) -> Vec<usize> {
    let f = n.min(MAX_FRAMES);
    if f <= 1 {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..f)
        .map(|k| (k * (n - 1) + (f - 1) / 2) / (f - 1))
        .collect();
    idx.dedup();
    idx
}

/// Overlay of evenly spaced contours coloured by time.
pub fn filmstrip_svg(contours: &[Contour], times: &[f64], opts: &RenderOptions) -> String {
    let frames = frame_indices(contours.len());
    let canvas = Canvas::fit(
        frames.iter().flat_map(|&i| contours[i].points()),
        opts.width,
    );
    let mut svg = Svg::new(canvas);
    let last = frames.len().saturating_sub(1).max(1) as f64;
    for (k, &i) in frames.iter().enumerate() {
        outline(&mut svg, &contours[i], &sequential(k as f64 / last), opts);
    }
    if let (Some(t0), Some(t1)) = (frames.first(), frames.last()) {
        let label = format!(
            "t = {:.3} .. {:.3}, {} frames",
            times[*t0],
            times[*t1],
            frames.len()
        );
        svg.text((8.0, 16.0), 12.0, &label);
    }
    svg.finish()
}

/// Particle paths between the first and last contours.
pub fn trajectories_svg(
    first: &Contour,
    last: &Contour,
    tracks: &[Vec<Vec2>],
    opts: &RenderOptions,
) -> String {
    let canvas = Canvas::fit(
        first
            .points()
            .iter()
            .chain(last.points())
            .chain(tracks.iter().flatten()),
        opts.width,
    );
    let mut svg = Svg::new(canvas);
    outline(&mut svg, first, "#9aa6c8", opts);
    outline(&mut svg, last, "#1e3ca0", opts);
    for track in tracks {
        svg.polyline(track, "fill:none;stroke:#e0781e;stroke-width:1.0");
        if let Some(&p) = track.first() {
            svg.circle(p, 2.0, "fill:#e0781e");
        }
    }
    svg.finish()
}
