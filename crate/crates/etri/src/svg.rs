//! Deterministic SVG rendering of planar meshes.

use std::fmt::Write;

use etri_core::planar::{triangle_angles, PlanarMesh};
use etri_core::surface::Colour;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SvgError {
    #[error("mesh has no faces")]
    EmptyMesh,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvgOptions {
    /// Width and height of the drawing in pixels.
    pub size: f64,
    pub stroke_width: f64,
    /// Colour of each mesh vertex, drawn as dots.
    pub vertex_colours: Option<Vec<Colour>>,
    /// Fill each face by its smallest angle (red at 0°, green at 60°).
    pub angle_heatmap: bool,
    /// Draw the unit circle (for disc-model tessellations).
    pub unit_circle: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { size: 800.0, stroke_width: 0.6, vertex_colours: None, angle_heatmap: false, unit_circle: false }
    }
}

fn colour_hex(c: Colour) -> &'static str {
    match c {
        Colour::MinusOne => "#1f77b4",
        Colour::One => "#d62728",
        Colour::Infinity => "#2ca02c",
    }
}

fn heat(angle_deg: f64) -> String {
    let t = (angle_deg / 60.0).clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - t)).round() as u8;
    let g = (200.0 * t).round() as u8;
    format!("#{r:02x}{g:02x}40")
}

/// Renders faces in index order, then vertex dots, with coordinates
/// rounded to 1e-3 px so equal inputs give byte-identical output.
pub fn render_svg(mesh: &PlanarMesh, opts: &SvgOptions) -> Result<String, SvgError> {
    if mesh.faces.is_empty() {
        return Err(SvgError::EmptyMesh);
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let used: Vec<_> = mesh.faces.iter().flatten().map(|&i| mesh.vertices[i]).collect();
    for p in &used {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    if opts.unit_circle {
        x0 = x0.min(-1.0);
        y0 = y0.min(-1.0);
        x1 = x1.max(1.0);
        y1 = y1.max(1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let margin = 0.03 * opts.size;
    let scale = (opts.size - 2.0 * margin) / span;
    let px = |x: f64| margin + (x - x0) * scale;
    let py = |y: f64| margin + (y1 - y) * scale;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s:.0}" height="{s:.0}" viewBox="0 0 {s:.3} {s:.3}">"#,
        s = opts.size
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if opts.unit_circle {
        writeln!(out, r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#888888" stroke-width="{:.3}"/>"##, px(0.0), py(0.0), scale, opts.stroke_width).unwrap();
    }
    writeln!(out, r##"<g stroke="#222222" stroke-width="{:.3}" stroke-linejoin="round">"##, opts.stroke_width).unwrap();
    for (f, t) in mesh.faces.iter().enumerate() {
        let pts = mesh.face_points(f);
        let fill = if opts.angle_heatmap {
            let min = triangle_angles(pts).iter().cloned().fold(f64::INFINITY, f64::min);
            heat(min.to_degrees())
        } else {
            "none".to_string()
        };
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.3},{:.3}", px(p.re), py(p.im))).collect();
        writeln!(out, r#"<polygon data-face="{f}" data-vertices="{} {} {}" points="{}" fill="{fill}"/>"#, t[0], t[1], t[2], coords.join(" ")).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    if let Some(colours) = &opts.vertex_colours {
        let r = 2.5 * opts.stroke_width.max(0.5);
        writeln!(out, "<g>").unwrap();
        for (v, (p, c)) in mesh.vertices.iter().zip(colours).enumerate() {
            writeln!(out, r#"<circle data-vertex="{v}" data-colour="{c}" cx="{:.3}" cy="{:.3}" r="{r:.3}" fill="{}"/>"#, px(p.re), py(p.im), colour_hex(*c)).unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}
