//! The `TRIMESH 1` text format for planar triangle meshes: `v <x> <y>` and
//! `f <i> <j> <k>` lines, 0-based, counter-clockwise.

use std::fmt::Write;

use etri_core::planar::PlanarMesh;
use etri_core::Complex;

use crate::error::{FormatError, ParseError};
use crate::etri_format::{expect_args, parse_num, tokenize};

/// Parses a mesh and checks it with `PlanarMesh::validate` at tolerance
/// `1e-12` of the diameter.
pub fn read_trimesh(text: &str) -> Result<PlanarMesh, FormatError> {
    let mesh = parse_trimesh(text)?;
    let report = mesh.validate(1e-12 * mesh.diameter());
    if let Some(v) = report.violations.first() {
        return Err(FormatError::InvalidMesh(format!("{v:?} ({} violations)", report.violations.len())));
    }
    Ok(mesh)
}

/// Parses without geometric validation (indices are still checked).
pub fn parse_trimesh(text: &str) -> Result<PlanarMesh, FormatError> {
    let mut lines = tokenize(text);
    match lines.next() {
        Some((_, t)) if t.len() == 2 && t[0].1 == "TRIMESH" && t[1].1 == "1" => {}
        Some((l, t)) => return Err(ParseError::new(l, t[0].0, "expected header `TRIMESH 1`").into()),
        None => return Err(ParseError::new(1, 1, "missing header `TRIMESH 1`").into()),
    }
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut face_lines = Vec::new();
    for (l, t) in lines {
        let (col, directive) = t[0];
        match directive {
            "v" => {
                let a = expect_args(l, &t, 2)?;
                let x: f64 = parse_num(l, a[0], "a coordinate")?;
                let y: f64 = parse_num(l, a[1], "a coordinate")?;
                if !x.is_finite() || !y.is_finite() {
                    return Err(ParseError::new(l, a[0].0, "coordinates must be finite").into());
                }
                vertices.push(Complex::new(x, y));
            }
            "f" => {
                let a = expect_args(l, &t, 3)?;
                let mut f = [0usize; 3];
                for k in 0..3 {
                    f[k] = parse_num(l, a[k], "a vertex index")?;
                }
                faces.push(f);
                face_lines.push((l, a[0].0));
            }
            _ => return Err(ParseError::new(l, col, format!("unknown directive `{directive}`")).into()),
        }
    }
    for (f, &(l, col)) in faces.iter().zip(&face_lines) {
        if f.iter().any(|&i| i >= vertices.len()) {
            return Err(ParseError::new(l, col, format!("vertex index out of range (mesh has {} vertices)", vertices.len())).into());
        }
    }
    Ok(PlanarMesh::new(vertices, faces))
}

/// Coordinates are written in shortest round-trip form.
pub fn write_trimesh(mesh: &PlanarMesh) -> String {
    let mut out = String::from("TRIMESH 1\n");
    for v in &mesh.vertices {
        writeln!(out, "v {} {}", v.re, v.im).unwrap();
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PlanarMesh {
        let c = Complex::new;
        PlanarMesh::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.1, 0.7)], vec![[0, 1, 2], [0, 2, 3]])
    }

    #[test]
    fn round_trip_is_exact() {
        let m = square();
        let back = read_trimesh(&write_trimesh(&m)).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.faces, m.faces);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read_trimesh("TRIMESH 2\n"), Err(FormatError::Parse(ParseError { line: 1, .. }))));
        assert!(matches!(read_trimesh("TRIMESH 1\nv 0 0\nf 0 1 2\n"), Err(FormatError::Parse(ParseError { line: 3, column: 3, .. }))));
        assert!(matches!(read_trimesh("TRIMESH 1\nv 0 nan\n"), Err(FormatError::Parse(_))));
        assert!(matches!(read_trimesh("TRIMESH 1\nv 0 0 0\n"), Err(FormatError::Parse(ParseError { column: 7, .. }))));
        // clockwise face
        assert!(matches!(read_trimesh("TRIMESH 1\nv 0 0\nv 0 1\nv 1 0\nf 0 1 2\n"), Err(FormatError::InvalidMesh(_))));
    }
}
