//! Command-line front end. Exit codes: 0 ok, 1 invariant violation, 2 parse
//! or input error, 3 numeric failure.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use etri_core::atlas::{self, AtlasError, BaseSphere};
use etri_core::belyi::{self, BelyiError, BelyiEvaluator, Extended};
use etri_core::hemmed::{self, HemmedError};
use etri_core::planar::{self, PiecewiseAffineMap, PlanarMesh};
use etri_core::rect::{rect_triangulation_with, BoundaryPartition, MeshProfile, RectError};
use etri_core::surface::{
    barycentric_subdivide, boundary_fan_subdivide, canonical_three_colouring, three_colour_search, Colour, Colouring, Corner,
    EquilateralSurface, SurfaceError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::error::{FormatError, ParseError};
use crate::etri_format::{read_etri, write_etri, SurfaceFile};
use crate::specs::{read_chain, read_domain, read_partition_any};
use crate::svg::{render_svg, SvgOptions};
use crate::trimesh::{read_trimesh, write_trimesh};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Parse(p) => CliError::Parse(format!("parse error at {p}")),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(format!("parse error at {e}"))
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<RectError> for CliError {
    fn from(e: RectError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<planar::PlanarError> for CliError {
    fn from(e: planar::PlanarError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<BelyiError> for CliError {
    fn from(e: BelyiError) -> Self {
        match e {
            BelyiError::QuadratureFailure(_) | BelyiError::InversionFailure => CliError::Numeric(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<HemmedError> for CliError {
    fn from(e: HemmedError) -> Self {
        match e {
            HemmedError::InversionFailure(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<AtlasError> for CliError {
    fn from(e: AtlasError) -> Self {
        match e {
            AtlasError::LiftMonodromyMismatch(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "etri", version, about = "Equilateral triangulations, bounded-angle meshing and Belyi functions")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Profile {
    Graded,
    Template,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an ETRI or TRIMESH file and print a summary.
    Validate { input: PathBuf },
    /// Barycentric subdivision with its canonical colouring.
    Subdivide {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Find a 3-colouring of the vertices.
    Colour {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Replace each boundary face by a fan of 2·d0 + 1 faces.
    FanSubdivide {
        input: PathBuf,
        #[arg(long)]
        d0: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Triangulate a rectangle with prescribed boundary vertices.
    RectTri {
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        height: Option<f64>,
        /// Partition file, text (S0..S3 headers) or JSON.
        #[arg(long, conflicts_with_all = ["uniform", "random"])]
        partition: Option<PathBuf>,
        /// Equal spacing with NX and NY edges; needs --width and --height.
        #[arg(long, num_args = 2, value_names = ["NX", "NY"], conflicts_with = "random")]
        uniform: Option<Vec<usize>>,
        /// Random partition of [0, M] × [0, 1].
        #[arg(long, value_name = "M")]
        random: Option<u64>,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, value_enum, default_value = "graded")]
        profile: Profile,
        /// TRIMESH output; standard output when absent.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Triangulate a hemmed planar domain.
    Hemmed {
        /// JSON domain file.
        #[arg(long)]
        spec: PathBuf,
        /// Planar source triangulation (TRIMESH).
        #[arg(long)]
        out_mesh: Option<PathBuf>,
        /// Equilateral surface (ETRI); standard output when absent.
        #[arg(long)]
        out_surface: Option<PathBuf>,
        /// JSON report; printed when absent.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Glue hemmed pieces along shared curves.
    Chain {
        /// JSON chain file.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_surface: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate the Belyi function at a point of one face.
    BelyiEval {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        face: usize,
        /// Barycentric coordinates `a,b,c`.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        bary: Vec<f64>,
        /// Use the barycentric evaluator even if the file has a colouring.
        #[arg(long)]
        barycentric: bool,
    },
    /// Check that the Belyi function is a branched cover.
    BelyiVerify {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long)]
        barycentric: bool,
    },
    /// Dilatation of the piecewise affine map between two meshes.
    Dilatation {
        source: PathBuf,
        target: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Classical triangulations.
    Atlas {
        #[command(subcommand)]
        kind: AtlasKind,
    },
    /// Render a TRIMESH file as SVG.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Colour vertices by a 3-colouring of the mesh; fails if there is none.
        #[arg(long)]
        colour_vertices: bool,
        #[arg(long)]
        angle_heatmap: bool,
        #[arg(long)]
        unit_circle: bool,
        #[arg(long, default_value_t = 800.0)]
        size: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum AtlasKind {
    /// Hexagonal patch of the triangular lattice, 3-coloured.
    Lattice {
        /// Hexagon radius in lattice steps.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Quotient of a lattice strip by a translation.
    Cylinder {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Disc tessellation with n triangles at each vertex.
    Hyperbolic {
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Pullback of the sphere under z^n / (z^n - 1).
    Npsphere {
        #[arg(long)]
        n: usize,
        /// Pull back the barycentric subdivision (a 3-coloured base).
        #[arg(long)]
        subdivided: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct Io<'a> {
    out: &'a mut dyn Write,
}

impl Io<'_> {
    /// Writes an artifact to `path`, or to standard output when absent.
    fn artifact(&mut self, path: Option<&Path>, text: &str) -> Result<(), CliError> {
        match path {
            Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => self.out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
        }
    }

    /// Writes a JSON report to `path`, or prints it as [`Io::report`] does.
    fn report_to(&mut self, path: Option<&Path>, artifact_on_stdout: bool, value: Value) -> Result<(), CliError> {
        match path {
            Some(p) => self.artifact(Some(p), &(serde_json::to_string_pretty(&value).expect("report serializes") + "\n")),
            None => self.report(artifact_on_stdout, value),
        }
    }

    /// Prints a JSON report unless the artifact went to standard output.
    fn report(&mut self, artifact_on_stdout: bool, value: Value) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&value).expect("report serializes") + "\n";
        if artifact_on_stdout {
            eprint!("{text}");
            Ok(())
        } else {
            self.out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn surface_summary(s: &EquilateralSurface, colouring: Option<&Colouring>) -> Value {
    let (genus, boundary) = s.genus_and_boundary();
    let hist: Vec<Value> = s.degree_histogram().into_iter().map(|(d, n)| json!([d, n])).collect();
    json!({
        "kind": "etri",
        "faces": s.face_count(),
        "vertices": s.vertex_count(),
        "edges": s.edge_count(),
        "euler_characteristic": s.euler_characteristic(),
        "genus": genus,
        "boundary_components": boundary,
        "max_degree": s.max_vertex_degree(),
        "degree_histogram": hist,
        "coloured": colouring.is_some(),
    })
}

fn mesh_summary(m: &PlanarMesh) -> Value {
    json!({
        "kind": "trimesh",
        "vertices": m.vertices.len(),
        "faces": m.faces.len(),
        "area": m.area(),
        "min_angle_deg": if m.faces.is_empty() { 0.0 } else { m.min_angle().to_degrees() },
        "boundary_cycles": m.boundary_cycles().len(),
    })
}

fn extended_json(v: Extended) -> Value {
    match v {
        Extended::Infinity => json!("inf"),
        Extended::Finite(z) => json!([z.re, z.im]),
    }
}

/// Colour of each mesh vertex under a 3-colouring of the surface the mesh
/// defines.
pub fn mesh_vertex_colours(mesh: &PlanarMesh) -> Result<Vec<Colour>, CliError> {
    let s = EquilateralSurface::from_triangles(&mesh.faces)?;
    let colouring = three_colour_search(&s).ok_or_else(|| CliError::Invariant("mesh is not 3-colourable".into()))?;
    let mut out = vec![Colour::One; mesh.vertices.len()];
    for (f, t) in mesh.faces.iter().enumerate() {
        for k in 0..3u8 {
            out[t[k as usize]] = colouring.colours[s.vertex(Corner::new(f, k))];
        }
    }
    Ok(out)
}

fn evaluator(file: SurfaceFile, barycentric: bool) -> Result<BelyiEvaluator, CliError> {
    match (file.colouring, barycentric) {
        (Some(c), false) => Ok(BelyiEvaluator::new(file.surface, c)?),
        (_, _) => Ok(BelyiEvaluator::barycentric(file.surface)),
    }
}

fn write_svg(io: &mut Io, path: Option<&Path>, mesh: &PlanarMesh, opts: &SvgOptions) -> Result<(), CliError> {
    if let Some(p) = path {
        let svg = render_svg(mesh, opts).map_err(|e| CliError::Invariant(e.to_string()))?;
        io.artifact(Some(p), &svg)?;
    }
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut io = Io { out };
    match cli.command {
        Command::Validate { input } => {
            let text = read_text(&input)?;
            let first = crate::etri_format::tokenize(&text).next().map(|(_, t)| t[0].1.to_string());
            let summary = match first.as_deref() {
                Some("TRIMESH") => mesh_summary(&read_trimesh(&text)?),
                _ => {
                    let f = read_etri(&text)?;
                    surface_summary(&f.surface, f.colouring.as_ref())
                }
            };
            io.report(false, summary)
        }
        Command::Subdivide { input, out } => {
            let f = read_etri(&read_text(&input)?)?;
            let sub = barycentric_subdivide(&f.surface);
            let colouring = canonical_three_colouring(&sub)?;
            io.artifact(out.as_deref(), &write_etri(&sub.surface, Some(&colouring)))?;
            io.report(out.is_none(), surface_summary(&sub.surface, Some(&colouring)))
        }
        Command::Colour { input, out } => {
            let f = read_etri(&read_text(&input)?)?;
            let colouring = three_colour_search(&f.surface).ok_or_else(|| CliError::Invariant("surface is not 3-colourable".into()))?;
            io.artifact(out.as_deref(), &write_etri(&f.surface, Some(&colouring)))?;
            io.report(out.is_none(), surface_summary(&f.surface, Some(&colouring)))
        }
        Command::FanSubdivide { input, d0, out } => {
            if d0 == 0 {
                return Err(CliError::Parse("--d0 must be at least 1".into()));
            }
            let f = read_etri(&read_text(&input)?)?;
            let s = boundary_fan_subdivide(&f.surface, d0)?;
            io.artifact(out.as_deref(), &write_etri(&s, None))?;
            io.report(out.is_none(), surface_summary(&s, None))
        }
        Command::RectTri { width, height, partition, uniform, random, lambda, profile, mesh, svg } => {
            let p = if let Some(path) = partition {
                read_partition_any(&read_text(&path)?, width, height, lambda)?
            } else if let Some(u) = uniform {
                let (Some(w), Some(h)) = (width, height) else {
                    return Err(CliError::Parse("--uniform needs --width and --height".into()));
                };
                if u[0] == 0 || u[1] == 0 {
                    return Err(CliError::Parse("--uniform needs positive edge counts".into()));
                }
                BoundaryPartition::uniform(w, h, u[0], u[1], lambda)
            } else if let Some(m) = random {
                if m == 0 {
                    return Err(CliError::Parse("--random needs M >= 1".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                BoundaryPartition::random(m, lambda, &mut || rng.gen::<f64>())
            } else {
                return Err(CliError::Parse("give one of --partition, --uniform or --random".into()));
            };
            p.validate()?;
            let profile = match profile {
                Profile::Graded => MeshProfile::Graded,
                Profile::Template => MeshProfile::Template,
            };
            let t = rect_triangulation_with(&p, profile)?;
            io.artifact(mesh.as_deref(), &write_trimesh(&t.mesh))?;
            write_svg(&mut io, svg.as_deref(), &t.mesh, &SvgOptions { angle_heatmap: true, ..SvgOptions::default() })?;
            let mut summary = mesh_summary(&t.mesh);
            summary["boundary_points"] = json!(p.ccw_points().len());
            summary["m"] = json!(t.m);
            summary["stretch"] = json!(t.stretch);
            summary["transposed"] = json!(t.transposed);
            io.report(mesh.is_none(), summary)
        }
        Command::Hemmed { spec, out_mesh, out_surface, report, svg } => {
            let spec = read_domain(&read_text(&spec)?)?;
            let t = hemmed::assemble(&spec)?;
            io.artifact(out_surface.as_deref(), &write_etri(&t.surface, None))?;
            if let Some(p) = out_mesh.as_deref() {
                io.artifact(Some(p), &write_trimesh(&t.source))?;
            }
            write_svg(&mut io, svg.as_deref(), &t.source, &SvgOptions::default())?;
            let collars: Vec<Value> = t
                .diagnostics
                .iter()
                .zip(&t.collars)
                .map(|(d, c)| {
                    json!({
                        "lambda": c.lambda,
                        "collar_faces": c.rect.mesh.faces.len(),
                        "length_residual": d.length_residual,
                        "periodicity_residual": d.periodicity_residual,
                        "psi_dilatation": d.dilatation,
                    })
                })
                .collect();
            let mut summary = surface_summary(&t.surface, None);
            summary["lattice_faces"] = json!(t.lattice_faces);
            summary["max_k"] = json!(t.report.max_k);
            summary["support_area"] = json!(t.report.support_area);
            summary["total_area"] = json!(t.report.total_area);
            summary["collars"] = json!(collars);
            io.report_to(report.as_deref(), out_surface.is_none(), summary)
        }
        Command::Chain { spec, out_surface, report } => {
            let specs = read_chain(&read_text(&spec)?)?;
            let c = hemmed::chain_assemble(&specs)?;
            io.artifact(out_surface.as_deref(), &write_etri(&c.surface, None))?;
            let mut summary = surface_summary(&c.surface, None);
            summary["interfaces"] = json!(c.interfaces.len());
            summary["piece_degree"] = json!(c.piece_degree);
            summary["interface_degree"] = json!(c.interface_degree);
            summary["max_k"] = json!(c.report.max_k);
            io.report_to(report.as_deref(), out_surface.is_none(), summary)
        }
        Command::BelyiEval { surface, face, bary, barycentric } => {
            let [a, b, c] = bary[..] else {
                return Err(CliError::Parse(format!("--bary needs three values, got {}", bary.len())));
            };
            let ev = evaluator(read_etri(&read_text(&surface)?)?, barycentric)?;
            let v = belyi::belyi_eval(&ev, face, [a, b, c])?;
            io.report(false, json!({ "face": face, "value": extended_json(v) }))
        }
        Command::BelyiVerify { surface, samples, barycentric } => {
            let ev = evaluator(read_etri(&read_text(&surface)?)?, barycentric)?;
            let r = belyi::verify_branched_cover(&ev, samples.max(1))?;
            let ok = r.is_branched_cover();
            io.report(
                false,
                json!({
                    "branched_cover": ok,
                    "continuity_residual": r.continuity_residual,
                    "degrees_match": r.degrees_match,
                    "max_local_degree": r.max_local_degree,
                    "min_spherical_derivative": r.min_spherical_derivative,
                    "counts_constant": r.counts_constant,
                    "preimage_counts": r.preimage_counts.iter().map(|(v, n)| json!([[v.re, v.im], n])).collect::<Vec<_>>(),
                    "preimage_residual": r.preimage_residual,
                }),
            )?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Invariant("the Belyi function is not a branched cover".into()))
            }
        }
        Command::Dilatation { source, target, tol } => {
            let s = read_trimesh(&read_text(&source)?)?;
            let t = read_trimesh(&read_text(&target)?)?;
            let map = PiecewiseAffineMap::new(s, t)?;
            let r = planar::dilatation(&map, tol)?;
            io.report(
                false,
                json!({
                    "max_k": r.max_k,
                    "support_area": r.support_area,
                    "total_area": r.total_area,
                    "continuity_residual": map.continuity_residual(),
                }),
            )
        }
        Command::Atlas { kind } => run_atlas(&mut io, kind),
        Command::Render { input, out, colour_vertices, angle_heatmap, unit_circle, size } => {
            let mesh = read_trimesh(&read_text(&input)?)?;
            let vertex_colours = if colour_vertices { Some(mesh_vertex_colours(&mesh)?) } else { None };
            let opts = SvgOptions { size, vertex_colours, angle_heatmap, unit_circle, ..SvgOptions::default() };
            let svg = render_svg(&mesh, &opts).map_err(|e| CliError::Invariant(e.to_string()))?;
            io.artifact(out.as_deref(), &svg)
        }
    }
}

fn run_atlas(io: &mut Io, kind: AtlasKind) -> Result<(), CliError> {
    match kind {
        AtlasKind::Lattice { depth, out, svg } => {
            let mesh = atlas::lattice_patch(depth)?;
            let (s, colouring) = atlas::lattice_colouring(&mesh)?;
            io.artifact(out.as_deref(), &write_etri(&s, Some(&colouring)))?;
            let colours = mesh_vertex_colours(&mesh)?;
            write_svg(io, svg.as_deref(), &mesh, &SvgOptions { vertex_colours: Some(colours), ..SvgOptions::default() })?;
            io.report(out.is_none(), surface_summary(&s, Some(&colouring)))
        }
        AtlasKind::Cylinder { width, height, out } => {
            let (s, colouring) = match atlas::lattice_cylinder_colouring(width, height) {
                Some((s, c)) => (s, Some(c)),
                None => (atlas::lattice_cylinder(width, height)?, None),
            };
            io.artifact(out.as_deref(), &write_etri(&s, colouring.as_ref()))?;
            io.report(out.is_none(), surface_summary(&s, colouring.as_ref()))
        }
        AtlasKind::Hyperbolic { n, depth, out, svg } => {
            let t = atlas::hyperbolic_tessellation(n, depth)?;
            io.artifact(out.as_deref(), &write_etri(&t.surface, None))?;
            write_svg(io, svg.as_deref(), &t.mesh, &SvgOptions { unit_circle: true, ..SvgOptions::default() })?;
            let interior: BTreeSet<usize> = atlas::interior_degrees(&t.surface).into_iter().collect();
            let mut summary = surface_summary(&t.surface, None);
            summary["layers"] = json!(t.layers);
            summary["interior_degrees"] = json!(interior);
            io.report(out.is_none(), summary)
        }
        AtlasKind::Npsphere { n, subdivided, out } => {
            let base = if subdivided { BaseSphere::subdivided() } else { BaseSphere::standard() };
            let p = atlas::punctured_sphere_pullback(n, &base)?;
            io.artifact(out.as_deref(), &write_etri(&p.surface, None))?;
            let (direct, formula) = p.riemann_hurwitz(&base.surface);
            let mut summary = surface_summary(&p.surface, None);
            summary["degree"] = json!(p.degree);
            summary["punctures"] = json!(p.punctures.len());
            summary["riemann_hurwitz"] = json!([direct, formula]);
            io.report(out.is_none(), summary)
        }
    }
}
