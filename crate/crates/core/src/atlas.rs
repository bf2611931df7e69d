//! Classical equilateral triangulations: the triangular lattice, its
//! cylinder quotient, hyperbolic tessellations of the disc by equilateral
//! triangles, and spheres punctured at the `n`-th roots of unity obtained by
//! pulling back a triangulation of the sphere under `g(z) = zⁿ / (zⁿ - 1)`.
//!
//! The punctured disc triangulated through the modular `j`-function is not
//! provided; it needs modular-function evaluation.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::math::{self, FRAC_PI_3, TAU};
use crate::planar::PlanarMesh;
use crate::surface::{
    barycentric_subdivide, double_triangle, Colour, Colouring, Corner, EquilateralSurface, Slot, SurfaceError,
};
use crate::Complex;

/// Largest combinatorial depth accepted by [`hyperbolic_tessellation`].
pub const MAX_HYPERBOLIC_DEPTH: usize = 8;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AtlasError {
    #[error("{0} equilateral triangles around a vertex do not give a hyperbolic tessellation (need n >= 7)")]
    InvalidDegree(usize),
    #[error("depth {0} exceeds the limit {MAX_HYPERBOLIC_DEPTH}")]
    DepthTooLarge(usize),
    #[error("invalid size parameter: {0}")]
    InvalidSize(&'static str),
    #[error("branch value {0} is not a vertex of the base triangulation")]
    BranchValueNotVertex(&'static str),
    #[error("combinatorial and numerical monodromy disagree across base edge ({}, {})", .0.face, .0.side)]
    LiftMonodromyMismatch(Slot),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

fn lattice_point(a: i64, b: i64) -> Complex {
    Complex::new(a as f64, 0.0) + math::cis(FRAC_PI_3) * b as f64
}

/// Hexagonal patch of the unit triangular lattice: all lattice points within
/// hexagonal distance `extent` of the origin, with `[0, 1]` a lattice edge.
pub fn lattice_patch(extent: usize) -> Result<PlanarMesh, AtlasError> {
    if extent == 0 {
        return Err(AtlasError::InvalidSize("extent must be at least 1"));
    }
    let e = extent as i64;
    let inside = |a: i64, b: i64| a.abs().max(b.abs()).max((a + b).abs()) <= e;
    let mut index = BTreeMap::new();
    let mut vertices = Vec::new();
    for b in -e..=e {
        for a in -e..=e {
            if inside(a, b) {
                index.insert((a, b), vertices.len());
                vertices.push(lattice_point(a, b));
            }
        }
    }
    let mut faces = Vec::new();
    for b in -e..=e {
        for a in -e..=e {
            let up = [(a, b), (a + 1, b), (a, b + 1)];
            let down = [(a + 1, b), (a + 1, b + 1), (a, b + 1)];
            for tri in [up, down] {
                if tri.iter().all(|&(x, y)| inside(x, y)) {
                    faces.push(tri.map(|p| index[&p]));
                }
            }
        }
    }
    Ok(PlanarMesh::new(vertices, faces))
}

/// The three-sublattice colouring of a mesh whose vertices lie on the unit
/// triangular lattice.
pub fn lattice_colouring(mesh: &PlanarMesh) -> Result<(EquilateralSurface, Colouring), AtlasError> {
    let s = EquilateralSurface::from_triangles(&mesh.faces)?;
    let h = math::sqrt(3.0) / 2.0;
    let class = |p: Complex| {
        let b = math::round(p.im / h) as i64;
        let a = math::round(p.re - 0.5 * b as f64) as i64;
        (a - b).rem_euclid(3)
    };
    let colouring = colouring_from_corners(&s, |f, k| Colour::ALL[class(mesh.vertices[mesh.faces[f][k as usize]]) as usize]);
    Ok((s, colouring))
}

/// Builds a per-vertex colouring from a per-corner rule.
pub fn colouring_from_corners(s: &EquilateralSurface, rule: impl Fn(usize, u8) -> Colour) -> Colouring {
    let mut colours = vec![Colour::One; s.vertex_count()];
    for f in 0..s.face_count() {
        for k in 0..3u8 {
            colours[s.vertex(Corner::new(f, k))] = rule(f, k);
        }
    }
    Colouring { colours }
}

/// The lattice strip of `width` columns and `height` rows with its left and
/// right sides glued: a cylinder with `Χ = 0` and two boundary cycles.
pub fn lattice_cylinder(width: usize, height: usize) -> Result<EquilateralSurface, AtlasError> {
    if width < 3 {
        return Err(AtlasError::InvalidSize("cylinder width must be at least 3"));
    }
    if height == 0 {
        return Err(AtlasError::InvalidSize("cylinder height must be at least 1"));
    }
    Ok(EquilateralSurface::from_triangles(&cylinder_triangles(width, height))?)
}

fn cylinder_triangles(width: usize, height: usize) -> Vec<[usize; 3]> {
    let id = |i: usize, j: usize| j * width + i % width;
    let mut tris = Vec::with_capacity(2 * width * height);
    for j in 0..height {
        for i in 0..width {
            tris.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
            tris.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    tris
}

/// The sublattice colouring of [`lattice_cylinder`], which exists exactly
/// when the width is a multiple of 3.
pub fn lattice_cylinder_colouring(width: usize, height: usize) -> Option<(EquilateralSurface, Colouring)> {
    if !width.is_multiple_of(3) {
        return None;
    }
    let s = lattice_cylinder(width, height).ok()?;
    let tris = cylinder_triangles(width, height);
    let c = colouring_from_corners(&s, |f, k| {
        let v = tris[f][k as usize];
        let (i, j) = ((v % width) as i64, (v / width) as i64);
        Colour::ALL[(i - j).rem_euclid(3) as usize]
    });
    Some((s, c))
}

/// A patch of the tessellation of the disc by equilateral hyperbolic
/// triangles with angle `2π/n`.
#[derive(Clone, Debug)]
pub struct HyperbolicTessellation {
    /// Poincaré disc model with geodesics replaced by chords.
    pub mesh: PlanarMesh,
    pub surface: EquilateralSurface,
    /// Faces added at each reflection step; `layers[0]` is the star of `0`.
    pub layers: Vec<usize>,
}

// Möbius reflection of `r` in the geodesic through `p` and `q`.
fn reflect(p: Complex, q: Complex, r: Complex) -> Complex {
    let to0 = |z: Complex| (z - p) / (Complex::new(1.0, 0.0) - p.conj() * z);
    let from0 = |z: Complex| (z + p) / (Complex::new(1.0, 0.0) + p.conj() * z);
    let q0 = to0(q);
    let rot = q0 / q0.norm();
    from0(rot * rot * to0(r).conj())
}

struct PointIndex {
    cell: f64,
    tol: f64,
    grid: BTreeMap<(i64, i64), Vec<usize>>,
    points: Vec<Complex>,
}

impl PointIndex {
    fn key(&self, z: Complex) -> (i64, i64) {
        (math::floor(z.re / self.cell) as i64, math::floor(z.im / self.cell) as i64)
    }

    fn find_or_insert(&mut self, z: Complex) -> usize {
        let (kx, ky) = self.key(z);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    if let Some(&i) = ids.iter().find(|&&i| (self.points[i] - z).norm() <= self.tol) {
                        return i;
                    }
                }
            }
        }
        let i = self.points.len();
        self.points.push(z);
        self.grid.entry((kx, ky)).or_default().push(i);
        i
    }
}

/// Tessellation of the disc by equilateral triangles with `n` around every
/// vertex, grown from the `n` triangles at `0` by `depth - 1` rounds of
/// reflection in the sides of the outermost faces. Faces are deduplicated by
/// their vertices, matched at tolerance `1e-9`.
pub fn hyperbolic_tessellation(n: usize, depth: usize) -> Result<HyperbolicTessellation, AtlasError> {
    if n <= 6 {
        return Err(AtlasError::InvalidDegree(n));
    }
    if depth == 0 {
        return Err(AtlasError::InvalidSize("depth must be at least 1"));
    }
    if depth > MAX_HYPERBOLIC_DEPTH {
        return Err(AtlasError::DepthTooLarge(depth));
    }
    let alpha = TAU / n as f64;
    // hyperbolic law of cosines for the side of the equilateral triangle
    let cosh_l = math::cos(alpha) / (1.0 - math::cos(alpha));
    let l = libm::acosh(cosh_l);
    let r0 = libm::tanh(l / 2.0);

    let mut index = PointIndex { cell: 1e-6, tol: 1e-9, grid: BTreeMap::new(), points: Vec::new() };
    let centre = index.find_or_insert(Complex::new(0.0, 0.0));
    let ring: Vec<usize> = (0..n).map(|k| index.find_or_insert(math::cis(alpha * k as f64) * r0)).collect();
    let mut faces: Vec<[usize; 3]> = (0..n).map(|k| [centre, ring[k], ring[(k + 1) % n]]).collect();
    let mut seen: BTreeSet<[usize; 3]> = faces.iter().map(|f| canonical(*f)).collect();
    let mut layers = vec![n];
    let mut frontier: Vec<usize> = (0..n).collect();

    for _ in 1..depth {
        let mut next = Vec::new();
        for &f in &frontier {
            let t = faces[f];
            for s in 0..3 {
                let (a, b, c) = (t[s], t[(s + 1) % 3], t[(s + 2) % 3]);
                let pts = &index.points;
                let r = reflect(pts[a], pts[b], pts[c]);
                let v = index.find_or_insert(r);
                // reflection reverses orientation, so the new face runs b → a → v
                let nf = [b, a, v];
                if seen.insert(canonical(nf)) {
                    next.push(faces.len());
                    faces.push(nf);
                }
            }
        }
        layers.push(next.len());
        frontier = next;
    }
    let mesh = PlanarMesh::new(index.points, faces);
    let surface = EquilateralSurface::from_triangles(&mesh.faces)?;
    Ok(HyperbolicTessellation { mesh, surface, layers })
}

fn canonical(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

/// Degrees of the vertices whose link closes up.
pub fn interior_degrees(s: &EquilateralSurface) -> Vec<usize> {
    s.vertex_links().iter().filter(|l| l.closed).map(|l| l.degree()).collect()
}

/// A triangulated sphere with the vertex classes lying over `0`, `1` and
/// (optionally) `∞` marked.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseSphere {
    pub surface: EquilateralSurface,
    pub zero: usize,
    pub one: usize,
    pub infinity: Option<usize>,
}

impl BaseSphere {
    /// Upper and lower half-planes glued along `ℝ ∪ {∞}` with vertices
    /// `0, 1, ∞`; face `0` is the upper half-plane.
    pub fn standard() -> Self {
        let s = double_triangle();
        let [zero, one, inf] = s.face_vertices(0);
        BaseSphere { surface: s, zero, one, infinity: Some(inf) }
    }

    /// Barycentric subdivision of [`BaseSphere::standard`] (12 faces).
    pub fn subdivided() -> Self {
        let base = Self::standard();
        let sub = barycentric_subdivide(&base.surface);
        // sub-face 6f + 2c has the original corner c of face f at its corner 0
        let lift = |v: usize| -> usize {
            (0..base.surface.face_count())
                .flat_map(|f| (0..3u8).map(move |c| (f, c)))
                .find(|&(f, c)| base.surface.vertex(Corner::new(f, c)) == v)
                .map(|(f, c)| sub.surface.vertex(Corner::new(6 * f + 2 * c as usize, 0)))
                .unwrap()
        };
        BaseSphere {
            zero: lift(base.zero),
            one: lift(base.one),
            infinity: base.infinity.map(lift),
            surface: sub.surface,
        }
    }
}

/// The pullback of a base sphere under `g(z) = zⁿ / (zⁿ - 1)`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub surface: EquilateralSurface,
    pub degree: usize,
    /// Face `k·F + t` is sheet `k` over base face `t`.
    pub base_faces: usize,
    /// Base vertex class under each cover vertex class.
    pub base_vertex: Vec<usize>,
    /// Local degree of `g` at each cover vertex class.
    pub ramification: Vec<usize>,
    /// Cover vertices over `∞`: the `n`-th roots of unity, which are removed
    /// from the punctured sphere.
    pub punctures: Vec<usize>,
}

impl Pullback {
    /// `Χ(cover)` as a direct count and `n·Χ(base) - Σ(e_p - 1)`.
    pub fn riemann_hurwitz(&self, base: &EquilateralSurface) -> (i64, i64) {
        let direct = self.surface.euler_characteristic();
        let defect: i64 = self.ramification.iter().map(|&e| e as i64 - 1).sum();
        (direct, self.degree as i64 * base.euler_characteristic() - defect)
    }
}

fn base_edge_path(base: &BaseSphere) -> Vec<(Slot, Slot)> {
    // vertex graph: for each directed side a → b record the slot running a → b
    let s = &base.surface;
    let mut adj: BTreeMap<usize, Vec<(usize, Slot)>> = BTreeMap::new();
    for f in 0..s.face_count() {
        for k in 0..3u8 {
            let a = s.vertex(Corner::new(f, k));
            let b = s.vertex(Corner::new(f, (k + 1) % 3));
            adj.entry(a).or_default().push((b, Slot::new(f, k)));
        }
    }
    let mut prev: BTreeMap<usize, Slot> = BTreeMap::new();
    let mut queue = VecDeque::from([base.zero]);
    let mut visited = BTreeSet::from([base.zero]);
    while let Some(a) = queue.pop_front() {
        if a == base.one {
            break;
        }
        for &(b, slot) in adj.get(&a).into_iter().flatten() {
            if visited.insert(b) {
                prev.insert(b, slot);
                queue.push_back(b);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = base.one;
    while v != base.zero {
        let left = prev[&v];
        let right = s.glued(left).expect("a sphere has no boundary");
        path.push((left, right));
        v = s.vertex(Corner::new(left.face, left.side));
    }
    path.reverse();
    path
}

/// Pulls `base` back under `g(z) = zⁿ / (zⁿ - 1)`, which is branched over
/// `0` (at `z = 0`) and `1` (at `z = ∞`), each with local degree `n`.
///
/// The monodromy is read off a cut along base edges from `0` to `1`:
/// crossing the cut from the face on its right to the face on its left
/// advances the sheet by one, matching a counter-clockwise turn about `0`.
pub fn punctured_sphere_pullback(n: usize, base: &BaseSphere) -> Result<Pullback, AtlasError> {
    if n == 0 {
        return Err(AtlasError::InvalidSize("degree must be at least 1"));
    }
    let s = &base.surface;
    let vc = s.vertex_count();
    if base.zero >= vc {
        return Err(AtlasError::BranchValueNotVertex("0"));
    }
    if base.one >= vc || base.one == base.zero {
        return Err(AtlasError::BranchValueNotVertex("1"));
    }
    let shift = cut_shifts(base);
    let f = s.face_count();
    let mut gluings = Vec::new();
    for (a, b) in s.gluings() {
        let d = shift.get(&a).copied().unwrap_or(0);
        for k in 0..n {
            let kb = (k as i64 + d).rem_euclid(n as i64) as usize;
            gluings.push((Slot::new(k * f + a.face, a.side), Slot::new(kb * f + b.face, b.side)));
        }
    }
    let surface = EquilateralSurface::build(n * f, &gluings)?;

    let base_links: Vec<usize> = {
        let mut l = vec![0; vc];
        for fc in 0..f {
            for v in s.face_vertices(fc) {
                l[v] += 1;
            }
        }
        l
    };
    let mut base_vertex = vec![0; surface.vertex_count()];
    let mut links = vec![0; surface.vertex_count()];
    for fc in 0..n * f {
        for k in 0..3u8 {
            let v = surface.vertex(Corner::new(fc, k));
            base_vertex[v] = s.vertex(Corner::new(fc % f, k));
            links[v] += 1;
        }
    }
    let ramification: Vec<usize> = (0..surface.vertex_count()).map(|v| links[v] / base_links[base_vertex[v]]).collect();
    let punctures = match base.infinity {
        Some(inf) => (0..surface.vertex_count()).filter(|&v| base_vertex[v] == inf).collect(),
        None => Vec::new(),
    };
    Ok(Pullback { surface, degree: n, base_faces: f, base_vertex, ramification, punctures })
}

/// Sheet shift for crossing each base side, keyed by the slot being left.
fn cut_shifts(base: &BaseSphere) -> BTreeMap<Slot, i64> {
    let mut shift = BTreeMap::new();
    for (left, right) in base_edge_path(base) {
        shift.insert(right, 1);
        shift.insert(left, -1);
    }
    shift
}

/// Numerically lifts, for the standard base, the path from each face's
/// centre (`±i`) through a point of each side to the neighbouring centre,
/// and compares the sheet it lands on with the combinatorial monodromy.
pub fn check_standard_monodromy(n: usize) -> Result<(), AtlasError> {
    let base = BaseSphere::standard();
    let s = &base.surface;
    let pos = |v: usize| -> Option<Complex> {
        if v == base.zero {
            Some(Complex::new(0.0, 0.0))
        } else if v == base.one {
            Some(Complex::new(1.0, 0.0))
        } else {
            None
        }
    };
    let centre = |f: usize| if f == 0 { Complex::new(0.0, 1.0) } else { Complex::new(0.0, -1.0) };
    let shift = cut_shifts(&base);
    let zeta = math::cis(TAU / n as f64);
    let h = |w: Complex| w / (w - 1.0);
    let branch = |w: Complex, k: usize| zeta.powu(k as u32) * h(w).powf(1.0 / n as f64);
    for (a, b) in s.gluings() {
        for (from, to) in [(a, b), (b, a)] {
            let ends = [
                pos(s.vertex(Corner::new(from.face, from.side))),
                pos(s.vertex(Corner::new(from.face, (from.side + 1) % 3))),
            ];
            let q = match ends {
                [Some(x), Some(y)] => (x + y) * 0.5,
                [Some(x), None] | [None, Some(x)] => {
                    let other = if x.re == 0.0 { 1.0 } else { 0.0 };
                    x + (x - other)
                }
                [None, None] => unreachable!("only one base vertex is at ∞"),
            };
            let path = [centre(from.face), q, centre(to.face)];
            for k in 0..n {
                let mut z = branch(path[0], k);
                for seg in path.windows(2) {
                    for i in 1..=400 {
                        let w = seg[0] + (seg[1] - seg[0]) * (i as f64 / 400.0);
                        let base_root = h(w).powf(1.0 / n as f64);
                        z = (0..n)
                            .map(|j| base_root * zeta.powu(j as u32))
                            .min_by(|x, y| (x - z).norm().partial_cmp(&(y - z).norm()).unwrap())
                            .unwrap();
                    }
                }
                let landed = (0..n).find(|&j| (branch(path[2], j) - z).norm() < 1e-9 * (1.0 + z.norm()));
                let expect = (k as i64 + shift.get(&from).copied().unwrap_or(0)).rem_euclid(n as i64) as usize;
                if landed != Some(expect) {
                    return Err(AtlasError::LiftMonodromyMismatch(from));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belyi::{verify_branched_cover, BelyiEvaluator};
    use crate::surface::three_colour_search;

    #[test]
    fn lattice_patch_degrees() {
        let m = lattice_patch(2).unwrap();
        assert!(m.validate(1e-12).is_valid());
        assert_eq!(m.vertices.len(), 19);
        assert_eq!(m.faces.len(), 24);
        let boundary = m.boundary_vertices();
        for (v, d) in m.vertex_degrees().iter().enumerate() {
            if !boundary.contains(&v) {
                assert_eq!(*d, 6);
            }
        }
        assert!((m.min_angle() - FRAC_PI_3).abs() < 1e-12);
        let (s, c) = lattice_colouring(&m).unwrap();
        assert!(c.is_valid_for(&s));
        assert!(Colour::ALL.iter().all(|k| c.colours.contains(k)));
    }

    #[test]
    fn cylinder_topology() {
        let s = lattice_cylinder(6, 4).unwrap();
        s.validate().unwrap();
        assert_eq!(s.euler_characteristic(), 0);
        assert_eq!(s.boundary_cycles().len(), 2);
        assert!(interior_degrees(&s).iter().all(|&d| d == 6));
        assert!(lattice_cylinder_colouring(7, 2).is_none());
        assert!(three_colour_search(&lattice_cylinder(7, 2).unwrap()).is_none());
        let (s, c) = lattice_cylinder_colouring(6, 4).unwrap();
        assert!(c.is_valid_for(&s));
        let report = verify_branched_cover(&BelyiEvaluator::new(s, c).unwrap(), 3).unwrap();
        assert!(report.degrees_match && report.continuity_residual < 1e-6, "{report:?}");
        assert!(report.local_degrees.iter().all(|d| d.measured == 3));
    }

    #[test]
    fn hyperbolic_degrees() {
        let t = hyperbolic_tessellation(7, 1).unwrap();
        assert_eq!(t.surface.face_count(), 7);
        assert_eq!(interior_degrees(&t.surface), vec![7]);
        for depth in 2..=4 {
            let t = hyperbolic_tessellation(7, depth).unwrap();
            t.surface.validate().unwrap();
            assert!(t.mesh.validate(1e-12).is_valid());
            let deg = interior_degrees(&t.surface);
            assert!(deg.iter().all(|&d| d == 7), "{deg:?}");
            assert!(t.mesh.vertices.iter().all(|z| z.norm() < 1.0));
        }
        // each round of reflections closes up the previous layer's vertices
        let a = interior_degrees(&hyperbolic_tessellation(8, 3).unwrap().surface).len();
        let b = interior_degrees(&hyperbolic_tessellation(8, 4).unwrap().surface).len();
        assert!(b > a);
        assert_eq!(hyperbolic_tessellation(6, 2).unwrap_err(), AtlasError::InvalidDegree(6));
        assert_eq!(hyperbolic_tessellation(7, 9).unwrap_err(), AtlasError::DepthTooLarge(9));
    }

    #[test]
    fn reflection_is_an_involution_fixing_the_geodesic() {
        let (p, q, r) = (Complex::new(0.2, 0.1), Complex::new(-0.3, 0.4), Complex::new(0.1, -0.5));
        assert!((reflect(p, q, reflect(p, q, r)) - r).norm() < 1e-14);
        assert!((reflect(p, q, p) - p).norm() < 1e-14);
        assert!((reflect(p, q, q) - q).norm() < 1e-14);
    }

    #[test]
    fn pullback_counts() {
        for base in [BaseSphere::standard(), BaseSphere::subdivided()] {
            let fb = base.surface.face_count();
            let one = punctured_sphere_pullback(1, &base).unwrap();
            assert_eq!(one.surface.face_count(), fb);
            assert_eq!(one.surface.euler_characteristic(), 2);
            for n in 2..=4 {
                let p = punctured_sphere_pullback(n, &base).unwrap();
                assert_eq!(p.surface.face_count(), n * fb);
                let (direct, rh) = p.riemann_hurwitz(&base.surface);
                assert_eq!(direct, 2);
                assert_eq!(direct, rh);
                let over = |b: usize| (0..p.base_vertex.len()).filter(|&v| p.base_vertex[v] == b).collect::<Vec<_>>();
                assert_eq!(over(base.zero).len(), 1);
                assert_eq!(p.ramification[over(base.zero)[0]], n);
                assert_eq!(p.ramification[over(base.one)[0]], n);
                assert_eq!(p.punctures.len(), n);
                assert!(p.punctures.iter().all(|&v| p.ramification[v] == 1));
            }
        }
    }

    #[test]
    fn pullback_monodromy_matches_path_lifting() {
        for n in 1..=5 {
            check_standard_monodromy(n).unwrap();
        }
    }

    #[test]
    fn pullback_of_subdivided_base_is_coloured() {
        // the subdivided base carries the canonical colouring, and so does its pullback
        let base = BaseSphere::subdivided();
        let p = punctured_sphere_pullback(3, &base).unwrap();
        let col = three_colour_search(&p.surface).unwrap();
        let report = verify_branched_cover(&BelyiEvaluator::new(p.surface.clone(), col).unwrap(), 2).unwrap();
        assert!(report.is_branched_cover(), "{report:?}");
    }
}
