//! Planar triangle meshes and piecewise-affine maps between them.
//!
//! An affine piece is written `z ↦ αz + βz̄ + c`; its Beltrami coefficient is
//! `β/α` and its dilatation `(|α|+|β|)/(|α|−|β|)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::math;
use crate::Complex;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PlanarError {
    #[error("source triangle is degenerate")]
    DegenerateSource,
    #[error("piece on face {0} reverses orientation")]
    OrientationReversedPiece(usize),
    #[error("source and target meshes have different faces")]
    FaceMismatch,
}

/// Signed area of a triangle (positive when counter-clockwise).
pub fn signed_area(a: Complex, b: Complex, c: Complex) -> f64 {
    0.5 * ((b - a).conj() * (c - a)).im
}

/// Interior angles of a triangle, in corner order.
pub fn triangle_angles(p: [Complex; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let u = p[(i + 1) % 3] - p[i];
        let v = p[(i + 2) % 3] - p[i];
        out[i] = math::atan2((u.conj() * v).im.abs(), (u.conj() * v).re);
    }
    out
}

/// A triangle mesh in the plane with counter-clockwise faces.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanarMesh {
    pub vertices: Vec<Complex>,
    pub faces: Vec<[usize; 3]>,
}

/// A violated mesh invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshViolation {
    IndexOutOfRange { face: usize },
    NonPositiveArea { face: usize, area: f64 },
    EdgeOverused { edge: (usize, usize), faces: usize },
    InconsistentOrientation { edge: (usize, usize) },
    NonSimpleBoundary { vertex: usize },
    NonConforming { vertex: usize, edge: (usize, usize) },
    MergeableVertices { a: usize, b: usize },
    Overlap { face_area: f64, enclosed_area: f64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeshReport {
    pub violations: Vec<MeshViolation>,
}

impl MeshReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl PlanarMesh {
    pub fn new(vertices: Vec<Complex>, faces: Vec<[usize; 3]>) -> Self {
        PlanarMesh { vertices, faces }
    }

    pub fn face_points(&self, f: usize) -> [Complex; 3] {
        self.faces[f].map(|i| self.vertices[i])
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.face_points(f);
        signed_area(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn diameter(&self) -> f64 {
        let (mut lo, mut hi) = (Complex::new(f64::MAX, f64::MAX), Complex::new(f64::MIN, f64::MIN));
        for v in &self.vertices {
            lo = Complex::new(lo.re.min(v.re), lo.im.min(v.im));
            hi = Complex::new(hi.re.max(v.re), hi.im.max(v.im));
        }
        if self.vertices.is_empty() {
            0.0
        } else {
            (hi - lo).norm()
        }
    }

    /// Undirected edges with the number of incident faces.
    pub fn edges(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for t in &self.faces {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        m
    }

    /// Directed boundary edges (interior on the left), sorted.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let d = self.sorted_directed_edges();
        d.iter().filter(|&&(a, b)| d.binary_search(&(b, a)).is_err()).copied().collect()
    }

    fn sorted_directed_edges(&self) -> Vec<(usize, usize)> {
        let mut d: Vec<(usize, usize)> =
            self.faces.iter().flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3]))).collect();
        d.sort_unstable();
        d
    }

    /// Boundary cycles as vertex loops, each counter-clockwise around the
    /// mesh interior (outer boundary CCW, holes CW). Cycles start at their
    /// smallest vertex index and are sorted by it.
    pub fn boundary_cycles(&self) -> Vec<Vec<usize>> {
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (a, b) in self.boundary_edges() {
            next.entry(a).or_default().push(b);
        }
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut cycles = Vec::new();
        let starts: Vec<usize> = next.keys().copied().collect();
        for s in starts {
            for &first in next[&s].clone().iter() {
                if used.contains(&(s, first)) {
                    continue;
                }
                let mut cyc = vec![s];
                let mut cur = s;
                let mut nx = first;
                loop {
                    used.insert((cur, nx));
                    if nx == s {
                        break;
                    }
                    cyc.push(nx);
                    cur = nx;
                    match next.get(&cur).and_then(|v| v.iter().find(|&&w| !used.contains(&(cur, w)))) {
                        Some(&w) => nx = w,
                        None => break,
                    }
                }
                cycles.push(cyc);
            }
        }
        cycles
    }

    pub fn boundary_vertices(&self) -> BTreeSet<usize> {
        self.boundary_edges().into_iter().flat_map(|(a, b)| [a, b]).collect()
    }

    /// Minimum interior angle over all faces, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.faces.len())
            .flat_map(|f| triangle_angles(self.face_points(f)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of edges at each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for &(a, b) in self.edges().keys() {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Checks every mesh invariant; `merge_tol` is relative to the diameter.
    pub fn validate(&self, merge_tol: f64) -> MeshReport {
        let mut v = Vec::new();
        let n = self.vertices.len();
        for (f, t) in self.faces.iter().enumerate() {
            if t.iter().any(|&i| i >= n) {
                v.push(MeshViolation::IndexOutOfRange { face: f });
            }
        }
        if !v.is_empty() {
            return MeshReport { violations: v };
        }
        for f in 0..self.faces.len() {
            let a = self.face_area(f);
            if !(a > 0.0) {
                v.push(MeshViolation::NonPositiveArea { face: f, area: a });
            }
        }
        let directed = self.sorted_directed_edges();
        for w in directed.windows(2) {
            if w[0] == w[1] {
                v.push(MeshViolation::InconsistentOrientation { edge: (w[0].0.min(w[0].1), w[0].0.max(w[0].1)) });
            }
        }
        let mut undirected: Vec<(usize, usize)> = directed.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        undirected.sort_unstable();
        let mut i = 0;
        while i < undirected.len() {
            let j = i + undirected[i..].iter().take_while(|e| **e == undirected[i]).count();
            if j - i > 2 {
                v.push(MeshViolation::EdgeOverused { edge: undirected[i], faces: j - i });
            }
            i = j;
        }
        let boundary: Vec<(usize, usize)> =
            directed.iter().filter(|&&(a, b)| directed.binary_search(&(b, a)).is_err()).copied().collect();
        let mut out_deg: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, _) in &boundary {
            *out_deg.entry(a).or_insert(0) += 1;
        }
        for (&a, &d) in &out_deg {
            if d > 1 {
                v.push(MeshViolation::NonSimpleBoundary { vertex: a });
            }
        }

        let diam = self.diameter();
        let tol = merge_tol * diam;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by(|&i, &j| self.vertices[i].re.total_cmp(&self.vertices[j].re));
        let xs: Vec<f64> = order.iter().map(|&i| self.vertices[i].re).collect();
        // merge tolerance
        for (k, &i) in order.iter().enumerate() {
            for &j in order[k + 1..].iter().take_while(|&&j| self.vertices[j].re - self.vertices[i].re <= tol) {
                if (self.vertices[i] - self.vertices[j]).norm() <= tol {
                    v.push(MeshViolation::MergeableVertices { a: i.min(j), b: i.max(j) });
                }
            }
        }
        // T-junctions: a vertex strictly inside an edge it does not belong to.
        // The edge opposite a hanging vertex has no partner, so only
        // unmatched edges need checking.
        let eps = 1e-12 * diam.max(f64::MIN_POSITIVE);
        for &(a, b) in &boundary {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            let lo = xs.partition_point(|x| *x < p.re.min(q.re) - eps);
            let hi = xs.partition_point(|x| *x <= p.re.max(q.re) + eps);
            for &w in &order[lo..hi] {
                if w == a || w == b {
                    continue;
                }
                let x = self.vertices[w];
                let len = (q - p).norm();
                let t = ((x - p).conj() * (q - p)).re / (len * len);
                let dist = ((x - p).conj() * (q - p)).im.abs() / len;
                if t > 0.0 && t < 1.0 && dist <= eps {
                    v.push(MeshViolation::NonConforming { vertex: w, edge: (a, b) });
                }
            }
        }
        // total face area against the area enclosed by the boundary
        if v.is_empty() {
            let cycles = self.boundary_cycles();
            let enclosed: f64 = cycles
                .iter()
                .map(|c| {
                    let mut s = 0.0;
                    for k in 0..c.len() {
                        let (p, q) = (self.vertices[c[k]], self.vertices[c[(k + 1) % c.len()]]);
                        s += 0.5 * (p.conj() * q).im;
                    }
                    s
                })
                .sum();
            let fa = self.area();
            if cycles.is_empty() || (fa - enclosed).abs() > 1e-9 * fa.abs().max(diam * diam) {
                v.push(MeshViolation::Overlap { face_area: fa, enclosed_area: enclosed });
            }
        }
        MeshReport { violations: v }
    }
}

/// `z ↦ αz + βz̄ + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffinePiece {
    pub alpha: Complex,
    pub beta: Complex,
    pub c: Complex,
}

impl AffinePiece {
    pub const IDENTITY: AffinePiece =
        AffinePiece { alpha: Complex::new(1.0, 0.0), beta: Complex::new(0.0, 0.0), c: Complex::new(0.0, 0.0) };

    pub fn apply(&self, z: Complex) -> Complex {
        self.alpha * z + self.beta * z.conj() + self.c
    }

    pub fn preserves_orientation(&self) -> bool {
        self.alpha.norm() > self.beta.norm()
    }

    /// Beltrami coefficient `β/α`.
    pub fn beltrami(&self) -> Complex {
        self.beta / self.alpha
    }

    /// `(|α|+|β|)/(|α|−|β|)`; infinite for orientation-reversing pieces.
    pub fn dilatation(&self) -> f64 {
        let (a, b) = (self.alpha.norm(), self.beta.norm());
        if b == 0.0 {
            1.0
        } else if a > b {
            (a + b) / (a - b)
        } else {
            f64::INFINITY
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffinePiece) -> AffinePiece {
        AffinePiece {
            alpha: self.alpha * other.alpha + self.beta * other.beta.conj(),
            beta: self.alpha * other.beta + self.beta * other.alpha.conj(),
            c: self.apply(other.c),
        }
    }
}

/// The real-affine map taking `src[i]` to `dst[i]`.
pub fn affine_through(src: [Complex; 3], dst: [Complex; 3]) -> Result<AffinePiece, PlanarError> {
    let (u1, u2) = (src[1] - src[0], src[2] - src[0]);
    let (w1, w2) = (dst[1] - dst[0], dst[2] - dst[0]);
    let det = u1 * u2.conj() - u2 * u1.conj();
    let scale = u1.norm() * u2.norm();
    if det.norm() <= 1e-14 * scale || scale == 0.0 {
        return Err(PlanarError::DegenerateSource);
    }
    let alpha = (w1 * u2.conj() - w2 * u1.conj()) / det;
    let beta = (u1 * w2 - u2 * w1) / det;
    let c = dst[0] - alpha * src[0] - beta * src[0].conj();
    Ok(AffinePiece { alpha, beta, c })
}

/// A map that is affine on each face of `source`, taking it onto the face of
/// `target` with the same index and vertex order.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffineMap {
    pub source: PlanarMesh,
    pub target: PlanarMesh,
    pub pieces: Vec<AffinePiece>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DilatationReport {
    pub max_k: f64,
    /// Source area of faces with `K > 1 + tol`.
    pub support_area: f64,
    pub total_area: f64,
    pub per_face: Vec<f64>,
}

impl DilatationReport {
    /// Combines reports of maps on disjoint domains.
    pub fn merge(reports: &[DilatationReport]) -> DilatationReport {
        let mut out = DilatationReport { max_k: 1.0, support_area: 0.0, total_area: 0.0, per_face: Vec::new() };
        for r in reports {
            out.max_k = out.max_k.max(r.max_k);
            out.support_area += r.support_area;
            out.total_area += r.total_area;
            out.per_face.extend_from_slice(&r.per_face);
        }
        out
    }
}

impl PiecewiseAffineMap {
    pub fn new(source: PlanarMesh, target: PlanarMesh) -> Result<Self, PlanarError> {
        if source.faces != target.faces {
            return Err(PlanarError::FaceMismatch);
        }
        let pieces = (0..source.faces.len())
            .map(|f| affine_through(source.face_points(f), target.face_points(f)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PiecewiseAffineMap { source, target, pieces })
    }

    pub fn identity(mesh: PlanarMesh) -> Self {
        let pieces = vec![AffinePiece::IDENTITY; mesh.faces.len()];
        PiecewiseAffineMap { target: mesh.clone(), source: mesh, pieces }
    }

    /// Largest disagreement of neighbouring pieces at shared edge midpoints.
    pub fn continuity_residual(&self) -> f64 {
        let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (f, t) in self.source.faces.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push(f);
            }
        }
        let mut worst: f64 = 0.0;
        for (&(a, b), fs) in &by_edge {
            if fs.len() == 2 {
                let mid = (self.source.vertices[a] + self.source.vertices[b]) * 0.5;
                let d = (self.pieces[fs[0]].apply(mid) - self.pieces[fs[1]].apply(mid)).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest error in sending source vertices to target vertices.
    pub fn interpolation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (f, t) in self.source.faces.iter().enumerate() {
            for &i in t {
                let d = (self.pieces[f].apply(self.source.vertices[i]) - self.target.vertices[i]).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// Per-face dilatation and its support.
pub fn dilatation(map: &PiecewiseAffineMap, tol: f64) -> Result<DilatationReport, PlanarError> {
    dilatation_of_pieces(&map.source, &map.pieces, tol)
}

/// Dilatation report for one affine piece per face of `source`, for maps
/// whose target is not a single planar mesh.
pub fn dilatation_of_pieces(source: &PlanarMesh, pieces: &[AffinePiece], tol: f64) -> Result<DilatationReport, PlanarError> {
    let mut per_face = Vec::with_capacity(pieces.len());
    let (mut max_k, mut support, mut total) = (1.0f64, 0.0, 0.0);
    for (f, p) in pieces.iter().enumerate() {
        if !p.preserves_orientation() {
            return Err(PlanarError::OrientationReversedPiece(f));
        }
        let k = p.dilatation();
        let area = source.face_area(f);
        total += area;
        if k > 1.0 + tol {
            support += area;
        }
        max_k = max_k.max(k);
        per_face.push(k);
    }
    Ok(DilatationReport { max_k, support_area: support, total_area: total, per_face })
}
