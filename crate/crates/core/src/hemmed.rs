//! Triangulations of finitely connected domains by equilateral triangles
//! away from the boundary, joined to each boundary curve through a
//! straightened collar.
//!
//! Each boundary curve `γ` comes with a conformal map `Φ` of the round
//! annulus `1 < |z| < R` into the domain `U`, taking `|z| = 1` to `γ`. In
//! logarithmic coordinates `ζ = log z` the collar is the strip
//! `0 < Re ζ < log R`, periodic in `Im ζ` with period `2π`. The core curve
//! `γ̃ = Φ(|z| = √R)` cuts off the part `Ũ` of the domain that is covered by
//! lattice triangles of side `ε`; what remains of the collar is mapped to the
//! rectangle `Q = [0, ρ] × [0, 2π]`, `ρ = (log R)/2`, and triangulated there
//! with boundary vertices at the `d`-th roots of unity on the left and at
//! the lattice boundary on the right.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::math::{self, PI, TAU};
use crate::planar::{affine_through, dilatation_of_pieces, AffinePiece, DilatationReport, PlanarError, PlanarMesh};
use crate::rect::{rect_triangulation, BoundaryPartition, RectError, RectTriangulation};
use crate::surface::{Corner, EquilateralSurface, Slot, SurfaceError};
use crate::Complex;

/// Lattice regions with more triangles than this are refused.
pub const MAX_LATTICE_TRIANGLES: usize = 4_000_000;

const INJECTIVITY_SAMPLES: usize = 256;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum HemmedError {
    #[error("invalid domain: {0}")]
    InvalidSpec(&'static str),
    #[error("curve {curve}: degree {degree} is below the minimum {minimum}")]
    DegreeTooSmall { curve: usize, degree: usize, minimum: usize },
    #[error("curve {0}: the boundary map is not injective on its closed annulus")]
    NotInjective(usize),
    #[error("collars of curves {0} and {1} overlap")]
    OverlappingCollars(usize, usize),
    #[error("epsilon is too large: {0}")]
    EpsilonTooLarge(&'static str),
    #[error("curve {curve}: lattice boundary edge {edge} is not transverse to the core curve")]
    SlopeDegenerate { curve: usize, edge: usize },
    #[error("curve {0}: inverting the boundary map did not converge")]
    InversionFailure(usize),
    #[error("interface degrees differ: {0} against {1}")]
    DegreeMismatch(usize, usize),
    #[error("pieces {0} and {1} parametrise their shared curve with the same orientation")]
    OrientationMismatch(usize, usize),
    #[error(transparent)]
    Rect(#[from] RectError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
}

/// `z^k` for integer `k`.
fn zpow(z: Complex, k: i32) -> Complex {
    let mut base = if k < 0 { z.inv() } else { z };
    let mut e = k.unsigned_abs();
    let mut out = Complex::new(1.0, 0.0);
    while e > 0 {
        if e & 1 == 1 {
            out *= base;
        }
        base *= base;
        e >>= 1;
    }
    out
}

fn cexp(z: Complex) -> Complex {
    math::cis(z.im) * math::exp(z.re)
}

/// One boundary curve with its collar map `Φ(z) = Σ c_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCurve {
    pub terms: Vec<(i32, Complex)>,
    /// Outer radius `R > 1` of the collar annulus.
    pub radius: f64,
    /// Number of boundary edges along the curve.
    pub degree: usize,
}

impl BoundaryCurve {
    pub fn new(terms: Vec<(i32, Complex)>, radius: f64, degree: usize) -> Self {
        BoundaryCurve { terms, radius, degree }
    }

    /// The circle `|w − c| = r` bounding a hole; the domain lies outside.
    pub fn hole(centre: Complex, r: f64, radius: f64, degree: usize) -> Self {
        Self::new(vec![(0, centre), (1, Complex::new(r, 0.0))], radius, degree)
    }

    /// The circle `|w − c| = r` enclosing the domain.
    pub fn outer(centre: Complex, r: f64, radius: f64, degree: usize) -> Self {
        Self::new(vec![(0, centre), (-1, Complex::new(r, 0.0))], radius, degree)
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.terms.iter().map(|&(k, c)| c * zpow(z, k)).sum()
    }

    pub fn derivative(&self, z: Complex) -> Complex {
        self.terms.iter().filter(|t| t.0 != 0).map(|&(k, c)| c * (k as f64) * zpow(z, k - 1)).sum()
    }

    /// `Φ(e^ζ)`.
    pub fn at_log(&self, zeta: Complex) -> Complex {
        self.eval(cexp(zeta))
    }

    /// Width `ρ = (log R)/2` of the straightened collar.
    pub fn rho(&self) -> f64 {
        math::ln(self.radius) / 2.0
    }

    /// `Δ(R) = 1 / log R`.
    pub fn modulus_bound(&self) -> f64 {
        1.0 / math::ln(self.radius)
    }

    /// Smallest admissible degree.
    pub fn min_degree(&self) -> usize {
        (math::ceil(self.modulus_bound()) as usize).max(3)
    }

    /// Solves `Φ(e^ζ) = w` by damped Newton iteration from `guess`.
    pub fn log_inverse(&self, w: Complex, guess: Complex) -> Option<Complex> {
        let tol = 1e-13 * (1.0 + w.norm());
        let mut zeta = guess;
        for _ in 0..80 {
            let z = cexp(zeta);
            let f = self.eval(z) - w;
            if f.norm() <= tol {
                return Some(zeta);
            }
            let df = self.derivative(z) * z;
            if !(df.norm() > 0.0) {
                return None;
            }
            let mut step = f / df;
            if step.norm() > 0.25 {
                step *= 0.25 / step.norm();
            }
            zeta -= step;
            if !zeta.re.is_finite() || !zeta.im.is_finite() {
                return None;
            }
        }
        let f = self.at_log(zeta) - w;
        (f.norm() <= 1e3 * tol).then_some(zeta)
    }

    fn circle(&self, r: f64, n: usize) -> Vec<Complex> {
        (0..n).map(|i| self.eval(math::cis(TAU * i as f64 / n as f64) * r)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HemmedDomainSpec {
    pub curves: Vec<BoundaryCurve>,
    pub epsilon: f64,
}

fn cross(a: Complex, b: Complex) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(a: Complex, b: Complex, c: Complex, d: Complex) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn polygon_is_simple(p: &[Complex]) -> bool {
    let n = p.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

fn polygons_cross(p: &[Complex], q: &[Complex]) -> bool {
    (0..p.len()).any(|i| (0..q.len()).any(|j| segments_cross(p[i], p[(i + 1) % p.len()], q[j], q[(j + 1) % q.len()])))
}

fn signed_polygon_area(p: &[Complex]) -> f64 {
    (0..p.len()).map(|i| cross(p[i], p[(i + 1) % p.len()])).sum::<f64>() / 2.0
}

/// Winding number of a closed polygon around `x`.
fn winding(p: &[Complex], x: Complex) -> i64 {
    let mut total = 0.0;
    for i in 0..p.len() {
        let (a, b) = (p[i] - x, p[(i + 1) % p.len()] - x);
        total += (b / a).arg();
    }
    math::round(total / TAU) as i64
}

/// Winding number of `Φ'` around 0 along `|z| = r`.
fn derivative_winding(c: &BoundaryCurve, r: f64, n: usize) -> Option<i64> {
    let vals: Vec<Complex> = (0..n).map(|i| c.derivative(math::cis(TAU * i as f64 / n as f64) * r)).collect();
    if vals.iter().any(|v| !(v.norm() > 0.0)) {
        return None;
    }
    Some(winding(&vals, Complex::new(0.0, 0.0)))
}

/// Sampled core curve `γ̃` of one collar.
#[derive(Clone, Debug)]
struct CoreCurve {
    /// Whether the side of `γ̃` away from the domain is bounded.
    bounded: bool,
    points: Vec<Complex>,
    /// `ρ + iθ` for each sample.
    lifts: Vec<Complex>,
}

fn sample_core(c: &BoundaryCurve, epsilon: f64) -> CoreCurve {
    let rho = c.rho();
    let coarse = c.circle(math::sqrt(c.radius), INJECTIVITY_SAMPLES);
    let perimeter: f64 = (0..coarse.len()).map(|i| (coarse[(i + 1) % coarse.len()] - coarse[i]).norm()).sum();
    // spacing at most ε/8, with slack for the coarse perimeter estimate
    let n = (math::ceil(10.0 * perimeter / epsilon) as usize).clamp(INJECTIVITY_SAMPLES, 1 << 22);
    let lifts: Vec<Complex> = (0..n).map(|i| Complex::new(rho, TAU * i as f64 / n as f64)).collect();
    let points: Vec<Complex> = lifts.iter().map(|&l| c.at_log(l)).collect();
    // the excluded side D_γ lies to the left of γ̃ as θ increases
    let bounded = signed_polygon_area(&coarse) > 0.0;
    CoreCurve { bounded, points, lifts }
}

/// Checks the domain description and samples the core curves.
fn prepare(spec: &HemmedDomainSpec) -> Result<Vec<CoreCurve>, HemmedError> {
    if spec.curves.is_empty() {
        return Err(HemmedError::InvalidSpec("at least one boundary curve is required"));
    }
    if !(spec.epsilon > 0.0) || !spec.epsilon.is_finite() {
        return Err(HemmedError::InvalidSpec("epsilon must be positive"));
    }
    for (i, c) in spec.curves.iter().enumerate() {
        if !(c.radius > 1.0) || !c.radius.is_finite() {
            return Err(HemmedError::InvalidSpec("collar radius must exceed 1"));
        }
        if c.terms.is_empty() || c.terms.iter().any(|t| !t.1.re.is_finite() || !t.1.im.is_finite()) {
            return Err(HemmedError::InvalidSpec("boundary map coefficients must be finite"));
        }
        let minimum = c.min_degree();
        if c.degree < minimum {
            return Err(HemmedError::DegreeTooSmall { curve: i, degree: c.degree, minimum });
        }
        // Φ' has no zeros in the annulus and both boundary circles map to
        // simple curves
        let w1 = derivative_winding(c, 1.0, 4 * INJECTIVITY_SAMPLES);
        let w2 = derivative_winding(c, c.radius, 4 * INJECTIVITY_SAMPLES);
        if w1.is_none() || w1 != w2 {
            return Err(HemmedError::NotInjective(i));
        }
        for r in [1.0, math::sqrt(c.radius), c.radius] {
            if !polygon_is_simple(&c.circle(r, INJECTIVITY_SAMPLES)) {
                return Err(HemmedError::NotInjective(i));
            }
        }
    }
    let cores: Vec<CoreCurve> = spec.curves.iter().map(|c| sample_core(c, spec.epsilon)).collect();
    if cores.iter().filter(|c| !c.bounded).count() != 1 {
        return Err(HemmedError::InvalidSpec("exactly one boundary curve must enclose the domain"));
    }
    let rims: Vec<[Vec<Complex>; 2]> =
        spec.curves.iter().map(|c| [c.circle(1.0, INJECTIVITY_SAMPLES), c.circle(c.radius, INJECTIVITY_SAMPLES)]).collect();
    let in_annulus = |i: usize, x: Complex| winding(&rims[i][0], x) != winding(&rims[i][1], x);
    for i in 0..rims.len() {
        for j in i + 1..rims.len() {
            let crossing = rims[i].iter().any(|p| rims[j].iter().any(|q| polygons_cross(p, q)));
            let probe_j = spec.curves[j].eval(Complex::new(math::sqrt(spec.curves[j].radius), 0.0));
            let probe_i = spec.curves[i].eval(Complex::new(math::sqrt(spec.curves[i].radius), 0.0));
            if crossing || in_annulus(i, probe_j) || in_annulus(j, probe_i) {
                return Err(HemmedError::OverlappingCollars(i, j));
            }
        }
    }
    Ok(cores)
}

/// The union of lattice triangles meeting `Ũ`.
#[derive(Clone, Debug)]
pub struct LatticeFill {
    pub mesh: PlanarMesh,
    /// Lattice coordinates `(a, b)` of each vertex, at `aε + bε·e^{iπ/3}`.
    pub coords: Vec<(i64, i64)>,
    /// Boundary cycle of the lattice region next to each curve.
    pub alpha: Vec<Vec<usize>>,
}

/// Crossings of a closed polygon with the horizontal lines `y = b·h`,
/// `b ∈ [b_lo, b_hi]`, sorted per line.
fn row_crossings(p: &[Complex], h: f64, b_lo: i64, b_hi: i64) -> Vec<Vec<f64>> {
    let mut rows = vec![Vec::new(); (b_hi - b_lo + 1) as usize];
    for i in 0..p.len() {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        let (lo, hi) = if a.im <= b.im { (a.im, b.im) } else { (b.im, a.im) };
        let first = (math::ceil(lo / h) as i64).max(b_lo);
        let last = (math::floor(hi / h) as i64).min(b_hi);
        for r in first..=last {
            let y = r as f64 * h;
            // half-open in y so that vertices on a line count once
            if !(lo <= y && y < hi) {
                continue;
            }
            let t = (y - a.im) / (b.im - a.im);
            rows[(r - b_lo) as usize].push(a.re + t * (b.re - a.re));
        }
    }
    for r in rows.iter_mut() {
        r.sort_by(|x, y| x.total_cmp(y));
    }
    rows
}

/// Covers `Ũ` by lattice triangles of side `ε`.
pub fn lattice_fill(spec: &HemmedDomainSpec) -> Result<LatticeFill, HemmedError> {
    let cores = prepare(spec)?;
    lattice_fill_with(spec, &cores)
}

fn lattice_fill_with(spec: &HemmedDomainSpec, cores: &[CoreCurve]) -> Result<LatticeFill, HemmedError> {
    let eps = spec.epsilon;
    let h = eps * math::sqrt(3.0) / 2.0;
    let outer = cores.iter().find(|c| !c.bounded).expect("checked in prepare");
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &outer.points {
        xmin = xmin.min(p.re);
        xmax = xmax.max(p.re);
        ymin = ymin.min(p.im);
        ymax = ymax.max(p.im);
    }
    let b_lo = math::floor(ymin / h) as i64 - 1;
    let b_hi = math::ceil(ymax / h) as i64 + 1;
    let estimate = 2.0 * ((b_hi - b_lo) as f64) * ((xmax - xmin) / eps + 6.0);
    if !(estimate < MAX_LATTICE_TRIANGLES as f64) {
        return Err(HemmedError::InvalidSpec("epsilon is too small for the size of the domain"));
    }
    let rows: Vec<Vec<Vec<f64>>> = cores.iter().map(|c| row_crossings(&c.points, h, b_lo, b_hi)).collect();
    let point = |a: i64, b: i64| Complex::new((a as f64 + b as f64 / 2.0) * eps, b as f64 * h);
    let inside = |a: i64, b: i64| -> bool {
        if b < b_lo || b > b_hi {
            return false;
        }
        let x = point(a, b).re;
        cores.iter().zip(&rows).all(|(c, r)| {
            let line = &r[(b - b_lo) as usize];
            let left = line.partition_point(|&t| t < x);
            let in_excluded = if c.bounded { left % 2 == 1 } else { left % 2 == 0 };
            !in_excluded
        })
    };
    // triangles containing a sample of some γ̃
    let mut marked: BTreeSet<(i64, i64, bool)> = BTreeSet::new();
    for c in cores {
        for p in &c.points {
            let bf = p.im / h;
            let af = p.re / eps - bf / 2.0;
            let (a, b) = (math::floor(af), math::floor(bf));
            let up = (af - a) + (bf - b) < 1.0;
            marked.insert((a as i64, b as i64, up));
        }
    }
    let mut ids: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut coords = Vec::new();
    let mut faces = Vec::new();
    for b in b_lo..b_hi {
        let a_lo = math::floor(xmin / eps - (b + 1) as f64 / 2.0) as i64 - 2;
        let a_hi = math::ceil(xmax / eps - b as f64 / 2.0) as i64 + 2;
        for a in a_lo..=a_hi {
            let tris = [(true, [(a, b), (a + 1, b), (a, b + 1)]), (false, [(a + 1, b), (a + 1, b + 1), (a, b + 1)])];
            for (up, t) in tris {
                let keep = marked.contains(&(a, b, up)) || t.iter().any(|&(x, y)| inside(x, y));
                if !keep {
                    continue;
                }
                let face = t.map(|key| {
                    *ids.entry(key).or_insert_with(|| {
                        coords.push(key);
                        coords.len() - 1
                    })
                });
                faces.push(face);
            }
        }
    }
    let vertices: Vec<Complex> = coords.iter().map(|&(a, b)| point(a, b)).collect();
    let mesh = PlanarMesh::new(vertices, faces);
    if mesh.faces.is_empty() {
        return Err(HemmedError::EpsilonTooLarge("no lattice triangle meets the domain"));
    }
    let cycles = mesh.boundary_cycles();
    let mut seen = BTreeSet::new();
    for v in cycles.iter().flatten() {
        if !seen.insert(*v) {
            return Err(HemmedError::EpsilonTooLarge("the lattice region is pinched at a vertex"));
        }
    }
    let chi = mesh.vertices.len() as i64 - mesh.edges().len() as i64 + mesh.faces.len() as i64;
    if cycles.len() != cores.len() || chi != 2 - cores.len() as i64 {
        return Err(HemmedError::EpsilonTooLarge("the lattice region has the wrong topology"));
    }
    // match each cycle to the nearest core curve
    let mut alpha: Vec<Option<Vec<usize>>> = vec![None; cores.len()];
    for cyc in cycles {
        let p = mesh.vertices[cyc[0]];
        let dist = |c: &CoreCurve| c.points.iter().map(|q| (q - p).norm()).fold(f64::INFINITY, f64::min);
        let best = (0..cores.len()).min_by(|&i, &j| dist(&cores[i]).total_cmp(&dist(&cores[j]))).unwrap();
        if alpha[best].replace(cyc).is_some() {
            return Err(HemmedError::EpsilonTooLarge("two lattice boundary cycles lie next to the same curve"));
        }
    }
    let alpha = alpha.into_iter().map(|c| c.expect("one cycle per curve")).collect();
    Ok(LatticeFill { mesh, coords, alpha })
}

/// The straightening `Ψ` of one collar, built from the lattice boundary.
///
/// In logarithmic coordinates the lattice boundary `α` is the graph
/// `x = X₊(y)`. `Ψ` first rescales each horizontal so that `α` lands on
/// `x = ρ`, then reparametrises the right side so each lattice edge is
/// traversed at constant speed, then shears so the lowest vertex sits at
/// height 0. The left side is translated by the multiple `c` of `2π/d`
/// nearest to that vertex's height, which keeps the shear below `π/d`; the
/// left vertices of `Q` are the roots of unity relabelled by `c`. Every step
/// commutes with `ζ ↦ ζ + 2πi`.
#[derive(Clone, Debug)]
pub struct StripData {
    pub curve: usize,
    pub phi: BoundaryCurve,
    pub rho: f64,
    /// `α` vertices (lattice ids) in order of increasing height.
    pub vertices: Vec<usize>,
    pub points: Vec<Complex>,
    /// Logarithmic lifts of the vertices, strictly increasing in height.
    pub lifts: Vec<Complex>,
    pub y_min: f64,
    /// Translation `c = 2π j₀/d` of the left side.
    pub offset: f64,
    /// `j₀ mod d`: left vertex `j` of `Q` is `Φ(e^{2πi(j + j₀)/d})`.
    pub offset_index: usize,
    /// Heights of the vertices on the right side of `Q`; the first is 0.
    pub heights: Vec<f64>,
    /// Range of the derivative of the right-side reparametrisation.
    pub psi1_slope: (f64, f64),
}

impl StripData {
    fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    fn lift(&self, k: usize) -> Complex {
        let n = self.edge_count();
        self.lifts[k % n] + Complex::new(0.0, TAU * (k / n) as f64)
    }

    /// Preimage in the strip of the point at fraction `s` along edge `k`.
    pub fn edge_point(&self, k: usize, s: f64) -> Option<Complex> {
        let n = self.edge_count();
        let (a, b) = (self.points[k % n], self.points[(k + 1) % n]);
        let guess = self.lift(k) * (1.0 - s) + self.lift(k + 1) * s;
        self.phi.log_inverse(a + (b - a) * s, guess)
    }

    /// Returns `(n, k, s, ζ)` with `ζ` on edge `k` at fraction `s`, shifted by
    /// `2πn`, and `Im ζ = y`.
    fn locate(&self, y: f64) -> Option<(i64, usize, f64, Complex)> {
        let per = math::floor((y - self.y_min) / TAU);
        let mut y0 = y - TAU * per;
        if y0 >= self.y_min + TAU {
            y0 -= TAU;
        }
        let shift = Complex::new(0.0, TAU * per);
        let k = self.lifts.partition_point(|l| l.im <= y0).max(1) - 1;
        let (lo_y, hi_y) = (self.lift(k).im, self.lift(k + 1).im);
        let (mut s0, mut s1) = (0.0, 1.0);
        let (mut f0, mut f1) = (lo_y - y0, hi_y - y0);
        if f0 >= 0.0 {
            return Some((per as i64, k, 0.0, self.lift(k) + shift));
        }
        let mut best = None;
        let mut side = 0i8;
        for _ in 0..100 {
            let s = (s0 * f1 - s1 * f0) / (f1 - f0);
            let s = if s.is_finite() && s > s0 && s < s1 { s } else { (s0 + s1) / 2.0 };
            let z = self.edge_point(k, s)?;
            let f = z.im - y0;
            best = Some((s, z));
            if f.abs() <= 1e-14 * (1.0 + y0.abs()) || s1 - s0 <= 1e-15 {
                break;
            }
            // Illinois modification of the secant rule
            if f < 0.0 {
                s0 = s;
                f0 = f;
                if side == -1 {
                    f1 /= 2.0;
                }
                side = -1;
            } else {
                s1 = s;
                f1 = f;
                if side == 1 {
                    f0 /= 2.0;
                }
                side = 1;
            }
        }
        let (s, z) = best?;
        Some((per as i64, k, s, z + shift))
    }

    /// `ψ₁` on the right side, as a function of height.
    fn psi1_right(&self, y: f64) -> Option<f64> {
        let (per, k, s, _) = self.locate(y)?;
        let (a, b) = (self.lift(k).im, self.lift(k + 1).im);
        Some(a + s * (b - a) + TAU * per as f64)
    }

    /// `Ψ` on the strip `0 ≤ x ≤ X₊(y)`.
    pub fn forward(&self, zeta: Complex) -> Option<Complex> {
        let (_, _, _, edge) = self.locate(zeta.im)?;
        let x = zeta.re * self.rho / edge.re;
        let t = x / self.rho;
        let y = zeta.im - self.offset + t * (self.psi1_right(zeta.im)? - zeta.im) - t * (self.y_min - self.offset);
        Some(Complex::new(x, y))
    }

    /// `Ψ⁻¹` on `Q` (extended periodically in height).
    pub fn inverse(&self, q: Complex) -> Option<Complex> {
        let t = q.re / self.rho;
        let target = q.im + self.offset + t * (self.y_min - self.offset);
        if t == 0.0 {
            return Some(Complex::new(0.0, target));
        }
        let spread = (0..self.edge_count()).map(|k| self.lift(k + 1).im - self.lift(k).im).fold(0.0, f64::max);
        let g = |y: f64| -> Option<f64> { Some((1.0 - t) * y + t * self.psi1_right(y)? - target) };
        let (mut a, mut b) = (target - spread - 1e-9, target + spread + 1e-9);
        let (mut ga, mut gb) = (g(a)?, g(b)?);
        if !(ga <= 0.0 && gb >= 0.0) {
            return None;
        }
        let mut side = 0i8;
        let mut y = target;
        for _ in 0..200 {
            y = (a * gb - b * ga) / (gb - ga);
            if !(y > a && y < b) {
                y = (a + b) / 2.0;
            }
            let gy = g(y)?;
            if gy.abs() <= 1e-14 * (1.0 + target.abs()) || b - a <= 1e-14 * (1.0 + target.abs()) {
                break;
            }
            if gy < 0.0 {
                a = y;
                ga = gy;
                if side == -1 {
                    gb /= 2.0;
                }
                side = -1;
            } else {
                b = y;
                gb = gy;
                if side == 1 {
                    ga /= 2.0;
                }
                side = 1;
            }
        }
        let (_, _, _, edge) = self.locate(y)?;
        Some(Complex::new(t * edge.re, y))
    }
}

/// Lifts each lattice boundary cycle to logarithmic coordinates and checks
/// that it is a graph over the core curve.
pub fn build_strip_maps(spec: &HemmedDomainSpec, fill: &LatticeFill) -> Result<Vec<StripData>, HemmedError> {
    let cores = prepare(spec)?;
    build_strip_maps_with(spec, fill, &cores)
}

fn build_strip_maps_with(spec: &HemmedDomainSpec, fill: &LatticeFill, cores: &[CoreCurve]) -> Result<Vec<StripData>, HemmedError> {
    let mut out = Vec::with_capacity(spec.curves.len());
    for (ci, (phi, core)) in spec.curves.iter().zip(cores).enumerate() {
        let mut cyc = fill.alpha[ci].clone();
        let pts: Vec<Complex> = cyc.iter().map(|&v| fill.mesh.vertices[v]).collect();
        let nearest = (0..core.points.len()).min_by(|&i, &j| (core.points[i] - pts[0]).norm().total_cmp(&(core.points[j] - pts[0]).norm())).unwrap();
        let mut lifts = Vec::with_capacity(cyc.len());
        let mut guess = core.lifts[nearest];
        for &p in &pts {
            let z = phi.log_inverse(p, guess).ok_or(HemmedError::InversionFailure(ci))?;
            lifts.push(z);
            guess = z;
        }
        let close = phi.log_inverse(pts[0], guess).ok_or(HemmedError::InversionFailure(ci))?;
        let turn = (close - lifts[0]).im;
        if (turn.abs() - TAU).abs() > 1e-6 || (close - lifts[0]).re.abs() > 1e-9 {
            return Err(HemmedError::EpsilonTooLarge("the lattice boundary does not wind once around the collar"));
        }
        if turn < 0.0 {
            cyc.reverse();
            lifts.reverse();
        }
        if lifts.iter().any(|z| !(z.re > 0.0)) {
            return Err(HemmedError::EpsilonTooLarge("the lattice boundary leaves the collar"));
        }
        // start at the lowest vertex, shifting earlier ones up one period
        let n = cyc.len();
        let i0 = (0..n).min_by(|&i, &j| lifts[i].im.total_cmp(&lifts[j].im)).unwrap();
        let vertices: Vec<usize> = (0..n).map(|k| cyc[(i0 + k) % n]).collect();
        let lifts: Vec<Complex> =
            (0..n).map(|k| lifts[(i0 + k) % n] + Complex::new(0.0, if i0 + k >= n { TAU } else { 0.0 })).collect();
        let points = vertices.iter().map(|&v| fill.mesh.vertices[v]).collect();
        let y_min = lifts[0].im;
        let heights = lifts.iter().map(|z| z.im - y_min).collect();
        let d = phi.degree as f64;
        let j0 = math::round(y_min * d / TAU);
        let mut strip = StripData {
            curve: ci,
            phi: phi.clone(),
            rho: phi.rho(),
            vertices,
            points,
            lifts,
            y_min,
            offset: TAU * j0 / d,
            offset_index: (j0 as i64).rem_euclid(phi.degree as i64) as usize,
            heights,
            psi1_slope: (1.0, 1.0),
        };
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        const SAMPLES: usize = 16;
        for k in 0..n {
            let (ya, yb) = (strip.lift(k).im, strip.lift(k + 1).im);
            if !(yb > ya) {
                return Err(HemmedError::SlopeDegenerate { curve: ci, edge: k });
            }
            let mut prev = ya;
            for j in 1..=SAMPLES {
                let s = j as f64 / SAMPLES as f64;
                let y = if j == SAMPLES { yb } else { strip.edge_point(k, s).ok_or(HemmedError::InversionFailure(ci))?.im };
                if !(y > prev) {
                    return Err(HemmedError::SlopeDegenerate { curve: ci, edge: k });
                }
                let slope = (yb - ya) / SAMPLES as f64 / (y - prev);
                lo = lo.min(slope);
                hi = hi.max(slope);
                prev = y;
            }
        }
        strip.psi1_slope = (lo, hi);
        out.push(strip);
    }
    Ok(out)
}

/// A graded partition of `[0, len]` whose steps start near `a`, end near
/// `b` and change by a bounded factor from one step to the next.
fn graded_side(len: f64, a: f64, b: f64) -> Vec<f64> {
    const GROWTH: f64 = 0.5;
    let size = |x: f64| (a + GROWTH * x).min(b + GROWTH * (len - x));
    let mut pts = vec![0.0];
    let mut x = 0.0;
    loop {
        let h = size(x);
        if len - x <= 1.5 * h {
            break;
        }
        x += h;
        pts.push(x);
    }
    pts.push(len);
    pts
}

/// Smallest `λ` for which the partition has bounded geometry.
pub fn measured_lambda(p: &BoundaryPartition) -> f64 {
    let lengths = p.ccw_edge_lengths();
    let short = p.width.min(p.height);
    let n = lengths.len();
    (0..n).fold(1.0f64, |acc, k| {
        let (a, b) = (lengths[k], lengths[(k + 1) % n]);
        acc.max(a / short).max(a / b).max(b / a)
    })
}

/// The triangulated rectangle `Q` of one collar.
#[derive(Clone, Debug)]
pub struct CollarMesh {
    pub partition: BoundaryPartition,
    pub rect: RectTriangulation,
    /// Measured bounded-geometry constant of the partition.
    pub lambda: f64,
}

/// Triangulates `Q = [0, ρ] × [0, 2π]` with `d` equal edges on the left, the
/// lattice boundary heights on the right and one graded partition shared by
/// the bottom and top.
pub fn collar_triangulate(strip: &StripData, degree: usize) -> Result<CollarMesh, HemmedError> {
    if degree < 3 {
        return Err(HemmedError::DegreeTooSmall { curve: strip.curve, degree, minimum: 3 });
    }
    let rho = strip.rho;
    let left: Vec<f64> = (0..=degree).map(|j| if j == degree { TAU } else { TAU * j as f64 / degree as f64 }).collect();
    let mut right = strip.heights.clone();
    right.push(TAU);
    let n = right.len();
    let end_gap = math::sqrt((right[1] - right[0]) * (right[n - 1] - right[n - 2]));
    let bottom = graded_side(rho, TAU / degree as f64, end_gap);
    let mut partition = BoundaryPartition::new(rho, TAU, [bottom.clone(), right, bottom, left], 2.0);
    let lambda = measured_lambda(&partition);
    partition.lambda = (lambda * (1.0 + 1e-9)).max(2.0);
    partition.validate()?;
    let rect = rect_triangulation(&partition)?;
    Ok(CollarMesh { partition, rect, lambda })
}

fn unit_triangle() -> [Complex; 3] {
    [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0), math::cis(PI / 3.0)]
}

/// Numerical checks of one straightening map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripDiagnostics {
    /// Relative deviation from constant speed of the pulled-back boundary
    /// edges, on both sides of `Q`.
    pub length_residual: f64,
    /// `max |Ψ(ζ + 2πi) − Ψ(ζ) − 2πi|`.
    pub periodicity_residual: f64,
    /// Largest dilatation of `Ψ` estimated by finite differences.
    pub dilatation: f64,
}

fn strip_diagnostics(strip: &StripData) -> Option<StripDiagnostics> {
    let n = strip.edge_count();
    let mut length = 0.0f64;
    for k in 0..n {
        let (a, b) = (strip.points[k], strip.points[(k + 1) % n]);
        let (ha, hb) = (strip.heights[k], if k + 1 == n { TAU } else { strip.heights[k + 1] });
        for s in [0.25, 0.5, 0.75] {
            let z = strip.inverse(Complex::new(strip.rho, ha + s * (hb - ha)))?;
            length = length.max((strip.phi.at_log(z) - (a + (b - a) * s)).norm() / (b - a).norm());
        }
    }
    for j in 0..16 {
        let y = TAU * (j as f64 + 0.3) / 16.0;
        let c = Complex::new(0.0, strip.offset);
        let there = strip.forward(Complex::new(0.0, y))?;
        let back = strip.inverse(Complex::new(0.0, y))?;
        length = length.max((there + c - Complex::new(0.0, y)).norm()).max((back - c - Complex::new(0.0, y)).norm());
    }
    let (mut periodic, mut kmax) = (0.0f64, 1.0f64);
    const H: f64 = 1e-6;
    for j in 0..32 {
        let y = strip.y_min + TAU * (j as f64 + 0.41) / 32.0;
        let (_, _, _, edge) = strip.locate(y)?;
        for f in [0.1, 0.5, 0.9] {
            let z = Complex::new(f * edge.re, y);
            let w = strip.forward(z)?;
            let shifted = strip.forward(z + Complex::new(0.0, TAU))?;
            periodic = periodic.max((shifted - w - Complex::new(0.0, TAU)).norm());
            let dx = (strip.forward(z + H)? - strip.forward(z - H)?) / (2.0 * H);
            let dy = (strip.forward(z + Complex::new(0.0, H))? - strip.forward(z - Complex::new(0.0, H))?) / (2.0 * H);
            let dz = (dx - dy * Complex::new(0.0, 1.0)) / 2.0;
            let dzb = (dx + dy * Complex::new(0.0, 1.0)) / 2.0;
            let (p, q) = (dz.norm(), dzb.norm());
            kmax = kmax.max(if p > q { (p + q) / (p - q) } else { f64::INFINITY });
        }
    }
    Some(StripDiagnostics { length_residual: length, periodicity_residual: periodic, dilatation: kmax })
}

/// A triangulation of the domain together with the piecewise affine map
/// onto the equilateral surface it defines.
#[derive(Clone, Debug)]
pub struct HemmedTriangulation {
    pub fill: LatticeFill,
    pub strips: Vec<StripData>,
    pub collars: Vec<CollarMesh>,
    /// Lattice faces first, then the faces of each collar in curve order.
    pub source: PlanarMesh,
    pub lattice_faces: usize,
    pub surface: EquilateralSurface,
    /// Affine map of each source face onto the triangle `0, 1, e^{iπ/3}`,
    /// corner `k` going to the `k`-th vertex.
    pub pieces: Vec<AffinePiece>,
    pub report: DilatationReport,
    /// For each curve, the boundary slot of edge `j`, which joins
    /// `Φ(e^{2πij/d})` to `Φ(e^{2πi(j+1)/d})`.
    pub boundary_slots: Vec<Vec<Slot>>,
    pub max_degree: usize,
    pub diagnostics: Vec<StripDiagnostics>,
}

impl HemmedTriangulation {
    /// Area of the source faces outside the lattice region.
    pub fn collar_area(&self) -> f64 {
        (self.lattice_faces..self.source.faces.len()).map(|f| self.source.face_area(f)).sum()
    }
}

pub fn assemble(spec: &HemmedDomainSpec) -> Result<HemmedTriangulation, HemmedError> {
    let cores = prepare(spec)?;
    let fill = lattice_fill_with(spec, &cores)?;
    let strips = build_strip_maps_with(spec, &fill, &cores)?;
    let unit = unit_triangle();
    let mut vertices = fill.mesh.vertices.clone();
    let mut faces = fill.mesh.faces.clone();
    let lattice_faces = faces.len();
    // lattice triangles are equilateral with the orientation of the unit one
    let mut pieces: Vec<AffinePiece> = fill
        .mesh
        .faces
        .iter()
        .map(|t| {
            let (p0, p1) = (vertices[t[0]], vertices[t[1]]);
            let alpha = (p1 - p0).inv();
            AffinePiece { alpha, beta: Complex::new(0.0, 0.0), c: -alpha * p0 }
        })
        .collect();
    let mut collars = Vec::with_capacity(strips.len());
    let mut collar_faces = Vec::with_capacity(strips.len());
    let mut diagnostics = Vec::with_capacity(strips.len());
    for (strip, curve) in strips.iter().zip(&spec.curves) {
        let ci = strip.curve;
        let d = curve.degree;
        let collar = collar_triangulate(strip, d)?;
        let q = &collar.rect.mesh;
        let j0 = strip.offset_index;
        let left: Vec<usize> = (0..d)
            .map(|j| {
                vertices.push(curve.eval(math::cis(TAU * ((j + j0) % d) as f64 / d as f64)));
                vertices.len() - 1
            })
            .collect();
        let mut right: BTreeMap<u64, usize> = strip.heights.iter().zip(&strip.vertices).map(|(h, &v)| (h.to_bits(), v)).collect();
        right.insert(TAU.to_bits(), strip.vertices[0]);
        let mut rim: BTreeMap<u64, usize> = BTreeMap::new();
        let mut map = Vec::with_capacity(q.vertices.len());
        for v in &q.vertices {
            let id = if v.re == 0.0 {
                left[(math::round(v.im * d as f64 / TAU) as usize) % d]
            } else if v.re == strip.rho {
                *right.get(&v.im.to_bits()).ok_or(HemmedError::InvalidSpec("collar mesh lost a lattice boundary vertex"))?
            } else if v.im == 0.0 || v.im == TAU {
                match rim.get(&v.re.to_bits()) {
                    Some(&id) => id,
                    None => {
                        let z = strip.inverse(Complex::new(v.re, 0.0)).ok_or(HemmedError::InversionFailure(ci))?;
                        vertices.push(curve.at_log(z));
                        rim.insert(v.re.to_bits(), vertices.len() - 1);
                        vertices.len() - 1
                    }
                }
            } else {
                let z = strip.inverse(*v).ok_or(HemmedError::InversionFailure(ci))?;
                vertices.push(curve.at_log(z));
                vertices.len() - 1
            };
            map.push(id);
        }
        let mut slots = vec![None; d];
        for t in &q.faces {
            let f = faces.len();
            for s in 0..3 {
                let (a, b) = (q.vertices[t[s]], q.vertices[t[(s + 1) % 3]]);
                if a.re == 0.0 && b.re == 0.0 {
                    let ja = math::round(a.im * d as f64 / TAU) as usize;
                    let jb = math::round(b.im * d as f64 / TAU) as usize;
                    slots[(ja.min(jb) + j0) % d] = Some(Slot::new(f, s as u8));
                }
            }
            let label = t.map(|i| map[i]);
            pieces.push(affine_through(label.map(|i| vertices[i]), unit)?);
            faces.push(label);
        }
        let slots: Option<Vec<Slot>> = slots.into_iter().collect();
        collar_faces.push(slots.ok_or(HemmedError::InvalidSpec("collar mesh is missing a boundary edge"))?);
        diagnostics.push(strip_diagnostics(strip).ok_or(HemmedError::InversionFailure(ci))?);
        collars.push(collar);
    }
    let surface = EquilateralSurface::from_triangles(&faces)?;
    let source = PlanarMesh::new(vertices, faces);
    let report = dilatation_of_pieces(&source, &pieces, 1e-9)?;
    let max_degree = surface.max_vertex_degree();
    Ok(HemmedTriangulation {
        fill,
        strips,
        collars,
        source,
        lattice_faces,
        surface,
        pieces,
        report,
        boundary_slots: collar_faces,
        max_degree,
        diagnostics,
    })
}

/// A curve shared by two pieces, as `(piece, curve)` pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interface {
    pub first: (usize, usize),
    pub second: (usize, usize),
}

fn same_curve(a: &BoundaryCurve, b: &BoundaryCurve, reversed: bool) -> bool {
    const N: usize = 64;
    let pts: Vec<(Complex, Complex)> = (0..N)
        .map(|m| {
            let t = TAU * (m as f64 + 0.37) / N as f64;
            (a.eval(math::cis(t)), b.eval(math::cis(if reversed { -t } else { t })))
        })
        .collect();
    let scale = 1.0 + pts.iter().map(|p| p.0.norm()).fold(0.0, f64::max);
    pts.iter().all(|(p, q)| (p - q).norm() <= 1e-9 * scale)
}

/// Finds curves shared between pieces. A shared curve must be parametrised
/// as `Φ(z)` by one piece and `Φ(1/z)` by the other, so that the collars lie
/// on opposite sides, and both pieces must use the same degree.
pub fn find_interfaces(specs: &[HemmedDomainSpec]) -> Result<Vec<Interface>, HemmedError> {
    let mut out = Vec::new();
    for a in 0..specs.len() {
        for b in a + 1..specs.len() {
            for (i, ca) in specs[a].curves.iter().enumerate() {
                for (j, cb) in specs[b].curves.iter().enumerate() {
                    if same_curve(ca, cb, true) {
                        if ca.degree != cb.degree {
                            return Err(HemmedError::DegreeMismatch(ca.degree, cb.degree));
                        }
                        out.push(Interface { first: (a, i), second: (b, j) });
                    } else if same_curve(ca, cb, false) {
                        return Err(HemmedError::OrientationMismatch(a, b));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Pieces glued along their shared curves.
#[derive(Clone, Debug)]
pub struct HemmedChain {
    pub pieces: Vec<HemmedTriangulation>,
    pub interfaces: Vec<Interface>,
    /// Face offset of each piece in the glued surface.
    pub offsets: Vec<usize>,
    pub surface: EquilateralSurface,
    pub report: DilatationReport,
    /// Largest vertex degree of any single piece.
    pub piece_degree: usize,
    /// Largest degree of a vertex on an interface after gluing.
    pub interface_degree: usize,
}

pub fn chain_assemble(specs: &[HemmedDomainSpec]) -> Result<HemmedChain, HemmedError> {
    if specs.is_empty() {
        return Err(HemmedError::InvalidSpec("a chain needs at least one piece"));
    }
    let interfaces = find_interfaces(specs)?;
    let pieces = specs.iter().map(assemble).collect::<Result<Vec<_>, _>>()?;
    let mut offsets = Vec::with_capacity(pieces.len());
    let mut total = 0;
    let mut gluings = Vec::new();
    for p in &pieces {
        offsets.push(total);
        gluings.extend(p.surface.gluings().into_iter().map(|(a, b)| (Slot::new(a.face + total, a.side), Slot::new(b.face + total, b.side))));
        total += p.surface.face_count();
    }
    let shift = |piece: usize, s: Slot| Slot::new(s.face + offsets[piece], s.side);
    let mut seam = Vec::new();
    for iface in &interfaces {
        let (pa, ca) = iface.first;
        let (pb, cb) = iface.second;
        let d = specs[pa].curves[ca].degree;
        for j in 0..d {
            let sa = shift(pa, pieces[pa].boundary_slots[ca][j]);
            let sb = shift(pb, pieces[pb].boundary_slots[cb][d - 1 - j]);
            gluings.push((sa, sb));
            seam.push(sa);
        }
    }
    let surface = EquilateralSurface::build(total, &gluings)?;
    let degrees = surface.vertex_degrees();
    let interface_degree = seam.iter().map(|s| degrees[surface.vertex(Corner::new(s.face, s.side))]).max().unwrap_or(0);
    let report = DilatationReport::merge(&pieces.iter().map(|p| p.report.clone()).collect::<Vec<_>>());
    let piece_degree = pieces.iter().map(|p| p.max_degree).max().unwrap_or(0);
    Ok(HemmedChain { pieces, interfaces, offsets, surface, report, piece_degree, interface_degree })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn e() -> f64 {
        math::exp(1.0)
    }

    fn annulus(inner: f64, outer: f64, d: usize, eps: f64) -> HemmedDomainSpec {
        HemmedDomainSpec {
            curves: vec![BoundaryCurve::hole(c(0.0), inner, e(), d), BoundaryCurve::outer(c(0.0), outer, e(), d)],
            epsilon: eps,
        }
    }

    fn disc(d: usize, eps: f64) -> HemmedDomainSpec {
        HemmedDomainSpec { curves: vec![BoundaryCurve::outer(c(0.0), 1.0, e(), d)], epsilon: eps }
    }

    #[test]
    fn laurent_evaluation() {
        let curve = BoundaryCurve::new(vec![(-2, c(1.0)), (0, c(3.0)), (1, Complex::new(0.0, 2.0))], 2.0, 8);
        let z = Complex::new(0.3, -1.1);
        let direct = z.inv() * z.inv() + c(3.0) + Complex::new(0.0, 2.0) * z;
        assert!((curve.eval(z) - direct).norm() < 1e-14);
        let fd = (curve.eval(z + 1e-6) - curve.eval(z - 1e-6)) / 2e-6;
        assert!((curve.derivative(z) - fd).norm() < 1e-8);
        let zeta = curve.log_inverse(curve.eval(z), Complex::new(0.1, -1.2)).unwrap();
        assert!((cexp(zeta) - z).norm() < 1e-12);
    }

    #[test]
    fn spec_rejections() {
        // collars 1/2 < |w| < e/2 and 2/e < |w| < 2 overlap
        assert_eq!(assemble(&annulus(0.5, 2.0, 12, 0.1)).unwrap_err(), HemmedError::OverlappingCollars(0, 1));
        assert!(matches!(assemble(&disc(2, 0.1)), Err(HemmedError::DegreeTooSmall { degree: 2, minimum: 3, .. })));
        let narrow = HemmedDomainSpec { curves: vec![BoundaryCurve::outer(c(0.0), 1.0, 1.2, 4)], epsilon: 0.1 };
        assert!(matches!(assemble(&narrow), Err(HemmedError::DegreeTooSmall { minimum: 6, .. })));
        assert!(matches!(assemble(&disc(12, 10.0)), Err(HemmedError::EpsilonTooLarge(_))));
        let two_holes = HemmedDomainSpec {
            curves: vec![BoundaryCurve::hole(c(0.0), 0.1, e(), 8), BoundaryCurve::hole(c(5.0), 0.1, e(), 8)],
            epsilon: 0.1,
        };
        assert!(matches!(assemble(&two_holes), Err(HemmedError::InvalidSpec(_))));
        // z + 0.9 z^{-1}... folds |z| = 1 onto a segment-like curve at 0.999
        let folded = HemmedDomainSpec { curves: vec![BoundaryCurve::new(vec![(-1, c(1.0)), (1, c(1.0))], e(), 8)], epsilon: 0.1 };
        assert!(matches!(assemble(&folded), Err(HemmedError::NotInjective(0)) | Err(HemmedError::InvalidSpec(_))));
    }

    #[test]
    fn graded_sides_are_bounded() {
        let p = graded_side(3.0, 0.01, 0.2);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 3.0);
        assert!((p[1] - 0.01).abs() < 1e-15);
        for w in p.windows(3) {
            let r = (w[2] - w[1]) / (w[1] - w[0]);
            assert!(r < 3.0 && r > 1.0 / 3.0, "{r}");
        }
        assert_eq!(graded_side(0.5, 1.0, 1.0), vec![0.0, 0.5]);
    }

    #[test]
    fn disc_lattice_and_strip() {
        let spec = disc(12, 0.1);
        let fill = lattice_fill(&spec).unwrap();
        assert_eq!(fill.alpha.len(), 1);
        assert!(fill.mesh.validate(1e-12).is_valid());
        let strips = build_strip_maps(&spec, &fill).unwrap();
        let s = &strips[0];
        assert_eq!(s.heights[0], 0.0);
        assert!(s.heights.windows(2).all(|w| w[1] > w[0]) && *s.heights.last().unwrap() < TAU);
        assert!(s.lifts.iter().all(|z| z.re > 0.0 && z.re <= s.rho + 1e-9));
        // vertices of α go to the right side of Q
        for (z, h) in s.lifts.iter().zip(&s.heights) {
            let q = s.forward(*z).unwrap();
            assert!((q - Complex::new(s.rho, *h)).norm() < 1e-9, "{q} {h}");
            assert!((s.inverse(q).unwrap() - z).norm() < 1e-9);
        }
        // round trip inside the strip
        for j in 0..20 {
            let q = Complex::new(s.rho * (j as f64 + 0.5) / 20.0, 0.3 * j as f64);
            let z = s.inverse(q).unwrap();
            assert!((s.forward(z).unwrap() - q).norm() < 1e-9);
        }
        let diag = strip_diagnostics(s).unwrap();
        assert!(diag.length_residual < 1e-9, "{diag:?}");
        assert!(diag.periodicity_residual < 1e-9, "{diag:?}");
        assert!(diag.dilatation.is_finite());
    }

    #[test]
    fn disc_assembly() {
        let t = assemble(&disc(12, 0.1)).unwrap();
        assert_eq!(t.surface.euler_characteristic(), 1);
        let cycles = t.surface.boundary_cycles();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 12);
        assert!(t.source.validate(1e-12).is_valid());
        assert!(t.report.per_face[..t.lattice_faces].iter().all(|&k| (k - 1.0).abs() < 1e-9));
        assert!(t.report.max_k.is_finite());
        // the source is bounded by the inscribed 12-gon
        assert!((t.report.total_area - 6.0 * math::sin(TAU / 12.0)).abs() < 1e-9, "{}", t.report.total_area);
        // the boundary slots run along the circle in the expected order
        for (j, slot) in t.boundary_slots[0].iter().enumerate() {
            let f = t.source.faces[slot.face];
            let s = slot.side as usize;
            let (a, b) = (t.source.vertices[f[s]], t.source.vertices[f[(s + 1) % 3]]);
            let x0 = math::cis(TAU * j as f64 / 12.0).conj();
            let x1 = math::cis(TAU * (j + 1) as f64 / 12.0).conj();
            assert!((a - x1).norm() < 1e-12 && (b - x0).norm() < 1e-12);
        }
    }

    #[test]
    fn annulus_assembly() {
        let t = assemble(&annulus(0.2, 2.0, 12, 0.1)).unwrap();
        assert_eq!(t.surface.euler_characteristic(), 0);
        let cycles = t.surface.boundary_cycles();
        assert_eq!(cycles.len(), 2);
        assert!(cycles.iter().all(|c| c.len() == 12));
        assert!(t.source.validate(1e-12).is_valid());
        for d in &t.diagnostics {
            assert!(d.length_residual < 1e-9 && d.periodicity_residual < 1e-9, "{d:?}");
        }
    }

    #[test]
    fn chains_glue_along_interfaces() {
        let ring = |inner: f64, d_in: usize, d_out: usize| HemmedDomainSpec {
            curves: vec![BoundaryCurve::hole(c(0.0), inner, e(), d_in), BoundaryCurve::outer(c(0.0), 10.0 * inner, e(), d_out)],
            epsilon: inner * 0.5,
        };
        let chain = chain_assemble(&[ring(0.1, 12, 12), ring(1.0, 12, 12), ring(10.0, 12, 12)]).unwrap();
        assert_eq!(chain.interfaces.len(), 2);
        assert_eq!(chain.surface.euler_characteristic(), 0);
        assert_eq!(chain.surface.boundary_cycles().len(), 2);
        assert!(chain.interface_degree <= 2 * chain.piece_degree - 2);
        assert_eq!(chain_assemble(&[ring(0.1, 12, 12), ring(1.0, 16, 12)]).unwrap_err(), HemmedError::DegreeMismatch(12, 16));
        let mut wrong = ring(1.0, 12, 12);
        wrong.curves[0] = BoundaryCurve::outer(c(0.0), 1.0, e(), 12);
        assert_eq!(chain_assemble(&[ring(0.1, 12, 12), wrong]).unwrap_err(), HemmedError::OrientationMismatch(0, 1));
    }
}
