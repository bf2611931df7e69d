//! The Belyi function of an equilateral surface.
//!
//! Each face is identified affinely with the triangle `Δ` whose vertices are
//! the cube roots of unity, `Δ` is mapped to the unit disc by the conformal
//! map `ψ` fixing `0` and `1`, and the disc is sent to the sphere.
//!
//! Two evaluators are provided:
//!
//! - [`BelyiEvaluator::barycentric`] applies `F₃(z) = ½(z³ + z⁻³)` to every
//!   face of an arbitrary surface. Face corners go to `1`, edge midpoints to
//!   `-1` and face centres to `∞`; its dessin is the canonical colouring of
//!   the barycentric subdivision.
//! - [`BelyiEvaluator::new`] takes a 3-coloured surface and sends each face
//!   onto a half-plane, with every corner going to its colour. The disc is
//!   carried to the half-plane by a Möbius map; on each sixth of `Δ` this
//!   agrees with `F₃ ∘ ψ` up to the conformal identification of a coloured
//!   face with that sixth.
//!
//! `ψ` is the inverse of the Schwarz–Christoffel map
//! `S(z) = c ∫₀^z (1 - t³)^{-2/3} dt`. Near the vertex `1` the substitution
//! `1 - t = v³` turns the integrand into `3 (1 + t + t²)^{-2/3}`, which is
//! analytic on the whole region needed once `w` has been rotated into the
//! sector of its nearest vertex.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::math::{self, FRAC_PI_3, PI, TAU};
use crate::surface::{Colour, Colouring, Corner, EquilateralSurface, Slot};
use crate::Complex;

const QUAD_TOL: f64 = 1e-15;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(Complex),
    Infinity,
}

impl Extended {
    pub fn real(x: f64) -> Self {
        Extended::Finite(Complex::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinity)
    }

    /// Chordal distance on the sphere of diameter 2 (so `d(0, ∞) = 2`).
    pub fn chordal_distance(&self, other: &Extended) -> f64 {
        match (self, other) {
            (Extended::Infinity, Extended::Infinity) => 0.0,
            (Extended::Finite(a), Extended::Infinity) | (Extended::Infinity, Extended::Finite(a)) => {
                2.0 / math::sqrt(1.0 + a.norm_sqr())
            }
            (Extended::Finite(a), Extended::Finite(b)) => {
                2.0 * (a - b).norm() / math::sqrt((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr()))
            }
        }
    }

    pub fn of_colour(c: Colour) -> Self {
        match c {
            Colour::One => Extended::real(1.0),
            Colour::MinusOne => Extended::real(-1.0),
            Colour::Infinity => Extended::Infinity,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BelyiError {
    #[error("point lies outside the reference triangle")]
    OutsideTriangle,
    #[error("quadrature did not converge (error estimate {0:e})")]
    QuadratureFailure(f64),
    #[error("Newton inversion of the Schwarz–Christoffel map did not converge")]
    InversionFailure,
    #[error("colouring does not give every face three distinct colours")]
    InvalidColouring,
    #[error("face {0} is out of range")]
    FaceOutOfRange(usize),
}

/// `F₃(z) = ½(z³ + z⁻³)`.
#[allow(non_snake_case)]
pub fn F3(z: Extended) -> Extended {
    match z {
        Extended::Infinity => Extended::Infinity,
        Extended::Finite(z) if z.norm() == 0.0 => Extended::Infinity,
        Extended::Finite(z) => {
            let c = z * z * z;
            Extended::Finite((c + c.inv()) * 0.5)
        }
    }
}

/// `F₃'(z) = (3/2)(z² - z⁻⁴)`.
pub fn f3_derivative(z: Complex) -> Complex {
    (z * z - z.powi(-4)) * 1.5
}

/// `F₃ = P / Q` with `P = z⁶ + 1` and `Q = 2z³`, as coefficient lists in
/// increasing degree.
pub fn f3_rational() -> (Vec<f64>, Vec<f64>) {
    (vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 2.0])
}

/// Critical points of `F₃` in `ℂ*`, found as the roots of the numerator of
/// `P'Q - PQ'`.
pub fn f3_critical_points() -> Option<Vec<Complex>> {
    let (p, q) = f3_rational();
    let deriv = |c: &[f64]| -> Vec<f64> { c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect() };
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let lhs = mul(&deriv(&p), &q);
    let rhs = mul(&p, &deriv(&q));
    let n = lhs.len().max(rhs.len());
    let mut num: Vec<f64> = (0..n).map(|k| lhs.get(k).unwrap_or(&0.0) - rhs.get(k).unwrap_or(&0.0)).collect();
    // strip the z^k factor: those roots sit at the pole 0, not in ℂ*
    while num.first() == Some(&0.0) {
        num.remove(0);
    }
    let coeffs: Vec<Complex> = num.iter().map(|&x| Complex::new(x, 0.0)).collect();
    math::poly_roots(&coeffs)
}

/// Pole orders of `F₃` at `0` and at `∞`, read off the rational form.
pub fn f3_pole_orders() -> (usize, usize) {
    let (p, q) = f3_rational();
    let low = |c: &[f64]| c.iter().position(|x| *x != 0.0).unwrap_or(0);
    let high = |c: &[f64]| c.iter().rposition(|x| *x != 0.0).unwrap_or(0);
    (low(&q) - low(&p), high(&p) - high(&q))
}

fn omega(k: i32) -> Complex {
    math::cis(TAU * k as f64 / 3.0)
}

/// `∫₀^1 (1 - t³)^{-2/3} dt = Γ(1/3)² / (3 Γ(2/3))`.
fn sc_scale() -> f64 {
    let g13 = libm::tgamma(1.0 / 3.0);
    g13 * g13 / (3.0 * libm::tgamma(2.0 / 3.0))
}

// (1 + t + t²)^{-2/3} at t = 1 - v³
fn vertex_integrand(v: Complex) -> Complex {
    let t = Complex::new(1.0, 0.0) - v * v * v;
    (t * t + t + 1.0).powf(-2.0 / 3.0)
}

/// `S` in the vertex variable `u = (1 - z)^{1/3}`: `1 - c ∫₀^u 3 g dv`.
fn sc_vertex(u: Complex, c: f64) -> Result<Complex, BelyiError> {
    let integral = math::integrate(|s| vertex_integrand(u * s), 0.0, 1.0, QUAD_TOL)
        .map_err(|e| BelyiError::QuadratureFailure(e.estimate))?;
    Ok(Complex::new(1.0, 0.0) - u * integral * (3.0 * c))
}

/// Index of the vertex of `Δ` nearest to `w`.
fn nearest_vertex(w: Complex) -> i32 {
    (0..3)
        .max_by(|&a, &b| {
            let da = (w * omega(-a)).re;
            let db = (w * omega(-b)).re;
            da.partial_cmp(&db).unwrap()
        })
        .unwrap()
}

fn inside_triangle(w: Complex, tol: f64) -> bool {
    (0..3).all(|k| (w * omega(-k)).re >= -0.5 - tol)
}

/// The Schwarz–Christoffel map `S: 𝔻̄ → Δ`, the inverse of [`psi`].
pub fn psi_inverse(z: Complex) -> Result<Complex, BelyiError> {
    if z.norm() > 1.0 + 1e-12 {
        return Err(BelyiError::OutsideTriangle);
    }
    let k = nearest_vertex(z);
    let zr = z * omega(-k);
    let u = (Complex::new(1.0, 0.0) - zr).powf(1.0 / 3.0);
    Ok(sc_vertex(u, 1.0 / sc_scale())? * omega(k))
}

/// The conformal map `ψ: Δ → 𝔻` fixing `0` and `1`.
pub fn psi(w: Complex) -> Result<Complex, BelyiError> {
    if !inside_triangle(w, 1e-12) {
        return Err(BelyiError::OutsideTriangle);
    }
    if w.norm() == 0.0 {
        return Ok(w);
    }
    let c = 1.0 / sc_scale();
    let k = nearest_vertex(w);
    let wr = w * omega(-k);
    let one = Complex::new(1.0, 0.0);
    if (wr - one).norm() == 0.0 {
        return Ok(omega(k));
    }
    // start from the identity guess z = w, which is exact at 0 and the vertices
    let mut u = (one - wr).powf(1.0 / 3.0);
    let mut r = sc_vertex(u, c)? - wr;
    for _ in 0..60 {
        if r.norm() < 1e-15 {
            break;
        }
        let d = vertex_integrand(u) * (-3.0 * c);
        let step = r / d;
        let mut t = 1.0;
        loop {
            let cand = u - step * t;
            // |u| ≤ 1 covers the whole sector; beyond 1.2 the integrand is singular
            if cand.norm() <= 1.1 {
                let rc = sc_vertex(cand, c)? - wr;
                if rc.norm() < r.norm() || t < 1e-6 {
                    u = cand;
                    r = rc;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-9 {
                return Err(BelyiError::InversionFailure);
            }
        }
    }
    if r.norm() > 1e-12 {
        return Err(BelyiError::InversionFailure);
    }
    let mut z = one - u * u * u;
    if z.norm() > 1.0 {
        z /= z.norm();
    }
    Ok(z * omega(k))
}

/// `ψ'(w) = (1 - z³)^{2/3} / c` with `z = ψ(w)`.
fn psi_derivative_at(z: Complex) -> Complex {
    (Complex::new(1.0, 0.0) - z * z * z).powf(2.0 / 3.0) * sc_scale()
}

/// How a coloured face sits over the sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Frame {
    /// Corner coloured `1`; it goes to the vertex `1` of `Δ`.
    rot: u8,
    /// Image of the disc point that goes to `-1` (either `ω` or `ω²`).
    minus_one_at: Complex,
    /// Image of the disc point that goes to `∞`.
    pole_at: Complex,
}

impl Frame {
    fn lambda(&self) -> Complex {
        let one = Complex::new(1.0, 0.0);
        (one - self.pole_at) * 2.0 / (one - self.minus_one_at)
    }

    fn mobius(&self, z: Complex) -> Extended {
        let den = z - self.pole_at;
        if den.norm() == 0.0 {
            return Extended::Infinity;
        }
        Extended::Finite(self.lambda() * (z - self.minus_one_at) / den - 1.0)
    }

    fn mobius_derivative(&self, z: Complex) -> Complex {
        let den = z - self.pole_at;
        self.lambda() * (self.minus_one_at - self.pole_at) / (den * den)
    }

    fn mobius_inverse(&self, v: Complex) -> Complex {
        let l = self.lambda();
        ((v + 1.0) * self.pole_at - l * self.minus_one_at) / (v + 1.0 - l)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Mode {
    Barycentric,
    Coloured { colouring: Colouring, frames: Vec<Frame> },
}

/// Evaluates the Belyi function of an equilateral surface.
#[derive(Clone, Debug, PartialEq)]
pub struct BelyiEvaluator {
    surface: EquilateralSurface,
    mode: Mode,
}

impl BelyiEvaluator {
    /// Evaluator for a 3-coloured surface: every face is carried onto a
    /// half-plane with each corner going to its colour.
    pub fn new(surface: EquilateralSurface, colouring: Colouring) -> Result<Self, BelyiError> {
        if !colouring.is_valid_for(&surface) {
            return Err(BelyiError::InvalidColouring);
        }
        let frames = (0..surface.face_count())
            .map(|f| {
                let cols = surface.face_vertices(f).map(|v| colouring.colours[v]);
                let rot = cols.iter().position(|c| *c == Colour::One).unwrap() as u8;
                let next = cols[(rot as usize + 1) % 3];
                let (m, p) = if next == Colour::MinusOne { (omega(1), omega(2)) } else { (omega(2), omega(1)) };
                Frame { rot, minus_one_at: m, pole_at: p }
            })
            .collect();
        Ok(BelyiEvaluator { surface, mode: Mode::Coloured { colouring, frames } })
    }

    /// Evaluator applying `F₃ ∘ ψ` on every face, so that corners go to `1`,
    /// edge midpoints to `-1` and face centres to `∞`.
    pub fn barycentric(surface: EquilateralSurface) -> Self {
        BelyiEvaluator { surface, mode: Mode::Barycentric }
    }

    pub fn surface(&self) -> &EquilateralSurface {
        &self.surface
    }

    pub fn colouring(&self) -> Option<&Colouring> {
        match &self.mode {
            Mode::Coloured { colouring, .. } => Some(colouring),
            Mode::Barycentric => None,
        }
    }

    fn rotation(&self, face: usize) -> u8 {
        match &self.mode {
            Mode::Coloured { frames, .. } => frames[face].rot,
            Mode::Barycentric => 0,
        }
    }

    /// Position of face corner `k` in the chart of `face`.
    fn chart_vertex(&self, face: usize, k: u8) -> Complex {
        let r = self.rotation(face) as i32;
        omega((k as i32 - r).rem_euclid(3))
    }

    fn chart_point(&self, face: usize, bary: [f64; 3]) -> Result<Complex, BelyiError> {
        if face >= self.surface.face_count() {
            return Err(BelyiError::FaceOutOfRange(face));
        }
        let sum: f64 = bary.iter().sum();
        if bary.iter().any(|b| *b < -1e-12) || sum.abs() < 1e-300 {
            return Err(BelyiError::OutsideTriangle);
        }
        let w: Complex = (0..3).map(|k| self.chart_vertex(face, k as u8) * (bary[k] / sum)).sum();
        // the cube roots of unity do not cancel exactly in floating point
        Ok(if w.norm() < 1e-15 { Complex::new(0.0, 0.0) } else { w })
    }

    /// Value at a chart point `w ∈ Δ` of `face`.
    fn eval_chart(&self, face: usize, w: Complex) -> Result<Extended, BelyiError> {
        let z = psi(w)?;
        Ok(match &self.mode {
            Mode::Barycentric => F3(Extended::Finite(z)),
            Mode::Coloured { frames, .. } => frames[face].mobius(z),
        })
    }

    /// Derivative with respect to the chart coordinate, or `None` at a pole.
    fn derivative_chart(&self, face: usize, w: Complex) -> Result<Option<Complex>, BelyiError> {
        let z = psi(w)?;
        let dpsi = psi_derivative_at(z);
        Ok(match &self.mode {
            Mode::Barycentric => (z.norm() > 0.0).then(|| f3_derivative(z) * dpsi),
            Mode::Coloured { frames, .. } => {
                ((z - frames[face].pole_at).norm() > 0.0).then(|| frames[face].mobius_derivative(z) * dpsi)
            }
        })
    }

    /// Chart points of `face` over the regular value `v`.
    fn preimages_in_face(&self, face: usize, v: Complex) -> Result<Vec<Complex>, BelyiError> {
        let zs: Vec<Complex> = match &self.mode {
            Mode::Coloured { frames, .. } => vec![frames[face].mobius_inverse(v)],
            Mode::Barycentric => {
                // F₃(z) = v  ⇔  (z³)² - 2v z³ + 1 = 0
                let disc = (v * v - 1.0).sqrt();
                let c = [v + disc, v - disc].into_iter().min_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap();
                let r = c.powf(1.0 / 3.0);
                (0..3).map(|k| r * omega(k)).collect()
            }
        };
        zs.into_iter().filter(|z| z.norm() < 1.0 - 1e-12).map(psi_inverse).collect()
    }
}

/// Value of the Belyi function at a barycentric point of `face`
/// (coordinates refer to the face corners `0, 1, 2`).
pub fn belyi_eval(ev: &BelyiEvaluator, face: usize, bary: [f64; 3]) -> Result<Extended, BelyiError> {
    let w = ev.chart_point(face, bary)?;
    let sum: f64 = bary.iter().sum();
    if let Some(k) = bary.iter().position(|b| *b == sum) {
        if let Mode::Coloured { colouring, .. } = &ev.mode {
            let v = ev.surface.vertex(Corner::new(face, k as u8));
            return Ok(Extended::of_colour(colouring.colours[v]));
        }
        return Ok(Extended::real(1.0));
    }
    ev.eval_chart(face, w)
}

/// Critical behaviour at one special point.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalDegree {
    /// Vertex class of the surface, or `None` for an edge midpoint or face
    /// centre of the barycentric evaluator.
    pub vertex: Option<usize>,
    pub value: Colour,
    pub link: usize,
    pub expected: usize,
    pub measured: usize,
}

/// Result of [`verify_branched_cover`].
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedCoverReport {
    /// Largest chordal gap between the two sides of a glued edge.
    pub continuity_residual: f64,
    /// Local degrees at interior special points.
    pub local_degrees: Vec<LocalDegree>,
    pub degrees_match: bool,
    pub max_local_degree: usize,
    /// Smallest spherical derivative over interior samples; positive means
    /// no critical point was seen away from the vertices.
    pub min_spherical_derivative: f64,
    /// Test value and number of preimages found for it.
    pub preimage_counts: Vec<(Complex, usize)>,
    pub counts_constant: bool,
    /// Largest `|f(p) - v|` over the preimages found.
    pub preimage_residual: f64,
}

impl BranchedCoverReport {
    pub fn is_branched_cover(&self) -> bool {
        self.degrees_match && self.min_spherical_derivative > 0.0 && self.counts_constant && self.continuity_residual < 1e-6
    }
}

/// Largest chordal distance between the two evaluations of each glued edge
/// at `samples` interior points per edge.
pub fn edge_continuity_residual(ev: &BelyiEvaluator, samples: usize) -> Result<f64, BelyiError> {
    let mut worst: f64 = 0.0;
    for (a, b) in ev.surface.gluings() {
        for i in 1..=samples {
            let s = i as f64 / (samples + 1) as f64;
            let va = belyi_eval(ev, a.face, side_point(a, s))?;
            let vb = belyi_eval(ev, b.face, side_point(b, 1.0 - s))?;
            worst = worst.max(va.chordal_distance(&vb));
        }
    }
    Ok(worst)
}

fn side_point(slot: Slot, s: f64) -> [f64; 3] {
    let mut b = [0.0; 3];
    b[slot.side as usize] = 1.0 - s;
    b[(slot.side as usize + 1) % 3] = s;
    b
}

/// Phase change of `f` (or of `1/f` when `target` is `∞`) about `target`
/// along `w(θ) = centre + r e^{iθ}` for θ from `a` to `b`.
fn arc_phase(
    ev: &BelyiEvaluator,
    face: usize,
    centre: Complex,
    r: f64,
    a: f64,
    b: f64,
    target: Colour,
) -> Result<f64, BelyiError> {
    const STEPS: usize = 48;
    let phase = |v: Extended| -> f64 {
        match (v, target) {
            (Extended::Finite(x), Colour::Infinity) => -x.arg(),
            (Extended::Finite(x), Colour::One) => (x - 1.0).arg(),
            (Extended::Finite(x), Colour::MinusOne) => (x + 1.0).arg(),
            (Extended::Infinity, _) => 0.0,
        }
    };
    let mut total = 0.0;
    let mut prev = phase(ev.eval_chart(face, centre + math::cis(a) * r)?);
    for i in 1..=STEPS {
        let th = a + (b - a) * i as f64 / STEPS as f64;
        let cur = phase(ev.eval_chart(face, centre + math::cis(th) * r)?);
        let mut d = cur - prev;
        while d > PI {
            d -= TAU;
        }
        while d < -PI {
            d += TAU;
        }
        total += d;
        prev = cur;
    }
    Ok(total)
}

fn winding(total_phase: f64) -> usize {
    math::round(total_phase.abs() / TAU) as usize
}

/// Checks that the evaluator behaves as a branched cover over `{-1, 1, ∞}`:
/// edge continuity, local degrees at interior special points, absence of
/// critical points at interior samples, and constant preimage counts over a
/// set of non-real test values.
pub fn verify_branched_cover(ev: &BelyiEvaluator, samples_per_face: usize) -> Result<BranchedCoverReport, BelyiError> {
    let s = &ev.surface;
    let continuity_residual = edge_continuity_residual(ev, 5)?;
    // F₃ - 1 vanishes to sixth order in w at a corner, so the circle must
    // not be too small for the phase to survive rounding
    let r = 0.1;
    let mut local_degrees = Vec::new();

    for link in s.vertex_links() {
        if !link.closed {
            continue;
        }
        let c0 = link.corners[0];
        let v = s.vertex(c0);
        let value = match &ev.mode {
            Mode::Coloured { colouring, .. } => colouring.colours[v],
            Mode::Barycentric => Colour::One,
        };
        let mut total = 0.0;
        for c in &link.corners {
            let p = ev.chart_vertex(c.face, c.corner);
            let q = ev.chart_vertex(c.face, (c.corner + 1) % 3);
            let start = (q - p).arg();
            total += arc_phase(ev, c.face, p, r, start, start + FRAC_PI_3, value)?;
        }
        let n = link.corners.len();
        let expected = match ev.mode {
            Mode::Coloured { .. } => n / 2,
            Mode::Barycentric => n,
        };
        local_degrees.push(LocalDegree { vertex: Some(v), value, link: n, expected, measured: winding(total) });
    }

    if ev.mode == Mode::Barycentric {
        for (a, b) in s.gluings() {
            let mut total = 0.0;
            for slot in [a, b] {
                let p = ev.chart_vertex(slot.face, slot.side);
                let q = ev.chart_vertex(slot.face, (slot.side + 1) % 3);
                let mid = (p + q) * 0.5;
                let start = (q - p).arg();
                total += arc_phase(ev, slot.face, mid, r, start, start + PI, Colour::MinusOne)?;
            }
            local_degrees.push(LocalDegree { vertex: None, value: Colour::MinusOne, link: 4, expected: 2, measured: winding(total) });
        }
        for f in 0..s.face_count() {
            let total = arc_phase(ev, f, Complex::new(0.0, 0.0), r, 0.0, TAU, Colour::Infinity)?;
            local_degrees.push(LocalDegree { vertex: None, value: Colour::Infinity, link: 6, expected: 3, measured: winding(total) });
        }
    }

    let degrees_match = local_degrees.iter().all(|d| d.measured == d.expected);
    let max_local_degree = local_degrees.iter().map(|d| d.measured).max().unwrap_or(0);

    // interior barycentric grid, avoiding face centres where the
    // barycentric evaluator has its poles
    let n = samples_per_face.max(1);
    let mut min_spherical_derivative = f64::INFINITY;
    for f in 0..s.face_count() {
        for i in 1..=n {
            for j in 1..=n {
                let (a, b) = (i as f64 / (n + 2) as f64, j as f64 / (n + 2) as f64);
                if a + b >= 1.0 {
                    continue;
                }
                let w = ev.chart_point(f, [a, b, 1.0 - a - b])?;
                if w.norm() < 1e-3 {
                    continue;
                }
                if let (Some(d), Extended::Finite(val)) = (ev.derivative_chart(f, w)?, ev.eval_chart(f, w)?) {
                    min_spherical_derivative = min_spherical_derivative.min(d.norm() / (1.0 + val.norm_sqr()));
                }
            }
        }
    }

    let tests = [
        Complex::new(0.3, 0.7),
        Complex::new(0.3, -0.7),
        Complex::new(-2.0, 0.5),
        Complex::new(5.0, -3.0),
        Complex::new(0.01, 0.02),
    ];
    let mut preimage_counts = Vec::new();
    let mut preimage_residual: f64 = 0.0;
    for &v in &tests {
        let mut count = 0;
        for f in 0..s.face_count() {
            for w in ev.preimages_in_face(f, v)? {
                count += 1;
                if let Extended::Finite(x) = ev.eval_chart(f, w)? {
                    preimage_residual = preimage_residual.max((x - v).norm() / (1.0 + v.norm()));
                } else {
                    preimage_residual = f64::INFINITY;
                }
            }
        }
        preimage_counts.push((v, count));
    }
    let counts_constant = preimage_counts.windows(2).all(|w| w[0].1 == w[1].1);

    Ok(BranchedCoverReport {
        continuity_residual,
        local_degrees,
        degrees_match,
        max_local_degree,
        min_spherical_derivative,
        preimage_counts,
        counts_constant,
        preimage_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{barycentric_subdivide, canonical_three_colouring, double_triangle, snowsphere, tetrahedron};
    use proptest::prelude::*;

    fn close(a: Extended, b: Extended, tol: f64) -> bool {
        a.chordal_distance(&b) <= tol
    }

    #[test]
    fn f3_values() {
        assert_eq!(F3(Extended::real(1.0)), Extended::real(1.0));
        assert!(close(F3(Extended::Finite(math::cis(FRAC_PI_3))), Extended::real(-1.0), 1e-15));
        assert!(close(F3(Extended::Finite(Complex::new(0.0, 1.0))), Extended::real(0.0), 1e-15));
        assert!(F3(Extended::real(0.0)).is_infinite());
        assert!(F3(Extended::Infinity).is_infinite());
    }

    #[test]
    fn f3_critical_structure() {
        let crit = f3_critical_points().unwrap();
        assert_eq!(crit.len(), 6);
        for z in &crit {
            assert!((z.powu(6) - 1.0).norm() < 1e-12);
            let Extended::Finite(v) = F3(Extended::Finite(*z)) else { panic!() };
            let k = math::round(z.arg() / FRAC_PI_3) as i32;
            let expect = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert!((v - expect).norm() < 1e-12);
            assert!(f3_derivative(*z).norm() < 1e-12);
        }
        assert_eq!(f3_pole_orders(), (3, 3));
    }

    #[test]
    fn psi_normalisation() {
        assert_eq!(psi(Complex::new(0.0, 0.0)).unwrap(), Complex::new(0.0, 0.0));
        assert_eq!(psi(Complex::new(1.0, 0.0)).unwrap(), Complex::new(1.0, 0.0));
        let mid = (Complex::new(1.0, 0.0) + omega(1)) * 0.5;
        assert!((psi(mid).unwrap() - math::cis(FRAC_PI_3)).norm() < 1e-8);
        assert!((psi(omega(2)).unwrap() - omega(2)).norm() < 1e-15);
        assert_eq!(psi(Complex::new(-0.6, 0.0)), Err(BelyiError::OutsideTriangle));
        // the disc → triangle map sends the unit point to the vertex
        assert!((psi_inverse(Complex::new(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        assert!((psi_inverse(math::cis(FRAC_PI_3)).unwrap() - mid).norm() < 1e-12);
    }

    fn triangle_point(a: f64, b: f64) -> Complex {
        // a, b ∈ [0, 1) folded into barycentric coordinates
        let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
        omega(0) * a + omega(1) * b + omega(2) * (1.0 - a - b)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn psi_is_equivariant(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let w = triangle_point(a, b);
            let z = psi(w).unwrap();
            prop_assert!(z.norm() <= 1.0 + 1e-12);
            prop_assert!((psi(w * omega(1)).unwrap() - z * omega(1)).norm() < 1e-12);
            prop_assert!((psi(w.conj()).unwrap() - z.conj()).norm() < 1e-12);
            prop_assert!((psi_inverse(z).unwrap() - w).norm() < 1e-11);
        }

        #[test]
        fn f3_boundary_symmetry(t in 0.0f64..TAU) {
            let z = Extended::Finite(math::cis(t));
            let rz = Extended::Finite(math::cis(t + 2.0 * FRAC_PI_3));
            let cz = Extended::Finite(math::cis(-t));
            // a sixth turn changes the sign instead
            let hz = Extended::Finite(math::cis(t + FRAC_PI_3));
            prop_assert!(F3(z).chordal_distance(&F3(rz)) < 1e-14);
            prop_assert!(F3(z).chordal_distance(&F3(cz)) < 1e-14);
            let (Extended::Finite(a), Extended::Finite(b)) = (F3(z), F3(hz)) else { unreachable!() };
            prop_assert!((a + b).norm() < 1e-14 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn barycentric_evaluator_special_points() {
        let ev = BelyiEvaluator::barycentric(tetrahedron());
        for f in 0..4 {
            assert_eq!(belyi_eval(&ev, f, [0.0, 1.0, 0.0]).unwrap(), Extended::real(1.0));
            assert!(belyi_eval(&ev, f, [1.0, 1.0, 1.0]).unwrap().is_infinite());
            let m = belyi_eval(&ev, f, [0.5, 0.5, 0.0]).unwrap();
            assert!(close(m, Extended::real(-1.0), 1e-8));
        }
        assert!(edge_continuity_residual(&ev, 5).unwrap() < 1e-9);
    }

    #[test]
    fn coloured_evaluator_on_subdivided_double_triangle() {
        let sub = barycentric_subdivide(&double_triangle());
        let col = canonical_three_colouring(&sub).unwrap();
        let ev = BelyiEvaluator::new(sub.surface.clone(), col.clone()).unwrap();
        for f in 0..sub.surface.face_count() {
            for k in 0..3 {
                let mut b = [0.0; 3];
                b[k] = 1.0;
                let v = sub.surface.vertex(Corner::new(f, k as u8));
                assert_eq!(belyi_eval(&ev, f, b).unwrap(), Extended::of_colour(col.colours[v]));
                // approaching the corner gives the same value
                let mut near = [1e-9; 3];
                near[k] = 1.0;
                assert!(close(ev.eval_chart(f, ev.chart_point(f, near).unwrap()).unwrap(), Extended::of_colour(col.colours[v]), 1e-5));
            }
        }
        let report = verify_branched_cover(&ev, 4).unwrap();
        assert!(report.is_branched_cover(), "{report:?}");
        assert!(report.preimage_residual < 1e-10);
        // closed surface: every regular value has F/2 preimages
        assert_eq!(report.preimage_counts[0].1, sub.surface.face_count() / 2);
    }

    #[test]
    fn barycentric_and_coloured_degrees_agree() {
        let s = snowsphere();
        let direct = verify_branched_cover(&BelyiEvaluator::barycentric(s.clone()), 3).unwrap();
        let sub = barycentric_subdivide(&s);
        let col = canonical_three_colouring(&sub).unwrap();
        let coloured = verify_branched_cover(&BelyiEvaluator::new(sub.surface, col).unwrap(), 3).unwrap();
        assert!(direct.is_branched_cover(), "{direct:?}");
        assert!(coloured.is_branched_cover(), "{coloured:?}");
        assert_eq!(direct.max_local_degree, coloured.max_local_degree);
        assert_eq!(direct.preimage_counts[0].1, coloured.preimage_counts[0].1);
        let mut a: Vec<usize> = direct.local_degrees.iter().map(|d| d.measured).collect();
        let mut b: Vec<usize> = coloured.local_degrees.iter().map(|d| d.measured).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let s = tetrahedron();
        let bad = Colouring { colours: vec![Colour::One; s.vertex_count()] };
        assert_eq!(BelyiEvaluator::new(s.clone(), bad), Err(BelyiError::InvalidColouring));
        let ev = BelyiEvaluator::barycentric(s);
        assert_eq!(belyi_eval(&ev, 99, [1.0, 0.0, 0.0]), Err(BelyiError::FaceOutOfRange(99)));
        assert_eq!(belyi_eval(&ev, 0, [1.5, -0.5, 0.0]), Err(BelyiError::OutsideTriangle));
    }
}
