//! Bounded-angle triangulation of a rectangle whose boundary vertices are
//! prescribed.
//!
//! The rectangle is normalized to `[0, m] × [0, 1]` by an axis stretch. Its
//! interior is covered by dyadic Whitney squares; near each side a polygonal
//! arc `σ` runs at height `d_k` above partition point `x_k`, where `d_k` is
//! the center of the dyadic interval containing `D_k / 8λ`. Squares lying
//! strictly inside all four arcs are kept; their union is bounded by an
//! axis-parallel polygon `γ`. The region between `γ` and the rectangle is
//! fanned from partition points, and the kept squares are split by fixed
//! templates. No vertex is added on the rectangle boundary or on `γ`.

mod layout;
mod mesh;

pub use layout::{build_sigma, kept_squares, whitney_decompose, DyadicSquare, Sigma, WhitneyLayout};
pub use mesh::{rect_triangulation, rect_triangulation_with, MeshProfile, RectTriangulation};

use alloc::vec::Vec;
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::math;
use crate::Complex;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum RectError {
    #[error("rectangle dimensions must be positive")]
    NonpositiveDimensions,
    #[error("edge length must be positive")]
    NonpositiveLength,
    #[error("edge length {length} exceeds lambda {lambda}")]
    LengthExceedsLambda { length: f64, lambda: f64 },
    #[error("malformed partition: {0}")]
    MalformedPartition(&'static str),
    #[error("partition violates bounded geometry at edge {edge}: {reason}")]
    BoundedGeometryViolation { edge: usize, reason: &'static str },
    #[error("sigma arcs at corner {0} do not cross in the expected dyadic square")]
    CornerIntersectionFailure(usize),
    #[error("gamma is not monotone over edge {edge} of side {side}")]
    NonMonotoneGammaOverEdge { side: usize, edge: usize },
    #[error("gamma is not horizontal above partition point {point} of side {side}")]
    GammaNotHorizontal { side: usize, point: usize },
    #[error("the union of kept squares is not bounded by a single simple polygon")]
    GammaNotSimple,
}

/// `(m, a)`: after scaling the height to 1, the width becomes the integer
/// `m = ceil(w / h)` once the height is stretched by `a = m h / w ∈ [1, 2)`.
pub fn normalize_rectangle(w: f64, h: f64) -> Result<(u64, f64), RectError> {
    if !(w > 0.0 && h > 0.0) || !w.is_finite() || !h.is_finite() {
        return Err(RectError::NonpositiveDimensions);
    }
    if w < h {
        return Err(RectError::MalformedPartition("width must not be smaller than height"));
    }
    let ratio = w / h;
    let m = math::ceil(ratio);
    Ok((m as u64, m / ratio))
}

/// Returns `(j, d)` with `D/(8λ) ∈ (2^{-j-1}, 2^{-j}]`, `j ≥ 3` and
/// `d = (3/4)·2^{-j}`.
pub fn select_dk(length: f64, lambda: f64) -> Result<(u32, Dyadic), RectError> {
    if !(length > 0.0) {
        return Err(RectError::NonpositiveLength);
    }
    if length > lambda {
        return Err(RectError::LengthExceedsLambda { length, lambda });
    }
    // 8λ·2^{-j} is an exact power-of-two scaling, so the comparisons are exact
    let eight_lambda = 8.0 * lambda;
    let mut j = 3u32;
    while length <= eight_lambda * libm::exp2(-(j as f64) - 1.0) {
        j += 1;
    }
    Ok((j, Dyadic::scaled(3, -(j as i32) - 2)))
}

/// A boundary partition of the rectangle `[0, width] × [0, height]`.
///
/// `sides[0]` holds x-coordinates on the bottom, `sides[1]` y-coordinates on
/// the right, `sides[2]` x-coordinates on the top and `sides[3]`
/// y-coordinates on the left. Each list is strictly increasing and starts
/// and ends at the corner coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPartition {
    pub width: f64,
    pub height: f64,
    pub sides: [Vec<f64>; 4],
    pub lambda: f64,
}

impl BoundaryPartition {
    pub fn new(width: f64, height: f64, sides: [Vec<f64>; 4], lambda: f64) -> Self {
        BoundaryPartition { width, height, sides, lambda }
    }

    /// Equal spacing `n_x` edges horizontally and `n_y` vertically.
    pub fn uniform(width: f64, height: f64, nx: usize, ny: usize, lambda: f64) -> Self {
        let xs: Vec<f64> = (0..=nx).map(|i| width * i as f64 / nx as f64).collect();
        let ys: Vec<f64> = (0..=ny).map(|i| height * i as f64 / ny as f64).collect();
        BoundaryPartition::new(width, height, [xs.clone(), ys.clone(), xs, ys], lambda)
    }

    /// A random partition of `[0, width] × [0, 1]` with bounded geometry
    /// `λ`, on the grid `2^{-20}`. `uniform` must return samples from
    /// `[0, 1)`; partitions are drawn until one validates.
    pub fn random(width: u64, lambda: f64, uniform: &mut impl FnMut() -> f64) -> Self {
        let grid = libm::exp2(20.0);
        let step = math::sqrt(lambda);
        loop {
            // log-uniform edge sizes at the corners, then a multiplicative
            // random walk along each side
            let corner: [f64; 4] = core::array::from_fn(|_| libm::exp2(-1.0 - 6.0 * uniform()));
            let sides: [Vec<f64>; 4] = core::array::from_fn(|s| {
                let len = if s % 2 == 0 { width as f64 } else { 1.0 };
                let target = corner[(s + 1) % 4];
                let mut edges = alloc::vec![corner[s]];
                let mut total = corner[s];
                while total < len {
                    let last = *edges.last().unwrap();
                    // near the end of the side, steer toward the next corner's size
                    let e = if len - total < 4.0 * target.max(last) {
                        target.clamp(last / step, last * step)
                    } else {
                        last * math::powf(step, 2.0 * uniform() - 1.0)
                    };
                    edges.push(e);
                    total += e;
                }
                let scale = len / total;
                let mut pts = alloc::vec![0.0];
                let mut acc = 0.0;
                for e in &edges[..edges.len() - 1] {
                    acc += e * scale;
                    pts.push(math::round(acc * grid) / grid);
                }
                pts.push(len);
                pts.dedup();
                pts
            });
            // sides 2 and 3 were walked counter-clockwise; store them by coordinate
            let [s0, s1, s2, s3] = sides;
            let flip = |v: Vec<f64>, len: f64| -> Vec<f64> { v.iter().rev().map(|x| len - x).collect() };
            let p = BoundaryPartition::new(width as f64, 1.0, [s0, s1, flip(s2, width as f64), flip(s3, 1.0)], lambda);
            if p.validate().is_ok() {
                return p;
            }
        }
    }

    /// Partition points in counter-clockwise order starting at the lower left
    /// corner.
    pub fn ccw_points(&self) -> Vec<Complex> {
        let (w, h) = (self.width, self.height);
        let s = &self.sides;
        let mut out = Vec::new();
        out.extend(s[0][..s[0].len() - 1].iter().map(|&x| Complex::new(x, 0.0)));
        out.extend(s[1][..s[1].len() - 1].iter().map(|&y| Complex::new(w, y)));
        out.extend(s[2][1..].iter().rev().map(|&x| Complex::new(x, h)));
        out.extend(s[3][1..].iter().rev().map(|&y| Complex::new(0.0, y)));
        out
    }

    /// Edge lengths in counter-clockwise order; edge `k` joins point `k` to
    /// point `k + 1`.
    pub fn ccw_edge_lengths(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let s = &self.sides;
        out.extend(s[0].windows(2).map(|p| p[1] - p[0]));
        out.extend(s[1].windows(2).map(|p| p[1] - p[0]));
        out.extend(s[2].windows(2).rev().map(|p| p[1] - p[0]));
        out.extend(s[3].windows(2).rev().map(|p| p[1] - p[0]));
        out
    }

    /// Checks the list structure and bounded geometry with constant `λ`.
    pub fn validate(&self) -> Result<(), RectError> {
        let (w, h) = (self.width, self.height);
        if !(w > 0.0 && h > 0.0) || !w.is_finite() || !h.is_finite() {
            return Err(RectError::NonpositiveDimensions);
        }
        if !(self.lambda > 1.0) {
            return Err(RectError::MalformedPartition("lambda must exceed 1"));
        }
        for (k, side) in self.sides.iter().enumerate() {
            let end = if k % 2 == 0 { w } else { h };
            if side.len() < 2 || side[0] != 0.0 || *side.last().unwrap() != end {
                return Err(RectError::MalformedPartition("each side must start and end at its corners"));
            }
            if side.windows(2).any(|p| !(p[1] > p[0])) {
                return Err(RectError::MalformedPartition("side coordinates must be strictly increasing"));
            }
        }
        let lengths = self.ccw_edge_lengths();
        let short = w.min(h);
        let n = lengths.len();
        for k in 0..n {
            if lengths[k] > self.lambda * short {
                return Err(RectError::BoundedGeometryViolation { edge: k, reason: "edge longer than lambda times the short side" });
            }
            let (a, b) = (lengths[k], lengths[(k + 1) % n]);
            if a > self.lambda * b || b > self.lambda * a {
                return Err(RectError::BoundedGeometryViolation { edge: k, reason: "adjacent edges differ by more than lambda" });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_rectangle(3.0, 1.0).unwrap(), (3, 1.0));
        let (m, a) = normalize_rectangle(2.5, 1.0).unwrap();
        assert_eq!(m, 3);
        assert!((a - 1.2).abs() < 1e-15);
        assert_eq!(normalize_rectangle(1.0, 1.0).unwrap(), (1, 1.0));
        assert_eq!(normalize_rectangle(0.0, 1.0), Err(RectError::NonpositiveDimensions));
    }

    #[test]
    fn dk_examples() {
        // D/(8λ) = 1/32 = 2^-5
        let (j, d) = select_dk(0.5, 2.0).unwrap();
        assert_eq!(j, 5);
        assert_eq!(d, Dyadic::scaled(3, -7));
        for j0 in 3..20 {
            let lambda = 1.7;
            let len = libm::exp2(-(j0 as f64)) * 8.0 * lambda;
            if len <= lambda {
                assert_eq!(select_dk(len, lambda).unwrap().0, j0);
            }
        }
        assert_eq!(select_dk(0.0, 2.0), Err(RectError::NonpositiveLength));
    }

    #[test]
    fn random_partitions_validate() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut uniform = || rng.gen::<f64>();
        for m in 1..=5 {
            for _ in 0..10 {
                let p = BoundaryPartition::random(m, 2.0, &mut uniform);
                assert!(p.validate().is_ok());
                assert_eq!(p.width, m as f64);
            }
        }
    }

    #[test]
    fn bounded_geometry_checks() {
        let p = BoundaryPartition::uniform(2.0, 1.0, 4, 2, 2.0);
        assert!(p.validate().is_ok());
        assert_eq!(p.ccw_points().len(), 12);
        let mut bad = p.clone();
        bad.sides[0] = alloc::vec![0.0, 0.1, 2.0];
        assert!(matches!(bad.validate(), Err(RectError::BoundedGeometryViolation { .. })));
    }
}
