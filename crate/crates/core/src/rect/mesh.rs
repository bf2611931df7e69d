use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::layout::{build_sigma, kept_squares, to_global, to_local, DyadicSquare, Pt, Sigma, WhitneyLayout};
use super::{normalize_rectangle, BoundaryPartition, RectError};
use crate::dyadic::Dyadic;
use crate::planar::{signed_area, triangle_angles, PlanarMesh};
use crate::Complex;

/// How the rectangle is triangulated once the arcs are known.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MeshProfile {
    /// Arcs raised to height `8·d_k` (level `j − 3`); the interior vertices
    /// are the corners of the Whitney squares kept above them and the
    /// connectivity is the Delaunay triangulation of all vertices.
    #[default]
    Graded,
    /// Arcs at height `d_k`; collar fans from partition points to `γ` and
    /// fixed templates on the kept squares.
    Template,
}

/// Output of [`rect_triangulation`]. Arcs and squares live in the normalized
/// frame `[0, m] × [0, 1]` of the (possibly transposed) rectangle.
#[derive(Clone, Debug)]
pub struct RectTriangulation {
    pub mesh: PlanarMesh,
    pub profile: MeshProfile,
    /// Arcs at the heights `d_k` of the bounded-geometry construction.
    pub sigma: [Sigma; 4],
    /// Squares whose corners are interior mesh vertices.
    pub squares: Vec<DyadicSquare>,
    /// Full layout with `γ`, built for the template profile only.
    pub layout: Option<WhitneyLayout>,
    pub m: u64,
    pub stretch: f64,
    pub transposed: bool,
    /// The bounded-geometry constant used in the normalized frame.
    pub lambda_normalized: f64,
}

/// Triangulates `[0, w] × [0, h]` so that the vertices on the boundary are
/// exactly the partition points, using [`MeshProfile::Graded`].
pub fn rect_triangulation(p: &BoundaryPartition) -> Result<RectTriangulation, RectError> {
    rect_triangulation_with(p, MeshProfile::Graded)
}

pub fn rect_triangulation_with(p: &BoundaryPartition, profile: MeshProfile) -> Result<RectTriangulation, RectError> {
    p.validate()?;
    let transposed = p.height > p.width;
    let work = if transposed {
        let [s0, s1, s2, s3] = p.sides.clone();
        BoundaryPartition::new(p.height, p.width, [s3, s2, s1, s0], p.lambda)
    } else {
        p.clone()
    };
    let (m, stretch) = normalize_rectangle(work.width, work.height)?;
    // stretching changes edge ratios by at most `stretch`; below 2 the arcs
    // at a corner can rise above the joint square
    let lambda = (p.lambda * stretch).max(2.0);
    let md = Dyadic::from_int(m as i64);
    let one = Dyadic::from_int(1);

    let sx = m as f64 / work.width;
    let sy = 1.0 / work.height;
    let normalized = |vals: &[f64], scale: f64, end: Dyadic| -> Result<Vec<Dyadic>, RectError> {
        let n = vals.len();
        let out: Vec<Dyadic> = vals
            .iter()
            .enumerate()
            .map(|(i, v)| match i {
                0 => Dyadic::ZERO,
                _ if i + 1 == n => end,
                _ => Dyadic::from_f64(v * scale),
            })
            .collect();
        if out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RectError::MalformedPartition("points collide after normalization"));
        }
        Ok(out)
    };
    let g0 = normalized(&work.sides[0], sx, md)?;
    let g1 = normalized(&work.sides[1], sy, one)?;
    let g2 = normalized(&work.sides[2], sx, md)?;
    let g3 = normalized(&work.sides[3], sy, one)?;
    let local: [Vec<Dyadic>; 4] = [
        g0,
        g1,
        g2.iter().rev().map(|x| md - *x).collect(),
        g3.iter().rev().map(|y| one - *y).collect(),
    ];

    let mut sigma: Vec<Sigma> = Vec::with_capacity(4);
    for s in 0..4 {
        let prev = &local[(s + 3) % 4];
        let next = &local[(s + 1) % 4];
        let before = prev[prev.len() - 1] - prev[prev.len() - 2];
        let after = next[1] - next[0];
        sigma.push(build_sigma(&local[s], Some(before), Some(after), lambda)?);
    }
    let sigma: [Sigma; 4] = sigma.try_into().unwrap();

    let mut reg = Registry::default();
    for s in 0..4 {
        for t in &local[s][..local[s].len() - 1] {
            reg.id(to_global(s, md, (*t, Dyadic::ZERO)));
        }
    }
    let n_partition = reg.points.len();
    let boundary = work.ccw_points();
    debug_assert_eq!(boundary.len(), n_partition);
    let (wx, wy) = (work.width / m as f64, work.height);
    let place = |reg: &Registry| -> Vec<Complex> {
        reg.points
            .iter()
            .enumerate()
            .map(|(i, (x, y))| {
                let z = if i < n_partition { boundary[i] } else { Complex::new(x.to_f64() * wx, y.to_f64() * wy) };
                if transposed {
                    Complex::new(z.im, z.re)
                } else {
                    z
                }
            })
            .collect()
    };

    let (mesh, squares, layout) = match profile {
        MeshProfile::Graded => {
            let raised: [Sigma; 4] = sigma.clone().map(|s| Sigma {
                d: s.d.iter().map(|d| d.shl(3)).collect(),
                levels: s.levels.iter().map(|j| j - 3).collect(),
                t: s.t,
            });
            let squares = kept_squares(m, &raised);
            // all square corners lie on the grid of the finest kept level
            let fine = squares.iter().map(|sq| sq.level).max().unwrap_or(0) as i32;
            let mut corners: Vec<(i64, i64)> = squares
                .iter()
                .flat_map(|sq| sq.corners())
                .map(|(x, y)| (x.shl(fine).floor(), y.shl(fine).floor()))
                .collect();
            corners.sort_unstable();
            corners.dedup();
            let unit = libm::exp2(-(fine as f64));
            let mut vertices = place(&reg);
            vertices.extend(corners.iter().map(|&(x, y)| {
                let z = Complex::new(x as f64 * unit * wx, y as f64 * unit * wy);
                if transposed {
                    Complex::new(z.im, z.re)
                } else {
                    z
                }
            }));
            let faces = delaunay(&vertices)?;
            (PlanarMesh::new(vertices, faces), squares, None)
        }
        MeshProfile::Template => {
            let layout = WhitneyLayout::build(m, sigma.clone())?;
            let mut faces = Vec::new();
            for s in 0..4 {
                collar(s, md, &local[s], &layout, &mut reg, &mut faces)?;
            }
            core(&layout, &mut reg, &mut faces);
            if transposed {
                for f in &mut faces {
                    f.swap(1, 2);
                }
            }
            (PlanarMesh::new(place(&reg), faces), layout.squares.clone(), Some(layout))
        }
    };
    Ok(RectTriangulation {
        mesh,
        profile,
        sigma,
        squares,
        layout,
        m,
        stretch,
        transposed,
        lambda_normalized: lambda,
    })
}

/// Delaunay triangulation of points filling a rectangle whose boundary
/// points come first.
fn delaunay(vertices: &[Complex]) -> Result<Vec<[usize; 3]>, RectError> {
    use spade::{DelaunayTriangulation, Point2, Triangulation};
    let mut dt: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for (i, z) in vertices.iter().enumerate() {
        let h = dt.insert(Point2::new(z.re, z.im)).map_err(|_| RectError::MalformedPartition("vertex coordinates out of range"))?;
        if h.index() != i {
            return Err(RectError::MalformedPartition("duplicate mesh vertex"));
        }
    }
    Ok(dt
        .inner_faces()
        .map(|f| {
            let [a, b, c] = f.vertices();
            [a.fix().index(), b.fix().index(), c.fix().index()]
        })
        .collect())
}

#[derive(Default)]
struct Registry {
    ids: BTreeMap<Pt, usize>,
    points: Vec<Pt>,
}

impl Registry {
    fn id(&mut self, p: Pt) -> usize {
        if let Some(&i) = self.ids.get(&p) {
            return i;
        }
        self.points.push(p);
        self.ids.insert(p, self.points.len() - 1);
        self.points.len() - 1
    }
}

fn f(p: Pt) -> Complex {
    Complex::new(p.0.to_f64(), p.1.to_f64())
}

/// Smallest angle of a fan, or `None` when some triangle is not positively
/// oriented.
fn fan_quality(tris: &[[Pt; 3]]) -> Option<f64> {
    let mut worst = f64::INFINITY;
    for t in tris {
        let q = [f(t[0]), f(t[1]), f(t[2])];
        if !(signed_area(q[0], q[1], q[2]) > 0.0) {
            return None;
        }
        worst = triangle_angles(q).iter().copied().fold(worst, f64::min);
    }
    Some(worst)
}

/// Triangles between side `s` and the part of `γ` facing it. Built in the
/// local frame of the side, where partition point `i` is `(t[i], 0)`.
fn collar(
    s: usize,
    md: Dyadic,
    t: &[Dyadic],
    layout: &WhitneyLayout,
    reg: &mut Registry,
    faces: &mut Vec<[usize; 3]>,
) -> Result<(), RectError> {
    let g: Vec<Pt> = layout.gamma_arc(s).into_iter().map(|q| to_local(s, md, q)).collect();
    let n = t.len() - 1;
    let r = g.len() - 1;
    // [a[i], b[i]]: the γ vertices whose projections are closest to t[i]
    let mut a = alloc::vec![0usize; n + 1];
    let mut b = alloc::vec![0usize; n + 1];
    a[n] = r;
    b[n] = r;
    for i in 1..n {
        let x = t[i];
        let seg = (0..r)
            .find(|&k| g[k].1 == g[k + 1].1 && g[k].0 <= x && x <= g[k + 1].0)
            .ok_or(RectError::GammaNotHorizontal { side: s, point: i })?;
        (a[i], b[i]) = if g[seg].0 == x {
            (seg, seg)
        } else if g[seg + 1].0 == x {
            (seg + 1, seg + 1)
        } else {
            (seg, seg + 1)
        };
    }

    let p = |i: usize| (t[i], Dyadic::ZERO);
    let mut local_tris: Vec<[Pt; 3]> = Vec::new();
    for i in 0..=n {
        for k in a[i]..b[i] {
            local_tris.push([p(i), g[k + 1], g[k]]);
        }
        if i == n {
            break;
        }
        let (lo, hi) = (b[i], a[i + 1]);
        if lo > hi {
            return Err(RectError::NonMonotoneGammaOverEdge { side: s, edge: i });
        }
        // fan the polygon p_i, p_{i+1}, g[hi], ..., g[lo] from either end of
        // the edge, whichever gives the larger smallest angle
        let mut left = Vec::with_capacity(hi - lo + 1);
        for k in lo..hi {
            left.push([p(i), g[k + 1], g[k]]);
        }
        left.push([p(i), p(i + 1), g[hi]]);
        let mut right = Vec::with_capacity(hi - lo + 1);
        right.push([p(i), p(i + 1), g[lo]]);
        for k in lo..hi {
            right.push([p(i + 1), g[k + 1], g[k]]);
        }
        let chosen = match (fan_quality(&left), fan_quality(&right)) {
            (Some(x), Some(y)) => {
                if y > x {
                    right
                } else {
                    left
                }
            }
            (Some(_), None) => left,
            (None, Some(_)) => right,
            (None, None) => return Err(RectError::NonMonotoneGammaOverEdge { side: s, edge: i }),
        };
        local_tris.extend(chosen);
    }
    for tri in local_tris {
        faces.push(tri.map(|q| reg.id(to_global(s, md, q))));
    }
    Ok(())
}

/// Kept squares with no hanging vertex are split along a diagonal, squares
/// with one are fanned from it and all others from their centre.
fn core(layout: &WhitneyLayout, reg: &mut Registry, faces: &mut Vec<[usize; 3]>) {
    for (sq, poly) in layout.squares.iter().zip(&layout.polygons) {
        let ids: Vec<usize> = poly.iter().map(|q| reg.id(*q)).collect();
        let k = ids.len();
        match k {
            4 => {
                faces.push([ids[0], ids[1], ids[2]]);
                faces.push([ids[0], ids[2], ids[3]]);
            }
            5 => {
                let corners = sq.corners();
                let h = (0..5).find(|&i| !corners.contains(&poly[i])).unwrap();
                for j in 1..4 {
                    faces.push([ids[h], ids[(h + j) % 5], ids[(h + j + 1) % 5]]);
                }
            }
            _ => {
                let half = sq.side().shl(-1);
                let c = reg.id((sq.x + half, sq.y + half));
                for j in 0..k {
                    faces.push([c, ids[j], ids[(j + 1) % k]]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn check(p: &BoundaryPartition) -> RectTriangulation {
        check_with(p, MeshProfile::Graded)
    }

    fn check_with(p: &BoundaryPartition, profile: MeshProfile) -> RectTriangulation {
        let out = rect_triangulation_with(p, profile).unwrap();
        let report = out.mesh.validate(1e-12);
        assert!(report.is_valid(), "{:?}", report);
        let boundary: BTreeSet<(u64, u64)> = out
            .mesh
            .boundary_vertices()
            .iter()
            .map(|&i| (out.mesh.vertices[i].re.to_bits(), out.mesh.vertices[i].im.to_bits()))
            .collect();
        let expected: BTreeSet<(u64, u64)> = p.ccw_points().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect();
        assert_eq!(boundary, expected);
        assert!((out.mesh.area() - p.width * p.height).abs() < 1e-9 * p.width * p.height);
        out
    }

    #[test]
    fn unit_square_corners_only() {
        let p = BoundaryPartition::uniform(1.0, 1.0, 1, 1, 2.0);
        let out = check(&p);
        assert!(out.mesh.min_angle() >= 20f64.to_radians());
    }

    #[test]
    fn uniform_partitions() {
        for (w, h, nx, ny) in [(1.0, 1.0, 2, 2), (2.0, 1.0, 4, 2), (3.0, 1.0, 12, 4), (2.5, 1.0, 5, 2), (1.0, 3.0, 3, 9)] {
            let out = check(&BoundaryPartition::uniform(w, h, nx, ny, 2.0));
            assert!(out.mesh.min_angle() > 10f64.to_radians(), "{w}x{h}: {}", out.mesh.min_angle().to_degrees());
        }
    }

    #[test]
    fn transposition_equivariance() {
        let p = BoundaryPartition::new(
            2.0,
            1.0,
            [vec![0.0, 0.25, 0.5, 1.0, 1.5, 2.0], vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0, 1.5, 2.0], vec![0.0, 0.25, 0.5, 1.0]],
            2.0,
        );
        let [s0, s1, s2, s3] = p.sides.clone();
        let q = BoundaryPartition::new(1.0, 2.0, [s3, s2, s1, s0], 2.0);
        let a = check(&p);
        let b = check(&q);
        assert!(!a.transposed && b.transposed);
        let key = |z: &Complex| (z.re.to_bits(), z.im.to_bits());
        let va: BTreeSet<_> = a.mesh.vertices.iter().map(|z| key(&Complex::new(z.im, z.re))).collect();
        let vb: BTreeSet<_> = b.mesh.vertices.iter().map(key).collect();
        assert_eq!(va, vb);
        assert_eq!(a.mesh.faces.len(), b.mesh.faces.len());
    }

    #[test]
    fn graded_partition() {
        // edges double toward the middle of the bottom side
        let ys = vec![0.0, 1.0 / 32.0, 1.0 / 16.0, 0.125, 0.25, 0.5, 1.0];
        let mut bottom = ys.clone();
        bottom.extend(ys.iter().rev().skip(1).map(|y| 2.0 - y));
        let top: Vec<f64> = (0..=4).map(|i| i as f64 * 0.5).collect();
        let ys_left = ys.clone();
        let p = BoundaryPartition::new(2.0, 1.0, [bottom, ys, top, ys_left], 2.0);
        p.validate().unwrap();
        let out = check(&p);
        assert!(out.mesh.min_angle() > 10f64.to_radians());
        for s in &out.sigma {
            assert!(s.slopes_within_quarter());
        }
    }

    #[test]
    fn template_profile_is_valid_but_thin() {
        for p in [BoundaryPartition::uniform(1.0, 1.0, 1, 1, 2.0), BoundaryPartition::uniform(2.0, 1.0, 8, 4, 2.0)] {
            let template = check_with(&p, MeshProfile::Template);
            let graded = check(&p);
            assert!(template.layout.is_some());
            assert!(template.mesh.min_angle() > 0.0);
            assert!(graded.mesh.min_angle() > template.mesh.min_angle());
            assert!(graded.mesh.faces.len() < template.mesh.faces.len());
        }
    }

    #[test]
    fn uniform_gamma_is_flat_along_sides() {
        // spacing 1/4 on the unit square: every d_k is 3/256 and γ runs at
        // height 1/64 between the joint vertices
        let out = check_with(&BoundaryPartition::uniform(1.0, 1.0, 4, 4, 2.0), MeshProfile::Template);
        let layout = out.layout.unwrap();
        let g = Dyadic::pow2(-6);
        for s in 0..4 {
            assert!(out.sigma[s].d.iter().all(|d| *d == Dyadic::scaled(3, -8)));
            let arc = layout.gamma_arc(s);
            let md = Dyadic::from_int(1);
            assert!(arc.iter().all(|q| to_local(s, md, *q).1 == g));
        }
    }

    #[test]
    fn core_transition_template() {
        // one square of side 1/4 beside two of side 1/8
        let sq = |x: f64, y: f64, level: u32| DyadicSquare { x: Dyadic::from_f64(x), y: Dyadic::from_f64(y), level };
        let squares = vec![sq(0.0, 0.0, 2), sq(0.25, 0.0, 3), sq(0.25, 0.125, 3)];
        let polygons = super::super::layout::square_polygons(&squares);
        assert_eq!(polygons.iter().map(|p| p.len()).collect::<Vec<_>>(), vec![5, 4, 4]);
        let dummy = Sigma { t: vec![Dyadic::ZERO, Dyadic::from_int(1)], d: vec![Dyadic::ZERO; 2], levels: vec![3, 3] };
        let layout = WhitneyLayout {
            m: 1,
            squares,
            sigma: [dummy.clone(), dummy.clone(), dummy.clone(), dummy],
            gamma: Vec::new(),
            joints: [0; 4],
            polygons,
        };
        let mut reg = Registry::default();
        let mut faces = Vec::new();
        core(&layout, &mut reg, &mut faces);
        let vertices: Vec<Complex> = reg.points.iter().map(|q| f(*q)).collect();
        let mesh = PlanarMesh::new(vertices, faces);
        assert!(mesh.validate(1e-12).is_valid());
        assert_eq!(mesh.faces.len(), 3 + 2 + 2);
        assert!((mesh.area() - (1.0 / 16.0 + 2.0 / 64.0)).abs() < 1e-15);
        assert!((mesh.min_angle() - libm::atan(0.5)).abs() < 1e-12);
    }

    #[test]
    fn equal_squares_split_along_diagonals() {
        let sq = |x: f64, y: f64| DyadicSquare { x: Dyadic::from_f64(x), y: Dyadic::from_f64(y), level: 2 };
        let squares = vec![sq(0.25, 0.25), sq(0.5, 0.25), sq(0.25, 0.5), sq(0.5, 0.5)];
        let polygons = super::super::layout::square_polygons(&squares);
        let dummy = Sigma { t: vec![Dyadic::ZERO, Dyadic::from_int(1)], d: vec![Dyadic::ZERO; 2], levels: vec![3, 3] };
        let layout = WhitneyLayout { m: 1, squares, sigma: [dummy.clone(), dummy.clone(), dummy.clone(), dummy], gamma: Vec::new(), joints: [0; 4], polygons };
        let mut reg = Registry::default();
        let mut faces = Vec::new();
        core(&layout, &mut reg, &mut faces);
        let mesh = PlanarMesh::new(reg.points.iter().map(|q| f(*q)).collect(), faces);
        assert_eq!(mesh.faces.len(), 8);
        assert!((mesh.min_angle() - core::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn rejects_ratio_ten() {
        let p = BoundaryPartition::new(1.0, 1.0, [vec![0.0, 0.05, 0.55, 1.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]], 2.0);
        assert!(matches!(rect_triangulation(&p), Err(RectError::BoundedGeometryViolation { .. })));
    }
}
