use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{select_dk, RectError};
use crate::dyadic::Dyadic;

pub(crate) type Pt = (Dyadic, Dyadic);

/// Dyadic square with lower left corner `(x, y)` and side `2^{-level}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DyadicSquare {
    pub x: Dyadic,
    pub y: Dyadic,
    pub level: u32,
}

impl DyadicSquare {
    pub fn side(&self) -> Dyadic {
        Dyadic::pow2(-(self.level as i32))
    }

    pub fn corners(&self) -> [Pt; 4] {
        let s = self.side();
        [(self.x, self.y), (self.x + s, self.y), (self.x + s, self.y + s), (self.x, self.y + s)]
    }
}

/// Local frame of side `side` of `[0, m] × [0, 1]`: the side runs along the
/// positive x-axis in counter-clockwise direction and the interior lies above.
pub(crate) fn to_global(side: usize, m: Dyadic, (x, y): Pt) -> Pt {
    let one = Dyadic::from_int(1);
    match side {
        0 => (x, y),
        1 => (m - y, x),
        2 => (m - x, one - y),
        _ => (y, one - x),
    }
}

pub(crate) fn to_local(side: usize, m: Dyadic, (x, y): Pt) -> Pt {
    let one = Dyadic::from_int(1);
    match side {
        0 => (x, y),
        1 => (y, m - x),
        2 => (m - x, one - y),
        _ => (one - y, x),
    }
}

fn local_box(side: usize, m: Dyadic, sq: &DyadicSquare) -> (Pt, Dyadic) {
    let s = sq.side();
    let (ax, ay) = to_local(side, m, (sq.x, sq.y));
    let (bx, by) = to_local(side, m, (sq.x + s, sq.y + s));
    ((ax.min(bx), ay.min(by)), s)
}

fn square_from_local(side: usize, m: Dyadic, (lx, ly): Pt, level: u32) -> DyadicSquare {
    let s = Dyadic::pow2(-(level as i32));
    let (ax, ay) = to_global(side, m, (lx, ly));
    let (bx, by) = to_global(side, m, (lx + s, ly + s));
    DyadicSquare { x: ax.min(bx), y: ay.min(by), level }
}

/// Polygonal arc over one side, in that side's local frame: vertex `k` is
/// `(t[k], d[k])` with `d[k] = (3/4)·2^{-levels[k]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sigma {
    pub t: Vec<Dyadic>,
    pub d: Vec<Dyadic>,
    pub levels: Vec<u32>,
}

/// Builds the arc over a side with partition positions `t` (local frame,
/// strictly increasing). `before` and `after` are the lengths of the
/// boundary edges adjacent to the first and last point on the neighbouring
/// sides, when there are any.
pub fn build_sigma(
    t: &[Dyadic],
    before: Option<Dyadic>,
    after: Option<Dyadic>,
    lambda: f64,
) -> Result<Sigma, RectError> {
    if t.len() < 2 {
        return Err(RectError::MalformedPartition("a side needs at least two points"));
    }
    let mut edges: Vec<Dyadic> = before.into_iter().collect();
    let offset = edges.len();
    edges.extend(t.windows(2).map(|p| p[1] - p[0]));
    edges.extend(after);
    let lam = Dyadic::from_f64(lambda);
    for (k, e) in edges.iter().enumerate() {
        if *e <= Dyadic::ZERO {
            return Err(RectError::NonpositiveLength);
        }
        if *e > lam {
            return Err(RectError::BoundedGeometryViolation { edge: k, reason: "edge longer than lambda" });
        }
    }
    for (k, w) in edges.windows(2).enumerate() {
        if w[0] > lam * w[1] || w[1] > lam * w[0] {
            return Err(RectError::BoundedGeometryViolation { edge: k, reason: "adjacent edges differ by more than lambda" });
        }
    }
    let mut d = Vec::with_capacity(t.len());
    let mut levels = Vec::with_capacity(t.len());
    for k in 0..t.len() {
        let inner = |i: usize| edges[offset + i];
        let left = if k == 0 { before } else { Some(inner(k - 1)) };
        let right = if k + 1 == t.len() { after } else { Some(inner(k)) };
        let dk = match (left, right) {
            (Some(a), Some(b)) => a.min(b),
            (a, b) => a.or(b).unwrap(),
        };
        let (j, dd) = select_dk(dk.to_f64(), lambda)?;
        d.push(dd);
        levels.push(j);
    }
    Ok(Sigma { t: t.to_vec(), d, levels })
}

impl Sigma {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn segment(&self, a: Dyadic) -> usize {
        let i = self.t.partition_point(|t| *t <= a);
        i.saturating_sub(1).min(self.t.len() - 2)
    }

    /// `σ(a) ≤ y`, exactly.
    fn value_at_most(&self, a: Dyadic, y: Dyadic) -> bool {
        let i = self.segment(a);
        let dt = self.t[i + 1] - self.t[i];
        self.d[i] * dt + (self.d[i + 1] - self.d[i]) * (a - self.t[i]) <= y * dt
    }

    /// `max σ` over `[a, b]` is at most `y`.
    pub fn max_at_most(&self, a: Dyadic, b: Dyadic, y: Dyadic) -> bool {
        if !self.value_at_most(a, y) || !self.value_at_most(b, y) {
            return false;
        }
        let lo = self.t.partition_point(|t| *t <= a);
        let hi = self.t.partition_point(|t| *t < b);
        (lo..hi).all(|k| self.d[k] <= y)
    }

    pub fn eval(&self, a: f64) -> f64 {
        let i = self.segment(Dyadic::from_f64(a));
        let (t0, t1) = (self.t[i].to_f64(), self.t[i + 1].to_f64());
        let (d0, d1) = (self.d[i].to_f64(), self.d[i + 1].to_f64());
        d0 + (d1 - d0) * (a - t0) / (t1 - t0)
    }

    /// Every segment satisfies `|Δd| ≤ |Δt| / 4`, checked exactly.
    pub fn slopes_within_quarter(&self) -> bool {
        (0..self.t.len() - 1).all(|i| {
            let dd = (self.d[i + 1] - self.d[i]).abs();
            dd.shl(2) <= self.t[i + 1] - self.t[i]
        })
    }

    pub fn max_abs_slope(&self) -> f64 {
        (0..self.t.len() - 1)
            .map(|i| {
                let dd = (self.d[i + 1] - self.d[i]).to_f64();
                (dd / (self.t[i + 1] - self.t[i]).to_f64()).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The central layer of `8m − 4` squares of side `1/4` followed by full
/// rings of squares of side `2^{-j}` for `3 ≤ j ≤ j_max`.
pub fn whitney_decompose(m: u64, j_max: u32) -> Vec<DyadicSquare> {
    let md = Dyadic::from_int(m as i64);
    let mut out = central_squares(m);
    for level in 3..=j_max {
        let mut ring = BTreeSet::new();
        for side in 0..4 {
            let len = if side % 2 == 0 { m as i64 } else { 1 };
            let count = len << level;
            let s = Dyadic::pow2(-(level as i32));
            for k in 1..=count - 2 {
                ring.insert(square_from_local(side, md, (Dyadic::scaled(k, -(level as i32)), s), level));
            }
        }
        out.extend(ring);
    }
    out
}

fn central_squares(m: u64) -> Vec<DyadicSquare> {
    let mut out = Vec::new();
    for row in 1..=2 {
        for col in 1..=(4 * m as i64 - 2) {
            out.push(DyadicSquare { x: Dyadic::scaled(col, -2), y: Dyadic::scaled(row, -2), level: 2 });
        }
    }
    out
}

/// Kept Whitney squares, arcs and the polygon `γ` bounding the kept union.
#[derive(Clone, Debug)]
pub struct WhitneyLayout {
    pub m: u64,
    pub squares: Vec<DyadicSquare>,
    pub sigma: [Sigma; 4],
    /// Counter-clockwise vertex list starting at the joint vertex near
    /// corner 0.
    pub gamma: Vec<Pt>,
    /// Index in `gamma` of the joint vertex near each corner.
    pub joints: [usize; 4],
    /// Each kept square as a counter-clockwise polygon including every kept
    /// corner lying on its sides.
    pub(crate) polygons: Vec<Vec<Pt>>,
}

impl WhitneyLayout {
    /// Arcs in global coordinates, for drawing.
    pub fn sigma_global(&self, side: usize) -> Vec<Pt> {
        let md = Dyadic::from_int(self.m as i64);
        let s = &self.sigma[side];
        s.t.iter().zip(&s.d).map(|(t, d)| to_global(side, md, (*t, *d))).collect()
    }

    /// The part of `γ` between the joint vertices of corners `side` and
    /// `side + 1`, inclusive.
    pub fn gamma_arc(&self, side: usize) -> Vec<Pt> {
        let a = self.joints[side];
        let b = if side == 3 { self.gamma.len() } else { self.joints[side + 1] };
        let mut arc: Vec<Pt> = self.gamma[a..b].to_vec();
        arc.push(self.gamma[b % self.gamma.len()]);
        arc
    }

    /// Builds the layout from the four arcs over the normalized rectangle
    /// `[0, m] × [0, 1]`.
    pub fn build(m: u64, sigma: [Sigma; 4]) -> Result<WhitneyLayout, RectError> {
        let md = Dyadic::from_int(m as i64);
        let squares = kept_squares(m, &sigma);
        let polygons = square_polygons(&squares);
        let cycle = boundary_cycle(&polygons)?;

        let mut joint_pts = [(Dyadic::ZERO, Dyadic::ZERO); 4];
        for c in 0..4 {
            check_corner_crossing(c, m, &sigma)?;
            let g = Dyadic::pow2(-(sigma[c].levels[0] as i32));
            joint_pts[c] = to_global(c, md, (g, g));
        }
        let start = cycle.iter().position(|p| *p == joint_pts[0]).ok_or(RectError::CornerIntersectionFailure(0))?;
        let gamma: Vec<Pt> = cycle[start..].iter().chain(&cycle[..start]).copied().collect();
        let mut joints = [0usize; 4];
        for c in 1..4 {
            joints[c] = gamma.iter().position(|p| *p == joint_pts[c]).ok_or(RectError::CornerIntersectionFailure(c))?;
            if joints[c] <= joints[c - 1] {
                return Err(RectError::CornerIntersectionFailure(c));
            }
        }
        Ok(WhitneyLayout { m, squares, sigma, gamma, joints, polygons })
    }
}

/// Whitney squares of `[0, m] × [0, 1]` lying on or above all four arcs,
/// sorted. Only squares whose side is at least the smallest arc height
/// below them are examined.
pub fn kept_squares(m: u64, sigma: &[Sigma; 4]) -> Vec<DyadicSquare> {
    let md = Dyadic::from_int(m as i64);
    let j_max = sigma.iter().flat_map(|s| s.levels.iter().copied()).max().unwrap_or(3);
    let top: [Dyadic; 4] = core::array::from_fn(|i| sigma[i].d.iter().copied().max().unwrap_or(Dyadic::ZERO));
    let kept_by_all = |sq: &DyadicSquare| {
        (0..4).all(|side| {
            let ((lx, ly), s) = local_box(side, md, sq);
            ly >= top[side] || sigma[side].max_at_most(lx, lx + s, ly)
        })
    };
    // squares are keyed by level and integer position at their own scale
    let key = |sq: &DyadicSquare| {
        let k = sq.level as i32;
        (sq.level, sq.x.shl(k).floor(), sq.y.shl(k).floor())
    };
    let mut kept: BTreeMap<(u32, i64, i64), DyadicSquare> =
        central_squares(m).into_iter().filter(|sq| kept_by_all(sq)).map(|sq| (key(&sq), sq)).collect();
    let mut rejected = BTreeSet::new();
    for level in 3..=j_max {
        let s = Dyadic::pow2(-(level as i32));
        for (side, sg) in sigma.iter().enumerate() {
            let count = (if side % 2 == 0 { m as i64 } else { 1 }) << level;
            for i in 0..sg.len() - 1 {
                if sg.d[i].min(sg.d[i + 1]) > s {
                    continue;
                }
                let lo = (sg.t[i].shl(level as i32).floor() - 1).max(1);
                let hi = sg.t[i + 1].shl(level as i32).ceil().min(count - 2);
                for k in lo..=hi {
                    let sq = square_from_local(side, md, (Dyadic::scaled(k, -(level as i32)), s), level);
                    let id = key(&sq);
                    if kept.contains_key(&id) || rejected.contains(&id) {
                        continue;
                    }
                    if kept_by_all(&sq) {
                        kept.insert(id, sq);
                    } else {
                        rejected.insert(id);
                    }
                }
            }
        }
    }
    let mut out: Vec<DyadicSquare> = kept.into_values().collect();
    out.sort();
    out
}

/// The arcs over sides `c - 1` and `c` must cross inside the square
/// `[g/2, g]²` of corner `c`, where `g = (4/3)·d` at that corner.
fn check_corner_crossing(c: usize, m: u64, sigma: &[Sigma; 4]) -> Result<(), RectError> {
    let prev = (c + 3) % 4;
    let prev_len = if prev.is_multiple_of(2) { m as f64 } else { 1.0 };
    let (here, before) = (&sigma[c], &sigma[prev]);
    // in the frame of side c the previous side runs up the y-axis; both arcs
    // are graphs with slope at most 1/4, so this iteration contracts
    let mut x = 0.0;
    let mut y = 0.0;
    for _ in 0..200 {
        y = here.eval(x);
        x = before.eval(prev_len - y);
    }
    let g = libm::exp2(-(here.levels[0] as f64));
    let inside = |v: f64| v >= 0.5 * g && v <= g;
    if inside(x) && inside(y) {
        Ok(())
    } else {
        Err(RectError::CornerIntersectionFailure(c))
    }
}

pub(crate) fn square_polygons(squares: &[DyadicSquare]) -> Vec<Vec<Pt>> {
    let mut rows: BTreeMap<Dyadic, BTreeSet<Dyadic>> = BTreeMap::new();
    let mut cols: BTreeMap<Dyadic, BTreeSet<Dyadic>> = BTreeMap::new();
    for sq in squares {
        for (x, y) in sq.corners() {
            rows.entry(y).or_default().insert(x);
            cols.entry(x).or_default().insert(y);
        }
    }
    squares
        .iter()
        .map(|sq| {
            let s = sq.side();
            let (x0, y0, x1, y1) = (sq.x, sq.y, sq.x + s, sq.y + s);
            let mut poly = Vec::with_capacity(4);
            poly.extend(rows[&y0].range(x0..x1).map(|x| (*x, y0)));
            poly.extend(cols[&x1].range(y0..y1).map(|y| (x1, *y)));
            let top: Vec<Dyadic> = rows[&y1].range(x0..=x1).copied().collect();
            poly.extend(top.iter().rev().take(top.len() - 1).map(|x| (*x, y1)));
            let left: Vec<Dyadic> = cols[&x0].range(y0..=y1).copied().collect();
            poly.extend(left.iter().rev().take(left.len() - 1).map(|y| (x0, *y)));
            poly
        })
        .collect()
}

/// Directed boundary of the union of the polygons, as one cycle.
fn boundary_cycle(polygons: &[Vec<Pt>]) -> Result<Vec<Pt>, RectError> {
    let mut segments = BTreeSet::new();
    for poly in polygons {
        for i in 0..poly.len() {
            segments.insert((poly[i], poly[(i + 1) % poly.len()]));
        }
    }
    let mut next = BTreeMap::new();
    for &(a, b) in &segments {
        if !segments.contains(&(b, a)) && next.insert(a, b).is_some() {
            return Err(RectError::GammaNotSimple);
        }
    }
    let Some((&first, _)) = next.iter().next() else {
        return Err(RectError::GammaNotSimple);
    };
    let mut cycle = alloc::vec![first];
    let mut cur = next[&first];
    while cur != first {
        if cycle.len() > next.len() {
            return Err(RectError::GammaNotSimple);
        }
        cycle.push(cur);
        cur = *next.get(&cur).ok_or(RectError::GammaNotSimple)?;
    }
    if cycle.len() != next.len() {
        return Err(RectError::GammaNotSimple);
    }
    Ok(cycle)
}
