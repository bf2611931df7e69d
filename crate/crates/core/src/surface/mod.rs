//! Coordinate-free equilateral surfaces.
//!
//! A surface is a finite set of faces, each a copy of the equilateral
//! triangle with corners `0, 1, 2` in counter-clockwise order, together with
//! a partial gluing of sides. Side `s` runs from corner `s` to corner
//! `s + 1`. Gluing side `s` of face `f` to side `t` of face `g` identifies
//! corner `s` of `f` with corner `t + 1` of `g` and corner `s + 1` of `f`
//! with corner `t` of `g`, i.e. the identification reverses orientation.
//! Unglued sides are boundary edges.

mod colour;
mod subdivide;

pub use colour::{canonical_three_colouring, three_colour_search, Colour, Colouring};
pub use subdivide::{barycentric_subdivide, boundary_fan_subdivide, Subdivision, VertexOrigin};

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

/// One side of one face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub face: usize,
    pub side: u8,
}

impl Slot {
    pub const fn new(face: usize, side: u8) -> Self {
        Slot { face, side }
    }

    #[inline]
    fn index(self) -> usize {
        3 * self.face + self.side as usize
    }

    #[inline]
    fn from_index(i: usize) -> Self {
        Slot { face: i / 3, side: (i % 3) as u8 }
    }
}

/// One corner of one face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Corner {
    pub face: usize,
    pub corner: u8,
}

impl Corner {
    pub const fn new(face: usize, corner: u8) -> Self {
        Corner { face, corner }
    }

    #[inline]
    fn index(self) -> usize {
        3 * self.face + self.corner as usize
    }

    #[inline]
    fn from_index(i: usize) -> Self {
        Corner { face: i / 3, corner: (i % 3) as u8 }
    }
}

#[inline]
pub(crate) fn next3(i: u8) -> u8 {
    (i + 1) % 3
}

#[inline]
pub(crate) fn prev3(i: u8) -> u8 {
    (i + 2) % 3
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("surface has no faces")]
    Empty,
    #[error("slot ({}, {}) is out of range", .0.face, .0.side)]
    SlotOutOfRange(Slot),
    #[error("slot ({}, {}) is glued more than once", .0.face, .0.side)]
    DuplicateSlot(Slot),
    #[error("slot ({}, {}) is glued to itself", .0.face, .0.side)]
    SelfGluedEdge(Slot),
    #[error("face adjacency graph is disconnected: {reachable} of {faces} faces reachable from face 0")]
    Disconnected { reachable: usize, faces: usize },
    #[error("vertex link around corner ({}, {}) does not close up", .0.face, .0.corner)]
    InfiniteVertexLink(Corner),
    #[error("edge ({0}, {1}) is shared by more than two faces or is not consistently oriented")]
    NonManifoldEdge(usize, usize),
    #[error("subdivision provenance is missing or inconsistent")]
    MissingProvenance,
    #[error("surface has no boundary")]
    NoBoundary,
    #[error("boundary face {0} has its off-boundary corner on the boundary")]
    BoundaryCornerViolation(usize),
}

/// The cyclic (interior) or linear (boundary) sequence of corners around a
/// vertex, in counter-clockwise order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexLink {
    pub corners: Vec<Corner>,
    pub closed: bool,
}

impl VertexLink {
    /// Number of edge ends at the vertex.
    pub fn degree(&self) -> usize {
        if self.closed {
            self.corners.len()
        } else {
            self.corners.len() + 1
        }
    }
}

/// A validated equilateral surface. Vertex classes are derived from the
/// gluing and numbered canonically: class `k` is the `k`-th class when
/// classes are ordered by their lexicographically smallest corner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquilateralSurface {
    face_count: usize,
    glue: Vec<Option<Slot>>,
    vertex_of: Vec<usize>,
    vertex_count: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root so roots are class minima
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

impl EquilateralSurface {
    /// Builds and validates a surface from a list of glued slot pairs.
    pub fn build(face_count: usize, gluings: &[(Slot, Slot)]) -> Result<Self, SurfaceError> {
        if face_count == 0 {
            return Err(SurfaceError::Empty);
        }
        let mut glue = vec![None; 3 * face_count];
        for &(a, b) in gluings {
            for s in [a, b] {
                if s.face >= face_count || s.side > 2 {
                    return Err(SurfaceError::SlotOutOfRange(s));
                }
            }
            if a == b {
                return Err(SurfaceError::SelfGluedEdge(a));
            }
            for s in [a, b] {
                if glue[s.index()].is_some() {
                    return Err(SurfaceError::DuplicateSlot(s));
                }
            }
            glue[a.index()] = Some(b);
            glue[b.index()] = Some(a);
        }
        Self::from_glue_table(glue)
    }

    /// Builds a surface from a table indexed by `3 * face + side`.
    pub fn from_glue_table(glue: Vec<Option<Slot>>) -> Result<Self, SurfaceError> {
        if glue.is_empty() || !glue.len().is_multiple_of(3) {
            return Err(SurfaceError::Empty);
        }
        let face_count = glue.len() / 3;
        for (i, g) in glue.iter().enumerate() {
            let s = Slot::from_index(i);
            if let Some(t) = *g {
                if t.face >= face_count || t.side > 2 {
                    return Err(SurfaceError::SlotOutOfRange(t));
                }
                if t == s {
                    return Err(SurfaceError::SelfGluedEdge(s));
                }
                if glue[t.index()] != Some(s) {
                    return Err(SurfaceError::DuplicateSlot(t));
                }
            }
        }

        let mut uf = UnionFind::new(3 * face_count);
        for (i, g) in glue.iter().enumerate() {
            let s = Slot::from_index(i);
            if let Some(t) = *g {
                uf.union(
                    Corner::new(s.face, s.side).index(),
                    Corner::new(t.face, next3(t.side)).index(),
                );
                uf.union(
                    Corner::new(s.face, next3(s.side)).index(),
                    Corner::new(t.face, t.side).index(),
                );
            }
        }
        // Roots are class minima, so numbering roots in index order gives the
        // canonical ids.
        let mut id_of_root = vec![usize::MAX; 3 * face_count];
        let mut vertex_of = vec![0; 3 * face_count];
        let mut vertex_count = 0;
        for c in 0..3 * face_count {
            let r = uf.find(c);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = vertex_count;
                vertex_count += 1;
            }
            vertex_of[c] = id_of_root[r];
        }

        let s = EquilateralSurface { face_count, glue, vertex_of, vertex_count };
        s.validate()?;
        Ok(s)
    }

    /// Builds a surface from a simplicial triangle list (CCW vertex labels).
    /// Sides are glued when they traverse the same labelled edge in opposite
    /// directions. Vertex classes are recomputed from the gluing, so labels
    /// only serve to match sides.
    pub fn from_triangles(triangles: &[[usize; 3]]) -> Result<Self, SurfaceError> {
        let mut directed: BTreeMap<(usize, usize), Slot> = BTreeMap::new();
        for (f, t) in triangles.iter().enumerate() {
            for s in 0..3u8 {
                let key = (t[s as usize], t[next3(s) as usize]);
                if directed.insert(key, Slot::new(f, s)).is_some() {
                    return Err(SurfaceError::NonManifoldEdge(key.0, key.1));
                }
            }
        }
        let mut glue = vec![None; 3 * triangles.len()];
        for (&(u, v), &slot) in &directed {
            if let Some(&other) = directed.get(&(v, u)) {
                glue[slot.index()] = Some(other);
            }
        }
        Self::from_glue_table(glue)
    }

    pub fn face_count(&self) -> usize {
        self.face_count
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of edges: glued pairs once, boundary sides once.
    pub fn edge_count(&self) -> usize {
        let glued = self.glue.iter().filter(|g| g.is_some()).count();
        glued / 2 + (self.glue.len() - glued)
    }

    pub fn glued(&self, s: Slot) -> Option<Slot> {
        self.glue[s.index()]
    }

    pub fn is_boundary(&self, s: Slot) -> bool {
        self.glue[s.index()].is_none()
    }

    /// The canonical vertex class of a corner.
    pub fn vertex(&self, c: Corner) -> usize {
        self.vertex_of[c.index()]
    }

    /// The three vertex classes of a face, in corner order.
    pub fn face_vertices(&self, f: usize) -> [usize; 3] {
        [self.vertex_of[3 * f], self.vertex_of[3 * f + 1], self.vertex_of[3 * f + 2]]
    }

    /// All glued pairs `(a, b)` with `a < b`, in slot order.
    pub fn gluings(&self) -> Vec<(Slot, Slot)> {
        self.glue
            .iter()
            .enumerate()
            .filter_map(|(i, g)| {
                let a = Slot::from_index(i);
                g.filter(|b| a < *b).map(|b| (a, b))
            })
            .collect()
    }

    pub fn boundary_slots(&self) -> Vec<Slot> {
        (0..self.glue.len())
            .filter(|&i| self.glue[i].is_none())
            .map(Slot::from_index)
            .collect()
    }

    pub fn has_boundary(&self) -> bool {
        self.glue.iter().any(Option::is_none)
    }

    /// Corner reached by crossing side `c` (the side starting at the corner).
    fn step_forward(&self, c: Corner) -> Option<Corner> {
        self.glue[Slot::new(c.face, c.corner).index()]
            .map(|t| Corner::new(t.face, next3(t.side)))
    }

    /// Corner reached by crossing side `c - 1` (the side ending at the corner).
    fn step_backward(&self, c: Corner) -> Option<Corner> {
        self.glue[Slot::new(c.face, prev3(c.corner)).index()].map(|t| Corner::new(t.face, t.side))
    }

    /// Walks the corners around the vertex at `start`.
    pub fn vertex_link(&self, start: Corner) -> Result<VertexLink, SurfaceError> {
        let limit = 3 * self.face_count;
        // rewind to the first corner of an open chain
        let mut first = start;
        let mut steps = 0;
        loop {
            match self.step_backward(first) {
                None => break,
                Some(p) if p == start => {
                    return self.walk_closed(start);
                }
                Some(p) => first = p,
            }
            steps += 1;
            if steps > limit {
                return Err(SurfaceError::InfiniteVertexLink(start));
            }
        }
        let mut corners = vec![first];
        let mut cur = first;
        while let Some(n) = self.step_forward(cur) {
            corners.push(n);
            cur = n;
            if corners.len() > limit {
                return Err(SurfaceError::InfiniteVertexLink(start));
            }
        }
        Ok(VertexLink { corners, closed: false })
    }

    fn walk_closed(&self, start: Corner) -> Result<VertexLink, SurfaceError> {
        let limit = 3 * self.face_count;
        let mut corners = vec![start];
        let mut cur = start;
        loop {
            let n = self.step_forward(cur).ok_or(SurfaceError::InfiniteVertexLink(start))?;
            if n == start {
                break;
            }
            corners.push(n);
            cur = n;
            if corners.len() > limit {
                return Err(SurfaceError::InfiniteVertexLink(start));
            }
        }
        Ok(VertexLink { corners, closed: true })
    }

    /// Links of all vertex classes, indexed by class id.
    pub fn vertex_links(&self) -> Vec<VertexLink> {
        let mut first = vec![usize::MAX; self.vertex_count];
        for c in 0..3 * self.face_count {
            let v = self.vertex_of[c];
            if first[v] == usize::MAX {
                first[v] = c;
            }
        }
        first
            .into_iter()
            .map(|c| self.vertex_link(Corner::from_index(c)).expect("validated surface"))
            .collect()
    }

    /// Faces reachable from `start` by crossing glued sides.
    pub fn reachable_faces(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.face_count];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(f) = queue.pop_front() {
            for s in 0..3u8 {
                if let Some(t) = self.glue[Slot::new(f, s).index()] {
                    if !seen[t.face] {
                        seen[t.face] = true;
                        queue.push_back(t.face);
                    }
                }
            }
        }
        seen
    }

    /// Checks the involution, connectivity and vertex-link invariants.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        for (i, g) in self.glue.iter().enumerate() {
            let s = Slot::from_index(i);
            if let Some(t) = *g {
                if t == s {
                    return Err(SurfaceError::SelfGluedEdge(s));
                }
                if self.glue[t.index()] != Some(s) {
                    return Err(SurfaceError::DuplicateSlot(t));
                }
            }
        }
        let reachable = self.reachable_faces(0).iter().filter(|&&r| r).count();
        if reachable != self.face_count {
            return Err(SurfaceError::Disconnected { reachable, faces: self.face_count });
        }
        // each class must be exactly one link
        let mut class_size = vec![0usize; self.vertex_count];
        for &v in &self.vertex_of {
            class_size[v] += 1;
        }
        let mut seen = vec![false; self.vertex_count];
        for c in 0..3 * self.face_count {
            let v = self.vertex_of[c];
            if seen[v] {
                continue;
            }
            seen[v] = true;
            let link = self.vertex_link(Corner::from_index(c))?;
            if link.corners.len() != class_size[v]
                || link.corners.iter().any(|k| self.vertex_of[k.index()] != v)
            {
                return Err(SurfaceError::InfiniteVertexLink(Corner::from_index(c)));
            }
        }
        Ok(())
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count() as i64 + self.face_count as i64
    }

    /// Boundary cycles as ordered lists of boundary slots; each cycle runs
    /// with the surface on its left.
    pub fn boundary_cycles(&self) -> Vec<Vec<Slot>> {
        let mut used = vec![false; self.glue.len()];
        let mut cycles = Vec::new();
        for i in 0..self.glue.len() {
            if self.glue[i].is_some() || used[i] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = Slot::from_index(i);
            while !used[cur.index()] {
                used[cur.index()] = true;
                cycle.push(cur);
                cur = self.next_boundary(cur);
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// The boundary side that follows `s` along its boundary cycle.
    pub fn next_boundary(&self, s: Slot) -> Slot {
        let mut c = Corner::new(s.face, next3(s.side));
        loop {
            match self.step_forward(c) {
                None => return Slot::new(c.face, c.corner),
                Some(n) => c = n,
            }
        }
    }

    /// `(genus, boundary component count)` from `χ = 2 − 2g − b`.
    pub fn genus_and_boundary(&self) -> (i64, usize) {
        let b = self.boundary_cycles().len();
        let genus = (2 - b as i64 - self.euler_characteristic()) / 2;
        (genus, b)
    }

    /// Per-class degree (number of edge ends at the vertex).
    pub fn vertex_degrees(&self) -> Vec<usize> {
        self.vertex_links().iter().map(VertexLink::degree).collect()
    }

    /// Per-class flag: does the vertex lie on the boundary.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        self.vertex_links().iter().map(|l| !l.closed).collect()
    }

    pub fn max_vertex_degree(&self) -> usize {
        self.vertex_degrees().into_iter().max().unwrap_or(0)
    }

    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for d in self.vertex_degrees() {
            *h.entry(d).or_insert(0) += 1;
        }
        h
    }
}

/// Two faces glued along all three sides: a doubled triangle (a sphere with
/// three cone points).
pub fn double_triangle() -> EquilateralSurface {
    EquilateralSurface::build(
        2,
        &[
            (Slot::new(0, 0), Slot::new(1, 0)),
            (Slot::new(0, 1), Slot::new(1, 2)),
            (Slot::new(0, 2), Slot::new(1, 1)),
        ],
    )
    .expect("double triangle is valid")
}

/// A single face with no gluings.
pub fn free_triangle() -> EquilateralSurface {
    EquilateralSurface::build(1, &[]).expect("a single face is valid")
}

/// The boundary of the tetrahedron: four faces, every vertex of degree 3.
pub fn tetrahedron() -> EquilateralSurface {
    EquilateralSurface::from_triangles(&[[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]])
        .expect("tetrahedron is valid")
}

/// A 24-face sphere: a cube with a four-triangle pyramid raised on each
/// square. Cube corners have degree 6, apexes degree 4.
pub fn snowsphere() -> EquilateralSurface {
    // cube corners 0..8 by bits (x, y, z); apexes 8..14
    let squares: [[usize; 4]; 6] = [
        [0, 2, 3, 1], // z = 0, outward -z
        [4, 5, 7, 6], // z = 1
        [0, 1, 5, 4], // y = 0
        [2, 6, 7, 3], // y = 1
        [0, 4, 6, 2], // x = 0
        [1, 3, 7, 5], // x = 1
    ];
    let mut tris = Vec::with_capacity(24);
    for (k, q) in squares.iter().enumerate() {
        let apex = 8 + k;
        for i in 0..4 {
            tris.push([q[i], q[(i + 1) % 4], apex]);
        }
    }
    EquilateralSurface::from_triangles(&tris).expect("snowsphere is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_triangle_counts() {
        let s = double_triangle();
        assert_eq!((s.vertex_count(), s.edge_count(), s.face_count()), (3, 3, 2));
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(s.genus_and_boundary(), (0, 0));
        // hand count: each vertex sees one corner of each face, two edges
        assert_eq!(s.vertex_degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn free_triangle_counts() {
        let s = free_triangle();
        assert_eq!(s.euler_characteristic(), 1);
        assert_eq!(s.genus_and_boundary(), (0, 1));
        assert_eq!(s.boundary_cycles()[0].len(), 3);
        assert_eq!(s.vertex_degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn snowsphere_is_a_sphere() {
        let s = snowsphere();
        assert_eq!(s.face_count(), 24);
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(s.genus_and_boundary(), (0, 0));
        let h = s.degree_histogram();
        assert_eq!(h.get(&6), Some(&8));
        assert_eq!(h.get(&4), Some(&6));
    }

    #[test]
    fn self_glued_side_rejected() {
        let e = EquilateralSurface::build(1, &[(Slot::new(0, 0), Slot::new(0, 0))]);
        assert_eq!(e, Err(SurfaceError::SelfGluedEdge(Slot::new(0, 0))));
    }

    #[test]
    fn duplicate_slot_rejected() {
        let e = EquilateralSurface::build(
            3,
            &[(Slot::new(0, 0), Slot::new(1, 0)), (Slot::new(0, 0), Slot::new(2, 0))],
        );
        assert_eq!(e, Err(SurfaceError::DuplicateSlot(Slot::new(0, 0))));
    }

    #[test]
    fn disconnected_rejected() {
        let e = EquilateralSurface::build(2, &[]);
        assert!(matches!(e, Err(SurfaceError::Disconnected { reachable: 1, faces: 2 })));
    }

    #[test]
    fn out_of_range_rejected() {
        let e = EquilateralSurface::build(1, &[(Slot::new(0, 0), Slot::new(3, 1))]);
        assert!(matches!(e, Err(SurfaceError::SlotOutOfRange(_))));
    }

    #[test]
    fn cone_with_self_adjacent_sides_is_accepted() {
        // sides 2 and 0 of one face share corner 0; gluing them makes a cone
        let s = EquilateralSurface::build(1, &[(Slot::new(0, 0), Slot::new(0, 2))]).unwrap();
        let link = s.vertex_link(Corner::new(0, 0)).unwrap();
        assert!(link.closed);
        assert_eq!(link.corners.len(), 1);
    }

    #[test]
    fn reflection_walk_reaches_every_face() {
        let s = snowsphere();
        for f in 0..s.face_count() {
            assert!(s.reachable_faces(f).iter().all(|&r| r));
        }
    }

    #[test]
    fn generalised_triangulation_accepted() {
        // two faces sharing two sides
        let s = EquilateralSurface::build(
            2,
            &[(Slot::new(0, 0), Slot::new(1, 0)), (Slot::new(0, 1), Slot::new(1, 2))],
        )
        .unwrap();
        assert_eq!(s.genus_and_boundary().1, 1);
    }

    #[test]
    fn tetrahedron_degrees() {
        let s = tetrahedron();
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(s.vertex_degrees(), vec![3, 3, 3, 3]);
    }
}
