use alloc::vec;
use alloc::vec::Vec;

use super::{next3, prev3, EquilateralSurface, Slot, SurfaceError};

/// Where a vertex of a barycentric subdivision came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexOrigin {
    Original,
    EdgeMidpoint,
    FaceCenter,
}

/// A barycentric subdivision with per-corner provenance tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subdivision {
    pub surface: EquilateralSurface,
    /// Indexed by face of the subdivided surface, then corner.
    pub provenance: Vec<[VertexOrigin; 3]>,
}

// Sub-face layout: face f side c yields two faces,
//   A(f, c) = 6f + 2c     corners (V_c, M_c, B)
//   H(f, c) = 6f + 2c + 1 corners (M_c, V_{c+1}, B)
// where V are original corners, M_c the midpoint of side c, B the barycenter.
fn first_half(f: usize, c: u8) -> usize {
    6 * f + 2 * c as usize
}

fn second_half(f: usize, c: u8) -> usize {
    6 * f + 2 * c as usize + 1
}

/// Splits every face into six by inserting edge midpoints and barycenters.
pub fn barycentric_subdivide(s: &EquilateralSurface) -> Subdivision {
    let n = 6 * s.face_count();
    let mut glue = vec![None; 3 * n];
    let mut set = |a: Slot, b: Slot| {
        glue[3 * a.face + a.side as usize] = Some(b);
        glue[3 * b.face + b.side as usize] = Some(a);
    };
    for f in 0..s.face_count() {
        for c in 0..3u8 {
            // M_c -> B against B -> M_c
            set(Slot::new(first_half(f, c), 1), Slot::new(second_half(f, c), 2));
            // V_{c+1} -> B against B -> V_{c+1}
            set(Slot::new(second_half(f, c), 1), Slot::new(first_half(f, next3(c)), 2));
            if let Some(t) = s.glued(Slot::new(f, c)) {
                set(Slot::new(first_half(f, c), 0), Slot::new(second_half(t.face, t.side), 0));
            }
        }
    }
    let surface = EquilateralSurface::from_glue_table(glue).expect("subdivision of a valid surface");
    let provenance = (0..n)
        .map(|i| {
            use VertexOrigin::*;
            if i % 2 == 0 {
                [Original, EdgeMidpoint, FaceCenter]
            } else {
                [EdgeMidpoint, Original, FaceCenter]
            }
        })
        .collect();
    Subdivision { surface, provenance }
}

/// Replaces every boundary face by a fan of `2 d0 + 1` faces: `d0` new
/// vertices `v_1..v_{d0}` are stacked between the boundary side `AB` and the
/// opposite corner `C = v_0`, each `v_i` joined to `A`, `B` and `v_{i-1}`.
///
/// Each boundary vertex gains `d0` edge ends per incident boundary face.
pub fn boundary_fan_subdivide(
    s: &EquilateralSurface,
    d0: usize,
) -> Result<EquilateralSurface, SurfaceError> {
    assert!(d0 >= 1, "fan depth must be at least 1");
    if !s.has_boundary() {
        return Err(SurfaceError::NoBoundary);
    }
    let on_boundary = s.boundary_vertices();
    let nf = s.face_count();
    // boundary side of each boundary face
    let mut bside: Vec<Option<u8>> = vec![None; nf];
    for slot in s.boundary_slots() {
        if bside[slot.face].is_some() {
            return Err(SurfaceError::BoundaryCornerViolation(slot.face));
        }
        bside[slot.face] = Some(slot.side);
    }
    for f in 0..nf {
        if let Some(side) = bside[f] {
            let c = super::Corner::new(f, prev3(side));
            if on_boundary[s.vertex(c)] {
                return Err(SurfaceError::BoundaryCornerViolation(f));
            }
        }
    }

    // Fan layout for a boundary face f with base index b:
    //   L_i = b + 2(i-1)      corners (A, v_i, v_{i-1})
    //   R_i = b + 2(i-1) + 1  corners (v_i, B, v_{i-1})
    //   P   = b + 2 d0        corners (A, B, v_{d0})
    let mut base = vec![0usize; nf];
    let mut total = 0;
    for f in 0..nf {
        base[f] = total;
        total += if bside[f].is_some() { 2 * d0 + 1 } else { 1 };
    }
    // where each old side ends up
    let remap = |slot: Slot| -> Slot {
        let b = base[slot.face];
        match bside[slot.face] {
            None => Slot::new(b, slot.side),
            Some(bs) => {
                if slot.side == bs {
                    Slot::new(b + 2 * d0, 0)
                } else if slot.side == next3(bs) {
                    // B -> C
                    Slot::new(b + 1, 1)
                } else {
                    // C -> A
                    Slot::new(b, 2)
                }
            }
        }
    };
    // old boundary face: A = corner bs, B = corner bs+1, C = corner bs+2
    let mut glue = vec![None; 3 * total];
    let mut set = |a: Slot, b: Slot| {
        glue[3 * a.face + a.side as usize] = Some(b);
        glue[3 * b.face + b.side as usize] = Some(a);
    };
    for (a, b) in s.gluings() {
        set(remap(a), remap(b));
    }
    for f in 0..nf {
        if bside[f].is_none() {
            continue;
        }
        let b = base[f];
        let l = |i: usize| b + 2 * (i - 1);
        let r = |i: usize| b + 2 * (i - 1) + 1;
        for i in 1..=d0 {
            set(Slot::new(l(i), 1), Slot::new(r(i), 2));
            if i >= 2 {
                set(Slot::new(l(i), 2), Slot::new(l(i - 1), 0));
                set(Slot::new(r(i), 1), Slot::new(r(i - 1), 0));
            }
        }
        let p = b + 2 * d0;
        set(Slot::new(p, 1), Slot::new(r(d0), 0));
        set(Slot::new(p, 2), Slot::new(l(d0), 0));
    }
    EquilateralSurface::from_glue_table(glue)
}
