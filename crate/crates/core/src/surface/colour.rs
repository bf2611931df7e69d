use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{EquilateralSurface, Subdivision, SurfaceError, VertexOrigin};

/// The three branch values of a Belyi function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Colour {
    MinusOne,
    One,
    Infinity,
}

impl Colour {
    pub const ALL: [Colour; 3] = [Colour::MinusOne, Colour::One, Colour::Infinity];
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Colour::MinusOne => "-1",
            Colour::One => "1",
            Colour::Infinity => "inf",
        })
    }
}

/// A colour per vertex class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colouring {
    pub colours: Vec<Colour>,
}

impl Colouring {
    /// True when every face sees three distinct colours.
    pub fn is_valid_for(&self, s: &EquilateralSurface) -> bool {
        self.colours.len() == s.vertex_count()
            && (0..s.face_count()).all(|f| {
                let [a, b, c] = s.face_vertices(f).map(|v| self.colours[v]);
                a != b && b != c && a != c
            })
    }
}

/// Colours a barycentric subdivision: original vertices `1`, edge midpoints
/// `-1`, face centers `∞`.
pub fn canonical_three_colouring(sub: &Subdivision) -> Result<Colouring, SurfaceError> {
    let s = &sub.surface;
    if sub.provenance.len() != s.face_count() {
        return Err(SurfaceError::MissingProvenance);
    }
    let mut colours: Vec<Option<Colour>> = vec![None; s.vertex_count()];
    for (f, tags) in sub.provenance.iter().enumerate() {
        for (k, tag) in tags.iter().enumerate() {
            let c = match tag {
                VertexOrigin::Original => Colour::One,
                VertexOrigin::EdgeMidpoint => Colour::MinusOne,
                VertexOrigin::FaceCenter => Colour::Infinity,
            };
            let v = s.face_vertices(f)[k];
            match colours[v] {
                None => colours[v] = Some(c),
                Some(old) if old != c => return Err(SurfaceError::MissingProvenance),
                Some(_) => {}
            }
        }
    }
    let colours = colours.into_iter().collect::<Option<Vec<_>>>().ok_or(SurfaceError::MissingProvenance)?;
    let out = Colouring { colours };
    debug_assert!(out.is_valid_for(s));
    Ok(out)
}

/// Finds the lexicographically smallest valid colouring (by class id, with
/// colours ordered `-1 < 1 < ∞`), or `None` when the surface is not
/// 3-colourable.
///
/// On a connected triangulated surface the colours of one face force every
/// other colour through shared sides, so the search space is the six
/// assignments of the first face; each is propagated and checked.
pub fn three_colour_search(s: &EquilateralSurface) -> Option<Colouring> {
    let mut best: Option<Vec<Colour>> = None;
    let [a, b, c] = s.face_vertices(0);
    if a == b || b == c || a == c {
        return None;
    }
    for p in PERMUTATIONS {
        let seed = [Colour::ALL[p[0]], Colour::ALL[p[1]], Colour::ALL[p[2]]];
        if let Some(col) = propagate(s, seed) {
            if best.as_ref().is_none_or(|b| col < *b) {
                best = Some(col);
            }
        }
    }
    best.map(|colours| Colouring { colours })
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn third(a: Colour, b: Colour) -> Option<Colour> {
    Colour::ALL.into_iter().find(|&c| c != a && c != b).filter(|_| a != b)
}

fn propagate(s: &EquilateralSurface, seed: [Colour; 3]) -> Option<Vec<Colour>> {
    let mut col: Vec<Option<Colour>> = vec![None; s.vertex_count()];
    let mut done = vec![false; s.face_count()];
    let mut queue = VecDeque::from([0usize]);
    let fv = s.face_vertices(0);
    for k in 0..3 {
        col[fv[k]] = Some(seed[k]);
    }
    while let Some(f) = queue.pop_front() {
        if done[f] {
            continue;
        }
        let vs = s.face_vertices(f);
        let known: Vec<usize> = (0..3).filter(|&k| col[vs[k]].is_some()).collect();
        if known.len() < 2 {
            continue;
        }
        if known.len() == 2 {
            let missing = 3 - known[0] - known[1];
            col[vs[missing]] = Some(third(col[vs[known[0]]]?, col[vs[known[1]]]?)?);
        }
        let [x, y, z] = vs.map(|v| col[v].unwrap());
        if x == y || y == z || x == z {
            return None;
        }
        done[f] = true;
        for side in 0..3u8 {
            if let Some(t) = s.glued(super::Slot::new(f, side)) {
                if !done[t.face] {
                    queue.push_back(t.face);
                }
            }
        }
    }
    if done.iter().any(|d| !d) {
        return None;
    }
    col.into_iter().collect()
}
