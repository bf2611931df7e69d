//! Equilateral triangulations of planar domains and abstract surfaces.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, rendering and
//! the command-line front end live in the `etri` crate.
//!
//! Modules:
//!
//! - [`surface`]: coordinate-free equilateral surfaces (gluing tables, vertex
//!   classes, subdivision, colourings).
//! - [`planar`]: planar triangle meshes, piecewise-affine maps and their
//!   dilatation.
//! - [`rect`]: bounded-angle triangulation of a rectangle with prescribed
//!   boundary vertices (Whitney squares plus a collar).
//! - [`hemmed`]: lattice fill plus collar triangulation of planar domains
//!   bounded by analytic curves, and chaining of such pieces.
//! - [`belyi`]: the Belyi function of a 3-coloured equilateral surface.
//! - [`atlas`]: classical examples (lattice, cylinder, hyperbolic
//!   tessellations, punctured spheres).
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod atlas;
pub mod belyi;
pub mod dyadic;
pub mod hemmed;
pub mod math;
pub mod planar;
pub mod rect;
pub mod surface;

pub use num_complex::Complex64 as Complex;
