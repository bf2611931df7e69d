//! File formats, SVG rendering and the command-line front end for
//! [`etri_core`].

pub mod cli;
pub mod error;
pub mod etri_format;
pub mod specs;
pub mod svg;
pub mod trimesh;

pub use error::{FormatError, ParseError};
pub use etri_format::{read_etri, write_etri, SurfaceFile};
pub use svg::{render_svg, SvgError, SvgOptions};
pub use trimesh::{read_trimesh, write_trimesh};
