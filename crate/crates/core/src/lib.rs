//! Face-to-face simplicial tilings of `R^d` built by repeated prism lifting,
//! with exact structural checks and the shape-optimal parameter ray.
//!
//! A tiling is built combinatorially on the integer lattice
//! ([`tessellation`]); lengths enter only through a [`ParamVector`] when
//! cells are measured ([`metrics`]).

pub mod error;
pub mod io;
pub mod metrics;
pub mod optimize;
pub mod params;
pub mod tessellation;
pub mod validation;

pub use error::{Error, Result};
pub use metrics::{EdgeClass, RegularityReport};
pub use params::{optimal_params, ParamVector, PermutationVector};
pub use tessellation::{build, LatticeVertex, Mesh, SimplexCell, Window};
