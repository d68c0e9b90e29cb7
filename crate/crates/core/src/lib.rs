//! Spectral construction and desk-scale certification of dissipative
//! symmetry-breaking subsolutions of the incompressible Euler equations
//! on the torus.
//!
//! The pipeline: evolve a smooth 2-D flow ([`euler2d`]), form its exact
//! relaxation triplet, bracket its kinetic energy density with a strictly
//! larger profile ([`profiles`]), lift everything to the 3-D torus
//! ([`lift3d`]), optionally saturate the initial profile with an
//! oscillatory pump ([`pump`]), and certify every hypothesis of the
//! resulting chain ([`certify`]): linear-system residuals, strict
//! subsolution margins, the ei-x3 symmetry-breaking flip, the energy
//! budget, and initial-data closeness.

pub mod certify;
pub mod energy;
pub mod error;
pub mod euler2d;
pub mod grid;
pub mod lift3d;
pub mod profiles;
pub mod pump;
pub mod residual;
pub mod snapshot;
pub mod spectral;
mod util;

pub use error::{Error, Result};
pub use grid::{Grid, GridField};
pub use spectral::SpectralField;
