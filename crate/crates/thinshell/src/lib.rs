//! Surface geometry, thin-shell averaging, weighted Helmholtz-Leray
//! decompositions and the limit Navier-Stokes equations on closed surfaces
//! of revolution.

pub mod calculus;
pub mod domain;
pub mod error;
pub mod field;
pub mod grid;
pub mod helmholtz;
pub mod identities;
pub mod korn;
pub mod limit;
pub mod modal;
pub mod profile;
pub mod quadrature;
pub mod rates;
pub mod rigid;
pub mod shell;
pub mod surface;

pub use error::{Error, Result};
pub use field::{MatrixField, ScalarField, Shape, TangentField, VectorField};
pub use grid::SurfaceGrid;
pub use profile::{Profile, Topology};
pub use surface::{shell_jacobian, surface_quantities, Surface, SurfacePoint, M3, V3};
