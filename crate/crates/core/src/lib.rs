//! Virtual element solver for 2D time-harmonic elastic waves in potential
//! form.
//!
//! The displacement is split as `u = grad(phi_P) + curl(phi_S)` with
//! `curl(phi) = (d2 phi, -d1 phi)`. Both potentials solve scalar Helmholtz
//! problems that talk to each other only through tangential derivatives on
//! the boundary, so each one may use its own mesh and polynomial order.
//!
//! Layering, bottom to top:
//!
//! - [`mesh`], [`quadrature`], [`polybasis`]: geometry and polynomial algebra;
//! - [`vemspace`]: per-element projectors and stabilized matrices;
//! - [`dofs`], [`trace`]: global numbering and boundary operators;
//! - [`assembly`], [`solver`]: the coupled block system and its direct solve;
//! - [`hodge`]: numerical splitting of a vector source into potentials;
//! - [`postprocess`], [`scenarios`]: displacement reconstruction, errors and
//!   convergence studies for the built-in test problems.

pub mod assembly;
pub mod dofs;
pub mod error;
pub mod hodge;
pub mod material;
pub mod mesh;
pub mod polybasis;
pub mod postprocess;
pub mod quadrature;
pub mod scenarios;
pub mod solver;
pub mod sparse;
pub mod trace;
pub mod vemspace;

pub use error::{Error, Result, SolveDiagnostics};
pub use material::MaterialParams;
pub use mesh::PolygonalMesh;
