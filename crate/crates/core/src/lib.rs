//! Shape measures of closed planar contours.
//!
//! A simple closed contour `c` is identified with the uniform probability
//! measure on its interior. Normal deformations of the contour lift to
//! constant-divergence flow fields through a Neumann problem on the interior;
//! those flows carry the optimal-transport inner product, split into
//! translation, scale and deformation parts, and drive geodesic shooting on
//! the manifold of shape measures.
//!
//! Module map:
//! - [`contour`]: sampled curves, normals, boundary quadrature.
//! - [`mesh`]: interior triangulation.
//! - [`poisson`]: P1 finite elements, Neumann and Dirichlet solves, inner product.
//! - [`recovery`]: gradient recovery at boundary vertices.
//! - [`tangent`]: lifting, delifting, decomposition and projection.
//! - [`dynamics`]: flow integration, geodesic shooting and path diagnostics.

pub mod contour;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod poisson;
pub mod recovery;
pub mod tangent;

pub use contour::{BoundaryScalarField, BoundaryVectorField, Contour};
pub use error::{Result, ShapeError};
pub use geometry::Vec2;
pub use mesh::{triangulate, TriMesh};
