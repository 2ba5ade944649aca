//! Linear images of special orthogonal matrix orbits
//! `O(A) = { U A V : U, V in SO_n }`.
//!
//! The crate computes explicit membership certificates showing that
//! `L(O(A))` is star-shaped about the origin, exact support functions and
//! convex boundaries for planar images, the structure of boundary
//! maximizers, and numerical evidence for non-convex configurations.

pub mod boundary;
pub mod ellipsoid;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod orbit;
pub mod star;
pub mod tolerance;

pub use error::{OrbitError, Result};
pub use orbit::{Group, JointKind, JointLinearMap, JointOrbitSpec, LinearMapSpec, OrbitSpec, PointCloud};
pub use linalg::{Matrix, Rotation, RotationPath, SignedSvd};
pub use tolerance::Tolerances;
