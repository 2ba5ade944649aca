//! Trace-parametrised ellipses and ellipsoids swept by rotation frames, and
//! the constructions that make them degenerate.

mod curve;
mod degenerate;
mod recursive;

pub(crate) use curve::{eu_unchecked as curve_eu, euv_unchecked as curve_euv};
pub use curve::{
    ellipse_eu, ellipse_eu_rows, ellipse_witness, ellipsoid_euv, ellipsoid_witness, membership, EllipsoidCurve,
    GapEval, Membership, MembershipResult,
};
pub use degenerate::{degenerate_u0, degenerate_u0_rows, degenerate_uv, U0Branch, U0Construction};
pub use recursive::{inverse_spherical, recursive_rotation, spherical, spherical_coeffs, RecursiveRotation};
