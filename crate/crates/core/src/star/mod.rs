//! Star-shapedness certificates: for a target `alpha L(X)` with
//! `0 <= alpha <= 1`, an explicit rotation realising it.

mod certify;
mod check;
mod homotopy;

pub use certify::{
    certify_row_scaling, certify_scaled_frames, certify_scaled_point, realize_scaled, Certificate, HomotopyStep,
    Witness,
};
pub use check::{star_check, star_check_joint, StarEntry, StarReport};
pub use homotopy::{homotopy_realize, BlockFamily, EllipseFamily, HomotopyEnd, HomotopyOutcome, RowPairFamily};
