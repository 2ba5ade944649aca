//! Global numerical tolerances.
//!
//! Every threshold used by the library lives here. The defaults can be
//! replaced process-wide with [`Tolerances::set_global`]; reports embed
//! the set in force so runs stay reproducible.

use serde::{Deserialize, Serialize};
use std::sync::RwLock;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance on matrix residuals (orthogonality, reconstruction).
    pub matrix: f64,
    /// Relative gap below which two singular values count as tied.
    pub tie_gap: f64,
    /// A shape matrix is degenerate when `s_min <= rank * s_max`.
    pub rank: f64,
    /// Ellipse boundary band and degenerate-span distance.
    pub boundary: f64,
    /// Maximum residual for an accepted certificate.
    pub certificate: f64,
    /// Bisection stopping width on angles / homotopy parameters.
    pub bisection: f64,
    /// Target for the homotopy gap function `|g(s)|`.
    pub homotopy_gap: f64,
    /// Iteration cap for every bisection.
    pub max_bisection: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            matrix: 1e-10,
            tie_gap: 1e-9,
            rank: 1e-10,
            boundary: 1e-8,
            certificate: 1e-8,
            bisection: 1e-12,
            homotopy_gap: 1e-12,
            max_bisection: 200,
        }
    }
}

static GLOBAL: RwLock<Option<Tolerances>> = RwLock::new(None);

impl Tolerances {
    /// The tolerance set currently in force.
    pub fn global() -> Tolerances {
        GLOBAL
            .read()
            .map(|g| g.unwrap_or_default())
            .unwrap_or_default()
    }

    pub fn set_global(tol: Tolerances) {
        if let Ok(mut g) = GLOBAL.write() {
            *g = Some(tol);
        }
    }
}
