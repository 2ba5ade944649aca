//! Planar boundary machinery: support values and maximising frames,
//! maximiser structure, diagonal hull membership, non-convexity witnesses
//! and convexity reports.

mod convexity;
mod counterexample;
mod gamma;
mod maxtrace;
mod support;
mod thompson;

pub use convexity::{convexity_check, ConvexityReport, DriftReport};
pub use counterexample::{counterexample_report, CounterexampleConfig, CounterexampleKind, CounterexampleReport};
pub use gamma::{
    block_decompose, gamma_sample, gamma_sample_frames, gamma_verify, BlockFactors, GammaCase, GammaFrames, GammaPath,
    GammaReport, GammaTransport, MaximizerStructure,
};
pub use maxtrace::{argmax_frames, max_trace};
pub use support::{support_boundary, SupportBoundary, SupportSample, DEFAULT_GRID};
pub use thompson::{thompson_membership, thompson_vertices, DiagonalHullQuery, ThompsonResult};
