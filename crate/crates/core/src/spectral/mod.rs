//! Eigen-analysis of correlation ensembles.
//!
//! Eigenportfolios and explained volatility, the Green's-function density
//! of states, level-spacing statistics after staircase unfolding, and
//! participation-ratio localization curves built from Gaussian radial
//! basis interpolation.

mod dos;
mod eigen;
mod pr;
mod spacing;

pub use dos::{dos_green, l1_distance, trapezoid_mass, DOSCurve};
pub use eigen::{cumulative_volatility, eig_sym, eig_sym_matrix, eigenportfolio, ipr, ipr_raw, EigenSystem};
pub use pr::{expected_pr, rbf_fit, PRCurve, RbfInterpolant, SigmaPolicy};
pub use spacing::{unfold_and_spacings, SpacingHistogram};
