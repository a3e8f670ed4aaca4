//! Geometric tolerances shared by every module.

/// Feasibility slack for halfspace membership, containment and window checks.
pub const FEASIBILITY: f64 = 1e-9;

/// Allowed deviation of `|u|` from 1 for a [`crate::geom::UnitVector`].
pub const UNIT_NORM: f64 = 1e-12;

/// Linear solves with a residual above this are treated as degenerate.
pub const DEGENERATE_RESIDUAL: f64 = 1e-7;

/// Angular tolerance when matching facet normals against atoms.
pub const ANGULAR: f64 = 1e-9;

/// Total-mass tolerance for probability measures.
pub const MASS: f64 = 1e-9;
