//! K-cells of stationary Poisson hyperplane processes.
//!
//! The crate builds the intersection of all process halfspaces that contain a
//! fixed convex body `K` (the K-cell `Z_K`) exactly, and measures how fast it
//! approaches `K` in the Hausdorff metric as the intensity grows.
//!
//! Layout:
//! - [`geom`]: convex bodies with closed-form support functions, distances,
//!   parallel-body sampling and surface area measures.
//! - [`direction`]: even directional distributions on the sphere.
//! - [`process`]: Poisson hyperplane samplers (hitting sets, annuli, coupled
//!   intensity streams).
//! - [`cell`]: halfspace intersection kernels and the certified K-cell.
//! - [`metrics`]: the separation functional `mu(K, phi, eps)` and scaling fits.
//! - [`experiment`]: seeded Monte Carlo harnesses and persistence.
//! - [`selfcheck`]: the invariant suite behind `hypercell validate`.

pub mod cell;
pub mod direction;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod linalg;
pub mod metrics;
pub mod process;
pub mod rng;
pub mod selfcheck;
pub mod tol;

pub use cell::{CellPolytope, WindowPolicy};
pub use direction::{DirectionalDistribution, IntegrationConfig, MeasureSupport};
pub use error::{Error, Result};
pub use geom::{Body, SurfaceMeasure, UnitVector};
pub use process::{Hyperplane, ProcessParams};
pub use rng::RngKey;
