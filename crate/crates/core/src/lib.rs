//! Density-aware drilling trajectory planning and simulation.
//!
//! The pipeline maps a calibrated bone-density volume to a heterogeneous
//! elastic material field, evaluates straight and constant-curvature screw
//! trajectories with a voxel finite-element solver, picks the trajectory with
//! the best cancellous stress/strain behaviour, and simulates a concentric-tube
//! steerable drill following the winner, scoring realized paths against the
//! plan.
//!
//! Modules mirror the pipeline stages:
//!
//! - [`volume`]: density volumes, synthetic phantoms, HU → material mapping
//! - [`trajectory`]: straight + constant-curvature curves and screw sweeps
//! - [`fem`]: voxel hexahedral linear elasticity with per-voxel moduli
//! - [`metrics`]: circle fits, radius errors, deviation statistics
//! - [`ctsdr`]: concentric-tube steerable drill deployment and trial batches
//! - [`planner`]: grid search over the trajectory family with FE ranking
//! - [`export`]: JSON/CSV/SVG artifact writers

pub mod ctsdr;
pub mod export;
pub mod fem;
pub mod metrics;
pub mod planner;
pub mod trajectory;
pub mod volume;

/// 3-vector in millimetres (positions) or newtons (forces).
pub type Vec3 = nalgebra::Vector3<f64>;
/// A point in the volume's world frame, millimetres.
pub type Point3 = nalgebra::Point3<f64>;
