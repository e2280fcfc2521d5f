//! Straight / constant-curvature drilling trajectories.
//!
//! A trajectory is a straight segment followed by a planar circular arc,
//! tangent-continuous at the bend point. The arc curves toward
//! `bend_plane_normal × direction` (right-hand rule); `curvature = 0`
//! degenerates to a straight line.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::GridGeometry;
use crate::{Point3, Vec3};

/// Unit-vector / orthogonality tolerance for trajectory frames.
pub const FRAME_TOL: f64 = 1e-12;

/// Default bend offset from the entry, mm.
pub const DEFAULT_STRAIGHT_LENGTH_MM: f64 = 25.0;

/// The two curved-trajectory curvatures of the reference family, 1/mm.
pub const CURVATURE_GENTLE_PER_MM: f64 = 0.014388;
pub const CURVATURE_SHARP_PER_MM: f64 = 0.028571;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("invalid trajectory: {reason}")]
    Invalid { reason: String },
    #[error("arc length {s} outside [0, {total}]")]
    ArcLengthOutOfRange { s: f64, total: f64 },
    #[error("invalid radius {radius}: must be > 0")]
    InvalidRadius { radius: f64 },
    #[error("invalid screw spec: {reason}")]
    InvalidScrew { reason: String },
    #[error("screw sweep leaves the grid: {escaped} voxel centre(s) outside bounds, nearest at {first:?}")]
    ScrewEscapesGrid {
        escaped: usize,
        first: [i64; 3],
        /// Every would-be voxel (integer coords) outside the grid.
        all: Vec<[i64; 3]>,
    },
}

/// Entry pose plus arc parameters; the planning variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub entry_mm: [f64; 3],
    pub direction: [f64; 3],
    pub bend_plane_normal: [f64; 3],
    pub straight_length_mm: f64,
    pub curvature_per_mm: f64,
    pub total_length_mm: f64,
}

impl Trajectory {
    /// Builds a trajectory, normalizing `direction` and projecting
    /// `bend_plane_normal` orthogonal to it so the frame invariants hold by
    /// construction.
    pub fn new(
        entry_mm: [f64; 3],
        direction: [f64; 3],
        bend_plane_normal: [f64; 3],
        straight_length_mm: f64,
        curvature_per_mm: f64,
        total_length_mm: f64,
    ) -> Result<Self, TrajectoryError> {
        let dir = Vec3::from(direction);
        let raw_normal = Vec3::from(bend_plane_normal);
        if dir.norm() < 1e-9 {
            return Err(TrajectoryError::Invalid {
                reason: "direction must be non-zero".into(),
            });
        }
        let dir = dir / dir.norm();
        let mut normal = raw_normal - dir * raw_normal.dot(&dir);
        if normal.norm() < 1e-9 {
            return Err(TrajectoryError::Invalid {
                reason: "bend_plane_normal must not be parallel to direction".into(),
            });
        }
        normal /= normal.norm();
        let t = Self {
            entry_mm,
            direction: dir.into(),
            bend_plane_normal: normal.into(),
            straight_length_mm,
            curvature_per_mm,
            total_length_mm,
        };
        t.validate()?;
        Ok(t)
    }

    /// Checks every invariant; used directly when deserializing files.
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let invalid = |reason: String| Err(TrajectoryError::Invalid { reason });
        let dir = self.direction_vec();
        let normal = self.normal_vec();
        for v in [&self.entry_mm, &self.direction, &self.bend_plane_normal] {
            if v.iter().any(|c| !c.is_finite()) {
                return invalid(format!("non-finite vector component in {v:?}"));
            }
        }
        if (dir.norm() - 1.0).abs() > FRAME_TOL {
            return invalid(format!("|direction| = {} is not 1", dir.norm()));
        }
        if (normal.norm() - 1.0).abs() > FRAME_TOL {
            return invalid(format!("|bend_plane_normal| = {} is not 1", normal.norm()));
        }
        if dir.dot(&normal).abs() > FRAME_TOL {
            return invalid(format!(
                "direction . bend_plane_normal = {} is not 0",
                dir.dot(&normal)
            ));
        }
        if !(self.total_length_mm > 0.0) {
            return invalid(format!("total_length_mm = {} must be > 0", self.total_length_mm));
        }
        if !(self.straight_length_mm >= 0.0) || self.straight_length_mm > self.total_length_mm {
            return invalid(format!(
                "straight_length_mm = {} must lie in [0, total_length_mm]",
                self.straight_length_mm
            ));
        }
        if !(self.curvature_per_mm >= 0.0) || !self.curvature_per_mm.is_finite() {
            return invalid(format!("curvature_per_mm = {} must be >= 0", self.curvature_per_mm));
        }
        Ok(())
    }

    pub fn entry(&self) -> Point3 {
        Point3::from(self.entry_mm)
    }

    pub fn direction_vec(&self) -> Vec3 {
        Vec3::from(self.direction)
    }

    pub fn normal_vec(&self) -> Vec3 {
        Vec3::from(self.bend_plane_normal)
    }

    /// In-plane turn direction: the arc curves toward this unit vector.
    pub fn turn_vec(&self) -> Vec3 {
        self.normal_vec().cross(&self.direction_vec())
    }

    fn check_range(&self, s: f64) -> Result<(), TrajectoryError> {
        // allow a hair of rounding slack at the ends
        if !s.is_finite() || s < -1e-9 || s > self.total_length_mm + 1e-9 {
            return Err(TrajectoryError::ArcLengthOutOfRange {
                s,
                total: self.total_length_mm,
            });
        }
        Ok(())
    }

    /// Position at arc length `s` from the entry, mm.
    pub fn point_at(&self, s: f64) -> Result<Point3, TrajectoryError> {
        self.check_range(s)?;
        let d = self.direction_vec();
        if s <= self.straight_length_mm || self.curvature_per_mm == 0.0 {
            return Ok(self.entry() + d * s);
        }
        let bend_point = self.entry() + d * self.straight_length_mm;
        let u = self.turn_vec();
        let kappa = self.curvature_per_mm;
        let theta = (s - self.straight_length_mm) * kappa;
        Ok(bend_point + d * (theta.sin() / kappa) + u * ((1.0 - theta.cos()) / kappa))
    }

    /// Unit tangent at arc length `s`; continuous across the bend point.
    pub fn tangent_at(&self, s: f64) -> Result<Vec3, TrajectoryError> {
        self.check_range(s)?;
        let d = self.direction_vec();
        if s <= self.straight_length_mm || self.curvature_per_mm == 0.0 {
            return Ok(d);
        }
        let u = self.turn_vec();
        let theta = (s - self.straight_length_mm) * self.curvature_per_mm;
        Ok(d * theta.cos() + u * theta.sin())
    }
}

/// Implanted screw geometry (defaults: 2.5 mm diameter, 55 mm length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrewSpec {
    pub diameter_mm: f64,
    pub length_mm: f64,
}

impl Default for ScrewSpec {
    fn default() -> Self {
        Self {
            diameter_mm: 2.5,
            length_mm: 55.0,
        }
    }
}

impl ScrewSpec {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if !(self.diameter_mm > 0.0) || !(self.length_mm > 0.0) {
            return Err(TrajectoryError::InvalidScrew {
                reason: format!(
                    "diameter and length must be > 0, got {} x {}",
                    self.diameter_mm, self.length_mm
                ),
            });
        }
        Ok(())
    }
}

/// Converts a bend radius (mm) to curvature (1/mm).
pub fn curvature_from_radius(radius_mm: f64) -> Result<f64, TrajectoryError> {
    if !(radius_mm > 0.0) || !radius_mm.is_finite() {
        return Err(TrajectoryError::InvalidRadius { radius: radius_mm });
    }
    Ok(1.0 / radius_mm)
}

/// Voxels whose centres lie within the screw radius of the curve restricted to
/// `s in [0, screw.length]`.
///
/// The curve is sampled at arc-length steps of `min(spacing)/4`; membership is
/// a radial test against each chord segment (axial overhang beyond the segment
/// ends does not count, so the swept set matches the analytic cylinder volume
/// without end caps). If the sweep would claim voxel centres outside the grid
/// the escaping voxels are reported as an error payload — the planner treats
/// that as an infeasibility signal.
pub fn swept_screw_voxels(
    traj: &Trajectory,
    screw: &ScrewSpec,
    grid: &GridGeometry,
) -> Result<Vec<usize>, TrajectoryError> {
    screw.validate()?;
    if screw.length_mm > traj.total_length_mm + 1e-9 {
        return Err(TrajectoryError::InvalidScrew {
            reason: format!(
                "screw length {} exceeds trajectory length {}",
                screw.length_mm, traj.total_length_mm
            ),
        });
    }
    let radius = 0.5 * screw.diameter_mm;
    let step = grid.min_spacing() / 4.0;
    let n_steps = (screw.length_mm / step).ceil() as usize;
    let samples: Vec<Point3> = (0..=n_steps)
        .map(|i| {
            let s = (i as f64 / n_steps as f64) * screw.length_mm;
            traj.point_at(s).expect("s within range by construction")
        })
        .collect();

    let mut inside = vec![false; grid.voxel_count()];
    let mut escaped: std::collections::BTreeSet<[i64; 3]> = Default::default();
    let sp = grid.spacing_mm;
    let org = grid.origin_mm;

    for seg in samples.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let ab = b - a;
        let len2 = ab.norm_squared();
        // integer bounding box of the segment inflated by the radius
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for ax in 0..3 {
            let min = a[ax].min(b[ax]) - radius;
            let max = a[ax].max(b[ax]) + radius;
            lo[ax] = ((min - org[ax]) / sp[ax] - 0.5).floor() as i64;
            hi[ax] = ((max - org[ax]) / sp[ax] - 0.5).ceil() as i64;
        }
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let center = Point3::new(
                        org[0] + sp[0] * (i as f64 + 0.5),
                        org[1] + sp[1] * (j as f64 + 0.5),
                        org[2] + sp[2] * (k as f64 + 0.5),
                    );
                    let ap = center - a;
                    let t = if len2 > 0.0 { ap.dot(&ab) / len2 } else { 0.0 };
                    if !(0.0..=1.0).contains(&t) {
                        continue; // radial band of this chord only
                    }
                    if (ap - ab * t).norm_squared() > radius * radius {
                        continue;
                    }
                    if grid.contains([i, j, k]) {
                        inside[grid.linear_index(i as usize, j as usize, k as usize)] = true;
                    } else {
                        escaped.insert([i, j, k]);
                    }
                }
            }
        }
    }

    if !escaped.is_empty() {
        let all: Vec<[i64; 3]> = escaped.into_iter().collect();
        return Err(TrajectoryError::ScrewEscapesGrid {
            escaped: all.len(),
            first: all[0],
            all,
        });
    }
    Ok(inside
        .iter()
        .enumerate()
        .filter_map(|(idx, &hit)| hit.then_some(idx))
        .collect())
}
