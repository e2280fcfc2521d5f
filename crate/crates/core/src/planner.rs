//! Trajectory grid search ranked by cancellous stress/strain.
//!
//! Candidates are evaluated bottom-up: screw sweep, material override, FE
//! solve, cancellous extrema. Infeasible candidates (sweep leaves the bone or
//! the guide cannot be heat-set tightly enough) are excluded before ranking.
//! Ranking is deterministic: max stress ascending, then max strain, then
//! curvature (simpler path wins ties), then insertion order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctsdr::DEFAULT_SPRINGBACK_RATIO;
use crate::fem::{self, FemError};
use crate::metrics::BiomechanicalReport;
use crate::trajectory::{
    swept_screw_voxels, ScrewSpec, Trajectory, TrajectoryError, CURVATURE_GENTLE_PER_MM,
    CURVATURE_SHARP_PER_MM, DEFAULT_STRAIGHT_LENGTH_MM,
};
use crate::volume::{
    build_material_field, generate_phantom, DensityVolume, LowDensityRegion, MaterialClass,
    PhantomSpec, VolumeError,
};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("candidate space invalid: {reason}")]
    InvalidSpace { reason: String },
    #[error("planner config invalid: {reason}")]
    InvalidConfig { reason: String },
    #[error("candidate {id}: volume error: {source}")]
    Volume {
        id: String,
        #[source]
        source: VolumeError,
    },
    #[error("candidate {id}: trajectory error: {source}")]
    Trajectory {
        id: String,
        #[source]
        source: TrajectoryError,
    },
    #[error("candidate {id}: FE solver error: {source}")]
    Solver {
        id: String,
        #[source]
        source: FemError,
    },
    #[error("all {count} candidates infeasible:\n{details}")]
    AllInfeasible { count: usize, details: String },
}

/// Grid of trajectory parameters to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpace {
    pub curvatures_per_mm: Vec<f64>,
    #[serde(default = "default_straight_lengths")]
    pub straight_lengths_mm: Vec<f64>,
    #[serde(default = "default_rolls")]
    pub roll_angles_rad: Vec<f64>,
    #[serde(default)]
    pub screw: ScrewSpec,
}

fn default_straight_lengths() -> Vec<f64> {
    vec![DEFAULT_STRAIGHT_LENGTH_MM]
}

fn default_rolls() -> Vec<f64> {
    vec![0.0]
}

impl Default for CandidateSpace {
    fn default() -> Self {
        Self::reference_family()
    }
}

impl CandidateSpace {
    /// The three-trajectory reference family: straight, gentle, sharp.
    pub fn reference_family() -> Self {
        Self {
            curvatures_per_mm: vec![0.0, CURVATURE_GENTLE_PER_MM, CURVATURE_SHARP_PER_MM],
            straight_lengths_mm: vec![DEFAULT_STRAIGHT_LENGTH_MM],
            roll_angles_rad: vec![0.0],
            screw: ScrewSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.curvatures_per_mm.is_empty()
            || self.straight_lengths_mm.is_empty()
            || self.roll_angles_rad.is_empty()
        {
            return Err(PlanError::InvalidSpace {
                reason: "curvature, straight-length, and roll grids must be non-empty".into(),
            });
        }
        if let Some(k) = self
            .curvatures_per_mm
            .iter()
            .find(|k| !(**k >= 0.0) || !k.is_finite())
        {
            return Err(PlanError::InvalidSpace {
                reason: format!("curvatures must be >= 0, got {k}"),
            });
        }
        self.screw.validate().map_err(|e| PlanError::InvalidSpace {
            reason: e.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.curvatures_per_mm.len() * self.straight_lengths_mm.len() * self.roll_angles_rad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Entry pose, load, and solver settings shared by every candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub entry_mm: [f64; 3],
    pub direction: [f64; 3],
    pub bend_plane_normal: [f64; 3],
    pub total_length_mm: f64,
    /// Magnitude of the downward endplate load, N.
    #[serde(default = "default_load")]
    pub load_n: f64,
    /// Tightest curvature the guide can be heat-set to, 1/mm.
    #[serde(default = "default_robot_max")]
    pub robot_max_curvature_per_mm: f64,
    #[serde(default = "default_springback")]
    pub springback_ratio: f64,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    /// Overrides the size-scaled iteration cap when set.
    #[serde(default)]
    pub solver_max_iter: Option<usize>,
}

fn default_load() -> f64 {
    400.0
}

fn default_robot_max() -> f64 {
    0.05
}

fn default_springback() -> f64 {
    DEFAULT_SPRINGBACK_RATIO
}

fn default_tol() -> f64 {
    fem::DEFAULT_TOL
}

impl PlannerConfig {
    /// Entry pose matched to [`reference_phantom_spec`]: entering the bone
    /// face centre along +x, bending toward +y.
    pub fn for_reference_phantom() -> Self {
        let spec = reference_phantom_spec();
        Self {
            entry_mm: [0.0, 0.5 * spec.outer_mm[1], 0.5 * spec.outer_mm[2]],
            direction: [1.0, 0.0, 0.0],
            bend_plane_normal: [0.0, 0.0, 1.0],
            total_length_mm: 55.0,
            load_n: 400.0,
            robot_max_curvature_per_mm: 0.05,
            springback_ratio: DEFAULT_SPRINGBACK_RATIO,
            solver_tol: fem::DEFAULT_TOL,
            solver_max_iter: None,
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.load_n >= 0.0) || !self.load_n.is_finite() {
            return Err(PlanError::InvalidConfig {
                reason: format!("load_n must be >= 0, got {}", self.load_n),
            });
        }
        if !(self.robot_max_curvature_per_mm > 0.0) {
            return Err(PlanError::InvalidConfig {
                reason: format!(
                    "robot_max_curvature_per_mm must be > 0, got {}",
                    self.robot_max_curvature_per_mm
                ),
            });
        }
        if !(0.0..1.0).contains(&self.springback_ratio) {
            return Err(PlanError::InvalidConfig {
                reason: format!("springback_ratio must be in [0, 1), got {}", self.springback_ratio),
            });
        }
        if !(self.total_length_mm > 0.0) {
            return Err(PlanError::InvalidConfig {
                reason: format!("total_length_mm must be > 0, got {}", self.total_length_mm),
            });
        }
        Ok(())
    }

    fn trajectory(&self, straight: f64, curvature: f64, roll: f64) -> Result<Trajectory, TrajectoryError> {
        // roll rotates the bend plane about the entry direction
        let dir = crate::Vec3::from(self.direction).normalize();
        let q = nalgebra::UnitQuaternion::from_axis_angle(
            &nalgebra::Unit::new_normalize(dir),
            roll,
        );
        let normal = q * crate::Vec3::from(self.bend_plane_normal);
        Trajectory::new(
            self.entry_mm,
            self.direction,
            normal.into(),
            straight,
            curvature,
            self.total_length_mm,
        )
    }
}

/// The bundled reference phantom: a block vertebra stand-in whose weak
/// (low-density) band lies along the straight path, so the straight candidate
/// drills through weak bone while the curved candidates climb away from it.
/// The sharper curve buys less clearance per its tighter tip position against
/// the cortical shell, which keeps it between the other two on stress.
pub fn reference_phantom_spec() -> PhantomSpec {
    PhantomSpec {
        outer_mm: [60.0, 32.0, 24.0],
        spacing_mm: [1.0, 1.0, 1.0],
        margin_mm: 1.0,
        background_hu: 0.0,
        shell_mm: 2.0,
        cancellous_hu: 400.0,
        cortical_hu: 1900.0,
        ellipsoid: Some(LowDensityRegion {
            center_mm: [35.0, 16.0, 12.0],
            radii_mm: [16.0, 3.0, 3.0],
            hu: 120.0,
        }),
        noise_hu: 0.0,
        seed: 42,
    }
}

/// Generates the bundled reference phantom volume.
pub fn reference_phantom() -> DensityVolume {
    generate_phantom(&reference_phantom_spec()).expect("reference spec is valid")
}

/// Feasibility of a trajectory on a volume without running the FE stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityFlags {
    pub in_bone: bool,
    pub curvature_achievable: bool,
    pub reasons: Vec<String>,
}

impl FeasibilityFlags {
    pub fn feasible(&self) -> bool {
        self.in_bone && self.curvature_achievable
    }
}

/// Checks the centreline stays in bone and the curvature is reachable after
/// spring-back compensation (`set = kappa / (1 - springback) <= robot max`).
pub fn feasibility_check(
    traj: &Trajectory,
    vol: &DensityVolume,
    robot_max_curvature_per_mm: f64,
    springback_ratio: f64,
) -> FeasibilityFlags {
    let mut reasons = Vec::new();

    let required_set = traj.curvature_per_mm / (1.0 - springback_ratio);
    let curvature_achievable = required_set <= robot_max_curvature_per_mm;
    if !curvature_achievable {
        reasons.push(format!(
            "target curvature {:.6} needs heat-set {:.6} > robot max {:.6} 1/mm",
            traj.curvature_per_mm, required_set, robot_max_curvature_per_mm
        ));
    }

    let g = &vol.geometry;
    let step = g.min_spacing() / 4.0;
    let n = (traj.total_length_mm / step).ceil() as usize;
    let mut in_bone = true;
    for i in 0..=n {
        let s = traj.total_length_mm * i as f64 / n as f64;
        let p = traj.point_at(s).expect("s in range");
        let ijk = [
            ((p.x - g.origin_mm[0]) / g.spacing_mm[0]).floor() as i64,
            ((p.y - g.origin_mm[1]) / g.spacing_mm[1]).floor() as i64,
            ((p.z - g.origin_mm[2]) / g.spacing_mm[2]).floor() as i64,
        ];
        if !g.contains(ijk) {
            in_bone = false;
            reasons.push(format!("centreline leaves the volume at s = {s:.2} mm"));
            break;
        }
        let v = g.linear_index(ijk[0] as usize, ijk[1] as usize, ijk[2] as usize);
        if crate::volume::classify(vol.hu[v]).map_or(true, |c| c == MaterialClass::Void) {
            in_bone = false;
            reasons.push(format!("centreline crosses void bone at s = {s:.2} mm"));
            break;
        }
    }

    FeasibilityFlags {
        in_bone,
        curvature_achievable,
        reasons,
    }
}

/// Report plus the full FE field (present only for feasible candidates).
#[derive(Debug, Clone)]
pub struct CandidateEvaluation {
    pub trajectory: Trajectory,
    pub report: BiomechanicalReport,
    pub fe: Option<fem::FeResult>,
    /// Material field with the candidate's screw embedded (for rendering).
    pub material: Option<crate::volume::MaterialField>,
}

/// Runs the full per-candidate pipeline: sweep, material override, model,
/// solve, extrema. Infeasible candidates short-circuit before the FE stage.
pub fn evaluate_candidate(
    vol: &DensityVolume,
    traj: &Trajectory,
    screw: &ScrewSpec,
    cfg: &PlannerConfig,
    id: &str,
) -> Result<BiomechanicalReport, PlanError> {
    evaluate_candidate_full(vol, traj, screw, cfg, id).map(|e| e.report)
}

/// As [`evaluate_candidate`] but keeps the solved field for rendering.
pub fn evaluate_candidate_full(
    vol: &DensityVolume,
    traj: &Trajectory,
    screw: &ScrewSpec,
    cfg: &PlannerConfig,
    id: &str,
) -> Result<CandidateEvaluation, PlanError> {
    let mut flags = feasibility_check(
        traj,
        vol,
        cfg.robot_max_curvature_per_mm,
        cfg.springback_ratio,
    );

    let swept = if flags.in_bone {
        match swept_screw_voxels(traj, screw, &vol.geometry) {
            Ok(v) => Some(v),
            Err(TrajectoryError::ScrewEscapesGrid { escaped, first, .. }) => {
                flags.in_bone = false;
                flags
                    .reasons
                    .push(format!("screw sweep leaves the grid: {escaped} voxels, first {first:?}"));
                None
            }
            Err(e) => {
                return Err(PlanError::Trajectory {
                    id: id.into(),
                    source: e,
                })
            }
        }
    } else {
        None
    };

    // a swept voxel on void bone also breaks the in-bone flag
    let swept = match swept {
        Some(v) => {
            if let Some(&bad) = v.iter().find(|&&vx| {
                crate::volume::classify(vol.hu[vx]).map_or(true, |c| c == MaterialClass::Void)
            }) {
                flags.in_bone = false;
                flags.reasons.push(format!(
                    "screw sweep crosses void bone at voxel {:?}",
                    vol.geometry.voxel_coords(bad)
                ));
                None
            } else {
                Some(v)
            }
        }
        None => None,
    };

    if !flags.feasible() {
        return Ok(CandidateEvaluation {
            trajectory: traj.clone(),
            report: BiomechanicalReport {
                trajectory_id: id.into(),
                max_cancellous_von_mises_mpa: None,
                max_cancellous_principal_strain: None,
                in_bone: flags.in_bone,
                curvature_achievable: flags.curvature_achievable,
                infeasibility_reasons: flags.reasons,
            },
            fe: None,
            material: None,
        });
    }

    let material = build_material_field(vol, &swept.expect("feasible candidates have a sweep"))
        .map_err(|source| PlanError::Volume {
            id: id.into(),
            source,
        })?;
    let model = fem::build_model(material, traj, screw, cfg.load_n).map_err(|source| {
        PlanError::Solver {
            id: id.into(),
            source,
        }
    })?;
    let max_iter = cfg
        .solver_max_iter
        .unwrap_or_else(|| fem::default_max_iter(3 * model.material.geometry.voxel_count()));
    let fe = fem::assemble_and_solve(&model, cfg.solver_tol, max_iter).map_err(|source| {
        PlanError::Solver {
            id: id.into(),
            source,
        }
    })?;
    let (stress, strain) =
        fem::cancellous_extrema(&fe, &model.material).map_err(|source| PlanError::Solver {
            id: id.into(),
            source,
        })?;

    Ok(CandidateEvaluation {
        trajectory: traj.clone(),
        report: BiomechanicalReport {
            trajectory_id: id.into(),
            max_cancellous_von_mises_mpa: Some(stress),
            max_cancellous_principal_strain: Some(strain),
            in_bone: true,
            curvature_achievable: true,
            infeasibility_reasons: Vec::new(),
        },
        fe: Some(fe),
        material: Some(model.material),
    })
}

/// One ranked candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub id: String,
    pub trajectory: Trajectory,
    pub report: BiomechanicalReport,
}

/// Exhaustive grid-search outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Feasible candidates, best first.
    pub ranked: Vec<RankedCandidate>,
    /// Candidates excluded before the FE stage.
    pub infeasible: Vec<RankedCandidate>,
    pub winner_id: String,
    pub dominance_notes: Vec<String>,
}

impl PlanResult {
    pub fn winner(&self) -> &RankedCandidate {
        self.ranked
            .first()
            .expect("plan results always hold a winner")
    }
}

/// Plans over the grid, discarding the FE fields.
pub fn plan(
    vol: &DensityVolume,
    space: &CandidateSpace,
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    plan_with_fields(vol, space, cfg).map(|(result, _)| result)
}

/// Plans over the grid and keeps each feasible candidate's FE field and
/// screw-embedded material (for stress-map rendering), keyed by candidate id.
pub fn plan_with_fields(
    vol: &DensityVolume,
    space: &CandidateSpace,
    cfg: &PlannerConfig,
) -> Result<(PlanResult, Vec<(String, fem::FeResult, crate::volume::MaterialField)>), PlanError> {
    space.validate()?;
    cfg.validate()?;

    let mut evaluations: Vec<(usize, RankedCandidate, Option<(fem::FeResult, crate::volume::MaterialField)>)> =
        Vec::new();
    let mut idx = 0usize;
    for &straight in &space.straight_lengths_mm {
        for &kappa in &space.curvatures_per_mm {
            for &roll in &space.roll_angles_rad {
                let id = format!("c{idx:02}-k{kappa:.6}-b{straight:.1}-r{roll:.3}");
                let traj = cfg.trajectory(straight, kappa, roll).map_err(|source| {
                    PlanError::Trajectory {
                        id: id.clone(),
                        source,
                    }
                })?;
                let eval = evaluate_candidate_full(vol, &traj, &space.screw, cfg, &id)?;
                let fields = eval.fe.map(|fe| (fe, eval.material.expect("material with fe")));
                evaluations.push((
                    idx,
                    RankedCandidate {
                        id,
                        trajectory: eval.trajectory,
                        report: eval.report,
                    },
                    fields,
                ));
                idx += 1;
            }
        }
    }

    let mut feasible: Vec<(usize, RankedCandidate)> = Vec::new();
    let mut infeasible: Vec<RankedCandidate> = Vec::new();
    let mut fields = Vec::new();
    for (i, cand, f) in evaluations {
        if cand.report.feasible() {
            if let Some((fe, material)) = f {
                fields.push((cand.id.clone(), fe, material));
            }
            feasible.push((i, cand));
        } else {
            infeasible.push(cand);
        }
    }

    if feasible.is_empty() {
        let details = infeasible
            .iter()
            .map(|c| format!("{}: {}", c.id, c.report.infeasibility_reasons.join("; ")))
            .collect::<Vec<_>>()
            .join("\n");
        return Err(PlanError::AllInfeasible {
            count: infeasible.len(),
            details,
        });
    }

    feasible.sort_by(|(ia, a), (ib, b)| {
        let sa = a.report.max_cancellous_von_mises_mpa.expect("feasible");
        let sb = b.report.max_cancellous_von_mises_mpa.expect("feasible");
        sa.total_cmp(&sb)
            .then_with(|| {
                let ea = a.report.max_cancellous_principal_strain.expect("feasible");
                let eb = b.report.max_cancellous_principal_strain.expect("feasible");
                ea.total_cmp(&eb)
            })
            .then_with(|| {
                a.trajectory
                    .curvature_per_mm
                    .total_cmp(&b.trajectory.curvature_per_mm)
            })
            .then_with(|| ia.cmp(ib))
    });

    let mut dominance_notes = Vec::new();
    if feasible.len() > 1 {
        let (_, w) = &feasible[0];
        let (_, second) = &feasible[1];
        let ws = w.report.max_cancellous_von_mises_mpa.unwrap();
        let ss = second.report.max_cancellous_von_mises_mpa.unwrap();
        if ws < ss {
            dominance_notes.push(format!(
                "{} wins on max cancellous stress ({ws:.4} < {ss:.4} MPa)",
                w.id
            ));
        } else {
            let we = w.report.max_cancellous_principal_strain.unwrap();
            let se = second.report.max_cancellous_principal_strain.unwrap();
            if we < se {
                dominance_notes.push(format!(
                    "{} ties on stress, wins on max principal strain ({we:.6} < {se:.6})",
                    w.id
                ));
            } else {
                dominance_notes.push(format!(
                    "{} ties on stress and strain, wins on lower curvature then insertion order",
                    w.id
                ));
            }
        }
    } else {
        dominance_notes.push(format!("{} is the only feasible candidate", feasible[0].1.id));
    }

    let ranked: Vec<RankedCandidate> = feasible.into_iter().map(|(_, c)| c).collect();
    let winner_id = ranked[0].id.clone();
    Ok((
        PlanResult {
            ranked,
            infeasible,
            winner_id,
            dominance_notes,
        },
        fields,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Small homogeneous phantom for fast FE-backed planner tests.
    fn small_phantom() -> DensityVolume {
        generate_phantom(&PhantomSpec {
            outer_mm: [20.0, 14.0, 14.0],
            spacing_mm: [1.0, 1.0, 1.0],
            margin_mm: 1.0,
            background_hu: 0.0,
            shell_mm: 0.0,
            cancellous_hu: 400.0,
            cortical_hu: 1900.0,
            ellipsoid: None,
            noise_hu: 0.0,
            seed: 0,
        })
        .unwrap()
    }

    fn small_config() -> PlannerConfig {
        PlannerConfig {
            entry_mm: [0.0, 7.0, 7.0],
            direction: [1.0, 0.0, 0.0],
            bend_plane_normal: [0.0, 0.0, 1.0],
            total_length_mm: 14.0,
            load_n: 100.0,
            robot_max_curvature_per_mm: 0.05,
            springback_ratio: DEFAULT_SPRINGBACK_RATIO,
            solver_tol: 1e-8,
            solver_max_iter: None,
        }
    }

    fn small_space(curvatures: Vec<f64>, rolls: Vec<f64>) -> CandidateSpace {
        CandidateSpace {
            curvatures_per_mm: curvatures,
            straight_lengths_mm: vec![6.0],
            roll_angles_rad: rolls,
            screw: ScrewSpec {
                diameter_mm: 2.0,
                length_mm: 12.0,
            },
        }
    }

    #[test]
    fn feasibility_straight_always_achievable() {
        let vol = small_phantom();
        let t = Trajectory::new(
            [0.0, 7.0, 7.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            6.0,
            0.0,
            14.0,
        )
        .unwrap();
        let flags = feasibility_check(&t, &vol, 0.05, DEFAULT_SPRINGBACK_RATIO);
        assert!(flags.curvature_achievable);
        assert!(flags.in_bone);
    }

    #[test]
    fn feasibility_springback_inverse() {
        let vol = small_phantom();
        let t = Trajectory::new(
            [0.0, 7.0, 7.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            6.0,
            0.014388,
            14.0,
        )
        .unwrap();
        // required set curvature = kappa / (1 - springback) = 0.014718
        let tight = feasibility_check(&t, &vol, 0.014717, 0.02245);
        assert!(!tight.curvature_achievable);
        let loose = feasibility_check(&t, &vol, 0.014719, 0.02245);
        assert!(loose.curvature_achievable);
    }

    #[test]
    fn feasibility_exit_detected() {
        let vol = small_phantom();
        let t = Trajectory::new(
            [0.0, 7.0, 7.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            6.0,
            0.0,
            60.0,
        )
        .unwrap();
        let flags = feasibility_check(&t, &vol, 0.05, 0.0);
        assert!(!flags.in_bone);
        assert!(!flags.reasons.is_empty());
    }

    #[test]
    fn infeasible_candidate_skips_fe() {
        let vol = small_phantom();
        let cfg = small_config();
        let t = Trajectory::new(
            [0.0, 7.0, 7.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            6.0,
            0.2, // far beyond the robot's reach
            14.0,
        )
        .unwrap();
        let screw = ScrewSpec {
            diameter_mm: 2.0,
            length_mm: 12.0,
        };
        let eval = evaluate_candidate_full(&vol, &t, &screw, &cfg, "c").unwrap();
        assert!(!eval.report.feasible());
        assert!(eval.fe.is_none());
        assert!(eval.report.max_cancellous_von_mises_mpa.is_none());
    }

    #[test]
    fn straight_candidate_has_finite_extrema() {
        let vol = small_phantom();
        let cfg = small_config();
        let t = Trajectory::new(
            [0.0, 7.0, 7.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            6.0,
            0.0,
            14.0,
        )
        .unwrap();
        let screw = ScrewSpec {
            diameter_mm: 2.0,
            length_mm: 12.0,
        };
        let report = evaluate_candidate(&vol, &t, &screw, &cfg, "straight").unwrap();
        let s = report.max_cancellous_von_mises_mpa.unwrap();
        let e = report.max_cancellous_principal_strain.unwrap();
        assert!(s.is_finite() && s > 0.0);
        assert!(e.is_finite() && e > 0.0);
    }

    #[test]
    fn singleton_space_wins() {
        let vol = small_phantom();
        let result = plan(&vol, &small_space(vec![0.0], vec![0.0]), &small_config()).unwrap();
        assert_eq!(result.ranked.len(), 1);
        assert_eq!(result.winner_id, result.ranked[0].id);
        assert!(result.dominance_notes[0].contains("only feasible"));
    }

    #[test]
    fn duplicate_candidates_tie_break_deterministically() {
        let vol = small_phantom();
        let result = plan(&vol, &small_space(vec![0.01, 0.01], vec![0.0]), &small_config()).unwrap();
        assert_eq!(result.ranked.len(), 2);
        // identical geometry: insertion order decides
        assert!(result.winner_id.starts_with("c00"));
    }

    #[test]
    fn mirrored_rolls_give_equal_extrema() {
        // symmetric phantom, entry centred: rolling the bend plane by pi
        // mirrors the arc; extrema agree to solver tolerance
        let vol = small_phantom();
        let result = plan(
            &vol,
            &small_space(vec![0.02], vec![0.0, std::f64::consts::PI]),
            &small_config(),
        )
        .unwrap();
        assert_eq!(result.ranked.len(), 2);
        let s0 = result.ranked[0]
            .report
            .max_cancellous_von_mises_mpa
            .unwrap();
        let s1 = result.ranked[1]
            .report
            .max_cancellous_von_mises_mpa
            .unwrap();
        assert!(
            (s0 - s1).abs() / s0 < 1e-6,
            "mirror asymmetry: {s0} vs {s1}"
        );
    }

    #[test]
    fn removing_loser_keeps_winner() {
        let vol = small_phantom();
        let cfg = small_config();
        let full = plan(&vol, &small_space(vec![0.0, 0.01, 0.02], vec![0.0]), &cfg).unwrap();
        let winner_kappa = full.winner().trajectory.curvature_per_mm;
        let loser_kappa = full.ranked.last().unwrap().trajectory.curvature_per_mm;
        let trimmed: Vec<f64> = [0.0, 0.01, 0.02]
            .into_iter()
            .filter(|k| (*k - loser_kappa).abs() > 1e-12)
            .collect();
        let reduced = plan(&vol, &small_space(trimmed, vec![0.0]), &cfg).unwrap();
        assert_eq!(reduced.winner().trajectory.curvature_per_mm, winner_kappa);
    }

    #[test]
    fn winner_dominates_on_primary_key() {
        let vol = small_phantom();
        let result = plan(&vol, &small_space(vec![0.0, 0.02], vec![0.0]), &small_config()).unwrap();
        let ws = result.winner().report.max_cancellous_von_mises_mpa.unwrap();
        for c in &result.ranked {
            assert!(ws <= c.report.max_cancellous_von_mises_mpa.unwrap());
        }
    }

    #[test]
    fn all_infeasible_lists_reasons() {
        let vol = small_phantom();
        let mut cfg = small_config();
        cfg.robot_max_curvature_per_mm = 0.001; // nothing curved is achievable
        match plan(&vol, &small_space(vec![0.05], vec![0.0]), &cfg) {
            Err(PlanError::AllInfeasible { count, details }) => {
                assert_eq!(count, 1);
                assert!(details.contains("heat-set"));
            }
            other => panic!("expected all-infeasible, got {other:?}"),
        }
    }

    #[test]
    fn empty_space_rejected() {
        let vol = small_phantom();
        let mut space = small_space(vec![], vec![0.0]);
        assert!(matches!(
            plan(&vol, &space, &small_config()),
            Err(PlanError::InvalidSpace { .. })
        ));
        space = small_space(vec![-0.1], vec![0.0]);
        assert!(matches!(
            plan(&vol, &space, &small_config()),
            Err(PlanError::InvalidSpace { .. })
        ));
    }

    #[test]
    fn plan_reruns_identically() {
        let vol = small_phantom();
        let space = small_space(vec![0.0, 0.02], vec![0.0]);
        let cfg = small_config();
        let a = plan(&vol, &space, &cfg).unwrap();
        let b = plan(&vol, &space, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
