//! Small-strain linear elasticity on the voxel grid.
//!
//! Eight-node hexahedral voxels with per-voxel moduli, 2x2x2 Gauss
//! integration, bonded interfaces through shared nodes, and a deterministic
//! matrix-free conjugate-gradient solve. Element stress/strain is recovered at
//! centroids.

mod element;
mod solver;

pub use element::{centroid_b, constitutive_unit, reference_stiffness, NODE_OFFSETS};
pub use solver::{element_node_ids, node_dims, node_index};

use nalgebra::{Matrix3, SVector};
use serde::Serialize;
use thiserror::Error;

use crate::trajectory::{ScrewSpec, Trajectory};
use crate::volume::{MaterialClass, MaterialField};
use crate::Vec3;

/// Default relative-residual tolerance for the CG solve.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest tolerance the solver accepts.
pub const MAX_TOL: f64 = 1e-4;

/// Default iteration cap, scaled to the problem size.
pub fn default_max_iter(n_dof: usize) -> usize {
    (20.0 * (n_dof.max(1) as f64).sqrt()).ceil() as usize
}

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid model: {reason}")]
    InvalidModel { reason: String },
    #[error("tolerance {tol} outside (0, {MAX_TOL}]")]
    InvalidTolerance { tol: f64 },
    #[error("no screw voxels to clamp")]
    NothingToClamp,
    #[error("no non-void elements on the superior endplate")]
    EmptyEndplate,
    #[error(
        "floating component: {element_count} element(s) around voxel {representative_voxel} \
         are not connected to any clamped node"
    )]
    FloatingComponent {
        representative_voxel: usize,
        element_count: usize,
    },
    #[error("CG did not converge: relative residual {relative_residual:.3e} after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        relative_residual: f64,
    },
    #[error("displacement field has {actual} nodes, model has {expected}")]
    DisplacementMismatch { actual: usize, expected: usize },
    #[error("no cancellous elements to take extrema over")]
    NoCancellousElements,
}

/// Boundary conditions plus material: everything the solver needs.
#[derive(Debug, Clone)]
pub struct FeModel {
    pub material: MaterialField,
    /// Nodes sharing the superior endplate load (sorted, deduplicated).
    pub loaded_nodes: Vec<usize>,
    /// Total applied force, N; split uniformly over `loaded_nodes`.
    pub total_load_n: Vec3,
    /// Nodes with all three displacement components fixed (sorted, deduplicated).
    pub clamped_nodes: Vec<usize>,
}

impl FeModel {
    pub fn validate(&self) -> Result<(), FemError> {
        if self.loaded_nodes.is_empty() {
            return Err(FemError::InvalidModel {
                reason: "loaded node set is empty".into(),
            });
        }
        if self.clamped_nodes.is_empty() {
            return Err(FemError::InvalidModel {
                reason: "clamped node set is empty".into(),
            });
        }
        let clamped: std::collections::HashSet<_> = self.clamped_nodes.iter().collect();
        if let Some(n) = self.loaded_nodes.iter().find(|n| clamped.contains(n)) {
            return Err(FemError::InvalidModel {
                reason: format!("node {n} is both loaded and clamped"),
            });
        }
        if !self.total_load_n.iter().all(|c| c.is_finite()) {
            return Err(FemError::InvalidModel {
                reason: format!("total load {:?} not finite", self.total_load_n),
            });
        }
        Ok(())
    }
}

/// Builds the drilling model: 400 N-style endplate load split uniformly over
/// the top-face nodes of the highest non-void layer, and the screw clamped
/// over its first voxel layer past the entry plane.
pub fn build_model(
    material: MaterialField,
    traj: &Trajectory,
    _screw: &ScrewSpec,
    load_n: f64,
) -> Result<FeModel, FemError> {
    let g = material.geometry;

    // superior endplate: the highest grid layer containing non-void voxels
    let mut top_layer = None;
    for k in (0..g.dims[2]).rev() {
        let non_void = (0..g.dims[1]).any(|j| {
            (0..g.dims[0]).any(|i| material.class[g.linear_index(i, j, k)] != MaterialClass::Void)
        });
        if non_void {
            top_layer = Some(k);
            break;
        }
    }
    let top_layer = top_layer.ok_or(FemError::EmptyEndplate)?;
    let mut loaded: std::collections::BTreeSet<usize> = Default::default();
    for j in 0..g.dims[1] {
        for i in 0..g.dims[0] {
            if material.class[g.linear_index(i, j, top_layer)] != MaterialClass::Void {
                // the four top-face nodes of this element
                for n in 0..8 {
                    if NODE_OFFSETS[n][2] == 1 {
                        loaded.insert(node_index(
                            &g,
                            i + NODE_OFFSETS[n][0],
                            j + NODE_OFFSETS[n][1],
                            top_layer + 1,
                        ));
                    }
                }
            }
        }
    }

    // clamp every screw voxel within one voxel layer of the entry plane
    let entry = traj.entry();
    let dir = traj.direction_vec();
    let mut screw_axial: Vec<(f64, usize, usize, usize)> = Vec::new();
    for k in 0..g.dims[2] {
        for j in 0..g.dims[1] {
            for i in 0..g.dims[0] {
                if material.class[g.linear_index(i, j, k)] == MaterialClass::Screw {
                    let d = (g.voxel_center(i, j, k) - entry).dot(&dir);
                    screw_axial.push((d, i, j, k));
                }
            }
        }
    }
    if screw_axial.is_empty() {
        return Err(FemError::NothingToClamp);
    }
    let d_min = screw_axial
        .iter()
        .map(|e| e.0)
        .fold(f64::INFINITY, f64::min);
    let layer = g.min_spacing();
    let mut clamped: std::collections::BTreeSet<usize> = Default::default();
    for &(d, i, j, k) in &screw_axial {
        if d - d_min < layer {
            for n in element_node_ids(&g, i, j, k) {
                clamped.insert(n);
            }
        }
    }

    let clamped: Vec<usize> = clamped.into_iter().collect();
    let loaded: Vec<usize> = loaded
        .into_iter()
        .filter(|n| !clamped.contains(n))
        .collect();

    let model = FeModel {
        material,
        loaded_nodes: loaded,
        total_load_n: Vec3::new(0.0, 0.0, -load_n),
        clamped_nodes: clamped,
    };
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub free_dof: usize,
}

/// Centroid stress/strain recovery for one non-void element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementField {
    pub voxel: usize,
    pub class: MaterialClass,
    /// Voigt stress `[s_xx, s_yy, s_zz, s_xy, s_yz, s_xz]`, MPa.
    pub stress_mpa: [f64; 6],
    /// Voigt strain with engineering shear.
    pub strain: [f64; 6],
    pub von_mises_mpa: f64,
    /// Magnitude of the largest-magnitude principal strain.
    pub max_principal_strain: f64,
}

impl ElementField {
    pub fn stress_tensor(&self) -> Matrix3<f64> {
        let s = &self.stress_mpa;
        Matrix3::new(s[0], s[3], s[5], s[3], s[1], s[4], s[5], s[4], s[2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeResult {
    /// Displacement per grid node, mm; zero on clamped and inactive nodes.
    pub displacement_mm: Vec<Vec3>,
    /// Per non-void element, ascending voxel index.
    pub elements: Vec<ElementField>,
    pub stats: SolverStats,
}

/// Assembles the voxel system and solves `K u = f` with Jacobi-preconditioned
/// CG. Deterministic: repeated runs are bit-identical.
pub fn assemble_and_solve(
    model: &FeModel,
    tol: f64,
    max_iter: usize,
) -> Result<FeResult, FemError> {
    model.validate()?;
    if !(tol > 0.0 && tol <= MAX_TOL) {
        return Err(FemError::InvalidTolerance { tol });
    }
    let sys = solver::VoxelSystem::build(&model.material, &model.clamped_nodes)?;
    sys.check_connectivity()?;

    let mut b = vec![0.0; sys.n_free];
    let nodal = model.total_load_n / model.loaded_nodes.len() as f64;
    for &n in &model.loaded_nodes {
        let dof = sys.dof_of_node(n).ok_or_else(|| FemError::InvalidModel {
            reason: format!("loaded node {n} belongs to no non-void element"),
        })?;
        b[dof] += nodal.x;
        b[dof + 1] += nodal.y;
        b[dof + 2] += nodal.z;
    }

    let outcome = solver::pcg(&sys, &b, tol, max_iter);
    if !outcome.converged {
        return Err(FemError::NonConvergence {
            iterations: outcome.iterations,
            relative_residual: outcome.relative_residual,
        });
    }

    let nd = node_dims(&model.material.geometry);
    let n_nodes = nd[0] * nd[1] * nd[2];
    let mut displacement = vec![Vec3::zeros(); n_nodes];
    for (node, slot) in displacement.iter_mut().enumerate() {
        if let Some(dof) = sys.dof_of_node(node) {
            *slot = Vec3::new(outcome.x[dof], outcome.x[dof + 1], outcome.x[dof + 2]);
        }
    }

    let elements = recover_stress_strain(model, &displacement)?;
    Ok(FeResult {
        displacement_mm: displacement,
        elements,
        stats: SolverStats {
            iterations: outcome.iterations,
            relative_residual: outcome.relative_residual,
            free_dof: sys.n_free,
        },
    })
}

/// Element centroid strain, Hooke stress, von Mises, and principal strain for
/// every non-void voxel (ascending index).
pub fn recover_stress_strain(
    model: &FeModel,
    displacement: &[Vec3],
) -> Result<Vec<ElementField>, FemError> {
    let g = &model.material.geometry;
    let nd = node_dims(g);
    let expected = nd[0] * nd[1] * nd[2];
    if displacement.len() != expected {
        return Err(FemError::DisplacementMismatch {
            actual: displacement.len(),
            expected,
        });
    }
    let b = centroid_b(g.spacing_mm);
    let d_unit = constitutive_unit(model.material.poisson);
    let mut out = Vec::with_capacity(model.material.solid_count());
    for k in 0..g.dims[2] {
        for j in 0..g.dims[1] {
            for i in 0..g.dims[0] {
                let v = g.linear_index(i, j, k);
                let class = model.material.class[v];
                if class == MaterialClass::Void {
                    continue;
                }
                let mut ue = SVector::<f64, 24>::zeros();
                for (n, node) in element_node_ids(g, i, j, k).into_iter().enumerate() {
                    let u = displacement[node];
                    ue[3 * n] = u.x;
                    ue[3 * n + 1] = u.y;
                    ue[3 * n + 2] = u.z;
                }
                let eps = b * ue;
                let sig = d_unit * eps * model.material.modulus_mpa[v];
                let von_mises = (0.5
                    * ((sig[0] - sig[1]).powi(2)
                        + (sig[1] - sig[2]).powi(2)
                        + (sig[2] - sig[0]).powi(2))
                    + 3.0 * (sig[3].powi(2) + sig[4].powi(2) + sig[5].powi(2)))
                .sqrt();
                // strain tensor eigenvalues (engineering shear halved)
                let tensor = Matrix3::new(
                    eps[0],
                    0.5 * eps[3],
                    0.5 * eps[5],
                    0.5 * eps[3],
                    eps[1],
                    0.5 * eps[4],
                    0.5 * eps[5],
                    0.5 * eps[4],
                    eps[2],
                );
                let principal = tensor
                    .symmetric_eigenvalues()
                    .iter()
                    .fold(0.0f64, |acc, &l| acc.max(l.abs()));
                out.push(ElementField {
                    voxel: v,
                    class,
                    stress_mpa: [sig[0], sig[1], sig[2], sig[3], sig[4], sig[5]],
                    strain: [eps[0], eps[1], eps[2], eps[3], eps[4], eps[5]],
                    von_mises_mpa: von_mises,
                    max_principal_strain: principal,
                });
            }
        }
    }
    Ok(out)
}

/// Maximum von Mises stress and maximum principal strain over cancellous
/// elements only.
pub fn cancellous_extrema(
    result: &FeResult,
    material: &MaterialField,
) -> Result<(f64, f64), FemError> {
    let mut max_stress = f64::NEG_INFINITY;
    let mut max_strain = f64::NEG_INFINITY;
    let mut seen = false;
    for el in &result.elements {
        if material.class[el.voxel] == MaterialClass::Cancellous {
            seen = true;
            max_stress = max_stress.max(el.von_mises_mpa);
            max_strain = max_strain.max(el.max_principal_strain);
        }
    }
    if !seen {
        return Err(FemError::NoCancellousElements);
    }
    Ok((max_stress, max_strain))
}

/// Sum of the forces K u transmits into the clamped nodes; balances the
/// applied load on a converged solve.
pub fn reaction_sum(model: &FeModel, displacement: &[Vec3]) -> Result<Vec3, FemError> {
    let sys = solver::VoxelSystem::build(&model.material, &model.clamped_nodes)?;
    let g = &model.material.geometry;
    let nd = node_dims(g);
    let n_nodes = nd[0] * nd[1] * nd[2];
    if displacement.len() != n_nodes {
        return Err(FemError::DisplacementMismatch {
            actual: displacement.len(),
            expected: n_nodes,
        });
    }
    let mut u = vec![0.0; 3 * n_nodes];
    for (node, disp) in displacement.iter().enumerate() {
        u[3 * node] = disp.x;
        u[3 * node + 1] = disp.y;
        u[3 * node + 2] = disp.z;
    }
    let mut f = vec![0.0; 3 * n_nodes];
    sys.apply_full(&u, &mut f);
    let mut sum = Vec3::zeros();
    for &n in &model.clamped_nodes {
        sum += Vec3::new(f[3 * n], f[3 * n + 1], f[3 * n + 2]);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{DensityVolume, GridGeometry};
    use approx::assert_relative_eq;

    /// Homogeneous block with every voxel at the given HU.
    fn block(dims: [usize; 3], hu: f64) -> MaterialField {
        let g = GridGeometry {
            dims,
            spacing_mm: [1.0, 1.0, 1.0],
            origin_mm: [0.0; 3],
        };
        let vol = DensityVolume::new(g, vec![hu; g.voxel_count()]).unwrap();
        crate::volume::build_material_field(&vol, &[]).unwrap()
    }

    /// Block clamped across its bottom face, uniformly loaded on top.
    fn block_model(dims: [usize; 3], hu: f64, load: f64) -> FeModel {
        let material = block(dims, hu);
        let g = material.geometry;
        let mut clamped = Vec::new();
        let mut loaded = Vec::new();
        for j in 0..=g.dims[1] {
            for i in 0..=g.dims[0] {
                clamped.push(node_index(&g, i, j, 0));
                loaded.push(node_index(&g, i, j, g.dims[2]));
            }
        }
        FeModel {
            material,
            loaded_nodes: loaded,
            total_load_n: Vec3::new(0.0, 0.0, -load),
            clamped_nodes: clamped,
        }
    }

    #[test]
    fn uniaxial_block_matches_closed_form() {
        let model = block_model([10, 10, 10], 400.0, 400.0);
        let e = model.material.modulus_mpa[0];
        let result = assemble_and_solve(&model, 1e-10, 10_000).unwrap();

        // mean top-face vertical displacement vs sigma L / E
        let mut mean = 0.0;
        for &n in &model.loaded_nodes {
            mean += result.displacement_mm[n].z;
        }
        mean /= model.loaded_nodes.len() as f64;
        let sigma = 400.0 / 100.0; // N / mm^2
        let expected = -sigma * 10.0 / e;
        assert!(
            ((mean - expected) / expected).abs() < 0.02,
            "mean {mean} vs 1-D estimate {expected}"
        );

        // reactions balance the applied load
        let reaction = reaction_sum(&model, &result.displacement_mm).unwrap();
        assert_relative_eq!(reaction.z, 400.0, max_relative = 1e-6);
        assert!(reaction.x.abs() < 400.0 * 1e-6 && reaction.y.abs() < 400.0 * 1e-6);

        // clamped nodes stay put
        for &n in &model.clamped_nodes {
            assert_eq!(result.displacement_mm[n], Vec3::zeros());
        }
        assert!(result.stats.relative_residual <= 1e-10);
    }

    #[test]
    fn zero_load_gives_zero_displacement() {
        let model = block_model([4, 4, 4], 400.0, 0.0);
        let result = assemble_and_solve(&model, 1e-8, 100).unwrap();
        assert!(result.displacement_mm.iter().all(|u| *u == Vec3::zeros()));
        assert_eq!(result.stats.iterations, 0);
    }

    #[test]
    fn rigid_translation_has_no_stress() {
        let model = block_model([3, 3, 3], 500.0, 10.0);
        let nd = node_dims(&model.material.geometry);
        let u = vec![Vec3::new(0.4, -0.2, 0.7); nd[0] * nd[1] * nd[2]];
        let fields = recover_stress_strain(&model, &u).unwrap();
        for f in &fields {
            assert!(f.von_mises_mpa.abs() < 1e-12);
            assert!(f.max_principal_strain.abs() < 1e-12);
            for c in 0..6 {
                assert!(f.stress_mpa[c].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_rotation_strain_is_second_order() {
        let model = block_model([3, 3, 3], 500.0, 10.0);
        let g = model.material.geometry;
        let nd = node_dims(&g);
        let angle = 1e-6;
        let mut u = vec![Vec3::zeros(); nd[0] * nd[1] * nd[2]];
        for k in 0..nd[2] {
            for j in 0..nd[1] {
                for i in 0..nd[0] {
                    // small rotation about z: u = theta x r
                    let x = i as f64;
                    let y = j as f64;
                    u[node_index(&g, i, j, k)] = Vec3::new(-angle * y, angle * x, 0.0);
                }
            }
        }
        let fields = recover_stress_strain(&model, &u).unwrap();
        for f in &fields {
            assert!(f.max_principal_strain < 1e-8);
        }
    }

    #[test]
    fn uniform_uniaxial_strain_recovers_exactly() {
        let model = block_model([4, 4, 4], 400.0, 10.0);
        let g = model.material.geometry;
        let nd = node_dims(&g);
        let eps = 1e-3;
        let mut u = vec![Vec3::zeros(); nd[0] * nd[1] * nd[2]];
        for k in 0..nd[2] {
            for j in 0..nd[1] {
                for i in 0..nd[0] {
                    u[node_index(&g, i, j, k)] = Vec3::new(0.0, 0.0, eps * k as f64);
                }
            }
        }
        let fields = recover_stress_strain(&model, &u).unwrap();
        let e = model.material.modulus_mpa[0];
        let nu = model.material.poisson;
        let expected_vm = e / (1.0 + nu) * eps; // |s_zz - s_xx| for laterally constrained stretch
        for f in &fields {
            assert_relative_eq!(f.strain[2], eps, max_relative = 1e-12);
            assert!(f.strain[0].abs() < 1e-18 && f.strain[3].abs() < 1e-18);
            assert_relative_eq!(f.max_principal_strain, eps, max_relative = 1e-9);
            assert_relative_eq!(f.von_mises_mpa, expected_vm, max_relative = 1e-9);
        }
    }

    #[test]
    fn modulus_scaling_inverts_displacement() {
        let a = block_model([5, 5, 5], 400.0, 400.0);
        let mut b = a.clone();
        for m in b.material.modulus_mpa.iter_mut() {
            *m *= 8.0;
        }
        let ra = assemble_and_solve(&a, 1e-10, 10_000).unwrap();
        let rb = assemble_and_solve(&b, 1e-10, 10_000).unwrap();
        for (ua, ub) in ra.displacement_mm.iter().zip(&rb.displacement_mm) {
            for c in 0..3 {
                if ua[c] != 0.0 {
                    assert_relative_eq!(ub[c] * 8.0, ua[c], max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn load_linearity() {
        let a = block_model([5, 5, 5], 400.0, 200.0);
        let mut b = a.clone();
        b.total_load_n *= 2.0;
        let ra = assemble_and_solve(&a, 1e-10, 10_000).unwrap();
        let rb = assemble_and_solve(&b, 1e-10, 10_000).unwrap();
        for (ua, ub) in ra.displacement_mm.iter().zip(&rb.displacement_mm) {
            for c in 0..3 {
                if ua[c] != 0.0 {
                    assert_relative_eq!(ub[c], 2.0 * ua[c], max_relative = 1e-9);
                }
            }
        }
        for (ea, eb) in ra.elements.iter().zip(&rb.elements) {
            assert_relative_eq!(eb.von_mises_mpa, 2.0 * ea.von_mises_mpa, max_relative = 1e-9);
        }
    }

    #[test]
    fn energy_positivity() {
        let model = block_model([4, 4, 4], 400.0, 123.0);
        let result = assemble_and_solve(&model, 1e-10, 10_000).unwrap();
        let nodal = model.total_load_n / model.loaded_nodes.len() as f64;
        let mut work = 0.0;
        for &n in &model.loaded_nodes {
            work += nodal.dot(&result.displacement_mm[n]);
        }
        assert!(work > 0.0);
    }

    #[test]
    fn bit_identical_reruns() {
        let model = block_model([6, 5, 4], 700.0, 400.0);
        let a = assemble_and_solve(&model, 1e-9, 10_000).unwrap();
        let b = assemble_and_solve(&model, 1e-9, 10_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn floating_component_detected() {
        // two solid slabs separated by a void gap; only one is clamped
        let g = GridGeometry {
            dims: [7, 3, 3],
            spacing_mm: [1.0; 3],
            origin_mm: [0.0; 3],
        };
        let mut hu = vec![400.0; g.voxel_count()];
        for k in 0..3 {
            for j in 0..3 {
                hu[g.linear_index(3, j, k)] = 0.0; // air gap at i = 3
            }
        }
        let vol = DensityVolume::new(g, hu).unwrap();
        let material = crate::volume::build_material_field(&vol, &[]).unwrap();
        let mut clamped = Vec::new();
        let mut loaded = Vec::new();
        for k in 0..=3 {
            for j in 0..=3 {
                clamped.push(node_index(&g, 0, j, k));
                loaded.push(node_index(&g, 7, j, k));
            }
        }
        let model = FeModel {
            material,
            loaded_nodes: loaded,
            total_load_n: Vec3::new(0.0, 0.0, -10.0),
            clamped_nodes: clamped,
        };
        match assemble_and_solve(&model, 1e-8, 1000) {
            Err(FemError::FloatingComponent {
                representative_voxel,
                element_count,
            }) => {
                assert_eq!(element_count, 3 * 3 * 3);
                let [i, _, _] = g.voxel_coords(representative_voxel);
                assert!(i > 3);
            }
            other => panic!("expected floating component, got {other:?}"),
        }
    }

    #[test]
    fn non_convergence_reports_stats() {
        let model = block_model([6, 6, 6], 400.0, 400.0);
        match assemble_and_solve(&model, 1e-10, 3) {
            Err(FemError::NonConvergence {
                iterations,
                relative_residual,
            }) => {
                assert_eq!(iterations, 3);
                assert!(relative_residual > 1e-10);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_tolerance_rejected() {
        let model = block_model([3, 3, 3], 400.0, 10.0);
        assert!(matches!(
            assemble_and_solve(&model, 1e-3, 100),
            Err(FemError::InvalidTolerance { .. })
        ));
        assert!(matches!(
            assemble_and_solve(&model, 0.0, 100),
            Err(FemError::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn cancellous_extrema_restriction() {
        let model = block_model([3, 3, 3], 2000.0, 10.0); // all cortical
        let result = assemble_and_solve(&model, 1e-8, 1000).unwrap();
        assert!(matches!(
            cancellous_extrema(&result, &model.material),
            Err(FemError::NoCancellousElements)
        ));

        let model = block_model([3, 3, 3], 400.0, 10.0);
        let result = assemble_and_solve(&model, 1e-8, 1000).unwrap();
        let (s, e) = cancellous_extrema(&result, &model.material).unwrap();
        assert!(s > 0.0 && e > 0.0);
        let max_vm = result
            .elements
            .iter()
            .map(|f| f.von_mises_mpa)
            .fold(0.0f64, f64::max);
        assert_eq!(s, max_vm);
    }
}
