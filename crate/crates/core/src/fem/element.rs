//! Trilinear 8-node hexahedral element on an axis-aligned voxel.
//!
//! Every voxel in a grid shares the same box geometry, so one reference
//! stiffness matrix at unit modulus serves the whole mesh: the element matrix
//! is `E * K_ref`. Strains are recovered at the element centroid, which for a
//! constant-Jacobian box equals the average over the 2x2x2 Gauss points.

use nalgebra::SMatrix;

/// Local node order: lexicographic over the voxel corners with the standard
/// counter-clockwise bottom/top split. Offsets in voxel units.
pub const NODE_OFFSETS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Natural coordinates of each local node.
const XI: [f64; 8] = [-1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 8] = [-1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0];
const ZETA: [f64; 8] = [-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0];

/// Isotropic Hooke matrix at unit modulus (Voigt order
/// `[e_xx, e_yy, e_zz, g_xy, g_yz, g_xz]` with engineering shear).
pub fn constitutive_unit(nu: f64) -> SMatrix<f64, 6, 6> {
    let f = 1.0 / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let diag = f * (1.0 - nu);
    let off = f * nu;
    let shear = 0.5 / (1.0 + nu);
    let mut d = SMatrix::<f64, 6, 6>::zeros();
    for r in 0..3 {
        for c in 0..3 {
            d[(r, c)] = if r == c { diag } else { off };
        }
    }
    for s in 3..6 {
        d[(s, s)] = shear;
    }
    d
}

/// Strain-displacement matrix at natural coordinates for a box with edge
/// lengths `spacing`.
fn b_matrix(spacing: [f64; 3], xi: f64, eta: f64, zeta: f64) -> SMatrix<f64, 6, 24> {
    let mut b = SMatrix::<f64, 6, 24>::zeros();
    for n in 0..8 {
        // physical derivatives: dN/dx = dN/dxi * 2/hx for the box Jacobian
        let dx = 0.25 * XI[n] * (1.0 + ETA[n] * eta) * (1.0 + ZETA[n] * zeta) / spacing[0];
        let dy = 0.25 * (1.0 + XI[n] * xi) * ETA[n] * (1.0 + ZETA[n] * zeta) / spacing[1];
        let dz = 0.25 * (1.0 + XI[n] * xi) * (1.0 + ETA[n] * eta) * ZETA[n] / spacing[2];
        let c = 3 * n;
        b[(0, c)] = dx;
        b[(1, c + 1)] = dy;
        b[(2, c + 2)] = dz;
        b[(3, c)] = dy;
        b[(3, c + 1)] = dx;
        b[(4, c + 1)] = dz;
        b[(4, c + 2)] = dy;
        b[(5, c)] = dz;
        b[(5, c + 2)] = dx;
    }
    b
}

/// B evaluated at the element centroid (used for stress recovery).
pub fn centroid_b(spacing: [f64; 3]) -> SMatrix<f64, 6, 24> {
    b_matrix(spacing, 0.0, 0.0, 0.0)
}

/// Reference stiffness at unit modulus: full 2x2x2 Gauss integration.
pub fn reference_stiffness(spacing: [f64; 3], nu: f64) -> SMatrix<f64, 24, 24> {
    let d = constitutive_unit(nu);
    let det_j = spacing[0] * spacing[1] * spacing[2] / 8.0;
    let g = 1.0 / 3.0_f64.sqrt();
    let mut k = SMatrix::<f64, 24, 24>::zeros();
    for &zeta in &[-g, g] {
        for &eta in &[-g, g] {
            for &xi in &[-g, g] {
                let b = b_matrix(spacing, xi, eta, zeta);
                k += b.transpose() * d * b * det_j;
            }
        }
    }
    k
}
