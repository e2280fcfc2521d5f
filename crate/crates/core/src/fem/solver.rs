//! Matrix-free stiffness application and the Jacobi-preconditioned conjugate
//! gradient solve.
//!
//! All voxels share one reference stiffness matrix, scaled per element by its
//! modulus, so K is never assembled. Elements are grouped into eight parity
//! colors (voxel index parities along each axis): two elements of the same
//! color never share a node, which makes the scatter race-free under rayon and
//! keeps the per-node accumulation order fixed (color 0..7) regardless of the
//! thread count. Repeated runs are bit-identical.

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;

use crate::volume::{GridGeometry, MaterialClass, MaterialField};

use super::element;
use super::FemError;

/// Node status markers in `node_dof`.
const INACTIVE: i64 = -2;
const CLAMPED: i64 = -1;

#[derive(Clone, Copy)]
struct Elem {
    nodes: [u32; 8],
    modulus: f64,
}

pub(super) struct VoxelSystem {
    /// Per grid node: base index of its 3 free dofs, or CLAMPED / INACTIVE.
    node_dof: Vec<i64>,
    elems: Vec<Elem>,
    /// `elems` is grouped by parity color; ranges index into it.
    color_ranges: [std::ops::Range<usize>; 8],
    /// Voxel index per entry of `elems` (diagnostics, connectivity reporting).
    elem_voxels: Vec<usize>,
    k_ref: SMatrix<f64, 24, 24>,
    pub(super) n_free: usize,
    pub(super) n_nodes: usize,
}

/// Grid node count along each axis (one more than voxels).
pub fn node_dims(geometry: &GridGeometry) -> [usize; 3] {
    [
        geometry.dims[0] + 1,
        geometry.dims[1] + 1,
        geometry.dims[2] + 1,
    ]
}

/// Lexicographic node index (x-fastest), matching the voxel ordering.
pub fn node_index(geometry: &GridGeometry, i: usize, j: usize, k: usize) -> usize {
    let nd = node_dims(geometry);
    i + nd[0] * (j + nd[1] * k)
}

/// Global node ids of voxel `(i, j, k)` in local element order.
pub fn element_node_ids(geometry: &GridGeometry, i: usize, j: usize, k: usize) -> [usize; 8] {
    std::array::from_fn(|n| {
        let o = element::NODE_OFFSETS[n];
        node_index(geometry, i + o[0], j + o[1], k + o[2])
    })
}

impl VoxelSystem {
    pub(super) fn build(material: &MaterialField, clamped: &[usize]) -> Result<Self, FemError> {
        let g = &material.geometry;
        let nd = node_dims(g);
        let n_nodes = nd[0] * nd[1] * nd[2];
        let mut node_dof = vec![INACTIVE; n_nodes];

        // color-major element lists, each in ascending voxel order
        let mut buckets: [Vec<(usize, Elem)>; 8] = Default::default();
        for k in 0..g.dims[2] {
            for j in 0..g.dims[1] {
                for i in 0..g.dims[0] {
                    let v = g.linear_index(i, j, k);
                    if material.class[v] == MaterialClass::Void {
                        continue;
                    }
                    let modulus = material.modulus_mpa[v];
                    if !(modulus > 0.0) {
                        return Err(FemError::InvalidModel {
                            reason: format!("non-void voxel {v} has non-positive modulus {modulus}"),
                        });
                    }
                    let ids = element_node_ids(g, i, j, k);
                    for &n in &ids {
                        node_dof[n] = 0; // mark active; numbered below
                    }
                    let color = (i & 1) | ((j & 1) << 1) | ((k & 1) << 2);
                    buckets[color].push((
                        v,
                        Elem {
                            nodes: ids.map(|n| n as u32),
                            modulus,
                        },
                    ));
                }
            }
        }

        for &c in clamped {
            if c >= n_nodes {
                return Err(FemError::InvalidModel {
                    reason: format!("clamped node {c} out of range ({n_nodes} nodes)"),
                });
            }
            if node_dof[c] == INACTIVE {
                return Err(FemError::InvalidModel {
                    reason: format!("clamped node {c} belongs to no non-void element"),
                });
            }
            node_dof[c] = CLAMPED;
        }

        let mut next = 0i64;
        for d in node_dof.iter_mut() {
            if *d == 0 && *d != CLAMPED {
                *d = next;
                next += 3;
            }
        }
        let n_free = next as usize;

        let mut elems = Vec::new();
        let mut elem_voxels = Vec::new();
        let mut color_ranges: [std::ops::Range<usize>; 8] = Default::default();
        for (color, bucket) in buckets.into_iter().enumerate() {
            let start = elems.len();
            for (v, e) in bucket {
                elems.push(e);
                elem_voxels.push(v);
            }
            color_ranges[color] = start..elems.len();
        }

        if elems.is_empty() {
            return Err(FemError::InvalidModel {
                reason: "no non-void elements in the material field".into(),
            });
        }

        Ok(Self {
            node_dof,
            elems,
            color_ranges,
            elem_voxels,
            k_ref: element::reference_stiffness(g.spacing_mm, material.poisson),
            n_free,
            n_nodes,
        })
    }

    /// Every connected element component must contain a clamped node, else the
    /// component floats and K is singular.
    pub(super) fn check_connectivity(&self) -> Result<(), FemError> {
        let mut parent: Vec<u32> = (0..self.n_nodes as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for el in &self.elems {
            let r0 = find(&mut parent, el.nodes[0]);
            for &n in &el.nodes[1..] {
                let r = find(&mut parent, n);
                parent[r as usize] = r0;
            }
        }
        let mut anchored = std::collections::HashSet::new();
        for (node, &d) in self.node_dof.iter().enumerate() {
            if d == CLAMPED {
                anchored.insert(find(&mut parent, node as u32));
            }
        }
        let mut floating: std::collections::BTreeMap<u32, (usize, usize)> = Default::default();
        for (idx, el) in self.elems.iter().enumerate() {
            let root = find(&mut parent, el.nodes[0]);
            if !anchored.contains(&root) {
                let voxel = self.elem_voxels[idx];
                let entry = floating.entry(root).or_insert((voxel, 0));
                entry.0 = entry.0.min(voxel);
                entry.1 += 1;
            }
        }
        if let Some((_, &(representative_voxel, element_count))) = floating.iter().next() {
            return Err(FemError::FloatingComponent {
                representative_voxel,
                element_count,
            });
        }
        Ok(())
    }

    fn gather(&self, el: &Elem, u: &[f64]) -> SVector<f64, 24> {
        let mut ue = SVector::<f64, 24>::zeros();
        for (n, &node) in el.nodes.iter().enumerate() {
            let dof = self.node_dof[node as usize];
            if dof >= 0 {
                let d = dof as usize;
                ue[3 * n] = u[d];
                ue[3 * n + 1] = u[d + 1];
                ue[3 * n + 2] = u[d + 2];
            }
        }
        ue
    }

    /// out = K u on the free dofs (clamped rows/columns dropped).
    pub(super) fn apply(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.n_free);
        out.fill(0.0);
        let ptr = SendPtr(out.as_mut_ptr());
        for range in &self.color_ranges {
            self.elems[range.clone()].par_iter().for_each(|el| {
                let fe = self.k_ref * self.gather(el, u) * el.modulus;
                let p = ptr;
                for (n, &node) in el.nodes.iter().enumerate() {
                    let dof = self.node_dof[node as usize];
                    if dof >= 0 {
                        // same-color elements never share nodes: no race
                        unsafe {
                            *p.0.add(dof as usize) += fe[3 * n];
                            *p.0.add(dof as usize + 1) += fe[3 * n + 1];
                            *p.0.add(dof as usize + 2) += fe[3 * n + 2];
                        }
                    }
                }
            });
        }
    }

    /// Full-rank product: forces at every grid node (3 per node) for a
    /// per-node displacement vector. Used for reaction recovery.
    pub(super) fn apply_full(&self, u_nodes: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u_nodes.len(), 3 * self.n_nodes);
        out.fill(0.0);
        for el in &self.elems {
            let mut ue = SVector::<f64, 24>::zeros();
            for (n, &node) in el.nodes.iter().enumerate() {
                for c in 0..3 {
                    ue[3 * n + c] = u_nodes[3 * node as usize + c];
                }
            }
            let fe = self.k_ref * ue * el.modulus;
            for (n, &node) in el.nodes.iter().enumerate() {
                for c in 0..3 {
                    out[3 * node as usize + c] += fe[3 * n + c];
                }
            }
        }
    }

    /// Diagonal of K on the free dofs (Jacobi preconditioner).
    pub(super) fn diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.n_free];
        for el in &self.elems {
            for (n, &node) in el.nodes.iter().enumerate() {
                let dof = self.node_dof[node as usize];
                if dof >= 0 {
                    for c in 0..3 {
                        diag[dof as usize + c] += el.modulus * self.k_ref[(3 * n + c, 3 * n + c)];
                    }
                }
            }
        }
        diag
    }

    pub(super) fn dof_of_node(&self, node: usize) -> Option<usize> {
        let d = self.node_dof[node];
        (d >= 0).then_some(d as usize)
    }
}

#[derive(Clone, Copy)]
struct SendPtr(*mut f64);
// Safety: writes from different elements of one color touch disjoint indices.
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

pub(super) struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // sequential, fixed order: determinism over speed
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG to a relative residual `||r|| / ||b|| <= tol`.
pub(super) fn pcg(sys: &VoxelSystem, b: &[f64], tol: f64, max_iter: usize) -> CgOutcome {
    let n = b.len();
    let norm_b = dot(b, b).sqrt();
    if norm_b == 0.0 {
        return CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let inv_diag: Vec<f64> = sys.diagonal().iter().map(|d| 1.0 / d).collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;

    for it in 1..=max_iter {
        sys.apply(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rel = dot(&r, &r).sqrt() / norm_b;
        if rel <= tol {
            return CgOutcome {
                x,
                iterations: it,
                relative_residual: rel,
                converged: true,
            };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        x,
        iterations: max_iter,
        relative_residual: rel,
        converged: false,
    }
}
