//! Calibrated density volumes, synthetic phantoms, and the Hounsfield → material
//! property mapping.
//!
//! A [`DensityVolume`] is a regular grid of Hounsfield values with physical
//! spacing; [`build_material_field`] turns it into the per-voxel class/modulus
//! field the FE solver consumes. Volumes round-trip through a flat
//! little-endian `f32` file (`<name>.f32raw`, x-fastest ordering) plus a JSON
//! sidecar carrying `dims`, `spacing_mm` and `origin_mm`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Point3;

/// Segmentation threshold: HU below this is treated as void (air/soft tissue).
pub const SEGMENTATION_THRESHOLD_HU: f64 = 100.0;
/// Cortical/cancellous split threshold in HU.
pub const CORTICAL_THRESHOLD_HU: f64 = 1800.0;
/// Fixed screw modulus (stainless steel, 200 GPa) in MPa.
pub const SCREW_MODULUS_MPA: f64 = 200_000.0;
/// Default Poisson ratio shared by all materials.
pub const DEFAULT_POISSON: f64 = 0.3;

/// Density calibration: `rho = HU_DENSITY_SLOPE * hu + HU_DENSITY_OFFSET`.
pub const HU_DENSITY_SLOPE: f64 = 1.122;
pub const HU_DENSITY_OFFSET: f64 = 47.0;

/// Power-law coefficients for the density → modulus map (MPa).
pub const CANCELLOUS_MODULUS_COEFF: f64 = 0.63;
pub const CORTICAL_MODULUS_COEFF: f64 = 1.89;
pub const MODULUS_EXPONENT: f64 = 1.35;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("non-finite HU value{}", .context)]
    NonFiniteHu { context: String },
    #[error("density must be positive, got {rho}")]
    NonPositiveDensity { rho: f64 },
    #[error("density → modulus mapping is undefined for the {class:?} class")]
    ModulusUndefinedForClass { class: MaterialClass },
    #[error("phantom spec invalid: {reason}")]
    InvalidPhantomSpec { reason: String },
    #[error("volume geometry invalid: {reason}")]
    InvalidGeometry { reason: String },
    #[error("screw voxel index {index} out of bounds (volume has {count} voxels)")]
    ScrewVoxelOutOfBounds { index: usize, count: usize },
    #[error("volume i/o failed for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("volume sidecar {path} invalid: {source}")]
    Sidecar {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("raw file {path} holds {actual} samples but dims require {expected}")]
    SampleCountMismatch {
        path: PathBuf,
        actual: usize,
        expected: usize,
    },
}

/// Regular grid layout shared by [`DensityVolume`] and [`MaterialField`].
///
/// Voxel `(i, j, k)` has its centre at `origin + spacing .* (i+0.5, j+0.5, k+0.5)`
/// and linear index `i + j*nx + k*nx*ny` (x-fastest, matching the file format).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub origin_mm: [f64; 3],
}

impl GridGeometry {
    pub fn validate(&self) -> Result<(), VolumeError> {
        if self.dims.iter().any(|&d| d < 1) {
            return Err(VolumeError::InvalidGeometry {
                reason: format!("all dims must be >= 1, got {:?}", self.dims),
            });
        }
        if self.spacing_mm.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(VolumeError::InvalidGeometry {
                reason: format!("all spacing components must be > 0, got {:?}", self.spacing_mm),
            });
        }
        if self.origin_mm.iter().any(|v| !v.is_finite()) {
            return Err(VolumeError::InvalidGeometry {
                reason: format!("origin must be finite, got {:?}", self.origin_mm),
            });
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn voxel_coords(&self, index: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    pub fn contains(&self, ijk: [i64; 3]) -> bool {
        ijk.iter()
            .zip(self.dims.iter())
            .all(|(&c, &d)| c >= 0 && (c as usize) < d)
    }

    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Point3 {
        Point3::new(
            self.origin_mm[0] + self.spacing_mm[0] * (i as f64 + 0.5),
            self.origin_mm[1] + self.spacing_mm[1] * (j as f64 + 0.5),
            self.origin_mm[2] + self.spacing_mm[2] * (k as f64 + 0.5),
        )
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing_mm.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn voxel_volume_mm3(&self) -> f64 {
        self.spacing_mm.iter().product()
    }
}

/// A calibrated Hounsfield volume: the patient/phantom stand-in.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVolume {
    pub geometry: GridGeometry,
    /// One HU sample per voxel, x-fastest.
    pub hu: Vec<f64>,
}

impl DensityVolume {
    pub fn new(geometry: GridGeometry, hu: Vec<f64>) -> Result<Self, VolumeError> {
        geometry.validate()?;
        if hu.len() != geometry.voxel_count() {
            return Err(VolumeError::InvalidGeometry {
                reason: format!(
                    "hu length {} does not match dims {:?} (needs {})",
                    hu.len(),
                    geometry.dims,
                    geometry.voxel_count()
                ),
            });
        }
        if let Some(pos) = hu.iter().position(|v| !v.is_finite()) {
            return Err(VolumeError::NonFiniteHu {
                context: format!(" at voxel {pos}"),
            });
        }
        Ok(Self { geometry, hu })
    }

    /// Min, deciles, and max of the HU distribution (11 values).
    pub fn hu_deciles(&self) -> [f64; 11] {
        let mut sorted = self.hu.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut out = [0.0; 11];
        for (q, slot) in out.iter_mut().enumerate() {
            let idx = (q * (n - 1)) / 10;
            *slot = sorted[idx];
        }
        out
    }

    /// Writes `<stem>.f32raw` (little-endian f32, x-fastest) and `<stem>.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), VolumeError> {
        let raw_path = dir.join(format!("{stem}.f32raw"));
        let sidecar_path = dir.join(format!("{stem}.json"));
        let mut raw = Vec::with_capacity(self.hu.len() * 4);
        for &v in &self.hu {
            raw.extend_from_slice(&(v as f32).to_le_bytes());
        }
        let write = |path: &PathBuf, bytes: &[u8]| -> Result<(), VolumeError> {
            std::fs::File::create(path)
                .and_then(|mut f| f.write_all(bytes))
                .map_err(|source| VolumeError::Io {
                    path: path.clone(),
                    source,
                })
        };
        write(&raw_path, &raw)?;
        let sidecar = serde_json::to_string_pretty(&self.geometry).expect("geometry serializes");
        write(&sidecar_path, sidecar.as_bytes())?;
        Ok((raw_path, sidecar_path))
    }

    /// Loads a volume from a `.f32raw` path (or its stem); the sidecar is
    /// looked up next to it with the `.json` extension.
    pub fn load(raw_path: &Path) -> Result<Self, VolumeError> {
        let raw_path = if raw_path.extension().is_none() {
            raw_path.with_extension("f32raw")
        } else {
            raw_path.to_path_buf()
        };
        let sidecar_path = raw_path.with_extension("json");
        let sidecar = std::fs::read_to_string(&sidecar_path).map_err(|source| VolumeError::Io {
            path: sidecar_path.clone(),
            source,
        })?;
        let geometry: GridGeometry =
            serde_json::from_str(&sidecar).map_err(|source| VolumeError::Sidecar {
                path: sidecar_path,
                source,
            })?;
        let mut bytes = Vec::new();
        std::fs::File::open(&raw_path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|source| VolumeError::Io {
                path: raw_path.clone(),
                source,
            })?;
        if bytes.len() != geometry.voxel_count() * 4 {
            return Err(VolumeError::SampleCountMismatch {
                path: raw_path,
                actual: bytes.len() / 4,
                expected: geometry.voxel_count(),
            });
        }
        let hu = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        Self::new(geometry, hu)
    }
}

/// Per-voxel material class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaterialClass {
    Void,
    Cancellous,
    Cortical,
    Screw,
}

/// Per-voxel class and elastic modulus: the FE input.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    pub geometry: GridGeometry,
    pub class: Vec<MaterialClass>,
    /// Elastic modulus per voxel in MPa; exactly 0 for void voxels.
    pub modulus_mpa: Vec<f64>,
    pub poisson: f64,
}

impl MaterialField {
    /// Number of non-void voxels.
    pub fn solid_count(&self) -> usize {
        self.class.iter().filter(|c| **c != MaterialClass::Void).count()
    }
}

/// Converts a Hounsfield value to the calibrated density (paper density
/// units; the modulus power laws absorb the unit choice).
pub fn hu_to_density(hu: f64) -> Result<f64, VolumeError> {
    if !hu.is_finite() {
        return Err(VolumeError::NonFiniteHu {
            context: String::new(),
        });
    }
    Ok(HU_DENSITY_SLOPE * hu + HU_DENSITY_OFFSET)
}

/// Density → elastic modulus power law, in MPa.
///
/// Only bone classes are density-mapped; the screw modulus is fixed at
/// [`SCREW_MODULUS_MPA`] and void carries no material.
pub fn density_to_modulus(rho: f64, class: MaterialClass) -> Result<f64, VolumeError> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(VolumeError::NonPositiveDensity { rho });
    }
    let coeff = match class {
        MaterialClass::Cancellous => CANCELLOUS_MODULUS_COEFF,
        MaterialClass::Cortical => CORTICAL_MODULUS_COEFF,
        MaterialClass::Void | MaterialClass::Screw => {
            return Err(VolumeError::ModulusUndefinedForClass { class })
        }
    };
    Ok(coeff * rho.powf(MODULUS_EXPONENT))
}

/// Segments a Hounsfield value into void / cancellous / cortical.
pub fn classify(hu: f64) -> Result<MaterialClass, VolumeError> {
    if !hu.is_finite() {
        return Err(VolumeError::NonFiniteHu {
            context: String::new(),
        });
    }
    Ok(if hu < SEGMENTATION_THRESHOLD_HU {
        MaterialClass::Void
    } else if hu < CORTICAL_THRESHOLD_HU {
        MaterialClass::Cancellous
    } else {
        MaterialClass::Cortical
    })
}

/// Classifies every voxel and overrides the given voxels with rigid screw
/// material (fixed 200 GPa modulus).
pub fn build_material_field(
    vol: &DensityVolume,
    screw_voxels: &[usize],
) -> Result<MaterialField, VolumeError> {
    let count = vol.geometry.voxel_count();
    let mut class = Vec::with_capacity(count);
    let mut modulus = Vec::with_capacity(count);
    for &hu in &vol.hu {
        let c = classify(hu)?;
        let e = match c {
            MaterialClass::Void => 0.0,
            _ => density_to_modulus(hu_to_density(hu)?, c)?,
        };
        class.push(c);
        modulus.push(e);
    }
    for &v in screw_voxels {
        if v >= count {
            return Err(VolumeError::ScrewVoxelOutOfBounds { index: v, count });
        }
        class[v] = MaterialClass::Screw;
        modulus[v] = SCREW_MODULUS_MPA;
    }
    Ok(MaterialField {
        geometry: vol.geometry,
        class,
        modulus_mpa: modulus,
        poisson: DEFAULT_POISSON,
    })
}

/// Low-density inclusion embedded in the cancellous interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowDensityRegion {
    /// Centre in block coordinates (mm from the bone block's min corner).
    pub center_mm: [f64; 3],
    pub radii_mm: [f64; 3],
    pub hu: f64,
}

/// Synthetic vertebra-like phantom: rectangular block with a cortical shell,
/// cancellous interior, optional low-density ellipsoid, and an air margin so
/// the bone boundary is visible to feasibility checks.
///
/// World coordinates are chosen so the bone block's min corner sits at the
/// origin (the air margin extends to negative coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub outer_mm: [f64; 3],
    #[serde(default = "default_spacing")]
    pub spacing_mm: [f64; 3],
    /// Air padding added on every side of the block, mm.
    #[serde(default = "default_margin")]
    pub margin_mm: f64,
    /// HU of the surrounding air/soft tissue; must segment as void.
    #[serde(default)]
    pub background_hu: f64,
    pub shell_mm: f64,
    pub cancellous_hu: f64,
    pub cortical_hu: f64,
    #[serde(default)]
    pub ellipsoid: Option<LowDensityRegion>,
    /// Uniform noise amplitude applied to bone voxels, HU.
    #[serde(default)]
    pub noise_hu: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_spacing() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

fn default_margin() -> f64 {
    1.0
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<(), VolumeError> {
        let err = |reason: String| Err(VolumeError::InvalidPhantomSpec { reason });
        if self.outer_mm.iter().any(|&v| !(v > 0.0)) {
            return err(format!("outer_mm must be positive, got {:?}", self.outer_mm));
        }
        if self.spacing_mm.iter().any(|&v| !(v > 0.0)) {
            return err(format!("spacing_mm must be positive, got {:?}", self.spacing_mm));
        }
        if !(self.margin_mm >= 0.0) {
            return err(format!("margin_mm must be >= 0, got {}", self.margin_mm));
        }
        if !(self.background_hu < SEGMENTATION_THRESHOLD_HU) {
            return err(format!(
                "background_hu must be < {SEGMENTATION_THRESHOLD_HU} so it segments as void, got {}",
                self.background_hu
            ));
        }
        if !(self.cortical_hu >= CORTICAL_THRESHOLD_HU) {
            return err(format!(
                "cortical_hu must be >= {CORTICAL_THRESHOLD_HU}, got {}",
                self.cortical_hu
            ));
        }
        if !(self.cancellous_hu >= SEGMENTATION_THRESHOLD_HU
            && self.cancellous_hu < CORTICAL_THRESHOLD_HU)
        {
            return err(format!(
                "cancellous_hu must lie in [{SEGMENTATION_THRESHOLD_HU}, {CORTICAL_THRESHOLD_HU}), got {}",
                self.cancellous_hu
            ));
        }
        if let Some(e) = &self.ellipsoid {
            if !(e.hu >= SEGMENTATION_THRESHOLD_HU) {
                return err(format!(
                    "ellipsoid hu must be >= {SEGMENTATION_THRESHOLD_HU}, got {}",
                    e.hu
                ));
            }
            if e.radii_mm.iter().any(|&r| !(r > 0.0)) {
                return err(format!("ellipsoid radii must be positive, got {:?}", e.radii_mm));
            }
        }
        if !(self.shell_mm >= 0.0) {
            return err(format!("shell_mm must be >= 0, got {}", self.shell_mm));
        }
        let half_min = 0.5 * self.outer_mm.iter().copied().fold(f64::INFINITY, f64::min);
        if self.shell_mm > half_min {
            return err(format!(
                "shell_mm {} exceeds half the smallest block dimension {half_min}",
                self.shell_mm
            ));
        }
        if !(self.noise_hu >= 0.0) {
            return err(format!("noise_hu must be >= 0, got {}", self.noise_hu));
        }
        Ok(())
    }
}

/// Builds the phantom volume. Pure function of the spec: a fixed seed gives a
/// bit-identical volume.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<DensityVolume, VolumeError> {
    spec.validate()?;
    let margin_vox: [usize; 3] = [
        (spec.margin_mm / spec.spacing_mm[0]).ceil() as usize,
        (spec.margin_mm / spec.spacing_mm[1]).ceil() as usize,
        (spec.margin_mm / spec.spacing_mm[2]).ceil() as usize,
    ];
    let dims: [usize; 3] = std::array::from_fn(|a| {
        (spec.outer_mm[a] / spec.spacing_mm[a]).ceil() as usize + 2 * margin_vox[a]
    });
    let geometry = GridGeometry {
        dims,
        spacing_mm: spec.spacing_mm,
        origin_mm: std::array::from_fn(|a| -(margin_vox[a] as f64) * spec.spacing_mm[a]),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut hu = Vec::with_capacity(geometry.voxel_count());
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let c = geometry.voxel_center(i, j, k);
                let p = [c.x, c.y, c.z]; // block coordinates: min corner at 0
                let inside = (0..3).all(|a| p[a] >= 0.0 && p[a] <= spec.outer_mm[a]);
                let mut value = if !inside {
                    spec.background_hu
                } else {
                    let in_shell = (0..3).any(|a| {
                        p[a] < spec.shell_mm || p[a] > spec.outer_mm[a] - spec.shell_mm
                    });
                    if in_shell {
                        spec.cortical_hu
                    } else {
                        match &spec.ellipsoid {
                            Some(e)
                                if (0..3)
                                    .map(|a| {
                                        let d = (p[a] - e.center_mm[a]) / e.radii_mm[a];
                                        d * d
                                    })
                                    .sum::<f64>()
                                    <= 1.0 =>
                            {
                                e.hu
                            }
                            _ => spec.cancellous_hu,
                        }
                    }
                };
                if inside && spec.noise_hu > 0.0 {
                    value += rng.gen_range(-spec.noise_hu..=spec.noise_hu);
                }
                hu.push(value);
            }
        }
    }
    DensityVolume::new(geometry, hu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn plain_spec() -> PhantomSpec {
        PhantomSpec {
            outer_mm: [20.0, 12.0, 10.0],
            spacing_mm: [1.0, 1.0, 1.0],
            margin_mm: 1.0,
            background_hu: 0.0,
            shell_mm: 2.0,
            cancellous_hu: 400.0,
            cortical_hu: 1900.0,
            ellipsoid: None,
            noise_hu: 0.0,
            seed: 7,
        }
    }

    #[test]
    fn density_formula_hand_values() {
        assert_relative_eq!(hu_to_density(0.0).unwrap(), 47.0);
        assert_relative_eq!(hu_to_density(1800.0).unwrap(), 2066.6, max_relative = 1e-12);
        assert_relative_eq!(hu_to_density(100.0).unwrap(), 159.2, max_relative = 1e-12);
        assert!(hu_to_density(f64::NAN).is_err());
    }

    #[test]
    fn modulus_power_law_hand_values() {
        let e = density_to_modulus(2066.6, MaterialClass::Cortical).unwrap();
        assert_relative_eq!(e, 1.89 * 2066.6_f64.powf(1.35), max_relative = 1e-12);
        assert!((e - 56_443.0).abs() / 56_443.0 < 5e-3); // hand arithmetic, ~56.4 GPa
        assert_relative_eq!(
            density_to_modulus(1.0, MaterialClass::Cancellous).unwrap(),
            0.63
        );
        let e = density_to_modulus(159.2, MaterialClass::Cancellous).unwrap();
        assert!((e - 591.5).abs() / 591.5 < 5e-3);
    }

    #[test]
    fn modulus_domain_errors() {
        assert!(density_to_modulus(0.0, MaterialClass::Cancellous).is_err());
        assert!(density_to_modulus(-1.0, MaterialClass::Cortical).is_err());
        assert!(matches!(
            density_to_modulus(100.0, MaterialClass::Screw),
            Err(VolumeError::ModulusUndefinedForClass { .. })
        ));
        assert!(density_to_modulus(100.0, MaterialClass::Void).is_err());
    }

    #[test]
    fn classify_thresholds() {
        assert_eq!(classify(99.999).unwrap(), MaterialClass::Void);
        assert_eq!(classify(100.0).unwrap(), MaterialClass::Cancellous);
        assert_eq!(classify(500.0).unwrap(), MaterialClass::Cancellous);
        assert_eq!(classify(1800.0).unwrap(), MaterialClass::Cortical);
        assert!(classify(f64::INFINITY).is_err());
    }

    #[test]
    fn cohort_average_ranges_reachable() {
        // The mapping must be able to produce moduli near the reported cohort
        // averages (~2500 MPa cancellous, ~15000 MPa cortical) inside the
        // segmented HU bands.
        let cancellous = density_to_modulus(hu_to_density(400.0).unwrap(), MaterialClass::Cancellous)
            .unwrap();
        assert!((2000.0..3500.0).contains(&cancellous), "got {cancellous}");
        let lo = density_to_modulus(hu_to_density(100.0).unwrap(), MaterialClass::Cortical).unwrap();
        let hi = density_to_modulus(hu_to_density(1800.0).unwrap(), MaterialClass::Cortical).unwrap();
        assert!(lo < 15_000.0 && 15_000.0 < hi);
    }

    #[test]
    fn phantom_constant_interior() {
        let vol = generate_phantom(&plain_spec()).unwrap();
        let g = vol.geometry;
        // every interior voxel equals the cancellous base HU
        let mut interior = 0;
        for k in 0..g.dims[2] {
            for j in 0..g.dims[1] {
                for i in 0..g.dims[0] {
                    let hu = vol.hu[g.linear_index(i, j, k)];
                    if classify(hu).unwrap() == MaterialClass::Cancellous {
                        assert_eq!(hu, 400.0);
                        interior += 1;
                    }
                }
            }
        }
        assert!(interior > 0);
    }

    #[test]
    fn phantom_deterministic() {
        let mut spec = plain_spec();
        spec.noise_hu = 30.0;
        let a = generate_phantom(&spec).unwrap();
        let b = generate_phantom(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phantom_ellipsoid_floor() {
        let mut spec = plain_spec();
        spec.ellipsoid = Some(LowDensityRegion {
            center_mm: [10.0, 6.0, 5.0],
            radii_mm: [3.0, 2.0, 2.0],
            hu: 120.0,
        });
        let vol = generate_phantom(&spec).unwrap();
        let min_bone = vol
            .hu
            .iter()
            .copied()
            .filter(|&v| v >= SEGMENTATION_THRESHOLD_HU)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min_bone, 120.0);
        // and the ellipsoid is actually present
        assert!(vol.hu.iter().any(|&v| v == 120.0));
    }

    #[test]
    fn phantom_shell_too_thick() {
        let mut spec = plain_spec();
        spec.shell_mm = 6.0; // half of min outer dim (10) is 5
        assert!(matches!(
            generate_phantom(&spec),
            Err(VolumeError::InvalidPhantomSpec { .. })
        ));
    }

    #[test]
    fn material_field_screw_override() {
        let vol = generate_phantom(&plain_spec()).unwrap();
        let field = build_material_field(&vol, &[0, 5]).unwrap();
        // voxel 0 sits in the air margin: formerly void, now screw
        assert_eq!(field.class[0], MaterialClass::Screw);
        assert_eq!(field.modulus_mpa[0], SCREW_MODULUS_MPA);
        let empty = build_material_field(&vol, &[]).unwrap();
        assert!(empty.class.iter().all(|c| *c != MaterialClass::Screw));
        assert!(matches!(
            build_material_field(&vol, &[vol.geometry.voxel_count()]),
            Err(VolumeError::ScrewVoxelOutOfBounds { .. })
        ));
    }

    #[test]
    fn uniform_cortical_volume_maps_uniformly() {
        let g = GridGeometry {
            dims: [4, 3, 2],
            spacing_mm: [1.0, 1.0, 1.0],
            origin_mm: [0.0; 3],
        };
        let vol = DensityVolume::new(g, vec![1800.0; 24]).unwrap();
        let field = build_material_field(&vol, &[7]).unwrap();
        let expected = density_to_modulus(hu_to_density(1800.0).unwrap(), MaterialClass::Cortical)
            .unwrap();
        for (idx, (&c, &e)) in field.class.iter().zip(&field.modulus_mpa).enumerate() {
            if idx == 7 {
                assert_eq!(c, MaterialClass::Screw);
            } else {
                assert_eq!(c, MaterialClass::Cortical);
                assert_eq!(e, expected);
            }
        }
    }

    #[test]
    fn volume_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = plain_spec();
        spec.noise_hu = 25.0;
        let vol = generate_phantom(&spec).unwrap();
        vol.save(dir.path(), "phantom").unwrap();
        let loaded = DensityVolume::load(&dir.path().join("phantom.f32raw")).unwrap();
        assert_eq!(loaded.geometry, vol.geometry);
        // f32 storage quantizes; round-trip must be exact at f32 precision
        for (&a, &b) in loaded.hu.iter().zip(&vol.hu) {
            assert_eq!(a, b as f32 as f64);
        }
    }

    proptest! {
        #[test]
        fn classify_bands_are_monotone(
            lo in -1000.0..99.999_f64,
            mid in 100.0..1799.999_f64,
            hi in 1800.0..4000.0_f64,
        ) {
            prop_assert_eq!(classify(lo).unwrap(), MaterialClass::Void);
            prop_assert_eq!(classify(mid).unwrap(), MaterialClass::Cancellous);
            prop_assert_eq!(classify(hi).unwrap(), MaterialClass::Cortical);
        }

        #[test]
        fn modulus_strictly_increasing(
            rho in 1.0..5000.0_f64,
            bump in 0.001..100.0_f64,
        ) {
            for class in [MaterialClass::Cancellous, MaterialClass::Cortical] {
                let a = density_to_modulus(rho, class).unwrap();
                let b = density_to_modulus(rho + bump, class).unwrap();
                prop_assert!(b > a);
            }
        }

        #[test]
        fn cortical_is_triple_cancellous(rho in 1.0..5000.0_f64) {
            let c = density_to_modulus(rho, MaterialClass::Cancellous).unwrap();
            let k = density_to_modulus(rho, MaterialClass::Cortical).unwrap();
            prop_assert!((k / c - 3.0).abs() < 1e-12);
        }
    }
}
