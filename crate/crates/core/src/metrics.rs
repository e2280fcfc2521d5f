//! Comparison and error statistics: improvement percentages, circle fits,
//! radius errors, and path deviation.

use nalgebra::{Matrix2, Matrix3, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trajectory::Trajectory;
use crate::{Point3, Vec3};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("baseline must be > 0, got {baseline}")]
    NonPositiveBaseline { baseline: f64 },
    #[error("reference radius must be > 0, got {reference}")]
    NonPositiveReference { reference: f64 },
    #[error("circle fit needs at least 3 points, got {count}")]
    TooFewPoints { count: usize },
    #[error("points are degenerate (no planar spread)")]
    DegeneratePoints,
    #[error("path deviation needs at least {needed} measured points, got {count}")]
    TooFewSamples { needed: usize, count: usize },
    #[error("trajectory error: {0}")]
    Trajectory(#[from] crate::trajectory::TrajectoryError),
}

/// Relative improvement of `candidate` over `baseline` in percent:
/// `100 * (baseline - candidate) / baseline`.
pub fn improvement_percent(baseline: f64, candidate: f64) -> Result<f64, MetricsError> {
    if !(baseline > 0.0) || !baseline.is_finite() {
        return Err(MetricsError::NonPositiveBaseline { baseline });
    }
    Ok(100.0 * (baseline - candidate) / baseline)
}

/// Percent radius error `100 * |measured - reference| / reference`.
pub fn radius_error_percent(reference_mm: f64, measured_mm: f64) -> Result<f64, MetricsError> {
    if !(reference_mm > 0.0) || !reference_mm.is_finite() {
        return Err(MetricsError::NonPositiveReference {
            reference: reference_mm,
        });
    }
    Ok(100.0 * (measured_mm - reference_mm).abs() / reference_mm)
}

/// Fitting plane: origin plus an orthonormal in-plane basis.
#[derive(Debug, Clone, Copy)]
pub struct Plane {
    pub origin: Point3,
    pub u: Vec3,
    pub v: Vec3,
}

impl Plane {
    pub fn normal(&self) -> Vec3 {
        self.u.cross(&self.v)
    }
}

/// Outcome of a circle fit.
#[derive(Debug, Clone, PartialEq)]
pub enum CircleFit {
    Arc {
        center: Point3,
        radius_mm: f64,
        /// Normal of the fitting plane.
        normal: Vec3,
    },
    /// Collinear input: infinite radius.
    Straight,
}

impl CircleFit {
    pub fn radius_mm(&self) -> Option<f64> {
        match self {
            CircleFit::Arc { radius_mm, .. } => Some(*radius_mm),
            CircleFit::Straight => None,
        }
    }
}

/// Best plane through the points by principal component analysis.
fn pca_plane(points: &[Point3]) -> Result<Plane, MetricsError> {
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords) / n;
    let mut cov = Matrix3::<f64>::zeros();
    for p in points {
        let d = p.coords - centroid;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    // order the eigenvectors by decreasing eigenvalue, deterministically
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if eig.eigenvalues[order[0]] <= 0.0 {
        return Err(MetricsError::DegeneratePoints);
    }
    let mut u: Vec3 = eig.eigenvectors.column(order[0]).into();
    let mut v: Vec3 = eig.eigenvectors.column(order[1]).into();
    // fix signs so the basis does not flip between equivalent eigen solutions
    let flip = |w: &mut Vec3| {
        let lead = w
            .iter()
            .cloned()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if w[lead] < 0.0 {
            *w = -*w;
        }
    };
    flip(&mut u);
    flip(&mut v);
    // re-orthonormalize (eigenvectors are orthonormal up to rounding)
    let u = u / u.norm();
    let v = (v - u * u.dot(&v)).normalize();
    Ok(Plane {
        origin: Point3::from(centroid),
        u,
        v,
    })
}

/// Least-squares circle through the points projected into `plane` (PCA plane
/// when absent): algebraic fit followed by geometric (orthogonal-distance)
/// Gauss-Newton refinement, at most 100 iterations, step tolerance 1e-12 mm.
pub fn fit_circle(points: &[Point3], plane: Option<&Plane>) -> Result<CircleFit, MetricsError> {
    if points.len() < 3 {
        return Err(MetricsError::TooFewPoints {
            count: points.len(),
        });
    }
    let plane = match plane {
        Some(p) => *p,
        None => pca_plane(points)?,
    };
    let xy: Vec<Vector2<f64>> = points
        .iter()
        .map(|p| {
            let d = p - plane.origin;
            Vector2::new(d.dot(&plane.u), d.dot(&plane.v))
        })
        .collect();

    // collinearity: in-plane spread perpendicular to the main axis
    let n = xy.len() as f64;
    let mean = xy.iter().sum::<Vector2<f64>>() / n;
    let mut cov = Matrix2::<f64>::zeros();
    for p in &xy {
        let d = p - mean;
        cov += d * d.transpose();
    }
    let eig2 = cov.symmetric_eigen();
    let (big, small) = (eig2.eigenvalues.max(), eig2.eigenvalues.min());
    if big <= 0.0 {
        return Err(MetricsError::DegeneratePoints);
    }
    if small / big < 1e-24 {
        return Ok(CircleFit::Straight);
    }

    // algebraic (Kasa) fit: x^2 + y^2 + a x + b y + c = 0
    let mut m = Matrix3::<f64>::zeros();
    let mut rhs = Vec3::zeros();
    for p in &xy {
        let (x, y) = (p.x, p.y);
        let z = x * x + y * y;
        m[(0, 0)] += x * x;
        m[(0, 1)] += x * y;
        m[(0, 2)] += x;
        m[(1, 1)] += y * y;
        m[(1, 2)] += y;
        m[(2, 2)] += 1.0;
        rhs += Vec3::new(-z * x, -z * y, -z);
    }
    m[(1, 0)] = m[(0, 1)];
    m[(2, 0)] = m[(0, 2)];
    m[(2, 1)] = m[(1, 2)];
    let abc = match m.lu().solve(&rhs) {
        Some(s) => s,
        None => return Ok(CircleFit::Straight),
    };
    let mut center = Vector2::new(-0.5 * abc.x, -0.5 * abc.y);
    let mut radius = (center.norm_squared() - abc.z).max(0.0).sqrt();

    // geometric refinement: minimize sum (|p_i - c| - R)^2 over the center;
    // the optimal R for a fixed center is the mean distance.
    for _ in 0..100 {
        let mut mean_d = 0.0;
        let mut grad = Vector2::zeros();
        let mut hess = Matrix2::<f64>::zeros();
        let dists: Vec<(Vector2<f64>, f64)> = xy
            .iter()
            .map(|p| {
                let d = p - center;
                let norm = d.norm().max(1e-300);
                (d / norm, norm)
            })
            .collect();
        for (_, norm) in &dists {
            mean_d += norm;
        }
        mean_d /= n;
        for (unit, norm) in &dists {
            let r = norm - mean_d;
            grad -= unit * r;
            hess += unit * unit.transpose();
        }
        // Gauss-Newton step on the reduced problem
        let step = match hess.lu().solve(&(-grad)) {
            Some(s) => s,
            None => break,
        };
        center += step;
        radius = mean_d;
        if step.norm() < 1e-12 {
            // recompute the radius at the final center
            radius = xy.iter().map(|p| (p - center).norm()).sum::<f64>() / n;
            break;
        }
    }

    let center3 = plane.origin + plane.u * center.x + plane.v * center.y;
    Ok(CircleFit::Arc {
        center: center3,
        radius_mm: radius,
        normal: plane.normal(),
    })
}

/// Distance from a point to the nearest point of the planned curve: coarse
/// arc-length scan plus golden-section refinement.
fn distance_to_curve(p: &Point3, planned: &Trajectory) -> f64 {
    let total = planned.total_length_mm;
    let coarse = 128;
    let d_at = |s: f64| (planned.point_at(s).expect("s in range") - p).norm();
    let mut best_i: usize = 0;
    let mut best = f64::INFINITY;
    for i in 0..=coarse {
        let d = d_at(total * i as f64 / coarse as f64);
        if d < best {
            best = d;
            best_i = i;
        }
    }
    let mut a = total * best_i.saturating_sub(1) as f64 / coarse as f64;
    let mut b = total * (best_i + 1).min(coarse) as f64 / coarse as f64;
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (d_at(c), d_at(d));
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = d_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = d_at(d);
        }
    }
    fc.min(fd).min(best)
}

/// Population standard deviation and maximum of the per-point distances from
/// the measured path to the planned curve.
pub fn path_deviation(
    measured: &[Point3],
    planned: &Trajectory,
) -> Result<(f64, f64), MetricsError> {
    if measured.len() < 2 {
        return Err(MetricsError::TooFewSamples {
            needed: 2,
            count: measured.len(),
        });
    }
    planned.validate()?;
    let dists: Vec<f64> = measured
        .iter()
        .map(|p| distance_to_curve(p, planned))
        .collect();
    let n = dists.len() as f64;
    let mean = dists.iter().sum::<f64>() / n;
    let var = dists.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    let max = dists.iter().cloned().fold(0.0, f64::max);
    Ok((var.sqrt(), max))
}

/// Per-trajectory biomechanics summary produced by the planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiomechanicalReport {
    pub trajectory_id: String,
    /// None when the candidate was infeasible and no FE run happened.
    pub max_cancellous_von_mises_mpa: Option<f64>,
    pub max_cancellous_principal_strain: Option<f64>,
    pub in_bone: bool,
    pub curvature_achievable: bool,
    #[serde(default)]
    pub infeasibility_reasons: Vec<String>,
}

impl BiomechanicalReport {
    pub fn feasible(&self) -> bool {
        self.in_bone && self.curvature_achievable
    }
}

/// Realized-path error summary for one drilling trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathErrorReport {
    /// None when the fitted path is straight.
    pub fitted_radius_mm: Option<f64>,
    pub fitted_curvature_per_mm: Option<f64>,
    /// Radius error against the planned trajectory radius.
    pub radius_error_vs_planned_pct: Option<f64>,
    /// Radius error against the achieved (spring-back) guide radius.
    pub radius_error_vs_guide_pct: Option<f64>,
    pub deviation_std_mm: f64,
    pub deviation_max_mm: f64,
}

/// Full path scoring: circle fit plus deviation statistics against the plan.
pub fn analyze_path(
    measured: &[Point3],
    planned: &Trajectory,
    planned_radius_mm: Option<f64>,
    guide_radius_mm: Option<f64>,
) -> Result<PathErrorReport, MetricsError> {
    let fit = fit_circle(measured, None)?;
    let (std, max) = path_deviation(measured, planned)?;
    let fitted = fit.radius_mm();
    let err = |reference: Option<f64>| -> Result<Option<f64>, MetricsError> {
        match (reference, fitted) {
            (Some(r), Some(f)) => Ok(Some(radius_error_percent(r, f)?)),
            _ => Ok(None),
        }
    };
    Ok(PathErrorReport {
        fitted_radius_mm: fitted,
        fitted_curvature_per_mm: fitted.map(|r| 1.0 / r),
        radius_error_vs_planned_pct: err(planned_radius_mm)?,
        radius_error_vs_guide_pct: err(guide_radius_mm)?,
        deviation_std_mm: std,
        deviation_max_mm: max,
    })
}
