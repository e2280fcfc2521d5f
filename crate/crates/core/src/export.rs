//! Deterministic artifact writers: pretty JSON, flat CSV, and SVG plots.
//!
//! Everything here formats floats with fixed precision and iterates
//! collections in a stable order, so re-running a pipeline on identical
//! inputs reproduces every artifact byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::fem::FeResult;
use crate::metrics::CircleFit;
use crate::planner::PlanResult;
use crate::trajectory::Trajectory;
use crate::volume::{MaterialClass, MaterialField};
use crate::Point3;

/// Stress-map colour scale cap, MPa.
pub const STRESS_MAP_CAP_MPA: f64 = 10.0;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("failed writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Writes a string artifact, creating parent directories.
pub fn write_text(path: &Path, content: &str) -> Result<(), ExportError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| ExportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, content).map_err(|source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExportError> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_text(path, &body)
}

/// Jet-style colour ramp on `t` in [0, 1].
fn heat_color(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let ramp = |x: f64| (255.0 * x.clamp(0.0, 1.0)).round() as u8;
    let r = ramp(1.5 - (4.0 * t - 3.0).abs());
    let g = ramp(1.5 - (4.0 * t - 2.0).abs());
    let b = ramp(1.5 - (4.0 * t - 1.0).abs());
    (r, g, b)
}

/// Mid-plane von Mises heat map: one rect per voxel of slice `k`, colour
/// clamped at `cap_mpa`. Void renders white, screw dark grey.
pub fn stress_map_svg(material: &MaterialField, fe: &FeResult, slice_k: usize, cap_mpa: f64) -> String {
    let g = &material.geometry;
    let k = slice_k.min(g.dims[2] - 1);
    let scale = 8usize;
    let (w, h) = (g.dims[0] * scale, g.dims[1] * scale + 30);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for j in 0..g.dims[1] {
        for i in 0..g.dims[0] {
            let v = g.linear_index(i, j, k);
            let fill = match material.class[v] {
                MaterialClass::Void => "#ffffff".to_string(),
                MaterialClass::Screw => "#3c3c3c".to_string(),
                _ => {
                    let vm = fe
                        .elements
                        .binary_search_by(|el| el.voxel.cmp(&v))
                        .map(|idx| fe.elements[idx].von_mises_mpa)
                        .unwrap_or(0.0);
                    let (r, gg, b) = heat_color(vm / cap_mpa);
                    format!("#{r:02x}{gg:02x}{b:02x}")
                }
            };
            let x = i * scale;
            let y = (g.dims[1] - 1 - j) * scale; // +y up
            let _ = writeln!(
                svg,
                r#"<rect x="{x}" y="{y}" width="{scale}" height="{scale}" fill="{fill}"/>"#
            );
        }
    }
    // colour bar
    let bar_y = g.dims[1] * scale + 8;
    let bar_w = g.dims[0] * scale;
    for px in 0..bar_w {
        let (r, gg, b) = heat_color(px as f64 / bar_w as f64);
        let _ = writeln!(
            svg,
            r##"<rect x="{px}" y="{bar_y}" width="1" height="10" fill="#{r:02x}{gg:02x}{b:02x}"/>"##
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="0" y="{}" font-size="10" font-family="monospace">0</text>"#,
        bar_y + 20
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="10" font-family="monospace" text-anchor="end">{cap_mpa:.0} MPa (von Mises, capped)</text>"#,
        bar_w,
        bar_y + 20
    );
    svg.push_str("</svg>\n");
    svg
}

/// Flat CSV of every candidate (ranked first, then infeasible).
pub fn candidates_csv(result: &PlanResult) -> String {
    let mut out = String::from(
        "id,rank,feasible,curvature_per_mm,straight_length_mm,total_length_mm,\
         max_cancellous_von_mises_mpa,max_cancellous_principal_strain,in_bone,\
         curvature_achievable,notes\n",
    );
    let mut row = |cand: &crate::planner::RankedCandidate, rank: Option<usize>| {
        let t = &cand.trajectory;
        let fmt_opt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.6}"),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.2},{:.2},{},{},{},{},{}",
            cand.id,
            rank.map(|r| r.to_string()).unwrap_or_default(),
            cand.report.feasible(),
            t.curvature_per_mm,
            t.straight_length_mm,
            t.total_length_mm,
            fmt_opt(cand.report.max_cancellous_von_mises_mpa),
            fmt_opt(cand.report.max_cancellous_principal_strain),
            cand.report.in_bone,
            cand.report.curvature_achievable,
            cand.report.infeasibility_reasons.join("; ").replace(',', ";"),
        );
    };
    for (rank, cand) in result.ranked.iter().enumerate() {
        row(cand, Some(rank + 1));
    }
    for cand in &result.infeasible {
        row(cand, None);
    }
    out
}

/// Flat CSV of drilling trials.
pub fn trials_csv(outcomes: &[crate::ctsdr::TrialOutcome]) -> String {
    let mut out = String::from(
        "trial_id,insertion_speed_mm_s,rotational_speed_rpm,repetition,seed,\
         fitted_radius_mm,radius_error_vs_planned_pct,radius_error_vs_guide_pct,\
         deviation_std_mm,deviation_max_mm,drilling_time_s,hole_width_mm\n",
    );
    let fmt_opt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.6}"),
        None => String::new(),
    };
    for t in outcomes {
        let _ = writeln!(
            out,
            "{},{:.3},{:.0},{},{},{},{},{},{:.6},{:.6},{:.4},{:.3}",
            t.trial_id,
            t.insertion_speed_mm_s,
            t.rotational_speed_rpm,
            t.repetition,
            t.seed,
            fmt_opt(t.errors.fitted_radius_mm),
            fmt_opt(t.errors.radius_error_vs_planned_pct),
            fmt_opt(t.errors.radius_error_vs_guide_pct),
            t.errors.deviation_std_mm,
            t.errors.deviation_max_mm,
            t.drilling_time_s,
            t.hole_width_mm,
        );
    }
    out
}

/// Histogram of radius errors with the reference band shaded.
pub fn error_histogram_svg(errors_pct: &[f64], band: (f64, f64)) -> String {
    let (w, h) = (480usize, 240usize);
    let margin = 30.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if errors_pct.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let lo = errors_pct.iter().cloned().fold(f64::INFINITY, f64::min).min(band.0) - 0.2;
    let hi = errors_pct.iter().cloned().fold(0.0, f64::max).max(band.1) + 0.2;
    let bins = 24usize;
    let mut counts = vec![0usize; bins];
    for &e in errors_pct {
        let b = (((e - lo) / (hi - lo)) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let max_count = counts.iter().cloned().max().unwrap_or(1).max(1);
    let plot_w = w as f64 - 2.0 * margin;
    let plot_h = h as f64 - 2.0 * margin;
    let x_of = |e: f64| margin + (e - lo) / (hi - lo) * plot_w;
    // reference band
    let _ = writeln!(
        svg,
        r##"<rect x="{:.1}" y="{margin}" width="{:.1}" height="{plot_h:.1}" fill="#d8f0d8"/>"##,
        x_of(band.0),
        x_of(band.1) - x_of(band.0),
    );
    for (b, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let bh = plot_h * c as f64 / max_count as f64;
        let x = margin + plot_w * b as f64 / bins as f64;
        let _ = writeln!(
            svg,
            r##"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{bh:.1}" fill="#4878a8"/>"##,
            margin + plot_h - bh,
            plot_w / bins as f64 - 1.0,
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{margin}" y="{:.1}" font-size="10" font-family="monospace">{lo:.1}%</text>"#,
        h as f64 - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="10" font-family="monospace" text-anchor="end">{hi:.1}%</text>"#,
        w as f64 - margin,
        h as f64 - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{margin}" y="16" font-size="10" font-family="monospace">radius error histogram (band {:.1}-{:.1}%)</text>"#,
        band.0, band.1
    );
    svg.push_str("</svg>\n");
    svg
}

/// Planned curve, fitted circle, and measured points projected onto the
/// planned bend plane.
pub fn arc_overlay_svg(
    planned: &Trajectory,
    measured: &[Point3],
    fit: &CircleFit,
) -> String {
    let (w, h) = (480usize, 360usize);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);

    // in-plane frame centred on the entry
    let origin = planned.entry();
    let u = planned.direction_vec();
    let v = planned.turn_vec();
    let project = |p: &Point3| -> (f64, f64) {
        let d = p - origin;
        (d.dot(&u), d.dot(&v))
    };

    let mut pts2: Vec<(f64, f64)> = measured.iter().map(|p| project(p)).collect();
    let n_curve = 64;
    let curve2: Vec<(f64, f64)> = (0..=n_curve)
        .map(|i| {
            let s = planned.total_length_mm * i as f64 / n_curve as f64;
            project(&planned.point_at(s).expect("s in range"))
        })
        .collect();
    pts2.extend(curve2.iter().cloned());
    let min_x = pts2.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - 3.0;
    let max_x = pts2.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + 3.0;
    let min_y = pts2.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) - 3.0;
    let max_y = pts2.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + 3.0;
    let sx = (w as f64 - 20.0) / (max_x - min_x);
    let sy = (h as f64 - 20.0) / (max_y - min_y);
    let s = sx.min(sy);
    let map = |(x, y): (f64, f64)| -> (f64, f64) {
        (10.0 + (x - min_x) * s, h as f64 - 10.0 - (y - min_y) * s)
    };

    // planned centreline
    let mut path = String::new();
    for (i, &p) in curve2.iter().enumerate() {
        let (x, y) = map(p);
        let _ = write!(path, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
    }
    let _ = writeln!(
        svg,
        r##"<path d="{path}" fill="none" stroke="#202020" stroke-width="2" stroke-dasharray="6,3"/>"##
    );

    // fitted circle (only the arc range spanned by the measured points)
    if let CircleFit::Arc { center, radius_mm, .. } = fit {
        let c2 = project(center);
        let thetas: Vec<f64> = measured
            .iter()
            .map(|p| {
                let q = project(p);
                (q.1 - c2.1).atan2(q.0 - c2.0)
            })
            .collect();
        let t0 = thetas.iter().cloned().fold(f64::INFINITY, f64::min);
        let t1 = thetas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut path = String::new();
        for i in 0..=n_curve {
            let t = t0 + (t1 - t0) * i as f64 / n_curve as f64;
            let p = (c2.0 + radius_mm * t.cos(), c2.1 + radius_mm * t.sin());
            let (x, y) = map(p);
            let _ = write!(path, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
        }
        let _ = writeln!(
            svg,
            r##"<path d="{path}" fill="none" stroke="#b03030" stroke-width="1.5"/>"##
        );
    }

    for p in measured {
        let (x, y) = map(project(p));
        let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="#4878a8"/>"##);
    }
    let _ = writeln!(
        svg,
        r#"<text x="10" y="16" font-size="10" font-family="monospace">planned (dashed) / fitted arc (red) / samples (blue)</text>"#
    );
    svg.push_str("</svg>\n");
    svg
}
