//! CSV and JSON emission. Floats are written with Rust's shortest
//! round-trip formatting, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{RunResult, Snapshot};
use crate::error::Result;
use crate::geometry::{GaussianPoint, GeoPoint, GeodesicKind, GridSpec};
use crate::grid::GridDensity;

/// Ensemble snapshots, one row per alive particle:
/// snapshot_t, particle_id, x0..x{d-1}, log_w, ell.
pub fn snapshots_csv(snapshots: &[Snapshot], dim: usize) -> String {
    let mut out = String::new();
    out.push_str("snapshot_t,particle_id");
    for d in 0..dim {
        let _ = write!(out, ",x{d}");
    }
    out.push_str(",log_w,ell\n");
    for snap in snapshots {
        for (i, p) in snap.ensemble.particles.iter().enumerate() {
            if !p.alive {
                continue;
            }
            let _ = write!(out, "{},{}", snap.t, i);
            for d in 0..dim {
                let _ = write!(out, ",{}", p.x[d]);
            }
            let _ = writeln!(out, ",{},{}", p.log_w, p.ell);
        }
    }
    out
}

/// Grid trajectory rows: t, x_center, density.
pub fn grid_csv(slices: &[(f64, GridDensity)]) -> String {
    let mut out = String::from("t,x_center,density\n");
    for (t, g) in slices {
        for (x, v) in g.centers().iter().zip(&g.values) {
            let _ = writeln!(out, "{t},{x},{v}");
        }
    }
    out
}

/// Parametric geodesic rows: segment, s, t, mu, sigma.
pub struct PointRow {
    pub segment: &'static str,
    pub s: f64,
    pub t: f64,
    pub point: GaussianPoint,
}

/// Grid-valued geodesic rows share one file: segment, s, cell_center, density.
pub struct GridRow {
    pub segment: &'static str,
    pub s: f64,
    pub density: GridDensity,
}

pub fn points_csv(rows: &[PointRow]) -> String {
    let mut out = String::from("segment,s,t,mu,sigma\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.segment, r.s, r.t, r.point.mu, r.point.sigma
        );
    }
    out
}

pub fn grid_rows_csv(rows: &[GridRow]) -> String {
    let mut out = String::from("segment,s,cell_center,density\n");
    for r in rows {
        for (x, v) in r.density.centers().iter().zip(&r.density.values) {
            let _ = writeln!(out, "{},{},{},{}", r.segment, r.s, x, v);
        }
    }
    out
}

/// Render the triangle figure for one (edge kind, base kind) pair: the two
/// collapse edges from p, the u-v base geodesic, and the median trajectory.
/// Returns (parametric csv, grid csv); either may hold only its header.
pub fn triangle_csvs(
    p: &GaussianPoint,
    u: &GaussianPoint,
    v: &GaussianPoint,
    kind_i: GeodesicKind,
    kind_j: GeodesicKind,
    n_samples: usize,
    grid: &GridSpec,
) -> Result<(String, String)> {
    let mut points = Vec::new();
    let mut grids = Vec::new();
    let mut push = |segment: &'static str, s: f64, t: f64, gp: GeoPoint| {
        match gp {
            GeoPoint::Point(q) => points.push(PointRow {
                segment,
                s,
                t,
                point: q,
            }),
            GeoPoint::Grid(g) => grids.push(GridRow {
                segment,
                s,
                density: g,
            }),
        }
    };
    for idx in 0..n_samples {
        let s = idx as f64 / (n_samples - 1) as f64;
        push(
            "edge_pu",
            s,
            s,
            crate::geometry::gaussian_geodesic(p, u, s, kind_i, grid)?,
        );
        push(
            "edge_pv",
            s,
            s,
            crate::geometry::gaussian_geodesic(p, v, s, kind_i, grid)?,
        );
        push(
            "edge_uv",
            s,
            s,
            crate::geometry::gaussian_geodesic(u, v, s, kind_j, grid)?,
        );
    }
    for (s, gp) in crate::geometry::median_trajectory(p, u, v, kind_i, kind_j, n_samples, grid)? {
        push("median", s, 0.5, gp);
    }
    Ok((points_csv(&points), grid_rows_csv(&grids)))
}

/// Summary JSON common to every experiment: config echo, seed, version,
/// wall time, and the run's terminal statistics. `wall_secs` is the one field
/// that varies between identical runs.
pub fn run_summary_json(
    config_echo: serde_json::Value,
    seed: u64,
    result: &RunResult,
    wall_secs: f64,
) -> serde_json::Value {
    serde_json::json!({
        "config": config_echo,
        "seed": seed,
        "version": version_string(),
        "wall_time_s": wall_secs,
        "terminal_mean": result.terminal_mean,
        "terminal_var": result.terminal_var,
        "log_normalizer": result.log_z,
        "ess_trace": result.ess_trace,
        "n_resamples": result.n_resamples,
        "n_jumps": result.n_jumps,
        "max_abs_log_w": result.max_abs_log_w,
    })
}

/// git-describe-style version tag of this build.
pub fn version_string() -> String {
    format!("wfr-v{}", env!("CARGO_PKG_VERSION"))
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::make_ensemble;

    #[test]
    fn snapshot_csv_has_header_and_skips_dead() {
        let mut e = make_ensemble(3, |_| vec![0.5, -1.0], 1, 0.25).unwrap();
        e.particles[1].alive = false;
        let snap = Snapshot {
            step: 10,
            t: 0.25,
            ensemble: e,
            log_z: 0.0,
            ess: 2.0,
        };
        let csv = snapshots_csv(&[snap], 2);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "snapshot_t,particle_id,x0,x1,log_w,ell");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.25,0,"));
        assert!(lines[2].starts_with("0.25,2,"));
    }

    #[test]
    fn float_formatting_round_trips() {
        let x = 0.1f64 + 0.2;
        let s = format!("{x}");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn triangle_pair_is_deterministic() {
        let grid = GridSpec::new(-9.0, 9.0, 64).unwrap();
        let p = GaussianPoint::new(0.0, 1.0).unwrap();
        let u = GaussianPoint::new(-2.0, 0.8).unwrap();
        let v = GaussianPoint::new(2.0, 1.3).unwrap();
        let a = triangle_csvs(
            &p,
            &u,
            &v,
            GeodesicKind::FisherRao,
            GeodesicKind::Mixture,
            5,
            &grid,
        )
        .unwrap();
        let b = triangle_csvs(
            &p,
            &u,
            &v,
            GeodesicKind::FisherRao,
            GeodesicKind::Mixture,
            5,
            &grid,
        )
        .unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert!(a.0.lines().count() > 1);
        assert!(a.1.lines().count() > 1);
    }
}
