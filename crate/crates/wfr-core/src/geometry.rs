//! Geodesic interpolation of densities in four geometries: displacement
//! (Wasserstein), linear mixture, exponential (log-linear), and Fisher-Rao
//! (Hellinger), on grids and in the Gaussian (mu, sigma) parameter plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDensity;
use crate::models::GaussianMixtureModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPoint {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianPoint {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
            return Err(Error::invalid("gaussian point needs finite mu, sigma > 0"));
        }
        Ok(Self { mu, sigma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeodesicKind {
    Wasserstein,
    Mixture,
    Exponential,
    FisherRao,
}

impl GeodesicKind {
    pub const ALL: [GeodesicKind; 4] = [
        GeodesicKind::Wasserstein,
        GeodesicKind::Mixture,
        GeodesicKind::Exponential,
        GeodesicKind::FisherRao,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GeodesicKind::Wasserstein => "wasserstein",
            GeodesicKind::Mixture => "mixture",
            GeodesicKind::Exponential => "exponential",
            GeodesicKind::FisherRao => "fisher_rao",
        }
    }
}

/// Uniform grid description for rendering parametric points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n_cells: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, n_cells: usize) -> Result<Self> {
        if !(hi > lo) || n_cells == 0 {
            return Err(Error::invalid("grid spec needs hi > lo and n_cells >= 1"));
        }
        Ok(Self { lo, hi, n_cells })
    }

    pub fn render(&self, p: &GaussianPoint) -> Result<GridDensity> {
        let m = GaussianMixtureModel::single(vec![p.mu], p.sigma * p.sigma)?;
        GridDensity::from_model(&m, self.lo, self.hi, self.n_cells)
    }
}

/// Either a parametric Gaussian or a grid density, depending on whether the
/// requested geodesic stays inside the Gaussian family.
#[derive(Debug, Clone, PartialEq)]
pub enum GeoPoint {
    Point(GaussianPoint),
    Grid(GridDensity),
}

fn check_unit_interval(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

fn require_positive(g: &GridDensity, kind: GeodesicKind) -> Result<()> {
    if !g.is_strictly_positive() {
        return Err(Error::Domain(format!(
            "{} interpolation needs strictly positive densities",
            kind.name()
        )));
    }
    Ok(())
}

/// Unnormalized Hellinger segment ((1-t) sqrt(rho0) + t sqrt(rho1))^2: the
/// straight line in the square-root (cone) coordinates.
pub fn hellinger_segment(rho0: &GridDensity, rho1: &GridDensity, t: f64) -> Result<GridDensity> {
    if !rho0.same_grid(rho1) {
        return Err(Error::invalid("densities live on different grids"));
    }
    check_unit_interval(t)?;
    GridDensity::new(
        rho0.lo,
        rho0.hi,
        rho0.values
            .iter()
            .zip(&rho1.values)
            .map(|(a, b)| {
                let r = (1.0 - t) * a.sqrt() + t * b.sqrt();
                r * r
            })
            .collect(),
    )
}

/// Hellinger distance sqrt(int (sqrt(p) - sqrt(q))^2 dx) on a common grid.
pub fn hellinger_distance(a: &GridDensity, b: &GridDensity) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::invalid("densities live on different grids"));
    }
    let dx = a.dx();
    Ok((a
        .values
        .iter()
        .zip(&b.values)
        .map(|(p, q)| {
            let d = p.sqrt() - q.sqrt();
            d * d
        })
        .sum::<f64>()
        * dx)
        .sqrt())
}

/// Interpolate two grid densities at t in [0, 1] in the given geometry.
/// Endpoints return exact copies of the inputs.
pub fn grid_geodesic(
    rho0: &GridDensity,
    rho1: &GridDensity,
    t: f64,
    kind: GeodesicKind,
) -> Result<GridDensity> {
    if !rho0.same_grid(rho1) {
        return Err(Error::invalid("densities live on different grids"));
    }
    check_unit_interval(t)?;
    if t == 0.0 || rho0.values == rho1.values {
        return Ok(rho0.clone());
    }
    if t == 1.0 {
        return Ok(rho1.clone());
    }
    match kind {
        GeodesicKind::Mixture => GridDensity::new(
            rho0.lo,
            rho0.hi,
            rho0.values
                .iter()
                .zip(&rho1.values)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        ),
        GeodesicKind::Exponential => {
            require_positive(rho0, kind)?;
            require_positive(rho1, kind)?;
            let logs: Vec<f64> = rho0
                .values
                .iter()
                .zip(&rho1.values)
                .map(|(a, b)| (1.0 - t) * a.ln() + t * b.ln())
                .collect();
            let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut g = GridDensity::new(
                rho0.lo,
                rho0.hi,
                logs.iter().map(|l| (l - m).exp()).collect(),
            )?;
            g.normalize();
            Ok(g)
        }
        GeodesicKind::FisherRao => {
            require_positive(rho0, kind)?;
            require_positive(rho1, kind)?;
            let mut g = hellinger_segment(rho0, rho1, t)?;
            g.normalize();
            Ok(g)
        }
        GeodesicKind::Wasserstein => displacement_interpolation(rho0, rho1, t),
    }
}

/// 1-D displacement interpolation via quantile averaging:
/// Q_t(u) = (1-t) Q_0(u) + t Q_1(u). The interpolant is rebuilt by spreading
/// each quantile stratum's mass uniformly between its interpolated endpoints.
fn displacement_interpolation(
    rho0: &GridDensity,
    rho1: &GridDensity,
    t: f64,
) -> Result<GridDensity> {
    let n = rho0.n_cells();
    let strata = 16 * n;
    let dx = rho0.dx();
    let mut values = vec![0.0; n];
    let (lo, hi) = (rho0.lo, rho0.hi);
    let mass_per = 1.0 / strata as f64;
    let mut q_prev = {
        let u = 0.0;
        (1.0 - t) * rho0.quantile(u) + t * rho1.quantile(u)
    };
    for k in 1..=strata {
        let u = k as f64 / strata as f64;
        let q = (1.0 - t) * rho0.quantile(u) + t * rho1.quantile(u);
        let (a, b) = (q_prev.min(q), q_prev.max(q));
        if b - a < 1e-300 {
            // Degenerate stratum: drop the mass into its cell.
            let idx = (((a - lo) / dx).floor() as isize).clamp(0, n as isize - 1) as usize;
            values[idx] += mass_per;
        } else {
            let dens = mass_per / (b - a);
            let i0 = (((a - lo) / dx).floor() as isize).clamp(0, n as isize - 1) as usize;
            let i1 = (((b - lo) / dx).floor() as isize).clamp(0, n as isize - 1) as usize;
            for i in i0..=i1 {
                let c_lo = lo + i as f64 * dx;
                let c_hi = c_lo + dx;
                let overlap = (b.min(c_hi) - a.max(c_lo)).max(0.0);
                values[i] += dens * overlap;
            }
        }
        q_prev = q;
    }
    let mut g = GridDensity::new(lo, hi, values.iter().map(|m| m / dx).collect())?;
    g.normalize();
    Ok(g)
}

/// Geodesic between two Gaussians. Wasserstein, exponential, and Fisher-Rao
/// stay in the (mu, sigma) plane; the mixture leaves the family and comes
/// back as a grid density on `grid`.
pub fn gaussian_geodesic(
    p0: &GaussianPoint,
    p1: &GaussianPoint,
    t: f64,
    kind: GeodesicKind,
    grid: &GridSpec,
) -> Result<GeoPoint> {
    check_unit_interval(t)?;
    match kind {
        GeodesicKind::Wasserstein => Ok(GeoPoint::Point(GaussianPoint::new(
            (1.0 - t) * p0.mu + t * p1.mu,
            (1.0 - t) * p0.sigma + t * p1.sigma,
        )?)),
        GeodesicKind::Exponential => {
            // Linear in the natural parameters (1/sigma^2, mu/sigma^2).
            let prec = (1.0 - t) / (p0.sigma * p0.sigma) + t / (p1.sigma * p1.sigma);
            let lin = (1.0 - t) * p0.mu / (p0.sigma * p0.sigma)
                + t * p1.mu / (p1.sigma * p1.sigma);
            Ok(GeoPoint::Point(GaussianPoint::new(
                lin / prec,
                (1.0 / prec).sqrt(),
            )?))
        }
        GeodesicKind::FisherRao => Ok(GeoPoint::Point(fisher_rao_gaussian_geodesic(p0, p1, t)?)),
        GeodesicKind::Mixture => {
            let g0 = grid.render(p0)?;
            let g1 = grid.render(p1)?;
            Ok(GeoPoint::Grid(grid_geodesic(
                &g0,
                &g1,
                t,
                GeodesicKind::Mixture,
            )?))
        }
    }
}

// Geodesic equations of the Fisher information metric
// ds^2 = (dmu^2 + 2 dsigma^2) / sigma^2 on the upper half-plane:
//   mu''    = 2 mu' sigma' / sigma
//   sigma'' = (sigma'^2 - mu'^2 / 2) / sigma
#[derive(Clone, Copy)]
struct GeoState {
    mu: f64,
    sig: f64,
    dmu: f64,
    dsig: f64,
}

fn geo_rhs(s: GeoState) -> [f64; 4] {
    [
        s.dmu,
        s.dsig,
        2.0 * s.dmu * s.dsig / s.sig,
        (s.dsig * s.dsig - 0.5 * s.dmu * s.dmu) / s.sig,
    ]
}

fn rk4_step(s: GeoState, h: f64) -> GeoState {
    let add = |s: GeoState, k: &[f64; 4], c: f64| GeoState {
        mu: s.mu + c * k[0],
        sig: s.sig + c * k[1],
        dmu: s.dmu + c * k[2],
        dsig: s.dsig + c * k[3],
    };
    let k1 = geo_rhs(s);
    let k2 = geo_rhs(add(s, &k1, 0.5 * h));
    let k3 = geo_rhs(add(s, &k2, 0.5 * h));
    let k4 = geo_rhs(add(s, &k3, h));
    GeoState {
        mu: s.mu + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        sig: s.sig + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        dmu: s.dmu + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        dsig: s.dsig + h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    }
}

/// Integrate the geodesic ODE from (p0, v0) for affine time `len`.
fn shoot(p0: &GaussianPoint, v0: (f64, f64), len: f64, steps: usize) -> Option<GaussianPoint> {
    let mut s = GeoState {
        mu: p0.mu,
        sig: p0.sigma,
        dmu: v0.0,
        dsig: v0.1,
    };
    if len == 0.0 {
        return GaussianPoint {
            mu: s.mu,
            sigma: s.sig,
        }
        .into_checked();
    }
    let h = len / steps as f64;
    for _ in 0..steps {
        s = rk4_step(s, h);
        if !(s.sig > 1e-9) || !s.mu.is_finite() || !s.sig.is_finite() {
            return None;
        }
    }
    GaussianPoint {
        mu: s.mu,
        sigma: s.sig,
    }
    .into_checked()
}

impl GaussianPoint {
    fn into_checked(self) -> Option<GaussianPoint> {
        (self.sigma > 0.0 && self.mu.is_finite() && self.sigma.is_finite()).then_some(self)
    }
}

const SHOOT_STEPS: usize = 256;

/// Fisher-Rao geodesic point at affine parameter t, found by shooting: a
/// damped Newton iteration on the initial velocity with a finite-difference
/// Jacobian, integrating the geodesic ODE with RK4.
pub fn fisher_rao_gaussian_geodesic(
    p0: &GaussianPoint,
    p1: &GaussianPoint,
    t: f64,
) -> Result<GaussianPoint> {
    check_unit_interval(t)?;
    if t == 0.0 {
        return Ok(*p0);
    }
    let residual = |v: (f64, f64)| -> Option<(f64, f64)> {
        shoot(p0, v, 1.0, SHOOT_STEPS).map(|p| (p.mu - p1.mu, p.sigma - p1.sigma))
    };
    let mut v = (p1.mu - p0.mu, p1.sigma - p0.sigma);
    let mut r = residual(v).ok_or_else(|| {
        Error::NumericalFailure("geodesic shooting left the half-plane".into())
    })?;
    let norm = |r: (f64, f64)| (r.0 * r.0 + r.1 * r.1).sqrt();
    let mut it = 0;
    while norm(r) > 1e-11 {
        if it > 60 {
            return Err(Error::NumericalFailure(format!(
                "geodesic shooting stalled at residual {:.3e}",
                norm(r)
            )));
        }
        it += 1;
        let eps = 1e-6 * (1.0 + norm((v.0, v.1)));
        let r10 = residual((v.0 + eps, v.1));
        let r01 = residual((v.0, v.1 + eps));
        let (r10, r01) = match (r10, r01) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::NumericalFailure(
                    "geodesic shooting left the half-plane".into(),
                ))
            }
        };
        let j = [
            [(r10.0 - r.0) / eps, (r01.0 - r.0) / eps],
            [(r10.1 - r.1) / eps, (r01.1 - r.1) / eps],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return Err(Error::NumericalFailure("singular shooting Jacobian".into()));
        }
        let du = (-r.0 * j[1][1] + r.1 * j[0][1]) / det;
        let dv = (-j[0][0] * r.1 + j[1][0] * r.0) / det;
        // Backtracking keeps sigma positive along the trial shot.
        let mut lambda = 1.0;
        loop {
            let cand = (v.0 + lambda * du, v.1 + lambda * dv);
            if let Some(rc) = residual(cand) {
                if norm(rc) < norm(r) {
                    v = cand;
                    r = rc;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Err(Error::NumericalFailure(
                    "geodesic shooting line search failed".into(),
                ));
            }
        }
    }
    let steps = ((SHOOT_STEPS as f64 * t).ceil() as usize).max(2);
    shoot(p0, v, t, steps)
        .ok_or_else(|| Error::NumericalFailure("geodesic evaluation left the half-plane".into()))
}

/// Median trajectory of the triangle (p; u, v): for each s on the u-v
/// geodesic in geometry `kind_j`, the midpoint (t = 1/2) of the geodesic from
/// p to that point in geometry `kind_i`. This midpoint reading is one
/// concrete interpretation of projecting the u-v geodesic through p.
pub fn median_trajectory(
    p: &GaussianPoint,
    u: &GaussianPoint,
    v: &GaussianPoint,
    kind_i: GeodesicKind,
    kind_j: GeodesicKind,
    n_samples: usize,
    grid: &GridSpec,
) -> Result<Vec<(f64, GeoPoint)>> {
    if n_samples < 2 {
        return Err(Error::invalid("median trajectory needs n_samples >= 2"));
    }
    let mut out = Vec::with_capacity(n_samples);
    for idx in 0..n_samples {
        let s = idx as f64 / (n_samples - 1) as f64;
        let along = gaussian_geodesic(u, v, s, kind_j, grid)?;
        let mid = match (&along, kind_i) {
            (GeoPoint::Point(q), k) if k != GeodesicKind::Mixture => {
                gaussian_geodesic(p, q, 0.5, k, grid)?
            }
            (GeoPoint::Point(q), k) => {
                let pg = grid.render(p)?;
                let qg = grid.render(q)?;
                GeoPoint::Grid(grid_geodesic(&pg, &qg, 0.5, k)?)
            }
            (GeoPoint::Grid(qg), k) => {
                let pg = grid.render(p)?;
                GeoPoint::Grid(grid_geodesic(&pg, qg, 0.5, k)?)
            }
        };
        out.push((s, mid));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grids() -> (GridDensity, GridDensity) {
        let m0 = GaussianMixtureModel::standard(1);
        let m1 = GaussianMixtureModel::single(vec![2.0], 1.0).unwrap();
        (
            GridDensity::from_model(&m0, -10.0, 10.0, 1000).unwrap(),
            GridDensity::from_model(&m1, -10.0, 10.0, 1000).unwrap(),
        )
    }

    #[test]
    fn endpoints_are_exact_for_all_kinds() {
        let (g0, g1) = grids();
        for kind in GeodesicKind::ALL {
            let a = grid_geodesic(&g0, &g1, 0.0, kind).unwrap();
            let b = grid_geodesic(&g0, &g1, 1.0, kind).unwrap();
            assert_eq!(a.values, g0.values, "{kind:?} t=0");
            assert_eq!(b.values, g1.values, "{kind:?} t=1");
        }
    }

    #[test]
    fn degenerate_geodesic_is_constant() {
        let (g0, _) = grids();
        for kind in GeodesicKind::ALL {
            let mid = grid_geodesic(&g0, &g0, 0.37, kind).unwrap();
            assert_eq!(mid.values, g0.values, "{kind:?}");
        }
    }

    #[test]
    fn exponential_midpoint_is_product_gaussian() {
        let (g0, g1) = grids();
        let mid = grid_geodesic(&g0, &g1, 0.5, GeodesicKind::Exponential).unwrap();
        let target = GridDensity::from_model(
            &GaussianMixtureModel::single(vec![1.0], 1.0).unwrap(),
            -10.0,
            10.0,
            1000,
        )
        .unwrap();
        assert!(mid.l1_distance(&target).unwrap() < 1e-3);
    }

    #[test]
    fn wasserstein_midpoint_of_shifted_gaussians() {
        let (g0, g1) = grids();
        let mid = grid_geodesic(&g0, &g1, 0.5, GeodesicKind::Wasserstein).unwrap();
        let target = GridDensity::from_model(
            &GaussianMixtureModel::single(vec![1.0], 1.0).unwrap(),
            -10.0,
            10.0,
            1000,
        )
        .unwrap();
        let err = mid.l1_distance(&target).unwrap();
        assert!(err < 5e-3, "L1 = {err}");
        assert!((mid.mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn masses_stay_normalized() {
        let (g0, g1) = grids();
        for kind in GeodesicKind::ALL {
            for &t in &[0.2, 0.5, 0.9] {
                let g = grid_geodesic(&g0, &g1, t, kind).unwrap();
                assert!((g.mass() - 1.0).abs() < 1e-8, "{kind:?} t={t}");
            }
        }
    }

    #[test]
    fn exponential_fr_swap_symmetry() {
        let (g0, g1) = grids();
        for kind in [GeodesicKind::Exponential, GeodesicKind::FisherRao] {
            let a = grid_geodesic(&g0, &g1, 0.3, kind).unwrap();
            let b = grid_geodesic(&g1, &g0, 0.7, kind).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-10, "{kind:?}");
            }
        }
    }

    #[test]
    fn zero_density_is_a_domain_error() {
        let g0 = GridDensity::new(-1.0, 1.0, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let g1 = GridDensity::new(-1.0, 1.0, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        for kind in [GeodesicKind::Exponential, GeodesicKind::FisherRao] {
            assert!(matches!(
                grid_geodesic(&g0, &g1, 0.5, kind),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn hellinger_arc_length_is_additive_before_renormalization() {
        let (g0, g1) = grids();
        let total = hellinger_distance(&g0, &g1).unwrap();
        for &t in &[0.1, 0.25, 0.5, 0.8] {
            let seg = hellinger_segment(&g0, &g1, t).unwrap();
            let sum =
                hellinger_distance(&g0, &seg).unwrap() + hellinger_distance(&seg, &g1).unwrap();
            assert!((sum - total).abs() < 1e-6, "t = {t}: {sum} vs {total}");
        }
    }

    #[test]
    fn parametric_geodesics_hand_values() {
        let grid = GridSpec::new(-9.0, 9.0, 256).unwrap();
        let p0 = GaussianPoint::new(0.0, 1.0).unwrap();
        let p1 = GaussianPoint::new(2.0, 3.0).unwrap();
        match gaussian_geodesic(&p0, &p1, 0.5, GeodesicKind::Wasserstein, &grid).unwrap() {
            GeoPoint::Point(q) => {
                assert!((q.mu - 1.0).abs() < 1e-12);
                assert!((q.sigma - 2.0).abs() < 1e-12);
            }
            _ => panic!("expected a parametric point"),
        }
        let p1 = GaussianPoint::new(2.0, 1.0).unwrap();
        match gaussian_geodesic(&p0, &p1, 0.5, GeodesicKind::Exponential, &grid).unwrap() {
            GeoPoint::Point(q) => {
                assert!((q.mu - 1.0).abs() < 1e-12);
                assert!((q.sigma - 1.0).abs() < 1e-12);
            }
            _ => panic!("expected a parametric point"),
        }
    }

    // Closed-form Fisher-Rao geodesics in the scaled half-plane
    // z = (mu / sqrt(2), sigma): vertical lines or circular arcs centered on
    // the boundary, with arclength parameter s = log tan(theta / 2).
    fn fr_closed_form(p0: &GaussianPoint, p1: &GaussianPoint, t: f64) -> GaussianPoint {
        let (u0, u1) = (p0.mu / 2f64.sqrt(), p1.mu / 2f64.sqrt());
        let (s0, s1) = (p0.sigma, p1.sigma);
        if (u0 - u1).abs() < 1e-12 {
            return GaussianPoint {
                mu: p0.mu,
                sigma: s0.powf(1.0 - t) * s1.powf(t),
            };
        }
        let c = (u0 * u0 + s0 * s0 - u1 * u1 - s1 * s1) / (2.0 * (u0 - u1));
        let r = ((u0 - c) * (u0 - c) + s0 * s0).sqrt();
        let th0 = s0.atan2(u0 - c);
        let th1 = s1.atan2(u1 - c);
        let arc = |th: f64| (th / 2.0).tan().ln();
        let s = (1.0 - t) * arc(th0) + t * arc(th1);
        let th = 2.0 * s.exp().atan();
        GaussianPoint {
            mu: (c + r * th.cos()) * 2f64.sqrt(),
            sigma: r * th.sin(),
        }
    }

    #[test]
    fn fisher_rao_shooting_reproduces_endpoints() {
        let p0 = GaussianPoint::new(-1.0, 0.7).unwrap();
        let p1 = GaussianPoint::new(2.0, 1.8).unwrap();
        let a = fisher_rao_gaussian_geodesic(&p0, &p1, 0.0).unwrap();
        assert_eq!((a.mu, a.sigma), (p0.mu, p0.sigma));
        let b = fisher_rao_gaussian_geodesic(&p0, &p1, 1.0).unwrap();
        assert!((b.mu - p1.mu).abs() < 1e-8);
        assert!((b.sigma - p1.sigma).abs() < 1e-8);
    }

    #[test]
    fn fisher_rao_shooting_matches_closed_form() {
        let cases = [
            ((0.0, 1.0), (2.0, 1.0)),
            ((-1.0, 0.5), (1.5, 2.0)),
            ((0.0, 0.8), (0.0, 2.5)), // vertical geodesic
            ((3.0, 1.2), (-2.0, 0.6)),
        ];
        for ((m0, s0), (m1, s1)) in cases {
            let p0 = GaussianPoint::new(m0, s0).unwrap();
            let p1 = GaussianPoint::new(m1, s1).unwrap();
            for &t in &[0.25, 0.5, 0.75] {
                let got = fisher_rao_gaussian_geodesic(&p0, &p1, t).unwrap();
                let want = fr_closed_form(&p0, &p1, t);
                assert!(
                    (got.mu - want.mu).abs() < 1e-6 && (got.sigma - want.sigma).abs() < 1e-6,
                    "({m0},{s0})->({m1},{s1}) t={t}: ({}, {}) vs ({}, {})",
                    got.mu,
                    got.sigma,
                    want.mu,
                    want.sigma
                );
            }
        }
    }

    #[test]
    fn median_trajectory_degenerate_cases() {
        let grid = GridSpec::new(-9.0, 9.0, 256).unwrap();
        let p = GaussianPoint::new(0.0, 1.0).unwrap();
        let u = GaussianPoint::new(2.0, 1.5).unwrap();
        // u = v: constant at midpoint(p, u).
        let traj = median_trajectory(
            &p,
            &u,
            &u,
            GeodesicKind::Wasserstein,
            GeodesicKind::Wasserstein,
            5,
            &grid,
        )
        .unwrap();
        for (_, pt) in &traj {
            match pt {
                GeoPoint::Point(q) => {
                    assert!((q.mu - 1.0).abs() < 1e-12);
                    assert!((q.sigma - 1.25).abs() < 1e-12);
                }
                _ => panic!("expected parametric output"),
            }
        }
        // p = u: the trajectory starts at p itself.
        let traj = median_trajectory(
            &p,
            &p,
            &u,
            GeodesicKind::Exponential,
            GeodesicKind::Wasserstein,
            3,
            &grid,
        )
        .unwrap();
        match &traj[0].1 {
            GeoPoint::Point(q) => {
                assert!((q.mu - p.mu).abs() < 1e-12);
                assert!((q.sigma - p.sigma).abs() < 1e-12);
            }
            _ => panic!("expected parametric output"),
        }
    }

    #[test]
    fn median_trajectory_collinear_wasserstein_is_straight() {
        let grid = GridSpec::new(-9.0, 9.0, 128).unwrap();
        let p = GaussianPoint::new(0.0, 1.0).unwrap();
        let u = GaussianPoint::new(-2.0, 0.5).unwrap();
        let v = GaussianPoint::new(2.0, 1.5).unwrap();
        let traj = median_trajectory(
            &p,
            &u,
            &v,
            GeodesicKind::Wasserstein,
            GeodesicKind::Wasserstein,
            9,
            &grid,
        )
        .unwrap();
        // Midpoints of straight segments from p to a straight u-v segment:
        // again a straight segment in (mu, sigma).
        let first = match &traj[0].1 {
            GeoPoint::Point(q) => *q,
            _ => panic!(),
        };
        let last = match &traj[8].1 {
            GeoPoint::Point(q) => *q,
            _ => panic!(),
        };
        for (s, pt) in &traj {
            match pt {
                GeoPoint::Point(q) => {
                    let mu = (1.0 - s) * first.mu + s * last.mu;
                    let sg = (1.0 - s) * first.sigma + s * last.sigma;
                    assert!((q.mu - mu).abs() < 1e-10);
                    assert!((q.sigma - sg).abs() < 1e-10);
                }
                _ => panic!(),
            }
        }
    }

    #[test]
    fn all_kind_pairs_produce_output() {
        let grid = GridSpec::new(-9.0, 9.0, 128).unwrap();
        let p = GaussianPoint::new(0.0, 1.0).unwrap();
        let u = GaussianPoint::new(-2.0, 0.8).unwrap();
        let v = GaussianPoint::new(2.0, 1.3).unwrap();
        for ki in GeodesicKind::ALL {
            for kj in GeodesicKind::ALL {
                let traj = median_trajectory(&p, &u, &v, ki, kj, 4, &grid).unwrap();
                assert_eq!(traj.len(), 4);
            }
        }
    }
}
