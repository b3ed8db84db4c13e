//! Independent verification machinery: explicit finite-difference solver for
//! the transport-diffusion-reaction PDE, the chi-square dissipation identity,
//! OU semigroup closed forms, and grid carre-du-champ operators.
//!
//! The solver is deliberately plain: flux-form first-order upwind advection,
//! centered diffusion, Dirichlet-zero ghost cells, and a hard CFL guard with
//! automatic sub-stepping. Its job is to be trustworthy, not fast.

use crate::correctors::{InterpolationKind, InterpolationSpec};
use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::geometry::{grid_geodesic, GeodesicKind, GridSpec};
use crate::grid::GridDensity;
use crate::schedule::TimeSchedule;

/// Coefficient fields of the PDE in the solver's integration clock:
/// d/dtau p = -(p v)' + (sigma^2/2) p'' + p (psi - E_p[psi]).
/// `tau` advances along the supplied schedule while `t` is physical time.
pub trait PdeFields {
    fn sigma(&self, t: f64) -> f64;
    /// Velocity evaluated at the given positions (cell faces).
    fn velocity_profile(&self, t: f64, xs: &[f64]) -> Vec<f64>;
    /// Uncentered reaction rate at cell centers; `None` disables the
    /// reaction/renormalization stage entirely.
    fn rate_profile(&self, t: f64, xs: &[f64]) -> Option<Vec<f64>>;
}

/// Plain closures, for hand-built test fields.
pub struct ClosureFields<V, S, P>
where
    V: Fn(f64, f64) -> f64,
    S: Fn(f64) -> f64,
    P: Fn(f64, f64) -> f64,
{
    pub velocity: V,
    pub sigma: S,
    pub rate: Option<P>,
}

impl<V, S, P> PdeFields for ClosureFields<V, S, P>
where
    V: Fn(f64, f64) -> f64,
    S: Fn(f64) -> f64,
    P: Fn(f64, f64) -> f64,
{
    fn sigma(&self, t: f64) -> f64 {
        (self.sigma)(t)
    }

    fn velocity_profile(&self, t: f64, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| (self.velocity)(t, x)).collect()
    }

    fn rate_profile(&self, t: f64, xs: &[f64]) -> Option<Vec<f64>> {
        self.rate
            .as_ref()
            .map(|r| xs.iter().map(|&x| r(t, x)).collect())
    }
}

/// Guided drift and corrector potential of an interpolated model pair, with
/// the log-ratio taken from the exact analytic marginals. This is the
/// grid-side counterpart of the particle dynamics.
pub struct InterpolationFields<'a> {
    pub fields: &'a FieldSet,
    pub interp: InterpolationSpec,
}

impl PdeFields for InterpolationFields<'_> {
    fn sigma(&self, t: f64) -> f64 {
        self.fields.at(t).sigma
    }

    fn velocity_profile(&self, t: f64, xs: &[f64]) -> Vec<f64> {
        let at = self.fields.at(t);
        let sig2 = at.sigma * at.sigma;
        xs.iter()
            .map(|&x| {
                let (ld1, s1, _) = at.model1().eval_1d(x);
                let (ld2, s2, _) = at.model2().eval_1d(x);
                let (guided, _, _, _) =
                    crate::correctors::interp_eval_1d(&self.interp, s1, s2, ld2 - ld1, at.sigma);
                at.kappa * x + sig2 * guided
            })
            .collect()
    }

    fn rate_profile(&self, t: f64, xs: &[f64]) -> Option<Vec<f64>> {
        let at = self.fields.at(t);
        Some(
            xs.iter()
                .map(|&x| {
                    let (ld1, s1, _) = at.model1().eval_1d(x);
                    let (ld2, s2, _) = at.model2().eval_1d(x);
                    crate::correctors::interp_eval_1d(&self.interp, s1, s2, ld2 - ld1, at.sigma).1
                })
                .collect(),
        )
    }
}

/// The interpolated target of the model pair at time t, rendered on a grid:
/// the density the sampler's weighted ensemble approximates at that time.
/// Serves as the solver's initial condition and as a terminal reference.
pub fn interp_target_on_grid(
    fields: &FieldSet,
    interp: &InterpolationSpec,
    t: f64,
    spec: &GridSpec,
) -> Result<GridDensity> {
    let at = fields.at(t);
    let g1 = GridDensity::from_model(at.model1(), spec.lo, spec.hi, spec.n_cells)?;
    let g2 = GridDensity::from_model(at.model2(), spec.lo, spec.hi, spec.n_cells)?;
    let kind = match interp.kind {
        InterpolationKind::Geometric => GeodesicKind::Exponential,
        InterpolationKind::Mixture => GeodesicKind::Mixture,
        InterpolationKind::FisherRao => GeodesicKind::FisherRao,
    };
    grid_geodesic(&g1, &g2, interp.beta, kind)
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Fraction of the CFL limit actually used.
    pub cfl_safety: f64,
    /// Hard cap on sub-steps per schedule step.
    pub max_substeps: usize,
    /// Densities at the first/last cell above this are a width violation.
    pub boundary_tol: f64,
    /// Allowed conservative-stage mass drift per schedule step.
    pub mass_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cfl_safety: 0.8,
            max_substeps: 400_000,
            boundary_tol: 1e-10,
            mass_tol: 1e-6,
        }
    }
}

/// Integrate the PDE along `sched`, returning the density at every schedule
/// grid point (n_steps + 1 snapshots, the initial condition included).
pub fn fk_pde_solve(
    p0: &GridDensity,
    fields: &impl PdeFields,
    sched: &TimeSchedule,
    opts: &SolverOptions,
) -> Result<Vec<(f64, GridDensity)>> {
    let n = p0.n_cells();
    let dx = p0.dx();
    let centers = p0.centers();
    let faces = p0.edges();
    let mut u = p0.values.clone();
    let mut out = Vec::with_capacity(sched.n_steps + 1);
    out.push((sched.time_at(0), p0.clone()));

    check_boundary(&u, opts, sched.time_at(0))?;

    for k in 0..sched.n_steps {
        let t_from = sched.time_at(k);
        let t_to = sched.time_at(k + 1);
        let h_macro = (t_to - t_from).abs();
        let sgn = (t_to - t_from).signum();

        // CFL from the step's starting coefficients, with a safety margin
        // absorbing their variation across the step.
        let v_faces = fields.velocity_profile(t_from, &faces);
        let vmax = v_faces.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sig = fields.sigma(t_from);
        let mut h_cfl = f64::INFINITY;
        if vmax > 0.0 {
            h_cfl = h_cfl.min(dx / vmax);
        }
        if sig > 0.0 {
            h_cfl = h_cfl.min(dx * dx / (sig * sig));
        }
        let n_sub = if h_cfl.is_finite() {
            ((h_macro / (opts.cfl_safety * h_cfl)).ceil() as usize).max(1)
        } else {
            1
        };
        if n_sub > opts.max_substeps {
            return Err(Error::StepSize(format!(
                "CFL requires {n_sub} sub-steps per step at t = {t_from}; widen cells or loosen the schedule"
            )));
        }
        let h = h_macro / n_sub as f64;

        for j in 0..n_sub {
            let t = t_from + sgn * h * j as f64;
            let v = fields.velocity_profile(t, &faces);
            let sig = fields.sigma(t);
            let mass_before: f64 = u.iter().sum::<f64>() * dx;

            // (i) upwind advection in flux form, zero ghost cells.
            let mut flux = vec![0.0; n + 1];
            for i in 0..=n {
                let vl = v[i];
                let up = if vl > 0.0 {
                    if i == 0 {
                        0.0
                    } else {
                        u[i - 1]
                    }
                } else if i == n {
                    0.0
                } else {
                    u[i]
                };
                flux[i] = vl * up;
            }
            let mut next = vec![0.0; n];
            for i in 0..n {
                next[i] = u[i] - h / dx * (flux[i + 1] - flux[i]);
            }

            // (ii) centered diffusion.
            if sig > 0.0 {
                let c = 0.5 * sig * sig * h / (dx * dx);
                let prev = next.clone();
                for i in 0..n {
                    let l = if i == 0 { 0.0 } else { prev[i - 1] };
                    let r = if i == n - 1 { 0.0 } else { prev[i + 1] };
                    next[i] = prev[i] + c * (l - 2.0 * prev[i] + r);
                }
            }

            for (i, v) in next.iter_mut().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NumericalFailure(format!(
                        "non-finite density at cell {i}, t = {t}"
                    )));
                }
                if *v < 0.0 {
                    // Upwind + CFL keep this at rounding level.
                    *v = 0.0;
                }
            }

            let mass_mid: f64 = next.iter().sum::<f64>() * dx;
            if (mass_mid - mass_before).abs() > opts.mass_tol {
                return Err(Error::NumericalFailure(format!(
                    "conservative stage drifted mass by {:.3e} at t = {t}",
                    mass_mid - mass_before
                )));
            }

            // (iii) reaction: multiply by exp(h (psi - mean)) and renormalize.
            if let Some(rates) = fields.rate_profile(t, &centers) {
                let mass: f64 = next.iter().sum::<f64>() * dx;
                let mean: f64 =
                    next.iter().zip(&rates).map(|(ui, ri)| ui * ri).sum::<f64>() * dx / mass;
                for (ui, ri) in next.iter_mut().zip(&rates) {
                    *ui *= (h * (ri - mean)).exp();
                }
                let mass: f64 = next.iter().sum::<f64>() * dx;
                if !(mass > 0.0) || !mass.is_finite() {
                    return Err(Error::NumericalFailure(
                        "reaction stage destroyed all mass".into(),
                    ));
                }
                for ui in &mut next {
                    *ui /= mass;
                }
            }

            u = next;
        }

        check_boundary(&u, opts, t_to)?;
        out.push((t_to, GridDensity::new(p0.lo, p0.hi, u.clone())?));
    }
    Ok(out)
}

fn check_boundary(u: &[f64], opts: &SolverOptions, t: f64) -> Result<()> {
    let edge = u[0].max(*u.last().unwrap());
    if edge > opts.boundary_tol {
        return Err(Error::NumericalFailure(format!(
            "boundary density {edge:.3e} at t = {t}; grid too narrow"
        )));
    }
    Ok(())
}

/// Both sides of the chi-square dissipation identity for a frozen potential g
/// on the Langevin flow with invariant density `pi` and diffusion `sigma`:
///
///   (1/2) d/dt Var_pi(rho) = -(sigma^2/2) int |rho'|^2 dpi
///                            + int rho (rho - 1) g dpi
///                            - E_{rho pi}[g] Var_pi(rho).
///
/// The left side is finite-differenced across two solver steps of size `dt`;
/// the right side is evaluated on the middle snapshot. Returns |LHS - RHS|.
pub fn chi2_dissipation_residual(
    rho: &GridDensity,
    g: impl Fn(f64) -> f64 + Copy,
    pi: &GridDensity,
    sigma: f64,
    dt: f64,
) -> Result<f64> {
    if !rho.same_grid(pi) {
        return Err(Error::invalid("rho and pi must share a grid"));
    }
    if !rho.is_strictly_positive() {
        return Err(Error::invalid("rho must be strictly positive"));
    }
    let n = pi.n_cells();
    let dx = pi.dx();
    let centers = pi.centers();

    // Drift -(sigma^2/2) V' = (sigma^2/2) (log pi)', sampled at faces from the
    // centered difference of log pi (second order at the face midpoint).
    let log_pi: Vec<f64> = pi.values.iter().map(|v| v.max(1e-300).ln()).collect();
    let mut face_drift = vec![0.0; n + 1];
    for i in 1..n {
        face_drift[i] = 0.5 * sigma * sigma * (log_pi[i] - log_pi[i - 1]) / dx;
    }
    // One-sided copies at the outermost faces; the density there is ~0.
    face_drift[0] = face_drift[1];
    face_drift[n] = face_drift[n - 1];
    let faces = pi.edges();
    let drift_at = move |x: f64| {
        let j = (((x - pi.lo) / dx).round() as isize).clamp(0, n as isize) as usize;
        debug_assert!((faces[j] - x).abs() < 1e-9);
        face_drift[j]
    };

    let mut p0 = GridDensity::new(
        rho.lo,
        rho.hi,
        rho.values
            .iter()
            .zip(&pi.values)
            .map(|(r, q)| r * q)
            .collect(),
    )?;
    p0.normalize();

    let fields = ClosureFields {
        velocity: move |_t: f64, x: f64| drift_at(x),
        sigma: move |_t: f64| sigma,
        rate: Some(move |_t: f64, x: f64| g(x)),
    };
    let sched = TimeSchedule::new(0.0, 2.0 * dt, 2)?;
    let traj = fk_pde_solve(&p0, &fields, &sched, &SolverOptions::default())?;

    let rho_of = |p: &GridDensity| -> Vec<f64> {
        p.values
            .iter()
            .zip(&pi.values)
            .map(|(pv, qv)| pv / qv.max(1e-300))
            .collect()
    };
    let var_of = |r: &[f64]| -> f64 {
        r.iter()
            .zip(&pi.values)
            .map(|(ri, qi)| (ri - 1.0) * (ri - 1.0) * qi)
            .sum::<f64>()
            * dx
    };

    let r0 = rho_of(&traj[0].1);
    let r1 = rho_of(&traj[1].1);
    let r2 = rho_of(&traj[2].1);
    let lhs = 0.5 * (var_of(&r2) - var_of(&r0)) / (2.0 * dt);

    // RHS on the middle snapshot.
    let mut dissipation = 0.0;
    for i in 1..n - 1 {
        let grad = (r1[i + 1] - r1[i - 1]) / (2.0 * dx);
        dissipation += grad * grad * pi.values[i] * dx;
    }
    let gs: Vec<f64> = centers.iter().map(|&x| g(x)).collect();
    let mut coupling = 0.0;
    let mut mean_g = 0.0;
    for i in 0..n {
        coupling += r1[i] * (r1[i] - 1.0) * gs[i] * pi.values[i] * dx;
        mean_g += gs[i] * r1[i] * pi.values[i] * dx;
    }
    let rhs = -0.5 * sigma * sigma * dissipation + coupling - mean_g * var_of(&r1);
    Ok((lhs - rhs).abs())
}

/// Closed-form OU semigroup action P_t f = coeff * f + offset for f(x) = x or
/// f(x) = x^2 under dX = -alpha X dt + sqrt(2) dW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupMap {
    pub coeff: f64,
    pub offset: f64,
}

impl SemigroupMap {
    pub fn apply(&self, fx: f64) -> f64 {
        self.coeff * fx + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableKind {
    Linear,
    Quadratic,
}

pub fn ou_semigroup(f_kind: ObservableKind, alpha: f64, t: f64) -> SemigroupMap {
    match f_kind {
        ObservableKind::Linear => SemigroupMap {
            coeff: (-alpha * t).exp(),
            offset: 0.0,
        },
        ObservableKind::Quadratic => SemigroupMap {
            coeff: (-2.0 * alpha * t).exp(),
            offset: (1.0 - (-2.0 * alpha * t).exp()) / alpha,
        },
    }
}

/// Discretized Langevin generator L f = f'' + drift f' on a uniform grid,
/// with centered differences. Only interior cells (margin >= 1 per
/// application) are meaningful; boundary cells use constant extrapolation.
#[derive(Debug, Clone)]
pub struct DiscreteGenerator {
    pub lo: f64,
    pub hi: f64,
    pub drift: Vec<f64>,
}

impl DiscreteGenerator {
    /// OU generator with rate alpha: L f = f'' - alpha x f'.
    pub fn ou(alpha: f64, lo: f64, hi: f64, n: usize) -> Self {
        let dx = (hi - lo) / n as f64;
        let drift = (0..n)
            .map(|i| -alpha * (lo + (i as f64 + 0.5) * dx))
            .collect();
        Self { lo, hi, drift }
    }

    pub fn n_cells(&self) -> usize {
        self.drift.len()
    }

    pub fn dx(&self) -> f64 {
        (self.hi - self.lo) / self.drift.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.drift.len())
            .map(|i| self.lo + (i as f64 + 0.5) * dx)
            .collect()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        assert_eq!(n, self.drift.len());
        let dx = self.dx();
        (0..n)
            .map(|i| {
                let l = f[if i == 0 { 0 } else { i - 1 }];
                let r = f[if i == n - 1 { n - 1 } else { i + 1 }];
                let lap = (l - 2.0 * f[i] + r) / (dx * dx);
                let grad = (r - l) / (2.0 * dx);
                lap + self.drift[i] * grad
            })
            .collect()
    }
}

/// Carre du champ: Gamma(f, g) = (L(fg) - f Lg - g Lf) / 2 pointwise.
pub fn gamma_operator(f: &[f64], g: &[f64], gen: &DiscreteGenerator) -> Vec<f64> {
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    let lfg = gen.apply(&fg);
    let lf = gen.apply(f);
    let lg = gen.apply(g);
    (0..f.len())
        .map(|i| 0.5 * (lfg[i] - f[i] * lg[i] - g[i] * lf[i]))
        .collect()
}

/// Iterated carre du champ: Gamma2(f) = (L Gamma(f) - 2 Gamma(f, Lf)) / 2.
pub fn gamma2_operator(f: &[f64], gen: &DiscreteGenerator) -> Vec<f64> {
    let gf = gamma_operator(f, f, gen);
    let lgf = gen.apply(&gf);
    let lf = gen.apply(f);
    let cross = gamma_operator(f, &lf, gen);
    (0..f.len())
        .map(|i| 0.5 * lgf[i] - cross[i])
        .collect()
}
