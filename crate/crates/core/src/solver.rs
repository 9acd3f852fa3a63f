//! Time integration of the simplified Ericksen–Leslie system
//!
//! ```text
//! ∂ₜu + (u·∇)u + ∇P = νΔu − λ∇·(∇d⊙∇d),   ∇·u = 0,
//! ∂ₜd + (u·∇)d      = γ(Δd + |∇d|²d),      |d| = 1,
//! ```
//!
//! with an integrating-factor Heun scheme. The diffusion is propagated
//! exactly mode by mode; pressure is removed by Leray projection.

use num_complex::Complex64;

use crate::diagnostics::{DiagnosticsRecord, Monitor};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::norms::magnitude;
use crate::spectral::{
    dealias, derivative, divergence, leray_project, Grid, SpectralField, VectorField,
};

/// Velocity magnitude treated as blow-up.
pub const BLOWUP_SPEED: f64 = 1e8;

/// Director magnitude below which renormalization refuses to proceed.
pub const MIN_DIRECTOR_NORM: f64 = 0.5;

/// The pair `(u, d)` at time `t`.
#[derive(Clone, Debug)]
pub struct State {
    pub t: f64,
    pub u: VectorField,
    pub d: VectorField,
}

impl State {
    pub fn new(t: f64, u: VectorField, d: VectorField) -> Result<Self> {
        let grid = u.grid();
        if d.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if u.len() != grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "velocity needs {} components, got {}",
                grid.dim(),
                u.len()
            )));
        }
        if d.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "director needs 3 components, got {}",
                d.len()
            )));
        }
        Ok(State { t, u, d })
    }

    pub fn zeros(grid: &Grid) -> Self {
        State {
            t: 0.0,
            u: VectorField::zeros(grid, grid.dim()),
            d: VectorField::zeros(grid, 3),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.is_finite() && self.d.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub renormalize_every: u64,
    pub nu: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            t_end: 1.0,
            dealias: true,
            renormalize_every: 1,
            nu: 1.0,
            lambda: 1.0,
            gamma: 1.0,
        }
    }
}

/// Identifier written into checkpoints.
pub const SCHEME_TAG: &str = "IF-RK2";

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be >= 0, got {}",
                self.t_end
            )));
        }
        if self.renormalize_every == 0 {
            return Err(Error::InvalidArgument(
                "renormalize_every must be >= 1".into(),
            ));
        }
        for (name, v) in [
            ("nu", self.nu),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_end`.
    pub fn total_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

fn samples(fields: &[&SpectralField]) -> Result<Vec<Vec<f64>>> {
    par::map(fields, |f| f.to_samples()).into_iter().collect()
}

fn transform(grid: &Grid, data: &[Vec<f64>], cfg_dealias: bool) -> Result<Vec<SpectralField>> {
    par::map(data, |s| {
        let f = SpectralField::from_samples(grid, s)?;
        Ok(if cfg_dealias { dealias(&f) } else { f })
    })
    .into_iter()
    .collect()
}

/// `∂_j d_a` indexed as `[j * 3 + a]`.
fn director_gradient(d: &VectorField) -> Vec<SpectralField> {
    let dim = d.grid().dim();
    par::map_range(dim * 3, |ja| {
        derivative(d.component(ja % 3), ja / 3, 1).expect("axis < dim")
    })
}

fn pointwise_sum<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    let mut out = vec![0.0; len];
    par::for_each_indexed_mut(&mut out, |i, x| *x = f(i));
    out
}

/// Products `σ_ij = ∂_i d·∂_j d` for `i <= j`, indexed `[i * dim + j]`.
fn elastic_tensor(grad: &[Vec<f64>], dim: usize, len: usize) -> Vec<Option<Vec<f64>>> {
    (0..dim * dim)
        .map(|ij| {
            let (i, j) = (ij / dim, ij % dim);
            (i <= j).then(|| {
                pointwise_sum(len, |p| {
                    (0..3)
                        .map(|a| grad[i * 3 + a][p] * grad[j * 3 + a][p])
                        .sum()
                })
            })
        })
        .collect()
}

fn stress_from_tensor(sigma: &[SpectralField], dim: usize, grid: &Grid) -> Result<VectorField> {
    let at = |i: usize, j: usize| &sigma[i.min(j) * dim + i.max(j)];
    let comps = par::map_range(dim, |j| {
        let mut acc = SpectralField::zeros(grid);
        for i in 0..dim {
            acc = acc.add(&derivative(at(i, j), i, 1)?)?;
        }
        Ok(acc)
    });
    VectorField::new(comps.into_iter().collect::<Result<Vec<_>>>()?)
}

fn dense_tensor(
    grid: &Grid,
    raw: Vec<Option<Vec<f64>>>,
    filter: bool,
) -> Result<Vec<SpectralField>> {
    let fields = par::map(&raw, |s| match s {
        Some(s) => {
            let f = SpectralField::from_samples(grid, s)?;
            Ok(if filter { dealias(&f) } else { f })
        }
        None => Ok(SpectralField::zeros(grid)),
    });
    fields.into_iter().collect()
}

/// `∇·(∇d⊙∇d)` formed as `∂_i(∂_i d·∂_j d)`; the products are dealiased when
/// `filter` is set.
pub fn stress_divergence(d: &VectorField, filter: bool) -> Result<VectorField> {
    check_director(d)?;
    let grid = d.grid().clone();
    let dim = grid.dim();
    let grad = director_gradient(d);
    let g = samples(&grad.iter().collect::<Vec<_>>())?;
    let sigma = dense_tensor(&grid, elastic_tensor(&g, dim, grid.len()), filter)?;
    stress_from_tensor(&sigma, dim, &grid)
}

/// The same quantity through `Δd·∇d + ½∇|∇d|²`.
pub fn stress_divergence_split(d: &VectorField, filter: bool) -> Result<VectorField> {
    check_director(d)?;
    let grid = d.grid().clone();
    let dim = grid.dim();
    let len = grid.len();
    let grad = director_gradient(d);
    let lap: Vec<SpectralField> = par::map(d.components(), crate::spectral::laplacian);
    let mut refs: Vec<&SpectralField> = grad.iter().collect();
    refs.extend(lap.iter());
    let s = samples(&refs)?;
    let (g, l) = s.split_at(dim * 3);
    let energy = pointwise_sum(len, |p| g.iter().map(|c| c[p] * c[p]).sum());
    let mut raw: Vec<Vec<f64>> = (0..dim)
        .map(|j| pointwise_sum(len, |p| (0..3).map(|a| l[a][p] * g[j * 3 + a][p]).sum()))
        .collect();
    raw.push(energy);
    let mut fields = transform(&grid, &raw, filter)?;
    let energy = fields.pop().expect("pushed above");
    let comps = fields
        .into_iter()
        .enumerate()
        .map(|(j, f)| f.axpy(0.5, &derivative(&energy, j, 1)?))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

fn check_director(d: &VectorField) -> Result<()> {
    if d.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "director needs 3 components, got {}",
            d.len()
        )));
    }
    Ok(())
}

/// Non-stiff right-hand sides `(N_u, N_d)`:
/// `N_u = P[−(u·∇)u − λ∇·(∇d⊙∇d)]`, `N_d = −(u·∇)d + γ|∇d|²d`.
pub fn nonlinear_terms(
    u: &VectorField,
    d: &VectorField,
    cfg: &SolverConfig,
) -> Result<(VectorField, VectorField)> {
    check_director(d)?;
    let grid = u.grid().clone();
    if d.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let dim = grid.dim();
    let len = grid.len();
    let filter = cfg.dealias;

    // ∂_j u_i at [j * dim + i], then ∂_j d_a.
    let grad_u = par::map_range(dim * dim, |ji| {
        derivative(u.component(ji % dim), ji / dim, 1).expect("axis < dim")
    });
    let grad_d = director_gradient(d);
    let mut refs: Vec<&SpectralField> = u.components().iter().collect();
    refs.extend(d.components());
    refs.extend(grad_u.iter());
    refs.extend(grad_d.iter());
    let s = samples(&refs)?;
    let (us, rest) = s.split_at(dim);
    let (ds, rest) = rest.split_at(3);
    let (gu, gd) = rest.split_at(dim * dim);

    let mut raw: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            pointwise_sum(len, |p| {
                -(0..dim).map(|j| us[j][p] * gu[j * dim + i][p]).sum::<f64>()
            })
        })
        .collect();
    raw.push(pointwise_sum(len, |p| gd.iter().map(|c| c[p] * c[p]).sum()));
    let mut fields = transform(&grid, &raw, filter)?;
    let grad_sq = fields.pop().expect("pushed above");
    let advection = fields;

    let sigma = dense_tensor(&grid, elastic_tensor(gd, dim, len), filter)?;
    let stress = stress_from_tensor(&sigma, dim, &grid)?;
    let forcing = advection
        .into_iter()
        .zip(stress.components())
        .map(|(a, s)| a.axpy(-cfg.lambda, s))
        .collect::<Result<Vec<_>>>()?;
    let nu = leray_project(&VectorField::new(forcing)?)?;

    let gs = grad_sq.to_samples()?;
    let gamma = cfg.gamma;
    let raw_d: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            pointwise_sum(len, |p| {
                let transport: f64 = (0..dim).map(|j| us[j][p] * gd[j * 3 + a][p]).sum();
                gamma * gs[p] * ds[a][p] - transport
            })
        })
        .collect();
    let nd = VectorField::new(transform(&grid, &raw_d, filter)?)?;
    Ok((nu, nd))
}

/// `−(u·∇)d + γ|∇d|²d`; the `γΔd` part is left to the integrating factor.
pub fn director_rhs(u: &VectorField, d: &VectorField, cfg: &SolverConfig) -> Result<VectorField> {
    Ok(nonlinear_terms(u, d, cfg)?.1)
}

/// `P[−(u·∇)u − λ∇·(∇d⊙∇d)]`; the `νΔu` part is left to the integrating factor.
pub fn velocity_rhs(u: &VectorField, d: &VectorField, cfg: &SolverConfig) -> Result<VectorField> {
    Ok(nonlinear_terms(u, d, cfg)?.0)
}

/// Pointwise `d/|d|`, transformed back and dealiased when `filter` is set.
pub fn renormalize_director(d: &VectorField, filter: bool) -> Result<VectorField> {
    check_director(d)?;
    let grid = d.grid().clone();
    let mut s = d.to_samples()?;
    let mag = magnitude(&s);
    let min = mag.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    if !(min > MIN_DIRECTOR_NORM) {
        return Err(Error::ConstraintLoss { min_norm: min });
    }
    for comp in s.iter_mut() {
        par::for_each_indexed_mut(comp, |p, x| *x /= mag[p]);
    }
    VectorField::new(transform(&grid, &s, filter)?)
}

/// Largest `|k·û(k)|` over the lattice.
pub fn max_divergence(u: &VectorField) -> Result<f64> {
    Ok(divergence(u)?.max_coeff())
}

/// Largest `||d(x)| − 1|` over grid points.
pub fn sphere_defect(d: &VectorField) -> Result<f64> {
    let mag = magnitude(&d.to_samples()?);
    Ok(mag.iter().fold(0.0, |m: f64, &x| m.max((x - 1.0).abs())))
}

/// Largest admissible step: `0.5 / ((N/3)² · speed)` with
/// `speed = max(‖u‖_∞, ‖∇d‖_∞)`; infinite for a motionless, uniform state.
pub fn stability_bound(state: &State) -> Result<f64> {
    let grid = state.grid();
    let u = magnitude(&state.u.to_samples()?);
    let grad = director_gradient(&state.d);
    let g = magnitude(&samples(&grad.iter().collect::<Vec<_>>())?);
    let speed = u.iter().chain(&g).fold(0.0f64, |m, &x| m.max(x));
    if speed == 0.0 {
        return Ok(f64::INFINITY);
    }
    let k = grid.n() as f64 / 3.0;
    Ok(0.5 / (k * k * speed))
}

/// Exact diffusion propagators for one step size.
pub struct Stepper {
    cfg: SolverConfig,
    decay_u: Vec<f64>,
    decay_d: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &Grid, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let k2 = grid.k2();
        let prop = |c: f64| k2.iter().map(|&q| (-c * q * cfg.dt).exp()).collect();
        Ok(Stepper {
            cfg: cfg.clone(),
            decay_u: prop(cfg.nu),
            decay_d: prop(cfg.gamma),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// `E·(x + h·y)` component-wise.
    fn propagate(decay: &[f64], x: &VectorField, h: f64, y: &VectorField) -> Result<VectorField> {
        let comps = x
            .components()
            .iter()
            .zip(y.components())
            .map(|(xc, yc)| {
                let mut out = xc.clone();
                let yv = yc.coeffs();
                par::for_each_indexed_mut(out.coeffs_mut(), |i, c| {
                    *c = decay[i] * (*c + h * yv[i])
                });
                out
            })
            .collect();
        VectorField::new(comps)
    }

    /// `E·x + h/2·(E·a + b)` component-wise.
    fn combine(
        decay: &[f64],
        x: &VectorField,
        h: f64,
        a: &VectorField,
        b: &VectorField,
    ) -> Result<VectorField> {
        let comps = (0..x.len())
            .map(|c| {
                let mut out = x.component(c).clone();
                let (av, bv) = (a.component(c).coeffs(), b.component(c).coeffs());
                par::for_each_indexed_mut(out.coeffs_mut(), |i, z: &mut Complex64| {
                    *z = decay[i] * *z + 0.5 * h * (decay[i] * av[i] + bv[i]);
                });
                out
            })
            .collect();
        VectorField::new(comps)
    }

    /// Advances by one step. `index` is the number of the step being taken
    /// (starting at 1) and decides whether the director is renormalized.
    pub fn advance(&self, state: &State, index: u64) -> Result<State> {
        let cfg = &self.cfg;
        let h = cfg.dt;
        let t = state.t + h;
        let (au, ad) = nonlinear_terms(&state.u, &state.d, cfg)?;
        let u1 = Self::propagate(&self.decay_u, &state.u, h, &au)?;
        let d1 = Self::propagate(&self.decay_d, &state.d, h, &ad)?;
        if !(u1.is_finite() && d1.is_finite()) {
            return Err(blowup(t, "non-finite coefficient in predictor"));
        }
        let (bu, bd) = nonlinear_terms(&u1, &d1, cfg)?;
        let mut u = Self::combine(&self.decay_u, &state.u, h, &au, &bu)?;
        let mut d = Self::combine(&self.decay_d, &state.d, h, &ad, &bd)?;
        if !(u.is_finite() && d.is_finite()) {
            return Err(blowup(t, "non-finite coefficient"));
        }
        if index.is_multiple_of(cfg.renormalize_every) {
            d = renormalize_director(&d, cfg.dealias)?;
            u = leray_project(&u)?;
        }
        let speed = magnitude(&u.to_samples()?)
            .into_iter()
            .fold(0.0f64, f64::max);
        if speed > BLOWUP_SPEED {
            return Err(blowup(
                t,
                &format!("‖u‖_∞ = {speed:e} exceeds {BLOWUP_SPEED:e}"),
            ));
        }
        Ok(State { t, u, d })
    }
}

fn blowup(t: f64, reason: &str) -> Error {
    Error::BlowUp {
        t,
        reason: reason.to_string(),
    }
}

/// One integrating-factor Heun step including renormalization.
pub fn step(state: &State, cfg: &SolverConfig) -> Result<State> {
    Stepper::new(state.grid(), cfg)?.advance(state, 1)
}

/// Receives the products of a run as they are produced.
pub trait RunHooks {
    fn on_record(&mut self, record: &DiagnosticsRecord) -> Result<()>;

    /// Called after every accepted step with the completed step count.
    fn on_step(&mut self, _step: u64, _state: &State, _monitor: &Monitor) -> Result<()> {
        Ok(())
    }
}

/// Collects records in memory.
impl RunHooks for Vec<DiagnosticsRecord> {
    fn on_record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

/// Where a run starts and how often it reports.
#[derive(Clone, Debug)]
pub struct RunPlan {
    /// Steps already taken (nonzero when resuming).
    pub start_step: u64,
    /// Emit a record every `cadence` steps.
    pub cadence: u64,
}

impl Default for RunPlan {
    fn default() -> Self {
        RunPlan {
            start_step: 0,
            cadence: 1,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub state: State,
    pub steps: u64,
    /// The error that terminated the run early, if any.
    pub terminated: Option<Error>,
}

impl RunOutcome {
    pub fn blew_up(&self) -> bool {
        self.terminated.is_some()
    }
}

/// Steps from `init` to `cfg.t_end`, feeding `monitor` every step and
/// emitting records at the plan's cadence plus a final one. Blow-up and loss
/// of the sphere constraint end the run with a flagged record instead of an
/// error.
pub fn run(
    init: State,
    cfg: &SolverConfig,
    plan: &RunPlan,
    monitor: &mut Monitor,
    hooks: &mut dyn RunHooks,
) -> Result<RunOutcome> {
    cfg.validate()?;
    if plan.cadence == 0 {
        return Err(Error::InvalidArgument("cadence must be >= 1".into()));
    }
    let bound = stability_bound(&init)?;
    if cfg.dt > bound {
        return Err(Error::InvalidArgument(format!(
            "dt = {} exceeds the stability bound {bound:e}",
            cfg.dt
        )));
    }
    let stepper = Stepper::new(init.grid(), cfg)?;
    let total = cfg.total_steps();
    let mut state = init;
    let mut step = plan.start_step;
    state.t = step as f64 * cfg.dt;
    if step == 0 {
        monitor.start(&state)?;
        hooks.on_record(&monitor.record(&state)?)?;
    }
    while step < total {
        let index = step + 1;
        let next = stepper.advance(&state, index).and_then(|mut s| {
            s.t = index as f64 * cfg.dt;
            monitor.accumulate(&s, cfg.dt)?;
            Ok(s)
        });
        match next {
            Ok(s) => {
                state = s;
                step = index;
                if step.is_multiple_of(plan.cadence) || step == total {
                    hooks.on_record(&monitor.record(&state)?)?;
                }
                hooks.on_step(step, &state, monitor)?;
            }
            Err(e @ (Error::BlowUp { .. } | Error::ConstraintLoss { .. })) => {
                let t = index as f64 * cfg.dt;
                hooks.on_record(&monitor.blowup_record(t))?;
                return Ok(RunOutcome {
                    state,
                    steps: step,
                    terminated: Some(e),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RunOutcome {
        state,
        steps: step,
        terminated: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::AccumulatorSet;
    use crate::initial_data::{constant_director, equatorial_director, taylor_green};
    use crate::spectral::lp_norm_vector;

    fn grid(n: usize) -> Grid {
        Grid::new(2, n).unwrap()
    }

    fn theta_director(g: &Grid, theta: impl Fn([f64; 3]) -> f64 + Send + Sync) -> VectorField {
        equatorial_director(g, &SpectralField::from_fn(g, theta)).unwrap()
    }

    fn max_diff(a: &VectorField, b: &VectorField) -> f64 {
        lp_norm_vector(&a.sub(b).unwrap(), f64::INFINITY).unwrap()
    }

    fn fields(g: &Grid, fs: [&(dyn Fn([f64; 3]) -> f64 + Sync); 3]) -> VectorField {
        VectorField::new(fs.iter().map(|f| SpectralField::from_fn(g, f)).collect()).unwrap()
    }

    #[test]
    fn stress_of_constant_director_vanishes() {
        let g = grid(16);
        let d = constant_director(&g, [0.0, 0.6, 0.8]).unwrap();
        let s = stress_divergence(&d, true).unwrap();
        assert!(s.components().iter().all(|c| c.max_coeff() == 0.0));
    }

    #[test]
    fn stress_routes_agree() {
        let g = grid(32);
        let d = theta_director(&g, |x| x[0].sin());
        let a = stress_divergence(&d, true).unwrap();
        let b = stress_divergence_split(&d, true).unwrap();
        assert!(max_diff(&a, &b) < 1e-10, "{}", max_diff(&a, &b));
        // θ depends on x₁ only: the stress points along the first axis.
        assert!(a.component(1).max_coeff() < 1e-14);
        assert!(a.component(0).max_coeff() > 1e-2);
    }

    #[test]
    fn director_rhs_on_equatorial_field() {
        let g = grid(32);
        let d = theta_director(&g, |x| 0.1 * x[0].sin());
        let cfg = SolverConfig::default();
        let u = VectorField::zeros(&g, 2);
        let nd = director_rhs(&u, &d, &cfg).unwrap();
        let full = nd.add(&d.map(crate::spectral::laplacian)).unwrap();
        let lap = |x: [f64; 3]| -0.1 * x[0].sin();
        let th = |x: [f64; 3]| 0.1 * x[0].sin();
        let expect = fields(
            &g,
            [
                &|x| -lap(x) * th(x).sin(),
                &|x| lap(x) * th(x).cos(),
                &|_| 0.0,
            ],
        );
        assert!(
            max_diff(&full, &expect) < 1e-10,
            "{}",
            max_diff(&full, &expect)
        );
        assert!(
            director_rhs(&u, &constant_director(&g, [1.0, 0.0, 0.0]).unwrap(), &cfg)
                .unwrap()
                .is_finite()
        );
    }

    #[test]
    fn director_rhs_with_uniform_flow() {
        let g = grid(32);
        let th = |x: [f64; 3]| 0.3 * (x[0] + x[1]).sin();
        let dth = |x: [f64; 3]| 0.3 * (x[0] + x[1]).cos();
        let d = theta_director(&g, th);
        let u = VectorField::new(vec![
            SpectralField::from_fn(&g, |_| 1.0),
            SpectralField::zeros(&g),
        ])
        .unwrap();
        let nd = director_rhs(&u, &d, &SolverConfig::default()).unwrap();
        // −∂₁d + |∇θ|² d with ∂₁d = θ₁(−sin θ, cos θ, 0).
        let expect = fields(
            &g,
            [
                &|x| dth(x) * th(x).sin() + 2.0 * dth(x).powi(2) * th(x).cos(),
                &|x| -dth(x) * th(x).cos() + 2.0 * dth(x).powi(2) * th(x).sin(),
                &|_| 0.0,
            ],
        );
        let expect = expect.map(dealias);
        assert!(max_diff(&nd, &expect) < 1e-10, "{}", max_diff(&nd, &expect));
    }

    #[test]
    fn taylor_green_advection_is_a_gradient() {
        let g = grid(32);
        let u = taylor_green(&g, 1.0);
        let d = constant_director(&g, [0.0, 0.0, 1.0]).unwrap();
        let nu = velocity_rhs(&u, &d, &SolverConfig::default()).unwrap();
        assert!(lp_norm_vector(&nu, f64::INFINITY).unwrap() < 1e-10);
        let zero = VectorField::zeros(&g, 2);
        assert!(velocity_rhs(&zero, &d, &SolverConfig::default())
            .unwrap()
            .components()
            .iter()
            .all(|c| c.max_coeff() == 0.0));
    }

    #[test]
    fn quiescent_state_is_fixed() {
        let g = grid(16);
        let s = State::new(
            0.0,
            VectorField::zeros(&g, 2),
            constant_director(&g, [1.0, 0.0, 0.0]).unwrap(),
        )
        .unwrap();
        let next = step(&s, &SolverConfig::default()).unwrap();
        assert!((next.t - 1e-3).abs() < 1e-18);
        assert!(max_diff(&next.u, &s.u) == 0.0);
        assert!(max_diff(&next.d, &s.d) < 1e-15);
        // Without renormalization the all-zero pair is a fixed point too.
        let cfg = SolverConfig {
            renormalize_every: 10,
            ..SolverConfig::default()
        };
        let z = step(&State::zeros(&g), &cfg).unwrap();
        assert!(z.u.is_finite() && z.d.components().iter().all(|c| c.max_coeff() == 0.0));
    }

    #[test]
    fn taylor_green_decays_exactly() {
        let g = grid(32);
        let u0 = taylor_green(&g, 1.0);
        let s = State::new(
            0.0,
            u0.clone(),
            constant_director(&g, [0.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let cfg = SolverConfig {
            t_end: 0.1,
            ..SolverConfig::default()
        };
        let stepper = Stepper::new(&g, &cfg).unwrap();
        let mut st = s;
        for i in 1..=100 {
            st = stepper.advance(&st, i).unwrap();
        }
        let exact = u0.scale((-0.2f64).exp());
        assert!(max_diff(&st.u, &exact) < 1e-10);
    }

    #[test]
    fn renormalization() {
        let g = grid(32);
        let d = theta_director(&g, |x| 0.2 * x[1].cos());
        let same = renormalize_director(&d, true).unwrap();
        assert!(max_diff(&same, &d) < 1e-12);
        let twice = renormalize_director(&d.scale(2.0), true).unwrap();
        assert!(max_diff(&twice, &d) < 1e-12);
        let eps = 1e-3;
        let n = theta_director(&g, |x| x[0].sin() + 0.3);
        let pert = d.axpy(eps, &n).unwrap();
        let back = renormalize_director(&pert, true).unwrap();
        assert!(sphere_defect(&back).unwrap() < 1e-12);
        let dist = max_diff(&back, &pert);
        assert!(dist < 2.0 * eps && dist > 0.0);
        assert!(matches!(
            renormalize_director(&d.scale(0.4), true),
            Err(Error::ConstraintLoss { .. })
        ));
    }

    #[test]
    fn run_rejects_unstable_step_and_handles_empty_horizon() {
        let g = grid(32);
        let s = State::new(
            0.0,
            taylor_green(&g, 1.0),
            constant_director(&g, [0.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let mut mon = Monitor::new(&g, 0.1, AccumulatorSet::default()).unwrap();
        let mut recs: Vec<DiagnosticsRecord> = Vec::new();
        let bad = SolverConfig {
            dt: 0.1,
            ..SolverConfig::default()
        };
        assert!(run(s.clone(), &bad, &RunPlan::default(), &mut mon, &mut recs).is_err());
        assert!(recs.is_empty());
        let none = SolverConfig {
            t_end: 0.0,
            ..SolverConfig::default()
        };
        let out = run(s.clone(), &none, &RunPlan::default(), &mut mon, &mut recs).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(recs.len(), 1);
        assert!(max_diff(&out.state.u, &s.u) == 0.0);
    }
}
