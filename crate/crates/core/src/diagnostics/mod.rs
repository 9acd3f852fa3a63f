//! Monitored quantities, evaluated on immutable state snapshots.

mod audit;

pub use audit::{
    audit_commutator_product, audit_gn_inequalities, corpus, gn_inequalities, padded_product_grid,
    AuditRow, Exponents, GnInequality, GnTerm, ProductAudit,
};

use crate::error::{Error, Result};
use crate::littlewood_paley::{build_cutoff_bank, DyadicCutoffBank};
use crate::par;
use crate::solver::{
    max_divergence, sphere_defect, stress_divergence, stress_divergence_split, State,
};
use crate::spectral::norms::{lp_norm_samples, magnitude, weighted_parseval};
use crate::spectral::{
    curl, dealias, derivative, divergence, laplacian, leray_project, Curl, Grid, SpectralField,
    VectorField,
};

/// Column names of a diagnostics row, in output order.
pub const CSV_COLUMNS: [&str; 15] = [
    "t",
    "energy",
    "dissipation",
    "besov_u",
    "besov_grad_d",
    "grad_u_L2",
    "delta_d_L2",
    "acc_H2",
    "acc_bkm",
    "acc_hw",
    "acc_llw",
    "div_u_max",
    "sphere_defect_max",
    "criterion_ok",
    "blowup_flag",
];

/// One time sample of every monitored quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `‖u‖² + ‖∇d‖²`
    pub energy: f64,
    /// `‖∇u‖² + ‖Δd + |∇d|²d‖²`
    pub dissipation: f64,
    pub besov_u: f64,
    pub besov_grad_d: f64,
    pub grad_u_l2: f64,
    pub delta_d_l2: f64,
    pub acc_h2: f64,
    pub acc_bkm: f64,
    pub acc_hw: f64,
    pub acc_llw: f64,
    pub div_u_max: f64,
    pub sphere_defect_max: f64,
    pub criterion_ok: bool,
    pub blowup_flag: bool,
}

impl DiagnosticsRecord {
    /// The thirteen real columns in output order.
    pub fn reals(&self) -> [f64; 13] {
        [
            self.t,
            self.energy,
            self.dissipation,
            self.besov_u,
            self.besov_grad_d,
            self.grad_u_l2,
            self.delta_d_l2,
            self.acc_h2,
            self.acc_bkm,
            self.acc_hw,
            self.acc_llw,
            self.div_u_max,
            self.sphere_defect_max,
        ]
    }
}

fn vector_sobolev_sq(v: &VectorField, power: i32) -> f64 {
    let g = v.grid().clone();
    v.components()
        .iter()
        .map(|c| {
            weighted_parseval(c, |i| {
                if g.is_nyquist(i) && power > 0 {
                    0.0
                } else {
                    g.k2()[i].powi(power)
                }
            })
        })
        .sum()
}

/// `‖u‖²_{L²} + ‖∇d‖²_{L²}` by Parseval.
pub fn energy(state: &State) -> f64 {
    vector_sobolev_sq(&state.u, 0) + vector_sobolev_sq(&state.d, 1)
}

fn samples_of(fields: &[&SpectralField]) -> Result<Vec<Vec<f64>>> {
    par::map(fields, |f| f.to_samples()).into_iter().collect()
}

/// `∂_j d_a` for all `j < dim`, `a < 3`.
fn director_gradient(d: &VectorField) -> Vec<SpectralField> {
    let dim = d.grid().dim();
    par::map_range(dim * 3, |ja| {
        derivative(d.component(ja % 3), ja / 3, 1).expect("axis < dim")
    })
}

/// Pointwise `|∇d|²` (Frobenius) on the grid.
fn grad_sq_samples(d: &VectorField) -> Result<Vec<f64>> {
    let g = samples_of(&director_gradient(d).iter().collect::<Vec<_>>())?;
    Ok(magnitude(&g).into_iter().map(|m| m * m).collect())
}

/// `‖∇u‖² + ‖Δd + |∇d|²d‖²`; the second term by grid quadrature.
pub fn dissipation(state: &State) -> Result<f64> {
    let grid = state.grid();
    let d = &state.d;
    let lap: Vec<SpectralField> = par::map(d.components(), laplacian);
    let l = samples_of(&lap.iter().collect::<Vec<_>>())?;
    let ds = d.to_samples()?;
    let g2 = grad_sq_samples(d)?;
    let tension: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            (0..grid.len())
                .map(|p| l[a][p] + g2[p] * ds[a][p])
                .collect()
        })
        .collect();
    let t = lp_norm_samples(&magnitude(&tension), grid.cell_volume(), 2.0)?;
    Ok(vector_sobolev_sq(&state.u, 1) + t * t)
}

/// `(‖u‖_{Ḃ^{-1}_{∞,∞}}, ‖∇d‖_{Ḃ^{-1}_{∞,∞}})`, each the max over components.
pub fn criterion_quantities(bank: &DyadicCutoffBank, state: &State) -> Result<(f64, f64)> {
    let max_of = |fields: &[SpectralField]| -> Result<f64> {
        par::map(fields, |f| bank.critical_norm(f))
            .into_iter()
            .try_fold(0.0f64, |m, x| Ok(m.max(x?)))
    };
    let bu = max_of(state.u.components())?;
    let bd = max_of(&director_gradient(&state.d))?;
    Ok((bu, bd))
}

/// Max-norm residuals of the pointwise identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityReport {
    /// `∇·(∇d⊙∇d) − Δd·∇d − ½∇|∇d|²`
    pub stress: f64,
    /// `d·(Δd + |∇d|²d) = Δd·d + |∇d|²|d|²`, which reduces to `Δd·d + |∇d|²`
    /// on unit directors and stays nonzero on rescaled ones.
    pub constraint: f64,
    /// `∇·u`
    pub divergence: f64,
}

/// Evaluates the identity residuals with dealiased products.
pub fn identity_checks(state: &State) -> Result<IdentityReport> {
    let grid = state.grid();
    let direct = stress_divergence(&state.d, true)?;
    let split = stress_divergence_split(&state.d, true)?;
    let diff = direct.sub(&split)?;
    let stress = magnitude(&diff.to_samples()?)
        .into_iter()
        .fold(0.0, f64::max);

    let lap: Vec<SpectralField> = par::map(state.d.components(), laplacian);
    let l = samples_of(&lap.iter().collect::<Vec<_>>())?;
    let ds = state.d.to_samples()?;
    let g2 = grad_sq_samples(&state.d)?;
    let constraint = (0..grid.len())
        .map(|p| {
            let lap_dot_d: f64 = (0..3).map(|a| l[a][p] * ds[a][p]).sum();
            let norm_sq: f64 = (0..3).map(|a| ds[a][p] * ds[a][p]).sum();
            (lap_dot_d + g2[p] * norm_sq).abs()
        })
        .fold(0.0, f64::max);

    let div = divergence(&state.u)?.to_samples()?;
    let divergence = div.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(IdentityReport {
        stress,
        constraint,
        divergence,
    })
}

/// Pressure and the momentum-balance residual it leaves.
#[derive(Clone, Debug)]
pub struct PressureReport {
    pub pressure: SpectralField,
    /// Max-norm of `∂ₜu + (u·∇)u + ∇P − νΔu + λ∇·(∇d⊙∇d)` with `∂ₜu` taken
    /// from the projected right-hand side (the viscous terms cancel).
    pub residual: f64,
}

/// Solves `−ΔP = ∇·((u·∇)u + λ∇·(∇d⊙∇d))` mode by mode (zero mean).
pub fn pressure_recover(state: &State, lambda: f64) -> Result<PressureReport> {
    let grid = state.grid().clone();
    let dim = grid.dim();
    let u = &state.u;
    // (u·∇)u with dealiased products.
    let us = u.to_samples()?;
    let advection = (0..dim)
        .map(|i| {
            let grads = (0..dim)
                .map(|j| derivative(u.component(i), j, 1)?.to_samples())
                .collect::<Result<Vec<_>>>()?;
            let prod: Vec<f64> = (0..grid.len())
                .map(|p| (0..dim).map(|j| us[j][p] * grads[j][p]).sum())
                .collect();
            Ok(dealias(&SpectralField::from_samples(&grid, &prod)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let stress = stress_divergence(&state.d, true)?;
    let forcing = VectorField::new(
        advection
            .iter()
            .zip(stress.components())
            .map(|(a, s)| a.axpy(lambda, s))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let rhs = divergence(&forcing)?;
    let g = grid.clone();
    let pressure = rhs.map_multiplier(move |i| {
        let k2 = g.k2()[i];
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / k2
        }
    });
    // With ∂ₜu = νΔu + P[−F] the balance reduces to P[−F] + F + ∇P.
    let projected = leray_project(&forcing.scale(-1.0))?;
    let mut worst = 0.0f64;
    for i in 0..dim {
        let r = projected
            .component(i)
            .add(forcing.component(i))?
            .add(&derivative(&pressure, i, 1)?)?;
        worst = worst.max(r.to_samples()?.iter().fold(0.0, |m: f64, x| m.max(x.abs())));
    }
    Ok(PressureReport {
        pressure,
        residual: worst,
    })
}

/// Which running integrals a monitor maintains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccumulatorSet {
    pub h2: bool,
    pub bkm: bool,
    pub hw: bool,
    pub llw: bool,
}

impl Default for AccumulatorSet {
    fn default() -> Self {
        AccumulatorSet {
            h2: true,
            bkm: true,
            hw: true,
            llw: true,
        }
    }
}

/// Integrands of the four accumulators at one instant:
/// `‖∇²u‖² + ‖∇Δd‖²`, `‖ω‖_∞`, `‖ω‖_∞ + ‖∇d‖²_∞`, `‖∇d‖⁴_{L⁴}`.
pub fn accumulator_integrands(state: &State, which: AccumulatorSet) -> Result<[f64; 4]> {
    let grid = state.grid();
    let mut out = [0.0; 4];
    if which.h2 {
        out[0] = vector_sobolev_sq(&state.u, 2) + vector_sobolev_sq(&state.d, 3);
    }
    let omega = if which.bkm || which.hw {
        let w = curl(&state.u)?;
        let s = samples_of(&w.components())?;
        let mag = match w {
            Curl::Scalar(_) => s[0].iter().map(|x| x.abs()).collect(),
            Curl::Vector(_) => magnitude(&s),
        };
        mag.into_iter().fold(0.0, f64::max)
    } else {
        0.0
    };
    if which.bkm {
        out[1] = omega;
    }
    if which.hw || which.llw {
        let g2 = grad_sq_samples(&state.d)?;
        if which.hw {
            out[2] = omega + g2.iter().fold(0.0f64, |m, &x| m.max(x));
        }
        if which.llw {
            out[3] = g2.iter().map(|x| x * x).sum::<f64>() * grid.cell_volume();
        }
    }
    Ok(out)
}

/// Serializable monitor state, enough to continue a run bit-for-bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorSnapshot {
    pub accumulators: [f64; 4],
    pub integrands: [f64; 4],
    pub criterion_ok: bool,
    pub sup_besov_u: f64,
    pub sup_besov_grad_d: f64,
}

impl MonitorSnapshot {
    /// Flat little-endian encoding (11 × 8 bytes).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut vals = Vec::with_capacity(11);
        vals.extend(self.accumulators);
        vals.extend(self.integrands);
        vals.push(if self.criterion_ok { 1.0 } else { 0.0 });
        vals.push(self.sup_besov_u);
        vals.push(self.sup_besov_grad_d);
        vals.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub const BYTES: usize = 11 * 8;

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::BYTES {
            return Err(Error::Checkpoint(format!(
                "monitor block has {} bytes, expected {}",
                bytes.len(),
                Self::BYTES
            )));
        }
        let v: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(MonitorSnapshot {
            accumulators: [v[0], v[1], v[2], v[3]],
            integrands: [v[4], v[5], v[6], v[7]],
            criterion_ok: v[8] != 0.0,
            sup_besov_u: v[9],
            sup_besov_grad_d: v[10],
        })
    }
}

/// Running diagnostics: trapezoidal accumulators updated every step, full
/// records on demand, and the criterion conjunction over emitted records.
#[derive(Clone, Debug)]
pub struct Monitor {
    bank: DyadicCutoffBank,
    epsilon0: f64,
    which: AccumulatorSet,
    snap: MonitorSnapshot,
}

impl Monitor {
    pub fn new(grid: &Grid, epsilon0: f64, which: AccumulatorSet) -> Result<Self> {
        if !(epsilon0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon0 must be > 0, got {epsilon0}"
            )));
        }
        Ok(Monitor {
            bank: build_cutoff_bank(grid)?,
            epsilon0,
            which,
            snap: MonitorSnapshot {
                accumulators: [0.0; 4],
                integrands: [0.0; 4],
                criterion_ok: true,
                sup_besov_u: 0.0,
                sup_besov_grad_d: 0.0,
            },
        })
    }

    pub fn bank(&self) -> &DyadicCutoffBank {
        &self.bank
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn snapshot(&self) -> MonitorSnapshot {
        self.snap
    }

    pub fn restore(&mut self, snap: MonitorSnapshot) {
        self.snap = snap;
    }

    /// Largest criterion quantities seen in emitted records.
    pub fn sup_criterion(&self) -> (f64, f64) {
        (self.snap.sup_besov_u, self.snap.sup_besov_grad_d)
    }

    pub fn criterion_ok(&self) -> bool {
        self.snap.criterion_ok
    }

    /// Resets the accumulators and records the initial integrands.
    pub fn start(&mut self, state: &State) -> Result<()> {
        self.snap.accumulators = [0.0; 4];
        self.snap.integrands = accumulator_integrands(state, self.which)?;
        Ok(())
    }

    /// Trapezoidal update over a step of length `dt` ending at `state`.
    pub fn accumulate(&mut self, state: &State, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        let now = accumulator_integrands(state, self.which)?;
        for ((acc, prev), cur) in self
            .snap
            .accumulators
            .iter_mut()
            .zip(&self.snap.integrands)
            .zip(&now)
        {
            *acc += 0.5 * dt * (prev + cur);
        }
        self.snap.integrands = now;
        Ok(())
    }

    /// Full record at `state`; folds it into the criterion conjunction.
    pub fn record(&mut self, state: &State) -> Result<DiagnosticsRecord> {
        let (besov_u, besov_grad_d) = criterion_quantities(&self.bank, state)?;
        let watched = if state.grid().dim() == 3 {
            besov_u.max(besov_grad_d)
        } else {
            besov_grad_d
        };
        let s = &mut self.snap;
        s.criterion_ok &= watched <= self.epsilon0;
        s.sup_besov_u = s.sup_besov_u.max(besov_u);
        s.sup_besov_grad_d = s.sup_besov_grad_d.max(besov_grad_d);
        let [acc_h2, acc_bkm, acc_hw, acc_llw] = s.accumulators;
        Ok(DiagnosticsRecord {
            t: state.t,
            energy: energy(state),
            dissipation: dissipation(state)?,
            besov_u,
            besov_grad_d,
            grad_u_l2: vector_sobolev_sq(&state.u, 1).sqrt(),
            delta_d_l2: vector_sobolev_sq(&state.d, 2).sqrt(),
            acc_h2,
            acc_bkm,
            acc_hw,
            acc_llw,
            div_u_max: max_divergence(&state.u)?,
            sphere_defect_max: sphere_defect(&state.d)?,
            criterion_ok: self.snap.criterion_ok,
            blowup_flag: false,
        })
    }

    /// Terminal record after a failed step: instantaneous fields are NaN.
    pub fn blowup_record(&self, t: f64) -> DiagnosticsRecord {
        let [acc_h2, acc_bkm, acc_hw, acc_llw] = self.snap.accumulators;
        DiagnosticsRecord {
            t,
            energy: f64::NAN,
            dissipation: f64::NAN,
            besov_u: f64::NAN,
            besov_grad_d: f64::NAN,
            grad_u_l2: f64::NAN,
            delta_d_l2: f64::NAN,
            acc_h2,
            acc_bkm,
            acc_hw,
            acc_llw,
            div_u_max: f64::NAN,
            sphere_defect_max: f64::NAN,
            criterion_ok: self.snap.criterion_ok,
            blowup_flag: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::initial_data::{constant_director, equatorial_director, taylor_green};
    use crate::solver::{run, RunPlan, SolverConfig};

    fn grid(n: usize) -> Grid {
        Grid::new(2, n).unwrap()
    }

    fn equatorial(g: &Grid, theta: impl Fn([f64; 3]) -> f64 + Send + Sync) -> VectorField {
        equatorial_director(g, &SpectralField::from_fn(g, theta)).unwrap()
    }

    fn still(g: &Grid) -> VectorField {
        constant_director(g, [0.0, 0.0, 1.0]).unwrap()
    }

    fn max_abs_samples(f: &SpectralField) -> f64 {
        f.to_samples()
            .unwrap()
            .iter()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    #[test]
    fn quiescent_state_has_no_energy() {
        let g = grid(16);
        let s = State::new(0.0, VectorField::zeros(&g, 2), still(&g)).unwrap();
        assert_eq!(energy(&s), 0.0);
        assert_eq!(dissipation(&s).unwrap(), 0.0);
        let bank = build_cutoff_bank(&g).unwrap();
        assert_eq!(criterion_quantities(&bank, &s).unwrap(), (0.0, 0.0));
        let id = identity_checks(&s).unwrap();
        assert_eq!((id.stress, id.constraint, id.divergence), (0.0, 0.0, 0.0));
        let p = pressure_recover(&s, 1.0).unwrap();
        assert_eq!(p.pressure.max_coeff(), 0.0);
    }

    #[test]
    fn sine_mode_energy_and_dissipation() {
        let g = grid(32);
        let a = 0.7;
        for k in [1.0, 3.0] {
            let u = VectorField::new(vec![
                SpectralField::zeros(&g),
                SpectralField::from_fn(&g, |x| a * (k * x[0]).sin()),
            ])
            .unwrap();
            let s = State::new(0.0, u, still(&g)).unwrap();
            let e = a * a * g.volume() / 2.0;
            assert!((energy(&s) - e).abs() < 1e-12 * e);
            assert!((dissipation(&s).unwrap() - k * k * e).abs() < 1e-12 * k * k * e);
        }
    }

    #[test]
    fn equatorial_dissipation_is_laplacian_of_angle() {
        let g = grid(64);
        let s = State::new(
            0.0,
            VectorField::zeros(&g, 2),
            equatorial(&g, |x| 0.1 * x[0].sin()),
        )
        .unwrap();
        // ‖Δθ‖² for θ = 0.1 sin x
        let expect = 0.01 * g.volume() / 2.0;
        assert!((dissipation(&s).unwrap() - expect).abs() < 1e-10 * expect);
        let grad_theta_sq = 0.01 * g.volume() / 2.0;
        assert!((energy(&s) - grad_theta_sq).abs() < 1e-10 * grad_theta_sq);
    }

    #[test]
    fn taylor_green_pressure() {
        let g = grid(32);
        let a = 1.3;
        let s = State::new(0.0, taylor_green(&g, a), still(&g)).unwrap();
        let rep = pressure_recover(&s, 1.0).unwrap();
        let exact = SpectralField::from_fn(&g, |x| {
            0.25 * a * a * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())
        });
        assert!(max_abs_samples(&rep.pressure.sub(&exact).unwrap()) < 1e-12);
        assert!(rep.residual < 1e-6);
    }

    #[test]
    fn pressure_balances_director_stress() {
        let g = grid(32);
        let s = State::new(
            0.0,
            VectorField::zeros(&g, 2),
            equatorial(&g, |x| 0.4 * x[0].sin() * x[1].cos()),
        )
        .unwrap();
        let rep = pressure_recover(&s, 1.0).unwrap();
        assert!(rep.pressure.max_coeff() > 0.0);
        assert!(rep.residual < 1e-6, "{}", rep.residual);
    }

    #[test]
    fn identity_residuals_and_negative_control() {
        let g = grid(32);
        let d = equatorial(&g, |x| 0.3 * x[0].sin() * x[1].cos());
        let s = State::new(0.0, taylor_green(&g, 1.0), d.clone()).unwrap();
        let id = identity_checks(&s).unwrap();
        assert!(id.stress < 1e-10, "{}", id.stress);
        assert!(id.constraint < 1e-6, "{}", id.constraint);
        assert!(id.divergence < 1e-12);

        let doubled = State::new(0.0, taylor_green(&g, 1.0), d.scale(2.0)).unwrap();
        let bad = identity_checks(&doubled).unwrap();
        let grad_sq_max = grad_sq_samples(&d).unwrap().into_iter().fold(0.0, f64::max);
        // d·(Δd + |∇d|²d) = 12|∇d'|² for d = 2d'
        assert!((bad.constraint - 12.0 * grad_sq_max).abs() < 1e-6 * grad_sq_max);
    }

    #[test]
    fn single_mode_criterion_quantity() {
        let g = grid(32);
        let bank = build_cutoff_bank(&g).unwrap();
        let a = 0.5;
        let u = VectorField::new(vec![
            SpectralField::zeros(&g),
            SpectralField::from_fn(&g, |x| a * (4.0 * x[0]).cos()),
        ])
        .unwrap();
        let s = State::new(0.0, u, still(&g)).unwrap();
        let (bu, bd) = criterion_quantities(&bank, &s).unwrap();
        assert!((bu - a / 4.0).abs() < 1e-12, "{bu}");
        assert_eq!(bd, 0.0);
    }

    fn monitored_run(
        u: VectorField,
        d: VectorField,
        t_end: f64,
        which: AccumulatorSet,
    ) -> Vec<DiagnosticsRecord> {
        let g = u.grid().clone();
        let cfg = SolverConfig {
            t_end,
            ..SolverConfig::default()
        };
        let mut monitor = Monitor::new(&g, 0.1, which).unwrap();
        let mut records = Vec::new();
        let plan = RunPlan {
            start_step: 0,
            cadence: 50,
        };
        run(
            State::new(0.0, u, d).unwrap(),
            &cfg,
            &plan,
            &mut monitor,
            &mut records,
        )
        .unwrap();
        records
    }

    #[test]
    fn taylor_green_vorticity_accumulator() {
        let g = grid(32);
        let a = 0.8;
        let recs = monitored_run(
            taylor_green(&g, a),
            still(&g),
            0.5,
            AccumulatorSet::default(),
        );
        for r in &recs {
            let exact = (1.0 - (-2.0 * r.t).exp()) * (2.0 * a) / 2.0;
            assert!(
                (r.acc_bkm - exact).abs() < 1e-4,
                "t {} {} {}",
                r.t,
                r.acc_bkm,
                exact
            );
            assert_eq!(r.acc_llw, 0.0);
        }
        assert!(recs
            .windows(2)
            .all(|w| w[1].acc_h2 >= w[0].acc_h2 && w[1].acc_hw >= w[0].acc_hw));
    }

    #[test]
    fn heat_flow_gradient_accumulator() {
        let g = grid(32);
        let amp = 0.1;
        let which = AccumulatorSet {
            h2: false,
            bkm: false,
            hw: false,
            llw: true,
        };
        let recs = monitored_run(
            VectorField::zeros(&g, 2),
            equatorial(&g, |x| amp * x[0].sin()),
            0.2,
            which,
        );
        for r in &recs {
            // ∫₀ᵗ ∫ (amp e^{-s} cos x)⁴ = 3π² amp⁴ (1 − e^{−4t}) / 8
            let exact = 3.0 * PI * PI * amp.powi(4) * (1.0 - (-4.0 * r.t).exp()) / 8.0;
            assert!(
                (r.acc_llw - exact).abs() <= 1e-4 * exact.max(1e-300),
                "{} {}",
                r.acc_llw,
                exact
            );
            assert_eq!((r.acc_h2, r.acc_bkm, r.acc_hw), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn criterion_conjunction_is_sticky() {
        let g = grid(16);
        let mut m = Monitor::new(&g, 0.1, AccumulatorSet::default()).unwrap();
        let calm = State::new(
            0.0,
            VectorField::zeros(&g, 2),
            equatorial(&g, |x| 0.01 * x[0].sin()),
        )
        .unwrap();
        let rough = State::new(
            0.0,
            VectorField::zeros(&g, 2),
            equatorial(&g, |x| 1.0 * x[0].sin()),
        )
        .unwrap();
        m.start(&calm).unwrap();
        assert!(m.record(&calm).unwrap().criterion_ok);
        assert!(!m.record(&rough).unwrap().criterion_ok);
        assert!(!m.record(&calm).unwrap().criterion_ok);
        let (_, sup_d) = m.sup_criterion();
        assert!(sup_d > 0.1);
        assert!(Monitor::new(&g, 0.0, AccumulatorSet::default()).is_err());
    }

    #[test]
    fn snapshot_bytes_round_trip() {
        let snap = MonitorSnapshot {
            accumulators: [1.0, 2.5, -0.0, 1e-300],
            integrands: [f64::MAX, 0.1, 0.2, 0.3],
            criterion_ok: false,
            sup_besov_u: 0.125,
            sup_besov_grad_d: 3.0,
        };
        let bytes = snap.to_bytes();
        assert_eq!(bytes.len(), MonitorSnapshot::BYTES);
        assert_eq!(MonitorSnapshot::from_bytes(&bytes).unwrap(), snap);
        assert!(MonitorSnapshot::from_bytes(&bytes[1..]).is_err());
    }
}
