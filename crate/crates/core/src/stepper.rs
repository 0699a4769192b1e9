//! Time integration.
//!
//! Two modes share the spatial operator:
//!
//! * [`StepMode::ExplicitRk2`]: two-stage SSP Runge–Kutta (Heun) on the
//!   conservative variables `(v, e, v b, u, w)`, limited by the parabolic
//!   stability bound `dt ≤ cfl · dy² / (2 D_max)`.
//! * [`StepMode::Imex`]: pressure, magnetic tension and the dissipative
//!   sources explicit; the four diffusion operators (viscous `u`, shear `w`,
//!   resistive `b`, conductive `e`) backward Euler with coefficients frozen at
//!   the start of the step. Limited only by an acoustic bound.
//!
//! Positivity is checked after every stage. A step that would produce
//! `v ≤ 0` or `θ ≤ 0` is rejected with the offending cell.

use serde::{Deserialize, Serialize};

use crate::error::{SimError, StepError};
use crate::grid_state::{Grid, SimState};
use crate::physics::{
    conductivity_unchecked, eos_derivatives_unchecked, internal_energy_unchecked,
    pressure_unchecked, temperature_from_energy_near, PhysParams,
};
use crate::spatial_ops::{
    compute_rhs_with, BoundaryResiduals, Closure, Model, PrescribedBoundary, Scheme,
    StateDerivative, FREE_FACE_STRESS, INSULATED_HEAT_FLUX,
};
use crate::tridiag;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMode {
    #[default]
    ExplicitRk2,
    Imex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub mode: StepMode,
    /// Safety factor in (0, 1].
    pub cfl: f64,
    pub dt_max: f64,
    /// A stable step below this aborts the run.
    pub dt_min: f64,
    /// Picard sweeps of the implicit conduction solve (1 or 2).
    pub picard_sweeps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { mode: StepMode::ExplicitRk2, cfl: 0.4, dt_max: 1e-2, dt_min: 1e-12, picard_sweeps: 1 }
    }
}

/// External data injected into the semi-discretization: Dirichlet boundary
/// values and volumetric sources. Used by manufactured-solution runs.
pub trait Forcing {
    /// Boundary data at time `t`; `None` keeps the free boundary.
    fn boundary(&self, t: f64) -> Option<PrescribedBoundary>;
    /// Adds source terms at time `t` to the rates.
    fn add_sources(&self, t: f64, grid: &Grid, params: &PhysParams, rhs: &mut StateDerivative);
}

/// Side information from one accepted step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Effective velocities of the two boundary particles over the step: the
    /// volume update moved `∫v dy` by exactly `dt · (right − left)`.
    pub boundary_velocity: [f64; 2],
    pub residuals: BoundaryResiduals,
}

/// What an observer sees after the initial state and after every step.
#[derive(Clone, Copy, Debug)]
pub struct StepEvent<'a> {
    pub state: &'a SimState,
    /// The state one accepted step earlier; `None` for the initial call.
    pub prev: Option<&'a SimState>,
    pub dt: f64,
    pub report: Option<&'a StepReport>,
}

/// Bundles everything a step needs.
#[derive(Clone, Copy)]
pub struct Integrator<'a> {
    pub params: &'a PhysParams,
    pub grid: &'a Grid,
    pub control: StepControl,
    pub scheme: Scheme,
    pub forcing: Option<&'a dyn Forcing>,
}

struct Conserved {
    e: Vec<f64>,
    m: Vec<[f64; 2]>,
}

fn conserve(params: &PhysParams, s: &SimState) -> Conserved {
    let e = s.v.iter().zip(&s.theta).map(|(&v, &t)| internal_energy_unchecked(params, v, t)).collect();
    let m = s.v.iter().zip(&s.b).map(|(&v, b)| [v * b[0], v * b[1]]).collect();
    Conserved { e, m }
}

fn recover_theta(
    params: &PhysParams,
    i: usize,
    v: f64,
    e: f64,
    guess: f64,
) -> Result<f64, StepError> {
    if !(e > 0.0) {
        return Err(StepError::Positivity { field: "theta", index: i, value: e });
    }
    let th = temperature_from_energy_near(params, v, e, guess)
        .map_err(|source| StepError::Physics { index: i, source })?;
    if !(th > 0.0) {
        return Err(StepError::Positivity { field: "theta", index: i, value: th });
    }
    Ok(th)
}

impl<'a> Integrator<'a> {
    pub fn new(params: &'a PhysParams, grid: &'a Grid, control: StepControl) -> Self {
        Self { params, grid, control, scheme: Scheme::default(), forcing: None }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// Largest admissible step for `state` under the current mode.
    pub fn stable_dt(&self, state: &SimState) -> Result<f64, StepError> {
        let p = self.params;
        let n = self.grid.n_cells();
        let dy = self.grid.dy();
        let c = &self.control;
        let dt = match c.mode {
            StepMode::ExplicitRk2 => {
                let mut d_max = 0.0_f64;
                for i in 0..n {
                    let (v, th) = (state.v[i], state.theta[i]);
                    let e_theta = eos_derivatives_unchecked(p, v, th).e_theta;
                    let kappa = conductivity_unchecked(p, v, th);
                    // b diffuses with ν/v² because the evolved variable is v b.
                    let d = (p.lambda / v)
                        .max(p.mu / v)
                        .max(p.nu / (v * v))
                        .max(kappa / (v * e_theta));
                    d_max = d_max.max(d);
                }
                c.cfl * dy * dy / (2.0 * d_max)
            }
            StepMode::Imex => {
                let mut s_max = 0.0_f64;
                for i in 0..n {
                    let (v, th) = (state.v[i], state.theta[i]);
                    let d = eos_derivatives_unchecked(p, v, th);
                    let c_eff = (v * d.p_v.abs() + th * d.p_theta * d.p_theta / d.e_theta).sqrt();
                    let u = state.u[i].abs().max(state.u[i + 1].abs());
                    s_max = s_max.max(u + c_eff);
                }
                c.cfl * dy / s_max
            }
        };
        let dt = dt.min(c.dt_max);
        if !(dt >= c.dt_min) {
            return Err(StepError::DtCollapse { dt, dt_min: c.dt_min });
        }
        Ok(dt)
    }

    pub fn step(&self, state: &SimState, dt: f64) -> Result<(SimState, StepReport), StepError> {
        match self.control.mode {
            StepMode::ExplicitRk2 => self.step_explicit_rk2(state, dt),
            StepMode::Imex => self.step_imex(state, dt),
        }
    }

    fn rates(&self, state: &SimState, out: &mut StateDerivative) -> Result<(), StepError> {
        let pb = self.forcing.and_then(|f| f.boundary(state.t));
        let closure = pb.as_ref().map_or(Closure::Free, Closure::Prescribed);
        compute_rhs_with(state, self.params, self.grid, &self.scheme, closure, out)?;
        if let Some(f) = self.forcing {
            f.add_sources(state.t, self.grid, self.params, out);
        }
        Ok(())
    }

    /// `base + dt · Σ weight·k`, converted back to primitive variables.
    fn combine(
        &self,
        base: &SimState,
        cons: &Conserved,
        stages: &[(f64, &StateDerivative)],
        dt: f64,
        guess: &[f64],
    ) -> Result<SimState, StepError> {
        let n = self.grid.n_cells();
        let mhd = self.scheme.model == Model::Mhd;
        let mut out = base.clone();
        out.t = base.t + dt;
        for i in 0..n {
            let mut dv = 0.0;
            let mut de = 0.0;
            let mut dm = [0.0; 2];
            for &(wgt, k) in stages {
                dv += wgt * k.dv[i];
                de += wgt * k.de[i];
                if mhd {
                    dm[0] += wgt * k.dm[i][0];
                    dm[1] += wgt * k.dm[i][1];
                }
            }
            let v = base.v[i] + dt * dv;
            if !(v > 0.0) {
                return Err(StepError::Positivity { field: "v", index: i, value: v });
            }
            let e = cons.e[i] + dt * de;
            out.v[i] = v;
            out.theta[i] = recover_theta(self.params, i, v, e, guess[i])?;
            if mhd {
                let m = cons.m[i];
                out.b[i] = [(m[0] + dt * dm[0]) / v, (m[1] + dt * dm[1]) / v];
            }
        }
        for j in 0..=n {
            let mut du = 0.0;
            let mut dw = [0.0; 2];
            for &(wgt, k) in stages {
                du += wgt * k.du[j];
                if mhd {
                    dw[0] += wgt * k.dw[j][0];
                    dw[1] += wgt * k.dw[j][1];
                }
            }
            out.u[j] = base.u[j] + dt * du;
            if mhd {
                out.w[j] = [base.w[j][0] + dt * dw[0], base.w[j][1] + dt * dw[1]];
            }
        }
        self.pin_boundary(&mut out);
        Ok(out)
    }

    fn pin_boundary(&self, s: &mut SimState) {
        let n = s.n_cells();
        match self.forcing.and_then(|f| f.boundary(s.t)) {
            None => {
                s.w[0] = [0.0; 2];
                s.w[n] = [0.0; 2];
            }
            Some(pb) => {
                s.u[0] = pb.left.u;
                s.u[n] = pb.right.u;
                s.w[0] = pb.left.w;
                s.w[n] = pb.right.w;
            }
        }
    }

    /// One forward-Euler stage.
    pub fn step_forward_euler(&self, state: &SimState, dt: f64) -> Result<(SimState, StepReport), StepError> {
        let mut k = StateDerivative::zeros(self.grid);
        self.rates(state, &mut k)?;
        let cons = conserve(self.params, state);
        let next = self.combine(state, &cons, &[(1.0, &k)], dt, &state.theta)?;
        let n = self.grid.n_cells();
        let report = StepReport {
            boundary_velocity: [state.u[0], state.u[n]],
            residuals: BoundaryResiduals::measure(&next, &k),
        };
        Ok((next, report))
    }

    /// Heun's method: `U¹ = Uⁿ + dt L(Uⁿ)`, `Uⁿ⁺¹ = Uⁿ + dt/2 (L(Uⁿ) + L(U¹))`.
    pub fn step_explicit_rk2(&self, state: &SimState, dt: f64) -> Result<(SimState, StepReport), StepError> {
        let n = self.grid.n_cells();
        let cons = conserve(self.params, state);
        let mut k1 = StateDerivative::zeros(self.grid);
        self.rates(state, &mut k1)?;
        let stage = self.combine(state, &cons, &[(1.0, &k1)], dt, &state.theta)?;
        let mut k2 = StateDerivative::zeros(self.grid);
        self.rates(&stage, &mut k2)?;
        let next = self.combine(state, &cons, &[(0.5, &k1), (0.5, &k2)], dt, &stage.theta)?;
        let residuals = BoundaryResiduals::measure(state, &k1)
            .max(BoundaryResiduals::measure(&stage, &k2))
            .max(BoundaryResiduals::from_parts(&next, [0.0; 2], [0.0; 2]));
        let report = StepReport {
            boundary_velocity: [0.5 * (state.u[0] + stage.u[0]), 0.5 * (state.u[n] + stage.u[n])],
            residuals,
        };
        Ok((next, report))
    }

    /// Linearly implicit step for the diffusion operators.
    ///
    /// Order: explicit sources from `Uⁿ`; backward-Euler solve for `u`;
    /// `v` from the new `u`; backward-Euler solves for `w`, `b` and `θ`;
    /// conservative energy update from the implicit heat flux; θ recovered
    /// from `e`. Free boundary only.
    pub fn step_imex(&self, state: &SimState, dt: f64) -> Result<(SimState, StepReport), StepError> {
        assert!(self.forcing.is_none(), "IMEX stepping supports the free boundary only");
        let p = self.params;
        let n = self.grid.n_cells();
        let dy = self.grid.dy();
        let inv_dy = 1.0 / dy;
        let mhd = self.scheme.model == Model::Mhd;
        let mean = self.scheme.kappa_mean;

        let mut sigma_e = vec![0.0; n];
        let mut src_e = vec![0.0; n];
        let mut e0 = vec![0.0; n];
        let mut e_theta = vec![0.0; n];
        let mut kv = vec![0.0; n];
        for i in 0..n {
            let (v, th) = (state.v[i], state.theta[i]);
            if !(v > 0.0) || !(th > 0.0) {
                return Err(StepError::Positivity {
                    field: if v > 0.0 { "theta" } else { "v" },
                    index: i,
                    value: if v > 0.0 { th } else { v },
                });
            }
            let pr = pressure_unchecked(p, v, th);
            let uy = (state.u[i + 1] - state.u[i]) * inv_dy;
            e0[i] = internal_energy_unchecked(p, v, th);
            e_theta[i] = eos_derivatives_unchecked(p, v, th).e_theta;
            kv[i] = conductivity_unchecked(p, v, th) / v;
            if mhd {
                let b = state.b[i];
                let wy0 = (state.w[i + 1][0] - state.w[i][0]) * inv_dy;
                let wy1 = (state.w[i + 1][1] - state.w[i][1]) * inv_dy;
                sigma_e[i] = -pr - 0.5 * (b[0] * b[0] + b[1] * b[1]);
                src_e[i] = (-pr + p.lambda * uy / v) * uy + p.mu * (wy0 * wy0 + wy1 * wy1) / v;
            } else {
                sigma_e[i] = -pr;
                src_e[i] = (-pr + p.lambda * uy / v) * uy;
            }
        }
        let vbar = |j: usize| -> f64 {
            if j == 0 {
                state.v[0]
            } else if j == n {
                state.v[n - 1]
            } else {
                0.5 * (state.v[j - 1] + state.v[j])
            }
        };
        if mhd {
            let (gl, gr) = state.b_ghosts();
            let mut joule = vec![0.0; n + 1];
            for (j, jl) in joule.iter_mut().enumerate() {
                let lo = if j == 0 { gl } else { state.b[j - 1] };
                let hi = if j == n { gr } else { state.b[j] };
                let by0 = (hi[0] - lo[0]) * inv_dy;
                let by1 = (hi[1] - lo[1]) * inv_dy;
                *jl = (by0 * by0 + by1 * by1) / vbar(j);
            }
            for i in 0..n {
                src_e[i] += p.nu * 0.5 * (joule[i] + joule[i + 1]);
            }
        }

        // Longitudinal momentum: all N+1 nodes, zero stress beyond the faces.
        let c: Vec<f64> = state.v.iter().map(|&v| p.lambda / v * inv_dy).collect();
        let mut lo = vec![0.0; n + 1];
        let mut di = vec![0.0; n + 1];
        let mut up = vec![0.0; n + 1];
        let mut rhs = vec![0.0; n + 1];
        for j in 0..=n {
            let mj = self.grid.node_mass(j);
            let cl = if j > 0 { c[j - 1] } else { 0.0 };
            let cr = if j < n { c[j] } else { 0.0 };
            let sl = if j > 0 { sigma_e[j - 1] } else { FREE_FACE_STRESS };
            let sr = if j < n { sigma_e[j] } else { FREE_FACE_STRESS };
            lo[j] = -dt * cl;
            up[j] = -dt * cr;
            di[j] = mj + dt * (cl + cr);
            rhs[j] = mj * state.u[j] + dt * (sr - sl);
        }
        let u_new = tridiag::solve(&lo, &di, &up, &rhs).ok_or(StepError::Singular { field: "u" })?;

        let mut next = state.clone();
        next.t = state.t + dt;
        for i in 0..n {
            let v = state.v[i] + dt * (u_new[i + 1] - u_new[i]) * inv_dy;
            if !(v > 0.0) {
                return Err(StepError::Positivity { field: "v", index: i, value: v });
            }
            next.v[i] = v;
        }
        next.u = u_new;

        if mhd {
            // Transverse velocity on interior nodes, w = 0 at both ends.
            let d: Vec<f64> = state.v.iter().map(|&v| p.mu / v * inv_dy).collect();
            let m = n - 1;
            for comp in 0..2 {
                let (mut lo, mut di, mut up, mut rhs) =
                    (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
                for k in 0..m {
                    let j = k + 1;
                    lo[k] = -dt * d[j - 1];
                    up[k] = -dt * d[j];
                    di[k] = dy + dt * (d[j - 1] + d[j]);
                    rhs[k] = dy * state.w[j][comp] + dt * (state.b[j][comp] - state.b[j - 1][comp]);
                }
                let sol = tridiag::solve(&lo, &di, &up, &rhs).ok_or(StepError::Singular { field: "w" })?;
                for k in 0..m {
                    next.w[k + 1][comp] = sol[k];
                }
            }
            next.w[0] = [0.0; 2];
            next.w[n] = [0.0; 2];

            // Magnetic field: unknown b, conserved v b, odd ghosts.
            let g: Vec<f64> = (0..=n).map(|j| p.nu / vbar(j) * inv_dy).collect();
            for comp in 0..2 {
                let (mut lo, mut di, mut up, mut rhs) =
                    (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
                for i in 0..n {
                    let gl = if i == 0 { 2.0 * g[0] } else { g[i] };
                    let gr = if i == n - 1 { 2.0 * g[n] } else { g[i + 1] };
                    lo[i] = if i == 0 { 0.0 } else { -dt * g[i] };
                    up[i] = if i == n - 1 { 0.0 } else { -dt * g[i + 1] };
                    di[i] = dy * next.v[i] + dt * (gl + gr);
                    let m_old = state.v[i] * state.b[i][comp];
                    rhs[i] = dy * m_old + dt * (state.w[i + 1][comp] - state.w[i][comp]);
                }
                let sol = tridiag::solve(&lo, &di, &up, &rhs).ok_or(StepError::Singular { field: "b" })?;
                for i in 0..n {
                    next.b[i][comp] = sol[i];
                }
            }
        }

        // Energy: θ-form backward Euler, conservative e update.
        let mut e_hat = vec![0.0; n];
        let mut theta_hat = vec![0.0; n];
        for i in 0..n {
            e_hat[i] = e0[i] + dt * src_e[i];
            theta_hat[i] = recover_theta(p, i, next.v[i], e_hat[i], state.theta[i])?;
        }
        let mut heat = vec![0.0; n + 1];
        let mut e_new = vec![0.0; n];
        for sweep in 0..self.control.picard_sweeps.max(1) {
            if sweep > 0 {
                for i in 0..n {
                    let (v, th) = (next.v[i], next.theta[i]);
                    e_theta[i] = eos_derivatives_unchecked(p, v, th).e_theta;
                    kv[i] = conductivity_unchecked(p, v, th) / v;
                }
            }
            let k: Vec<f64> = (0..=n)
                .map(|j| if j == 0 || j == n { 0.0 } else { mean.combine(kv[j - 1], kv[j]) * inv_dy })
                .collect();
            let mut lo = vec![0.0; n];
            let mut di = vec![0.0; n];
            let mut up = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                let cap = dy * e_theta[i] / dt;
                lo[i] = -k[i];
                up[i] = -k[i + 1];
                di[i] = cap + k[i] + k[i + 1];
                rhs[i] = cap * theta_hat[i];
            }
            let theta_star =
                tridiag::solve(&lo, &di, &up, &rhs).ok_or(StepError::Singular { field: "theta" })?;
            heat[0] = INSULATED_HEAT_FLUX;
            heat[n] = INSULATED_HEAT_FLUX;
            for j in 1..n {
                heat[j] = k[j] * (theta_star[j] - theta_star[j - 1]);
            }
            for i in 0..n {
                e_new[i] = e_hat[i] + dt * (heat[i + 1] - heat[i]) * inv_dy;
                next.theta[i] = recover_theta(p, i, next.v[i], e_new[i], theta_star[i])?;
            }
        }

        let report = StepReport {
            boundary_velocity: [next.u[0], next.u[n]],
            residuals: BoundaryResiduals::from_parts(
                &next,
                [heat[0], heat[n]],
                [FREE_FACE_STRESS, FREE_FACE_STRESS],
            ),
        };
        Ok((next, report))
    }

    /// Integrates to exactly `t_end`, calling `observer` on the initial state
    /// and after every accepted step. An observer error stops the run.
    pub fn advance_to<F>(&self, state: SimState, t_end: f64, mut observer: F) -> Result<SimState, SimError>
    where
        F: FnMut(&StepEvent<'_>) -> Result<(), String>,
    {
        let obs_err = |t: f64, msg: String| SimError { t, source: StepError::Observer(msg) };
        observer(&StepEvent { state: &state, prev: None, dt: 0.0, report: None })
            .map_err(|m| obs_err(state.t, m))?;
        let mut cur = state;
        while cur.t < t_end {
            let remaining = t_end - cur.t;
            let dt_stable = self.stable_dt(&cur).map_err(|source| SimError { t: cur.t, source })?;
            let last = remaining <= dt_stable * (1.0 + 1e-9);
            let dt = if last { remaining } else { dt_stable };
            let (mut next, report) = self.step(&cur, dt).map_err(|source| SimError { t: cur.t, source })?;
            if last {
                next.t = t_end;
            }
            debug_assert!(self.forcing.is_some() || crate::grid_state::validate(&next).is_empty());
            observer(&StepEvent { state: &next, prev: Some(&cur), dt, report: Some(&report) })
                .map_err(|m| obs_err(next.t, m))?;
            cur = next;
        }
        Ok(cur)
    }
}

pub fn stable_dt(
    state: &SimState,
    params: &PhysParams,
    grid: &Grid,
    control: &StepControl,
) -> Result<f64, StepError> {
    Integrator::new(params, grid, *control).stable_dt(state)
}

pub fn step_explicit_rk2(
    state: &SimState,
    params: &PhysParams,
    grid: &Grid,
    dt: f64,
) -> Result<SimState, StepError> {
    Integrator::new(params, grid, StepControl::default()).step_explicit_rk2(state, dt).map(|r| r.0)
}

pub fn step_imex(state: &SimState, params: &PhysParams, grid: &Grid, dt: f64) -> Result<SimState, StepError> {
    let control = StepControl { mode: StepMode::Imex, ..StepControl::default() };
    Integrator::new(params, grid, control).step_imex(state, dt).map(|r| r.0)
}

pub fn advance_to<F>(
    state: SimState,
    params: &PhysParams,
    grid: &Grid,
    control: &StepControl,
    t_end: f64,
    observer: F,
) -> Result<SimState, SimError>
where
    F: FnMut(&StepEvent<'_>) -> Result<(), String>,
{
    Integrator::new(params, grid, *control).advance_to(state, t_end, observer)
}
