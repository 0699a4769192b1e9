//! Manufactured-solution verification.
//!
//! A case supplies closed-form fields together with their first time
//! derivative and first and second space derivatives. Source terms follow by
//! substituting the fields into the evolution equations, so the fields solve
//! the forced system exactly. The boundary nodes and the ghost cells beyond
//! the end faces take exact values.
//!
//! Every hard-coded derivative is compared with central differences of the
//! field formulas before a case is used.

use rand::{rngs::StdRng, Rng, SeedableRng};
use thiserror::Error;

use crate::error::SimError;
use crate::grid_state::{Grid, SimState};
use crate::physics::{
    conductivity_derivatives, conductivity_unchecked, eos_derivatives_unchecked, pressure_unchecked, PhysParams,
};
use crate::spatial_ops::{BoundaryValues, PrescribedBoundary, StateDerivative};
use crate::stepper::{Forcing, Integrator, StepControl, StepMode};

/// Value and derivatives of one scalar field at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub val: f64,
    pub t: f64,
    pub y: f64,
    pub yy: f64,
}

impl Jet {
    const ZERO: Jet = Jet { val: 0.0, t: 0.0, y: 0.0, yy: 0.0 };

    fn constant(val: f64) -> Self {
        Self { val, ..Self::ZERO }
    }
}

/// All manufactured fields at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldJets {
    pub v: Jet,
    pub theta: Jet,
    pub u: Jet,
    pub w: [Jet; 2],
    pub b: [Jet; 2],
}

impl FieldJets {
    fn scalars(&self) -> [(&'static str, Jet); 7] {
        [
            ("v", self.v),
            ("theta", self.theta),
            ("u", self.u),
            ("w2", self.w[0]),
            ("w3", self.w[1]),
            ("b2", self.b[0]),
            ("b3", self.b[1]),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    SineBump,
    Constant,
}

/// A manufactured solution.
#[derive(Clone, Debug, PartialEq)]
pub struct MmsCase {
    kind: Kind,
    /// Constant added to the longitudinal velocity.
    pub u_shift: f64,
}

impl MmsCase {
    pub const NAMES: [&'static str; 2] = ["sine-bump", "constant"];

    /// `v = 1 + 0.2 sin(πy) cos t`, `θ = 1 + 0.2 cos(πy) cos t`,
    /// `u = w₂ = 0.1 sin(πy) sin t`, `b₂ = 0.1 sin(πy) cos t`.
    pub fn sine_bump() -> Self {
        Self { kind: Kind::SineBump, u_shift: 0.0 }
    }

    /// The rest state `v = θ = 1`.
    pub fn constant() -> Self {
        Self { kind: Kind::Constant, u_shift: 0.0 }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "sine-bump" => Some(Self::sine_bump()),
            "constant" => Some(Self::constant()),
            _ => None,
        }
    }

    pub fn with_u_shift(mut self, c: f64) -> Self {
        self.u_shift = c;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::SineBump => "sine-bump",
            Kind::Constant => "constant",
        }
    }

    /// Fields and their hard-coded derivatives at `(y, t)`.
    pub fn eval(&self, y: f64, t: f64) -> FieldJets {
        use std::f64::consts::PI;
        let shift = Jet::constant(self.u_shift);
        match self.kind {
            Kind::Constant => FieldJets {
                v: Jet::constant(1.0),
                theta: Jet::constant(1.0),
                u: shift,
                w: [Jet::ZERO; 2],
                b: [Jet::ZERO; 2],
            },
            Kind::SineBump => {
                let (s, c) = (PI * y).sin_cos();
                let (st, ct) = t.sin_cos();
                let pi2 = PI * PI;
                let v = Jet { val: 1.0 + 0.2 * s * ct, t: -0.2 * s * st, y: 0.2 * PI * c * ct, yy: -0.2 * pi2 * s * ct };
                let theta =
                    Jet { val: 1.0 + 0.2 * c * ct, t: -0.2 * c * st, y: -0.2 * PI * s * ct, yy: -0.2 * pi2 * c * ct };
                let wave = Jet { val: 0.1 * s * st, t: 0.1 * s * ct, y: 0.1 * PI * c * st, yy: -0.1 * pi2 * s * st };
                let b2 = Jet { val: 0.1 * s * ct, t: -0.1 * s * st, y: 0.1 * PI * c * ct, yy: -0.1 * pi2 * s * ct };
                FieldJets {
                    v,
                    theta,
                    u: Jet { val: wave.val + self.u_shift, ..wave },
                    w: [wave, Jet::ZERO],
                    b: [b2, Jet::ZERO],
                }
            }
        }
    }
}

/// Source terms of the five equations at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sources {
    pub v: f64,
    pub u: f64,
    pub w: [f64; 2],
    /// Source of `v b`.
    pub m: [f64; 2],
    pub e: f64,
}

/// Forcing that makes the case an exact solution at `(y, t)`.
pub fn mms_sources(case: &MmsCase, y: f64, t: f64, params: &PhysParams) -> Sources {
    let p = params;
    let f = case.eval(y, t);
    let (v, th) = (f.v.val, f.theta.val);
    let d = eos_derivatives_unchecked(p, v, th);
    let pr = pressure_unchecked(p, v, th);
    let kappa = conductivity_unchecked(p, v, th);
    let (k_th, k_v) = conductivity_derivatives(p, v, th).expect("manufactured fields are positive");
    let th3 = th * th * th;

    let mut s = Sources { v: f.v.t - f.u.y, ..Sources::default() };

    let mut b_by = 0.0;
    for k in 0..2 {
        b_by += f.b[k].val * f.b[k].y;
    }
    let p_y = d.p_v * f.v.y + d.p_theta * f.theta.y;
    let visc_y = p.lambda * (f.u.yy / v - f.u.y * f.v.y / (v * v));
    s.u = f.u.t - (-p_y - b_by + visc_y);

    let mut shear_heat = 0.0;
    let mut joule = 0.0;
    for k in 0..2 {
        let (w, b) = (f.w[k], f.b[k]);
        s.w[k] = w.t - (b.y + p.mu * (w.yy / v - w.y * f.v.y / (v * v)));
        s.m[k] = (f.v.t * b.val + v * b.t) - (w.y + p.nu * (b.yy / v - b.y * f.v.y / (v * v)));
        shear_heat += w.y * w.y;
        joule += b.y * b.y;
    }

    let e_t = d.e_theta * f.theta.t + p.a_rad * th3 * th * f.v.t;
    let kv_y = (k_th * f.theta.y + k_v * f.v.y) / v - kappa * f.v.y / (v * v);
    let conduction = kv_y * f.theta.y + kappa / v * f.theta.yy;
    let work = (-pr + p.lambda * f.u.y / v) * f.u.y;
    s.e = e_t - (conduction + work + p.mu * shear_heat / v + p.nu * joule / v);
    s
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MmsError {
    #[error("derivative self-check failed for {field}_{which} at (y = {y}, t = {t}): coded {coded}, finite difference {fd}")]
    SelfCheck { field: &'static str, which: &'static str, y: f64, t: f64, coded: f64, fd: f64 },
    #[error("levels must be ascending and at least 4: {0:?}")]
    Levels(Vec<usize>),
    #[error("manufactured runs need the explicit stepper")]
    Mode,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Compares every hard-coded derivative with central differences at
/// `points` pseudo-random `(y, t)` in `[0, 1] × [0, 1]`.
pub fn self_check(case: &MmsCase, points: usize, seed: u64) -> Result<(), MmsError> {
    const H: f64 = 1e-5;
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..points {
        let y: f64 = rng.gen_range(0.0..1.0);
        let t: f64 = rng.gen_range(0.0..1.0);
        let at = case.eval(y, t).scalars();
        let tp = case.eval(y, t + H).scalars();
        let tm = case.eval(y, t - H).scalars();
        let yp = case.eval(y + H, t).scalars();
        let ym = case.eval(y - H, t).scalars();
        for k in 0..at.len() {
            let (field, jet) = at[k];
            let checks = [
                ("t", jet.t, (tp[k].1.val - tm[k].1.val) / (2.0 * H)),
                ("y", jet.y, (yp[k].1.val - ym[k].1.val) / (2.0 * H)),
                ("yy", jet.yy, (yp[k].1.y - ym[k].1.y) / (2.0 * H)),
            ];
            for (which, coded, fd) in checks {
                if (coded - fd).abs() > 1e-7 * coded.abs().max(1.0) {
                    return Err(MmsError::SelfCheck { field, which, y, t, coded, fd });
                }
            }
        }
    }
    Ok(())
}

/// Grid state sampled from the exact fields at time `t`.
pub fn exact_state(case: &MmsCase, grid: &Grid, t: f64) -> SimState {
    let n = grid.n_cells();
    let mut s = SimState::uniform(grid, 1.0, 1.0);
    s.t = t;
    for i in 0..n {
        let f = case.eval(grid.cell_center(i), t);
        s.v[i] = f.v.val;
        s.theta[i] = f.theta.val;
        s.b[i] = [f.b[0].val, f.b[1].val];
    }
    for j in 0..=n {
        let f = case.eval(grid.node(j), t);
        s.u[j] = f.u.val;
        s.w[j] = [f.w[0].val, f.w[1].val];
    }
    s
}

/// Exact Dirichlet data and manufactured sources for one grid.
pub struct MmsForcing<'a> {
    case: &'a MmsCase,
    dy: f64,
}

impl<'a> MmsForcing<'a> {
    pub fn new(case: &'a MmsCase, grid: &Grid) -> Self {
        Self { case, dy: grid.dy() }
    }

    fn side(&self, y_ghost: f64, y_node: f64, t: f64) -> BoundaryValues {
        let g = self.case.eval(y_ghost, t);
        let n = self.case.eval(y_node, t);
        BoundaryValues {
            v: g.v.val,
            theta: g.theta.val,
            b: [g.b[0].val, g.b[1].val],
            u: n.u.val,
            w: [n.w[0].val, n.w[1].val],
        }
    }
}

impl Forcing for MmsForcing<'_> {
    fn boundary(&self, t: f64) -> Option<PrescribedBoundary> {
        let h = 0.5 * self.dy;
        Some(PrescribedBoundary { left: self.side(-h, 0.0, t), right: self.side(1.0 + h, 1.0, t) })
    }

    fn add_sources(&self, t: f64, grid: &Grid, params: &PhysParams, rhs: &mut StateDerivative) {
        let n = grid.n_cells();
        for i in 0..n {
            let s = mms_sources(self.case, grid.cell_center(i), t, params);
            rhs.dv[i] += s.v;
            rhs.de[i] += s.e;
            rhs.dm[i][0] += s.m[0];
            rhs.dm[i][1] += s.m[1];
        }
        for j in 1..n {
            let s = mms_sources(self.case, grid.node(j), t, params);
            rhs.du[j] += s.u;
            rhs.dw[j][0] += s.w[0];
            rhs.dw[j][1] += s.w[1];
        }
    }
}

/// Fields reported in the error table.
pub const FIELDS: [&str; 5] = ["v", "u", "theta", "w", "b"];

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub level: usize,
    pub n: usize,
    pub field: &'static str,
    pub l2: f64,
    pub linf: f64,
    /// `log(err_coarse / err_fine) / log(N_fine / N_coarse)` of the L² error
    /// against the previous level.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub case: &'static str,
    pub t_final: f64,
    pub rows: Vec<ErrorRow>,
}

impl ConvergenceTable {
    /// Smallest observed order of `field` over all level pairs.
    pub fn min_order(&self, field: &str) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.field == field)
            .filter_map(|r| r.order)
            .reduce(f64::min)
    }

    pub fn errors(&self, field: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.field == field).map(|r| r.l2).collect()
    }

    /// Orders required of each field.
    pub fn required_order(field: &str) -> f64 {
        match field {
            "w" | "b" => 1.5,
            _ => 1.8,
        }
    }

    /// True when every field meets its required order at every level pair.
    pub fn meets_required_orders(&self) -> bool {
        FIELDS.iter().all(|f| self.min_order(f).is_some_and(|o| o >= Self::required_order(f)))
    }
}

/// L² and L∞ errors of each field of `s` against the exact solution.
pub fn field_errors(case: &MmsCase, grid: &Grid, s: &SimState) -> [(f64, f64); 5] {
    let exact = exact_state(case, grid, s.t);
    let n = grid.n_cells();
    let mut acc = [(0.0_f64, 0.0_f64); 5];
    let mut add = |k: usize, err: f64, m: f64| {
        acc[k].0 += m * err * err;
        acc[k].1 = acc[k].1.max(err.abs());
    };
    for i in 0..n {
        let dy = grid.dy();
        add(0, s.v[i] - exact.v[i], dy);
        add(2, s.theta[i] - exact.theta[i], dy);
        add(4, (s.b[i][0] - exact.b[i][0]).hypot(s.b[i][1] - exact.b[i][1]), dy);
    }
    for j in 0..=n {
        let m = grid.node_mass(j);
        add(1, s.u[j] - exact.u[j], m);
        add(3, (s.w[j][0] - exact.w[j][0]).hypot(s.w[j][1] - exact.w[j][1]), m);
    }
    acc.map(|(sq, inf)| (sq.sqrt(), inf))
}

/// Runs the case on every grid in `levels` to `t_final` and tabulates errors.
pub fn run_convergence(
    case: &MmsCase,
    levels: &[usize],
    t_final: f64,
    params: &PhysParams,
    control: &StepControl,
) -> Result<ConvergenceTable, MmsError> {
    if control.mode != StepMode::ExplicitRk2 {
        return Err(MmsError::Mode);
    }
    if levels.is_empty() || levels[0] < 4 || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MmsError::Levels(levels.to_vec()));
    }
    self_check(case, 64, 0x5eed)?;
    let mut rows: Vec<ErrorRow> = Vec::new();
    for (level, &n) in levels.iter().enumerate() {
        let grid = Grid::new(n).map_err(|_| MmsError::Levels(levels.to_vec()))?;
        let forcing = MmsForcing::new(case, &grid);
        let it = Integrator::new(params, &grid, *control).with_forcing(&forcing);
        let end = it.advance_to(exact_state(case, &grid, 0.0), t_final, |_| Ok(()))?;
        let errs = field_errors(case, &grid, &end);
        for (k, field) in FIELDS.iter().enumerate() {
            let order = (level > 0).then(|| {
                let prev = rows.iter().rev().find(|r| r.field == *field).expect("previous level");
                (prev.l2 / errs[k].0).ln() / (n as f64 / prev.n as f64).ln()
            });
            rows.push(ErrorRow { level, n, field, l2: errs[k].0, linf: errs[k].1, order });
        }
    }
    Ok(ConvergenceTable { case: case.name(), t_final, rows })
}
