//! Staggered mass grid and the evolved fields.
//!
//! Cells `i = 0..N` carry `v`, `θ` and the transverse field `b`; nodes
//! `j = 0..=N` carry the velocities `u` and `w`. Cell `i` sits between nodes
//! `i` and `i + 1`. The longitudinal field component is the constant 1 and is
//! not stored.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigIssue;
use crate::physics::PhysParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n_cells: usize,
    dy: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(n_cells: usize) -> Result<Self, ConfigIssue> {
        if n_cells < Self::MIN_CELLS {
            return Err(ConfigIssue::new(
                "grid.n_cells",
                format!("must be ≥ {} (got {n_cells})", Self::MIN_CELLS),
            ));
        }
        Ok(Self { n_cells, dy: 1.0 / n_cells as f64 })
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.dy
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    #[inline]
    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dy
    }

    /// Mass owned by node `j`: `dy` in the interior, `dy/2` at the two ends.
    #[inline]
    pub fn node_mass(&self, j: usize) -> f64 {
        if j == 0 || j == self.n_cells {
            0.5 * self.dy
        } else {
            self.dy
        }
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.n_cells).map(|_| self.dy).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Specific volume per cell.
    pub v: Vec<f64>,
    /// Temperature per cell.
    pub theta: Vec<f64>,
    /// Transverse magnetic field `(b₂, b₃)` per cell.
    pub b: Vec<[f64; 2]>,
    /// Longitudinal velocity per node.
    pub u: Vec<f64>,
    /// Transverse velocity `(w₂, w₃)` per node.
    pub w: Vec<[f64; 2]>,
}

impl SimState {
    /// Gas at rest with uniform `v` and `θ`.
    pub fn uniform(grid: &Grid, v: f64, theta: f64) -> Self {
        let n = grid.n_cells();
        Self {
            t: 0.0,
            v: vec![v; n],
            theta: vec![theta; n],
            b: vec![[0.0; 2]; n],
            u: vec![0.0; n + 1],
            w: vec![[0.0; 2]; n + 1],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.v.len()
    }

    /// Magnetic field in the ghost cells left of cell 0 and right of cell
    /// `N-1`. Odd reflection places `b = 0` on both walls.
    #[inline]
    pub fn b_ghosts(&self) -> ([f64; 2], [f64; 2]) {
        let l = self.b[0];
        let r = self.b[self.b.len() - 1];
        ([-l[0], -l[1]], [-r[0], -r[1]])
    }
}

/// Closed-form initial data.
///
/// Every profile is a baseline `(v, θ)` at rest plus a perturbation. A
/// composite takes its baseline from its first part and adds the
/// perturbations of all parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialProfile {
    Uniform {
        #[serde(default = "one")]
        v: f64,
        #[serde(default = "one")]
        theta: f64,
    },
    /// θ(y) = θ₀ + amp·cos(πy), v = 1.
    ThermalBump {
        #[serde(default = "one")]
        theta0: f64,
        amp: f64,
    },
    /// u(y) = u_amp·sin(πy) at nodes.
    VelocityPush { u_amp: f64 },
    /// b₂(y) = b_amp·sin(πy) at cell centers.
    MagnetoPulse { b_amp: f64 },
    Composite { parts: Vec<InitialProfile> },
}

fn one() -> f64 {
    1.0
}

impl InitialProfile {
    fn baseline(&self) -> (f64, f64) {
        match self {
            InitialProfile::Uniform { v, theta } => (*v, *theta),
            InitialProfile::ThermalBump { theta0, .. } => (1.0, *theta0),
            InitialProfile::VelocityPush { .. } | InitialProfile::MagnetoPulse { .. } => (1.0, 1.0),
            InitialProfile::Composite { parts } => {
                parts.first().map(|p| p.baseline()).unwrap_or((1.0, 1.0))
            }
        }
    }

    fn add_perturbation(&self, grid: &Grid, state: &mut SimState) {
        match self {
            InitialProfile::Uniform { .. } => {}
            InitialProfile::ThermalBump { amp, .. } => {
                for (i, th) in state.theta.iter_mut().enumerate() {
                    *th += amp * (PI * grid.cell_center(i)).cos();
                }
            }
            InitialProfile::VelocityPush { u_amp } => {
                let n = grid.n_cells();
                for j in 1..n {
                    state.u[j] += u_amp * (PI * grid.node(j)).sin();
                }
            }
            InitialProfile::MagnetoPulse { b_amp } => {
                for (i, b) in state.b.iter_mut().enumerate() {
                    b[0] += b_amp * (PI * grid.cell_center(i)).sin();
                }
            }
            InitialProfile::Composite { parts } => {
                for p in parts {
                    p.add_perturbation(grid, state);
                }
            }
        }
    }
}

/// Samples `profile` on `grid`.
///
/// Fails when the sampled state is not admissible, e.g. a thermal bump whose
/// dip reaches zero temperature.
pub fn make_initial_state(
    grid: &Grid,
    profile: &InitialProfile,
    _params: &PhysParams,
) -> Result<SimState, ConfigIssue> {
    let (v0, theta0) = profile.baseline();
    let mut state = SimState::uniform(grid, v0, theta0);
    profile.add_perturbation(grid, &mut state);
    let violations = validate(&state);
    if let Some(first) = violations.first() {
        return Err(ConfigIssue::new(
            "init",
            format!("profile produces an inadmissible state: {first}"),
        ));
    }
    Ok(state)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub index: usize,
    pub value: f64,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] = {:e} violates {}", self.field, self.index, self.value, self.rule)
    }
}

/// Lists every violated state invariant; empty means the state is admissible.
pub fn validate(state: &SimState) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = state.v.len();
    let push = |out: &mut Vec<Violation>, field, index, value, rule| {
        out.push(Violation { field, index, value, rule })
    };
    if n < Grid::MIN_CELLS
        || state.theta.len() != n
        || state.b.len() != n
        || state.u.len() != n + 1
        || state.w.len() != n + 1
    {
        push(&mut out, "state", 0, n as f64, "consistent array lengths");
        return out;
    }
    for (i, &v) in state.v.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            push(&mut out, "v", i, v, "v > 0");
        }
    }
    for (i, &th) in state.theta.iter().enumerate() {
        if !(th > 0.0 && th.is_finite()) {
            push(&mut out, "theta", i, th, "theta > 0");
        }
    }
    for (i, b) in state.b.iter().enumerate() {
        for &c in b {
            if !c.is_finite() {
                push(&mut out, "b", i, c, "finite b");
            }
        }
    }
    for (j, &u) in state.u.iter().enumerate() {
        if !u.is_finite() {
            push(&mut out, "u", j, u, "finite u");
        }
    }
    for (j, w) in state.w.iter().enumerate() {
        for &c in w {
            if !c.is_finite() {
                push(&mut out, "w", j, c, "finite w");
            }
        }
    }
    for &c in &state.w[0] {
        if c != 0.0 {
            push(&mut out, "w", 0, c, "boundary condition w(0)=0");
        }
    }
    for &c in &state.w[n] {
        if c != 0.0 {
            push(&mut out, "w", n, c, "boundary condition w(1)=0");
        }
    }
    out
}
