//! Semi-discrete right-hand side of the Lagrangian system
//!
//! ```text
//! v_t     = u_y
//! u_t     = (−p − |b|²/2 + λ u_y / v)_y
//! w_t     = (b + μ w_y / v)_y
//! (v b)_t = (w + ν b_y / v)_y
//! e_t     = (κ θ_y / v)_y + (−p + λ u_y / v) u_y + μ |w_y|² / v + ν |b_y|² / v
//! ```
//!
//! on the staggered mass grid. Stresses and shear fluxes live on cells,
//! heat and induction fluxes on nodes. The free faces carry zero total
//! stress, zero heat flux, `w = 0` and (via odd ghost reflection) `b = 0`.
//!
//! The Joule heating of a cell is the average of the nodal dissipation
//! densities `|b_y|²/v̄` of its two nodes, so the semi-discrete total energy
//! (internal + kinetic + magnetic, with node masses `dy` and `dy/2`) is
//! conserved exactly.

use crate::error::{PhysicsError, StepError};
use crate::grid_state::{Grid, SimState};
use crate::physics::{conductivity_unchecked, pressure_unchecked, PhysParams};

/// Which terms of the system are assembled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Full radiative MHD.
    #[default]
    Mhd,
    /// Radiative Navier–Stokes–Fourier: transverse fields are never touched.
    RadiativeNs,
}

/// Average of `κ/v` onto an interior node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterfaceMean {
    #[default]
    Arithmetic,
    Harmonic,
}

impl InterfaceMean {
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            InterfaceMean::Arithmetic => 0.5 * (a + b),
            InterfaceMean::Harmonic => 2.0 * a * b / (a + b),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Scheme {
    pub model: Model,
    pub kappa_mean: InterfaceMean,
}

/// Ghost-cell thermodynamic values and boundary-node velocities imposed on
/// one side of the domain.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundaryValues {
    pub v: f64,
    pub theta: f64,
    pub b: [f64; 2],
    pub u: f64,
    pub w: [f64; 2],
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PrescribedBoundary {
    pub left: BoundaryValues,
    pub right: BoundaryValues,
}

/// Boundary treatment used by [`compute_rhs_with`].
#[derive(Clone, Copy, Debug, Default)]
pub enum Closure<'a> {
    /// Physical free boundary.
    #[default]
    Free,
    /// Dirichlet data: boundary-node velocities are pinned (their rates are
    /// zero) and fluxes through the end faces use the given ghost cells.
    Prescribed(&'a PrescribedBoundary),
}

/// Total longitudinal stress on a free face.
pub const FREE_FACE_STRESS: f64 = 0.0;
/// Heat flux through an insulated face.
pub const INSULATED_HEAT_FLUX: f64 = 0.0;

#[derive(Clone, Debug, PartialEq)]
pub struct StateDerivative {
    pub dv: Vec<f64>,
    pub de: Vec<f64>,
    /// Rate of the conservative magnetic variable `v b`.
    pub dm: Vec<[f64; 2]>,
    pub du: Vec<f64>,
    pub dw: Vec<[f64; 2]>,
    /// Total longitudinal stress σ per cell.
    pub stress: Vec<f64>,
    /// Stress applied on the left and right end faces.
    pub face_stress: [f64; 2],
    /// Heat flux `(κ/v)̄ θ_y` per node.
    pub heat_flux: Vec<f64>,
    /// `b + μ w_y / v` per cell.
    pub shear_flux: Vec<[f64; 2]>,
    /// `w + ν b_y / v̄` per node.
    pub induction_flux: Vec<[f64; 2]>,
}

impl StateDerivative {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.n_cells();
        Self {
            dv: vec![0.0; n],
            de: vec![0.0; n],
            dm: vec![[0.0; 2]; n],
            du: vec![0.0; n + 1],
            dw: vec![[0.0; 2]; n + 1],
            stress: vec![0.0; n],
            face_stress: [FREE_FACE_STRESS; 2],
            heat_flux: vec![0.0; n + 1],
            shear_flux: vec![[0.0; 2]; n],
            induction_flux: vec![[0.0; 2]; n + 1],
        }
    }
}

#[inline]
fn check_cell(i: usize, v: f64, theta: f64) -> Result<(), StepError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(StepError::Physics {
            index: i,
            source: PhysicsError::Domain { quantity: "v", value: v },
        });
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(StepError::Physics {
            index: i,
            source: PhysicsError::Domain { quantity: "theta", value: theta },
        });
    }
    Ok(())
}

/// σ_i = −p_i − |b_i|²/2 + λ (u_y)_i / v_i.
pub fn stress_cells(state: &SimState, params: &PhysParams, grid: &Grid) -> Result<Vec<f64>, StepError> {
    let dy = grid.dy();
    (0..grid.n_cells())
        .map(|i| {
            let (v, th) = (state.v[i], state.theta[i]);
            check_cell(i, v, th)?;
            let b = state.b[i];
            let uy = (state.u[i + 1] - state.u[i]) / dy;
            Ok(-pressure_unchecked(params, v, th) - 0.5 * (b[0] * b[0] + b[1] * b[1])
                + params.lambda * uy / v)
        })
        .collect()
}

/// Right-hand side with the free-boundary closure and the default scheme.
pub fn compute_rhs(
    state: &SimState,
    params: &PhysParams,
    grid: &Grid,
) -> Result<StateDerivative, StepError> {
    let mut out = StateDerivative::zeros(grid);
    compute_rhs_with(state, params, grid, &Scheme::default(), Closure::Free, &mut out)?;
    Ok(out)
}

pub fn compute_rhs_with(
    state: &SimState,
    params: &PhysParams,
    grid: &Grid,
    scheme: &Scheme,
    closure: Closure<'_>,
    out: &mut StateDerivative,
) -> Result<(), StepError> {
    match scheme.model {
        Model::Mhd => assemble::<true>(state, params, grid, scheme.kappa_mean, closure, out),
        Model::RadiativeNs => assemble::<false>(state, params, grid, scheme.kappa_mean, closure, out),
    }
}

fn assemble<const MHD: bool>(
    state: &SimState,
    params: &PhysParams,
    grid: &Grid,
    mean: InterfaceMean,
    closure: Closure<'_>,
    out: &mut StateDerivative,
) -> Result<(), StepError> {
    let n = grid.n_cells();
    let dy = grid.dy();
    let inv_dy = 1.0 / dy;
    let (lambda, mu, nu) = (params.lambda, params.mu, params.nu);

    debug_assert_eq!(state.v.len(), n);

    // Cell pass: stresses, work term and shear fluxes. `heat_flux` is used
    // as scratch for κ/v until the node pass overwrites it.
    let mut kv = std::mem::take(&mut out.heat_flux);
    kv.resize(n + 1, 0.0);
    for i in 0..n {
        let v = state.v[i];
        let th = state.theta[i];
        check_cell(i, v, th)?;
        let p = pressure_unchecked(params, v, th);
        let uy = (state.u[i + 1] - state.u[i]) * inv_dy;
        let visc = lambda * uy / v;
        out.dv[i] = uy;
        kv[i] = conductivity_unchecked(params, v, th) / v;
        if MHD {
            let b = state.b[i];
            out.stress[i] = -p - 0.5 * (b[0] * b[0] + b[1] * b[1]) + visc;
            let wy0 = (state.w[i + 1][0] - state.w[i][0]) * inv_dy;
            let wy1 = (state.w[i + 1][1] - state.w[i][1]) * inv_dy;
            out.shear_flux[i] = [b[0] + mu * wy0 / v, b[1] + mu * wy1 / v];
            out.de[i] = (-p + visc) * uy + mu * (wy0 * wy0 + wy1 * wy1) / v;
        } else {
            out.stress[i] = -p + visc;
            out.de[i] = (-p + visc) * uy;
        }
    }

    // Node pass: heat flux, magnetic gradient and induction flux.
    let mut heat = vec![0.0; n + 1];
    let mut joule = vec![0.0; n + 1];
    for j in 1..n {
        heat[j] = mean.combine(kv[j - 1], kv[j]) * (state.theta[j] - state.theta[j - 1]) * inv_dy;
    }
    let (ghost_l, ghost_r) = state.b_ghosts();
    let (bl, br, vbar_l, vbar_r) = match closure {
        Closure::Free => {
            heat[0] = INSULATED_HEAT_FLUX;
            heat[n] = INSULATED_HEAT_FLUX;
            (ghost_l, ghost_r, state.v[0], state.v[n - 1])
        }
        Closure::Prescribed(pb) => {
            let kl = conductivity_unchecked(params, pb.left.v, pb.left.theta) / pb.left.v;
            let kr = conductivity_unchecked(params, pb.right.v, pb.right.theta) / pb.right.v;
            heat[0] = mean.combine(kl, kv[0]) * (state.theta[0] - pb.left.theta) * inv_dy;
            heat[n] = mean.combine(kv[n - 1], kr) * (pb.right.theta - state.theta[n - 1]) * inv_dy;
            (
                pb.left.b,
                pb.right.b,
                0.5 * (pb.left.v + state.v[0]),
                0.5 * (state.v[n - 1] + pb.right.v),
            )
        }
    };
    if MHD {
        for j in 0..=n {
            let (lo, hi, vbar) = if j == 0 {
                (bl, state.b[0], vbar_l)
            } else if j == n {
                (state.b[n - 1], br, vbar_r)
            } else {
                (state.b[j - 1], state.b[j], 0.5 * (state.v[j - 1] + state.v[j]))
            };
            let by0 = (hi[0] - lo[0]) * inv_dy;
            let by1 = (hi[1] - lo[1]) * inv_dy;
            let w = state.w[j];
            out.induction_flux[j] = [w[0] + nu * by0 / vbar, w[1] + nu * by1 / vbar];
            joule[j] = (by0 * by0 + by1 * by1) / vbar;
        }
    }

    // Cell rates of e and v b.
    for i in 0..n {
        let mut de = (heat[i + 1] - heat[i]) * inv_dy + out.de[i];
        if MHD {
            de += nu * 0.5 * (joule[i] + joule[i + 1]);
            let g0 = out.induction_flux[i];
            let g1 = out.induction_flux[i + 1];
            out.dm[i] = [(g1[0] - g0[0]) * inv_dy, (g1[1] - g0[1]) * inv_dy];
        }
        out.de[i] = de;
    }

    // Node rates of u and w.
    for j in 1..n {
        out.du[j] = (out.stress[j] - out.stress[j - 1]) * inv_dy;
        if MHD {
            let h0 = out.shear_flux[j - 1];
            let h1 = out.shear_flux[j];
            out.dw[j] = [(h1[0] - h0[0]) * inv_dy, (h1[1] - h0[1]) * inv_dy];
        }
    }
    out.dw[0] = [0.0; 2];
    out.dw[n] = [0.0; 2];
    match closure {
        Closure::Free => {
            out.face_stress = [FREE_FACE_STRESS, FREE_FACE_STRESS];
            let half = 0.5 * dy;
            out.du[0] = (out.stress[0] - out.face_stress[0]) / half;
            out.du[n] = (out.face_stress[1] - out.stress[n - 1]) / half;
        }
        Closure::Prescribed(_) => {
            out.face_stress = [f64::NAN; 2];
            out.du[0] = 0.0;
            out.du[n] = 0.0;
        }
    }
    out.heat_flux = heat;
    Ok(())
}

/// How far the boundary conditions are from holding exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundaryResiduals {
    /// max |w| over the two boundary nodes.
    pub w: f64,
    /// max |heat flux| over the two end faces.
    pub heat_flux: f64,
    /// max |total stress| over the two end faces.
    pub face_stress: f64,
    /// max |b| on the walls, reconstructed as the ghost/cell average.
    pub b_wall: f64,
}

impl BoundaryResiduals {
    pub fn max(self, other: Self) -> Self {
        Self {
            w: self.w.max(other.w),
            heat_flux: self.heat_flux.max(other.heat_flux),
            face_stress: self.face_stress.max(other.face_stress),
            b_wall: self.b_wall.max(other.b_wall),
        }
    }

    /// Residuals of the free-boundary closure given the state and the fluxes
    /// that produced it.
    pub fn measure(state: &SimState, rhs: &StateDerivative) -> Self {
        let n = state.n_cells();
        Self::from_parts(state, [rhs.heat_flux[0], rhs.heat_flux[n]], rhs.face_stress)
    }

    pub(crate) fn from_parts(state: &SimState, heat: [f64; 2], stress: [f64; 2]) -> Self {
        let n = state.n_cells();
        let wmax = |w: [f64; 2]| w[0].abs().max(w[1].abs());
        let (gl, gr) = state.b_ghosts();
        let wall = |g: [f64; 2], b: [f64; 2]| {
            (0.5 * (g[0] + b[0])).abs().max((0.5 * (g[1] + b[1])).abs())
        };
        Self {
            w: wmax(state.w[0]).max(wmax(state.w[n])),
            heat_flux: heat[0].abs().max(heat[1].abs()),
            face_stress: stress[0].abs().max(stress[1].abs()),
            b_wall: wall(gl, state.b[0]).max(wall(gr, state.b[n - 1])),
        }
    }
}
