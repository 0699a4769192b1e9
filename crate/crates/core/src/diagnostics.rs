//! Monitored functionals and the estimate audit.
//!
//! Every integral is a midpoint sum over cells. Node quantities enter as the
//! average of their values on the two nodes of the cell; node gradients of
//! cell quantities (`θ_y`, `b_y`) are averaged the same way, with
//! `θ_y = 0` on the insulated ends and `b_y` taken from the odd ghost.
//!
//! | column | meaning |
//! |---|---|
//! | `E_total` | `∫ e + ½(u² + |w|² + v|b|²)` |
//! | `S_entropy` | `∫ C_v log θ + R log v + (4/3) a v θ³` |
//! | `U_func` | `∫ C_v(θ−1−log θ) + R(v−1−log v)` |
//! | `V_rate` | `∫ λu_y²/(vθ) + μ|w_y|²/(vθ) + ν|b_y|²/(vθ) + κθ_y²/(vθ²)` |
//! | `V_cum` | trapezoid-in-time integral of `V_rate` |
//! | `L_width` | `∫ v` |
//! | `X_cum` | `∫∫ (1+θ^q) θ_t²` with θ_t a backward difference |
//! | `Y_now` | `∫ (1+θ^{2q}) θ_y²` |
//! | `Z_now` | `∫ u_yy²` |

use std::fmt::Write as _;

use crate::grid_state::{Grid, SimState};
use crate::physics::{conductivity_unchecked, internal_energy_unchecked, PhysParams};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DiagSample {
    pub t: f64,
    pub e_total: f64,
    pub s_entropy: f64,
    pub u_func: f64,
    pub v_rate: f64,
    pub v_cum: f64,
    pub l_width: f64,
    pub x_cum: f64,
    pub y_now: f64,
    pub z_now: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta4_int: f64,
    pub b2_int: f64,
    pub uy_max: f64,
    /// Instantaneous `∫(1+θ^q)θ_t²`; the integrand of `X_cum`. Not written
    /// to the time series.
    pub x_rate: f64,
    /// `max θ^{q+4}` at this instant. Not written to the time series.
    pub theta_q4_max: f64,
    /// Time integral of `theta_q4_max`. Not written to the time series.
    pub theta_q4_cum: f64,
}

impl DiagSample {
    /// Column names of the time-series CSV, in order.
    pub const COLUMNS: [&'static str; 17] = [
        "t", "E_total", "S_entropy", "U_func", "V_rate", "V_cum", "L_width", "X_cum", "Y_now",
        "Z_now", "rho_min", "rho_max", "theta_min", "theta_max", "theta4_int", "b2_int", "uy_max",
    ];

    pub fn to_row(&self) -> [f64; 17] {
        [
            self.t, self.e_total, self.s_entropy, self.u_func, self.v_rate, self.v_cum,
            self.l_width, self.x_cum, self.y_now, self.z_now, self.rho_min, self.rho_max,
            self.theta_min, self.theta_max, self.theta4_int, self.b2_int, self.uy_max,
        ]
    }

    /// Inverse of [`to_row`](Self::to_row); fields outside the CSV are zero.
    pub fn from_row(r: &[f64; 17]) -> Self {
        Self {
            t: r[0],
            e_total: r[1],
            s_entropy: r[2],
            u_func: r[3],
            v_rate: r[4],
            v_cum: r[5],
            l_width: r[6],
            x_cum: r[7],
            y_now: r[8],
            z_now: r[9],
            rho_min: r[10],
            rho_max: r[11],
            theta_min: r[12],
            theta_max: r[13],
            theta4_int: r[14],
            b2_int: r[15],
            uy_max: r[16],
            ..Self::default()
        }
    }
}

/// Evaluates every monitored functional on `state`.
///
/// `prev` is the state one accepted step earlier (for θ_t) and `running` the
/// sample taken on that state (for the time integrals). Without them the
/// cumulative columns start at zero.
pub fn sample(
    state: &SimState,
    prev: Option<&SimState>,
    params: &PhysParams,
    grid: &Grid,
    running: Option<&DiagSample>,
) -> DiagSample {
    let n = grid.n_cells();
    let dy = grid.dy();
    let inv_dy = 1.0 / dy;
    let p = params;

    let theta_y = |j: usize| -> f64 {
        if j == 0 || j == n {
            0.0
        } else {
            (state.theta[j] - state.theta[j - 1]) * inv_dy
        }
    };
    let (gl, gr) = state.b_ghosts();
    // |b_y|² / v̄ and |b_y|² at node j.
    let b_grad = |j: usize| -> (f64, f64) {
        let (lo, hi, vbar) = if j == 0 {
            (gl, state.b[0], state.v[0])
        } else if j == n {
            (state.b[n - 1], gr, state.v[n - 1])
        } else {
            (state.b[j - 1], state.b[j], 0.5 * (state.v[j - 1] + state.v[j]))
        };
        let g0 = (hi[0] - lo[0]) * inv_dy;
        let g1 = (hi[1] - lo[1]) * inv_dy;
        let sq = g0 * g0 + g1 * g1;
        (sq / vbar, sq)
    };
    let u_yy = |j: usize| -> f64 {
        let c = j.clamp(1, n - 1);
        (state.u[c + 1] - 2.0 * state.u[c] + state.u[c - 1]) * inv_dy * inv_dy
    };

    let mut out = DiagSample {
        t: state.t,
        rho_min: f64::INFINITY,
        rho_max: 0.0,
        theta_min: f64::INFINITY,
        theta_max: 0.0,
        ..DiagSample::default()
    };
    let dt_prev = prev.map(|ps| state.t - ps.t).filter(|&d| d > 0.0);

    let mut ty_prev = theta_y(0);
    let mut bg_prev = b_grad(0);
    let mut uyy_prev = u_yy(0);
    for i in 0..n {
        let (v, th) = (state.v[i], state.theta[i]);
        let b = state.b[i];
        let b2 = b[0] * b[0] + b[1] * b[1];
        let u0 = state.u[i];
        let u1 = state.u[i + 1];
        let w0 = state.w[i];
        let w1 = state.w[i + 1];
        let kin = 0.25 * (u0 * u0 + u1 * u1 + w0[0] * w0[0] + w0[1] * w0[1] + w1[0] * w1[0] + w1[1] * w1[1]);
        let e = internal_energy_unchecked(p, v, th);
        out.e_total += (e + kin + 0.5 * v * b2) * dy;

        let t3 = th * th * th;
        out.s_entropy += (p.c_v * th.ln() + p.r_gas * v.ln() + 4.0 / 3.0 * p.a_rad * v * t3) * dy;
        out.u_func += (p.c_v * (th - 1.0 - th.ln()) + p.r_gas * (v - 1.0 - v.ln())) * dy;

        let ty_next = theta_y(i + 1);
        let bg_next = b_grad(i + 1);
        let uyy_next = u_yy(i + 1);
        let ty2 = 0.5 * (ty_prev * ty_prev + ty_next * ty_next);
        let joule = 0.5 * (bg_prev.0 + bg_next.0);
        let uy = (u1 - u0) * inv_dy;
        let wy0 = (w1[0] - w0[0]) * inv_dy;
        let wy1 = (w1[1] - w0[1]) * inv_dy;
        let kappa = conductivity_unchecked(p, v, th);
        out.v_rate += (p.lambda * uy * uy / (v * th)
            + p.mu * (wy0 * wy0 + wy1 * wy1) / (v * th)
            + p.nu * joule / th
            + kappa * ty2 / (v * th * th))
            * dy;

        out.l_width += v * dy;
        let tq = th.powf(p.q);
        out.y_now += (1.0 + tq * tq) * ty2 * dy;
        out.z_now += 0.5 * (uyy_prev * uyy_prev + uyy_next * uyy_next) * dy;

        if let (Some(ps), Some(dtp)) = (prev, dt_prev) {
            let tt = (th - ps.theta[i]) / dtp;
            let tm = 0.5 * (th + ps.theta[i]);
            out.x_rate += (1.0 + tm.powf(p.q)) * tt * tt * dy;
        }

        let rho = 1.0 / v;
        out.rho_min = out.rho_min.min(rho);
        out.rho_max = out.rho_max.max(rho);
        out.theta_min = out.theta_min.min(th);
        out.theta_max = out.theta_max.max(th);
        out.theta4_int += th * th * th * th * dy;
        out.b2_int += b2 * dy;
        out.uy_max = out.uy_max.max(uy.abs());
        out.theta_q4_max = out.theta_q4_max.max(tq * th * th * th * th);

        ty_prev = ty_next;
        bg_prev = bg_next;
        uyy_prev = uyy_next;
    }
    let _ = bg_prev.1;

    if let Some(r) = running {
        let h = state.t - r.t;
        out.v_cum = r.v_cum + 0.5 * h * (r.v_rate + out.v_rate);
        out.x_cum = r.x_cum + 0.5 * h * (r.x_rate + out.x_rate);
        out.theta_q4_cum = r.theta_q4_cum + 0.5 * h * (r.theta_q4_max + out.theta_q4_max);
    }
    out
}

/// Thresholds used by [`check_estimates`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed relative drift of `E_total`.
    pub energy: f64,
    /// Allowed entropy decrease per unit time.
    pub entropy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { energy: 1e-3, entropy: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Recorded for the report, never fails the audit.
    pub informational: bool,
    /// Headline number of the check.
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "audit over {} samples", self.samples);
        for c in &self.checks {
            let tag = match (c.informational, c.passed) {
                (true, _) => "INFO",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            let _ = writeln!(s, "[{tag}] {:<12} {:.6e}  {}", c.name, c.value, c.detail);
        }
        let _ = writeln!(s, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// Audits a time series against the conservation and entropy identities,
/// the interface growth bound and positivity.
pub fn check_estimates(series: &[DiagSample], tol: &Tolerances) -> AuditReport {
    let mut checks = Vec::new();
    if series.len() < 2 {
        checks.push(CheckResult {
            name: "series",
            passed: false,
            informational: false,
            value: series.len() as f64,
            detail: "need at least 2 samples".into(),
        });
        return AuditReport { samples: series.len(), checks };
    }
    let first = &series[0];

    // (a) energy conservation
    let mut worst = (0.0_f64, 0usize);
    let mut first_bad = None;
    for (k, s) in series.iter().enumerate() {
        let drift = ((s.e_total - first.e_total) / first.e_total).abs();
        let drift = if drift.is_nan() { f64::INFINITY } else { drift };
        if drift > worst.0 {
            worst = (drift, k);
        }
        if drift > tol.energy && first_bad.is_none() {
            first_bad = Some(k);
        }
    }
    checks.push(CheckResult {
        name: "energy",
        passed: first_bad.is_none(),
        informational: false,
        value: worst.0,
        detail: match first_bad {
            None => format!("max relative drift at sample {} (t = {:.6e}), tol {:e}", worst.1, series[worst.1].t, tol.energy),
            Some(k) => format!("relative drift exceeds {:e} at sample {} (t = {:.6e})", tol.energy, k, series[k].t),
        },
    });

    // (b) entropy production
    let mut resid = 0.0_f64;
    let mut worst_drop = 0.0_f64;
    let mut bad = None;
    for (k, w) in series.windows(2).enumerate() {
        let dt = w[1].t - w[0].t;
        let ds = w[1].s_entropy - w[0].s_entropy;
        let dv = w[1].v_cum - w[0].v_cum;
        resid = resid.max((ds - dv).abs());
        worst_drop = worst_drop.min(ds + tol.entropy * dt);
        if (ds < -tol.entropy * dt || ds.is_nan()) && bad.is_none() {
            bad = Some(k + 1);
        }
    }
    checks.push(CheckResult {
        name: "entropy",
        passed: bad.is_none(),
        informational: false,
        value: resid,
        detail: match bad {
            None => format!("non-decreasing within {:e}·dt; max |dS - int V dt| per interval shown", tol.entropy),
            Some(k) => format!("entropy decreased at sample {} (t = {:.6e}, margin {:.3e})", k, series[k].t, worst_drop),
        },
    });

    // (c) interface growth
    let mut c_fit = 0.0_f64;
    let mut nonpos = None;
    let mut increasing = true;
    for (k, s) in series.iter().enumerate() {
        c_fit = c_fit.max(s.l_width / (1.0 + s.t));
        if !(s.l_width > 0.0) && nonpos.is_none() {
            nonpos = Some(k);
        }
        if k > 0 && s.l_width <= series[k - 1].l_width {
            increasing = false;
        }
    }
    checks.push(CheckResult {
        name: "interface",
        passed: nonpos.is_none(),
        informational: false,
        value: c_fit,
        detail: match nonpos {
            None => format!(
                "L(t)/(1+t) <= C_fit; width {}",
                if increasing { "strictly increasing" } else { "not monotone" }
            ),
            Some(k) => format!("non-positive width at sample {k}"),
        },
    });

    // (d) positivity
    let theta_min = series.iter().map(|s| s.theta_min).fold(f64::INFINITY, f64::min);
    let rho_min = series.iter().map(|s| s.rho_min).fold(f64::INFINITY, f64::min);
    checks.push(CheckResult {
        name: "positivity",
        passed: theta_min > 0.0 && rho_min > 0.0,
        informational: false,
        value: theta_min.min(rho_min),
        detail: format!("min theta {theta_min:.6e}, min rho {rho_min:.6e}"),
    });

    // (e) U + ∫V trend
    let trend: Vec<f64> = series.iter().map(|s| s.u_func + s.v_cum).collect();
    let max = trend.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let monotone = trend.windows(2).all(|w| w[1] >= w[0]);
    checks.push(CheckResult {
        name: "u+int_v",
        passed: true,
        informational: true,
        value: max,
        detail: format!(
            "max of U + int V dt; final {:.6e}; {}",
            trend[trend.len() - 1],
            if monotone { "non-decreasing" } else { "not monotone" }
        ),
    });

    AuditReport { samples: series.len(), checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn unit() -> PhysParams {
        PhysParams { r_gas: 1.0, c_v: 1.0, a_rad: 1.0, ..PhysParams::default() }
    }

    #[test]
    fn rest_state_values() {
        let g = Grid::new(16).unwrap();
        let s = SimState::uniform(&g, 1.0, 1.0);
        let d = sample(&s, None, &unit(), &g, None);
        assert!((d.e_total - 2.0).abs() < 1e-14);
        assert!(d.u_func.abs() < 1e-15);
        assert!((d.s_entropy - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(d.v_rate, 0.0);
        assert!((d.l_width - 1.0).abs() < 1e-14);
        assert_eq!((d.y_now, d.z_now), (0.0, 0.0));
    }

    #[test]
    fn relative_entropy_of_expanded_rest_state() {
        let g = Grid::new(8).unwrap();
        let s = SimState::uniform(&g, E, 1.0);
        let d = sample(&s, None, &unit(), &g, None);
        assert!((d.u_func - (E - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn energy_of_rest_state_is_internal_energy() {
        let p = PhysParams::default();
        let g = Grid::new(8).unwrap();
        for (v, th) in [(0.3, 2.0), (1.0, 1.0), (4.0, 0.1)] {
            let d = sample(&SimState::uniform(&g, v, th), None, &p, &g, None);
            let e = internal_energy_unchecked(&p, v, th);
            assert!((d.e_total - e).abs() < 1e-13 * e);
        }
    }

    /// Composite Simpson rule on [0, 1].
    fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn y_functional_matches_quadrature_of_profile() {
        let p = PhysParams::default();
        let g = Grid::new(64).unwrap();
        let prof = crate::grid_state::InitialProfile::ThermalBump { theta0: 1.0, amp: 0.5 };
        let s = crate::grid_state::make_initial_state(&g, &prof, &p).unwrap();
        let d = sample(&s, None, &p, &g, None);
        let exact = simpson(
            |y| {
                let th: f64 = 1.0 + 0.5 * (PI * y).cos();
                let ty = -0.5 * PI * (PI * y).sin();
                (1.0 + th.powf(2.0 * p.q)) * ty * ty
            },
            20_000,
        );
        assert!(((d.y_now - exact) / exact).abs() < 1e-3, "{} vs {exact}", d.y_now);
    }

    #[test]
    fn zero_field_contributes_nothing() {
        let p = PhysParams::default();
        let g = Grid::new(8).unwrap();
        let mut s = SimState::uniform(&g, 1.0, 1.0);
        for j in 0..=8 {
            s.u[j] = 0.1 * g.node(j);
        }
        let d = sample(&s, None, &p, &g, None);
        let e = internal_energy_unchecked(&p, 1.0, 1.0);
        let kin: f64 = (0..=8).map(|j| g.node_mass(j) * 0.5 * s.u[j] * s.u[j]).sum();
        assert!((d.e_total - e - kin).abs() < 1e-15);
        assert!((d.v_rate - p.lambda * 0.01).abs() < 1e-15);
        assert_eq!(d.b2_int, 0.0);
    }

    #[test]
    fn derivative_functionals_ignore_velocity_offsets() {
        let p = PhysParams::default();
        let g = Grid::new(16).unwrap();
        let mut s = SimState::uniform(&g, 1.0, 1.0);
        for j in 0..=16 {
            s.u[j] = (PI * g.node(j)).sin();
        }
        let a = sample(&s, None, &p, &g, None);
        s.u.iter_mut().for_each(|u| *u += 3.0);
        let b = sample(&s, None, &p, &g, None);
        assert!((a.z_now - b.z_now).abs() < 1e-9 * a.z_now);
        assert_eq!(a.y_now, b.y_now);
        assert!((a.v_rate - b.v_rate).abs() < 1e-12 * a.v_rate);
    }

    #[test]
    fn cumulative_columns_use_trapezoid() {
        let p = PhysParams::default();
        let g = Grid::new(8).unwrap();
        let s0 = SimState::uniform(&g, 1.0, 1.0);
        let mut s1 = s0.clone();
        s1.t = 0.5;
        s1.theta.iter_mut().for_each(|t| *t = 1.1);
        let d0 = sample(&s0, None, &p, &g, None);
        assert_eq!(d0.x_cum, 0.0);
        let d1 = sample(&s1, Some(&s0), &p, &g, Some(&d0));
        let rate = (1.0 + 1.05_f64.powf(p.q)) * (0.1_f64 / 0.5).powi(2);
        assert!((d1.x_rate - rate).abs() < 1e-12);
        assert!((d1.x_cum - 0.25 * rate).abs() < 1e-12);
    }

    fn constant_series() -> Vec<DiagSample> {
        let p = PhysParams::default();
        let g = Grid::new(8).unwrap();
        let mut out = Vec::new();
        let mut prev: Option<DiagSample> = None;
        for k in 0..5 {
            let mut s = SimState::uniform(&g, 1.0, 1.0);
            s.t = k as f64 * 0.1;
            let d = sample(&s, None, &p, &g, prev.as_ref());
            prev = Some(d);
            out.push(d);
        }
        out
    }

    #[test]
    fn constant_series_passes_with_zero_residuals() {
        let r = check_estimates(&constant_series(), &Tolerances::default());
        assert!(r.passed(), "{}", r.render());
        assert_eq!(r.check("energy").unwrap().value, 0.0);
        assert_eq!(r.check("entropy").unwrap().value, 0.0);
    }

    #[test]
    fn corrupted_energy_is_named() {
        let mut series = constant_series();
        series[3].e_total *= 1.01;
        let r = check_estimates(&series, &Tolerances::default());
        assert!(!r.passed());
        let c = r.check("energy").unwrap();
        assert!(!c.passed);
        assert!(c.detail.contains("sample 3"), "{}", c.detail);
    }

    #[test]
    fn entropy_drop_fails() {
        let mut series = constant_series();
        series[2].s_entropy -= 1e-3;
        let r = check_estimates(&series, &Tolerances::default());
        assert!(!r.check("entropy").unwrap().passed);
    }

    #[test]
    fn short_series_fails() {
        assert!(!check_estimates(&constant_series()[..1], &Tolerances::default()).passed());
    }

    #[test]
    fn row_round_trip() {
        let s = constant_series()[2];
        let back = DiagSample::from_row(&s.to_row());
        assert_eq!(back.to_row(), s.to_row());
    }
}
