//! Equation of state, internal energy and transport coefficients.
//!
//! The gas is a mixture of an ideal gas and equilibrium radiation:
//!
//! ```text
//! p = R θ / v + (a/3) θ⁴          e = C_v θ + a v θ⁴
//! ```
//!
//! with `v = 1/ρ` the specific volume. Everything here is a pure function of
//! `(PhysParams, v, θ)`.

use serde::{Deserialize, Serialize};

use crate::error::PhysicsError;

/// Closed form used for the heat conductivity κ(v, θ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KappaForm {
    /// κ = κ₁(1 + θ^q). Sits on the lower edge of the envelope
    /// κ₁(1 + θ^q) ≤ κ ≤ κ₂(1 + θ^q).
    #[default]
    BoundedPower,
    /// κ = κ₁ + κ₂ θ^q v, i.e. κ₁ + κ₂ θ^q / ρ.
    SumOverRho,
}

/// Physical constants of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysParams {
    /// Gas constant.
    pub r_gas: f64,
    /// Heat capacity at constant volume.
    pub c_v: f64,
    /// Radiation constant.
    pub a_rad: f64,
    /// Longitudinal viscosity λ = λ' + 2μ.
    pub lambda: f64,
    /// Shear viscosity.
    pub mu: f64,
    /// Magnetic diffusivity.
    pub nu: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Conductivity temperature exponent.
    pub q: f64,
    pub kappa_form: KappaForm,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            r_gas: 1.0,
            c_v: 1.0,
            a_rad: 0.1,
            lambda: 0.5,
            mu: 0.5,
            nu: 0.5,
            kappa1: 0.2,
            kappa2: 0.4,
            q: 2.0,
            kappa_form: KappaForm::BoundedPower,
        }
    }
}

/// Partial derivatives of the equation of state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EosDerivatives {
    pub p_theta: f64,
    pub p_v: f64,
    pub e_theta: f64,
}

impl PhysParams {
    /// Returns `(key, reason)` pairs for every violated parameter constraint.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let positive = [
            ("r_gas", self.r_gas),
            ("c_v", self.c_v),
            ("a_rad", self.a_rad),
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("nu", self.nu),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                out.push((key, format!("must be > 0 (got {value})")));
            }
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            out.push(("q", format!("must be ≥ 0 (got {})", self.q)));
        }
        if self.kappa_form == KappaForm::BoundedPower && self.kappa2 < self.kappa1 {
            out.push((
                "kappa2",
                format!(
                    "must be ≥ kappa1 for the bounded-power form (got {} < {})",
                    self.kappa2, self.kappa1
                ),
            ));
        }
        out
    }
}

#[inline]
fn check_state(v: f64, theta: f64) -> Result<(), PhysicsError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(PhysicsError::Domain { quantity: "v", value: v });
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(PhysicsError::Domain { quantity: "theta", value: theta });
    }
    Ok(())
}

/// `p = Rθ/v + (a/3)θ⁴`.
pub fn pressure(params: &PhysParams, v: f64, theta: f64) -> Result<f64, PhysicsError> {
    check_state(v, theta)?;
    Ok(pressure_unchecked(params, v, theta))
}

#[inline]
pub(crate) fn pressure_unchecked(params: &PhysParams, v: f64, theta: f64) -> f64 {
    let t2 = theta * theta;
    params.r_gas * theta / v + params.a_rad / 3.0 * t2 * t2
}

/// `e = C_v θ + a v θ⁴`.
pub fn internal_energy(params: &PhysParams, v: f64, theta: f64) -> Result<f64, PhysicsError> {
    check_state(v, theta)?;
    Ok(internal_energy_unchecked(params, v, theta))
}

#[inline]
pub(crate) fn internal_energy_unchecked(params: &PhysParams, v: f64, theta: f64) -> f64 {
    let t2 = theta * theta;
    params.c_v * theta + params.a_rad * v * t2 * t2
}

pub fn eos_derivatives(
    params: &PhysParams,
    v: f64,
    theta: f64,
) -> Result<EosDerivatives, PhysicsError> {
    check_state(v, theta)?;
    Ok(eos_derivatives_unchecked(params, v, theta))
}

#[inline]
pub(crate) fn eos_derivatives_unchecked(params: &PhysParams, v: f64, theta: f64) -> EosDerivatives {
    let t3 = theta * theta * theta;
    EosDerivatives {
        p_theta: params.r_gas / v + 4.0 * params.a_rad / 3.0 * t3,
        p_v: -params.r_gas * theta / (v * v),
        e_theta: params.c_v + 4.0 * params.a_rad * v * t3,
    }
}

#[inline]
fn theta_pow_q(q: f64, theta: f64) -> f64 {
    if q == 0.0 {
        1.0
    } else if q == q.trunc() && q <= 16.0 {
        theta.powi(q as i32)
    } else {
        theta.powf(q)
    }
}

/// Heat conductivity κ(v, θ) in the configured closed form.
pub fn conductivity(params: &PhysParams, v: f64, theta: f64) -> Result<f64, PhysicsError> {
    check_state(v, theta)?;
    Ok(conductivity_unchecked(params, v, theta))
}

#[inline]
pub(crate) fn conductivity_unchecked(params: &PhysParams, v: f64, theta: f64) -> f64 {
    let tq = theta_pow_q(params.q, theta);
    match params.kappa_form {
        KappaForm::BoundedPower => params.kappa1 * (1.0 + tq),
        KappaForm::SumOverRho => params.kappa1 + params.kappa2 * tq * v,
    }
}

/// `(∂κ/∂θ, ∂κ/∂v)`; used to assemble manufactured source terms.
pub fn conductivity_derivatives(
    params: &PhysParams,
    v: f64,
    theta: f64,
) -> Result<(f64, f64), PhysicsError> {
    check_state(v, theta)?;
    let q = params.q;
    let dtq = if q == 0.0 { 0.0 } else { q * theta.powf(q - 1.0) };
    Ok(match params.kappa_form {
        KappaForm::BoundedPower => (params.kappa1 * dtq, 0.0),
        KappaForm::SumOverRho => (params.kappa2 * dtq * v, params.kappa2 * theta_pow_q(q, theta)),
    })
}

const MAX_NEWTON: usize = 50;

/// Inverts `e = C_v θ + a v θ⁴` for θ ≥ 0.
///
/// Newton starts from the smaller of the two analytic upper bounds
/// `e/C_v` and `(e/(a v))^{1/4}`. Since the quartic is increasing and convex
/// the iterates decrease monotonically onto the root.
pub fn temperature_from_energy(params: &PhysParams, v: f64, e: f64) -> Result<f64, PhysicsError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(PhysicsError::Domain { quantity: "v", value: v });
    }
    if !(e >= 0.0) || !e.is_finite() {
        return Err(PhysicsError::Domain { quantity: "e", value: e });
    }
    let mut start = e / params.c_v;
    let av = params.a_rad * v;
    if av > 0.0 {
        start = start.min((e / av).sqrt().sqrt());
    }
    temperature_from_energy_near(params, v, e, start)
}

/// Newton inversion from an arbitrary non-negative starting point.
///
/// Any start is safe: from below the root the first step overshoots to the
/// right of it (convexity) and the iteration is monotone from there.
pub(crate) fn temperature_from_energy_near(
    params: &PhysParams,
    v: f64,
    e: f64,
    start: f64,
) -> Result<f64, PhysicsError> {
    if e == 0.0 {
        return Ok(0.0);
    }
    let av = params.a_rad * v;
    let tol = 1e-12 * e.max(1.0);
    let mut theta = start.max(0.0);
    for _ in 0..MAX_NEWTON {
        let t2 = theta * theta;
        let f = params.c_v * theta + av * t2 * t2 - e;
        let df = params.c_v + 4.0 * av * t2 * theta;
        let step = f / df;
        let next = theta - step;
        if step.abs() <= 4.0 * f64::EPSILON * theta || f == 0.0 {
            let theta = next.max(0.0);
            let t2 = theta * theta;
            let resid = params.c_v * theta + av * t2 * t2 - e;
            if resid.abs() <= tol {
                return Ok(theta);
            }
            break;
        }
        theta = if next < 0.0 { 0.5 * theta } else { next };
    }
    bisect_temperature(params, v, e)
}

fn bisect_temperature(params: &PhysParams, v: f64, e: f64) -> Result<f64, PhysicsError> {
    let av = params.a_rad * v;
    let mut hi = e / params.c_v;
    if av > 0.0 {
        hi = hi.max((e / av).sqrt().sqrt());
    }
    let mut lo = 0.0_f64;
    let residual = |t: f64| {
        let t2 = t * t;
        params.c_v * t + av * t2 * t2 - e
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    if residual(theta).abs() <= 1e-12 * e.max(1.0) {
        Ok(theta)
    } else {
        Err(PhysicsError::NoConvergence { v, e })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(r: f64, c_v: f64, a: f64) -> PhysParams {
        PhysParams { r_gas: r, c_v, a_rad: a, ..PhysParams::default() }
    }

    #[test]
    fn pressure_examples() {
        let p = params(1.0, 1.0, 3.0);
        assert_eq!(pressure(&p, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(pressure(&p, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(pressure(&p, 2.0, 1.0).unwrap(), 1.5);
    }

    #[test]
    fn energy_examples() {
        assert_eq!(internal_energy(&params(1.0, 1.0, 1.0), 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(internal_energy(&params(1.0, 1.0, 1.0), 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(internal_energy(&params(1.0, 2.0, 1.0), 3.0, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn domain_errors() {
        let p = PhysParams::default();
        assert!(matches!(pressure(&p, 0.0, 1.0), Err(PhysicsError::Domain { quantity: "v", .. })));
        assert!(matches!(
            internal_energy(&p, 1.0, -1e-3),
            Err(PhysicsError::Domain { quantity: "theta", .. })
        ));
        assert!(eos_derivatives(&p, -1.0, 1.0).is_err());
        assert!(conductivity(&p, f64::NAN, 1.0).is_err());
        assert!(matches!(
            temperature_from_energy(&p, 1.0, -2.0),
            Err(PhysicsError::Domain { quantity: "e", .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let d = eos_derivatives(&params(1.0, 1.0, 0.0), 1.0, 5.0).unwrap();
        assert_eq!((d.p_theta, d.p_v, d.e_theta), (1.0, -5.0, 1.0));
        let d = eos_derivatives(&params(1.0, 1.0, 3.0), 1.0, 1.0).unwrap();
        assert_eq!((d.p_theta, d.p_v, d.e_theta), (5.0, -1.0, 13.0));
    }

    #[test]
    fn p_theta_matches_central_difference() {
        let p = PhysParams::default();
        let (v, theta) = (1.3, 0.7);
        let exact = eos_derivatives(&p, v, theta).unwrap().p_theta;
        let mut errs = Vec::new();
        for h in [1e-3, 1e-4] {
            let fd = (pressure(&p, v, theta + h).unwrap() - pressure(&p, v, theta - h).unwrap())
                / (2.0 * h);
            errs.push((fd - exact).abs());
        }
        // Second order: the error drops by ~100 for a 10x smaller step.
        assert!(errs[0] < 1e-5, "{errs:?}");
        assert!(errs[1] < errs[0] / 50.0 || errs[1] < 1e-11, "{errs:?}");
    }

    #[test]
    fn conductivity_examples() {
        let mut p = PhysParams { kappa1: 1.0, kappa2: 1.0, q: 0.0, ..PhysParams::default() };
        assert_eq!(conductivity(&p, 1.0, 123.0).unwrap(), 2.0);
        p.kappa1 = 2.0;
        p.kappa2 = 2.0;
        p.q = 3.0;
        assert_eq!(conductivity(&p, 1.0, 2.0).unwrap(), 18.0);
        let p = PhysParams {
            kappa1: 1.0,
            kappa2: 2.0,
            q: 1.0,
            kappa_form: KappaForm::SumOverRho,
            ..PhysParams::default()
        };
        assert_eq!(conductivity(&p, 2.0, 3.0).unwrap(), 13.0);
    }

    #[test]
    fn inversion_examples() {
        let p = params(1.0, 2.0, 0.0);
        assert_eq!(temperature_from_energy(&p, 1.0, 6.0).unwrap(), 3.0);
        let p = params(1.0, 1.0, 1.0);
        assert!((temperature_from_energy(&p, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(temperature_from_energy(&p, 1.0, 0.0).unwrap(), 0.0);

        // Bisection oracle for θ + θ⁴ = 17.5.
        let (mut lo, mut hi) = (0.0_f64, 17.5_f64);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if mid + mid.powi(4) > 17.5 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let theta = temperature_from_energy(&p, 1.0, 17.5).unwrap();
        assert!((theta - 0.5 * (lo + hi)).abs() < 1e-12, "{theta} vs {lo}");
    }

    #[test]
    fn newton_from_below_converges() {
        let p = PhysParams::default();
        let e = internal_energy(&p, 2.0, 3.0).unwrap();
        let theta = temperature_from_energy_near(&p, 2.0, e, 1e-3).unwrap();
        assert!((theta - 3.0).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn round_trip(v in 0.1f64..10.0, theta in 0.01f64..50.0, a in prop_oneof![Just(0.0), 1e-3f64..2.0]) {
            let p = params(1.0, 1.5, a);
            let e = internal_energy(&p, v, theta).unwrap();
            let back = temperature_from_energy(&p, v, e).unwrap();
            prop_assert!(((back - theta) / theta).abs() <= 1e-10);
        }

        #[test]
        fn monotone(v in 0.1f64..10.0, theta in 0.01f64..50.0) {
            let p = PhysParams::default();
            let dt = 1e-3 * theta;
            prop_assert!(internal_energy(&p, v, theta + dt).unwrap() > internal_energy(&p, v, theta).unwrap());
            prop_assert!(pressure(&p, v, theta + dt).unwrap() > pressure(&p, v, theta).unwrap());
            prop_assert!(pressure(&p, v * 1.01, theta).unwrap() < pressure(&p, v, theta).unwrap());
        }

        #[test]
        fn derivatives_match_finite_differences(v in 0.1f64..10.0, theta in 0.05f64..20.0) {
            let p = PhysParams::default();
            let h = 1e-5;
            let d = eos_derivatives(&p, v, theta).unwrap();
            let rel = |fd: f64, exact: f64| ((fd - exact) / exact).abs();
            let hv = h * v;
            let ht = h * theta;
            let p_t = (pressure(&p, v, theta + ht).unwrap() - pressure(&p, v, theta - ht).unwrap()) / (2.0 * ht);
            let p_v = (pressure(&p, v + hv, theta).unwrap() - pressure(&p, v - hv, theta).unwrap()) / (2.0 * hv);
            let e_t = (internal_energy(&p, v, theta + ht).unwrap() - internal_energy(&p, v, theta - ht).unwrap()) / (2.0 * ht);
            prop_assert!(rel(p_t, d.p_theta) <= 1e-6);
            prop_assert!(rel(p_v, d.p_v) <= 1e-6);
            prop_assert!(rel(e_t, d.e_theta) <= 1e-6);
        }

        #[test]
        fn bounded_power_envelope(v in 0.1f64..10.0, theta in 0.0f64..50.0, q in 0.0f64..6.0) {
            let p = PhysParams { kappa1: 0.3, kappa2: 0.9, q, ..PhysParams::default() };
            let k = conductivity(&p, v, theta).unwrap();
            let tq = theta.powf(q);
            prop_assert!(p.kappa1 * (1.0 + tq) <= k * (1.0 + 1e-15));
            prop_assert!(k <= p.kappa2 * (1.0 + tq));
        }
    }
}
