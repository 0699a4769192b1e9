//! Invariants that hold for arbitrary admissible states.

use proptest::prelude::*;

use radmhd::diagnostics::sample;
use radmhd::grid_state::{validate, Grid, SimState};
use radmhd::mms::{run_convergence, MmsCase};
use radmhd::physics::PhysParams;
use radmhd::stepper::{Integrator, StepControl};

const N: usize = 16;

fn state_strategy() -> impl Strategy<Value = SimState> {
    (
        prop::collection::vec(0.5f64..2.0, N),
        prop::collection::vec(0.5f64..2.0, N),
        prop::collection::vec(-0.3f64..0.3, N + 1),
        prop::collection::vec(-0.3f64..0.3, 2 * (N + 1)),
        prop::collection::vec(-0.3f64..0.3, 2 * N),
    )
        .prop_map(|(v, theta, u, w, b)| {
            let g = Grid::new(N).unwrap();
            let mut s = SimState::uniform(&g, 1.0, 1.0);
            s.v = v;
            s.theta = theta;
            s.u = u;
            for j in 1..N {
                s.w[j] = [w[2 * j], w[2 * j + 1]];
            }
            for i in 0..N {
                s.b[i] = [b[2 * i], b[2 * i + 1]];
            }
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dissipation_and_relative_entropy_are_non_negative(s in state_strategy()) {
        let g = Grid::new(N).unwrap();
        let d = sample(&s, None, &PhysParams::default(), &g, None);
        prop_assert!(d.v_rate >= 0.0);
        prop_assert!(d.u_func >= 0.0);
        prop_assert!(d.l_width > 0.0);
    }

    #[test]
    fn gradient_functionals_ignore_offsets(s in state_strategy(), c in -2.0f64..2.0) {
        let g = Grid::new(N).unwrap();
        let p = PhysParams::default();
        let a = sample(&s, None, &p, &g, None);
        let mut t = s.clone();
        t.u.iter_mut().for_each(|u| *u += c);
        let b = sample(&t, None, &p, &g, None);
        prop_assert!((a.z_now - b.z_now).abs() <= 1e-9 * a.z_now.max(1.0));
        prop_assert_eq!(a.y_now, b.y_now);
    }

    #[test]
    fn accepted_steps_keep_the_state_admissible(s in state_strategy()) {
        let g = Grid::new(N).unwrap();
        let p = PhysParams::default();
        let it = Integrator::new(&p, &g, StepControl::default());
        let dt = it.stable_dt(&s).unwrap();
        let (next, _) = it.step(&s, dt).unwrap();
        prop_assert!(validate(&next).is_empty());
    }
}

#[test]
fn zero_field_contributes_nothing_to_energy_or_dissipation() {
    let g = Grid::new(N).unwrap();
    let p = PhysParams::default();
    let mut s = SimState::uniform(&g, 1.0, 1.0);
    for i in 0..N {
        s.theta[i] = 1.0 + 0.1 * i as f64;
    }
    let base = sample(&s, None, &p, &g, None);
    s.b[3] = [0.2, 0.0];
    let with_b = sample(&s, None, &p, &g, None);
    assert!(with_b.e_total > base.e_total);
    assert!(with_b.v_rate > base.v_rate);
    assert_eq!(base.b2_int, 0.0);
}

/// Pure conduction with a forward-Euler step: `(ΔS − V dt)/dt` approaches
/// its spatial quadrature defect linearly in dt.
#[test]
fn discrete_entropy_defect_vanishes_with_dt() {
    let g = Grid::new(N).unwrap();
    let p = PhysParams { a_rad: 0.0, q: 0.0, kappa2: 0.2, ..PhysParams::default() };
    let mut s = SimState::uniform(&g, 1.0, 1.0);
    for i in 0..N {
        s.theta[i] = 1.0 + 0.3 * (std::f64::consts::PI * g.cell_center(i)).cos();
    }
    let it = Integrator::new(&p, &g, StepControl::default());
    let d0 = sample(&s, None, &p, &g, None);
    let defect = |dt: f64| {
        let (next, _) = it.step_forward_euler(&s, dt).unwrap();
        let d1 = sample(&next, None, &p, &g, None);
        (d1.s_entropy - d0.s_entropy - d0.v_rate * dt) / dt
    };
    let (e1, e2, e3) = (defect(1e-4), defect(5e-5), defect(2.5e-5));
    // The spatial part of the defect (quadrature of the entropy production)
    // does not depend on dt; the temporal part halves with dt.
    let temporal = [(e1 - e2).abs(), (e2 - e3).abs()];
    assert!(temporal[0] / temporal[1] > 1.8 && temporal[0] / temporal[1] < 2.2, "{temporal:?}");
}

#[test]
fn observed_order_is_invariant_under_velocity_shift() {
    let p = PhysParams::default();
    let c = StepControl::default();
    let a = run_convergence(&MmsCase::sine_bump(), &[16, 32], 0.02, &p, &c).unwrap();
    let b = run_convergence(&MmsCase::sine_bump().with_u_shift(0.5), &[16, 32], 0.02, &p, &c).unwrap();
    for f in radmhd::mms::FIELDS {
        let (oa, ob) = (a.min_order(f).unwrap(), b.min_order(f).unwrap());
        assert!((oa - ob).abs() < 0.05, "{f}: {oa} vs {ob}");
    }
}
