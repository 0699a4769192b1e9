//! Every bundled configuration parses and describes the scenario it is named after.

use std::path::Path;

use radmhd::config::{parse_config, RunConfig};
use radmhd::grid_state::InitialProfile;
use radmhd::physics::KappaForm;
use radmhd::stepper::StepMode;

fn load(name: &str) -> RunConfig {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.toml"));
    parse_config(&std::fs::read_to_string(p).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn every_bundled_config_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            parse_config(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert_eq!(count, 8);
}

#[test]
fn thermal_bump_matches_the_conservation_scenario() {
    let c = load("thermal_bump");
    assert_eq!(c.grid.n_cells(), 256);
    assert_eq!(c.control.mode, StepMode::ExplicitRk2);
    assert_eq!(c.time.t_end, 0.5);
    assert_eq!(c.init, InitialProfile::ThermalBump { theta0: 1.0, amp: 0.5 });
}

#[test]
fn constant_conductivity_variants() {
    for name in ["thermal_bump_q0", "hot_gas_q0"] {
        let p = load(name).physics;
        assert_eq!((p.q, p.kappa_form), (0.0, KappaForm::BoundedPower), "{name}");
        assert_eq!(p.kappa1, p.kappa2, "{name}");
    }
}

#[test]
fn hot_gas_is_a_uniform_rest_state() {
    let c = load("hot_gas");
    assert_eq!(c.init, InitialProfile::Uniform { v: 1.0, theta: 1.0 });
    assert_eq!((c.grid.n_cells(), c.time.t_end), (256, 1.0));
}

#[test]
fn imex_config_fixes_the_step() {
    let c = load("imex");
    assert_eq!((c.control.mode, c.control.dt_max, c.grid.n_cells()), (StepMode::Imex, 1e-5, 128));
}
