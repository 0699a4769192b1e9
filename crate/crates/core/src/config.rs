//! Run configuration in TOML.
//!
//! ```toml
//! [physics]          # every key optional, defaults from PhysParams
//! q = 2.0
//! kappa_form = "bounded-power"
//!
//! [grid]
//! n_cells = 256      # required
//!
//! [stepper]          # optional
//! mode = "explicit-rk2"
//! cfl = 0.4
//!
//! [init]             # optional, default uniform v = θ = 1
//! kind = "thermal-bump"
//! amp = 0.5
//!
//! [time]
//! t_end = 0.5        # required
//! sample_interval = 0.005
//!
//! [output]           # optional
//! directory = "out"
//! ```
//!
//! Unknown keys are rejected.

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{ConfigError, ConfigIssue};
use crate::grid_state::{make_initial_state, Grid, InitialProfile};
use crate::physics::{KappaForm, PhysParams};
use crate::spatial_ops::{InterfaceMean, Model, Scheme};
use crate::stepper::{StepControl, StepMode};

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    physics: Option<RawPhysics>,
    grid: Option<RawGrid>,
    stepper: Option<RawStepper>,
    init: Option<InitialProfile>,
    time: Option<RawTime>,
    output: Option<RawOutput>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    r_gas: Option<f64>,
    c_v: Option<f64>,
    a_rad: Option<f64>,
    lambda: Option<f64>,
    mu: Option<f64>,
    nu: Option<f64>,
    kappa1: Option<f64>,
    kappa2: Option<f64>,
    q: Option<f64>,
    kappa_form: Option<KappaForm>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_cells: Option<i64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawStepper {
    mode: Option<StepMode>,
    cfl: Option<f64>,
    dt_max: Option<f64>,
    dt_min: Option<f64>,
    picard_sweeps: Option<i64>,
    interface_mean: Option<InterfaceMean>,
    model: Option<Model>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: Option<f64>,
    sample_interval: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    write_snapshots: Option<bool>,
    snapshot_interval: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub sample_interval: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub write_snapshots: bool,
    pub snapshot_interval: f64,
}

/// A fully validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub physics: PhysParams,
    pub grid: Grid,
    pub control: StepControl,
    pub scheme: Scheme,
    pub init: InitialProfile,
    pub time: TimeConfig,
    pub output: OutputConfig,
}

/// Number of time-series rows a run writes when `sample_interval` is absent.
pub const DEFAULT_SAMPLES: f64 = 100.0;

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn schema_issue(err: serde_path_to_error::Error<toml::de::Error>) -> ConfigIssue {
    let path = err.path().to_string();
    let message = err.inner().message().to_string();
    // Unknown keys fail while the key itself is read, so the reported path
    // ends at the enclosing table.
    let key = message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
        .map(str::to_string);
    let path = match (key, path.as_str()) {
        (Some(k), "." | "") => k,
        (Some(k), p) if !p.ends_with(&k) => format!("{p}.{k}"),
        (_, p) => p.to_string(),
    };
    ConfigIssue::new(path, message)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Syntax { line, column, message: e.message().to_string() }
    })?;
    let raw: RawConfig = serde_path_to_error::deserialize(toml::Value::Table(table))
        .map_err(|e| ConfigError::Invalid(vec![schema_issue(e)]))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut issues = Vec::new();

    let d = PhysParams::default();
    let rp = raw.physics.unwrap_or_default();
    let physics = PhysParams {
        r_gas: rp.r_gas.unwrap_or(d.r_gas),
        c_v: rp.c_v.unwrap_or(d.c_v),
        a_rad: rp.a_rad.unwrap_or(d.a_rad),
        lambda: rp.lambda.unwrap_or(d.lambda),
        mu: rp.mu.unwrap_or(d.mu),
        nu: rp.nu.unwrap_or(d.nu),
        kappa1: rp.kappa1.unwrap_or(d.kappa1),
        kappa2: rp.kappa2.unwrap_or(d.kappa2),
        q: rp.q.unwrap_or(d.q),
        kappa_form: rp.kappa_form.unwrap_or(d.kappa_form),
    };
    for (key, reason) in physics.violations() {
        issues.push(ConfigIssue::new(format!("physics.{key}"), reason));
    }

    let grid = match raw.grid.and_then(|g| g.n_cells) {
        None => {
            issues.push(ConfigIssue::new("grid.n_cells", "required"));
            None
        }
        Some(n) if n < 4 => {
            issues.push(ConfigIssue::new("grid.n_cells", format!("must be ≥ 4 (got {n})")));
            None
        }
        Some(n) => Grid::new(n as usize).map_err(|e| issues.push(e)).ok(),
    };

    let dc = StepControl::default();
    let rs = raw.stepper.unwrap_or_default();
    let control = StepControl {
        mode: rs.mode.unwrap_or(dc.mode),
        cfl: rs.cfl.unwrap_or(dc.cfl),
        dt_max: rs.dt_max.unwrap_or(dc.dt_max),
        dt_min: rs.dt_min.unwrap_or(dc.dt_min),
        picard_sweeps: rs.picard_sweeps.unwrap_or(1).clamp(0, 64) as usize,
    };
    if !(control.cfl > 0.0 && control.cfl <= 1.0) {
        issues.push(ConfigIssue::new("stepper.cfl", format!("must lie in (0, 1] (got {})", control.cfl)));
    }
    if !(control.dt_max > 0.0 && control.dt_max.is_finite()) {
        issues.push(ConfigIssue::new("stepper.dt_max", format!("must be > 0 (got {})", control.dt_max)));
    }
    if !(control.dt_min > 0.0 && control.dt_min < control.dt_max) {
        issues.push(ConfigIssue::new(
            "stepper.dt_min",
            format!("must satisfy 0 < dt_min < dt_max (got {})", control.dt_min),
        ));
    }
    if let Some(k) = rs.picard_sweeps {
        if !(1..=2).contains(&k) {
            issues.push(ConfigIssue::new("stepper.picard_sweeps", format!("must be 1 or 2 (got {k})")));
        }
    }
    let scheme = Scheme { model: rs.model.unwrap_or_default(), kappa_mean: rs.interface_mean.unwrap_or_default() };

    let init = raw.init.unwrap_or(InitialProfile::Uniform { v: 1.0, theta: 1.0 });
    if let Some(g) = &grid {
        if let Err(e) = make_initial_state(g, &init, &physics) {
            issues.push(e);
        }
    }

    let rt = raw.time.unwrap_or_default();
    let t_end = match rt.t_end {
        None => {
            issues.push(ConfigIssue::new("time.t_end", "required"));
            1.0
        }
        Some(t) => {
            if !(t > 0.0 && t.is_finite()) {
                issues.push(ConfigIssue::new("time.t_end", format!("must be > 0 (got {t})")));
            }
            t
        }
    };
    let sample_interval = rt.sample_interval.unwrap_or(t_end / DEFAULT_SAMPLES);
    if !(sample_interval > 0.0 && sample_interval.is_finite()) {
        issues.push(ConfigIssue::new("time.sample_interval", format!("must be > 0 (got {sample_interval})")));
    }

    let ro = raw.output.unwrap_or_default();
    let output = OutputConfig {
        directory: ro.directory.unwrap_or_else(|| PathBuf::from("out")),
        write_snapshots: ro.write_snapshots.unwrap_or(false),
        snapshot_interval: ro.snapshot_interval.unwrap_or(t_end),
    };
    if !(output.snapshot_interval > 0.0) {
        issues.push(ConfigIssue::new(
            "output.snapshot_interval",
            format!("must be > 0 (got {})", output.snapshot_interval),
        ));
    }

    match grid {
        Some(grid) if issues.is_empty() => Ok(RunConfig {
            physics,
            grid,
            control,
            scheme,
            init,
            time: TimeConfig { t_end, sample_interval },
            output,
        }),
        _ => Err(ConfigError::Invalid(issues)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nn_cells = 8\n[time]\nt_end = 0.1\n";

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.physics, PhysParams::default());
        assert_eq!(c.control, StepControl::default());
        assert_eq!(c.grid.n_cells(), 8);
        assert_eq!(c.init, InitialProfile::Uniform { v: 1.0, theta: 1.0 });
        assert!((c.time.sample_interval - 0.001).abs() < 1e-15);
        assert_eq!(c.output.directory, PathBuf::from("out"));
        assert!(!c.output.write_snapshots);
    }

    #[test]
    fn negative_exponent_is_named() {
        let err = parse_config(&format!("[physics]\nq = -1.0\n{MINIMAL}")).unwrap_err();
        let issues = err.issues();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].path, "physics.q");
        assert!(issues[0].reason.contains("must be ≥ 0"));
    }

    #[test]
    fn misspelled_section_is_named() {
        let err = parse_config(&format!("[phyiscs]\nq = 1.0\n{MINIMAL}")).unwrap_err();
        assert_eq!(err.issues()[0].path, "phyiscs", "{err}");
    }

    #[test]
    fn misspelled_nested_key_is_named() {
        let err = parse_config(&format!("[stepper]\ncfll = 0.3\n{MINIMAL}")).unwrap_err();
        assert_eq!(err.issues()[0].path, "stepper.cfll", "{err}");
    }

    #[test]
    fn syntax_error_has_location() {
        match parse_config("[grid]\nn_cells = = 4\n").unwrap_err() {
            ConfigError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 11)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_issues_are_collected() {
        let err = parse_config("[grid]\nn_cells = 2\n[stepper]\ncfl = 1.5\n").unwrap_err();
        let paths: Vec<_> = err.issues().iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, ["grid.n_cells", "stepper.cfl", "time.t_end"]);
    }

    #[test]
    fn bad_profile_is_reported() {
        let text = format!("{MINIMAL}[init]\nkind = \"thermal-bump\"\ntheta0 = 1.0\namp = 1.5\n");
        assert_eq!(parse_config(&text).unwrap_err().issues()[0].path, "init");
    }

    #[test]
    fn enums_and_composite_profiles() {
        let text = format!(
            "{MINIMAL}[stepper]\nmode = \"imex\"\nmodel = \"radiative-ns\"\ninterface_mean = \"harmonic\"\n\
             [physics]\nkappa_form = \"sum-over-rho\"\n\
             [init]\nkind = \"composite\"\nparts = [{{ kind = \"uniform\", v = 2.0 }}, {{ kind = \"velocity-push\", u_amp = 0.1 }}]\n"
        );
        let c = parse_config(&text).unwrap();
        assert_eq!(c.control.mode, StepMode::Imex);
        assert_eq!(c.scheme.model, Model::RadiativeNs);
        assert_eq!(c.scheme.kappa_mean, InterfaceMean::Harmonic);
        assert_eq!(c.physics.kappa_form, KappaForm::SumOverRho);
        assert!(matches!(c.init, InitialProfile::Composite { ref parts } if parts.len() == 2));
    }

    #[test]
    fn unknown_enum_value_is_reported_at_its_key() {
        let err = parse_config(&format!("{MINIMAL}[stepper]\nmode = \"rk4\"\n")).unwrap_err();
        assert_eq!(err.issues()[0].path, "stepper.mode", "{err}");
    }
}
