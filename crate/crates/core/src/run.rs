//! The simulation driver behind `radmhd run`.
//!
//! Diagnostics are evaluated after every accepted step so that the time
//! integrals are accumulated at step resolution, and rows are emitted at the
//! sample times. The stepper lands exactly on each sample time.

use std::path::Path;

use crate::config::RunConfig;
use crate::diagnostics::{check_estimates, sample, AuditReport, DiagSample, Tolerances};
use crate::error::{SimError, StepError};
use crate::geometry_map::{advance_interfaces, InterfaceTrack};
use crate::grid_state::{make_initial_state, SimState};
use crate::output::{self, OutputError};
use crate::spatial_ops::BoundaryResiduals;
use crate::stepper::Integrator;

/// Largest admissible wall value of the reconstructed magnetic field.
pub const B_WALL_TOL: f64 = 1e-12;

/// A state kept for a snapshot file.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub state: SimState,
    pub a_left: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub series: Vec<DiagSample>,
    pub track: InterfaceTrack,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SimState,
    pub steps: usize,
    pub audit: AuditReport,
    /// Worst boundary residuals over all accepted steps.
    pub residuals: BoundaryResiduals,
    /// max |(b − a) − ∫v dy| over the samples.
    pub width_gap: f64,
}

/// Asserts the free-boundary conditions after one step.
fn check_boundary(r: &BoundaryResiduals) -> Result<(), String> {
    if r.w != 0.0 || r.heat_flux != 0.0 || r.face_stress != 0.0 || !(r.b_wall <= B_WALL_TOL) {
        return Err(format!(
            "boundary condition violated: |w| = {:e}, |heat flux| = {:e}, |face stress| = {:e}, |b_wall| = {:e}",
            r.w, r.heat_flux, r.face_stress, r.b_wall
        ));
    }
    Ok(())
}

/// Runs the configured experiment in memory.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutcome, SimError> {
    let grid = &cfg.grid;
    let params = &cfg.physics;
    let it = Integrator::new(params, grid, cfg.control).with_scheme(cfg.scheme);
    let mut state = make_initial_state(grid, &cfg.init, params)
        .map_err(|e| SimError { t: 0.0, source: StepError::Observer(e.to_string()) })?;

    let mut running = sample(&state, None, params, grid, None);
    let mut track = InterfaceTrack::new(&state, grid);
    let mut series = vec![running];
    let mut width_gap = (track.width() - running.l_width).abs();
    let mut residuals = BoundaryResiduals::default();
    let mut steps = 0usize;
    let mut snapshots = Vec::new();
    let mut next_snapshot = 0.0;
    let snap = |state: &SimState, track: &InterfaceTrack, snapshots: &mut Vec<Snapshot>, next: &mut f64| {
        if cfg.output.write_snapshots && state.t >= *next * (1.0 - 1e-12) {
            snapshots.push(Snapshot { state: state.clone(), a_left: track.a() });
            *next += cfg.output.snapshot_interval;
        }
    };
    snap(&state, &track, &mut snapshots, &mut next_snapshot);

    let t_end = cfg.time.t_end;
    let dt_s = cfg.time.sample_interval;
    for k in 1.. {
        let mut target = (k as f64 * dt_s).min(t_end);
        if t_end - target < 1e-9 * dt_s {
            target = t_end;
        }
        state = it.advance_to(state, target, |ev| {
            let Some(report) = ev.report else { return Ok(()) };
            check_boundary(&report.residuals)?;
            residuals = residuals.max(report.residuals);
            advance_interfaces(&mut track, report, ev.dt);
            running = sample(ev.state, ev.prev, params, grid, Some(&running));
            steps += 1;
            Ok(())
        })?;
        series.push(running);
        track.record(state.t);
        width_gap = width_gap.max((track.width() - running.l_width).abs());
        snap(&state, &track, &mut snapshots, &mut next_snapshot);
        if target >= t_end {
            break;
        }
    }

    let audit = check_estimates(&series, &Tolerances::default());
    Ok(RunOutcome { series, track, snapshots, final_state: state, steps, audit, residuals, width_gap })
}

impl RunOutcome {
    /// Human-readable summary printed by the CLI after a run.
    pub fn summary(&self) -> String {
        let last = self.series.last().expect("series is never empty");
        format!(
            "steps: {}\nfinal t: {:.6e}\nwidth gap max: {:.3e}\nboundary residuals: w {:e}, heat {:e}, stress {:e}, b_wall {:e}\n\
             max theta^(q+4): {:.6e}, time integral {:.6e}\n",
            self.steps,
            last.t,
            self.width_gap,
            self.residuals.w,
            self.residuals.heat_flux,
            self.residuals.face_stress,
            self.residuals.b_wall,
            self.series.iter().map(|s| s.theta_q4_max).fold(0.0, f64::max),
            last.theta_q4_cum,
        )
    }
}

/// Writes `timeseries.csv`, `interfaces.csv`, `audit.txt` and, if enabled,
/// `snapshot_NNNN_cells.csv` / `snapshot_NNNN_nodes.csv` with an index in
/// `snapshots.csv`.
pub fn write_outputs(cfg: &RunConfig, outcome: &RunOutcome, dir: &Path) -> Result<(), OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.display().to_string(), source })?;
    output::write_timeseries_file(&dir.join("timeseries.csv"), &outcome.series)?;
    output::write_interfaces_file(&dir.join("interfaces.csv"), &outcome.track)?;
    output::write_text_file(&dir.join("audit.txt"), &outcome.audit.render())?;
    if cfg.output.write_snapshots {
        let mut index = String::from("index,t\n");
        for (k, s) in outcome.snapshots.iter().enumerate() {
            let cells = std::fs::File::create(dir.join(format!("snapshot_{k:04}_cells.csv")))
                .map_err(|source| OutputError::Io { path: dir.display().to_string(), source })?;
            output::write_snapshot_cells(cells, &s.state, &cfg.grid)?;
            let nodes = std::fs::File::create(dir.join(format!("snapshot_{k:04}_nodes.csv")))
                .map_err(|source| OutputError::Io { path: dir.display().to_string(), source })?;
            output::write_snapshot_nodes(nodes, &s.state, &cfg.grid, s.a_left)?;
            index.push_str(&format!("{k},{}\n", output::fmt_f64(s.state.t)));
        }
        output::write_text_file(&dir.join("snapshots.csv"), &index)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg(extra: &str) -> RunConfig {
        parse_config(&format!(
            "[grid]\nn_cells = 16\n[time]\nt_end = 0.05\nsample_interval = 0.01\n\
             [init]\nkind = \"thermal-bump\"\namp = 0.5\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn samples_land_on_the_requested_times() {
        let out = simulate(&cfg("")).unwrap();
        let ts: Vec<f64> = out.series.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 6);
        for (k, t) in ts.iter().enumerate() {
            assert!((t - 0.01 * k as f64).abs() < 1e-15, "{ts:?}");
        }
        assert_eq!(out.track.len(), 6);
        assert!(out.audit.passed(), "{}", out.audit.render());
        assert!(out.width_gap < 1e-13);
    }

    #[test]
    fn sampling_interval_only_perturbs_the_step_sequence() {
        let a = simulate(&cfg("")).unwrap();
        let mut c = cfg("");
        c.time.sample_interval = 0.05;
        let b = simulate(&c).unwrap();
        let (la, lb) = (a.series.last().unwrap(), b.series.last().unwrap());
        assert!((la.v_cum - lb.v_cum).abs() < 1e-4 * la.v_cum, "{} {}", la.v_cum, lb.v_cum);
        assert!((la.l_width - lb.l_width).abs() < 1e-6);
    }

    #[test]
    fn snapshots_follow_their_interval() {
        let out = simulate(&cfg("[output]\nwrite_snapshots = true\nsnapshot_interval = 0.02\n")).unwrap();
        let ts: Vec<f64> = out.snapshots.iter().map(|s| s.state.t).collect();
        assert_eq!(ts.len(), 3, "{ts:?}");
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("[output]\nwrite_snapshots = true\n");
        let out = simulate(&c).unwrap();
        write_outputs(&c, &out, dir.path()).unwrap();
        for f in ["timeseries.csv", "interfaces.csv", "audit.txt", "snapshots.csv", "snapshot_0001_nodes.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let back = output::read_timeseries_file(&dir.path().join("timeseries.csv")).unwrap();
        let again = check_estimates(&back, &Tolerances::default()).render();
        assert_eq!(again, std::fs::read_to_string(dir.path().join("audit.txt")).unwrap());
    }
}
