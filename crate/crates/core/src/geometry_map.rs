//! Eulerian geometry recovered from the mass-coordinate solution.
//!
//! The boundary particles sit at `y = 0` and `y = 1`, so the free interfaces
//! move with the end-node velocities. The left interface starts at `x = 0`.

use crate::grid_state::{Grid, SimState};
use crate::stepper::StepReport;

/// Positions of the two free boundaries at every recorded instant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InterfaceTrack {
    pub t_samples: Vec<f64>,
    pub a_left: Vec<f64>,
    pub b_right: Vec<f64>,
    a_now: f64,
    b_now: f64,
}

impl InterfaceTrack {
    /// Starts a track at `state` with the left boundary at the origin.
    pub fn new(state: &SimState, grid: &Grid) -> Self {
        let width: f64 = state.v.iter().map(|v| v * grid.dy()).sum();
        let mut track = Self { a_now: 0.0, b_now: width, ..Self::default() };
        track.record(state.t);
        track
    }

    pub fn a(&self) -> f64 {
        self.a_now
    }

    pub fn b(&self) -> f64 {
        self.b_now
    }

    pub fn width(&self) -> f64 {
        self.b_now - self.a_now
    }

    /// Appends the current positions as a sample at time `t`.
    pub fn record(&mut self, t: f64) {
        self.t_samples.push(t);
        self.a_left.push(self.a_now);
        self.b_right.push(self.b_now);
    }

    pub fn len(&self) -> usize {
        self.t_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_samples.is_empty()
    }

    /// `(t, a, b, width, width/(1+t))` of sample `k`.
    pub fn row(&self, k: usize) -> [f64; 5] {
        let t = self.t_samples[k];
        let w = self.b_right[k] - self.a_left[k];
        [t, self.a_left[k], self.b_right[k], w, w / (1.0 + t)]
    }

    pub const COLUMNS: [&'static str; 5] = ["t", "a", "b", "width", "width_over_1pt"];
}

/// Node positions `x_j = a + Σ_{i<j} v_i dy`.
pub fn eulerian_positions(state: &SimState, grid: &Grid, a_left_now: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(grid.n_nodes());
    let mut acc = a_left_now;
    x.push(acc);
    for &v in &state.v {
        acc += v * grid.dy();
        x.push(acc);
    }
    x
}

/// Moves both interfaces over one accepted step of length `dt`.
///
/// The velocities are the ones the stepper actually used to update the cell
/// volumes, so `b − a` and `∫v dy` follow the same discrete history.
pub fn advance_interfaces(track: &mut InterfaceTrack, report: &StepReport, dt: f64) {
    track.a_now += dt * report.boundary_velocity[0];
    track.b_now += dt * report.boundary_velocity[1];
}
