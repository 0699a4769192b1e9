//! Free-boundary radiative magnetohydrodynamics in Lagrangian mass
//! coordinates, with estimate monitors and manufactured-solution checks.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod geometry_map;
pub mod grid_state;
pub mod mms;
pub mod output;
pub mod physics;
pub mod run;
pub mod spatial_ops;
pub mod stepper;
pub mod tridiag;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/time_stepping.md")]
    mod time_stepping {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/interfaces.md")]
    mod interfaces {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
}
