//! Exact flows, saddle connections and cylinder decompositions on geometric
//! armadillo tails.
//!
//! The modules build on each other bottom-up: [`exact`] scalars, the
//! [`surface`] model, the [`flow`] tracer, the gapped return maps in [`iet`],
//! closed-form predictions in [`closed_form`], and the constructions in
//! [`chains`], [`cylinder`] and [`decomposition`]. [`render`], [`report`] and
//! [`verify`] produce artifacts.

// Errors carry exact rational witnesses; they are built only on failure paths.
#![allow(clippy::result_large_err)]

pub mod chains;
pub mod closed_form;
pub mod cylinder;
pub mod decomposition;
pub mod exact;
pub mod flow;
pub mod iet;
pub mod render;
pub mod report;
pub mod surface;
pub mod verify;

pub use exact::{mod_one, rat, Point, Rational, Slope};
pub use flow::{trace, Status, Trajectory};
pub use surface::{BoundaryEvent, EventKind, Tail};
