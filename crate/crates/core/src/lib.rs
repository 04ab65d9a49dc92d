//! Heat-kernel trace toolkit for planar domains and unions of intervals.
//!
//! Forward problem: exact spectra, 1-D images and Brownian-bridge Monte Carlo.
//! Inverse problem: recover area, perimeter, the constant term and the
//! transcendental exponents from sampled traces, and compare them with the
//! billiard length spectrum.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiards;
pub mod error;
pub mod geometry;
pub mod images;
pub mod montecarlo;
pub mod numerics;
pub mod recovery;
pub mod spectra;
pub mod trace;

pub use error::{Error, Result};
pub use geometry::{BoundaryPoint, ChordFunction, CriticalLocus, Domain, Point, Shape};
pub use spectra::{BoundaryCondition, Spectrum};
pub use trace::{Backend, TraceSamples};
