//! Continuous-time quantum walk search on complete, Paley and hypercube
//! graphs, with linear and nonlinear (cubic, cubic–quintic, power-law,
//! loglinear) Schrödinger dynamics evolved in the invariant subspace spanned
//! by equal superpositions of identically evolving vertices.
//!
//! The pipeline is: build a [`graph::Graph`], reduce it around the marked
//! vertex with [`partition::reduce`], pick a hopping rate with
//! [`spectral::find_critical_gamma`], then integrate with
//! [`dynamics::evolve`]. [`oracle`] integrates the same equations over every
//! vertex and is used to validate the reduction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod experiments;
pub mod graph;
pub mod oracle;
pub mod partition;
pub mod spectral;

pub use num_complex::Complex64;
