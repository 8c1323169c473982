//! Stage-structured, multi-patch matrix population models with dispersion.
//!
//! The crate builds per-patch Usher/Leslie demographies, couples them with
//! column-stochastic dispersion, and computes growth rates and net
//! reproductive numbers by three independent routes: the spectral radius of
//! the projection, the newborn submatrix of the next-generation matrix,
//! and signal-flow-graph loop reduction. Closed forms for the named
//! two-patch and three-patch families plus critical-dispersal root finding
//! round out the toolkit.
//!
//! All numerics are generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the `*64` aliases below are the concrete types most
//! callers want.

pub mod bracket;
pub mod closed_form;
pub mod demography;
pub mod dispersion;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod sample;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type PerronData64 = linalg::PerronData<f64>;
pub type StageVitals64 = demography::StageVitals<f64>;
pub type LocalDemography64 = demography::LocalDemography<f64>;
pub type DispersionSpec64 = dispersion::DispersionSpec<f64>;
pub type GlobalModel64 = model::GlobalModel<f64>;
pub type AnalysisReport64 = model::AnalysisReport<f64>;
pub type SignalFlowGraph64 = graph::SignalFlowGraph<f64>;

pub type Matrix32 = linalg::Matrix<f32>;
pub type GlobalModel32 = model::GlobalModel<f32>;
