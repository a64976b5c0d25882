//! Numerical models of environment-induced decoherence.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bec;
pub mod error;
pub mod macrometer;
pub mod matterwave;
pub mod parallel;
pub mod qcore;
pub mod relstate;
pub mod scalar;
pub mod squid;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type StateVectorF64 = qcore::StateVector<f64>;
pub type DensityMatrixF64 = qcore::DensityMatrix<f64>;
pub type WignerGridF64 = qcore::WignerGrid<f64>;
pub type SquidParamsF64 = squid::SquidParams<f64>;
pub type SquidSpectrumF64 = squid::SquidSpectrum<f64>;
pub type BeamParamsF64 = matterwave::BeamParams<f64>;
pub type GratingStackF64 = matterwave::GratingStack<f64>;
pub type TwoModeStateF64 = bec::TwoModeState<f64>;
pub type BipartiteStateF64 = relstate::BipartiteState<f64>;
pub type BranchingStateF64 = relstate::BranchingState<f64>;
