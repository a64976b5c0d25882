//! Quantum linear algebra shared by the physics modules.
//!
//! Composite systems use a-major ordering throughout: for factors of
//! dimensions `d_a` and `d_b` the product index is `i_a * d_b + i_b`.

pub mod constants;
pub mod linalg;
pub mod ops;
pub mod state;
pub mod wigner;

pub use constants::{PhysicalConstants, SI};
pub use ops::{partial_trace, partial_trace_subsystems, tensor, tensor_all, von_neumann_entropy, LogBase};
pub use state::{DensityMatrix, HermitianOperator, StateVector};
pub use wigner::{wigner, Grid1d, WignerGrid, WignerSpec};
