//! Flux-qubit double well: spectrum, coherent tunnelling, dephasing and
//! phase-space snapshots.
//!
//! Reduced units throughout: `hbar = 1`, flux in units of the flux quantum,
//! energies in units of `Phi0^2 / L`. The potential is
//! `U(phi) = (phi - phi_ext)^2 / (2 beta_l) - (i_c / 2 pi) cos(2 pi phi)` and the
//! kinetic term is `-(1/2C) d^2/dphi^2`.

mod dynamics;
mod spectrum;

pub use dynamics::{
    cat_diagnostics, evolve_full, evolve_two_level, tunneling_probability, wigner_snapshots, CatDiagnostics,
    DephasingBasis, DephasingModel, FullEvolution, SnapshotSource, TwoLevelTrajectory, RK4_STEP_FACTOR,
};
pub use spectrum::{solve_spectrum, FluxGrid, ReducedUnits, SquidParams, SquidSpectrum, MIN_GRID_POINTS};
