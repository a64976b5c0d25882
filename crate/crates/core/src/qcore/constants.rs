use serde::{Deserialize, Serialize};

/// SI physical constants (2019 exact definitions, CODATA 2018 otherwise).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Planck constant, J s.
    pub h: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Elementary charge, C.
    pub e: f64,
    /// Atomic mass unit, kg.
    pub amu: f64,
    /// Bohr magneton, J/T.
    pub mu_b: f64,
    /// Magnetic flux quantum h / 2e, Wb.
    pub phi_0: f64,
}

const H: f64 = 6.626_070_15e-34;
const E: f64 = 1.602_176_634e-19;

pub const SI: PhysicalConstants = PhysicalConstants {
    h: H,
    hbar: H / (2.0 * std::f64::consts::PI),
    k_b: 1.380_649e-23,
    e: E,
    amu: 1.660_539_066_60e-27,
    mu_b: 9.274_010_078_3e-24,
    phi_0: H / (2.0 * E),
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        SI
    }
}
