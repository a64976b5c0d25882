//! Near-field matter-wave interferometry: wavelengths, Talbot geometry,
//! fringe synthesis and collisional loss of contrast. SI units.

mod talbot;

pub use talbot::{
    dominant_period, scan_period, simulate_fringe_scan, FringeModel, FringeScan, FringeSimulator, Incoherence,
    ScanOptions,
};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, SI};
use crate::scalar::{Cplx, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamParams<T: Real> {
    /// kg.
    pub mass: T,
    /// m/s.
    pub velocity: T,
    /// m, always `h / (mass velocity)`.
    pub lambda_db: T,
}

impl<T: Real> BeamParams<T> {
    pub fn new(mass: T, velocity: T) -> Result<Self> {
        Ok(Self { mass, velocity, lambda_db: de_broglie(mass, velocity)? })
    }

    pub fn from_amu(mass_amu: T, velocity: T) -> Result<Self> {
        Self::new(mass_amu * T::lit(SI.amu), velocity)
    }
}

/// `h / (m v)`.
pub fn de_broglie<T: Real>(mass: T, velocity: T) -> Result<T> {
    if !(mass > T::zero() && velocity > T::zero()) || !(mass * velocity).is_finite() {
        return Err(Error::Argument("mass and velocity must be positive and finite".into()));
    }
    Ok(T::lit(SI.h) / mass / velocity)
}

/// `d^2 / lambda`.
pub fn talbot_length<T: Real>(d: T, lambda: T) -> Result<T> {
    if !(d > T::zero() && lambda > T::zero()) {
        return Err(Error::Argument("period and wavelength must be positive".into()));
    }
    Ok(d * d / lambda)
}

/// Grating period that puts `talbot` at one Talbot length for `lambda`.
pub fn period_for_talbot_length<T: Real>(lambda: T, talbot: T) -> Result<T> {
    if !(lambda > T::zero() && talbot > T::zero()) {
        return Err(Error::Argument("wavelength and length must be positive".into()));
    }
    Ok((lambda * talbot).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GratingStack<T: Real> {
    /// Period, m.
    pub d: T,
    pub open_fraction: T,
    /// Grating separation, m.
    pub l: T,
    /// Number of illuminated slits in the middle grating.
    pub n_slits: usize,
}

pub const MIN_SLITS: usize = 16;

impl<T: Real> GratingStack<T> {
    pub fn new(d: T, open_fraction: T, l: T, n_slits: usize) -> Result<Self> {
        let s = Self { d, open_fraction, l, n_slits };
        s.validate()?;
        Ok(s)
    }

    /// Separation set to one Talbot length for `lambda`.
    pub fn at_talbot_length(d: T, open_fraction: T, lambda: T, n_slits: usize) -> Result<Self> {
        Self::new(d, open_fraction, talbot_length(d, lambda)?, n_slits)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > T::zero()) || !(self.l > T::zero()) || !self.d.is_finite() || !self.l.is_finite() {
            return Err(Error::Argument("grating period and separation must be positive".into()));
        }
        if !(self.open_fraction > T::zero() && self.open_fraction < T::one()) {
            return Err(Error::Argument(format!("open_fraction = {} must lie in (0, 1)", self.open_fraction)));
        }
        if self.n_slits < MIN_SLITS {
            return Err(Error::Argument(format!("n_slits = {} is below the minimum {}", self.n_slits, MIN_SLITS)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasEnvironment<T: Real> {
    /// Pa.
    pub pressure: T,
    /// K.
    pub temperature: T,
    /// Effective collision cross section, m^2.
    pub sigma_eff: T,
}

/// `k_B T / (2 L sigma_eff)`.
pub fn decoherence_pressure<T: Real>(env: &GasEnvironment<T>, l: T) -> Result<T> {
    if !(env.temperature > T::zero() && env.sigma_eff > T::zero() && l > T::zero()) {
        return Err(Error::Argument("temperature, cross section and length must be positive".into()));
    }
    Ok(T::lit(SI.k_b) * env.temperature / (T::lit(2.0) * l * env.sigma_eff))
}

/// `v0 exp(-p / p0)`.
pub fn visibility_with_gas<T: Real>(v0: T, p: T, p0: T) -> Result<T> {
    if !(p >= T::zero()) || !(p0 > T::zero()) {
        return Err(Error::Argument("need p >= 0 and p0 > 0".into()));
    }
    Ok(v0 * (-p / p0).exp())
}

/// Multiplies `rho(x, x')` by the overlap of the environment states left by
/// paths through `x` and `x'`.
pub fn which_path_dephase<T: Real, F>(rho: &DensityMatrix<T>, positions: &[T], overlap: F) -> Result<DensityMatrix<T>>
where
    F: Fn(T, T) -> Cplx<T>,
{
    let n = rho.dim();
    if positions.len() != n {
        return Err(Error::Shape(format!("{} positions for a dimension-{} state", positions.len(), n)));
    }
    let limit = T::one() + T::tol(1e-12);
    let mut out = Array2::from_elem((n, n), Cplx::new(T::zero(), T::zero()));
    for i in 0..n {
        for j in 0..n {
            let o = overlap(positions[i], positions[j]);
            if !(o.norm() <= limit) {
                return Err(Error::Contract(format!("|overlap| = {:e} exceeds 1", o.norm())));
            }
            if i == j && (o - Cplx::new(T::one(), T::zero())).norm() > T::tol(1e-12) {
                return Err(Error::Contract("overlap(x, x) must equal 1".into()));
            }
            out[[i, j]] = if i == j { rho.get(i, i) } else { rho.get(i, j) * o };
        }
    }
    DensityMatrix::new(out)
}

/// Mass dependence of the effective cross section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SigmaScaling {
    /// `sigma ∝ m^(2/3)`.
    Geometric,
    /// `sigma ∝ m^exponent`.
    PowerLaw(f64),
}

impl SigmaScaling {
    pub fn ratio(&self, target_over_reference: f64) -> f64 {
        let e = match self {
            SigmaScaling::Geometric => 2.0 / 3.0,
            SigmaScaling::PowerLaw(e) => *e,
        };
        target_over_reference.powf(e)
    }
}

/// Reference point of a pressure extrapolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureReference {
    pub mass_amu: f64,
    pub p0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureExtrapolation {
    pub target_mass_amu: f64,
    pub p0: f64,
    pub p0_ratio: f64,
    pub lambda_ratio: f64,
    pub period_ratio: f64,
    pub length_ratio: f64,
    pub sigma_ratio: f64,
    pub assumptions: Vec<String>,
}

/// Decoherence pressure for a heavier (or lighter) particle at the same
/// velocity, with the interferometer kept at one Talbot length.
pub fn extrapolate_required_pressure(target_mass_amu: f64, reference: PressureReference, sigma: SigmaScaling) -> Result<PressureExtrapolation> {
    extrapolate_with(target_mass_amu, reference, |r| sigma.ratio(r), &format!("{:?}", sigma))
}

/// As [`extrapolate_required_pressure`] with an arbitrary cross-section
/// ratio `sigma(target) / sigma(reference)` as a function of the mass ratio.
pub fn extrapolate_with<F: Fn(f64) -> f64>(
    target_mass_amu: f64,
    reference: PressureReference,
    sigma_ratio: F,
    sigma_label: &str,
) -> Result<PressureExtrapolation> {
    if !(target_mass_amu > 0.0 && reference.mass_amu > 0.0 && reference.p0 > 0.0) {
        return Err(Error::Argument("masses and reference pressure must be positive".into()));
    }
    let m = target_mass_amu / reference.mass_amu;
    let lambda_ratio = 1.0 / m;
    let period_ratio = lambda_ratio.sqrt();
    let length_ratio = period_ratio * period_ratio / lambda_ratio;
    let s = sigma_ratio(m);
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Argument(format!("cross-section ratio {s} must be positive")));
    }
    let p0_ratio = 1.0 / (length_ratio * s);
    Ok(PressureExtrapolation {
        target_mass_amu,
        p0: reference.p0 * p0_ratio,
        p0_ratio,
        lambda_ratio,
        period_ratio,
        length_ratio,
        sigma_ratio: s,
        assumptions: vec![
            "velocity fixed, so lambda scales as 1/m".into(),
            "grating period scales as sqrt(lambda)".into(),
            "separation held at one Talbot length d^2/lambda".into(),
            "temperature unchanged".into(),
            format!("cross section scaling: {sigma_label}"),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::StateVector;
    use crate::scalar::c;

    #[test]
    fn wavelengths() {
        let l = de_broglie(840.0 * SI.amu, 100.0).unwrap();
        // h / (840 * 1.66053906660e-27 * 100) evaluated independently.
        assert!((l - 4.750_370e-12).abs() / l < 1e-5);
        let half = de_broglie(2.0 * 840.0 * SI.amu, 100.0).unwrap();
        assert!((half * 2.0 - l).abs() / l < 1e-15);
        let b = BeamParams::from_amu(840.0, 100.0).unwrap();
        assert!((b.lambda_db - SI.h / (b.mass * b.velocity)).abs() / b.lambda_db < 1e-12);
        assert!(de_broglie(0.0, 1.0).is_err());
    }

    #[test]
    fn talbot_geometry() {
        let lt: f64 = talbot_length(1e-6, 4.75e-12).unwrap();
        assert!((lt - 0.210_526_315_789_473_7).abs() < 1e-12);
        assert!((talbot_length(2e-6, 4.75e-12).unwrap() / lt - 4.0).abs() < 1e-12);
        let lam = de_broglie(840.0 * SI.amu, 100.0).unwrap();
        let lt = talbot_length(1e-6, lam).unwrap();
        let d16 = period_for_talbot_length(lam / 16.0, lt).unwrap();
        assert!((d16 - 0.25e-6).abs() < 1e-18);
    }

    #[test]
    fn pressure_law() {
        let env = GasEnvironment { pressure: 0.0f64, temperature: 300.0, sigma_eff: 1e-17 };
        let p0: f64 = decoherence_pressure(&env, 0.38).unwrap();
        assert!((p0 - 5.449_93e-4).abs() / p0 < 1e-5);
        let hot = GasEnvironment { temperature: 600.0, ..env };
        assert!((decoherence_pressure(&hot, 0.38).unwrap() / p0 - 2.0).abs() < 1e-12);
        assert!((decoherence_pressure(&env, 0.76).unwrap() / p0 - 0.5).abs() < 1e-12);
        assert_eq!(visibility_with_gas(0.8, 0.0, p0).unwrap(), 0.8);
        assert!((visibility_with_gas(1.0, p0 * 2f64.ln(), p0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn which_path_limits() {
        let psi = StateVector::normalized(vec![c(1.0), c(2.0), c(-1.0), c(0.5)]).unwrap();
        let rho = psi.to_density();
        let xs = [0.0f64, 1.0, 2.0, 3.0];
        let same = which_path_dephase(&rho, &xs, |_, _| c(1.0)).unwrap();
        assert_eq!(same, rho);
        let diag = which_path_dephase(&rho, &xs, |a, b| if a == b { c(1.0) } else { c(0.0) }).unwrap();
        assert_eq!(diag.max_coherence(), 0.0);
        for i in 0..4 {
            assert_eq!(diag.get(i, i), rho.get(i, i));
        }
        let ell = 1.0;
        let exp = which_path_dephase(&rho, &xs, |a: f64, b: f64| c((-(a - b).abs() / ell).exp())).unwrap();
        assert!((exp.get(0, 1) - rho.get(0, 1) * (-1.0f64).exp()).norm() < 1e-15);
        assert!(matches!(which_path_dephase(&rho, &xs, |_, _| c(1.5)), Err(Error::Contract(_))));
    }

    #[test]
    fn extrapolation() {
        let r = PressureReference { mass_amu: 840.0, p0: 1e-4 };
        let same = extrapolate_required_pressure(840.0, r, SigmaScaling::Geometric).unwrap();
        assert!((same.p0 - 1e-4).abs() < 1e-18);
        let heavy = extrapolate_required_pressure(8.0 * 840.0, r, SigmaScaling::Geometric).unwrap();
        assert!((heavy.p0_ratio - 0.25).abs() < 1e-12);
        assert!((heavy.length_ratio - 1.0).abs() < 1e-12);
        assert!(!heavy.assumptions.is_empty());
    }
}
