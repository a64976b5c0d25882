//! Two-mode condensate states in the Fock basis `|n, N - n>`, indexed by the
//! first-mode occupation `n`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::qcore::{DensityMatrix, StateVector, SI};
use crate::scalar::{c, cis, Cplx, Real};

/// Largest atom number stored explicitly.
pub const MAX_ATOMS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoModeState<T: Real> {
    n_atoms: usize,
    state: StateVector<T>,
}

fn check_atoms(n_atoms: usize) -> Result<()> {
    if n_atoms == 0 || n_atoms > MAX_ATOMS {
        return Err(Error::Size(format!("atom number {} outside [1, {}]", n_atoms, MAX_ATOMS)));
    }
    Ok(())
}

impl<T: Real> TwoModeState<T> {
    pub fn new(n_atoms: usize, amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        check_atoms(n_atoms)?;
        if amplitudes.len() != n_atoms + 1 {
            return Err(Error::Shape(format!("{} amplitudes for {} atoms", amplitudes.len(), n_atoms)));
        }
        let state = StateVector::new(amplitudes)?;
        if !state.is_normalized(T::tol(1e-12)) {
            return Err(Error::InvalidState("two-mode state is not normalized".into()));
        }
        Ok(Self { n_atoms, state })
    }

    /// `|n, N - n>`.
    pub fn fock(n_atoms: usize, n: usize) -> Result<Self> {
        check_atoms(n_atoms)?;
        Ok(Self { n_atoms, state: StateVector::basis(n_atoms + 1, n)? })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn amplitude(&self, n: usize) -> Cplx<T> {
        self.state.amplitudes()[n]
    }

    pub fn state(&self) -> &StateVector<T> {
        &self.state
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        self.state.to_density()
    }

    /// Number of nonzero amplitudes.
    pub fn support(&self) -> usize {
        self.state.amplitudes().iter().filter(|z| z.norm_sqr() > T::zero()).count()
    }
}

/// `(|n, N-n> + e^{i phi} |N-n, n>) / sqrt 2`, or `|N/2, N/2>` when `2n = N`.
pub fn make_cat<T: Real>(n_atoms: usize, n: usize, phi: T) -> Result<TwoModeState<T>> {
    check_atoms(n_atoms)?;
    if 2 * n > n_atoms {
        return Err(Error::Argument(format!("n = {} exceeds N/2 = {}", n, n_atoms as f64 / 2.0)));
    }
    if 2 * n == n_atoms {
        return TwoModeState::fock(n_atoms, n);
    }
    let r = T::FRAC_1_SQRT_2();
    let mut amps = vec![c(T::zero()); n_atoms + 1];
    amps[n] = c(r);
    amps[n_atoms - n] = cis(phi) * r;
    TwoModeState::new(n_atoms, amps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDampingParams<T: Real> {
    /// 1/s.
    pub kappa: T,
    /// rad/s.
    pub omega: T,
}

impl<T: Real> PhaseDampingParams<T> {
    pub fn new(kappa: T, omega: T) -> Result<Self> {
        if !(kappa >= T::zero()) || !kappa.is_finite() || !omega.is_finite() {
            return Err(Error::Argument("kappa must be finite and non-negative".into()));
        }
        Ok(Self { kappa, omega })
    }

    /// Factor multiplying `<m|rho|n>` after time `t`, for `k = m - n`.
    pub fn factor(&self, k: i64, t: T) -> Cplx<T> {
        let k = T::lit(k as f64);
        cis(-self.omega * k * t) * (-(k * k) * self.kappa * t).exp()
    }
}

/// Applies `<m|rho|n> -> e^{-(m-n)^2 kappa t} e^{-i omega (m-n) t} <m|rho|n>`.
pub fn phase_damp<T: Real>(rho: &DensityMatrix<T>, params: &PhaseDampingParams<T>, t: T) -> Result<DensityMatrix<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::Argument("t must be finite and non-negative".into()));
    }
    let dim = rho.dim();
    let m = rho.entries();
    let rows: Vec<usize> = (0..dim).collect();
    let damped = parallel::map_ordered(&rows, |&i| {
        (0..dim).map(|j| if i == j { m[[i, j]] } else { m[[i, j]] * params.factor(i as i64 - j as i64, t) }).collect::<Vec<_>>()
    });
    let flat: Vec<Cplx<T>> = damped.into_iter().flatten().collect();
    DensityMatrix::new(Array2::from_shape_vec((dim, dim), flat).expect("square"))
}

/// Phase damping of a cat restricted to its two-dimensional support
/// `{|n, N-n>, |N-n, n>}`, which the channel leaves invariant. Usable for
/// any `N`, including beyond [`MAX_ATOMS`].
pub fn damp_cat_block<T: Real>(n_atoms: u64, n: u64, phi: T, params: &PhaseDampingParams<T>, t: T) -> Result<DensityMatrix<T>> {
    if 2 * n >= n_atoms {
        return Err(Error::Argument("cat block needs 2n < N".into()));
    }
    let half = T::lit(0.5);
    let k = n as i64 - (n_atoms - n) as i64;
    let coh = cis(-phi) * half * params.factor(k, t);
    let m = Array2::from_shape_vec((2, 2), vec![c(half), coh, coh.conj(), c(half)]).expect("2x2");
    DensityMatrix::new(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossOutcome<T: Real> {
    /// Normalized post-loss state, absent when the image vanishes.
    pub state: Option<TwoModeState<T>>,
    /// Norm of the unnormalized image.
    pub norm: T,
    pub annihilated_to_zero: bool,
}

/// Removes one atom from `mode`.
pub fn annihilate<T: Real>(state: &TwoModeState<T>, mode: Mode) -> Result<LossOutcome<T>> {
    let big_n = state.n_atoms();
    if big_n < 1 {
        return Err(Error::Argument("no atoms to remove".into()));
    }
    let mut image = vec![c(T::zero()); big_n];
    for n in 0..=big_n {
        let a = state.amplitude(n);
        match mode {
            Mode::First if n > 0 => image[n - 1] += a * T::from_usize_lossy(n).sqrt(),
            Mode::Second if n < big_n => image[n] += a * T::from_usize_lossy(big_n - n).sqrt(),
            _ => {}
        }
    }
    let norm = image.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if norm == T::zero() {
        return Ok(LossOutcome { state: None, norm, annihilated_to_zero: true });
    }
    let nonzero: Vec<usize> = (0..big_n).filter(|&i| image[i].norm_sqr() > T::zero()).collect();
    if let [only] = nonzero[..] {
        // A single surviving component is a pure phase times a basis state.
        let z = image[only];
        image[only] = z / z.norm();
    } else {
        image.iter_mut().for_each(|z| *z /= norm);
    }
    if big_n - 1 == 0 {
        return Ok(LossOutcome { state: None, norm, annihilated_to_zero: false });
    }
    Ok(LossOutcome { state: Some(TwoModeState::new(big_n - 1, image)?), norm, annihilated_to_zero: false })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauReference<T: Real> {
    /// Scattering length, m.
    pub a: T,
    pub n_nc: T,
    pub n: T,
    /// s.
    pub tau_d: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCalibration<T: Real> {
    /// Constant in `1/tau_d = c a^2 N_nc N^2`.
    pub c: T,
    pub reference: TauReference<T>,
}

impl<T: Real> LossCalibration<T> {
    /// `1 / (c a^2 N_nc N^2)`.
    pub fn predict(&self, a: T, n_nc: T, n: T) -> Result<T> {
        if !(a > T::zero() && n_nc > T::zero() && n > T::zero()) {
            return Err(Error::Argument("a, N_nc and N must be positive".into()));
        }
        Ok(T::one() / (self.c * a * a * n_nc * n * n))
    }

    /// Prediction at the calibration scattering length.
    pub fn predict_at(&self, n_nc: T, n: T) -> Result<T> {
        self.predict(self.reference.a, n_nc, n)
    }
}

pub fn calibrate_tau<T: Real>(reference: TauReference<T>) -> Result<LossCalibration<T>> {
    let r = reference;
    if !(r.a > T::zero() && r.n_nc > T::zero() && r.n > T::zero() && r.tau_d > T::zero()) {
        return Err(Error::Argument("calibration values must be positive".into()));
    }
    let c = T::one() / (r.tau_d * r.a * r.a * r.n_nc * r.n * r.n);
    if !(c > T::zero()) || !c.is_finite() {
        return Err(Error::Numeric("calibration constant is not finite".into()));
    }
    Ok(LossCalibration { c, reference })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondensationCheck<T: Real> {
    /// kg.
    pub mass: T,
    /// K.
    pub temperature: T,
    /// m^-3.
    pub density: T,
    /// `sqrt(2 pi hbar^2 / (m k_B T))`, m.
    pub lambda_db_thermal: T,
    /// `density^(-1/3)`, m.
    pub interparticle: T,
}

impl<T: Real> CondensationCheck<T> {
    pub fn new(mass: T, temperature: T, density: T) -> Result<Self> {
        if !(mass > T::zero() && temperature > T::zero() && density > T::zero()) {
            return Err(Error::Argument("mass, temperature and density must be positive".into()));
        }
        let hbar = T::lit(SI.hbar);
        let lambda = (T::TAU() * hbar * hbar / (mass * T::lit(SI.k_b) * temperature)).sqrt();
        Ok(Self { mass, temperature, density, lambda_db_thermal: lambda, interparticle: density.powf(-T::one() / T::lit(3.0)) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeEstimate<T: Real> {
    pub ratio: T,
    /// Heuristic: thermal wavelength exceeds the interparticle spacing.
    pub condensed_hint: bool,
}

pub fn condensation_regime<T: Real>(check: &CondensationCheck<T>) -> RegimeEstimate<T> {
    let ratio = check.lambda_db_thermal / check.interparticle;
    RegimeEstimate { ratio, condensed_hint: ratio > T::one() }
}

/// Mass of a rubidium-87 atom, kg.
pub fn rubidium87_mass() -> f64 {
    86.909_180_527 * SI.amu
}
