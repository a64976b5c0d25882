use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::linalg::tridiagonal_lowest;
use crate::qcore::{Grid1d, StateVector, WignerSpec, SI};
use crate::scalar::{c, Real};

pub const MIN_GRID_POINTS: usize = 256;

/// Dirichlet window `[phi_min, phi_max]` holding `n_points` interior nodes
/// `phi_i = phi_min + (i + 1) h`, `h = (phi_max - phi_min) / (n_points + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxGrid<T: Real> {
    pub phi_min: T,
    pub phi_max: T,
    pub n_points: usize,
}

impl<T: Real> FluxGrid<T> {
    pub fn spacing(&self) -> T {
        (self.phi_max - self.phi_min) / T::from_usize_lossy(self.n_points + 1)
    }

    pub fn nodes(&self) -> Grid1d<T> {
        let h = self.spacing();
        Grid1d { x0: self.phi_min + h, h, n: self.n_points }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquidParams<T: Real> {
    /// Capacitance, the mass of the flux coordinate.
    pub c: T,
    /// Divides the parabolic loop term.
    pub beta_l: T,
    /// Josephson coupling strength.
    pub i_c: T,
    /// External flux in flux quanta.
    pub phi_ext: T,
    pub grid: FluxGrid<T>,
}

/// SI values of the reduced energy and time units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedUnits {
    pub energy_joule: f64,
    pub time_second: f64,
}

impl<T: Real> Default for SquidParams<T> {
    fn default() -> Self {
        Self::with_window(T::lit(200.0), T::one(), T::one(), T::lit(0.5), 1024)
    }
}

impl<T: Real> SquidParams<T> {
    /// Parameters on the default window `phi_ext ± 1.5`. Not validated.
    pub fn with_window(c: T, beta_l: T, i_c: T, phi_ext: T, n_points: usize) -> Self {
        let half = T::lit(1.5);
        Self { c, beta_l, i_c, phi_ext, grid: FluxGrid { phi_min: phi_ext - half, phi_max: phi_ext + half, n_points } }
    }

    pub fn new(c: T, beta_l: T, i_c: T, phi_ext: T, n_points: usize) -> Result<Self> {
        let p = Self::with_window(c, beta_l, i_c, phi_ext, n_points);
        p.validate()?;
        Ok(p)
    }

    /// Converts device values (farad, henry, ampere) to reduced units.
    ///
    /// With `E = Phi0^2 / L`: `c = C Phi0^2 E / hbar^2`, `i_c = I_c L / Phi0`,
    /// and the time unit is `hbar / E`.
    pub fn from_si(capacitance: f64, inductance: f64, critical_current: f64, phi_ext: f64, n_points: usize) -> Result<(SquidParams<f64>, ReducedUnits)> {
        if !(capacitance > 0.0 && inductance > 0.0 && critical_current > 0.0) {
            return Err(Error::Argument("capacitance, inductance and critical current must be positive".into()));
        }
        let energy = SI.phi_0 * SI.phi_0 / inductance;
        let c_red = capacitance * SI.phi_0 * SI.phi_0 * energy / (SI.hbar * SI.hbar);
        let i_red = critical_current * inductance / SI.phi_0;
        let p = SquidParams::new(c_red, 1.0, i_red, phi_ext, n_points)?;
        Ok((p, ReducedUnits { energy_joule: energy, time_second: SI.hbar / energy }))
    }

    pub fn potential(&self, phi: T) -> T {
        potential_at(self.beta_l, self.i_c, self.phi_ext, phi)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.c, self.beta_l, self.i_c, self.phi_ext, self.grid.phi_min, self.grid.phi_max];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite SQUID parameter".into()));
        }
        if self.grid.n_points < MIN_GRID_POINTS {
            return Err(Error::Argument(format!("n_points = {} is below the minimum {}", self.grid.n_points, MIN_GRID_POINTS)));
        }
        if !(self.grid.phi_min < self.phi_ext && self.phi_ext < self.grid.phi_max) {
            return Err(Error::Argument("phi_ext must lie strictly inside the flux window".into()));
        }
        if !(self.c > T::zero() && self.beta_l > T::zero() && self.i_c > T::zero()) {
            return Err(Error::Argument("c, beta_l and i_c must be positive".into()));
        }
        // Double-well check at symmetric bias on an equivalent window.
        let half = T::lit(0.5);
        let shift = half - self.phi_ext;
        let grid = self.grid.nodes();
        let u: Vec<T> = (0..grid.n).map(|j| potential_at(self.beta_l, self.i_c, half, grid.node(j) + shift)).collect();
        if local_minima(&u).len() < 2 {
            return Err(Error::ModelRegime(format!("i_c = {} gives no double well at symmetric bias", self.i_c)));
        }
        Ok(())
    }
}

fn potential_at<T: Real>(beta_l: T, i_c: T, phi_ext: T, phi: T) -> T {
    let two_pi = T::TAU();
    let d = phi - phi_ext;
    d * d / (T::lit(2.0) * beta_l) - i_c / two_pi * (two_pi * phi).cos()
}

fn local_minima<T: Real>(u: &[T]) -> Vec<usize> {
    (1..u.len().saturating_sub(1)).filter(|&i| u[i] < u[i - 1] && u[i] <= u[i + 1]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquidSpectrum<T: Real> {
    pub params: SquidParams<T>,
    /// Ascending eigenvalues.
    pub energies: Vec<T>,
    /// Real eigenfunctions as unit vectors on the flux nodes.
    pub wavefunctions: Vec<Array1<T>>,
    pub delta_e: T,
    pub l_state: StateVector<T>,
    pub r_state: StateVector<T>,
    pub mean_flux_l: T,
    pub mean_flux_r: T,
    /// Top of the barrier separating the two lowest wells.
    pub barrier: T,
}

impl<T: Real> SquidSpectrum<T> {
    pub fn nodes(&self) -> Grid1d<T> {
        self.params.grid.nodes()
    }

    pub fn level(&self, k: usize) -> StateVector<T> {
        StateVector::new(self.wavefunctions[k].iter().map(|&v| c(v)).collect()).expect("finite eigenvector")
    }

    pub fn potential(&self) -> Vec<T> {
        self.nodes().nodes().into_iter().map(|x| self.params.potential(x)).collect()
    }

    /// Window spanning the flux grid and six momentum widths of the
    /// localized states.
    pub fn default_wigner_spec(&self, nx: usize, np: usize) -> WignerSpec<T> {
        let grid = self.nodes();
        let h = grid.h;
        let p2 = |s: &StateVector<T>| -> T {
            let a = s.amplitudes();
            (1..a.len()).map(|i| (a[i] - a[i - 1]).norm_sqr()).sum::<T>() / (h * h)
        };
        let sigma = p2(&self.l_state).max(p2(&self.r_state)).sqrt();
        let half_zone = T::PI() / (T::lit(2.0) * h);
        let p_max = (T::lit(6.0) * sigma).min(half_zone);
        let span = self.mean_flux_r - self.mean_flux_l;
        let x_min = (self.mean_flux_l - span).max(self.params.grid.phi_min);
        let x_max = (self.mean_flux_r + span).min(self.params.grid.phi_max);
        WignerSpec { x_min, x_max, nx, p_min: -p_max, p_max, np }
    }
}

/// Lowest `n_levels` eigenpairs of the discretized flux Hamiltonian.
pub fn solve_spectrum<T: Real>(params: &SquidParams<T>, n_levels: usize) -> Result<SquidSpectrum<T>> {
    params.validate()?;
    if n_levels < 2 || n_levels > params.grid.n_points {
        return Err(Error::Argument(format!("n_levels = {} must be in [2, {}]", n_levels, params.grid.n_points)));
    }
    let grid = params.grid.nodes();
    let h = grid.h;
    let kin = T::one() / (params.c * h * h);
    let phis = grid.nodes();
    let u: Vec<T> = phis.iter().map(|&x| params.potential(x)).collect();
    let d: Vec<T> = u.iter().map(|&v| v + kin).collect();
    let e = vec![-kin / T::lit(2.0); grid.n - 1];
    let (energies, vectors) = tridiagonal_lowest(&d, &e, n_levels)?;

    let mut minima = local_minima(&u);
    minima.sort_by(|&a, &b| u[a].partial_cmp(&u[b]).unwrap_or(std::cmp::Ordering::Equal));
    if minima.len() < 2 {
        return Err(Error::ModelRegime("potential has fewer than two wells on the grid".into()));
    }
    let (lo, hi) = (minima[0].min(minima[1]), minima[0].max(minima[1]));
    let barrier = u[lo..=hi].iter().copied().fold(T::neg_infinity(), T::max);
    if !(energies[1] < barrier) {
        return Err(Error::ModelRegime(format!(
            "fewer than two levels below the barrier (E1 = {:e}, barrier = {:e})",
            energies[1], barrier
        )));
    }

    let mut wavefunctions: Vec<Array1<T>> = vectors.into_iter().map(Array1::from).collect();
    for w in wavefunctions.iter_mut().skip(2) {
        fix_sign_by_largest(w);
    }
    let s: T = wavefunctions[0].iter().copied().sum();
    if s < T::zero() {
        wavefunctions[0].mapv_inplace(|v| -v);
    }
    let mean_flux = |w: &Array1<T>| -> T { w.iter().zip(&phis).map(|(a, x)| *a * *a * *x).sum() };
    let root = T::FRAC_1_SQRT_2();
    let combine = |sign: T, w: &[Array1<T>]| -> Array1<T> { (&w[0] + &w[1].mapv(|v| v * sign)).mapv(|v| v * root) };
    let mut l = combine(T::one(), &wavefunctions);
    if mean_flux(&l) > params.phi_ext {
        wavefunctions[1].mapv_inplace(|v| -v);
        l = combine(T::one(), &wavefunctions);
    }
    let r = combine(-T::one(), &wavefunctions);
    let (mean_flux_l, mean_flux_r) = (mean_flux(&l), mean_flux(&r));
    if !(mean_flux_l < params.phi_ext && params.phi_ext < mean_flux_r) {
        return Err(Error::ModelRegime("lowest pair is not a left/right localized doublet".into()));
    }
    let to_state = |v: &Array1<T>| StateVector::new(v.iter().map(|&x| c(x)).collect());
    Ok(SquidSpectrum {
        params: *params,
        delta_e: energies[1] - energies[0],
        energies,
        l_state: to_state(&l)?,
        r_state: to_state(&r)?,
        wavefunctions,
        mean_flux_l,
        mean_flux_r,
        barrier,
    })
}

fn fix_sign_by_largest<T: Real>(w: &mut Array1<T>) {
    let mut best = T::zero();
    for &v in w.iter() {
        if v.abs() > best.abs() {
            best = v;
        }
    }
    if best < T::zero() {
        w.mapv_inplace(|v| -v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_is_symmetric_about_half() {
        let p = SquidParams::<f64>::default();
        let g = p.grid.nodes();
        for j in 0..g.n {
            let mirrored = g.node(g.n - 1 - j);
            assert!((p.potential(g.node(j)) - p.potential(mirrored)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_small_grid_and_single_well() {
        let e = SquidParams::<f64>::new(200.0, 1.0, 1.0, 0.5, 10).unwrap_err();
        assert!(e.to_string().contains("256"));
        assert!(matches!(SquidParams::<f64>::new(200.0, 1.0, 0.05, 0.5, 512), Err(Error::ModelRegime(_))));
    }

    #[test]
    fn default_doublet() {
        let s = solve_spectrum(&SquidParams::<f64>::default(), 4).unwrap();
        assert!(s.delta_e > 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let dot = s.wavefunctions[i].dot(&s.wavefunctions[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-8);
            }
        }
        assert!(s.mean_flux_l < 0.5 && s.mean_flux_r > 0.5);
        assert!((s.mean_flux_l + s.mean_flux_r - 1.0).abs() < 1e-6);
        // Little weight in the outer tenth of the window.
        let n = s.params.grid.n_points;
        let edge = n / 10;
        for w in &s.wavefunctions[..2] {
            let outer: f64 = w.iter().take(edge).chain(w.iter().skip(n - edge)).map(|v| v * v).sum();
            assert!(outer < 1e-6);
        }
    }

    #[test]
    fn from_si_round_trip() {
        let (p, units) = SquidParams::<f64>::from_si(1e-13, 2.4e-10, 1.4e-5, 0.5, 512).unwrap();
        assert!((p.i_c - 1.4e-5 * 2.4e-10 / SI.phi_0).abs() < 1e-12);
        assert!((units.energy_joule * units.time_second - SI.hbar).abs() / SI.hbar < 1e-12);
    }
}
