use ndarray::Array2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::spectrum::SquidSpectrum;
use crate::error::{Error, Result};
use crate::parallel;
use crate::qcore::{wigner, DensityMatrix, StateVector, WignerGrid, WignerSpec};
use crate::scalar::{c, cis, Cplx, Real};

/// RK4 step is `1 / (RK4_STEP_FACTOR * max(delta_e, gamma))`.
pub const RK4_STEP_FACTOR: f64 = 100.0;

const TRACE_DRIFT_LIMIT: f64 = 1e-6;
const TRUNCATION_LIMIT: f64 = 0.01;

/// `cos^2(delta_e t / 2)`.
pub fn tunneling_probability<T: Real>(delta_e: T, t: T) -> T {
    let x = (delta_e * t / T::lit(2.0)).cos();
    x * x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullEvolution<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    /// Weight of the initial state inside the retained modes.
    pub retained_weight: T,
}

/// Spectral propagation in the retained eigenbasis.
///
/// The initial state is projected onto the retained modes and renormalized;
/// more than 1% weight outside them is an error.
pub fn evolve_full<T: Real>(spectrum: &SquidSpectrum<T>, initial: &StateVector<T>, times: &[T]) -> Result<FullEvolution<T>> {
    let n = spectrum.params.grid.n_points;
    if initial.dim() != n {
        return Err(Error::Shape(format!("initial state has dimension {} but the grid has {}", initial.dim(), n)));
    }
    if !initial.is_normalized(T::tol(1e-10)) {
        return Err(Error::InvalidState("initial state is not normalized".into()));
    }
    let psi0 = initial.amplitudes();
    let coeffs: Vec<Cplx<T>> = spectrum
        .wavefunctions
        .iter()
        .map(|w| w.iter().zip(psi0.iter()).map(|(a, b)| *b * *a).sum())
        .collect();
    let weight: T = coeffs.iter().map(|z| z.norm_sqr()).sum();
    if T::one() - weight > T::lit(TRUNCATION_LIMIT) {
        return Err(Error::Truncation(format!(
            "initial state has {:.3e} weight outside the {} retained modes",
            (T::one() - weight).to_f64_lossy(),
            coeffs.len()
        )));
    }
    let scale = T::one() / weight.sqrt();
    let states = parallel::map_ordered(times, |&t| {
        let mut out = vec![c(T::zero()); n];
        for ((w, &ck), &ek) in spectrum.wavefunctions.iter().zip(&coeffs).zip(&spectrum.energies) {
            let a = ck * cis(-ek * t) * scale;
            for (o, &v) in out.iter_mut().zip(w.iter()) {
                *o += a * v;
            }
        }
        StateVector::new(out)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(FullEvolution { times: times.to_vec(), states, retained_weight: weight })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DephasingBasis {
    /// The sigma_z (left/right current) basis.
    Flux,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DephasingModel<T: Real> {
    pub gamma: T,
    pub basis: DephasingBasis,
}

impl<T: Real> DephasingModel<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma >= T::zero()) || !gamma.is_finite() {
            return Err(Error::Argument(format!("dephasing rate must be finite and non-negative, got {:e}", gamma)));
        }
        Ok(Self { gamma, basis: DephasingBasis::Flux })
    }
}

/// Two-level trajectory in the `{|L>, |R>}` basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelTrajectory<T: Real> {
    pub times: Vec<T>,
    pub rho_t: Vec<DensityMatrix<T>>,
    pub p_l: Vec<T>,
}

type M2<T> = [[Cplx<T>; 2]; 2];

fn rhs<T: Real>(rho: &M2<T>, half_de: T, gamma: T) -> M2<T> {
    // H = -(dE/2) sigma_x; -i[H, rho] = i (dE/2) [sigma_x, rho].
    let i = Complex::new(T::zero(), T::one());
    let sx_rho = [rho[1], rho[0]];
    let rho_sx = [[rho[0][1], rho[0][0]], [rho[1][1], rho[1][0]]];
    let mut out = [[c(T::zero()); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] = i * half_de * (sx_rho[a][b] - rho_sx[a][b]);
        }
    }
    // gamma (sz rho sz - rho) only touches coherences.
    let two_g = gamma + gamma;
    out[0][1] -= rho[0][1] * two_g;
    out[1][0] -= rho[1][0] * two_g;
    out
}

fn axpy<T: Real>(x: &M2<T>, k: &M2<T>, s: T) -> M2<T> {
    let mut out = *x;
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] += k[a][b] * s;
        }
    }
    out
}

fn rk4_step<T: Real>(rho: &M2<T>, dt: T, half_de: T, gamma: T) -> M2<T> {
    let half = T::lit(0.5);
    let k1 = rhs(rho, half_de, gamma);
    let k2 = rhs(&axpy(rho, &k1, dt * half), half_de, gamma);
    let k3 = rhs(&axpy(rho, &k2, dt * half), half_de, gamma);
    let k4 = rhs(&axpy(rho, &k3, dt), half_de, gamma);
    let sixth = dt / T::lit(6.0);
    let mut out = *rho;
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] += (k1[a][b] + k2[a][b] * T::lit(2.0) + k3[a][b] * T::lit(2.0) + k4[a][b]) * sixth;
        }
    }
    out
}

/// Integrates `drho/dt = -i[H, rho] + gamma (sz rho sz - rho)` with
/// `H = -(delta_e/2) sigma_x`, starting from `initial` at `t = 0`.
pub fn evolve_two_level<T: Real>(
    delta_e: T,
    model: &DephasingModel<T>,
    initial: &DensityMatrix<T>,
    times: &[T],
) -> Result<TwoLevelTrajectory<T>> {
    if initial.dim() != 2 {
        return Err(Error::Shape(format!("two-level evolution needs a 2x2 state, got {}", initial.dim())));
    }
    initial.validate()?;
    if !(delta_e >= T::zero()) || !delta_e.is_finite() {
        return Err(Error::Argument("delta_e must be finite and non-negative".into()));
    }
    if times.iter().any(|t| !(*t >= T::zero()) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Argument("times must be finite, non-negative and ascending".into()));
    }
    let gamma = model.gamma;
    let rate = delta_e.max(gamma);
    let max_step = if rate > T::zero() { T::one() / (T::lit(RK4_STEP_FACTOR) * rate) } else { T::infinity() };
    let half_de = delta_e / T::lit(2.0);
    let e = initial.entries();
    let mut rho: M2<T> = [[e[[0, 0]], e[[0, 1]]], [e[[1, 0]], e[[1, 1]]]];
    let mut t_now = T::zero();
    let mut rho_t = Vec::with_capacity(times.len());
    let mut p_l = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - t_now;
        if span > T::zero() && rate > T::zero() {
            let steps = (span / max_step).ceil().max(T::one());
            let dt = span / steps;
            let steps = steps.to_usize().ok_or_else(|| Error::Numeric("step count overflow".into()))?;
            for _ in 0..steps {
                rho = rk4_step(&rho, dt, half_de, gamma);
            }
        }
        t_now = t;
        let tr = rho[0][0].re + rho[1][1].re;
        if (tr - T::one()).abs() > T::lit(TRACE_DRIFT_LIMIT) || !tr.is_finite() {
            return Err(Error::Numeric(format!("trace drifted to {:e} at t = {:e}", tr, t)));
        }
        let off = (rho[0][1] + rho[1][0].conj()) * T::lit(0.5);
        let m = Array2::from_shape_vec((2, 2), vec![c(rho[0][0].re), off, off.conj(), c(rho[1][1].re)])
            .expect("2x2 shape");
        let d = DensityMatrix::new(m)?;
        p_l.push(rho[0][0].re);
        rho_t.push(d);
    }
    Ok(TwoLevelTrajectory { times: times.to_vec(), rho_t, p_l })
}

/// States to render in phase space.
pub enum SnapshotSource<'a, T: Real> {
    /// Two-level density matrices lifted through the L/R states.
    TwoLevel(&'a TwoLevelTrajectory<T>),
    /// Pure states on the flux grid.
    Full(&'a [StateVector<T>]),
}

/// Wigner functions of each state in `source`.
pub fn wigner_snapshots<T: Real>(spectrum: &SquidSpectrum<T>, source: SnapshotSource<'_, T>, spec: &WignerSpec<T>) -> Result<Vec<WignerGrid<T>>> {
    let grid = spectrum.nodes();
    let densities: Vec<DensityMatrix<T>> = match source {
        SnapshotSource::Full(states) => states.iter().map(|s| s.to_density()).collect(),
        SnapshotSource::TwoLevel(traj) => traj.rho_t.iter().map(|r| lift(spectrum, r)).collect::<Result<_>>()?,
    };
    densities.iter().map(|rho| wigner(rho, &grid, spec)).collect()
}

fn lift<T: Real>(spectrum: &SquidSpectrum<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    if rho.dim() != 2 {
        return Err(Error::Shape("lifting needs a 2x2 state".into()));
    }
    let l = spectrum.l_state.amplitudes();
    let r = spectrum.r_state.amplitudes();
    let basis = [l, r];
    let n = l.len();
    let mut out = Array2::from_elem((n, n), c(T::zero()));
    for a in 0..2 {
        for b in 0..2 {
            let w = rho.get(a, b);
            for i in 0..n {
                let left = basis[a][i] * w;
                for j in 0..n {
                    out[[i, j]] += left * basis[b][j].conj();
                }
            }
        }
    }
    DensityMatrix::new(out)
}

/// Cat-state features of a Wigner grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatDiagnostics<T: Real> {
    /// Largest `|W|` in the cells within one row pitch of `phi_ext`.
    pub interference_amplitude: T,
    /// Most negative value anywhere.
    pub min_value: T,
    /// Larger of the two half-plane maxima.
    pub peak_amplitude: T,
    /// `(x cell, p cell)` of the maxima for `x < phi_ext` and `x > phi_ext`,
    /// ignoring `|x - phi_ext| < separation / 4` where the fringes live.
    pub left_peak: (usize, usize),
    pub right_peak: (usize, usize),
}

pub fn cat_diagnostics<T: Real>(w: &WignerGrid<T>, phi_ext: T, separation: T) -> CatDiagnostics<T> {
    let strip = w.dx();
    let exclusion = separation / T::lit(4.0);
    let mut interference = T::zero();
    let mut left = ((0, 0), T::neg_infinity());
    let mut right = ((0, 0), T::neg_infinity());
    for a in 0..w.nx {
        let x = w.x_center(a);
        let central = (x - phi_ext).abs() <= strip;
        for b in 0..w.np {
            let v = w.values[[a, b]];
            if central {
                interference = interference.max(v.abs());
            }
            if (x - phi_ext).abs() < exclusion {
                continue;
            }
            let slot = if x < phi_ext { &mut left } else { &mut right };
            if v > slot.1 {
                *slot = ((a, b), v);
            }
        }
    }
    CatDiagnostics {
        interference_amplitude: interference,
        min_value: w.min_value(),
        peak_amplitude: left.1.max(right.1),
        left_peak: left.0,
        right_peak: right.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::squid::{solve_spectrum, SquidParams};

    #[test]
    fn closed_form_tunnelling() {
        assert_eq!(tunneling_probability(0.3f64, 0.0), 1.0);
        let de = 0.37f64;
        assert!(tunneling_probability(de, std::f64::consts::PI / de) < 1e-30);
        assert!((tunneling_probability(de, std::f64::consts::FRAC_PI_2 / de) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_system_matches_cosine() {
        let de = 0.02f64;
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 10.0).collect();
        let rho0 = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let traj = evolve_two_level(de, &DephasingModel::new(0.0).unwrap(), &rho0, &times).unwrap();
        for (t, p) in times.iter().zip(&traj.p_l) {
            assert!((p - tunneling_probability(de, *t)).abs() < 1e-6);
        }
    }

    #[test]
    fn pure_dephasing_closed_form() {
        let g = 0.5f64;
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let plus = StateVector::normalized(vec![c(1.0), c(1.0)]).unwrap().to_density();
        let traj = evolve_two_level(0.0, &DephasingModel::new(g).unwrap(), &plus, &times).unwrap();
        for (t, r) in times.iter().zip(&traj.rho_t) {
            assert!((r.get(0, 1).norm() - 0.5 * (-2.0 * g * t).exp()).abs() < 1e-8);
            assert!((r.get(0, 0).re - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_descending_times() {
        let rho0 = DensityMatrix::diagonal(&[1.0f64, 0.0]).unwrap();
        let m = DephasingModel::new(0.1).unwrap();
        assert!(evolve_two_level(1.0, &m, &rho0, &[1.0, 0.5]).is_err());
        assert!(DephasingModel::new(-1.0f64).is_err());
    }

    #[test]
    fn stationary_ground_state() {
        let s = solve_spectrum(&SquidParams::<f64>::with_window(200.0, 1.0, 1.0, 0.5, 512), 2).unwrap();
        let g = s.level(0);
        let ev = evolve_full(&s, &g, &[0.0, 5.0, 50.0]).unwrap();
        for st in &ev.states {
            assert!((st.fidelity(&g).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn truncation_reported() {
        let s = solve_spectrum(&SquidParams::<f64>::with_window(200.0, 1.0, 1.0, 0.5, 512), 2).unwrap();
        let spike = StateVector::basis(512, 256).unwrap();
        assert!(matches!(evolve_full(&s, &spike, &[0.0]), Err(Error::Truncation(_))));
    }
}
