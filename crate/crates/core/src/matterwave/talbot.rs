//! One-dimensional scalar paraxial model of a three-grating interferometer.
//!
//! Grating 2 is illuminated by unit plane waves from a uniform fan of
//! angles. For tilt `theta` the paraxial field behind a distance `L` is the
//! normal-incidence field displaced by `theta L` (up to a phase), so each
//! angle is propagated as the normal-incidence spectrum times
//! `exp(-i q theta L)`. Intensities are averaged incoherently, multiplied by
//! grating 3 at each scan shift and summed over a central window that stays
//! clear of the aperture edges.

use rustfft::{FftNum, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{BeamParams, GratingStack};
use crate::error::{Error, Result};
use crate::parallel;
use crate::scalar::{cis, Cplx, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FringeModel {
    /// Fresnel propagation of the matter wave.
    Wave,
    /// Straight-line shadows with no propagation phase.
    Ray,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Incoherence<T: Real> {
    pub n_angles: usize,
    /// Full width of the fan in radians; `None` means `open_fraction * d / L`.
    pub angular_spread: Option<T>,
}

impl<T: Real> Incoherence<T> {
    pub fn coherent() -> Self {
        Self { n_angles: 1, angular_spread: Some(T::zero()) }
    }
}

impl<T: Real> Default for Incoherence<T> {
    fn default() -> Self {
        Self { n_angles: 32, angular_spread: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions<T: Real> {
    pub n_scan: usize,
    pub incoherence: Incoherence<T>,
    pub model: FringeModel,
    pub samples_per_period: usize,
    /// Simulation domain width in units of the illuminated aperture.
    pub pad_factor: usize,
}

impl<T: Real> Default for ScanOptions<T> {
    fn default() -> Self {
        Self { n_scan: 64, incoherence: Incoherence::default(), model: FringeModel::Wave, samples_per_period: 64, pad_factor: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeScan<T: Real> {
    /// Grating-3 displacements in `[0, d)`.
    pub shifts: Vec<T>,
    pub counts: Vec<T>,
    pub visibility: T,
    pub model: FringeModel,
    pub lambda: T,
    pub separation: T,
    pub angular_spread: T,
}

/// Angle-averaged intensity at grating 3, ready to be masked.
#[derive(Clone, Debug)]
pub struct FringeSimulator<T: Real> {
    stack: GratingStack<T>,
    dx: T,
    positions: Vec<T>,
    intensity: Vec<T>,
    pub angular_spread: T,
}

/// Cumulative open length of a periodic slit array whose slit `m` covers
/// `[origin + m d, origin + m d + width]`.
fn cumulative_open<T: Real>(x: T, origin: T, d: T, width: T) -> T {
    let u = x - origin;
    let cells = (u / d).floor();
    let rem = u - cells * d;
    cells * width + rem.max(T::zero()).min(width)
}

impl<T: Real + FftNum> FringeSimulator<T> {
    pub fn new(beam: &BeamParams<T>, stack: &GratingStack<T>, opts: &ScanOptions<T>) -> Result<Self> {
        stack.validate()?;
        if opts.samples_per_period < 8 || opts.pad_factor < 2 || opts.incoherence.n_angles == 0 {
            return Err(Error::Argument("need samples_per_period >= 8, pad_factor >= 2, n_angles >= 1".into()));
        }
        let d = stack.d;
        let l = stack.l;
        let lambda = beam.lambda_db;
        let two = T::lit(2.0);
        let spp = opts.samples_per_period;
        let n = opts.pad_factor * stack.n_slits * spp;
        let dx = d / T::from_usize_lossy(spp);
        let width = stack.open_fraction * d;
        let half_aperture = T::from_usize_lossy(stack.n_slits) * d / two;
        let spread = opts.incoherence.angular_spread.unwrap_or(stack.open_fraction * d / l);
        if !(spread >= T::zero()) || !spread.is_finite() {
            return Err(Error::Argument("angular spread must be finite and non-negative".into()));
        }
        let n_angles = opts.incoherence.n_angles;
        let angles: Vec<T> = if n_angles == 1 {
            vec![T::zero()]
        } else {
            (0..n_angles)
                .map(|j| spread * ((T::from_usize_lossy(j) + T::lit(0.5)) / T::from_usize_lossy(n_angles) - T::lit(0.5)))
                .collect()
        };
        let theta_max = angles.iter().fold(T::zero(), |m, a| m.max(a.abs()));

        if opts.model == FringeModel::Wave {
            let feature = lambda * l / d;
            if feature < two * dx {
                return Err(Error::Resolution(format!(
                    "lambda L / d = {:e} m is not resolved by the {:e} m sampling",
                    feature, dx
                )));
            }
            let margin = T::from_usize_lossy(opts.pad_factor - 1) * half_aperture;
            if T::lit(4.0) * feature + theta_max * l > margin {
                return Err(Error::Resolution(format!(
                    "diffraction spread {:e} m overruns the {:e} m padding",
                    T::lit(4.0) * feature + theta_max * l,
                    margin
                )));
            }
        }

        let centre = n / 2;
        let x_of = |j: usize| (T::from_usize_lossy(j) - T::from_usize_lossy(centre)) * dx;
        // Slit m of grating 2 is centred on (m - (n_slits - 1)/2) d.
        let origin2 = -(T::from_usize_lossy(stack.n_slits - 1) / two) * d - width / two;
        let lo = origin2;
        let hi = origin2 + T::from_usize_lossy(stack.n_slits - 1) * d + width;
        let aperture = |a: T, b: T| -> T {
            let ca = cumulative_open(a.max(lo).min(hi), origin2, d, width);
            let cb = cumulative_open(b.max(lo).min(hi), origin2, d, width);
            (cb - ca) / dx
        };

        let half_window = T::from_usize_lossy(stack.n_slits) * d / T::lit(4.0);
        let window: Vec<usize> = (0..n).filter(|&j| x_of(j).abs() < half_window).collect();
        let positions: Vec<T> = window.iter().map(|&j| x_of(j)).collect();
        let half_px = dx / two;

        let per_angle: Vec<Vec<T>> = match opts.model {
            FringeModel::Ray => parallel::map_ordered(&angles, |&theta| {
                let shift = theta * l;
                positions.iter().map(|&x| aperture(x - half_px - shift, x + half_px - shift)).collect()
            }),
            FringeModel::Wave => {
                let mut planner = FftPlanner::<T>::new();
                let forward = planner.plan_fft_forward(n);
                let inverse = planner.plan_fft_inverse(n);
                let mut spectrum: Vec<Cplx<T>> =
                    (0..n).map(|j| Cplx::new(aperture(x_of(j) - half_px, x_of(j) + half_px), T::zero())).collect();
                forward.process(&mut spectrum);
                let dq = T::TAU() / (T::from_usize_lossy(n) * dx);
                let wavenumbers: Vec<T> = (0..n)
                    .map(|m| if m < n / 2 { T::from_usize_lossy(m) } else { -T::from_usize_lossy(n - m) } * dq)
                    .collect();
                let chirp = lambda * l / (T::lit(4.0) * T::PI());
                for (s, &q) in spectrum.iter_mut().zip(&wavenumbers) {
                    *s *= cis(-q * q * chirp);
                }
                let scale = T::one() / T::from_usize_lossy(n);
                parallel::map_ordered(&angles, |&theta| {
                    let shift = theta * l;
                    let mut field: Vec<Cplx<T>> = spectrum.iter().zip(&wavenumbers).map(|(s, &q)| *s * cis(-q * shift)).collect();
                    inverse.process(&mut field);
                    window.iter().map(|&j| (field[j] * scale).norm_sqr()).collect()
                })
            }
        };
        let inv = T::one() / T::from_usize_lossy(angles.len());
        let mut intensity = vec![T::zero(); positions.len()];
        for row in &per_angle {
            for (acc, v) in intensity.iter_mut().zip(row) {
                *acc += *v * inv;
            }
        }
        Ok(Self { stack: *stack, dx, positions, intensity, angular_spread: spread })
    }

    /// Transmitted flux with grating 3 displaced by `shift`.
    pub fn counts(&self, shift: T) -> T {
        let two = T::lit(2.0);
        let d = self.stack.d;
        let width = self.stack.open_fraction * d;
        let origin = -(T::from_usize_lossy(self.stack.n_slits - 1) / two) * d - width / two + shift;
        let half_px = self.dx / two;
        self.positions
            .iter()
            .zip(&self.intensity)
            .map(|(&x, &i)| i * (cumulative_open(x + half_px, origin, d, width) - cumulative_open(x - half_px, origin, d, width)) / self.dx)
            .sum()
    }

    /// Angle-averaged intensity on the counting window.
    pub fn intensity(&self) -> (&[T], &[T]) {
        (&self.positions, &self.intensity)
    }
}

fn visibility<T: Real>(counts: &[T]) -> T {
    let max = counts.iter().copied().fold(T::neg_infinity(), T::max);
    let min = counts.iter().copied().fold(T::infinity(), T::min);
    if max + min > T::zero() {
        (max - min) / (max + min)
    } else {
        T::zero()
    }
}

/// Scans grating 3 over one period in `n_scan` equal steps.
pub fn simulate_fringe_scan<T: Real + FftNum>(beam: &BeamParams<T>, stack: &GratingStack<T>, opts: &ScanOptions<T>) -> Result<FringeScan<T>> {
    if opts.n_scan < 2 {
        return Err(Error::Argument("n_scan must be at least 2".into()));
    }
    let sim = FringeSimulator::new(beam, stack, opts)?;
    let shifts: Vec<T> = (0..opts.n_scan).map(|k| stack.d * T::from_usize_lossy(k) / T::from_usize_lossy(opts.n_scan)).collect();
    let counts: Vec<T> = shifts.iter().map(|&s| sim.counts(s)).collect();
    Ok(FringeScan {
        visibility: visibility(&counts),
        shifts,
        counts,
        model: opts.model,
        lambda: beam.lambda_db,
        separation: stack.l,
        angular_spread: sim.angular_spread,
    })
}

/// Strongest period in a uniformly sampled scan covering an integer number
/// of its own periods, refined by parabolic interpolation of the spectrum.
pub fn dominant_period<T: Real>(shifts: &[T], counts: &[T]) -> Result<T> {
    let n = counts.len();
    if n < 8 || shifts.len() != n {
        return Err(Error::Argument("need at least 8 equally spaced samples".into()));
    }
    let step = shifts[1] - shifts[0];
    let span = step * T::from_usize_lossy(n);
    let mean = counts.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let power = |k: usize| -> T {
        let mut acc = Cplx::new(T::zero(), T::zero());
        for (j, &c) in counts.iter().enumerate() {
            let phase = -T::TAU() * T::from_usize_lossy(k * j % n) / T::from_usize_lossy(n);
            acc += cis(phase) * (c - mean);
        }
        acc.norm()
    };
    let mags: Vec<T> = (0..=n / 2).map(power).collect();
    let (best, _) = mags.iter().enumerate().skip(1).fold((1, T::neg_infinity()), |acc, (k, &m)| if m > acc.1 { (k, m) } else { acc });
    if !(mags[best] > T::zero()) {
        return Err(Error::Numeric("scan is flat; no dominant period".into()));
    }
    let mut k = T::from_usize_lossy(best);
    if best + 1 < mags.len() {
        let (a, b, c) = (mags[best - 1], mags[best], mags[best + 1]);
        let den = a - b - b + c;
        if den < T::zero() {
            k += T::lit(0.5) * (a - c) / den;
        }
    }
    Ok(span / k)
}

/// Dominant period of a scan over `n_periods` grating periods.
pub fn scan_period<T: Real + FftNum>(beam: &BeamParams<T>, stack: &GratingStack<T>, opts: &ScanOptions<T>, n_periods: usize) -> Result<T> {
    let sim = FringeSimulator::new(beam, stack, opts)?;
    let total = opts.n_scan.max(2) * n_periods.max(1);
    let span = stack.d * T::from_usize_lossy(n_periods.max(1));
    let shifts: Vec<T> = (0..total).map(|k| span * T::from_usize_lossy(k) / T::from_usize_lossy(total)).collect();
    let counts: Vec<T> = shifts.iter().map(|&s| sim.counts(s)).collect();
    dominant_period(&shifts, &counts)
}
