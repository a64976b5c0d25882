//! Discrete Wigner transform on a uniform one-dimensional position basis.
//!
//! For nodes `x_j = x0 + j h` and a trace-one density matrix `rho_jk` the
//! transform evaluated at node `i` is
//!
//! ```text
//! W(x_i, p) = (1/pi) [ rho_ii + 2 sum_{k>=1} Re(rho_{i+k,i-k} exp(-2 i p k h)) ]
//! ```
//!
//! which is the midpoint discretization of `(1/2pi) ∫ rho(x+y/2, x-y/2) e^{-ipy} dy`
//! with `hbar = 1`. Row centres of the output grid are snapped to basis nodes.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::parallel;
use crate::scalar::{cis, Real};

/// A uniform grid of basis positions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1d<T: Real> {
    pub x0: T,
    pub h: T,
    pub n: usize,
}

impl<T: Real> Grid1d<T> {
    pub fn new(x0: T, h: T, n: usize) -> Result<Self> {
        if n == 0 || !(h > T::zero()) || !x0.is_finite() || !h.is_finite() {
            return Err(Error::Argument(format!("invalid grid x0={:e} h={:e} n={}", x0, h, n)));
        }
        Ok(Self { x0, h, n })
    }

    /// Builds a grid from explicit node positions, rejecting non-uniform spacing.
    pub fn from_nodes(nodes: &[T]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::UnsupportedBasis("need at least two nodes".into()));
        }
        let n = nodes.len();
        let h = (nodes[n - 1] - nodes[0]) / T::from_usize_lossy(n - 1);
        if !(h > T::zero()) {
            return Err(Error::UnsupportedBasis("nodes must be strictly increasing".into()));
        }
        let tol = h * T::tol(1e-9) * T::from_usize_lossy(n).sqrt().max(T::one());
        for (j, &x) in nodes.iter().enumerate() {
            let want = nodes[0] + h * T::from_usize_lossy(j);
            if (x - want).abs() > tol.max(h * T::tol(1e-6)) {
                return Err(Error::UnsupportedBasis(format!("node {} deviates from uniform spacing", j)));
            }
        }
        Self::new(nodes[0], h, n)
    }

    pub fn node(&self, j: usize) -> T {
        self.x0 + self.h * T::from_usize_lossy(j)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}

/// Requested phase-space window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerSpec<T: Real> {
    pub x_min: T,
    pub x_max: T,
    pub nx: usize,
    pub p_min: T,
    pub p_max: T,
    pub np: usize,
}

impl<T: Real> WignerSpec<T> {
    /// Covers the whole basis in x and the full Brillouin zone `|p| < pi/(2h)`.
    pub fn covering(grid: &Grid1d<T>, nx: usize, np: usize) -> Self {
        let half = T::PI() / (T::lit(2.0) * grid.h);
        Self {
            x_min: grid.x0 - grid.h / T::lit(2.0),
            x_max: grid.node(grid.n - 1) + grid.h / T::lit(2.0),
            nx,
            p_min: -half,
            p_max: half,
            np,
        }
    }

    fn check(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max].iter().all(|v| v.is_finite());
        if !finite || self.nx == 0 || self.np == 0 || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::Argument("invalid Wigner window".into()));
        }
        Ok(())
    }
}

/// Sampled Wigner function. `values[[a, b]]` is the value at the centre of
/// cell `a` in x and cell `b` in p.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid<T: Real> {
    pub x_min: T,
    pub x_max: T,
    pub p_min: T,
    pub p_max: T,
    pub nx: usize,
    pub np: usize,
    pub values: Array2<T>,
}

impl<T: Real> WignerGrid<T> {
    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::from_usize_lossy(self.nx)
    }

    pub fn dp(&self) -> T {
        (self.p_max - self.p_min) / T::from_usize_lossy(self.np)
    }

    pub fn x_center(&self, a: usize) -> T {
        self.x_min + self.dx() * (T::from_usize_lossy(a) + T::lit(0.5))
    }

    pub fn p_center(&self, b: usize) -> T {
        self.p_min + self.dp() * (T::from_usize_lossy(b) + T::lit(0.5))
    }

    /// Cell sum times cell area.
    pub fn normalization(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.dx() * self.dp()
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Marginal over p, one entry per x cell.
    pub fn x_marginal(&self) -> Vec<T> {
        let dp = self.dp();
        self.values.rows().into_iter().map(|r| r.iter().copied().sum::<T>() * dp).collect()
    }
}

/// Wigner transform of `rho` expressed on `grid`.
///
/// The x window is snapped so that every row centre is a basis node and the
/// row pitch is an integer multiple of `h`; the returned grid reports the
/// snapped bounds.
pub fn wigner<T: Real>(rho: &DensityMatrix<T>, grid: &Grid1d<T>, spec: &WignerSpec<T>) -> Result<WignerGrid<T>> {
    spec.check()?;
    if rho.dim() != grid.n {
        return Err(Error::Shape(format!("density matrix dimension {} but grid has {} nodes", rho.dim(), grid.n)));
    }
    let h = grid.h;
    let want_dx = (spec.x_max - spec.x_min) / T::from_usize_lossy(spec.nx);
    let stride = (want_dx / h).round().max(T::one());
    let dx = stride * h;
    let stride = stride.to_usize().unwrap_or(1).max(1);
    let first_center = spec.x_min + want_dx / T::lit(2.0);
    let first = ((first_center - grid.x0) / h).round();
    let x_min = grid.x0 + first * h - dx / T::lit(2.0);
    let x_max = x_min + dx * T::from_usize_lossy(spec.nx);
    let first = first.to_i64().ok_or_else(|| Error::Numeric("Wigner window offset overflow".into()))?;

    let dp = (spec.p_max - spec.p_min) / T::from_usize_lossy(spec.np);
    let momenta: Vec<T> = (0..spec.np)
        .map(|b| spec.p_min + dp * (T::from_usize_lossy(b) + T::lit(0.5)))
        .collect();
    let m = rho.entries();
    let n = grid.n as i64;
    let rows: Vec<usize> = (0..spec.nx).collect();
    let inv_pi = T::FRAC_1_PI();
    let two = T::lit(2.0);

    let computed = parallel::map_ordered(&rows, |&a| {
        let i = first + (a * stride) as i64;
        if i < 0 || i >= n {
            return vec![T::zero(); momenta.len()];
        }
        let i = i as usize;
        let kmax = i.min(grid.n - 1 - i);
        let anti: Vec<_> = (1..=kmax).map(|k| m[[i + k, i - k]]).collect();
        let diag = m[[i, i]].re;
        momenta
            .iter()
            .map(|&p| {
                let step = cis(-two * p * h);
                let mut z = step;
                let mut acc = T::zero();
                for c in &anti {
                    acc += (*c * z).re;
                    z *= step;
                }
                inv_pi * (diag + two * acc)
            })
            .collect()
    });

    let mut values = Array2::zeros((spec.nx, spec.np));
    for (a, row) in computed.into_iter().enumerate() {
        for (b, v) in row.into_iter().enumerate() {
            values[[a, b]] = v;
        }
    }
    Ok(WignerGrid { x_min, x_max, p_min: spec.p_min, p_max: spec.p_max, nx: spec.nx, np: spec.np, values })
}
